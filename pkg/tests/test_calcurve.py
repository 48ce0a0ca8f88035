import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carbcal.calcurve import CalibrationCurve, load_curve
from carbcal.errors import CurveFormatError, CurveRangeError


def write_curve(tmp_path, rows, header="# comment line\n"):
    path = tmp_path / "curve.14c"
    path.write_text(header + "\n".join(",".join(str(v) for v in row) for row in rows) + "\n")
    return path


def test_load_three_row_file_identity(tmp_path):
    path = write_curve(tmp_path, [(0, 100, 5), (10, 110, 5), (20, 130, 6)])
    curve = load_curve(path)
    assert curve.cal_age.tolist() == [0, 10, 20]
    assert curve.c14_mean.tolist() == [100, 110, 130]
    assert curve.c14_sd.tolist() == [5, 5, 6]


def test_load_descending_file_is_reversed(tmp_path):
    path = write_curve(tmp_path, [(20, 130, 6), (10, 110, 5), (0, 100, 5)])
    curve = load_curve(path)
    assert curve.cal_age.tolist() == [0, 10, 20]
    assert curve.c14_mean.tolist() == [100, 110, 130]


def test_load_rejects_zero_sd_with_line_number(tmp_path):
    path = write_curve(tmp_path, [(0, 100, 5), (10, 110, 0.0), (20, 130, 6)])
    with pytest.raises(CurveFormatError, match=r":3:"):
        load_curve(path)


def test_load_rejects_duplicate_age_with_line_number(tmp_path):
    path = write_curve(tmp_path, [(0, 100, 5), (10, 110, 5), (10, 130, 6)])
    with pytest.raises(CurveFormatError, match="duplicate"):
        load_curve(path)


def test_load_rejects_garbage_and_short_rows(tmp_path):
    path = write_curve(tmp_path, [(0, 100, 5), ("ten", 110, 5)])
    with pytest.raises(CurveFormatError, match=r":3:"):
        load_curve(path)
    path2 = tmp_path / "short.14c"
    path2.write_text("0,100\n10,110\n")
    with pytest.raises(CurveFormatError, match="3 comma-separated"):
        load_curve(path2)


def test_load_ignores_extra_columns(tmp_path):
    path = write_curve(tmp_path, [(0, 100, 5, 1, 2), (10, 110, 5, 3, 4)])
    curve = load_curve(path)
    assert len(curve) == 2


def test_intcal20_has_9501_knots():
    from conftest import intcal20_path

    path = intcal20_path()
    if path is None:
        pytest.skip("IntCal20 curve file not available")
    curve = load_curve(path)
    assert len(curve) == 9501
    assert curve.support == (0.0, 55000.0)


def test_at_knot_is_exact():
    curve = CalibrationCurve([0, 10, 20], [100, 110, 130], [5, 5, 6])
    assert curve.at(10.0) == (110.0, 5.0)
    assert curve.at(20.0) == (130.0, 6.0)


def test_at_midpoint_is_linear():
    curve = CalibrationCurve([0, 10, 20], [100, 110, 130], [5, 5, 6])
    m, rho = curve.at(15.0)
    assert m == pytest.approx(120.0)
    assert rho == pytest.approx(5.5)


def test_at_outside_support_raises():
    curve = CalibrationCurve([0, 10, 20], [100, 110, 130], [5, 5, 6])
    with pytest.raises(CurveRangeError):
        curve.at(21.0)
    with pytest.raises(CurveRangeError):
        curve.at(-0.5)


def test_at_vectorised_matches_scalar():
    curve = CalibrationCurve([0, 10, 20, 35], [100, 110, 130, 90], [5, 5, 6, 7])
    thetas = np.linspace(0, 35, 101)
    m_vec, rho_vec = curve.at(thetas)
    for k, t in enumerate(thetas):
        m, rho = curve.at(float(t))
        assert m == pytest.approx(m_vec[k])
        assert rho == pytest.approx(rho_vec[k])
        m2, rho2 = curve.at_scalar(float(t))
        assert m2 == pytest.approx(m_vec[k])
        assert rho2 == pytest.approx(rho_vec[k])


@settings(max_examples=200, deadline=None)
@given(
    frac=st.floats(0.0, 1.0),
    knot=st.integers(0, 2),
)
def test_interpolation_is_convex_combination(frac, knot):
    curve = CalibrationCurve([0, 10, 20, 40], [100, 110, 130, 95], [5, 5, 6, 3])
    lo_age = float(curve.cal_age[knot])
    hi_age = float(curve.cal_age[knot + 1])
    theta = lo_age + frac * (hi_age - lo_age)
    m, rho = curve.at(theta)
    w = (theta - lo_age) / (hi_age - lo_age)
    assert m == pytest.approx((1 - w) * curve.c14_mean[knot] + w * curve.c14_mean[knot + 1])
    assert rho == pytest.approx((1 - w) * curve.c14_sd[knot] + w * curve.c14_sd[knot + 1])
    assert rho > 0


def test_validation_rejects_bad_construction():
    with pytest.raises(CurveFormatError):
        CalibrationCurve([0], [1], [1])
    with pytest.raises(CurveFormatError):
        CalibrationCurve([0, 1], [1, 2], [1, -1])
    with pytest.raises(CurveFormatError):
        CalibrationCurve([0, 0], [1, 2], [1, 1])
    with pytest.raises(CurveFormatError):
        CalibrationCurve([0, 1, 2], [1, 2], [1, 1])


def test_curve_arrays_are_immutable(synth_curve):
    with pytest.raises(ValueError):
        synth_curve.cal_age[0] = -1.0
