"""Loading and interpolation of published radiocarbon calibration curves.

A curve file is plain text: comment lines start with '#', data rows are
comma-separated ``CAL BP, 14C age, Sigma[, Delta 14C, Sigma]`` (trailing
columns ignored).  Files listing calendar age in descending order, as the
published IntCal distributions do, are normalised to ascending order.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from carbcal.errors import CurveFormatError, CurveRangeError


@dataclass(frozen=True)
class CalibrationCurve:
    """Gridded posterior mean and sd of a calibration curve.

    Attributes
    ----------
    cal_age : ndarray
        Strictly increasing calendar ages (cal yr BP).
    c14_mean : ndarray
        Curve mean radiocarbon age at each knot (14C yr BP).
    c14_sd : ndarray
        Curve standard deviation at each knot (14C yr), all > 0.
    """

    cal_age: np.ndarray
    c14_mean: np.ndarray
    c14_sd: np.ndarray
    source: str = field(default="<memory>", compare=False)

    def __post_init__(self):
        cal_age = np.ascontiguousarray(self.cal_age, dtype=float)
        c14_mean = np.ascontiguousarray(self.c14_mean, dtype=float)
        c14_sd = np.ascontiguousarray(self.c14_sd, dtype=float)
        if not (len(cal_age) == len(c14_mean) == len(c14_sd)):
            raise CurveFormatError("curve columns have unequal lengths")
        if len(cal_age) < 2:
            raise CurveFormatError("curve needs at least 2 knots")
        if not np.all(np.isfinite(cal_age)) or not np.all(np.isfinite(c14_mean)):
            raise CurveFormatError("curve contains non-finite values")
        diffs = np.diff(cal_age)
        if np.any(diffs <= 0):
            i = int(np.argmax(diffs <= 0))
            raise CurveFormatError(
                f"calendar ages not strictly increasing at knot {i + 1} "
                f"(cal BP {cal_age[i + 1]:g})"
            )
        if np.any(c14_sd <= 0):
            i = int(np.argmax(c14_sd <= 0))
            raise CurveFormatError(f"non-positive curve sd at knot {i} (cal BP {cal_age[i]:g})")
        for name, arr in (("cal_age", cal_age), ("c14_mean", c14_mean), ("c14_sd", c14_sd)):
            arr.flags.writeable = False  # immutable after load; safe to share across chains
            object.__setattr__(self, name, arr)

    @property
    def support(self) -> tuple[float, float]:
        """(min, max) calendar age covered by the curve."""
        return float(self.cal_age[0]), float(self.cal_age[-1])

    def __len__(self) -> int:
        return len(self.cal_age)

    def at(self, theta):
        """Linearly interpolated (mean, sd) at calendar age(s) ``theta``.

        Exact at knots; raises CurveRangeError outside the curve support
        (the curve is never extrapolated).
        """
        theta = np.asarray(theta, dtype=float)
        lo, hi = self.support
        if np.any(theta < lo) or np.any(theta > hi):
            bad = theta[(theta < lo) | (theta > hi)]
            first = float(np.atleast_1d(bad)[0])
            raise CurveRangeError(
                f"calendar age {first:g} outside curve support [{lo:g}, {hi:g}]"
            )
        m = np.interp(theta, self.cal_age, self.c14_mean)
        rho = np.interp(theta, self.cal_age, self.c14_sd)
        if theta.ndim == 0:
            return float(m), float(rho)
        return m, rho

    # Scalar fast path for samplers: bisect over cached Python lists avoids
    # numpy dispatch overhead in the per-evaluation hot loop.
    @cached_property
    def _knots(self) -> tuple[list, list, list]:
        return self.cal_age.tolist(), self.c14_mean.tolist(), self.c14_sd.tolist()

    def at_scalar(self, theta: float) -> tuple[float, float]:
        """Like :meth:`at` for a single float, minus range checking.

        Caller must guarantee ``theta`` lies inside the support.
        """
        ages, means, sds = self._knots
        i = bisect_right(ages, theta) - 1
        if i >= len(ages) - 1:
            return means[-1], sds[-1]
        if i < 0:
            return means[0], sds[0]
        frac = (theta - ages[i]) / (ages[i + 1] - ages[i])
        return (
            means[i] + frac * (means[i + 1] - means[i]),
            sds[i] + frac * (sds[i + 1] - sds[i]),
        )


def load_curve(path) -> CalibrationCurve:
    """Load and validate a calibration curve file.

    Returns a curve sorted ascending in calendar age; descending input files
    (the IntCal convention) are reversed.  Parse and validation failures
    raise :class:`CurveFormatError` naming the offending line.
    """
    rows = []
    lines = []
    with open(path, encoding="latin-1") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) < 3:
                raise CurveFormatError(
                    f"expected at least 3 comma-separated columns, got {len(parts)}",
                    path=path,
                    line=lineno,
                )
            try:
                values = [float(p) for p in parts[:3]]
            except ValueError as exc:
                raise CurveFormatError(f"unparseable number: {exc}", path=path, line=lineno)
            rows.append(values)
            lines.append(lineno)
    if len(rows) < 2:
        raise CurveFormatError("curve file has fewer than 2 data rows", path=path)

    data = np.asarray(rows, dtype=float)
    linenos = np.asarray(lines)
    if data[0, 0] > data[-1, 0]:
        data = data[::-1]
        linenos = linenos[::-1]

    cal_age, c14_mean, c14_sd = data[:, 0], data[:, 1], data[:, 2]
    dup = np.diff(cal_age) <= 0
    if np.any(dup):
        i = int(np.argmax(dup))
        raise CurveFormatError(
            f"duplicate or out-of-order calendar age {cal_age[i + 1]:g}",
            path=path,
            line=int(linenos[i + 1]),
        )
    bad_sd = c14_sd <= 0
    if np.any(bad_sd):
        i = int(np.argmax(bad_sd))
        raise CurveFormatError(
            f"non-positive curve sd {c14_sd[i]:g}", path=path, line=int(linenos[i])
        )
    return CalibrationCurve(cal_age, c14_mean, c14_sd, source=str(path))
