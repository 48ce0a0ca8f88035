"""Regenerate the bundled demo inputs under data/.

The curve is synthetic (a published curve file should be supplied by the
user for real work); the determination set draws 100 ages from a fixed
three-phase mixture and observes them through that curve.
"""

from pathlib import Path

from carbcal.synthetic import (
    three_phase_determinations,
    wiggly_curve,
    write_curve_file,
    write_determination_file,
)


def main() -> None:
    root = Path(__file__).resolve().parent.parent
    data = root / "data"
    data.mkdir(exist_ok=True)
    curve = wiggly_curve()
    write_curve_file(curve, data / "synthetic_curve.14c")
    dets, _ = three_phase_determinations(curve, n=100, seed=3)
    write_determination_file(dets, data / "example_three_phase.csv")
    print(f"wrote {data / 'synthetic_curve.14c'} ({len(curve)} knots)")
    print(f"wrote {data / 'example_three_phase.csv'} ({len(dets)} determinations)")


if __name__ == "__main__":
    main()
