"""Throughput and energy-efficiency bounds versus orbit height, one CSV per
transmit power. Simulation columns land inside the analytic brackets.

Usage: python scripts/sweep_height.py [--with-sim] [--out-dir results]
"""

import argparse
import csv
from pathlib import Path

from leolink.pipeline import run_sweep
from leolink.scenario import SweepSpec, apply_sweep_value, parse_scenario

DEFAULT_SCENARIO = Path(__file__).resolve().parent.parent / "scenarios" / "reference_rat.scn"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", type=Path, default=DEFAULT_SCENARIO)
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    ap.add_argument("--with-sim", action="store_true")
    ap.add_argument("--powers-dbw", type=float, nargs="+", default=[30.0, 36.0, 42.0])
    args = ap.parse_args()

    scn = parse_scenario(args.scenario.read_text())
    sweep = SweepSpec(
        path="geometry.orbit_height",
        values=tuple(500e3 + 100e3 * i for i in range(7)),
    )
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for p_dbw in args.powers_dbw:
        point = apply_sweep_value(scn, "rat.tx_power", 10.0 ** (p_dbw / 10.0))
        header, rows = run_sweep(point, sweep, with_sim=args.with_sim)
        out = args.out_dir / f"throughput_vs_height_pt{p_dbw:g}dbw.csv"
        with out.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        print(f"wrote {out}")


if __name__ == "__main__":
    main()
