#!/usr/bin/env python3
"""Crystal-length and pump-waist sweeps of the EPR width product."""

import argparse
import sys
from pathlib import Path

from spdcsim.sweep import (
    DEFAULT_LENGTH_VALUES_MM,
    DEFAULT_WAIST_VALUES_UM,
    SweepSpec,
    rows_to_csv,
    run_sweep,
)

STUDIES = {
    "crystal_length_mm": DEFAULT_LENGTH_VALUES_MM,
    "pump_waist_um": DEFAULT_WAIST_VALUES_UM,
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.strip())
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--grid-n", type=int, default=1024)
    ap.add_argument("--slices", type=int, default=31)
    ap.add_argument("--fwhm-nm", type=float, default=5.0)
    ap.add_argument("--degenerate", action="store_true")
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    tag = "degenerate" if args.degenerate else "nondegenerate"
    for parameter, values in STUDIES.items():
        rows = run_sweep(
            SweepSpec(
                parameter=parameter,
                values=values,
                degenerate=args.degenerate,
                filter_fwhm_nm=args.fwhm_nm,
                n_slices=args.slices,
                grid_n=args.grid_n,
            )
        )
        path = args.out / f"{parameter}_{tag}.csv"
        path.write_text(rows_to_csv(rows), encoding="utf-8")
        print(f"wrote {path}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
