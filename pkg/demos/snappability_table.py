"""Snappability of the six-bar example in its three flavors.

Reproduces the headline comparison: the bar-only framework under GL
strain, the variant with one triangular plate, and the bar-only CE
variant.  The two GL runs use the homotopy solver (729 paths each), so
the full table takes a couple of minutes; --quick restricts to the CE
variant.

Usage: python demos/snappability_table.py [--quick]
"""

import argparse
from pathlib import Path

from snapkit.analysis import compare_variants, format_compare_table
from snapkit.model import load_framework

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

VARIANTS = [
    ("bars gl", "ex1_bars_gl.json"),
    ("plate gl", "ex1_plate_gl.json"),
    ("bars ce", "ex1_bars_ce.json"),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true",
                    help="CE variant only (seconds instead of minutes)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    chosen = VARIANTS[-1:] if args.quick else VARIANTS
    entries = []
    for label, name in chosen:
        fw, cfg = load_framework(str(FIXTURES / name))
        entries.append((label, fw, cfg))

    report = compare_variants(entries, seed=args.seed)
    print(format_compare_table(report))
    print()
    for row in report["rows"]:
        if row["witness"] is None:
            continue
        free = row["witness"][3:]
        pretty = ", ".join(f"({x:.4f}, {y:.4f})" for x, y in free)
        print(f"{row['label']}: witness knots 4-6 at {pretty}")


if __name__ == "__main__":
    main()
