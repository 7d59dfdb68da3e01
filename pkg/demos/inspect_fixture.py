"""Inspect a framework fixture: validity, shakiness, energies, stresses.

Usage: python demos/inspect_fixture.py [fixtures/ex1_bars_gl.json]
"""

import sys
from pathlib import Path

import numpy as np

from snapkit.model import edge_lengths, load_framework, validate_isostatic
from snapkit.pathtrack import _element_energies
from snapkit.rigidity import is_shaky, pure_condition
from snapkit.strain import density, edge_stresses, total_energy

DEFAULT = Path(__file__).resolve().parent.parent / "fixtures" / "ex1_bars_gl.json"


def main(path):
    fw, cfg = load_framework(path)
    print(f"framework: {path}")
    print(f"  {fw.num_knots} knots, {fw.num_edges} edges, "
          f"{len(fw.plates)} plates, strain model {fw.strain_model!r}")

    iso = validate_isostatic(fw, cfg)
    print(f"  isostatic: {iso.passed} (rank {iso.rank}, "
          f"expected edges {iso.expected_edges})")
    rep = is_shaky(fw, cfg)
    print(f"  shaky: {rep.shaky} (rank {rep.rank}/{rep.required_rank})")
    print(f"  pure condition: {pure_condition(fw, cfg):.6e}")

    L = edge_lengths(fw, cfg)
    print("  edge lengths vs rest:")
    for e, (l_now, l_rest) in enumerate(zip(L, fw.rest_lengths)):
        print(f"    edge {fw.ei[e] + 1}-{fw.ej[e] + 1}: "
              f"{l_now:.6f} (rest {l_rest:g})")

    vals, labels = _element_energies(fw, L)
    print("  element energies:")
    for lab, v in zip(labels, vals):
        print(f"    {lab}: {v:.6e}")
    print(f"  total energy: {total_energy(fw, cfg):.6e}")
    print(f"  energy density: {density(fw, cfg):.6e}")

    om = edge_stresses(fw, cfg)
    print(f"  edge stresses: {np.array2string(om, precision=3)}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else str(DEFAULT))
