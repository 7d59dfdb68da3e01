"""Rigidity matrix, shakiness detection, self-stresses, pure condition.

The matrix convention follows the equilibrium form R . omega = 0: one
column per edge, one row per knot coordinate.  For pinned frameworks
only the unpinned knots' rows appear (ground reactions absorb the
rest), which makes the matrix square exactly when the framework is
isostatic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ValidationError, _trivial_motions


def rigidity_matrix(fw, cfg):
    """Assemble R at a realization; (sn x b) unpinned, free rows if pinned."""
    s, n, b = fw.num_knots, fw.dimension, fw.num_edges
    d = cfg.coords[fw.ei] - cfg.coords[fw.ej]
    R = np.zeros((s * n, b))
    for e in range(b):
        i, j = fw.ei[e], fw.ej[e]
        R[i * n:(i + 1) * n, e] = d[e]
        R[j * n:(j + 1) * n, e] = -d[e]
    if fw.pinned_mask.any():
        keep = np.repeat(~fw.pinned_mask, n)
        R = R[keep]
    return R


@dataclass
class ShakinessReport:
    shaky: bool
    rank: int
    required_rank: int
    singular_values: np.ndarray
    tol: float


def is_shaky(fw, cfg, tol=1e-9):
    """Rank test: shaky iff the rigidity matrix drops below full rank.

    Unpinned frameworks compare against r = sn - (n^2+n)/2; pinned ones
    against the edge count b.  Rank uses singular values relative to the
    largest one.
    """
    R = rigidity_matrix(fw, cfg)
    s, n, b = fw.num_knots, fw.dimension, fw.num_edges
    if fw.pinned_mask.any():
        required = b
    else:
        required = s * n - (n * n + n) // 2
    sv = np.linalg.svd(R, compute_uv=False)
    smax = sv[0] if len(sv) else 0.0
    rank = int((sv > tol * smax).sum()) if smax > 0 else 0
    return ShakinessReport(rank < required, rank, required, sv, tol)


def self_stress_basis(fw, cfg, tol=1e-9):
    """Orthonormal basis of the stress nullspace {omega : R omega = 0}."""
    R = rigidity_matrix(fw, cfg)
    u, sv, vt = np.linalg.svd(R)
    smax = sv[0] if len(sv) else 0.0
    b = fw.num_edges
    null_dim = b - int((sv > tol * smax).sum()) if smax > 0 else b
    if null_dim == 0:
        return []
    return [vt[-(k + 1)] for k in range(null_dim)][::-1]


def _squared_matrix(fw, cfg):
    """The square matrix whose determinant is the (unnormalized) pure condition.

    Pinned: the free-row rigidity matrix itself.  Unpinned: the rigidity
    matrix with a basis of infinitesimal rigid motions appended as extra
    columns, which vanishes exactly when R drops rank.
    """
    R = rigidity_matrix(fw, cfg)
    if fw.pinned_mask.any():
        A = R
    else:
        T = _trivial_motions(cfg.coords, fw.dimension)
        A = np.hstack([R, T])
    if A.shape[0] != A.shape[1]:
        raise ValidationError(
            f"pure condition needs a square matrix, got {A.shape}; framework not isostatic")
    return A


def pure_condition(fw, cfg):
    """Length-normalized determinant of the squared rigidity matrix.

    Zero exactly at shaky realizations; the normalization by the product
    of rest lengths keeps values comparable across scales.
    """
    A = _squared_matrix(fw, cfg)
    return float(np.linalg.det(A) / np.prod(fw.rest_lengths))


def _adjugate(A):
    # SVD route stays finite and exact-rank-stable near singular matrices
    u, sv, vt = np.linalg.svd(A)
    m = len(sv)
    prods = np.ones(m)
    for i in range(m):
        prods[i] = np.prod(np.delete(sv, i))
    sign = np.linalg.det(u) * np.linalg.det(vt)
    return sign * (vt.T * prods) @ u.T


def pure_condition_gradient(fw, cfg):
    """Exact gradient of pure_condition with respect to free coordinates.

    Uses d(det A) = tr(adj(A) dA); every entry of A is affine in the
    knot coordinates, so dA per coordinate is a constant sparse matrix.
    """
    from .model import gauge_fix

    gauge = gauge_fix(fw)
    A = _squared_matrix(fw, cfg)
    adj = _adjugate(A)
    n, b = fw.dimension, fw.num_edges
    pinned = fw.pinned_mask.any()
    if pinned:
        row_of = {}
        r = 0
        for i in range(fw.num_knots):
            if not fw.pinned_mask[i]:
                for dcomp in range(n):
                    row_of[(i, dcomp)] = r
                    r += 1
    else:
        row_of = {(i, dcomp): i * n + dcomp
                  for i in range(fw.num_knots) for dcomp in range(n)}
    grad = np.zeros(gauge.num_free)
    norm = np.prod(fw.rest_lengths)
    for a, (m, dcomp) in enumerate(gauge.free_pairs):
        acc = 0.0
        # rigidity columns: entry (i,d),e is +-(k_i - k_j)_d
        for e in range(b):
            i, j = fw.ei[e], fw.ej[e]
            if m == i:
                ri = row_of.get((i, dcomp))
                if ri is not None:
                    acc += adj[e, ri]
                rj = row_of.get((j, dcomp))
                if rj is not None:
                    acc -= adj[e, rj]
            elif m == j:
                ri = row_of.get((i, dcomp))
                if ri is not None:
                    acc -= adj[e, ri]
                rj = row_of.get((j, dcomp))
                if rj is not None:
                    acc += adj[e, rj]
        if not pinned and n == 2:
            # the appended rotation column (-y_i, x_i) depends on coordinates
            rot_col = b + 2
            other = 1 - dcomp
            sign = -1.0 if dcomp == 1 else 1.0
            acc += sign * adj[rot_col, m * n + other]
        elif not pinned and n == 3:
            for ci, (p, qd) in enumerate(((0, 1), (0, 2), (1, 2))):
                col = b + 3 + ci
                if dcomp == qd:
                    acc += -adj[col, m * n + p]
                if dcomp == p:
                    acc += adj[col, m * n + qd]
        grad[a] = acc
    return grad / norm
