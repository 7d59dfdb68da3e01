"""Strain energies, the lifted quadratic form, and exact derivatives.

Bar energies exist in two flavors: the rotation-invariant Green-Lagrange
(GL) form and the simpler Cauchy/engineering (CE) form.  Triangular
plates always use GL strain with plane stress, nu = 1/2 and E = 1.  For
GL the total energy is an exact quadratic form L'^T M L' in the lifted
length vector L' = (1, ..., L_e'^2, ...), which is what the polynomial
solvers exploit.
"""

from __future__ import annotations

import math

import numpy as np

from .model import ValidationError, Configuration, squared_edge_lengths, gauge_fix

# plane stress constitutive matrix at nu = 1/2, E = 1
D_CONST = (4.0 / 3.0) * np.array([[1.0, 0.5, 0.0],
                                  [0.5, 1.0, 0.0],
                                  [0.0, 0.0, 0.25]])


def local_triangle_coords(Lij, Lik, Ljk):
    """Plant a triangle with the given side lengths in the plane.

    K_i sits at the origin, K_j on the positive x-axis, K_k in the upper
    half plane (the energy does not depend on that sign choice).
    """
    prod = ((Lij + Lik + Ljk) * (Lij - Lik + Ljk)
            * (Lij + Lik - Ljk) * (Lik + Ljk - Lij))
    if not (Lij > 0 and Lik > 0 and Ljk > 0) or prod <= 0:
        raise ValidationError(
            f"triangle inequality violated for lengths ({Lij}, {Lik}, {Ljk})")
    xk = (Lij * Lij + Lik * Lik - Ljk * Ljk) / (2.0 * Lij)
    yk = math.sqrt(prod) / (2.0 * Lij)
    return (np.zeros(2), np.array([Lij, 0.0]), np.array([xk, yk]))


def plate_affine_matrix(rest, deformed):
    """The unique 2x2 map sending the rest triangle to the deformed one."""
    pi, pj, pk = local_triangle_coords(*rest)
    qi, qj, qk = local_triangle_coords(*deformed)
    P = np.column_stack([pj - pi, pk - pi])
    Q = np.column_stack([qj - qi, qk - qi])
    return Q @ np.linalg.inv(P)


def gl_strain(A):
    """Green-Lagrange strain vector e = (eps_x, eps_y, 2*gamma_xy)."""
    E = 0.5 * (A.T @ A - np.eye(2))
    return np.array([E[0, 0], E[1, 1], 2.0 * E[0, 1]])


def plate_energy(rest, deformed, cross_section=1.0):
    """GL strain energy of one plate from rest and deformed edge lengths.

    Geometric route through the local embedding; requires strict
    triangle inequalities on both length triples.
    """
    volume = cross_section * (rest[0] + rest[1] + rest[2])
    e = gl_strain(plate_affine_matrix(rest, deformed))
    return float(volume * 0.5 * (e @ D_CONST @ e))


def bar_energy_gl(Lij, Ldef, cross_section=1.0):
    return cross_section * (Ldef * Ldef - Lij * Lij) ** 2 / (8.0 * Lij ** 3)


def bar_energy_ce(Lij, Ldef, cross_section=1.0):
    return cross_section * (Ldef - Lij) ** 2 / (2.0 * Lij)


def _bar_block_gl(L, cross_section):
    """GL bar energy as a quadratic form on the lifted entries (1, L'^2)."""
    L2 = L * L
    return cross_section / (8.0 * L ** 3) * np.array([[L2 * L2, -L2],
                                                      [-L2, 1.0]])


def plate_quadratic_block(L1, L2, L3, cross_section=1.0):
    """Plate energy as a 4x4 quadratic form on (1, a', b', c').

    a', b', c' are the squared deformed lengths of the edges (i,j),
    (i,k), (j,k) with rest lengths L1, L2, L3.  Derived by eliminating
    the local embedding coordinates from the geometric route, which
    leaves a rational expression whose denominators depend only on rest
    lengths.
    """
    a, b, c = L1 * L1, L2 * L2, L3 * L3
    volume = cross_section * (L1 + L2 + L3)
    w = 0.5 * (a + b - c)
    S = 2.0 * (a * b + b * c + c * a) - a * a - b * b - c * c  # 16 * area^2
    if S <= 0:
        raise ValidationError(
            f"triangle inequality violated for lengths ({L1}, {L2}, {L3})")
    u = np.array([-0.5, 1.0 / (2.0 * a), 0.0, 0.0])
    v = np.array([-0.5, (2.0 / S) * (w * w / a - w), (2.0 / S) * (a - w), (2.0 / S) * w])
    sqS = math.sqrt(S)
    h = np.array([0.0, (c - b) / (a * sqS), 1.0 / sqS, -1.0 / sqS])
    Q = (np.outer(u, u) + 0.5 * (np.outer(u, v) + np.outer(v, u))
         + np.outer(v, v) + 0.25 * np.outer(h, h))
    return (2.0 * volume / 3.0) * Q


def energy_matrix(fw):
    """Symmetric (b+1) x (b+1) matrix M with U = lifted^T M lifted (GL only)."""
    if fw.strain_model != "gl":
        raise ValidationError("energy matrix exists only for the GL strain model")
    cached = getattr(fw, "_energy_matrix", None)
    if cached is not None:
        return cached
    b = fw.num_edges
    M = np.zeros((b + 1, b + 1))
    for e in fw.bar_edges:
        idx = np.array([0, e + 1])
        M[np.ix_(idx, idx)] += _bar_block_gl(fw.rest_lengths[e], fw.cross_section)
    for p in fw.plates:
        r1, r2, r3 = p.edge_refs
        idx = np.array([0, r1 + 1, r2 + 1, r3 + 1])
        M[np.ix_(idx, idx)] += plate_quadratic_block(
            fw.rest_lengths[r1], fw.rest_lengths[r2], fw.rest_lengths[r3],
            fw.cross_section)
    fw._energy_matrix = M
    return M


def _as_squared_lengths(fw, arg):
    if isinstance(arg, Configuration):
        return squared_edge_lengths(fw, arg.coords)
    L = np.asarray(arg, dtype=float)
    if L.shape != (fw.num_edges,):
        raise ValidationError(f"length vector must have shape ({fw.num_edges},)")
    if (L < 0).any():
        raise ValidationError("edge lengths must be nonnegative")
    q = L * L
    for p in fw.plates:
        # a degenerate (collinear) triple is feasible, an impossible one is not
        t = np.sort(L[list(p.edge_refs)])
        if t[0] + t[1] < t[2] * (1.0 - 1e-12):
            raise ValidationError(
                f"plate ({p.i},{p.j},{p.k}): deformed lengths {tuple(t)} "
                "violate the triangle inequality")
    return q


def total_energy(fw, arg):
    """Total strain energy of a configuration or an edge-length vector."""
    q = _as_squared_lengths(fw, arg)
    if fw.strain_model == "gl":
        lifted = np.concatenate([[1.0], q])
        M = energy_matrix(fw)
        return float(lifted @ M @ lifted)
    L = np.sqrt(q)
    A = fw.cross_section
    return float(sum(bar_energy_ce(fw.rest_lengths[e], L[e], A)
                     for e in fw.bar_edges))


def density(fw, arg):
    """Energy density U / (A * L) with L the total rest length."""
    return total_energy(fw, arg) / (fw.cross_section * fw.total_length)


def pseudometric(fw, L1, L2):
    """Intrinsic pseudometric |D(L1) - D(L2)| between two length vectors."""
    return abs(density(fw, L1) - density(fw, L2))


def lifted_lengths(fw, arg):
    """The (b+1)-vector (1, ..., L_e'^2, ...) of a configuration or lengths."""
    return np.concatenate([[1.0], _as_squared_lengths(fw, arg)])


class GradientSystem:
    """Batched evaluator of the energy gradient and Hessian in free coordinates.

    Accepts real or complex batches of free-coordinate vectors; complex
    inputs make the GL gradient the polynomial map the homotopy solver
    tracks.  base_coords supplies the values of gauge-fixed coordinates.
    """

    def __init__(self, fw, base_coords=None):
        self.fw = fw
        self.gauge = gauge_fix(fw)
        s, n = fw.num_knots, fw.dimension
        if base_coords is None:
            base_coords = fw.pin_coords
        self.base = np.asarray(base_coords, dtype=float).reshape(s, n)
        self.nfree = self.gauge.num_free
        b = fw.num_edges
        # signed incidence: +1 at i, -1 at j per edge column
        inc = np.zeros((s, b))
        inc[fw.ei, np.arange(b)] = 1.0
        inc[fw.ej, np.arange(b)] = -1.0
        self.incidence = inc
        if fw.strain_model == "gl":
            self.M = energy_matrix(fw)
            self.Mq = self.M[1:, 1:]
        free = self.gauge.free_indices
        self.free = free
        # per-edge quadratic pattern of sum_d (k_i,d - k_j,d)^2 on free coords
        B = np.zeros((b, self.nfree, self.nfree))
        pos = {int(fi): a for a, fi in enumerate(free)}
        for e in range(b):
            i, j = fw.ei[e], fw.ej[e]
            for d in range(n):
                ai = pos.get(i * n + d)
                aj = pos.get(j * n + d)
                if ai is not None:
                    B[e, ai, ai] += 1.0
                if aj is not None:
                    B[e, aj, aj] += 1.0
                if ai is not None and aj is not None:
                    B[e, ai, aj] -= 1.0
                    B[e, aj, ai] -= 1.0
        self.B = B

    def coords(self, z):
        z = np.asarray(z)
        shape = z.shape[:-1]
        s, n = self.fw.num_knots, self.fw.dimension
        full = np.broadcast_to(self.base.reshape(-1), shape + (s * n,)).astype(z.dtype).copy()
        full[..., self.free] = z
        return full.reshape(shape + (s, n))

    def _stress_and_diffs(self, z):
        fw = self.fw
        k = self.coords(z)
        d = k[..., fw.ei, :] - k[..., fw.ej, :]
        q = np.sum(d * d, axis=-1)
        if fw.strain_model == "gl":
            lifted = np.concatenate(
                [np.ones(q.shape[:-1] + (1,), dtype=q.dtype), q], axis=-1)
            omega = 4.0 * np.einsum("ij,...j->...i", self.M, lifted)[..., 1:]
        else:
            L = np.sqrt(q)
            omega = fw.cross_section * (L - fw.rest_lengths) / (fw.rest_lengths * L)
        return d, q, omega

    def gradient(self, z):
        """Gradient of U over free coordinates; batched over leading axes."""
        d, _, omega = self._stress_and_diffs(z)
        g_knots = np.einsum("se,...ed->...sd", self.incidence, omega[..., None] * d)
        shape = np.asarray(z).shape[:-1]
        return g_knots.reshape(shape + (-1,))[..., self.free]

    def jacobian(self, z):
        """Hessian of U over free coordinates (the gradient's Jacobian)."""
        fw = self.fw
        d, q, omega = self._stress_and_diffs(z)
        n = fw.dimension
        shape = np.asarray(z).shape[:-1]
        b = fw.num_edges
        # rows r_e = d(q_e)/d(free coords) / 2: +-d_e entries at free positions
        sn = fw.num_knots * n
        R = np.zeros(shape + (b, sn), dtype=d.dtype)
        idx_i = fw.ei[:, None] * n + np.arange(n)[None, :]
        idx_j = fw.ej[:, None] * n + np.arange(n)[None, :]
        for e in range(b):
            R[..., e, idx_i[e]] += d[..., e, :]
            R[..., e, idx_j[e]] -= d[..., e, :]
        Rf = R[..., self.free]
        if fw.strain_model == "gl":
            J = 8.0 * np.einsum("...ea,ef,...fb->...ab",
                                Rf, self.Mq.astype(Rf.dtype), Rf)
        else:
            c = fw.cross_section / (4.0 * q ** 1.5)
            J = 4.0 * np.einsum("...ea,...e,...eb->...ab", Rf, c, Rf)
        J = J + np.einsum("...e,eab->...ab", omega, self.B)
        return J

    def energy(self, z):
        fw = self.fw
        k = self.coords(z)
        d = k[..., fw.ei, :] - k[..., fw.ej, :]
        q = np.sum(d * d, axis=-1)
        if fw.strain_model == "gl":
            lifted = np.concatenate(
                [np.ones(q.shape[:-1] + (1,), dtype=q.dtype), q], axis=-1)
            return np.einsum("...i,ij,...j->...", lifted, self.M, lifted)
        L = np.sqrt(q)
        A = fw.cross_section
        rest = fw.rest_lengths
        vals = A * (L - rest) ** 2 / (2.0 * rest)
        return vals[..., fw.bar_edges].sum(axis=-1)


def gradient_system(fw, base_coords=None):
    """The framework's default-base GradientSystem, cached on the framework."""
    if base_coords is not None:
        return GradientSystem(fw, base_coords)
    cached = getattr(fw, "_gradient_system", None)
    if cached is None:
        cached = fw._gradient_system = GradientSystem(fw)
    return cached


def edge_stresses(fw, cfg):
    """Edge stress vector omega with R . omega = grad U at cfg.

    For GL bars this is A (L'^2 - L^2) / (2 L^3) per edge; plate edges
    carry the unique coefficients of the plate stress-recovery system.
    """
    d = cfg.coords[fw.ei] - cfg.coords[fw.ej]
    q = np.sum(d * d, axis=1)
    if fw.strain_model == "gl":
        lifted = np.concatenate([[1.0], q])
        return 4.0 * (energy_matrix(fw) @ lifted)[1:]
    L = np.sqrt(q)
    return fw.cross_section * (L - fw.rest_lengths) / (fw.rest_lengths * L)


def energy_gradient(fw, cfg):
    """Exact analytic gradient of U over free coordinates at cfg."""
    sys = GradientSystem(fw, cfg.coords)
    return sys.gradient(sys.gauge.extract(cfg.coords))


def energy_hessian(fw, cfg):
    """Exact analytic Hessian of U over free coordinates at cfg."""
    sys = GradientSystem(fw, cfg.coords)
    return sys.jacobian(sys.gauge.extract(cfg.coords))
