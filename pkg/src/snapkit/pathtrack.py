"""Length-space deformation paths and configuration tracking along them.

A deformation path interpolates squared edge lengths linearly, i.e. the
lifted length vector moves on a straight segment.  That choice keeps
every GL element energy an exact quadratic in the path parameter, which
is what the monotonicity argument rests on.  Tracking continues the
start realization through the squared-distance constraint system
q_e(k) = L_t,e^2; the far endpoint is shaky by construction, so the
tracker finishes with a geometric endgame and Richardson extrapolation
instead of plain Newton.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (Configuration, ValidationError, configuration_diameter,
                    edge_lengths, gauge_fix)
from .rigidity import pure_condition
from .strain import bar_energy_ce, bar_energy_gl, plate_energy


@dataclass(frozen=True)
class LengthPath:
    """Edge-length path L_t,e = sqrt((1-t) L_start,e^2 + t L_target,e^2)."""

    L_start: np.ndarray
    L_target: np.ndarray

    def __post_init__(self):
        Ls = np.asarray(self.L_start, dtype=float)
        Lt = np.asarray(self.L_target, dtype=float)
        if Ls.shape != Lt.shape or Ls.ndim != 1:
            raise ValidationError("length path endpoints must be equal-length vectors")
        if (Ls < 0).any() or (Lt < 0).any():
            raise ValidationError("edge lengths must be nonnegative")
        object.__setattr__(self, "L_start", Ls)
        object.__setattr__(self, "L_target", Lt)

    def squared(self, t):
        return (1.0 - t) * self.L_start ** 2 + t * self.L_target ** 2

    def __call__(self, t):
        return interpolate_lengths(self, t)


def interpolate_lengths(path, t):
    """Length vector at parameter t along the lifted-linear path."""
    if not (0.0 <= t <= 1.0):
        raise ValidationError(f"path parameter {t} outside [0, 1]")
    return np.sqrt(path.squared(t))


@dataclass
class PathCertificate:
    """Outcome of tracking a deformation path.

    endpoint_gap is the difference between the last two Richardson
    extrapolants of the endgame; min_pure_condition_magnitude_before_end
    witnesses that the path stays off the shakiness variety until the
    end.  All samples are real by construction of the tracker.
    """

    success: bool
    samples: list
    endpoint_cfg: Configuration | None
    endpoint_gap: float
    min_pure_condition_magnitude_before_end: float
    diagnostics: dict = field(default_factory=dict)
    fw: object = field(default=None, repr=False)

    def as_dict(self):
        return {
            "success": bool(self.success),
            "samples": len(self.samples),
            "endpoint": (None if self.endpoint_cfg is None
                         else [list(map(float, row))
                               for row in self.endpoint_cfg.coords]),
            "endpoint_gap": float(self.endpoint_gap),
            "min_pure_condition_magnitude_before_end":
                float(self.min_pure_condition_magnitude_before_end),
            "diagnostics": self.diagnostics,
        }


class _ConstraintTracker:
    """Newton machinery for the square system q_e(k) - L_t,e^2 = 0."""

    def __init__(self, fw, base_coords):
        self.fw = fw
        self.gauge = gauge_fix(fw)
        self.base = np.asarray(base_coords, dtype=float).copy()
        if fw.num_edges != self.gauge.num_free:
            raise ValidationError(
                f"tracking needs an isostatic framework: {fw.num_edges} edges "
                f"vs {self.gauge.num_free} free coordinates")

    def coords(self, z):
        return self.gauge.insert(z, self.base)

    def residual(self, z, q_t):
        k = self.coords(z)
        d = k[self.fw.ei] - k[self.fw.ej]
        return np.sum(d * d, axis=1) - q_t

    def jacobian(self, z):
        fw = self.fw
        k = self.coords(z)
        d = k[fw.ei] - k[fw.ej]
        n = fw.dimension
        J = np.zeros((fw.num_edges, fw.num_knots * n))
        for e in range(fw.num_edges):
            i, j = fw.ei[e], fw.ej[e]
            J[e, i * n:(i + 1) * n] = 2.0 * d[e]
            J[e, j * n:(j + 1) * n] = -2.0 * d[e]
        return J[:, self.gauge.free_indices]

    def correct(self, z, q_t, tol, sweeps=25):
        """Newton to the noise floor; returns (z, converged)."""
        scale = 1.0 + np.abs(z).max()
        for _ in range(sweeps):
            r = self.residual(z, q_t)
            if not np.isfinite(r).all():
                return z, False
            J = self.jacobian(z)
            try:
                step = np.linalg.solve(J, -r)
            except np.linalg.LinAlgError:
                return z, False
            ns = np.abs(step).max()
            if ns > 0.5 * scale:
                step *= 0.5 * scale / ns
            z = z + step
            if ns < 1e-14 * scale:
                break
        r = self.residual(z, q_t)
        return z, bool(np.abs(r).max() < tol)


def project_onto_lengths(fw, cfg, lengths, tol=None):
    """Newton-project a configuration onto exact edge lengths.

    Returns (Configuration, max residual |L - target|).  Used to clean
    up fixtures that carry rounded coordinates.
    """
    tracker = _ConstraintTracker(fw, cfg.coords)
    q = np.asarray(lengths, dtype=float) ** 2
    if tol is None:
        tol = 1e-12 * max(1.0, q.max())
    z, ok = tracker.correct(tracker.gauge.extract(cfg.coords), q, tol)
    out = Configuration(tracker.coords(z))
    res = float(np.abs(edge_lengths(fw, out) - lengths).max())
    if not ok:
        raise ValidationError(
            f"projection onto target lengths failed (residual {res:.3e})")
    return out, res


def _element_energies(fw, L):
    """Per-element energies at a length vector, bars first then plates."""
    A = fw.cross_section
    vals, labels = [], []
    for e in fw.bar_edges:
        rest = fw.rest_lengths[e]
        if fw.strain_model == "gl":
            vals.append(bar_energy_gl(rest, L[e], A))
        else:
            vals.append(bar_energy_ce(rest, L[e], A))
        labels.append(f"bar({fw.edges[e].i},{fw.edges[e].j})")
    for p in fw.plates:
        rest = tuple(fw.rest_lengths[r] for r in p.edge_refs)
        deformed = tuple(L[r] for r in p.edge_refs)
        vals.append(plate_energy(rest, deformed, A))
        labels.append(f"plate({p.i},{p.j},{p.k})")
    return np.array(vals), labels


def track_deformation(fw, start_cfg, path, dt0=0.01, dtmax=0.05,
                      levels=20, gap_tol=1e-8):
    """Continue start_cfg along the path; the endpoint may be shaky.

    Main phase: adaptive predictor-corrector up to t = 1/2.  Endgame:
    corrector-converged samples at t_m = 1 - 2^-m for m = 1..levels and
    a Richardson extrapolation in half powers of 2 (the limit behaves
    like z* + c sqrt(1-t) at a fold).  Failures produce success=False
    with diagnostics, never an exception.
    """
    L_now = edge_lengths(fw, start_cfg)
    if np.abs(L_now - path.L_start).max() > 1e-9 * max(1.0, path.L_start.max()):
        raise ValidationError("start configuration does not realize L_start")
    tracker = _ConstraintTracker(fw, start_cfg.coords)
    dq = path.L_target ** 2 - path.L_start ** 2
    qscale = max(1.0, float(np.abs(path.squared(0.0)).max()),
                 float(np.abs(path.squared(1.0)).max()))
    ctol = 1e-11 * qscale

    z = tracker.gauge.extract(start_cfg.coords)
    t = 0.0
    dt = dt0
    samples = [(0.0, Configuration(tracker.coords(z)))]
    min_pc = abs(pure_condition(fw, samples[0][1]))

    def fail(reason):
        return PathCertificate(False, samples, None, np.inf, min_pc,
                               {"reason": reason, "t": t}, fw)

    # main phase: t in [0, 1/2]
    while t < 0.5 - 1e-15:
        dt = min(dt, 0.5 - t)
        J = tracker.jacobian(z)
        try:
            tang = np.linalg.solve(J, dq)
        except np.linalg.LinAlgError:
            return fail("singular Jacobian during main phase")
        zp = z + dt * tang
        zc, ok = tracker.correct(zp, path.squared(t + dt), ctol, sweeps=12)
        if ok:
            t += dt
            z = zc
            cfg = Configuration(tracker.coords(z))
            samples.append((t, cfg))
            min_pc = min(min_pc, abs(pure_condition(fw, cfg)))
            dt = min(dt * 1.5, dtmax)
        else:
            dt *= 0.5
            if dt < 1e-12:
                return fail("step underflow (path lost or turned complex)")

    # endgame: geometric levels toward the (generically shaky) endpoint
    level_states = []
    tprev = 0.5
    for m in range(1, levels + 1):
        tm = 1.0 - 0.5 ** m
        zl, ok = _advance_level(tracker, z, path, tprev, tm, ctol)
        if not ok:
            return fail(f"endgame corrector failed at level {m}")
        z = zl
        cfg = Configuration(tracker.coords(z))
        samples.append((tm, cfg))
        min_pc = min(min_pc, abs(pure_condition(fw, cfg)))
        level_states.append(z.copy())
        tprev = tm

    limit = _richardson(level_states)
    limit_prev = _richardson(level_states[:-1])
    gap = float(np.abs(limit - limit_prev).max())
    endpoint = Configuration(tracker.coords(limit))
    if not np.isfinite(limit).all() or gap >= gap_tol:
        return PathCertificate(False, samples, endpoint, gap, min_pc,
                               {"reason": "endgame extrapolation did not converge"},
                               fw)
    return PathCertificate(True, samples, endpoint, gap, min_pc,
                           {"levels": levels}, fw)


def _advance_level(tracker, z, path, tfrom, tto, ctol):
    # whole jump first, then geometric substeps if the corrector balks
    for nsub in (1, 2, 4, 8):
        frac = ((1.0 - tto) / (1.0 - tfrom)) ** (1.0 / nsub)
        zs, ts, ok = z.copy(), tfrom, True
        for _ in range(nsub):
            tn = 1.0 - (1.0 - ts) * frac
            J = tracker.jacobian(zs)
            try:
                tang = np.linalg.solve(J, path.L_target ** 2 - path.L_start ** 2)
            except np.linalg.LinAlgError:
                ok = False
                break
            zp = zs + (tn - ts) * tang
            zs, okc = tracker.correct(zp, path.squared(tn), ctol)
            if not okc:
                ok = False
                break
            ts = tn
        if ok:
            return zs, True
    return z, False


def _richardson(states, max_passes=10):
    """Limit of the level sequence, eliminating half powers of 1/2."""
    K = min(12, len(states))
    T = np.stack(states[-K:], axis=0).astype(float)
    for j in range(1, min(max_passes, K - 1) + 1):
        rho = 0.5 ** (j / 2.0)
        T = (T[1:] - rho * T[:-1]) / (1.0 - rho)
    return T[-1]


def check_endpoint(cert, target_cfg, tol=None):
    """True iff the certificate succeeded and ends at the target.

    Both configurations are canonicalized first, so the comparison is
    modulo direct isometries for unpinned frameworks.
    """
    if not cert.success or cert.endpoint_cfg is None:
        return False
    gauge = gauge_fix(cert.fw)
    a = gauge.canonicalize(cert.endpoint_cfg).coords
    b = gauge.canonicalize(target_cfg).coords
    if tol is None:
        tol = 1e-6 * configuration_diameter(target_cfg)
    return bool(np.abs(a - b).max() < tol)


@dataclass
class MonotonicityReport:
    all_monotone: bool
    elements: list            # per element: label, coeffs, vertex, monotone
    max_prediction_error: float

    def as_dict(self):
        return {
            "all_monotone": bool(self.all_monotone),
            "elements": self.elements,
            "max_prediction_error": float(self.max_prediction_error),
        }


def verify_monotonicity(fw, path, samples=9):
    """Exact quadratic fit of each GL element energy along the path.

    Every element energy is a quadratic in t with nonnegative leading
    coefficient (the squared lengths are affine in t), so fitting three
    samples is exact; a fourth sample bounds the fit error.  Monotone
    increase on [0, 1] is equivalent to the parabola vertex lying at
    t <= 0, which is guaranteed when the path starts at rest lengths.
    """
    if fw.strain_model != "gl":
        raise ValidationError("monotonicity fit requires the GL strain model")
    ts = np.array([0.0, 0.5, 1.0])
    E = np.stack([_element_energies(fw, interpolate_lengths(path, t))[0]
                  for t in ts], axis=0)
    labels = _element_energies(fw, path.L_start)[1]
    V = np.vander(ts, 3, increasing=True)
    coeffs = np.linalg.solve(V, E)            # rows: c0, c1, c2 per element
    t4 = 0.75
    pred = coeffs[0] + coeffs[1] * t4 + coeffs[2] * t4 * t4
    actual = _element_energies(fw, interpolate_lengths(path, t4))[0]
    max_err = float(np.abs(pred - actual).max())

    elements = []
    all_mono = True
    grid = np.linspace(0.0, 1.0, max(3, samples))
    for idx, label in enumerate(labels):
        c0, c1, c2 = coeffs[:, idx]
        tiny = 1e-14 * max(1.0, abs(c0), abs(c1), abs(c2))
        # upward parabola is nondecreasing on [0,1] iff its slope at 0
        # is nonnegative, i.e. the vertex sits at t <= 0
        vertex = float(-c1 / (2.0 * c2)) if abs(c2) >= tiny else None
        mono = c2 >= -tiny and c1 >= -tiny
        vals = c0 + c1 * grid + c2 * grid * grid
        mono = bool(mono and (np.diff(vals) >= -tiny).all())
        all_mono &= mono
        elements.append({"element": label, "coefficients": [float(c0), float(c1), float(c2)],
                         "vertex": vertex, "monotone": mono})
    return MonotonicityReport(all_mono, elements, max_err)
