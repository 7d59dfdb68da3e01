"""Critical points of the strain energy: solvers, classification, quotient set.

Two solvers cover complementary needs.  Multi-start Newton is fast and
works for both strain models but is only probabilistically complete.
The total-degree homotopy tracks every path of a cubic start system and
is the instrument that certifies solution counts for GL frameworks,
whose critical equations are polynomial of degree 3 per free coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import Configuration, ValidationError, configuration_diameter, gauge_fix
from .strain import GradientSystem

DIVERGENCE_NORM = 1e8


@dataclass
class CriticalPoint:
    cfg: Configuration
    energy: float
    density_value: float
    classification: str            # minimum | saddle | degenerate
    hessian_inertia: tuple         # (n_plus, n_zero, n_minus)
    gradient_residual: float

    def as_dict(self):
        return {
            "coords": [list(map(float, row)) for row in self.cfg.coords],
            "energy": self.energy,
            "density": self.density_value,
            "classification": self.classification,
            "hessian_inertia": list(self.hessian_inertia),
            "gradient_residual": self.gradient_residual,
        }


@dataclass
class PathStatistics:
    tracked: int
    finite: int
    diverged: int
    failed: int
    finite_nonsingular: int
    finite_singular: int

    def as_dict(self):
        return self.__dict__.copy()


@dataclass
class QuotientSet:
    representatives: list
    dedup_tolerance: float

    def __len__(self):
        return len(self.representatives)

    def __iter__(self):
        return iter(self.representatives)


def classify_point(fw, system, zfree, zero_tol=1e-8):
    """Build a CriticalPoint with inertia-based classification at zfree."""
    z = np.asarray(zfree, dtype=float)
    H = system.jacobian(z)
    H = 0.5 * (H + H.T)
    ev = np.linalg.eigvalsh(H)
    scale = float(np.abs(ev).max()) if len(ev) else 0.0
    thr = zero_tol * scale
    nneg = int((ev < -thr).sum())
    npos = int((ev > thr).sum())
    nzero = len(ev) - npos - nneg
    if nzero >= 1:
        kind = "degenerate"
    elif nneg >= 1:
        kind = "saddle"
    else:
        kind = "minimum"
    energy = float(system.energy(z).real)
    dens = energy / (fw.cross_section * fw.total_length)
    grad = system.gradient(z)
    cfg = Configuration(np.real(system.coords(z)))
    return CriticalPoint(cfg, energy, dens, kind, (npos, nzero, nneg),
                         float(np.abs(grad).max()))


def _dedup_free(system, roots, tol):
    """Greedy dedup of free-coordinate roots after canonicalization."""
    if len(roots) == 0:
        return []
    gauge = system.gauge
    canon = []
    for z in roots:
        cfg = Configuration(np.real(system.coords(z)))
        canon.append(gauge.canonicalize(cfg).coords.reshape(-1))
    canon = np.array(canon)
    order = np.lexsort(canon.T[::-1])
    kept = []
    kept_rows = []
    for idx in order:
        row = canon[idx]
        if kept_rows and min(np.max(np.abs(row - r)) for r in kept_rows) <= tol:
            continue
        kept_rows.append(row)
        kept.append(idx)
    return [roots[i] for i in sorted(kept)]


def solve_critical_newton(fw, base_cfg, starts=20000, seed=0, box_scale=1.0,
                          iterations=120):
    """Multi-start damped Newton on grad U = 0 over free coordinates.

    Starts are sampled uniformly in a box of half-width
    box_scale * diameter around the base configuration.  Converged
    roots are classified and deduplicated; non-convergent starts are
    dropped.
    """
    gauge = gauge_fix(fw)
    base = gauge.canonicalize(base_cfg)
    system = GradientSystem(fw, base.coords)
    diam = configuration_diameter(base_cfg)
    center = gauge.extract(base.coords)
    if starts <= 0:
        return []
    rng = np.random.default_rng(seed)
    z = center[None, :] + rng.uniform(-box_scale * diam, box_scale * diam,
                                      size=(starts, gauge.num_free))
    clip = 0.4 * diam
    for _ in range(iterations):
        g = system.gradient(z)
        J = system.jacobian(z)
        ok = np.isfinite(g).all(axis=1)
        ok &= np.abs(np.linalg.det(J)) > 1e-280
        step = np.zeros_like(z)
        if ok.any():
            step[ok] = np.linalg.solve(J[ok], -g[ok][..., None])[..., 0]
        ns = np.abs(step).max(axis=1)
        big = ns > clip
        step[big] *= (clip / ns[big])[:, None]
        z = z + step
    # coarse phase done; a damped pass settles rank-deficient roots
    # the plain iteration jitters around
    gtol = _gradient_tolerance(fw, diam)
    cand = np.isfinite(z).all(axis=1) & (np.abs(z).max(axis=1) < 1e3 * diam)
    cand &= np.abs(system.gradient(z)).max(axis=1) < 1e8 * gtol
    z = z[cand]
    z, res = _polish_roots(system, z)
    good = res < _accept_tolerance(system, z, gtol)
    roots = _dedup_free(system, list(z[good]), 1e-8 * diam)
    points = [classify_point(fw, system, r) for r in roots]
    points.sort(key=lambda p: (p.density_value, tuple(p.cfg.coords.reshape(-1))))
    return points


def _gradient_tolerance(fw, diam):
    # residual scale: stress ~ A * diam^2 / L^3 times lever ~ diam
    lmin = float(fw.rest_lengths.min())
    scale = fw.cross_section * diam ** 3 / lmin ** 3
    return 1e-11 * max(scale, 1.0)


def _accept_tolerance(system, z, gtol):
    """Per-point residual bound for accepting a polished root.

    At a rank-deficient root the residual is quadratic in the distance,
    so damped Newton stalls orders of magnitude above the linear
    roundoff estimate; 1e4 x headroom still sits far below the residual
    of any non-root (observed >= 1e-3).
    """
    if len(z) == 0:
        return np.zeros(0)
    J = system.jacobian(z)
    jmax = np.abs(J).max(axis=(1, 2))
    noise = np.finfo(float).eps * jmax * (1.0 + np.abs(z).max(axis=1))
    return np.maximum(gtol, 1e4 * noise)


class _Homotopy:
    """Total-degree homotopy H = (1-t) gamma G + t F with G_i = z_i^3 - r_i^3."""

    def __init__(self, system, seed):
        self.sys = system
        rng = np.random.default_rng(seed)
        nf = system.nfree
        self.r3 = (np.exp(1j * rng.uniform(0, 2 * np.pi, nf))
                   * rng.uniform(0.7, 1.3, nf)) ** 3
        self.gamma = complex(np.exp(1j * rng.uniform(0, 2 * np.pi)))
        self.nf = nf

    def starts(self):
        roots = [np.exp(2j * np.pi * np.arange(3) / 3) * r ** (1.0 / 3.0)
                 for r in self.r3]
        grids = np.meshgrid(*roots, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def value_jac(self, z, t):
        F = self.sys.gradient(z)
        J = self.sys.jacobian(z)
        G = z ** 3 - self.r3[None, :]
        Gj = 3.0 * z ** 2
        one_t = (1.0 - t)[:, None]
        H = one_t * self.gamma * G + t[:, None] * F
        Hj = ((1.0 - t)[:, None, None] * self.gamma * Gj[:, :, None]
              * np.eye(self.nf) + t[:, None, None] * J)
        return H, Hj

    def tangent(self, z, t):
        F = self.sys.gradient(z)
        J = self.sys.jacobian(z)
        G = z ** 3 - self.r3[None, :]
        Gj = 3.0 * z ** 2
        Hj = ((1.0 - t)[:, None, None] * self.gamma * Gj[:, :, None]
              * np.eye(self.nf) + t[:, None, None] * J)
        Ht = F - self.gamma * G
        return Hj, Ht


def _corrector(hom, z, t, sweeps=4):
    for _ in range(sweeps):
        H, Hj = hom.value_jac(z, t)
        ok = np.abs(np.linalg.det(Hj)) > 1e-280
        step = np.zeros_like(z)
        if ok.any():
            step[ok] = np.linalg.solve(Hj[ok], -H[ok][..., None])[..., 0]
        z = z + step
    return z, step, ok


ENDGAME_BOUNDARY = 1e-4


def _track_batch(hom, z0, dt0=0.01, dtmax=0.03, ctol=1e-11, max_steps=60000):
    """Predictor-corrector from t=0 to the endgame boundary 1 - 1e-4.

    Stopping short of t=1 keeps divergent paths observable: their norm
    growth shows up across the geometric endgame samples instead of
    being squeezed against the wall at t=1.
    """
    B = z0.shape[0]
    z = z0.copy()
    t = np.zeros(B)
    dt = np.full(B, dt0)
    t_end = 1.0 - ENDGAME_BOUNDARY
    # 0 tracking, 2 diverged, 3 failed, 4 reached endgame boundary
    status = np.zeros(B, np.int8)
    steps = 0
    while (status == 0).any() and steps < max_steps:
        steps += 1
        idx = np.where(status == 0)[0]
        zb, tb = z[idx], t[idx]
        # shrink steps as paths crowd toward t=1 to avoid branch jumps
        dtb = np.minimum(dt[idx], np.maximum(0.2 * (1.0 - tb), 2e-5))
        dtb = np.minimum(dtb, t_end - tb)
        Hj, Ht = hom.tangent(zb, tb)
        okd = np.abs(np.linalg.det(Hj)) > 1e-280
        dz = np.zeros_like(zb)
        if okd.any():
            dz[okd] = np.linalg.solve(Hj[okd], -Ht[okd][..., None])[..., 0]
        znew = zb + dz * dtb[:, None]
        tnew = tb + dtb
        znew, last_step, okc = _corrector(hom, znew, tnew)
        good = (okd & okc & np.isfinite(znew).all(axis=1)
                & (np.abs(last_step).max(axis=1) < ctol * (1 + np.abs(znew).max(axis=1))))
        gi = idx[good]
        z[gi] = znew[good]
        t[gi] = tnew[good]
        dt[gi] = np.minimum(dt[gi] * 1.3, dtmax)
        dt[idx[~good]] *= 0.4
        mag = np.abs(z[idx]).max(axis=1)
        status[idx[mag > DIVERGENCE_NORM]] = 2
        tiny = (dt[idx] < 1e-13) & (status[idx] == 0)
        status[idx[tiny]] = 3
        done = (t[idx] >= t_end - 1e-12) & (status[idx] == 0)
        status[idx[done]] = 4
    status[status == 0] = 3
    return z, t, status


def _advance(hom, z, tfrom, tto, sweeps=25):
    """Predictor-corrector hop from tfrom to tto; returns (z, settled)."""
    Hj, Ht = hom.tangent(z, tfrom)
    okd = np.abs(np.linalg.det(Hj)) > 1e-280
    dz = np.zeros_like(z)
    if okd.any():
        dz[okd] = np.linalg.solve(Hj[okd], -Ht[okd][..., None])[..., 0]
    nxt = z + dz * (tto - tfrom)[:, None]
    step = np.zeros_like(nxt)
    active = np.ones(z.shape[0], bool)
    for _ in range(sweeps):
        if not active.any():
            break
        H, Hj = hom.value_jac(nxt[active], tto[active])
        ok = np.abs(np.linalg.det(Hj)) > 1e-280
        sub = np.zeros_like(H)
        if ok.any():
            sub[ok] = np.linalg.solve(Hj[ok], -H[ok][..., None])[..., 0]
        mag = 1.0 + np.abs(nxt[active]).max(axis=1)
        ns = np.abs(sub).max(axis=1)
        big = ns > 0.25 * mag
        sub[big] *= (0.25 * mag[big] / ns[big])[:, None]
        step = np.zeros_like(nxt)
        step[active] = sub
        nxt = nxt + step
        conv = np.zeros(z.shape[0], bool)
        conv[active] = ns < 1e-11 * mag
        active &= ~conv
    mag = np.abs(nxt).max(axis=1)
    with np.errstate(invalid="ignore"):
        settled = ((np.abs(step).max(axis=1) < 1e-9 * (1.0 + mag))
                   & np.isfinite(nxt).all(axis=1))
    return nxt, settled


def _endgame(hom, z, t, levels=32, conv_tol=1e-8, ratio=0.5):
    """Classify paths at the endgame boundary by their limit as t -> 1.

    Geometric samples at t_m = 1 - s0 * ratio^m, each corrector
    converged; levels that fail outright are retried through geometric
    substeps.  A fold endpoint behaves like z* + c sqrt(1-t), so the
    Richardson table uses half-power ratios.  Divergence shows up as a
    norm blowing past the cap, steady growth across levels, or an entry
    magnitude far above the settled limit.  Returns (limits, converged,
    diverged); unresolved paths are in neither class.
    """
    B = z.shape[0]
    if B == 0:
        return z.copy(), np.zeros(0, bool), np.zeros(0, bool)
    s0 = np.maximum(1.0 - t, 1e-9)
    samples = []
    cur = z.copy()
    alive = np.ones(B, bool)
    blown = np.zeros(B, bool)
    death = np.full(B, -1)
    mag0 = np.abs(z).max(axis=1)
    peak = mag0.copy()
    tprev = 1.0 - s0
    for m in range(levels):
        tm = 1.0 - s0 * (ratio ** m)
        nxt, settled = _advance(hom, cur, tprev, tm)
        # escalate failed level jumps through geometric substeps
        for nsub in (2, 4, 8):
            retry = alive & ~settled
            if not retry.any():
                break
            frac = ((1.0 - tm[retry]) / (1.0 - tprev[retry])) ** (1.0 / nsub)
            zs, ts = cur[retry], tprev[retry]
            okr = np.ones(len(zs), bool)
            for _ in range(nsub):
                tn = 1.0 - (1.0 - ts) * frac
                zs, oks = _advance(hom, zs, ts, tn)
                okr &= oks
                ts = tn
            nxt[retry] = np.where(okr[:, None], zs, nxt[retry])
            settled[retry] |= okr
        mag = np.abs(nxt).max(axis=1)
        blown |= alive & (mag > DIVERGENCE_NORM)
        bad = ~settled | blown
        nxt[bad] = cur[bad]
        ai = alive & ~bad
        peak[ai] = np.maximum(peak[ai], np.abs(nxt[ai]).max(axis=1))
        alive &= ~bad
        death[(death < 0) & ~alive] = m
        cur = nxt
        tprev = np.where(alive, tm, tprev)
        samples.append(cur.copy())
    S = np.stack(samples, axis=0)  # (levels, B, nf)
    death[death < 0] = levels

    # paths alive through every level: Richardson over the deepest rows
    K = 8
    P = S[-K:]
    raw_gap = np.abs(P[-1] - P[-2]).max(axis=1)
    T = P.astype(complex).copy()
    # half powers of the level ratio; integer powers are in the family
    for j in range(1, K - 1):
        rho = ratio ** (j / 2.0)
        T = (T[1:] - rho * T[:-1]) / (1.0 - rho)
    limit = T[-1]
    tail_gap = np.abs(T[-1] - T[-2]).max(axis=1)
    ok_tail = (tail_gap < conv_tol * (1.0 + np.abs(limit).max(axis=1))) & \
              (raw_gap < 1e-5 * (1.0 + np.abs(limit).max(axis=1)))

    # a fold path stops settling once the branch pair separation drops
    # to the corrector tolerance; fit z* + c w + d w^2 in w = sqrt(1-t)
    # over its alive prefix instead
    fit_ok = np.zeros(B, bool)
    for i in np.where(~alive & (death >= 3))[0]:
        L = min(int(death[i]), 10)
        rows = S[death[i] - L:death[i], i, :]
        w = np.sqrt(s0[i]) * (np.sqrt(ratio) ** np.arange(death[i] - L, death[i]))
        deg = 3 if L >= 6 else (2 if L >= 4 else 1)
        V = np.vander(w, deg + 1, increasing=True)
        coef, *_ = np.linalg.lstsq(V, rows, rcond=None)
        pred = V @ coef
        fitres = np.abs(pred - rows).max()
        sc = 1.0 + np.abs(coef[0]).max()
        gaps = np.abs(np.diff(rows, axis=0)).max(axis=1)
        shrinking = len(gaps) >= 2 and gaps[-1] < 0.8 * gaps[0] + 1e-12 * sc
        if fitres < 1e-6 * sc and shrinking:
            limit[i] = coef[0]
            fit_ok[i] = True

    scale = 1.0 + np.abs(limit).max(axis=1)
    # entry magnitude far above the settled limit means the corrector
    # fell off a divergent path onto another branch; genuine finite
    # paths enter the endgame near the scale of their limit
    collapsed = mag0 > 1e2 * scale
    converged = ((alive & ok_tail) | (~alive & fit_ok)) & ~collapsed
    hopeless = peak > 20.0 * (1.0 + mag0)
    diverged = (blown | collapsed | hopeless) & ~converged
    return limit, converged, diverged


def _polish_roots(system, z, iters=200):
    """Damped Newton toward the nearest root, keeping the best iterate.

    At a rank-deficient root an undamped solve amplifies roundoff into
    a persistent jitter, so steps are only accepted when the residual
    actually drops and every path remembers its lowest-residual point.
    """
    z = z.copy()
    if len(z) == 0:
        return z, np.zeros(0)
    res = np.abs(system.gradient(z)).max(axis=1)
    best_z = z.copy()
    best_res = res.copy()
    active = np.isfinite(res)
    for _ in range(iters):
        if not active.any():
            break
        za = z[active]
        F = system.gradient(za)
        J = system.jacobian(za)
        ok = np.abs(np.linalg.det(J)) > 1e-280
        step = np.zeros_like(za)
        if ok.any():
            step[ok] = np.linalg.solve(J[ok], -F[ok][..., None])[..., 0]
        ns = np.abs(step).max(axis=1)
        big = ns > 1.0
        step[big] *= (1.0 / ns[big])[:, None]
        ra = best_res[active]
        zn = za.copy()
        rn = ra.copy()
        improved = np.zeros(len(za), bool)
        lam = 1.0
        for _ in range(6):
            zt = za + lam * step
            rt = np.abs(system.gradient(zt)).max(axis=1)
            take = ~improved & (rt < rn)
            zn[take] = zt[take]
            rn[take] = rt[take]
            improved |= take
            if improved.all():
                break
            lam *= 0.5
        z[active] = zn
        upd = np.where(active)[0][improved]
        best_z[upd] = zn[improved]
        best_res[upd] = rn[improved]
        nxt = active.copy()
        nxt[np.where(active)[0][~improved]] = False
        active = nxt
    return best_z, best_res


def _singular_endpoint(system, z, rel_tol=1e-8):
    """True where the target Jacobian is rank-deficient at z."""
    if len(z) == 0:
        return np.zeros(0, bool)
    J = system.jacobian(z)
    sv = np.linalg.svd(J, compute_uv=False)
    return sv[:, -1] < rel_tol * np.maximum(sv[:, 0], 1e-300)


def _reverse_entry(hom, zroot, t_entry, levels=32):
    """Backward-track from roots at t=1 to the endgame boundary.

    Through a nonsingular root the homotopy curve is unique, so the
    state it reaches at t_entry identifies the one true incoming path.
    """
    s0 = np.maximum(1.0 - t_entry, 1e-9)
    smin = s0 * (0.5 ** (levels - 1))
    cur = zroot.copy()
    tprev = np.ones(len(zroot))
    okall = np.ones(len(zroot), bool)
    for m in range(levels):
        tm = 1.0 - smin * (2.0 ** m)
        cur, settled = _advance(hom, cur, tprev, tm)
        okall &= settled
        tprev = tm
    return cur, okall


def _run_paths(hom, system, starts, diam, track_kw=None, eg_kw=None,
               reverse_check=True):
    """Track a batch of start points and classify every path.

    Returns (verdict, limits, root_hits) with verdict 1 finite,
    2 diverged, 3 failed, and polished endpoint limits.  Finite claims
    must polish onto a nearby root; with reverse_check, claims at
    nonsingular roots must also pass the reverse-consistency test,
    which weeds out corrector captures from divergent onto finite
    branches.
    """
    z, t, status = _track_batch(hom, starts, **(track_kw or {}))
    pending = np.where((status == 3) | (status == 4))[0]
    limits = z.copy()
    claim_mask = np.zeros(len(starts), bool)
    if len(pending):
        lim, conv, div = _endgame(hom, z[pending], t[pending], **(eg_kw or {}))
        limits[pending] = lim
        status[pending[div]] = 2
        status[pending[~conv & ~div]] = 3
        # let unresolved paths make a claim too: near-double endpoints
        # stall the extrapolation tolerance but the polish-movement
        # test below still separates genuine roots from stalls
        claim_mask[pending[~div]] = True

    claim = np.where(claim_mask)[0]
    gtol = max(_gradient_tolerance(system.fw, max(diam, 1.0)), 1e-9)
    verdict = status.copy()
    verdict[verdict == 4] = 3
    root_hits = np.zeros((0, system.nfree), complex)
    if len(claim):
        zc, res = _polish_roots(system, limits[claim])
        moved = np.abs(zc - limits[claim]).max(axis=1)
        near = moved < 1e-3 * (1.0 + np.abs(limits[claim]).max(axis=1))
        atol = _accept_tolerance(system, zc, gtol)
        ok = (res < atol) & near & (np.abs(zc).max(axis=1) < 1e4 * max(diam, 1.0))
        # even a capture lands on a genuine root of the target system
        root_hits = zc[ok]
        consistent = np.ones(len(claim), bool)
        if reverse_check:
            sing = _singular_endpoint(system, zc)
            check = ok & ~sing
            if check.any():
                back, bok = _reverse_entry(hom, zc[check], t[claim[check]])
                gap = np.abs(back - z[claim[check]]).max(axis=1)
                scale = 1.0 + np.abs(z[claim[check]]).max(axis=1)
                consistent[check] = bok & (gap < 1e-4 * scale)
        verdict[claim[ok & consistent]] = 1
        # a failed reverse check means some branch hop happened; the
        # path verdict is unknown, so leave it to the rescue re-run
        verdict[claim[ok & ~consistent]] = 3
        verdict[claim[~ok]] = 3
        limits[claim] = zc
    return verdict, limits, root_hits


def solve_critical_homotopy(fw, seed=0, base_cfg=None, real_tol=1e-3):
    """Track all 3^nfree total-degree paths of the GL critical system.

    Returns (points, stats): the real finite critical points and the
    path bookkeeping (tracked, finite over C, diverged, failed).
    """
    if fw.strain_model != "gl":
        raise ValidationError("homotopy solver requires the polynomial GL model")
    gauge = gauge_fix(fw)
    if base_cfg is not None:
        base = gauge.canonicalize(base_cfg).coords
    else:
        base = fw.pin_coords
    system = GradientSystem(fw, base)
    hom = _Homotopy(system, seed)
    starts = hom.starts()
    diam = configuration_diameter(
        Configuration(np.asarray(base, float).reshape(fw.num_knots, fw.dimension)))

    verdict, limits, hits = _run_paths(hom, system, starts, diam)

    # unresolved paths are re-tracked from scratch twice with distinct
    # tight step profiles and gentler endgame levels; a verdict needs
    # both runs to agree (for finite, on the same endpoint root)
    rerun = np.where(verdict == 3)[0]
    if len(rerun):
        va, la, ha = _run_paths(
            hom, system, starts[rerun], diam, reverse_check=False,
            track_kw=dict(dt0=1e-4, dtmax=8e-4, ctol=1e-12),
            eg_kw=dict(levels=96, ratio=2.0 ** -0.25))
        vb, lb, hb = _run_paths(
            hom, system, starts[rerun], diam, reverse_check=False,
            track_kw=dict(dt0=7e-5, dtmax=5e-4, ctol=1e-12),
            eg_kw=dict(levels=64, ratio=2.0 ** -0.5))
        gtol = max(_gradient_tolerance(fw, max(diam, 1.0)), 1e-9)
        pa, ra = _polish_roots(system, la)
        pb, rb = _polish_roots(system, lb)
        same_root = (np.abs(pa - pb).max(axis=1)
                     < 1e-6 * (1.0 + np.abs(pa).max(axis=1)))
        agree_fin = (((va == 1) | (vb == 1)) & same_root
                     & (ra < _accept_tolerance(system, pa, gtol))
                     & (rb < _accept_tolerance(system, pb, gtol)))
        agree_div = (va == 2) & (vb == 2)
        verdict[rerun[agree_fin]] = 1
        verdict[rerun[agree_div]] = 2
        verdict[rerun[~agree_fin & ~agree_div]] = 3
        limits[rerun] = np.where(agree_fin[:, None], pa, la)
        for h in (ha, hb):
            hits = np.concatenate([hits, h]) if len(h) else hits

    confirmed = verdict == 1
    zf = limits[confirmed]
    sing = _singular_endpoint(system, zf)

    stats = PathStatistics(
        tracked=len(starts),
        finite=int(confirmed.sum()),
        diverged=int((verdict == 2).sum()),
        failed=int((verdict == 3).sum()),
        finite_nonsingular=int((~sing).sum()),
        finite_singular=int(sing.sum()),
    )

    # double roots polish to a stall distance ~ sqrt(residual floor), so
    # real landings can carry imaginary jitter up to ~1e-4 relative; the
    # re-polish in real arithmetic plus the residual screen below settle
    # whether the real part is genuinely a root
    if len(hits):
        im_rel = np.abs(hits.imag).max(axis=1) / (1.0 + np.abs(hits).max(axis=1))
        zreal = np.real(hits[im_rel < real_tol]).astype(float)
    else:
        zreal = np.zeros((0, system.nfree))
    if len(zreal):
        zreal, rres = _polish_roots(system, zreal)
        gtol = max(_gradient_tolerance(fw, max(diam, 1.0)), 1e-9)
        zreal = zreal[rres < _accept_tolerance(system, zreal, gtol)]
    roots = _dedup_free(system, list(zreal), 1e-8 * max(diam, 1.0))
    points = [classify_point(fw, system, r) for r in roots]
    points.sort(key=lambda p: (p.density_value, tuple(p.cfg.coords.reshape(-1))))
    return points, stats


def build_quotient_set(points, fw, include_degenerate=True, dedup_tol=1e-8):
    """Quotient set of saddles (optionally degenerate points) mod isometries."""
    kinds = {"saddle"}
    if include_degenerate:
        kinds.add("degenerate")
    selected = [p for p in points if p.classification in kinds]
    gauge = gauge_fix(fw)
    scale = max((configuration_diameter(p.cfg) for p in selected), default=1.0)
    tol = dedup_tol * scale
    reps = []
    canon_rows = []
    for p in sorted(selected, key=lambda p: (p.density_value,
                                             tuple(p.cfg.coords.reshape(-1)))):
        row = gauge.canonicalize(p.cfg).coords.reshape(-1)
        if canon_rows and min(np.max(np.abs(row - r)) for r in canon_rows) <= tol:
            continue
        canon_rows.append(row)
        reps.append(p)
    return QuotientSet(reps, tol)
