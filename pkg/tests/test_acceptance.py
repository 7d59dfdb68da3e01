"""Acceptance gate.

One test per criterion; each records its sub-checks and the terminal
summary prints one PASS/FAIL line per criterion.  Tolerances and bands
are stated inline next to each check.
"""

import numpy as np

from snapkit.model import (Configuration, Edge, Framework, Knot, Plate,
                           edge_lengths, gauge_fix)
from snapkit.pathtrack import (LengthPath, _element_energies,
                               verify_monotonicity)
from snapkit.rigidity import is_shaky, rigidity_matrix, self_stress_basis
from snapkit.strain import (bar_energy_gl, edge_stresses, energy_gradient,
                            energy_hessian, energy_matrix,
                            local_triangle_coords, plate_energy, total_energy)

from conftest import WITNESS_BLUE, WITNESS_CYAN, WITNESS_MAGENTA
from test_rigidity import collinear_triangle


def _witness_gap(report, reference_rows):
    got = report.witness_cfg.coords[3:]
    return float(np.abs(got - np.array(reference_rows)).max())


def test_criterion_1_fixture_reproduction(acceptance, snap_bars_gl,
                                          snap_plate_gl, snap_bars_ce):
    cases = [
        ("six-bar gl", snap_bars_gl, 1.8271e-06, WITNESS_CYAN, 300.0),
        ("plate gl", snap_plate_gl, 3.2531e-06, WITNESS_BLUE, 300.0),
        ("six-bar ce", snap_bars_ce, 1.8285e-06, WITNESS_MAGENTA, 60.0),
    ]
    checks = []
    for label, (report, elapsed), expected, witness, budget in cases:
        rel = abs(report.value - expected) / expected
        checks.append((f"{label}: value {report.value:.6e} vs {expected:.4e} "
                       f"(rel {rel:.2e}, tol 5e-4)", rel <= 5e-4))
        gap = _witness_gap(report, witness)
        checks.append((f"{label}: witness gap {gap:.2e} (tol 1e-3)",
                       gap <= 1e-3))
        checks.append((f"{label}: runtime {elapsed:.1f}s (budget {budget:.0f}s)",
                       elapsed < budget))
    acceptance(1, checks)


def test_criterion_2_homotopy_bookkeeping(acceptance, snap_bars_gl,
                                          snap_plate_gl):
    cases = [
        ("six-bar gl", snap_bars_gl, 219, 58),
        ("plate gl", snap_plate_gl, 285, 62),
    ]
    checks = []
    for label, (report, _), finite_target, quotient_target in cases:
        stats = report.diagnostics["path_statistics"]
        quotient = report.diagnostics["quotient_size"]
        checks.append((f"{label}: tracked {stats['tracked']} == 729",
                       stats["tracked"] == 729))
        checks.append((f"{label}: finite {stats['finite']} within "
                       f"{finite_target}+-3",
                       abs(stats["finite"] - finite_target) <= 3))
        checks.append((f"{label}: quotient {quotient} within "
                       f"{quotient_target}+-2",
                       abs(quotient - quotient_target) <= 2))
        checks.append((f"{label}: failures {stats['failed']} logged (<= 3)",
                       stats["failed"] <= 3))
    acceptance(2, checks)


def test_criterion_3_singularity_distance_identity(acceptance, snap_bars_gl,
                                                   snap_plate_gl,
                                                   singdist_bars_gl,
                                                   singdist_plate_gl):
    checks = []
    for label, (snap, _), sd in [("six-bar gl", snap_bars_gl, singdist_bars_gl),
                                 ("plate gl", snap_plate_gl, singdist_plate_gl)]:
        rel = abs(sd.value - snap.value) / snap.value
        checks.append((f"{label}: constrained {sd.value:.6e} vs snap "
                       f"{snap.value:.6e} (rel {rel:.2e}, tol 1e-4)",
                       rel <= 1e-4))
        checks.append((f"{label}: constrained run is certified",
                       sd.path_certificate is not None
                       and sd.path_certificate.success))
    acceptance(3, checks)


def test_criterion_4_green_red_symmetry(acceptance, snap_bars_gl,
                                        snap_bars_gl_red, snap_plate_gl,
                                        snap_plate_gl_red, snap_bars_ce,
                                        snap_bars_ce_red):
    pairs = [
        ("six-bar gl", snap_bars_gl, snap_bars_gl_red),
        ("plate gl", snap_plate_gl, snap_plate_gl_red),
        ("six-bar ce", snap_bars_ce, snap_bars_ce_red),
    ]
    checks = []
    for label, (green, _), (red, _) in pairs:
        rel = abs(green.value - red.value) / green.value
        checks.append((f"{label}: red/green value rel {rel:.2e} (tol 1e-6)",
                       rel <= 1e-6))
        # pinned gauge, so canonical coordinates are the coordinates
        gap = float(np.abs(green.witness_cfg.coords
                           - red.witness_cfg.coords).max())
        checks.append((f"{label}: witness gap {gap:.2e} (tol 1e-5)",
                       gap < 1e-5))
    acceptance(4, checks)


def _random_free_perturbations(fw, cfg, count, scale, seed):
    rng = np.random.default_rng(seed)
    nfree = int((~fw.pinned_mask).sum())
    for _ in range(count):
        coords = cfg.coords.copy()
        coords[~fw.pinned_mask] += scale * rng.standard_normal((nfree,
                                                                fw.dimension))
        yield Configuration(coords)


def test_criterion_5_derivatives(acceptance, bars_gl, plate_gl, bars_ce):
    h = 1e-6
    checks = []
    for label, (fw, cfg) in [("six-bar gl", bars_gl), ("plate gl", plate_gl),
                             ("six-bar ce", bars_ce)]:
        gauge = gauge_fix(fw)
        worst_g, worst_h = 0.0, 0.0
        for c in _random_free_perturbations(fw, cfg, 100, 0.3, seed=101):
            z = gauge.extract(c.coords)
            g = energy_gradient(fw, c)
            fd = np.zeros_like(z)
            for i in range(len(z)):
                zp, zm = z.copy(), z.copy()
                zp[i] += h
                zm[i] -= h
                fd[i] = (total_energy(fw, Configuration(gauge.insert(zp)))
                         - total_energy(fw, Configuration(gauge.insert(zm)))) / (2 * h)
            worst_g = max(worst_g,
                          np.abs(g - fd).max() / max(1.0, np.abs(fd).max()))
            H = energy_hessian(fw, c)
            Hfd = np.zeros_like(H)
            for i in range(len(z)):
                zp, zm = z.copy(), z.copy()
                zp[i] += h
                zm[i] -= h
                gp = energy_gradient(fw, Configuration(gauge.insert(zp)))
                gm = energy_gradient(fw, Configuration(gauge.insert(zm)))
                Hfd[:, i] = (gp - gm) / (2 * h)
            worst_h = max(worst_h,
                          np.abs(H - Hfd).max() / max(1.0, np.abs(Hfd).max()))
        checks.append((f"{label}: gradient vs FD worst rel {worst_g:.2e} "
                       f"(tol 1e-6)", worst_g < 1e-6))
        checks.append((f"{label}: hessian vs FD-of-gradient worst rel "
                       f"{worst_h:.2e} (tol 1e-5)", worst_h < 1e-5))

    # rotation invariance of the GL plate energy
    knots = [Knot(1, (0.0, 0.0), False), Knot(2, (5.0, 0.0), False),
             Knot(3, (3.2, 2.4), False)]
    edges = [Edge(1, 2, 5.0), Edge(1, 3, 4.0), Edge(2, 3, 3.0)]
    fw = Framework(2, knots, edges, [Plate(1, 2, 3)])
    base = np.array([[0.1, -0.2], [5.3, 0.4], [2.9, 2.8]])
    u0 = total_energy(fw, Configuration(base))
    rng = np.random.default_rng(202)
    worst = 0.0
    for th in rng.uniform(0.0, 2.0 * np.pi, 100):
        R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        shift = rng.uniform(-1.0, 1.0, 2)
        u = total_energy(fw, Configuration(base @ R.T + shift))
        worst = max(worst, abs(u - u0))
    checks.append((f"plate gl: rotation invariance worst {worst:.2e} "
                   f"(tol 1e-12)", worst < 1e-12))
    acceptance(5, checks)


def test_criterion_6_stress_certificates(acceptance, bars_gl_solution,
                                         plate_gl_solution, bars_ce_solution):
    checks = []
    for label, (fw, points, stats, quotient) in [
            ("six-bar gl", bars_gl_solution),
            ("plate gl", plate_gl_solution),
            ("six-bar ce", bars_ce_solution)]:
        shaky_ok = True
        worst_eq, worst_grad = 0.0, 0.0
        for rep in quotient:
            if not is_shaky(fw, rep.cfg).shaky:
                shaky_ok = False
            R = rigidity_matrix(fw, rep.cfg)
            om = edge_stresses(fw, rep.cfg)
            worst_eq = max(worst_eq,
                           np.abs(R @ om).max() / np.linalg.norm(om))
            g = energy_gradient(fw, rep.cfg)
            worst_grad = max(worst_grad,
                             np.abs(R @ om - g).max() / max(1.0, np.abs(g).max()))
        checks.append((f"{label}: all {len(quotient)} deformed critical "
                       f"points shaky", shaky_ok))
        checks.append((f"{label}: worst self-stress equilibrium residual "
                       f"{worst_eq:.2e} (tol 1e-8)", worst_eq < 1e-8))
        checks.append((f"{label}: stress formula vs gradient worst "
                       f"{worst_grad:.2e} (tol 1e-12)", worst_grad <= 1e-12))
    acceptance(6, checks)


def test_criterion_7_quadratic_form(acceptance, bars_gl, plate_gl):
    checks = []
    for label, (fw, _) in [("six-bar gl", bars_gl), ("plate gl", plate_gl)]:
        rng = np.random.default_rng(7)
        M = energy_matrix(fw)
        worst = 0.0
        for _ in range(1000):
            L = fw.rest_lengths * (1.0 + 0.1 * rng.uniform(-1, 1, fw.num_edges))
            lifted = np.concatenate([[1.0], L * L])
            quadratic = float(lifted @ M @ lifted)
            direct = sum(bar_energy_gl(fw.rest_lengths[e], L[e])
                         for e in fw.bar_edges)
            for p in fw.plates:
                r1, r2, r3 = p.edge_refs
                direct += plate_energy(
                    (fw.rest_lengths[r1], fw.rest_lengths[r2],
                     fw.rest_lengths[r3]), (L[r1], L[r2], L[r3]))
            worst = max(worst, abs(quadratic - direct) / max(direct, 1e-300))
        checks.append((f"{label}: matrix form vs direct sum worst rel "
                       f"{worst:.2e} at 1000 samples (tol 1e-12)",
                       worst <= 1e-12))

        worst_pred, vertex_ok = 0.0, True
        for _ in range(100):
            # +-10% keeps the plate edge triple inside the triangle inequality
            L1 = fw.rest_lengths * (1.0 + 0.1 * rng.uniform(-1, 1,
                                                            fw.num_edges))
            report = verify_monotonicity(fw, LengthPath(fw.rest_lengths, L1))
            worst_pred = max(worst_pred, report.max_prediction_error)
            for el in report.elements:
                if el["vertex"] is not None and el["vertex"] > 1e-10:
                    vertex_ok = False
        checks.append((f"{label}: quadratic fit 4th-sample error "
                       f"{worst_pred:.2e} over 100 paths (tol 1e-10)",
                       worst_pred < 1e-10))
        checks.append((f"{label}: vertex at t <= 0 from the undeformed start",
                       vertex_ok))
    acceptance(7, checks)


def test_criterion_8_path_monotonicity(acceptance, snap_bars_gl,
                                       snap_plate_gl, snap_bars_ce,
                                       bars_gl, plate_gl, bars_ce):
    cases = [
        ("six-bar gl", snap_bars_gl, bars_gl),
        ("plate gl", snap_plate_gl, plate_gl),
        ("six-bar ce", snap_bars_ce, bars_ce),
    ]
    checks = []
    for label, (report, _), (fw, _) in cases:
        cert = report.path_certificate
        checks.append((f"{label}: accepted path certificate succeeded",
                       cert is not None and cert.success))
        checks.append((f"{label}: endgame gap {cert.endpoint_gap:.2e} "
                       f"(tol 1e-8)", cert.endpoint_gap < 1e-8))
        real_ok = all(c.coords.dtype == np.float64
                      and np.isfinite(c.coords).all()
                      for _, c in cert.samples)
        checks.append((f"{label}: all {len(cert.samples)} samples real",
                       real_ok))
        E = np.stack([_element_energies(fw, edge_lengths(fw, c))[0]
                      for _, c in cert.samples])
        slack = 1e-12 * max(1.0, float(E.max()))
        mono_samples = bool((np.diff(E, axis=0) >= -slack).all())
        if fw.strain_model == "gl":
            path = LengthPath(fw.rest_lengths,
                              edge_lengths(fw, report.witness_cfg))
            mono_fit = verify_monotonicity(fw, path).all_monotone
        else:
            mono_fit = True
        checks.append((f"{label}: per-element energies nondecreasing",
                       mono_samples and mono_fit))
    acceptance(8, checks)


def test_criterion_9_small_instance_oracles(acceptance):
    checks = []
    fw, cfg = collinear_triangle()
    rep = is_shaky(fw, cfg)
    checks.append((f"collinear triangle: rank {rep.rank} == 2",
                   rep.rank == 2 and rep.shaky))
    basis = self_stress_basis(fw, cfg)
    w = basis[0] / basis[0][1]
    stress_err = float(np.abs(w - np.array([-2.0, 1.0, -2.0])).max())
    checks.append((f"collinear triangle: self-stress prop (-2,1,-2), "
                   f"err {stress_err:.2e} (tol 1e-10)", stress_err < 1e-10))

    _, _, pk = local_triangle_coords(5.0, 4.0, 3.0)
    coord_err = float(np.abs(pk - np.array([3.2, 2.4])).max())
    checks.append((f"3-4-5 triangle: local coords err {coord_err:.2e} "
                   f"(tol 1e-10)", coord_err < 1e-10))

    rest = (5.0, 4.0, 3.0)
    worst = 0.0
    for s in (0.8, 0.95, 1.1, 1.25):
        got = plate_energy(rest, tuple(s * L for L in rest))
        want = sum(rest) * (s * s - 1.0) ** 2 / 2.0
        worst = max(worst, abs(got - want) / max(want, 1e-300))
    checks.append((f"uniform scaling: U = V(s^2-1)^2/2 worst rel "
                   f"{worst:.2e} (tol 1e-10)", worst < 1e-10))
    acceptance(9, checks)
