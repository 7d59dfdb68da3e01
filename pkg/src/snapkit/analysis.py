"""Snappability and singularity distance of isostatic frameworks.

Snappability of an undeformed realization: walk the quotient set of
deformed critical points in ascending energy density and accept the
first one that the given realization actually deforms into along the
lifted-linear length path.  The singularity distance equals the
snappability for the intrinsic pseudometric; an independent constrained
minimization over the shakiness variety cross-checks that identity.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .critical import (build_quotient_set, solve_critical_homotopy,
                       solve_critical_newton)
from .model import (Configuration, ValidationError, configuration_diameter,
                    edge_lengths, gauge_fix, validate_isostatic)
from .pathtrack import (LengthPath, check_endpoint, project_onto_lengths,
                        track_deformation)
from .rigidity import is_shaky, pure_condition, pure_condition_gradient
from .strain import GradientSystem, density


class PreconditionError(Exception):
    """The input realization violates an operation's precondition."""


class NumericError(Exception):
    """A solver or optimizer failed to produce a usable result."""


@dataclass
class AnalysisReport:
    value: float
    infinite: bool
    witness_cfg: Configuration | None
    witness_is_shaky: bool
    path_certificate: object
    candidates_examined: int
    method: str
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "value": None if self.infinite else float(self.value),
            "infinite": bool(self.infinite),
            "witness": (None if self.witness_cfg is None
                        else [list(map(float, row))
                              for row in self.witness_cfg.coords]),
            "method": self.method,
            "candidates_examined": int(self.candidates_examined),
            "path_certificate": (None if self.path_certificate is None
                                 else self.path_certificate.as_dict()),
            "diagnostics": self.diagnostics,
        }


def _prepare(fw, cfg, rank_tol=1e-9):
    """Validate preconditions; re-project rounded coordinates onto the
    exact rest lengths (fixtures carry few decimals)."""
    iso = validate_isostatic(fw, cfg)
    if not iso.passed:
        raise PreconditionError("; ".join(iso.reasons) or "framework not isostatic")
    L = edge_lengths(fw, cfg)
    reprojected = False
    if (np.abs(L - fw.rest_lengths) > 1e-9 * fw.rest_lengths).any():
        if (np.abs(L - fw.rest_lengths) > 1e-2 * fw.rest_lengths).any():
            raise PreconditionError(
                "configuration is deformed; snappability needs an undeformed start")
        cfg, _ = project_onto_lengths(fw, cfg, fw.rest_lengths)
        reprojected = True
    rep = is_shaky(fw, cfg, tol=rank_tol)
    if rep.shaky:
        raise PreconditionError("realization is shaky")
    return cfg, reprojected


def _solve_points(fw, cfg, solver, starts, seed):
    if solver == "auto":
        solver = "homotopy" if fw.strain_model == "gl" else "newton"
    if solver == "homotopy":
        points, stats = solve_critical_homotopy(fw, seed=seed, base_cfg=cfg)
        return points, stats, "homotopy"
    if solver == "newton":
        points = solve_critical_newton(fw, cfg, starts=starts, seed=seed)
        return points, None, "newton"
    raise ValidationError(f"unknown solver {solver!r}")


def _certify(fw, cfg, rep, endpoint_tol):
    path = LengthPath(fw.rest_lengths, edge_lengths(fw, rep.cfg))
    cert = track_deformation(fw, cfg, path)
    ok = cert.success and check_endpoint(cert, rep.cfg, endpoint_tol)
    return ok, cert


def snappability(fw, cfg, solver="auto", starts=20000, seed=0,
                 include_degenerate=True, dedup_tol=1e-8, rank_tol=1e-9,
                 threads=1, endpoint_tol=None):
    """Minimal strain-energy density barrier the realization can snap over.

    Candidates come from the quotient set of deformed critical points,
    visited in ascending density; the first one reachable by a real,
    certified deformation path sets the value.  An empty or exhausted
    candidate list means the realization cannot snap: value infinity.
    """
    cfg, reprojected = _prepare(fw, cfg, rank_tol)
    points, stats, used = _solve_points(fw, cfg, solver, starts, seed)
    quotient = build_quotient_set(points, fw, include_degenerate, dedup_tol)
    if endpoint_tol is None:
        endpoint_tol = 1e-6 * configuration_diameter(cfg)

    diagnostics = {
        "solver": used,
        "reprojected": reprojected,
        "quotient_size": len(quotient),
        "path_statistics": stats.as_dict() if stats is not None else None,
    }

    reps = list(quotient)
    examined = 0
    accepted = None
    if threads > 1 and reps:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for base in range(0, len(reps), threads):
                chunk = reps[base:base + threads]
                results = list(pool.map(
                    lambda r: _certify(fw, cfg, r, endpoint_tol), chunk))
                examined += len(chunk)
                hits = [(r, c) for r, (ok, c) in zip(chunk, results) if ok]
                if hits:
                    accepted = min(hits, key=lambda rc: rc[0].density_value)
                    break
    else:
        for rep in reps:
            examined += 1
            ok, cert = _certify(fw, cfg, rep, endpoint_tol)
            if ok:
                accepted = (rep, cert)
                break

    if accepted is None:
        diagnostics["low_confidence"] = used == "newton"
        return AnalysisReport(math.inf, True, None, False, None, examined,
                              "snappability", diagnostics)
    rep, cert = accepted
    witness_shaky = is_shaky(fw, rep.cfg, tol=rank_tol).shaky
    value = density(fw, edge_lengths(fw, rep.cfg))
    diagnostics["witness_classification"] = rep.classification
    return AnalysisReport(value, False, rep.cfg, witness_shaky, cert,
                          examined, "snappability", diagnostics)


def singularity_distance(fw, cfg, method="thm3", solver="auto", starts=20000,
                         seed=0, include_degenerate=True, dedup_tol=1e-8,
                         rank_tol=1e-9, threads=1, perturbation_starts=24):
    """Pseudometric distance to the nearest reachable shaky realization.

    method="thm3" evaluates it as the snappability (the two agree for
    this metric).  method="constrained" minimizes the density over the
    shakiness variety directly, seeded from perturbations of the input
    and from the saddle set, and keeps the path-existence requirement.
    """
    if method == "thm3":
        report = snappability(fw, cfg, solver, starts, seed,
                              include_degenerate, dedup_tol, rank_tol, threads)
        report.method = "thm3"
        return report
    if method != "constrained":
        raise ValidationError(f"unknown method {method!r}")

    cfg, reprojected = _prepare(fw, cfg, rank_tol)
    gauge = gauge_fix(fw)
    system = GradientSystem(fw, cfg.coords)
    norm = fw.cross_section * fw.total_length
    diam = configuration_diameter(cfg)

    def dens(z):
        return float(system.energy(z)) / norm

    def dens_grad(z):
        return system.gradient(z) / norm

    def pc(z):
        return pure_condition(fw, Configuration(gauge.insert(z, cfg.coords)))

    def pc_grad(z):
        return pure_condition_gradient(fw, Configuration(gauge.insert(z, cfg.coords)))

    seeds = []
    rng = np.random.default_rng(seed)
    z0 = gauge.extract(cfg.coords)
    for _ in range(perturbation_starts):
        seeds.append(z0 + rng.normal(0.0, 0.05 * diam, size=z0.shape))
    points, stats, used = _solve_points(fw, cfg, solver, starts, seed)
    quotient = build_quotient_set(points, fw, include_degenerate, dedup_tol)
    for rep in quotient:
        seeds.append(gauge.extract(rep.cfg.coords))

    pc_scale = abs(pc(z0))
    minimizers = []
    converged = 0
    for s in seeds:
        res = minimize(dens, s, jac=dens_grad, method="SLSQP",
                       constraints=[{"type": "eq", "fun": pc, "jac": pc_grad}],
                       options={"maxiter": 300, "ftol": 1e-16})
        if not np.isfinite(res.x).all():
            continue
        if abs(pc(res.x)) > 1e-8 * max(pc_scale, 1e-300):
            continue
        converged += 1
        minimizers.append(res.x)

    # dedup in canonical coordinates, ascending density
    uniq = []
    for z in sorted(minimizers, key=dens):
        k = gauge.canonicalize(Configuration(gauge.insert(z, cfg.coords))).coords
        if all(np.abs(k - u).max() > 1e-6 * diam for u in uniq):
            uniq.append(k)

    diagnostics = {
        "solver": used,
        "reprojected": reprojected,
        "starts": len(seeds),
        "converged_starts": converged,
        "distinct_minimizers": len(uniq),
        "path_statistics": stats.as_dict() if stats is not None else None,
    }

    examined = 0
    for k in uniq:
        examined += 1
        target = Configuration(k)
        path = LengthPath(fw.rest_lengths, edge_lengths(fw, target))
        cert = track_deformation(fw, cfg, path)
        if cert.success and check_endpoint(cert, target):
            value = density(fw, edge_lengths(fw, target))
            shaky = is_shaky(fw, target, tol=rank_tol).shaky
            return AnalysisReport(value, False, target, shaky, cert, examined,
                                  "constrained", diagnostics)
    raise NumericError(
        "constrained minimization found no variety point with a certified "
        f"deformation path ({converged} of {len(seeds)} starts converged)")


def compare_variants(entries, solver="auto", starts=20000, seed=0, threads=1):
    """Snappability table over several framework variants.

    entries: list of (label, framework, configuration).  Returns a dict
    with one row per variant: counts, quotient size and value.
    """
    rows = []
    for label, fw, cfg in entries:
        report = snappability(fw, cfg, solver=solver, starts=starts,
                              seed=seed, threads=threads)
        stats = report.diagnostics.get("path_statistics")
        rows.append({
            "label": label,
            "strain_model": fw.strain_model,
            "plates": len(fw.plates),
            "tracked_paths": stats["tracked"] if stats else None,
            "finite_solutions": stats["finite"] if stats else None,
            "quotient_size": report.diagnostics["quotient_size"],
            "value": None if report.infinite else report.value,
            "witness": (None if report.witness_cfg is None
                        else [list(map(float, row))
                              for row in report.witness_cfg.coords]),
        })
    return {"rows": rows}


def format_compare_table(report):
    """Human-readable rendering of a compare_variants report."""
    width = max([len("variant")] + [len(r["label"]) for r in report["rows"]])
    head = f"{'variant':<{width}}{'tracked':>9}{'finite':>8}{'#R':>5}{'value':>14}"
    lines = [head, "-" * len(head)]
    for row in report["rows"]:
        tracked = row["tracked_paths"] if row["tracked_paths"] is not None else "-"
        finite = row["finite_solutions"] if row["finite_solutions"] is not None else "-"
        value = "inf" if row["value"] is None else f"{row['value']:.4e}"
        lines.append(f"{row['label']:<{width}}{tracked:>9}{finite:>8}"
                     f"{row['quotient_size']:>5}{value:>14}")
    return "\n".join(lines)
