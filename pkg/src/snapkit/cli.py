"""Command line front end: validation, energies, critical points,
snappability, singularity distance, path tracking, SVG figures.

Every subcommand emits a JSON report (stdout or --out) rendered with
sorted keys, so identical inputs and flags give byte-identical output.
Exit codes: 0 success, 1 validation failure, 2 precondition failure,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import analysis, critical, pathtrack
from .model import (Configuration, Framework, ValidationError, edge_lengths,
                    load_framework, validate_isostatic)
from .rigidity import is_shaky
from .strain import density, total_energy

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PRECONDITION = 2
EXIT_NUMERIC = 3

_PALETTE = ["#2ca02c", "#d62728", "#17becf", "#1f77b4", "#e377c2", "#ff7f0e"]


def _build_parser():
    p = argparse.ArgumentParser(prog="snapkit",
                                description="snappability and singularity "
                                            "distance of isostatic frameworks")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("input", help="framework JSON file")
        sp.add_argument("--solver", choices=["newton", "homotopy"], default=None)
        sp.add_argument("--starts", type=int, default=20000)
        sp.add_argument("--seed", type=int, default=None,
                        help="RNG seed (default: SNAPKIT_SEED or 0)")
        sp.add_argument("--model", choices=["gl", "ce"], default=None,
                        help="override the fixture's strain model")
        sp.add_argument("--rank-tol", type=float, default=1e-9)
        sp.add_argument("--dedup-tol", type=float, default=1e-8)
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--out", default=None, help="write the JSON report here")
        sp.add_argument("--svg", default=None, help="write an SVG figure here")
        sp.add_argument("--csv", default=None, help="write per-step CSV here")
        return sp

    common(sub.add_parser("check", help="validate, isostaticity, shakiness"))
    common(sub.add_parser("energy", help="strain energy of the configuration"))
    common(sub.add_parser("critical", help="critical points of the energy"))
    common(sub.add_parser("snap", help="snappability"))
    sd = common(sub.add_parser("singdist", help="singularity distance"))
    sd.add_argument("--method", choices=["thm3", "constrained"], default="thm3")
    tr = common(sub.add_parser("track", help="track a deformation path"))
    tr.add_argument("--target", required=True,
                    help="framework JSON whose configuration sets the target lengths")
    pl = common(sub.add_parser("plot", help="SVG figure of realizations"))
    pl.add_argument("--overlay", action="append", default=[],
                    help="additional framework JSON files to draw on top")
    cp = sub.add_parser("compare", help="snappability table over variants")
    cp.add_argument("inputs", nargs="+", help="framework JSON files")
    cp.add_argument("--solver", choices=["newton", "homotopy"], default=None)
    cp.add_argument("--starts", type=int, default=20000)
    cp.add_argument("--seed", type=int, default=None)
    cp.add_argument("--threads", type=int, default=1)
    cp.add_argument("--out", default=None)
    return p


def _resolve_seed(args):
    if getattr(args, "seed", None) is not None:
        return args.seed
    return int(os.environ.get("SNAPKIT_SEED", "0"))


def _load(args):
    fw, cfg = load_framework(args.input)
    model = getattr(args, "model", None)
    if model is not None and model != fw.strain_model:
        fw = Framework(fw.dimension, fw.knots, fw.edges, fw.plates,
                       fw.cross_section, model)
    return fw, cfg


def _emit(doc, out_path):
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_check(args):
    fw, cfg = _load(args)
    iso = validate_isostatic(fw, cfg)
    shaky = is_shaky(fw, cfg, tol=args.rank_tol)
    violations = list(iso.reasons)
    if shaky.shaky:
        violations.append("realization is shaky")
    doc = {
        "valid": not violations,
        "isostatic": iso.passed,
        "edge_count_ok": iso.count_ok,
        "rank": iso.rank,
        "required_rank": shaky.required_rank,
        "shaky": shaky.shaky,
        "violations": violations,
    }
    _emit(doc, args.out)
    return EXIT_OK if not violations else EXIT_VALIDATION


def _cmd_energy(args):
    fw, cfg = _load(args)
    L = edge_lengths(fw, cfg)
    vals, labels = pathtrack._element_energies(fw, L)
    doc = {
        "edge_lengths": [float(x) for x in L],
        "elements": [{"element": lab, "energy": float(v)}
                     for lab, v in zip(labels, vals)],
        "total_energy": float(total_energy(fw, cfg)),
        "density": float(density(fw, cfg)),
    }
    _emit(doc, args.out)
    return EXIT_OK


def _cmd_critical(args):
    fw, cfg = _load(args)
    seed = _resolve_seed(args)
    solver = args.solver or ("homotopy" if fw.strain_model == "gl" else "newton")
    if solver == "homotopy":
        points, stats = critical.solve_critical_homotopy(fw, seed=seed, base_cfg=cfg)
    else:
        points = critical.solve_critical_newton(fw, cfg, starts=args.starts, seed=seed)
        stats = None
    quotient = critical.build_quotient_set(points, fw, dedup_tol=args.dedup_tol)
    doc = {
        "solver": solver,
        "points": [p.as_dict() for p in points],
        "path_statistics": stats.as_dict() if stats is not None else None,
        "quotient_size": len(quotient),
        "quotient_densities": [float(p.density_value) for p in quotient],
    }
    _emit(doc, args.out)
    return EXIT_OK


def _cmd_snap(args):
    fw, cfg = _load(args)
    report = analysis.snappability(
        fw, cfg, solver=args.solver or "auto", starts=args.starts,
        seed=_resolve_seed(args), dedup_tol=args.dedup_tol,
        rank_tol=args.rank_tol, threads=args.threads)
    _emit(report.as_dict(), args.out)
    if args.svg and report.witness_cfg is not None:
        _write_svg(args.svg, fw, [cfg, report.witness_cfg])
    return EXIT_OK


def _cmd_singdist(args):
    fw, cfg = _load(args)
    report = analysis.singularity_distance(
        fw, cfg, method=args.method, solver=args.solver or "auto",
        starts=args.starts, seed=_resolve_seed(args),
        dedup_tol=args.dedup_tol, rank_tol=args.rank_tol,
        threads=args.threads)
    _emit(report.as_dict(), args.out)
    return EXIT_OK


def _cmd_track(args):
    fw, cfg = _load(args)
    _, target_cfg = load_framework(args.target)
    path = pathtrack.LengthPath(edge_lengths(fw, cfg),
                                edge_lengths(fw, target_cfg))
    cert = pathtrack.track_deformation(fw, cfg, path)
    _emit(cert.as_dict(), args.out)
    if args.csv:
        _write_track_csv(args.csv, fw, cert)
    return EXIT_OK if cert.success else EXIT_NUMERIC


def _cmd_plot(args):
    fw, cfg = _load(args)
    configs = [cfg]
    for path in args.overlay:
        _, extra = load_framework(path)
        configs.append(extra)
    if not args.svg:
        raise ValidationError("plot needs --svg OUTPUT")
    _write_svg(args.svg, fw, configs)
    _emit({"svg": args.svg, "layers": len(configs)}, args.out)
    return EXIT_OK


def _cmd_compare(args):
    entries = []
    for path in args.inputs:
        fw, cfg = load_framework(path)
        entries.append((os.path.basename(path), fw, cfg))
    report = analysis.compare_variants(
        entries, solver=args.solver or "auto", starts=args.starts,
        seed=_resolve_seed(args), threads=args.threads)
    sys.stdout.write(analysis.format_compare_table(report) + "\n")
    if args.out:
        _emit(report, args.out)
    return EXIT_OK


def _write_track_csv(path, fw, cert):
    labels = pathtrack._element_energies(fw, fw.rest_lengths)[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        coord_cols = [f"k{i + 1}{ax}" for i in range(fw.num_knots)
                      for ax in "xyz"[:fw.dimension]]
        writer.writerow(["t"] + coord_cols + labels)
        for t, c in cert.samples:
            L = edge_lengths(fw, c)
            vals = pathtrack._element_energies(fw, L)[0]
            row = [repr(float(t))]
            row += [repr(float(x)) for x in c.coords.reshape(-1)]
            row += [repr(float(v)) for v in vals]
            writer.writerow(row)


def _write_svg(path, fw, configs, width=480.0):
    """Deterministic SVG: one layer group per configuration."""
    if fw.dimension != 2:
        raise ValidationError("SVG plotting supports dimension 2 only")
    allc = np.concatenate([c.coords for c in configs], axis=0)
    lo, hi = allc.min(axis=0), allc.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    pad = 0.08 * span.max()
    lo, hi = lo - pad, hi + pad
    scale = width / (hi[0] - lo[0])
    height = (hi[1] - lo[1]) * scale

    def xy(p):
        return ((p[0] - lo[0]) * scale, (hi[1] - p[1]) * scale)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
             f'height="{height:.0f}" viewBox="0 0 {width:.2f} {height:.2f}">']
    for li, cfg in enumerate(configs):
        color = "#444444" if li == 0 else _PALETTE[(li - 1) % len(_PALETTE)]
        parts.append(f'<g id="layer{li}" stroke="{color}" fill="none">')
        for p in fw.plates:
            pts = " ".join("{:.4f},{:.4f}".format(*xy(cfg.coords[i - 1]))
                           for i in (p.i, p.j, p.k))
            parts.append(f'<polygon points="{pts}" fill="{color}" '
                         f'fill-opacity="0.25" stroke-width="1.5"/>')
        for e in fw.bar_edges:
            x1, y1 = xy(cfg.coords[fw.ei[e]])
            x2, y2 = xy(cfg.coords[fw.ej[e]])
            parts.append(f'<line x1="{x1:.4f}" y1="{y1:.4f}" x2="{x2:.4f}" '
                         f'y2="{y2:.4f}" stroke-width="1.5"/>')
        for i, k in enumerate(fw.knots):
            cx, cy = xy(cfg.coords[i])
            fill = "#000000" if k.pinned else "#ffffff"
            parts.append(f'<circle cx="{cx:.4f}" cy="{cy:.4f}" r="4" '
                         f'fill="{fill}" stroke-width="1"/>')
            if li == 0:
                parts.append(f'<text x="{cx + 6:.4f}" y="{cy - 6:.4f}" '
                             f'font-size="11" fill="#000000" '
                             f'stroke="none">{k.id}</text>')
        parts.append("</g>")
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


_DISPATCH = {
    "check": _cmd_check,
    "energy": _cmd_energy,
    "critical": _cmd_critical,
    "snap": _cmd_snap,
    "singdist": _cmd_singdist,
    "track": _cmd_track,
    "plot": _cmd_plot,
    "compare": _cmd_compare,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except analysis.PreconditionError as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except analysis.NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
