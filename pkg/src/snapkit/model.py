"""Framework data model, validation, file IO and gauge fixing.

A framework couples a graph (knots, edges, optional triangular plates)
with an intrinsic metric: one rest length per edge.  A configuration is
a coordinate assignment for all knots.  Everything downstream (energies,
rigidity, solvers) consumes these two objects.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


class ValidationError(ValueError):
    """A framework file or object violates a model invariant."""


@dataclass(frozen=True)
class Knot:
    id: int
    coords: tuple
    pinned: bool = False


@dataclass(frozen=True)
class Edge:
    i: int
    j: int
    rest_length: float


@dataclass(frozen=True)
class Plate:
    i: int
    j: int
    k: int
    # indices into Framework.edges for (i,j), (i,k), (j,k)
    edge_refs: tuple = field(default=())


@dataclass(frozen=True)
class Configuration:
    coords: np.ndarray  # s x n

    def copy(self):
        return Configuration(self.coords.copy())


class Framework:
    """Validated immutable framework.

    Knot ids are 1-based and contiguous; internally everything is
    0-based.  Edges that belong to at least one plate are materialized
    as plate material, the rest are bars.
    """

    def __init__(self, dimension, knots, edges, plates, cross_section=1.0,
                 strain_model="gl"):
        if dimension not in (2, 3):
            raise ValidationError(f"dimension must be 2 or 3, got {dimension}")
        self.dimension = int(dimension)
        self.knots = list(knots)
        self.edges = list(edges)
        self.plates = []
        self.cross_section = float(cross_section)
        self.strain_model = strain_model
        self._validate_knots()
        self._validate_edges()
        self._attach_plates(plates)
        self._validate_global()
        s, n = len(self.knots), self.dimension
        self.edge_index = {(e.i, e.j): idx for idx, e in enumerate(self.edges)}
        self.ei = np.array([e.i - 1 for e in self.edges], dtype=int)
        self.ej = np.array([e.j - 1 for e in self.edges], dtype=int)
        self.rest_lengths = np.array([e.rest_length for e in self.edges])
        self.total_length = float(self.rest_lengths.sum())
        in_plate = set()
        for p in self.plates:
            in_plate.update(p.edge_refs)
        self.bar_edges = np.array(
            [idx for idx in range(len(self.edges)) if idx not in in_plate],
            dtype=int)
        self.pinned_mask = np.array([k.pinned for k in self.knots])
        self.num_knots = s
        self.num_edges = len(self.edges)
        self.pin_coords = np.array([k.coords for k in self.knots], dtype=float)

    def _validate_knots(self):
        ids = [k.id for k in self.knots]
        if sorted(ids) != list(range(1, len(ids) + 1)):
            raise ValidationError(f"knot ids must be 1..{len(ids)} without gaps, got {sorted(ids)}")
        self.knots.sort(key=lambda k: k.id)
        for k in self.knots:
            if len(k.coords) != self.dimension:
                raise ValidationError(
                    f"knot {k.id}: coords have length {len(k.coords)}, expected {self.dimension}")

    def _validate_edges(self):
        seen = set()
        nk = len(self.knots)
        for e in self.edges:
            if not (1 <= e.i < e.j <= nk):
                raise ValidationError(f"edge ({e.i},{e.j}): need 1 <= i < j <= {nk}")
            if (e.i, e.j) in seen:
                raise ValidationError(f"duplicate edge ({e.i},{e.j})")
            seen.add((e.i, e.j))
            if not (e.rest_length > 0):
                raise ValidationError(f"edge ({e.i},{e.j}): rest_length must be positive")

    def _attach_plates(self, plates):
        index = {(e.i, e.j): idx for idx, e in enumerate(self.edges)}
        use_count = {}
        for p in plates:
            i, j, k = sorted((p.i, p.j, p.k))
            refs = []
            for pair in ((i, j), (i, k), (j, k)):
                if pair not in index:
                    raise ValidationError(f"plate ({i},{j},{k}): missing edge {pair}")
                refs.append(index[pair])
            a, b, c = (self.edges[r].rest_length for r in refs)
            if not (a + b > c and a + c > b and b + c > a):
                raise ValidationError(f"plate ({i},{j},{k}): triangle inequality violated")
            for r in refs:
                use_count[r] = use_count.get(r, 0) + 1
                if use_count[r] > 2:
                    pair = (self.edges[r].i, self.edges[r].j)
                    raise ValidationError(f"edge {pair} belongs to more than two plates")
            self.plates.append(Plate(i, j, k, tuple(refs)))

    def _validate_global(self):
        if self.strain_model not in ("gl", "ce"):
            raise ValidationError(f"strain_model must be 'gl' or 'ce', got {self.strain_model!r}")
        if self.strain_model == "ce" and self.plates:
            raise ValidationError("strain_model 'ce' supports bar-only frameworks")
        if not (self.cross_section > 0):
            raise ValidationError("cross_section must be positive")
        if not self.edges:
            raise ValidationError("framework has no edges")

    def plate_volume(self, plate):
        return self.cross_section * sum(self.edges[r].rest_length for r in plate.edge_refs)

    def check_configuration(self, cfg):
        if cfg.coords.shape != (self.num_knots, self.dimension):
            raise ValidationError(
                f"configuration shape {cfg.coords.shape} does not match "
                f"({self.num_knots},{self.dimension})")
        for k in self.knots:
            if k.pinned and not np.array_equal(cfg.coords[k.id - 1], np.asarray(k.coords, float)):
                raise ValidationError(f"pinned knot {k.id} moved in configuration")


def edge_lengths(fw, cfg):
    """Euclidean edge lengths of a realization, in edge-list order."""
    d = cfg.coords[fw.ei] - cfg.coords[fw.ej]
    return np.sqrt(np.sum(d * d, axis=1))


def squared_edge_lengths(fw, coords):
    d = coords[..., fw.ei, :] - coords[..., fw.ej, :]
    return np.sum(d * d, axis=-1)


def load_framework(path):
    """Load and validate a framework JSON file.

    Returns (Framework, Configuration).
    """
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    for key in ("dimension", "knots", "edges", "configuration"):
        if key not in raw:
            raise ValidationError(f"{path}: missing key {key!r}")
    knots = [Knot(int(k["id"]), tuple(float(c) for c in k["coords"]),
                  bool(k.get("pinned", False))) for k in raw["knots"]]
    edges = [Edge(int(e["i"]), int(e["j"]), float(e["length"])) for e in raw["edges"]]
    plates = [Plate(int(p["i"]), int(p["j"]), int(p["k"])) for p in raw.get("plates", [])]
    fw = Framework(raw["dimension"], knots, edges, plates,
                   cross_section=raw.get("cross_section", 1.0),
                   strain_model=raw.get("strain_model", "gl"))
    coords = np.array(raw["configuration"], dtype=float)
    cfg = Configuration(coords)
    fw.check_configuration(cfg)
    return fw, cfg


def save_framework(fw, cfg, path):
    """Serialize a framework and configuration with full-precision numbers."""
    doc = {
        "dimension": fw.dimension,
        "cross_section": fw.cross_section,
        "strain_model": fw.strain_model,
        "knots": [{"id": k.id, "coords": list(k.coords), "pinned": k.pinned}
                  for k in fw.knots],
        "edges": [{"i": e.i, "j": e.j, "length": e.rest_length} for e in fw.edges],
        "plates": [{"i": p.i, "j": p.j, "k": p.k} for p in fw.plates],
        "configuration": [list(row) for row in cfg.coords],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


@dataclass
class IsostaticReport:
    passed: bool
    count_ok: bool
    rank_ok: bool
    expected_edges: int
    rank: int
    reasons: list


def validate_isostatic(fw, cfg):
    """Edge-count and rank check for isostaticity at the given realization."""
    from . import rigidity  # deferred: rigidity depends on model

    n, b = fw.dimension, fw.num_edges
    npinned = int(fw.pinned_mask.sum())
    if npinned:
        expected = n * (fw.num_knots - npinned)
    else:
        expected = fw.num_knots * n - (n * n + n) // 2
    count_ok = b == expected
    R = rigidity.rigidity_matrix(fw, cfg)
    rank = int(np.linalg.matrix_rank(R, tol=1e-9 * max(1.0, np.abs(R).max())))
    rank_ok = rank == b
    reasons = []
    if not count_ok:
        reasons.append(f"count condition failed: b={b}, expected {expected}")
    if not rank_ok:
        reasons.append(f"rigidity matrix rank {rank} < {b} (realization shaky or graph dependent)")
    return IsostaticReport(count_ok and rank_ok, count_ok, rank_ok, expected, rank, reasons)


class Gauge:
    """Free-coordinate bookkeeping and the canonicalizing isometry.

    free_indices are flat indices into the (s*n)-vector of coordinates.
    canonicalize maps any configuration to the gauge by a direct
    isometry, which makes configurations comparable mod SE(n).
    """

    def __init__(self, fw):
        self.fw = fw
        s, n = fw.num_knots, fw.dimension
        npinned = int(fw.pinned_mask.sum())
        rigid_dof = (n * n + n) // 2
        if npinned == 0:
            fixed = set()
            fixed.update((0, d) for d in range(n))      # knot 1 at origin
            for d in range(1, n):
                fixed.add((1, d))                        # knot 2 on +x ray
            if n == 3:
                fixed.add((2, 2))                        # knot 3 in z = 0
            self.pinned_gauge = False
        else:
            # pins must kill every rigid motion, else the quotient is ill-posed
            pins = np.where(fw.pinned_mask)[0]
            T = _trivial_motions(fw.pin_coords, n)
            rows = T.reshape(s, n, rigid_dof)[pins].reshape(-1, rigid_dof)
            if np.linalg.matrix_rank(rows, tol=1e-12) < rigid_dof:
                raise ValidationError(
                    "partial pinning: pinned knots leave a rigid-body motion free")
            fixed = {(int(i), d) for i in pins for d in range(n)}
            self.pinned_gauge = True
        self.free_pairs = [(i, d) for i in range(s) for d in range(n)
                           if (i, d) not in fixed]
        self.free_indices = np.array([i * n + d for i, d in self.free_pairs], dtype=int)
        self.num_free = len(self.free_indices)

    def extract(self, coords):
        return coords.reshape(-1)[self.free_indices].copy()

    def insert(self, free_values, base_coords=None):
        s, n = self.fw.num_knots, self.fw.dimension
        if base_coords is None:
            base_coords = self.fw.pin_coords
        full = np.array(base_coords, dtype=float).reshape(-1).copy()
        full[self.free_indices] = free_values
        return full.reshape(s, n)

    def canonicalize(self, cfg):
        if self.pinned_gauge:
            return cfg
        coords = cfg.coords - cfg.coords[0]
        n = self.fw.dimension
        if n == 2:
            v = coords[1]
            r = math.hypot(v[0], v[1])
            if r < 1e-300:
                raise ValidationError("gauge knots coincide; cannot canonicalize")
            c, s_ = v[0] / r, v[1] / r
            rot = np.array([[c, s_], [-s_, c]])
            coords = coords @ rot.T
        else:
            coords = _rotate_3d_gauge(coords)
        return Configuration(coords)


def _trivial_motions(coords, n):
    """Basis of infinitesimal rigid motions, one (s*n)-column per motion."""
    s = coords.shape[0]
    cols = []
    for d in range(n):
        v = np.zeros((s, n))
        v[:, d] = 1.0
        cols.append(v.reshape(-1))
    if n == 2:
        v = np.stack([-coords[:, 1], coords[:, 0]], axis=1)
        cols.append(v.reshape(-1))
    else:
        for a, b in ((0, 1), (0, 2), (1, 2)):
            v = np.zeros((s, n))
            v[:, a] = -coords[:, b]
            v[:, b] = coords[:, a]
            cols.append(v.reshape(-1))
    return np.stack(cols, axis=1)


def _rotate_3d_gauge(coords):
    v = coords[1]
    r = np.linalg.norm(v)
    if r < 1e-300:
        raise ValidationError("gauge knots coincide; cannot canonicalize")
    # rotation taking v to (r,0,0): align with x-axis, then roll knot 3 into z=0
    x = v / r
    helper = np.array([0.0, 0.0, 1.0]) if abs(x[2]) < 0.9 else np.array([0.0, 1.0, 0.0])
    y = np.cross(helper, x)
    y /= np.linalg.norm(y)
    z = np.cross(x, y)
    Q = np.stack([x, y, z])         # maps v -> (r,0,0)
    coords = coords @ Q.T
    w = coords[2]
    ryz = math.hypot(w[1], w[2])
    if ryz > 1e-300:
        c, s_ = w[1] / ryz, w[2] / ryz
        roll = np.array([[1, 0, 0], [0, c, s_], [0, -s_, c]])
        coords = coords @ roll.T
    return Configuration(coords)


def gauge_fix(fw):
    """Free coordinate indices plus the canonicalizer for a framework."""
    if fw.num_knots < 3:
        raise ValidationError("gauge fixing needs at least 3 knots")
    return Gauge(fw)


def configuration_diameter(cfg):
    """Largest pairwise knot distance; the length scale for tolerances."""
    c = cfg.coords
    diff = c[:, None, :] - c[None, :, :]
    return float(np.sqrt((diff * diff).sum(-1)).max())
