"""Acquisition candidates from the geometry of the current design.

Two candidate families are generated from a Delaunay triangulation of the
design X_n in the unit box:

* interior candidates, one per simplex, at the simplex barycenter
  (1/(d+1)) * sum of its vertices;
* fringe candidates, one per hull facet, extending from the facet centroid
  along the outward unit normal half way to the nearest box boundary.

When the combined set exceeds the cap ``n_sub_max`` it is subsampled without
replacement, reserving up to ``adjacent_fraction`` of the cap for interior
candidates whose simplex touches the incumbent best point (exploitation) and
filling the rest from the complement (exploration).  A plain Latin hypercube
generator is provided as the space-filling comparator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadIndex, EmptyCandidates, NormalDegenerate, TooFewPoints
from .geometry import PointSet, Triangulation, delaunay

# Fraction of the centroid-to-boundary ray used for fringe placement.
# Halving mirrors bisection between the hull and the box edge.
FRINGE_SCALE = 0.5

# Candidates closer than this (sup-norm) to a design row are dropped.
DUPLICATE_TOL = 1e-9


@dataclass(frozen=True)
class SubsampleConfig:
    """Knobs for candidate generation and targeted subsampling.

    ``n_sub_max`` of None means the default cap of 100*d.  ``pad_random``
    appends uniform random points when fewer than ``n_sub_max`` geometric
    candidates exist; it is off by default.
    """

    n_sub_max: int | None = None
    adjacent_fraction: float = 0.10
    seed: int = 0
    pad_random: bool = False
    fringe_scale: float = FRINGE_SCALE

    def __post_init__(self):
        if self.n_sub_max is not None and self.n_sub_max < 1:
            raise ValueError("n_sub_max must be >= 1")
        if not 0.0 <= self.adjacent_fraction <= 1.0:
            raise ValueError("adjacent_fraction must be in [0, 1]")


@dataclass(frozen=True)
class CandidateSet:
    """An N x d candidate matrix with per-point provenance.

    ``kinds`` tags each row as ``interior``, ``fringe``, or (only when random
    padding is enabled) ``random``.  ``adjacent_mask`` marks interior
    candidates whose simplex contains the incumbent best design point.
    """

    points: np.ndarray
    kinds: np.ndarray
    adjacent_mask: np.ndarray

    @property
    def N(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def write_csv(self, path):
        """One row per candidate: coordinates, kind, adjacent flag."""
        lines = [",".join([f"x{k}" for k in range(self.d)] + ["kind", "adjacent"])]
        for row, kind, adj in zip(self.points, self.kinds, self.adjacent_mask):
            lines.append(
                ",".join(
                    [format(v, ".17g") for v in row] + [str(kind), str(int(adj))]
                )
            )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def from_points(cls, points: np.ndarray, kind: str = "interior"):
        """Wrap a bare matrix (e.g. an LHS sample) as a candidate set."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[0] == 0:
            raise EmptyCandidates("candidate matrix is empty")
        return cls(
            points=pts,
            kinds=np.full(pts.shape[0], kind, dtype="<U8"),
            adjacent_mask=np.zeros(pts.shape[0], dtype=bool),
        )


def interior_candidates(tri: Triangulation, ps: PointSet = None) -> np.ndarray:
    """Barycenters of every simplex: one candidate per triangle.

    Coordinates come from the matrix the triangulation retained (joggled on
    degenerate input); ``ps`` is accepted for callers that hold the design
    separately but is only used when the triangulation lacks coordinates.
    """
    points = tri.points if tri.points is not None else ps.points
    return points[tri.simplices].mean(axis=1)


def fringe_candidates(
    facets,
    ps: PointSet,
    bounds=None,
    fringe_scale: float = FRINGE_SCALE,
) -> np.ndarray:
    """One candidate per hull facet, pushed outward toward the box edge.

    For facet centroid F and outward unit normal v, the step length is
    alpha = min over coordinates k with v_k != 0 of ((v_k > 0) - F_k) / v_k,
    i.e. the distance along the ray F + t v to the nearest boundary of the
    unit box.  The candidate is F + fringe_scale * alpha * v, clipped to the
    box (a no-op by construction up to roundoff).
    """
    if bounds is not None:
        lo, hi = np.asarray(bounds[0], float), np.asarray(bounds[1], float)
        if not (np.allclose(lo, 0.0) and np.allclose(hi, 1.0)):
            raise ValueError("only the unit box is supported")
    if not facets:
        return np.empty((0, ps.d))
    normals = np.array([f.normal for f in facets])
    norms = np.linalg.norm(normals, axis=1)
    bad = np.abs(norms - 1.0) > 1e-9
    if bad.any():
        raise NormalDegenerate(
            f"facet normal lengths deviate from 1 by up to {np.abs(norms - 1).max():.3e}"
        )
    centroids = np.array(
        [ps.points[list(f.vertex_indices)].mean(axis=0) for f in facets]
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        target = (normals > 0).astype(float)
        t = (target - centroids) / normals
    t[normals == 0] = np.inf
    alpha = np.clip(t.min(axis=1), 0.0, None)
    out = centroids + fringe_scale * alpha[:, None] * normals
    return np.clip(out, 0.0, 1.0)


def adjacent_candidates(tri: Triangulation, best_index: int) -> np.ndarray:
    """Indices of interior candidates whose simplex contains ``best_index``.

    Fringe candidates are never adjacent; they always land in the complement.
    """
    if not 0 <= int(best_index) < tri.n:
        raise BadIndex(f"best_index {best_index} outside [0, {tri.n})")
    return np.nonzero((tri.simplices == int(best_index)).any(axis=1))[0]


def _drop_design_duplicates(cands: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Boolean keep-mask: candidates too close to a design row are dropped."""
    if cands.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    gaps = np.abs(cands[:, None, :] - X[None, :, :]).max(axis=2)
    return gaps.min(axis=1) > DUPLICATE_TOL


def tricands(
    design,
    cfg: SubsampleConfig = None,
    best_index: int | None = None,
) -> CandidateSet:
    """Full tricands construction: interior + fringe, then targeted subsample.

    ``design`` is the n x d input matrix (or any object with an ``X``
    attribute holding one).  If the combined candidate count is within the
    cap, everything is returned.  Otherwise up to
    floor(adjacent_fraction * n_sub_max) candidates are drawn from the set
    adjacent to ``best_index`` (fewer if the adjacent set is smaller) and the
    remainder uniformly from the complement.  With ``best_index=None`` the
    subsample is uniform over all candidates.
    """
    X = np.asarray(getattr(design, "X", design), dtype=float)
    if X.ndim != 2:
        raise ValueError("design must be an n x d matrix")
    n, d = X.shape
    if n < d + 1:
        raise TooFewPoints(f"need at least d+1={d + 1} design points, got {n}")
    cfg = cfg or SubsampleConfig()
    n_sub = cfg.n_sub_max if cfg.n_sub_max is not None else 100 * d
    rng = np.random.default_rng(cfg.seed)

    tri = delaunay(PointSet(X), seed=cfg.seed)
    interior = interior_candidates(tri)
    fringe = fringe_candidates(
        tri.facets, PointSet(tri.points), fringe_scale=cfg.fringe_scale
    )

    adj_mask_interior = np.zeros(interior.shape[0], dtype=bool)
    if best_index is not None:
        adj_mask_interior[adjacent_candidates(tri, best_index)] = True

    points = np.clip(np.vstack([interior, fringe]), 0.0, 1.0)
    kinds = np.concatenate(
        [
            np.full(interior.shape[0], "interior", dtype="<U8"),
            np.full(fringe.shape[0], "fringe", dtype="<U8"),
        ]
    )
    adjacent = np.concatenate(
        [adj_mask_interior, np.zeros(fringe.shape[0], dtype=bool)]
    )

    keep = _drop_design_duplicates(points, X)
    points, kinds, adjacent = points[keep], kinds[keep], adjacent[keep]
    N = points.shape[0]

    if N <= n_sub:
        if cfg.pad_random and N < n_sub:
            extra = rng.uniform(size=(n_sub - N, d))
            points = np.vstack([points, extra])
            kinds = np.concatenate(
                [kinds, np.full(extra.shape[0], "random", dtype="<U8")]
            )
            adjacent = np.concatenate(
                [adjacent, np.zeros(extra.shape[0], dtype=bool)]
            )
        return CandidateSet(points=points, kinds=kinds, adjacent_mask=adjacent)

    if best_index is None:
        chosen = rng.choice(N, size=n_sub, replace=False)
    else:
        adj_idx = np.nonzero(adjacent)[0]
        comp_idx = np.nonzero(~adjacent)[0]
        quota = min(int(cfg.adjacent_fraction * n_sub), adj_idx.size)
        take_adj = rng.choice(adj_idx, size=quota, replace=False)
        need = n_sub - quota
        take_comp = rng.choice(comp_idx, size=min(need, comp_idx.size), replace=False)
        chosen = np.concatenate([take_adj, take_comp])
        short = n_sub - chosen.size
        if short > 0:
            # Complement exhausted (best touches nearly every simplex):
            # top up from the unused adjacent pool rather than undershoot.
            rest = np.setdiff1d(adj_idx, take_adj, assume_unique=True)
            chosen = np.concatenate(
                [chosen, rng.choice(rest, size=short, replace=False)]
            )
    chosen = np.sort(chosen)
    return CandidateSet(
        points=points[chosen], kinds=kinds[chosen], adjacent_mask=adjacent[chosen]
    )


def lhs_candidates(n_cand: int, d: int, seed: int = 0) -> np.ndarray:
    """Random Latin hypercube sample: one point per stratum in every margin."""
    if n_cand < 1:
        raise ValueError("n_cand must be >= 1")
    rng = np.random.default_rng(seed)
    out = np.empty((n_cand, d))
    for k in range(d):
        out[:, k] = (rng.permutation(n_cand) + rng.uniform(size=n_cand)) / n_cand
    return out
