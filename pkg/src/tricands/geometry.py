"""Convex hulls and Delaunay triangulations in general dimension.

The heavy lifting is delegated to Qhull through ``scipy.spatial`` (quickhull
for hulls, the paraboloid lifting map for Delaunay).  This module wraps those
engines behind small immutable value types, normalizes their output into a
deterministic order, validates the empty-circumsphere property, and applies a
joggle-and-retry workaround when Qhull trips over degenerate input.

All tolerances assume coordinates of order one (coded inputs in the unit box
are the intended use), so absolute thresholds are safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, Delaunay, QhullError

from .errors import (
    DegenerateInput,
    DegenerateSimplex,
    DimensionTooSmall,
    TriangulationFailed,
)

# Side-of-plane tolerance for facet support tests.
PLANE_TOL = 1e-10
# Strictness margin for circumsphere containment, in squared-distance units.
CIRCUMSPHERE_MARGIN = 1e-9
# Singular values below this (relative to scale) count as affine rank loss.
RANK_TOL = 1e-8
# Magnitude of the uniform perturbation used to escape degeneracy.
JOGGLE_SCALE = 1e-9
MAX_JOGGLE_RETRIES = 3


@dataclass(frozen=True)
class PointSet:
    """An n x d matrix of finite coordinates."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise ValueError("points must be an n x d matrix with d >= 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class HullFacet:
    """One simplicial facet of a convex hull.

    ``normal`` is unit length and points away from the hull interior, so
    every input point x satisfies normal . x <= offset + tol.
    """

    vertex_indices: tuple
    normal: np.ndarray
    offset: float


@dataclass(frozen=True)
class Triangulation:
    """A Delaunay triangulation plus the hull facets of the same points.

    ``points`` holds the coordinates the triangulation was actually built
    from; these differ from the input by at most the joggle magnitude when
    degeneracy forced a perturbed retry.  Downstream consumers (barycenters,
    facet centroids) should use these coordinates.
    """

    simplices: np.ndarray
    facets: list = field(default_factory=list)
    hull_vertex_count: int = 0
    points: np.ndarray = None

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def n_simplices(self) -> int:
        return self.simplices.shape[0]

    def to_text(self) -> str:
        """Line-oriented debug dump: one simplex per line, space-separated."""
        return "\n".join(" ".join(str(i) for i in row) for row in self.simplices)


def _affine_rank(points: np.ndarray) -> int:
    centered = points - points.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    scale = max(1.0, float(svals[0]) if svals.size else 1.0)
    return int(np.sum(svals > RANK_TOL * scale))


def _check_hull_preconditions(ps: PointSet):
    if ps.n < ps.d + 1:
        raise DimensionTooSmall(
            f"need at least d+1={ps.d + 1} points, got {ps.n}"
        )
    if _affine_rank(ps.points) < ps.d:
        raise DegenerateInput(
            f"points span an affine subspace of dimension < {ps.d}"
        )


def _joggled(points: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return points + rng.uniform(-JOGGLE_SCALE, JOGGLE_SCALE, size=points.shape)


def _build_facets(hull: ConvexHull) -> list:
    d = hull.points.shape[1]
    facets = []
    for verts, eq in zip(hull.simplices, hull.equations):
        normal = np.array(eq[:d], dtype=float)
        offset = -float(eq[d])
        norm = float(np.linalg.norm(normal))
        normal = normal / norm
        offset = offset / norm
        facets.append(
            HullFacet(
                vertex_indices=tuple(sorted(int(v) for v in verts)),
                normal=normal,
                offset=offset,
            )
        )
    facets.sort(key=lambda f: f.vertex_indices)
    return facets


def _facets_support_all(facets: list, points: np.ndarray) -> bool:
    if not facets:
        return False
    normals = np.array([f.normal for f in facets])
    offsets = np.array([f.offset for f in facets])
    side = points @ normals.T - offsets
    return bool(np.all(side <= PLANE_TOL))


def _boundary_vertices(facets: list, points: np.ndarray) -> np.ndarray:
    """Indices of points lying on at least one facet plane.

    Wider than Qhull's extreme-point list: points collinear within a facet
    still count as on the hull, which is what the 2d simplex-count identity
    n_T = 2n - 2 - h assumes.
    """
    normals = np.array([f.normal for f in facets])
    offsets = np.array([f.offset for f in facets])
    side = points @ normals.T - offsets
    return np.nonzero((side >= -PLANE_TOL).any(axis=1))[0]


def convex_hull(ps: PointSet, seed: int = 0):
    """Convex hull facets and hull vertex indices of a point set.

    Returns ``(facets, hull_vertices)`` where facets is a list of
    :class:`HullFacet` in lexicographic vertex order and hull_vertices is a
    sorted integer array of the points lying on at least one facet.  The
    ``seed`` only drives the joggle used to escape Qhull degeneracies.
    """
    _check_hull_preconditions(ps)
    rng = np.random.default_rng(seed)
    pts = ps.points
    for attempt in range(MAX_JOGGLE_RETRIES + 1):
        use = pts if attempt == 0 else _joggled(pts, rng)
        try:
            hull = ConvexHull(use)
        except QhullError:
            continue
        facets = _build_facets(hull)
        if _facets_support_all(facets, use):
            return facets, _boundary_vertices(facets, use)
    raise DegenerateInput("convex hull failed after joggle retries")


def _canonical_simplices(simplices: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Sort vertex indices, order rows lexicographically, fix orientation."""
    simp = np.sort(np.asarray(simplices, dtype=int), axis=1)
    order = np.lexsort(simp.T[::-1])
    simp = simp[order]
    verts = points[simp]
    edges = verts[:, 1:, :] - verts[:, :1, :]
    dets = np.linalg.det(edges)
    flip = dets < 0
    if np.any(flip):
        simp = simp.copy()
        simp[flip, -2], simp[flip, -1] = (
            simp[flip, -1].copy(),
            simp[flip, -2].copy(),
        )
    return simp


def circumcenters(points: np.ndarray, simplices: np.ndarray):
    """Circumcenters and radii of the given simplices, vectorized.

    Solves 2 (v_i - v_0) . c = |v_i|^2 - |v_0|^2 for each simplex.
    """
    verts = points[simplices]
    v0 = verts[:, :1, :]
    rest = verts[:, 1:, :]
    lhs = 2.0 * (rest - v0)
    rhs = (rest**2).sum(axis=2) - (v0**2).sum(axis=2)
    centers = np.linalg.solve(lhs, rhs[..., None])[..., 0]
    radii = np.linalg.norm(verts[:, 0, :] - centers, axis=1)
    return centers, radii


def _circumsphere_violation(points: np.ndarray, simplices: np.ndarray) -> bool:
    """True if any point sits strictly inside any simplex circumsphere."""
    chunk = 4096
    for start in range(0, simplices.shape[0], chunk):
        simp = simplices[start : start + chunk]
        try:
            centers, radii = circumcenters(points, simp)
        except np.linalg.LinAlgError:
            return True
        dists = np.linalg.norm(points[None, :, :] - centers[:, None, :], axis=2)
        inside = dists < (radii[:, None] - CIRCUMSPHERE_MARGIN)
        inside[np.arange(simp.shape[0])[:, None], simp] = False
        if inside.any():
            return True
    return False


def delaunay(ps: PointSet, seed: int = 0) -> Triangulation:
    """Delaunay triangulation with hull facets of the same coordinates.

    The simplex list is deterministic given the input order and ``seed``:
    vertex indices are sorted within each simplex, rows are ordered
    lexicographically, and orientation is normalized to positive signed
    volume (by swapping the last two vertices where needed).

    On Qhull failure or an empty-circumsphere violation the points are
    joggled by a uniform perturbation of magnitude 1e-9 and the computation
    retried, up to three times.  The coordinates actually triangulated are
    retained on the result.
    """
    _check_hull_preconditions(ps)
    rng = np.random.default_rng(seed)
    pts = ps.points
    circum_failure = False
    for attempt in range(MAX_JOGGLE_RETRIES + 1):
        use = pts if attempt == 0 else _joggled(pts, rng)
        try:
            tri = Delaunay(use)
            hull = ConvexHull(use)
        except QhullError:
            continue
        if tri.coplanar.size:
            continue
        simp = _canonical_simplices(tri.simplices, use)
        if np.unique(simp).size != ps.n:
            continue
        if _circumsphere_violation(use, simp):
            circum_failure = True
            continue
        facets = _build_facets(hull)
        return Triangulation(
            simplices=simp,
            facets=facets,
            hull_vertex_count=int(_boundary_vertices(facets, use).size),
            points=use.copy(),
        )
    if circum_failure:
        raise TriangulationFailed(
            "circumsphere violations persisted after joggle retries"
        )
    raise DegenerateInput("triangulation failed after joggle retries")


def circumsphere_contains(simplex_vertices, query) -> bool:
    """Strict circumsphere containment via the lifted determinant test.

    For rows (v_i - q, |v_i - q|^2) the determinant equals
    det(rows (v_i - q, 1)) * (r^2 - |q - c|^2), so their ratio recovers the
    squared clearance directly; containment requires it to exceed the
    strictness margin, so boundary points count as outside.
    """
    verts = np.asarray(simplex_vertices, dtype=float)
    q = np.asarray(query, dtype=float)
    d = verts.shape[1]
    if verts.shape != (d + 1, d):
        raise ValueError("simplex_vertices must be a (d+1) x d matrix")
    edges = verts[1:] - verts[0]
    volume = abs(np.linalg.det(edges)) / math.factorial(d)
    if volume <= 1e-12:
        raise DegenerateSimplex(f"simplex volume {volume:.3e} below tolerance")
    rel = verts - q
    lifted = np.column_stack([rel, (rel**2).sum(axis=1)])
    affine = np.column_stack([rel, np.ones(d + 1)])
    measure = np.linalg.det(lifted) / np.linalg.det(affine)
    return bool(measure > CIRCUMSPHERE_MARGIN)


def simplex_volumes(points: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    """Unsigned d-volumes of the given simplices."""
    verts = points[simplices]
    edges = verts[:, 1:, :] - verts[:, :1, :]
    d = points.shape[1]
    return np.abs(np.linalg.det(edges)) / math.factorial(d)
