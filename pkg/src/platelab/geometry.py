"""Exact computational geometry for convex polygons.

Domains are convex polygons stored as counter-clockwise vertex chains
inside an ambient ball B_R(0). All values are immutable after
construction and every operation is pure, so the whole module is safe
for unrestricted concurrent use.

Conventions
-----------
* Point membership and distances use the closed polygon: a point on the
  boundary has distance 0 and counts as inside.
* Compact containment (``eventually_contains``) is strict: the compact
  set must sit in the open interior, matching the open-domain statement
  it instruments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInput,
    OutsideAmbientBall,
    PreconditionViolated,
    ValidationError,
)

# Cross products below COLLINEAR_TOL * R^2 are treated as collinear and the
# middle vertex is dropped, keeping the strict-convexity invariant checkable.
COLLINEAR_TOL = 1e-12

# Relative slack when checking |v| <= R, absorbing round-off from building
# vertices as R*(cos t, sin t).
_BALL_SLACK = 1e-12


def polygon_area(vertices) -> float:
    """Shoelace area of a polygon given as an (n, 2) array, CCW positive."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_centroid(vertices) -> np.ndarray:
    """Area-weighted centroid of a CCW polygon."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    cross = x * np.roll(y, -1) - np.roll(x, -1) * y
    area = 0.5 * np.sum(cross)
    cx = np.sum((x + np.roll(x, -1)) * cross) / (6.0 * area)
    cy = np.sum((y + np.roll(y, -1)) * cross) / (6.0 * area)
    return np.array([cx, cy])


def _chain_crosses(v: np.ndarray) -> np.ndarray:
    """Cross product at each vertex of the closed chain (positive = left turn)."""
    prev = v - np.roll(v, 1, axis=0)       # edge arriving at the vertex
    nxt = np.roll(v, -1, axis=0) - v       # edge leaving the vertex
    return prev[:, 0] * nxt[:, 1] - prev[:, 1] * nxt[:, 0]


def _prune_collinear(v: np.ndarray, tol: float) -> np.ndarray:
    """Drop vertices whose turn is below tol; reject right turns."""
    v = np.asarray(v, dtype=float)
    while len(v) >= 3:
        cross = _chain_crosses(v)
        if np.any(cross < -tol):
            raise ValidationError(
                "vertex chain is not counter-clockwise convex "
                f"(cross product {cross.min():.3e} < 0)"
            )
        flat = np.nonzero(cross <= tol)[0]
        if flat.size == 0:
            return v
        v = np.delete(v, flat[0], axis=0)
    raise DegenerateInput("fewer than 3 non-collinear vertices")


@dataclass(frozen=True)
class ConvexDomain:
    """Convex polygon inside the ambient ball B_R(0).

    Attributes
    ----------
    vertices : np.ndarray
        (n, 2) array, counter-clockwise, strictly convex chain
        (every consecutive cross product positive). Collinear triples
        are eliminated at construction.
    ball_radius : float
        Radius R of the ambient ball; every vertex satisfies |v| <= R.
    """

    vertices: np.ndarray
    ball_radius: float

    def __post_init__(self):
        r = float(self.ball_radius)
        if not r > 0.0:
            raise ValidationError("ball_radius must be positive")
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise DegenerateInput("vertices must be an (n, 2) array with n >= 3")
        if not np.all(np.isfinite(v)):
            raise ValidationError("vertices contain non-finite coordinates")
        v = _prune_collinear(v, COLLINEAR_TOL * r * r)
        norms = np.hypot(v[:, 0], v[:, 1])
        if np.any(norms > r * (1.0 + _BALL_SLACK)):
            raise OutsideAmbientBall(
                f"vertex at radius {norms.max():.6g} escapes the ambient "
                f"ball of radius {r:.6g}"
            )
        if polygon_area(v) <= 0.0:
            raise DegenerateInput("polygon has non-positive area")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "ball_radius", r)

    @property
    def centroid(self) -> np.ndarray:
        return polygon_centroid(self.vertices)

    def __eq__(self, other):
        return (
            isinstance(other, ConvexDomain)
            and self.ball_radius == other.ball_radius
            and self.vertices.shape == other.vertices.shape
            and bool(np.all(self.vertices == other.vertices))
        )


def convex_hull(points, ball_radius: float) -> ConvexDomain:
    """Convex hull of a 2-D point set as a ConvexDomain.

    Parameters
    ----------
    points : array-like
        (m, 2) coordinates; at least 3 points not all collinear.
    ball_radius : float
        Ambient ball radius the hull must fit in.

    Returns
    -------
    ConvexDomain
        Hull vertices in counter-clockwise order with collinear
        vertices removed.

    Raises
    ------
    DegenerateInput
        If the hull has zero area.
    OutsideAmbientBall
        If a hull vertex lies outside B_R(0).
    """
    verts = hull_vertices(points, COLLINEAR_TOL * float(ball_radius) ** 2)
    if len(verts) < 3:
        raise DegenerateInput("points are collinear: hull has zero area")
    return ConvexDomain(verts, ball_radius)


def hull_vertices(points, tol: float) -> np.ndarray:
    """Monotone-chain convex hull, strict turns only, CCW vertex array."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) < 3:
        return pts
    # lexicographic sort by (x, y)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def build(seq):
        chain = []
        for p in seq:
            while len(chain) >= 2:
                o, a = chain[-2], chain[-1]
                if (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0]) <= tol:
                    chain.pop()
                else:
                    break
            chain.append(p)
        return chain

    lower = build(pts)
    upper = build(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def area(d: ConvexDomain) -> float:
    """Polygon area of the domain (exact shoelace value)."""
    return polygon_area(d.vertices)


def scale_to_area(d: ConvexDomain, target_area: float) -> ConvexDomain:
    """Homothety about the centroid giving the requested area.

    Returns ``d`` itself when the scale factor is exactly 1, so the
    identity case does not pick up round-off.

    Raises
    ------
    OutsideAmbientBall
        If the rescaled polygon no longer fits into B_R(0).
    """
    if not target_area > 0.0:
        raise ValidationError("target area must be positive")
    s = float(np.sqrt(target_area / area(d)))
    if s == 1.0:
        return d
    c = d.centroid
    return ConvexDomain(c + s * (d.vertices - c), d.ball_radius)


def signed_distance(points, d: ConvexDomain) -> np.ndarray:
    """Signed Euclidean distance to the closed polygon.

    Negative strictly inside, zero on the boundary, positive outside.
    Vectorized over an (m, 2) array of points.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    v = d.vertices
    n = len(v)
    inside = np.ones(len(pts), dtype=bool)
    dmin = np.full(len(pts), np.inf)
    for i in range(n):
        a = v[i]
        e = v[(i + 1) % n] - a
        w = pts - a
        cross = e[0] * w[:, 1] - e[1] * w[:, 0]
        inside &= cross >= 0.0
        t = np.clip((w @ e) / (e @ e), 0.0, 1.0)
        dx = w[:, 0] - t * e[0]
        dy = w[:, 1] - t * e[1]
        np.minimum(dmin, np.hypot(dx, dy), out=dmin)
    return np.where(inside, -dmin, dmin)


def distance_to_convex(x, d: ConvexDomain) -> float:
    """Distance from a point to the closed polygon (0 if inside)."""
    return max(float(signed_distance(np.asarray(x, dtype=float)[None, :], d)[0]), 0.0)


def hausdorff_distance(a: ConvexDomain, b: ConvexDomain) -> float:
    """Hausdorff distance between two closed convex polygons.

    Point-to-convex-set distance is a convex function, so the supremum
    over a convex body is attained at a vertex; maximizing over the two
    vertex sets is therefore exact.
    """
    da = np.maximum(signed_distance(a.vertices, b), 0.0)
    db = np.maximum(signed_distance(b.vertices, a), 0.0)
    return max(float(da.max()), float(db.max()))


def contains_strictly(member, compact: ConvexDomain) -> bool:
    """Whether ``compact`` lies in the open interior of ``member``.

    ``member`` is normally a ConvexDomain; an (n, 2) vertex array is
    accepted as an arbitrary simple polygon, which is only needed for
    the non-convex counterexample fixtures.
    """
    if isinstance(member, ConvexDomain):
        return bool(np.all(signed_distance(compact.vertices, member) < 0.0))
    import shapely

    poly = shapely.Polygon(np.asarray(member, dtype=float))
    return bool(shapely.contains_properly(poly, shapely.Polygon(compact.vertices)))


def eventually_contains(sequence, limit: ConvexDomain, compact: ConvexDomain):
    """Smallest index from which every later member contains ``compact``.

    Parameters
    ----------
    sequence : list
        Domains converging to ``limit``; ConvexDomain entries or raw
        (n, 2) simple-polygon vertex arrays (non-convex fixtures).
    limit : ConvexDomain
        The limit domain; ``compact`` must be compactly contained in it.
    compact : ConvexDomain
        The compact test set K.

    Returns
    -------
    int or None
        1-based index m0 such that K is strictly inside every member
        from m0 on; None when the scanned prefix never stabilizes.
    """
    if len(sequence) == 0:
        raise PreconditionViolated("sequence must be non-empty")
    margin = float(np.max(signed_distance(compact.vertices, limit)))
    if not margin < 0.0:
        raise PreconditionViolated(
            "compact set is not compactly contained in the limit domain "
            f"(max signed distance {margin:.3e} >= 0)"
        )
    m0 = None
    for idx in range(len(sequence) - 1, -1, -1):
        if not contains_strictly(sequence[idx], compact):
            break
        m0 = idx + 1
    return m0


def regular_polygon(k: int, radius: float = 1.0, center=(0.0, 0.0)) -> np.ndarray:
    """Vertices of a regular k-gon, CCW starting at angle 0."""
    if k < 3:
        raise ValidationError("need k >= 3 vertices")
    th = 2.0 * np.pi * np.arange(k) / k
    return np.column_stack(
        [center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)]
    )


def disk_domain(radius: float, ball_radius: float | None = None, k: int = 64,
                center=(0.0, 0.0)) -> ConvexDomain:
    """K-gon approximation of a disk (default 64-gon oracle fixture)."""
    r_ball = radius if ball_radius is None else ball_radius
    return ConvexDomain(regular_polygon(k, radius, center), r_ball)


def punctured_approximants(outer: ConvexDomain, puncture_center,
                           initial_radius: float, count: int,
                           segments: int = 24) -> list[np.ndarray]:
    """Simple polygons approximating ``outer`` minus a shrinking disk.

    Member m removes the open disk of radius initial_radius/m around
    ``puncture_center``, reached from outside through a thin slit, so
    each member is a simple (non-convex) polygon. The closures converge
    to the closure of ``outer`` in Hausdorff distance while no member
    ever contains the puncture point.
    """
    import shapely

    cx, cy = float(puncture_center[0]), float(puncture_center[1])
    if distance_to_convex((cx, cy), outer) > 0.0:
        raise PreconditionViolated("puncture center must lie in the domain")
    base = shapely.Polygon(outer.vertices)
    reach = 4.0 * outer.ball_radius
    members = []
    for m in range(1, count + 1):
        r = initial_radius / m
        hole = shapely.Point(cx, cy).buffer(r, quad_segs=segments // 4)
        slit = shapely.box(cx, cy - r / 4.0, cx + reach, cy + r / 4.0)
        cut = base.difference(hole.union(slit))
        if cut.geom_type == "MultiPolygon":
            cut = max(cut.geoms, key=lambda g: g.area)
        ring = np.asarray(cut.exterior.coords, dtype=float)[:-1]
        members.append(ring)
    return members


@dataclass(frozen=True)
class AdmissibleClassSpec:
    """The admissible class M: convex domains in B_R(0) of fixed area.

    Attributes
    ----------
    ball_radius : float
        Ambient ball radius R.
    target_area : float
        Prescribed area c1; requires c1 <= pi * R^2, else M is empty.
    area_tolerance : float
        Relative tolerance for the area membership check.
    """

    ball_radius: float
    target_area: float
    area_tolerance: float = 1e-6

    def __post_init__(self):
        if not self.ball_radius > 0.0:
            raise ValidationError("ball_radius must be positive")
        if not self.target_area > 0.0:
            raise ValidationError("target_area must be positive")
        if self.target_area > np.pi * self.ball_radius ** 2:
            raise ValidationError(
                "admissible class is empty: target_area exceeds the area "
                "of the ambient ball"
            )
        if not self.area_tolerance > 0.0:
            raise ValidationError("area_tolerance must be positive")

    def membership(self, d: ConvexDomain) -> dict:
        """The three membership checks, individually reported."""
        norms = np.hypot(d.vertices[:, 0], d.vertices[:, 1])
        return {
            "convex": bool(np.all(_chain_crosses(d.vertices) > 0.0)),
            "area_ok": abs(area(d) - self.target_area) / self.target_area
            <= self.area_tolerance,
            "inside_ball": bool(
                np.all(norms <= self.ball_radius * (1.0 + _BALL_SLACK))
            ),
        }

    def is_member(self, d: ConvexDomain) -> bool:
        return all(self.membership(d).values())


def save_domain(d: ConvexDomain, path) -> None:
    """Write a domain file: JSON object {"R": number, "vertices": [[x,y],...]}."""
    from .fileio import atomic_write_text

    payload = {"R": d.ball_radius, "vertices": d.vertices.tolist()}
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def load_domain(path) -> ConvexDomain:
    """Read and validate a domain file, naming the violated invariant on error."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: expected a JSON object")
    unknown = set(raw) - {"R", "vertices"}
    if unknown:
        raise ValidationError(f"{path}: unknown keys {sorted(unknown)}")
    if "R" not in raw or "vertices" not in raw:
        raise ValidationError(f"{path}: missing required keys 'R' and 'vertices'")
    try:
        return ConvexDomain(np.asarray(raw["vertices"], dtype=float), float(raw["R"]))
    except (ValidationError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise type(exc)(f"{path}: {exc}") from exc
        raise ValidationError(f"{path}: malformed domain data: {exc}") from exc
