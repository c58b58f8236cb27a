"""Uniform-grid discretization of the clamped plate with tension.

The clamped conditions u = du/dn = 0 are imposed by extension by zero:
a grid node is an unknown only when it lies strictly inside the domain,
and every stencil neighbour outside the active set reads 0. A is the
13-point discrete bilaplacian (h^-4), B the 5-point discrete negative
Laplacian (h^-2), both restricted to the active set, which makes the
pair symmetric positive definite whenever the active set is non-empty.

Grids and operators are immutable after assembly; concurrent solves on
shared operators are safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    EmptyGrid,
    IndefiniteSystem,
    NoConvergence,
    PreconditionViolated,
    ValidationError,
)
from .geometry import ConvexDomain, signed_distance

# offsets (di, dj) and weights of the two stencils
_BIHARMONIC = (
    np.array([(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1),
              (1, 1), (1, -1), (-1, 1), (-1, -1),
              (2, 0), (-2, 0), (0, 2), (0, -2)]),
    np.array([20.0, -8.0, -8.0, -8.0, -8.0, 2.0, 2.0, 2.0, 2.0,
              1.0, 1.0, 1.0, 1.0]),
)
_LAPLACIAN = (
    np.array([(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]),
    np.array([4.0, -1.0, -1.0, -1.0, -1.0]),
)

# above this many unknowns the direct factorization gives way to CG
_DIRECT_LIMIT = 2_000_000

# certified residuals are normwise relative backward errors
# ||Mu-f|| / (||M|| ||u|| + ||f||); refinement additionally drives the plain
# relative residual ||Mu-f|| / ||f|| toward _REFINE_TARGET where the
# conditioning allows, which the eigen iteration relies on
_RESIDUAL_TOL = 1e-10
_REFINE_TARGET = 1e-12
_MAX_REFINE = 4


@dataclass(frozen=True)
class ActiveGrid:
    """Active-node restriction of the uniform grid on [-R, R]^2.

    A node is active iff its signed distance to the domain is strictly
    negative; the extension-by-zero convention treats every other node
    as a hard zero.
    """

    domain: ConvexDomain
    h: float
    coords: np.ndarray            # 1-D node coordinates, both axes
    index: np.ndarray             # 2-D array, -1 for inactive nodes
    nodes: np.ndarray             # (m, 2) integer (i, j) per unknown
    positions: np.ndarray         # (m, 2) node coordinates per unknown
    boundary_distance: np.ndarray  # (m,) distance to the domain boundary

    @property
    def active_count(self) -> int:
        return len(self.nodes)

    def nearest_active(self, point) -> int:
        """Index of the active node closest to a point."""
        p = np.asarray(point, dtype=float)
        d2 = (self.positions[:, 0] - p[0]) ** 2 + (self.positions[:, 1] - p[1]) ** 2
        return int(np.argmin(d2))


def discretize(d: ConvexDomain, h: float) -> ActiveGrid:
    """Classify grid nodes of spacing h against the domain.

    Requires 0 < h <= R/8. Raises EmptyGrid when no node falls strictly
    inside the domain. Deterministic for identical inputs.
    """
    R = d.ball_radius
    if not 0.0 < h <= R / 8.0:
        raise PreconditionViolated(f"need 0 < h <= R/8 = {R / 8.0:.6g}, got {h}")
    n = int(np.ceil(2.0 * R / h - 1e-12))
    coords = -R + h * np.arange(n + 1)
    X, Y = np.meshgrid(coords, coords, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    sd = signed_distance(pts, d).reshape(n + 1, n + 1)
    active = sd < 0.0
    count = int(active.sum())
    if count == 0:
        raise EmptyGrid(f"no grid node of spacing {h} lies strictly inside the domain")
    index = np.full((n + 1, n + 1), -1, dtype=np.int64)
    ii, jj = np.nonzero(active)
    index[ii, jj] = np.arange(count)
    nodes = np.column_stack([ii, jj])
    positions = np.column_stack([coords[ii], coords[jj]])
    bdist = -sd[ii, jj]
    for arr in (coords, index, nodes, positions, bdist):
        arr.setflags(write=False)
    return ActiveGrid(d, float(h), coords, index, nodes, positions, bdist)


@dataclass(frozen=True)
class DiscreteOperators:
    """Assembled stiffness pair (A, B) on the active unknowns.

    A: 13-point bilaplacian scaled by h^-4; B: 5-point negative
    Laplacian scaled by h^-2. Both symmetric; the inner-product
    quadrature weight is h^2.
    """

    grid: ActiveGrid
    A: sp.csc_matrix = field(repr=False)
    B: sp.csc_matrix = field(repr=False)

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def quadrature_weight(self) -> float:
        return self.grid.h ** 2


def _assemble_stencil(grid: ActiveGrid, offsets, weights, scale) -> sp.csc_matrix:
    index = grid.index
    nx, ny = index.shape
    ii, jj = grid.nodes[:, 0], grid.nodes[:, 1]
    base = index[ii, jj]
    rows, cols, vals = [], [], []
    for (di, dj), w in zip(offsets, weights):
        i2, j2 = ii + di, jj + dj
        ok = (i2 >= 0) & (i2 < nx) & (j2 >= 0) & (j2 < ny)
        nb = index[i2[ok], j2[ok]]
        act = nb >= 0
        rows.append(base[ok][act])
        cols.append(nb[act])
        vals.append(np.full(int(act.sum()), w * scale))
    m = grid.active_count
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(m, m),
    ).tocsc()
    return A


def assemble(grid: ActiveGrid) -> DiscreteOperators:
    """Assemble the operator pair and certify symmetry."""
    h = grid.h
    A = _assemble_stencil(grid, *_BIHARMONIC, h ** -4)
    B = _assemble_stencil(grid, *_LAPLACIAN, h ** -2)
    for name, M in (("A", A), ("B", B)):
        if (M - M.T).count_nonzero() != 0:
            raise ValidationError(f"assembled operator {name} is not symmetric")
    return DiscreteOperators(grid, A, B)


@dataclass(frozen=True)
class LoadSpec:
    """Nonnegative bounded load f, sampled at active node positions."""

    kind: str
    amplitude: float = 0.0
    center: tuple = (0.0, 0.0)
    width: float = 1.0
    samples: dict | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "gaussian_bump", "grid_samples"):
            raise ValidationError(f"unknown load kind {self.kind!r}")
        if self.kind == "grid_samples":
            if not self.samples:
                raise ValidationError("grid_samples load needs a sample mapping")
            vals = np.array(list(self.samples.values()), dtype=float)
            if not np.all(np.isfinite(vals)) or np.any(vals < 0.0):
                raise ValidationError("load must be nonnegative and finite")
        else:
            if not np.isfinite(self.amplitude) or self.amplitude < 0.0:
                raise ValidationError("load amplitude must be nonnegative and finite")
            if self.kind == "gaussian_bump" and not self.width > 0.0:
                raise ValidationError("bump width must be positive")

    @classmethod
    def constant(cls, amplitude: float) -> "LoadSpec":
        return cls("constant", amplitude=float(amplitude))

    @classmethod
    def gaussian_bump(cls, center, width: float, amplitude: float) -> "LoadSpec":
        return cls("gaussian_bump", amplitude=float(amplitude),
                   center=(float(center[0]), float(center[1])), width=float(width))

    @classmethod
    def grid_samples(cls, samples: dict) -> "LoadSpec":
        return cls("grid_samples",
                   samples={(int(i), int(j)): float(v)
                            for (i, j), v in samples.items()})

    def sample_on(self, grid: ActiveGrid) -> np.ndarray:
        """Evaluate the load at the grid's active nodes."""
        if self.kind == "constant":
            return np.full(grid.active_count, self.amplitude)
        if self.kind == "gaussian_bump":
            dx = grid.positions[:, 0] - self.center[0]
            dy = grid.positions[:, 1] - self.center[1]
            return self.amplitude * np.exp(-(dx * dx + dy * dy)
                                           / (2.0 * self.width ** 2))
        out = np.zeros(grid.active_count)
        for k, (i, j) in enumerate(grid.nodes):
            out[k] = self.samples.get((int(i), int(j)), 0.0)
        return out


def load_ratio_tau(grid: ActiveGrid, samples: np.ndarray) -> float:
    """Discrete ratio (h^2 * sum f) / max f, zero for the zero load."""
    fmax = float(np.max(np.abs(samples))) if len(samples) else 0.0
    if fmax == 0.0:
        return 0.0
    return float(grid.h ** 2 * np.sum(samples) / fmax)


@dataclass(frozen=True)
class SolveReport:
    """Solution record of (A + gamma*B) u = f on the active nodes.

    ``u`` is implicitly extended by zero outside the active set.
    ``min_u_interior`` is the minimum over nodes at boundary distance
    >= 2h, which suppresses staircase artifacts near the boundary.
    """

    gamma: float
    u: np.ndarray
    min_u: float
    min_u_interior: float
    residual: float
    center_value: float
    h: float
    active_count: int


def _factorize(M: sp.csc_matrix):
    """SuperLU factorization with diagonal pivoting; returns (lu, n_negative).

    With diagonal pivoting on a symmetric matrix the U diagonal carries
    the inertia (Sylvester), so n_negative > 0 certifies indefiniteness.
    """
    try:
        lu = spla.splu(M, diag_pivot_thresh=0.0, options={"SymmetricMode": True})
    except RuntimeError as exc:
        raise IndefiniteSystem(f"factorization failed: {exc}") from exc
    n_negative = int(np.sum(lu.U.diagonal() <= 0.0))
    return lu, n_negative


def _backward_error(M, u, f, norm_m, norm_f):
    r = f - M @ u
    denom = norm_m * float(np.linalg.norm(u)) + norm_f
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(r)) / denom


def _refined_solve(lu, M, f, norm_m):
    """Direct solve plus iterative refinement down to the round-off floor.

    Returns the solution and its normwise relative backward error. Near
    a singular shift the plain residual stalls at the conditioning
    floor, which the no-improvement break accepts.
    """
    norm_f = float(np.linalg.norm(f))
    if norm_f == 0.0:
        return np.zeros_like(f), 0.0
    u = lu.solve(f)
    r = f - M @ u
    rel = float(np.linalg.norm(r)) / norm_f
    for _ in range(_MAX_REFINE):
        if rel <= _REFINE_TARGET:
            break
        u = u + lu.solve(r)
        r = f - M @ u
        new_rel = float(np.linalg.norm(r)) / norm_f
        if new_rel >= rel:
            break
        rel = new_rel
    denom = norm_m * float(np.linalg.norm(u)) + norm_f
    return u, float(np.linalg.norm(r)) / denom


def cg_solve(M, f, tol: float = _RESIDUAL_TOL, maxiter: int | None = None):
    """Conjugate-gradient solve with a negative-curvature certificate.

    Raises IndefiniteSystem as soon as a search direction p satisfies
    p^T M p <= 0, which proves M is not positive definite.
    """
    n = M.shape[0]
    if maxiter is None:
        maxiter = max(20 * n, 1000)
    norm_f = float(np.linalg.norm(f))
    if norm_f == 0.0:
        return np.zeros(n), 0.0
    x = np.zeros(n)
    r = f.copy()
    p = r.copy()
    rho = float(r @ r)
    for _ in range(maxiter):
        if np.sqrt(rho) <= tol * norm_f:
            break
        Mp = M @ p
        curv = float(p @ Mp)
        if curv <= 0.0:
            raise IndefiniteSystem(
                "conjugate gradients met non-positive curvature: the system "
                "is not positive definite"
            )
        alpha = rho / curv
        x += alpha * p
        r -= alpha * Mp
        rho_new = float(r @ r)
        p = r + (rho_new / rho) * p
        rho = rho_new
    else:
        raise NoConvergence(
            f"conjugate gradients did not reach {tol:g} in {maxiter} iterations",
            residual=np.sqrt(rho) / norm_f,
        )
    return x, np.sqrt(rho) / norm_f


def _matrix_norm(M) -> float:
    return float(abs(M).sum(axis=1).max())


def solve_plate(ops: DiscreteOperators, gamma: float, f: LoadSpec,
                method: str = "auto") -> SolveReport:
    """Solve (A + gamma*B) u = f and report positivity diagnostics.

    Raises IndefiniteSystem when the shifted operator is not positive
    definite, i.e. gamma is at or below -mu_1 of the discrete pair.
    ``method`` is "direct", "cg" or "auto" (direct unless the system is
    very large). Positive definiteness is surfaced, never regularized.
    """
    if method not in ("auto", "direct", "cg"):
        raise ValidationError(f"unknown solve method {method!r}")
    grid = ops.grid
    samples = f.sample_on(grid)
    M = (ops.A + gamma * ops.B).tocsc() if gamma != 0.0 else ops.A
    norm_m = _matrix_norm(M)
    use_direct = method == "direct" or (
        method == "auto" and grid.active_count <= _DIRECT_LIMIT
    )
    if use_direct:
        lu, n_negative = _factorize(M)
        if n_negative > 0:
            raise IndefiniteSystem(
                f"A + gamma*B with gamma={gamma:.6g} has {n_negative} negative "
                "eigenvalue(s): gamma is at or below -mu_1 of the discrete pair"
            )
        u, residual = _refined_solve(lu, M, samples, norm_m)
    else:
        u, rel = cg_solve(M, samples)
        residual = _backward_error(M, u, samples, norm_m,
                                   float(np.linalg.norm(samples)))
    if residual > _RESIDUAL_TOL:
        raise NoConvergence(
            f"solver stalled at backward error {residual:.3e}", residual=residual
        )
    interior = grid.boundary_distance >= 2.0 * grid.h
    min_u = float(u.min())
    min_u_interior = float(u[interior].min()) if interior.any() else min_u
    center = grid.nearest_active(grid.domain.centroid)
    return SolveReport(
        gamma=float(gamma),
        u=u,
        min_u=min_u,
        min_u_interior=min_u_interior,
        residual=residual,
        center_value=float(u[center]),
        h=grid.h,
        active_count=grid.active_count,
    )


def solve_membrane(ops: DiscreteOperators, f: LoadSpec) -> np.ndarray:
    """Solve the pure second-order problem B v = f (membrane limit oracle)."""
    samples = f.sample_on(ops.grid)
    M = ops.B.tocsc()
    lu, n_negative = _factorize(M)
    if n_negative > 0:
        raise IndefiniteSystem("discrete Laplacian lost positive definiteness")
    v, _ = _refined_solve(lu, M, samples, _matrix_norm(M))
    return v


def write_field_csv(path, grid: ActiveGrid, u: np.ndarray) -> None:
    """Field output: CSV with columns i, j, x, y, u."""
    from .fileio import write_csv

    rows = (
        (int(i), int(j), float(x), float(y), float(val))
        for (i, j), (x, y), val in zip(grid.nodes, grid.positions, u)
    )
    write_csv(path, ("i", "j", "x", "y", "u"), rows)


def report_json_dict(report: SolveReport) -> dict:
    """Report output schema: everything but the raw field."""
    return {
        "gamma": report.gamma,
        "min_u": report.min_u,
        "min_u_interior": report.min_u_interior,
        "residual": report.residual,
        "center_value": report.center_value,
        "h": report.h,
        "active_count": report.active_count,
    }
