"""Positivity threshold gamma_f: scan, bisection and large-tension checks.

gamma_f(Omega) is the infimal tension above which the plate solution
stays nonnegative for the given load. Its universal quantifier over all
larger tensions is undecidable numerically, so the estimate certifies
positivity on the sampled suffix of the scan (whose last point is the
large anchor gamma_max) and reports separately, as ``is_upset``,
whether positivity was monotone across the scan. Whether that always
holds is exactly the open interpolation question, so it is measured and
never assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ThresholdNotFound, ValidationError
from .geometry import ConvexDomain
from .plate import (
    DiscreteOperators,
    LoadSpec,
    SolveReport,
    assemble,
    discretize,
    load_ratio_tau,
    solve_membrane,
    solve_plate,
)
from .spectral import buckling_load


@dataclass(frozen=True)
class PositivityConfig:
    """Scan and certification parameters.

    ``gamma_max`` and ``bisection_tol`` default to 10*mu1 and
    1e-3*mu1 once the domain's buckling load is known. The positivity
    test is relative: a field counts nonnegative when its (interior)
    minimum is above -tol_pos * max|u|, which is invariant under
    rescaling the load.
    """

    gamma_max: float | None = None
    scan_points: int = 33
    tol_pos: float = 1e-8
    bisection_tol: float | None = None
    use_interior_min: bool = True

    def __post_init__(self):
        if self.scan_points < 3:
            raise ValidationError("scan_points must be at least 3")
        if not self.tol_pos >= 0.0:
            raise ValidationError("tol_pos must be nonnegative")

    def resolved(self, mu1: float) -> "PositivityConfig":
        gmax = 10.0 * mu1 if self.gamma_max is None else self.gamma_max
        btol = 1e-3 * mu1 if self.bisection_tol is None else self.bisection_tol
        if not gmax > -0.95 * mu1:
            raise ValidationError("gamma_max must exceed -0.95*mu1")
        if not btol > 0.0:
            raise ValidationError("bisection_tol must be positive")
        return replace(self, gamma_max=gmax, bisection_tol=btol)


@dataclass(frozen=True)
class ScanEntry:
    gamma: float
    min_u: float
    min_u_interior: float
    positive: bool


@dataclass(frozen=True)
class GammaFReport:
    """Scan record and threshold estimate for one domain and load.

    ``gamma_star`` is None when no sampled suffix was positive; the
    full scan is still attached. ``tau`` is the discrete ratio
    (integral of f) / sup f entering the large-tension theorem.
    """

    mu1: float
    scan: tuple
    gamma_star: float | None
    bisection_width: float | None
    is_upset: bool
    tau: float


def is_nonneg(report: SolveReport, cfg: PositivityConfig) -> bool:
    """Positivity test of a solve, relative to the field's sup norm."""
    m = report.min_u_interior if cfg.use_interior_min else report.min_u
    scale = float(np.max(np.abs(report.u))) if len(report.u) else 0.0
    return m >= -cfg.tol_pos * scale


def scan_gammas(mu1: float, gamma_max: float, scan_points: int) -> np.ndarray:
    """Hybrid scan grid from -0.95*mu1 to gamma_max, strictly increasing.

    Half the points are linear in gamma, half geometric in the distance
    to the admissibility boundary -mu1, which resolves both ends.
    """
    n_lin = scan_points // 2
    n_geo = scan_points - n_lin
    lin = np.linspace(-0.95 * mu1, gamma_max, n_lin)
    geo = np.geomspace(0.05 * mu1, gamma_max + mu1, n_geo) - mu1
    return np.unique(np.concatenate([lin, geo]))


def _entry(report: SolveReport, cfg: PositivityConfig) -> ScanEntry:
    return ScanEntry(
        gamma=report.gamma,
        min_u=report.min_u,
        min_u_interior=report.min_u_interior,
        positive=is_nonneg(report, cfg),
    )


def _is_upset(flags) -> bool:
    # upward closed within samples: no positive followed by a negative
    return not any(a and not b for a, b in zip(flags, flags[1:]))


def estimate_gamma_f(d: ConvexDomain, f: LoadSpec, h: float,
                     cfg: PositivityConfig | None = None) -> GammaFReport:
    """Estimate gamma_f by scanning gamma and bisecting the crossing.

    gamma_star is the smallest sampled gamma whose whole suffix of
    larger samples is positive, refined against its predecessor by
    bisection down to bisection_tol. The zero load short-circuits to
    gamma_star = -mu1 exactly, without any solves: solutions vanish
    identically and are vacuously nonnegative.
    """
    cfg = cfg if cfg is not None else PositivityConfig()
    grid = discretize(d, h)
    ops = assemble(grid)
    samples = f.sample_on(grid)
    tau = load_ratio_tau(grid, samples)
    mu1 = buckling_load(ops).mu1
    cfg = cfg.resolved(mu1)
    gammas = scan_gammas(mu1, cfg.gamma_max, cfg.scan_points)

    if not samples.any():
        scan = tuple(
            ScanEntry(gamma=float(g), min_u=0.0, min_u_interior=0.0, positive=True)
            for g in gammas
        )
        return GammaFReport(mu1=mu1, scan=scan, gamma_star=-mu1,
                            bisection_width=0.0, is_upset=True, tau=tau)

    scan = tuple(_entry(solve_plate(ops, float(g), f), cfg) for g in gammas)
    flags = [e.positive for e in scan]
    upset = _is_upset(flags)

    # smallest index whose suffix is entirely positive
    k = len(flags)
    for i in range(len(flags) - 1, -1, -1):
        if not flags[i]:
            break
        k = i
    if k == len(flags):
        return GammaFReport(mu1=mu1, scan=scan, gamma_star=None,
                            bisection_width=None, is_upset=upset, tau=tau)
    if k == 0:
        # positive from the very first sample; the scan's lower edge is
        # already the configured -0.95*mu1 boundary, nothing to bisect
        return GammaFReport(mu1=mu1, scan=scan, gamma_star=float(gammas[0]),
                            bisection_width=0.0, is_upset=upset, tau=tau)
    lo, hi = float(gammas[k - 1]), float(gammas[k])
    while hi - lo > cfg.bisection_tol:
        mid = 0.5 * (lo + hi)
        if is_nonneg(solve_plate(ops, mid, f), cfg):
            hi = mid
        else:
            lo = mid
    return GammaFReport(mu1=mu1, scan=scan, gamma_star=hi,
                        bisection_width=hi - lo, is_upset=upset, tau=tau)


@dataclass(frozen=True)
class LargeTensionReport:
    """Sampled check of positivity for large tension.

    ``gamma0`` is the smallest sampled tension from which every larger
    sample stays positive. The membrane diagnostic compares
    gamma * u_gamma(centroid) at the largest sample against the pure
    second-order solve, which it approaches as gamma grows.
    """

    gamma0: float
    scan: tuple
    tau: float
    membrane_gamma: float
    tension_times_center: float
    membrane_center: float


def large_tension_check(d: ConvexDomain, f: LoadSpec, h: float, gammas,
                        cfg: PositivityConfig | None = None) -> LargeTensionReport:
    """Check positivity on the given tension samples, largest anchoring.

    Raises ThresholdNotFound when even the largest sample fails the
    positivity test.
    """
    cfg = cfg if cfg is not None else PositivityConfig()
    gam = np.unique(np.asarray(list(gammas), dtype=float))
    if len(gam) == 0:
        raise ValidationError("need at least one tension sample")
    grid = discretize(d, h)
    ops = assemble(grid)
    samples = f.sample_on(grid)
    tau = load_ratio_tau(grid, samples)

    reports = [solve_plate(ops, float(g), f) for g in gam]
    scan = tuple(_entry(r, cfg) for r in reports)
    flags = [e.positive for e in scan]
    if not flags[-1]:
        raise ThresholdNotFound(
            f"positivity fails even at the largest sample gamma={gam[-1]:.6g} "
            f"(min {scan[-1].min_u_interior:.3e})"
        )
    k = len(flags) - 1
    while k > 0 and flags[k - 1]:
        k -= 1
    center = grid.nearest_active(d.centroid)
    v = solve_membrane(ops, f)
    return LargeTensionReport(
        gamma0=float(gam[k]),
        scan=scan,
        tau=tau,
        membrane_gamma=float(gam[-1]),
        tension_times_center=float(gam[-1]) * reports[-1].center_value,
        membrane_center=float(v[center]),
    )


def scan_csv_rows(scan) -> list:
    return [(e.gamma, e.min_u, e.min_u_interior, str(e.positive).lower())
            for e in scan]


def report_json_dict(report: GammaFReport) -> dict:
    return {
        "mu1": report.mu1,
        "scan": [
            {"gamma": e.gamma, "min_u": e.min_u,
             "min_u_interior": e.min_u_interior, "positive": e.positive}
            for e in report.scan
        ],
        "gamma_star": report.gamma_star,
        "bisection_width": report.bisection_width,
        "is_upset": report.is_upset,
        "tau": report.tau,
    }
