"""Derivative-free minimization of gamma_f over the admissible class.

No shape derivative is available for the objective, so the search is
simulated annealing over vertex perturbations: perturb, re-hull, clip
into the ambient ball, rescale to the prescribed area, and accept or
reject. Infeasible proposals are rejected rather than repaired further,
keeping the proposal kernel auditable. The evaluation uses one fixed
grid spacing, recorded with the trace; traces are fully reproducible
from seed plus configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyGrid,
    NumericalError,
    PlateLabError,
    PreconditionViolated,
    ProposalInfeasible,
    ValidationError,
)
from .geometry import (
    AdmissibleClassSpec,
    ConvexDomain,
    area,
    eventually_contains,
    hausdorff_distance,
    hull_vertices,
    polygon_area,
    polygon_centroid,
    regular_polygon,
    scale_to_area,
    signed_distance,
    COLLINEAR_TOL,
)
from .plate import LoadSpec, discretize
from .positivity import PositivityConfig, estimate_gamma_f


@dataclass(frozen=True)
class SearchConfig:
    """Annealing parameters on top of the admissible class description.

    ``sigma0`` defaults to 0.05*R, ``t0`` to 0.2*|gamma_f(start)| + 1.
    ``start`` defaults to the regular vertex_count-gon of the target
    area centered at the origin.
    """

    class_spec: AdmissibleClassSpec
    h: float
    vertex_count: int = 16
    iterations: int = 200
    sigma0: float | None = None
    sigma_decay: float = 0.99
    t0: float | None = None
    cooling: float = 0.95
    positivity: PositivityConfig = field(default_factory=PositivityConfig)
    seed: int = 0
    start: ConvexDomain | None = None

    def __post_init__(self):
        if self.vertex_count < 4:
            raise ValidationError("vertex_count must be at least 4")
        if self.iterations < 0:
            raise ValidationError("iterations must be nonnegative")
        if self.sigma0 is not None and not self.sigma0 >= 0.0:
            raise ValidationError("sigma0 must be nonnegative")
        if not 0.0 < self.sigma_decay <= 1.0 or not 0.0 < self.cooling <= 1.0:
            raise ValidationError("decay factors must lie in (0, 1]")


@dataclass(frozen=True)
class IterateRecord:
    index: int
    domain: ConvexDomain | None
    gamma_star: float | None
    mu1: float | None
    accepted: bool
    dh_step: float | None = None
    error: str | None = None


@dataclass(frozen=True)
class OptimizationTrace:
    """The realized minimizing sequence with its acceptance bookkeeping."""

    iterates: tuple
    best: int
    hausdorff_steps: tuple
    seed: int
    config: SearchConfig

    @property
    def incumbent(self) -> IterateRecord:
        return self.iterates[self.best]

    def accepted(self) -> list:
        return [it for it in self.iterates if it.accepted]


def propose(d: ConvexDomain, sigma: float, rng: np.random.Generator,
            class_spec: AdmissibleClassSpec) -> ConvexDomain:
    """One proposal: perturb vertices, hull, clip into B_R, fix the area.

    Raises ProposalInfeasible whenever the projection chain cannot
    produce a member of the class; the caller treats that as a
    rejection. sigma = 0 returns the input unchanged.
    """
    if sigma == 0.0:
        return d
    R = class_spec.ball_radius
    pts = d.vertices + rng.normal(0.0, sigma, d.vertices.shape)
    verts = hull_vertices(pts, COLLINEAR_TOL * R * R)
    if len(verts) < 3 or polygon_area(verts) <= 0.0:
        raise ProposalInfeasible("perturbed hull is degenerate")
    # clip into the ambient ball by a homothety about the centroid
    c = polygon_centroid(verts)
    radii = np.hypot(verts[:, 0], verts[:, 1])
    if np.any(radii > R):
        c_norm = float(np.hypot(c[0], c[1]))
        span = np.hypot(verts[:, 0] - c[0], verts[:, 1] - c[1])
        if c_norm >= R or np.any(span == 0.0):
            raise ProposalInfeasible("hull centroid escapes the ambient ball")
        s = min(1.0, float(np.min((R - c_norm) / span)))
        if s <= 0.0:
            raise ProposalInfeasible("cannot shrink the hull into the ball")
        verts = c + s * (verts - c)
    try:
        candidate = scale_to_area(ConvexDomain(verts, R), class_spec.target_area)
    except PlateLabError as exc:
        raise ProposalInfeasible(f"area renormalization failed: {exc}") from exc
    if not class_spec.is_member(candidate):
        raise ProposalInfeasible("projected proposal misses the class checks")
    return candidate


def _evaluate(domain: ConvexDomain, f: LoadSpec, cfg: SearchConfig):
    report = estimate_gamma_f(domain, f, cfg.h, cfg.positivity)
    if report.gamma_star is None:
        raise NumericalError("no positive suffix found in the scan range")
    return report.gamma_star, report.mu1


def optimize(cfg: SearchConfig, f: LoadSpec) -> OptimizationTrace:
    """Simulated-annealing minimization of gamma_f over the class.

    Solver failures inside an iterate mark it failed and the search
    continues. The start iterate must evaluate successfully.
    """
    spec = cfg.class_spec
    rng = np.random.default_rng(cfg.seed)
    sigma0 = 0.05 * spec.ball_radius if cfg.sigma0 is None else cfg.sigma0

    start = cfg.start
    if start is None:
        radius = math.sqrt(
            2.0 * spec.target_area
            / (cfg.vertex_count * math.sin(2.0 * math.pi / cfg.vertex_count))
        )
        start = ConvexDomain(regular_polygon(cfg.vertex_count, radius),
                             spec.ball_radius)
    start = scale_to_area(start, spec.target_area)
    if not spec.is_member(start):
        raise ValidationError("start domain cannot be projected into the class")

    gamma_star, mu1 = _evaluate(start, f, cfg)
    t0 = cfg.t0 if cfg.t0 is not None else 0.2 * abs(gamma_star) + 1.0

    iterates = [IterateRecord(index=0, domain=start, gamma_star=gamma_star,
                              mu1=mu1, accepted=True)]
    steps = []
    best = 0
    current_domain, current_gs = start, gamma_star

    for i in range(1, cfg.iterations + 1):
        sigma = sigma0 * cfg.sigma_decay ** (i - 1)
        temperature = t0 * cfg.cooling ** (i - 1)
        try:
            candidate = propose(current_domain, sigma, rng, spec)
            cand_gs, cand_mu = _evaluate(candidate, f, cfg)
        except ProposalInfeasible as exc:
            iterates.append(IterateRecord(index=i, domain=None, gamma_star=None,
                                          mu1=None, accepted=False,
                                          error=f"proposal infeasible: {exc}"))
            continue
        except (NumericalError, EmptyGrid) as exc:
            iterates.append(IterateRecord(index=i, domain=candidate,
                                          gamma_star=None, mu1=None,
                                          accepted=False,
                                          error=f"evaluation failed: {exc}"))
            continue
        delta = cand_gs - current_gs
        accepted = delta < 0.0 or rng.random() < math.exp(-delta / temperature)
        dh = hausdorff_distance(current_domain, candidate) if accepted else None
        iterates.append(IterateRecord(index=i, domain=candidate,
                                      gamma_star=cand_gs, mu1=cand_mu,
                                      accepted=accepted, dh_step=dh))
        if accepted:
            steps.append(dh)
            current_domain, current_gs = candidate, cand_gs
            if cand_gs < iterates[best].gamma_star:
                best = i
    return OptimizationTrace(iterates=tuple(iterates), best=best,
                             hausdorff_steps=tuple(steps), seed=cfg.seed,
                             config=cfg)


@dataclass(frozen=True)
class StepDiagnostic:
    dh: float
    area_error: float
    area_jump: float
    parallel_set_bound: float
    within_bound: bool


@dataclass(frozen=True)
class DiagnosticsReport:
    """Minimizing-sequence diagnostics over the accepted iterates.

    ``addendum_holds`` checks -mu1(incumbent) <= min gamma_star over the
    trace; ``containment_start`` instruments the compact-containment
    mechanism on the Hausdorff-stable tail.
    """

    steps: tuple
    addendum_lhs: float
    addendum_rhs: float
    addendum_holds: bool
    tail_max_step: float
    containment_tail_size: int
    containment_start: int | None


def diagnostics(trace: OptimizationTrace) -> DiagnosticsReport:
    """Area continuity, the addendum bound, and tail containment checks."""
    acc = trace.accepted()
    if len(acc) < 2:
        raise PreconditionViolated("need at least 2 accepted iterates")
    spec = trace.config.class_spec
    R = spec.ball_radius
    steps = []
    for prev, cur in zip(acc, acc[1:]):
        dh = cur.dh_step
        a_prev, a_cur = area(prev.domain), area(cur.domain)
        bound = 2.0 * math.pi * R * dh + math.pi * dh * dh
        steps.append(StepDiagnostic(
            dh=dh,
            area_error=abs(a_cur - spec.target_area),
            area_jump=abs(a_cur - a_prev),
            parallel_set_bound=bound,
            within_bound=abs(a_cur - a_prev) <= bound + 1e-12 * R * R,
        ))
    incumbent = trace.incumbent
    gamma_values = [it.gamma_star for it in trace.iterates
                    if it.gamma_star is not None]
    lhs = -incumbent.mu1
    rhs = min(gamma_values)
    tail = [s.dh for s in steps[len(steps) // 2:]]

    # compact-containment instrumentation: a 0.9-scaled copy of the
    # incumbent must eventually sit inside the Hausdorff-stable tail
    compact = scale_to_area(incumbent.domain, 0.81 * area(incumbent.domain))
    margin = -float(np.max(signed_distance(compact.vertices, incumbent.domain)))
    stable = [it.domain for it in acc
              if hausdorff_distance(it.domain, incumbent.domain) <= 0.5 * margin]
    start = eventually_contains(stable, incumbent.domain, compact)
    return DiagnosticsReport(
        steps=tuple(steps),
        addendum_lhs=lhs,
        addendum_rhs=rhs,
        addendum_holds=lhs <= rhs,
        tail_max_step=max(tail) if tail else 0.0,
        containment_tail_size=len(stable),
        containment_start=start,
    )


@dataclass(frozen=True)
class SymmetryReport:
    """Incumbent against the area-matched disk at the same centroid."""

    mode: str                      # "gamma_f", or "buckling" when f == 0
    dh_to_disk: float
    polygonalization_sagitta: float
    gamma_f_incumbent: float
    mu1_incumbent: float
    gamma_f_disk: float
    mu1_disk: float


def symmetry_report(trace: OptimizationTrace, f: LoadSpec,
                    disk_vertices: int = 64) -> SymmetryReport:
    """Compare the incumbent with the equal-area disk approximant.

    Numbers are reported without asserting a winner; whether symmetry
    breaks for constant loads is open.
    """
    incumbent = trace.incumbent
    cfg = trace.config
    target = cfg.class_spec.target_area
    c = incumbent.domain.centroid
    radius = math.sqrt(target / math.pi)
    ball = max(cfg.class_spec.ball_radius,
               float(np.hypot(c[0], c[1])) + radius * 1.01)
    disk = scale_to_area(
        ConvexDomain(regular_polygon(disk_vertices, radius, center=c), ball),
        target,
    )
    disk_report = estimate_gamma_f(disk, f, cfg.h, cfg.positivity)
    zero_load = not f.sample_on(discretize(disk, cfg.h)).any()
    return SymmetryReport(
        mode="buckling" if zero_load else "gamma_f",
        dh_to_disk=hausdorff_distance(incumbent.domain, disk),
        polygonalization_sagitta=radius * (1.0 - math.cos(math.pi / disk_vertices)),
        gamma_f_incumbent=incumbent.gamma_star,
        mu1_incumbent=incumbent.mu1,
        gamma_f_disk=disk_report.gamma_star,
        mu1_disk=disk_report.mu1,
    )


def trace_records(trace: OptimizationTrace) -> list:
    """JSON-lines schema: one record per iterate."""
    out = []
    for it in trace.iterates:
        out.append({
            "iter": it.index,
            "vertices": None if it.domain is None else it.domain.vertices.tolist(),
            "gamma_star": it.gamma_star,
            "mu1": it.mu1,
            "accepted": it.accepted,
            "d_H_step": it.dh_step,
            "error": it.error,
        })
    return out
