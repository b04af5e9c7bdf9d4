"""Outer solve loop: a vanishing radius schedule with an inner
sufficient-decrease loop at each radius, full iterate logging, and export of
the per-level (point, radius) pairs that initialize local follow-up methods.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from .builder import DEFAULT_MAX_ITER, BuilderResult, BundleBuilderError, compute_W
from .geometry import NormKind, Point, TrustRegion, as_point, derive_rng, norm
from .model import PointMemory
from .oracle import OracleInterface


@dataclass(frozen=True)
class RunConfig:
    """Parameters of one solve.

    The radius schedule is delta0 * delta_ratio^(j-1) unless an explicit
    ``delta_schedule`` is given; ``tau`` is either a constant or a per-level
    sequence (the convergence theory wants a vanishing one, but a small
    constant works well in practice).
    """

    x0: Point
    p: int
    q: int
    delta0: float = 1.0
    delta_ratio: float = 0.1
    tau: Union[float, Sequence[float]] = 1e-5
    sigma: float = 0.5
    cap: float = 0.1
    j_max: int = 5
    max_inner: int = 10_000
    memory_capacity: int = 100
    seed: int = 0
    delta_schedule: Optional[Sequence[float]] = None
    builder_max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self):
        object.__setattr__(self, "x0", as_point(self.x0))
        if self.p not in (1, 2) or self.q not in (1, 2):
            raise ValueError("growth target p and model order q must be 1 or 2")
        if self.q < self.p:
            raise ValueError("model order q must be >= growth target p")
        if not self.delta0 > 0:
            raise ValueError("delta0 must be positive")
        if not 0.0 < self.delta_ratio < 1.0:
            raise ValueError("delta_ratio must lie in (0, 1)")
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")
        if self.cap <= 0 or self.j_max < 1 or self.max_inner < 1:
            raise ValueError("cap, j_max and max_inner must be positive")
        if self.delta_schedule is not None:
            sched = tuple(float(d) for d in self.delta_schedule)
            if len(sched) < self.j_max or any(d <= 0 for d in sched):
                raise ValueError("delta_schedule must supply j_max positive radii")
            object.__setattr__(self, "delta_schedule", sched)
        if not np.isscalar(self.tau):
            tau = tuple(float(t) for t in self.tau)
            if len(tau) < self.j_max or any(t <= 0 for t in tau):
                raise ValueError("tau schedule must supply j_max positive values")
            object.__setattr__(self, "tau", tau)
        elif self.tau <= 0:
            raise ValueError("tau must be positive")

    @property
    def norm_kind(self) -> NormKind:
        # order-1 cuts pair with the max-norm LP, order-2 with the Euclidean ball
        return NormKind.MAX if self.q == 1 else NormKind.EUCLIDEAN

    def delta(self, j: int) -> float:
        if self.delta_schedule is not None:
            return self.delta_schedule[j - 1]
        return self.delta0 * self.delta_ratio ** (j - 1)

    def tau_at(self, j: int) -> float:
        if np.isscalar(self.tau):
            return float(self.tau)
        return self.tau[j - 1]


@dataclass(frozen=True)
class IterateRecord:
    j: int
    i: int
    x: Point
    f: float
    delta: float
    decrease_ratio: float
    gap: float
    bundle_size: int
    oracle_calls_cumulative: int
    accepted: bool
    dist_to_xstar: Optional[float]  # Euclidean, when the instance knows x*
    z_bar: Point
    f_z_bar: float
    max_feas_ratio: float


@dataclass(frozen=True)
class HandoffEntry:
    """Initialization data exported per level for local follow-up methods."""
    j: int
    x: Point
    delta: float
    f: float


@dataclass(frozen=True)
class SolveResult:
    config: RunConfig
    trace: List[IterateRecord]
    handoff: List[HandoffEntry]
    final: Point
    final_f: float
    oracle_calls: int


class DriverError(RuntimeError):
    """Solve aborted; carries the partial trace and handoff."""

    def __init__(self, message: str, trace: List[IterateRecord], handoff: List[HandoffEntry]):
        super().__init__(message)
        self.trace = trace
        self.handoff = handoff


def global_solve(oracle: OracleInterface, config: RunConfig,
                 x_star: Optional[Point] = None) -> SolveResult:
    """Run the full outer/inner loop.

    At level j the inner loop keeps stepping to the subproblem solution while
    the decrease test (f(x) - f(z_bar)) / delta_j^p >= tau_j holds; the first
    failing iterate closes the level and its center carries to level j+1.
    """
    x = as_point(config.x0)
    if x.size != oracle.dim:
        raise ValueError(f"x0 has dimension {x.size}, oracle expects {oracle.dim}")
    x_star = None if x_star is None else as_point(x_star)

    memory = PointMemory(config.memory_capacity)
    sample = oracle.query(x, config.q)
    calls = 1
    memory.push(sample)

    trace: List[IterateRecord] = []
    handoff: List[HandoffEntry] = []
    for j in range(1, config.j_max + 1):
        delta_j = config.delta(j)
        tau_j = config.tau_at(j)
        i = 0
        while True:
            if i > config.max_inner:
                raise DriverError(
                    f"inner loop at level {j} exceeded {config.max_inner} steps "
                    "(tau too small or objective unbounded below?)", trace, handoff)
            region = TrustRegion(x, delta_j, config.norm_kind)
            solver_seed = int(derive_rng(config.seed, 5, j, i).integers(2 ** 62))
            try:
                res: BuilderResult = compute_W(
                    oracle, sample, region, config.sigma, config.cap, memory,
                    max_iter=config.builder_max_iter, solver_seed=solver_seed)
            except BundleBuilderError as exc:
                calls += exc.best.oracle_calls
                raise DriverError(f"bundle builder failed at level {j}, step {i}: {exc}",
                                  trace, handoff) from exc
            calls += res.oracle_calls

            ratio = (sample.value - res.f_z_bar) / delta_j ** config.p
            accepted = ratio >= tau_j
            trace.append(IterateRecord(
                j=j, i=i, x=x.copy(), f=sample.value, delta=delta_j,
                decrease_ratio=ratio, gap=res.gap, bundle_size=len(res.bundle),
                oracle_calls_cumulative=calls, accepted=accepted,
                dist_to_xstar=None if x_star is None else norm(x - x_star),
                z_bar=res.z_bar.copy(), f_z_bar=res.f_z_bar,
                max_feas_ratio=res.max_feas_ratio,
            ))
            if not accepted:
                break
            x = res.z_bar
            sample = res.z_sample
            i += 1
        handoff.append(HandoffEntry(j=j, x=x.copy(), delta=delta_j, f=sample.value))

    return SolveResult(config=config, trace=trace, handoff=handoff,
                       final=x.copy(), final_f=sample.value, oracle_calls=calls)


@dataclass(frozen=True)
class LevelEnclosure:
    j: int
    delta: float
    dist: float          # distance in the run's trust-region norm
    dist_euclidean: float
    enclosed: bool       # x* inside the level's closed trust region


def enclosure_report(result: SolveResult, x_star: Point) -> List[LevelEnclosure]:
    """Per-level check whether the known minimizer sits in the final trust region."""
    x_star = as_point(x_star)
    out = []
    for entry in result.handoff:
        d_tr = norm(entry.x - x_star, result.config.norm_kind)
        d_eu = norm(entry.x - x_star, NormKind.EUCLIDEAN)
        out.append(LevelEnclosure(j=entry.j, delta=entry.delta, dist=d_tr,
                                  dist_euclidean=d_eu, enclosed=d_tr <= entry.delta))
    return out


def decrease_bound_certificates(result: SolveResult, k_hat: float) -> List[float]:
    """Per-level certified upper bound on the best-decrease ratio at the break:
    tau_j + delta_j^(q-p+sigma) + k_hat * delta_j^(q-p+1).
    """
    cfg = result.config
    out = []
    for entry in result.handoff:
        d = entry.delta
        out.append(cfg.tau_at(entry.j) + d ** (cfg.q - cfg.p + cfg.sigma)
                   + k_hat * d ** (cfg.q - cfg.p + 1))
    return out
