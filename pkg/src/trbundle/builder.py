"""Bundle enrichment loop: grow the cut collection at a fixed center and
radius until the oracle-vs-model gap at the subproblem solution drops below
min(radius^(order+sigma), cap).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .geometry import Point, TrustRegion
from .model import Bundle, PointMemory, seed_bundle
from .oracle import OracleInterface, OracleSample
from .subproblem import SolveStatus, solve

DEFAULT_MAX_ITER = 200


@dataclass(frozen=True)
class BuilderResult:
    bundle: Bundle
    z_sample: OracleSample  # oracle sample at the returned subproblem solution
    theta: float            # model value at z_bar from the final solve
    gap: float              # f(z_bar) - theta
    iterations: int
    oracle_calls: int
    fallback_solves: int    # subproblem solves that hit their iteration caps
    max_feas_ratio: float   # worst ||z_bar - x|| / radius seen across solves

    @property
    def z_bar(self) -> Point:
        return self.z_sample.base

    @property
    def f_z_bar(self) -> float:
        return self.z_sample.value


class BundleBuilderError(RuntimeError):
    """Iteration cap exceeded; carries the best result seen so far."""

    def __init__(self, message: str, best: BuilderResult):
        super().__init__(message)
        self.best = best


def stopping_threshold(radius: float, order: int, sigma: float, cap: float) -> float:
    return min(radius ** (order + sigma), cap)


def compute_W(oracle: OracleInterface, center_sample: OracleSample, region: TrustRegion,
              sigma: float, cap: float, memory: Optional[PointMemory] = None,
              max_iter: int = DEFAULT_MAX_ITER, solver_seed: int = 0) -> BuilderResult:
    """Iteratively enrich the bundle until the model gap test passes.

    Each pass solves the trust-region subproblem on the current bundle,
    queries the oracle once at the solution (pushing it to the memory), and
    either stops or inserts the new sample as a cut.
    """
    if not 0.0 < sigma < 1.0:
        raise ValueError("sigma must lie in (0, 1)")
    if cap <= 0.0:
        raise ValueError("cap must be positive")

    order = center_sample.order
    threshold = stopping_threshold(region.radius, order, sigma, cap)
    bundle = seed_bundle(memory, center_sample, region)

    best: Optional[BuilderResult] = None
    fallback = 0
    max_feas = 0.0
    for it in range(1, max_iter + 1):
        sol = solve(bundle, region, accuracy=threshold, seed=solver_seed + it)
        if sol.status is SolveStatus.MAX_ITER_FALLBACK:
            fallback += 1  # gap test below is still sound; proceed
        max_feas = max(max_feas, sol.feas_ratio)

        z_sample = oracle.query(sol.z_bar, order)
        if memory is not None:
            memory.push(z_sample)
        gap = z_sample.value - sol.theta

        result = BuilderResult(
            bundle=bundle, z_sample=z_sample, theta=sol.theta, gap=gap,
            iterations=it, oracle_calls=it, fallback_solves=fallback,
            max_feas_ratio=max_feas,
        )
        if best is None or result.gap < best.gap:
            best = result
        if gap <= threshold:
            return result
        if bundle.has_base(z_sample.base):
            raise BundleBuilderError(
                "subproblem returned an already-bundled point with the gap test "
                "unmet; the subproblem solve is not accurate enough", best)
        bundle = bundle.extended(z_sample)

    raise BundleBuilderError(
        f"bundle builder exceeded {max_iter} iterations "
        f"(gap {best.gap:.3e} vs threshold {threshold:.3e})", best)
