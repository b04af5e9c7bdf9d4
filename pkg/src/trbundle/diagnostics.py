"""Independent brute-force checkers for the theory-side quantities: the best
point of f inside a trust region, the best-decrease ratio, the positive-floor
probe around a minimizer, approximate-criticality certificates, and the
empirical Taylor-remainder envelope.

Everything here is deliberately separate from the solver path: grids and
sampling only, so these routines can serve as oracles in tests.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.optimize

from .builder import compute_W
from .geometry import NormKind, Point, TrustRegion, as_point, derive_rng
from .hull import min_norm_point, min_norm_point_with_coefficients  # noqa: F401  (re-export)
from .model import PointMemory
from .oracle import OracleInterface

min_norm_hull_point = min_norm_point  # canonical name of the op in this module


class EstimateMethod(enum.Enum):
    GRID_1D = "grid-1d"
    GRID_2D = "grid-2d"
    GRID_3D = "grid-3d"
    MULTISTART_POLISH = "multistart-polish"


_GRID_POINTS = {1: 1001, 2: 201, 3: 61}
_REFINE_ROUNDS = 18
_REFINE_POINTS = 41
_REFINE_SHRINK = 0.5  # slow shrink so the window can track curved valleys


def _lattice(center: np.ndarray, half_width: float, pts: int) -> np.ndarray:
    axes = [np.linspace(c - half_width, c + half_width, pts) for c in center]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)  # C order: lexicographic ties


def grid_minimize(fun_batch: Callable[[np.ndarray], np.ndarray], region: TrustRegion,
                  points_per_axis: int, refine_rounds: int = _REFINE_ROUNDS) -> Tuple[np.ndarray, float]:
    """Dense lattice over the region plus shrinking local refinement.

    ``fun_batch`` maps an (rows, dim) array to per-row values. The region
    center is always a candidate and ties go to the lexicographically
    smallest lattice index, so the result is deterministic.
    """
    center, radius = region.center, region.radius

    def admissible(P):
        if region.kind is NormKind.EUCLIDEAN:
            keep = np.linalg.norm(P - center[None, :], axis=1) <= radius * (1 + 1e-12)
            return P[keep]
        return np.clip(P, center - radius, center + radius)

    def best_of(P, incumbent, inc_val):
        P = np.vstack([incumbent[None, :], P])
        vals = fun_batch(P)
        k = int(np.argmin(vals))
        if vals[k] < inc_val:
            return P[k], float(vals[k])
        return incumbent, inc_val

    x_best, f_best = best_of(admissible(_lattice(center, radius, points_per_axis)),
                             center.copy(), float(fun_batch(center[None, :])[0]))
    hw = radius
    for _ in range(refine_rounds):
        hw *= _REFINE_SHRINK
        x_best, f_best = best_of(admissible(_lattice(x_best, hw, _REFINE_POINTS)),
                                 x_best, f_best)

    # derivative-free local polish (applied to the projected argument, so the
    # ball constraint is respected); simplex search tracks curved valleys the
    # shrinking windows cannot, and restarts guard against premature collapse
    for _ in range(3):
        res = scipy.optimize.minimize(
            lambda z: float(fun_batch(region.project(z)[None, :])[0]), x_best,
            method="Nelder-Mead",
            options={"xatol": 1e-13, "fatol": 1e-15, "maxiter": 4000, "maxfev": 8000})
        if res.fun >= f_best - 1e-14 * max(1.0, abs(f_best)):
            if res.fun < f_best:
                x_best, f_best = region.project(res.x), float(res.fun)
            break
        x_best, f_best = region.project(res.x), float(res.fun)
    return x_best, f_best


def _pattern_search(fun_batch, region: TrustRegion, starts: np.ndarray,
                    rounds: int = 80) -> Tuple[np.ndarray, float]:
    """Synchronized coordinate pattern search from many starts (heuristic)."""
    n = region.dim
    Z = starts.copy()
    vals = fun_batch(Z)
    h = region.radius / 4.0
    for _ in range(rounds):
        improved = False
        for i in range(n):
            for sgn in (1.0, -1.0):
                trial = Z.copy()
                trial[:, i] += sgn * h
                trial = np.vstack([region.project(t) for t in trial])
                tv = fun_batch(trial)
                better = tv < vals
                Z[better] = trial[better]
                vals[better] = tv[better]
                improved = improved or bool(better.any())
        if not improved:
            h *= 0.5
            if h < 1e-12 * region.radius:
                break
    k = int(np.argmin(vals))
    return Z[k], float(vals[k])


def _z_star(oracle: OracleInterface, region: TrustRegion,
            method: Optional[EstimateMethod] = None) -> Tuple[np.ndarray, EstimateMethod]:
    n = region.dim
    if method is None:
        method = {1: EstimateMethod.GRID_1D, 2: EstimateMethod.GRID_2D,
                  3: EstimateMethod.GRID_3D}.get(n, EstimateMethod.MULTISTART_POLISH)
    if method is EstimateMethod.MULTISTART_POLISH:
        rng = derive_rng(0, 23)
        dirs = rng.standard_normal((32, n))
        dirs /= np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True), 1e-300)
        radii = region.radius * rng.uniform(0, 1, 32) ** (1.0 / n)
        starts = np.vstack([region.center[None, :], region.center + dirs * radii[:, None]])
        z, _ = _pattern_search(oracle.eval_values, region, starts)
        return z, method
    if n > 3:
        raise ValueError("grid search supports dimension <= 3; use the multistart heuristic")
    z, _ = grid_minimize(oracle.eval_values, region, _GRID_POINTS[n])
    return z, method


def z_star_oracle(oracle: OracleInterface, region: TrustRegion,
                  method: Optional[EstimateMethod] = None) -> np.ndarray:
    """Brute-force (approximate) minimizer of f over the trust region."""
    return _z_star(oracle, region, method)[0]


@dataclass(frozen=True)
class LambdaEstimate:
    x: Point
    delta: float
    p: int
    z_star: Point
    lambda_value: float
    method: EstimateMethod


def lambda_p(oracle: OracleInterface, x: Point, delta: float, p: int,
             kind: NormKind = NormKind.EUCLIDEAN,
             method: Optional[EstimateMethod] = None) -> LambdaEstimate:
    """Best-decrease ratio (f(x) - min_ball f) / delta^p, by brute force."""
    x = as_point(x)
    region = TrustRegion(x, delta, kind)
    z, used = _z_star(oracle, region, method)
    val = (oracle.eval_value(x) - oracle.eval_value(z)) / delta ** p
    return LambdaEstimate(x=x, delta=float(delta), p=int(p), z_star=z,
                          lambda_value=float(val), method=used)


# ---------------------------------------------------------------------------
# positive-floor probe around a known minimizer


@dataclass(frozen=True)
class ProbeWitness:
    x: Point
    delta: float
    lambda_value: float


def _local_minima_1d(oracle: OracleInterface, x_star: float, box_radius: float) -> List[float]:
    """Local minima of f on (x*, x* + box], located by derivative sign changes.

    A lattice scan finds brackets where the sampled branch derivative flips
    from negative to positive; bisection then pins each minimum to machine
    precision.
    """
    t = x_star + np.linspace(box_radius / 4096.0, box_radius, 4096)
    fp = np.array([oracle.query(np.array([v]), 1).grad[0] for v in t])
    brackets = np.nonzero((fp[:-1] < 0) & (fp[1:] > 0))[0]
    out = []
    for i in brackets[-16:]:
        lo, hi = t[i], t[i + 1]
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if oracle.query(np.array([mid]), 1).grad[0] < 0:
                lo = mid
            else:
                hi = mid
        out.append(0.5 * (lo + hi))
    return out


def property_p_probe(oracle: OracleInterface, x_star: Point, p: int, box_radius: float,
                     num_samples: int, seed: int = 0,
                     keep_all: bool = False) -> Tuple[float, List[ProbeWitness]]:
    """Empirical infimum of the best-decrease ratio near x* with x* outside the ball.

    Samples (x, delta) with x in the box around x* and delta log-uniform in
    (1e-6 r, r), r = ||x - x*||, so the minimizer never lies inside the
    region. For 1-d objectives the samples are augmented with located local
    minima, where the ratio collapses to zero whenever such minima exist.
    """
    x_star = as_point(x_star)
    n = x_star.size
    if oracle.dim != n:
        raise ValueError("x_star dimension mismatch")
    if n > 2:
        raise ValueError("exact probing supports dimension <= 2")
    rng = derive_rng(seed, 11)

    candidates: List[Tuple[np.ndarray, float]] = []
    for _ in range(num_samples):
        x = x_star + rng.uniform(-box_radius, box_radius, n)
        r = float(np.linalg.norm(x - x_star))
        if r == 0.0:
            continue
        delta = r * 10.0 ** (-6.0 * rng.uniform(1e-9, 1.0))
        candidates.append((x, delta))
    if n == 1:
        # a descending radius ladder per located minimum: once the ball fits
        # inside the basin, the best-decrease ratio collapses to zero
        for xhat in _local_minima_1d(oracle, float(x_star[0]), box_radius):
            r = abs(xhat - float(x_star[0]))
            if r > 0:
                for frac in (0.5, 0.1, 0.02, 4e-3, 8e-4, 1.6e-4, 3.2e-5, 6.4e-6):
                    candidates.append((np.array([xhat]), frac * r))

    witnesses = []
    for x, delta in candidates:
        est = lambda_p(oracle, x, delta, p)
        witnesses.append(ProbeWitness(x=est.x, delta=delta, lambda_value=est.lambda_value))
    witnesses.sort(key=lambda w: w.lambda_value)
    inf_val = witnesses[0].lambda_value if witnesses else float("inf")
    return inf_val, (witnesses if keep_all else witnesses[:5])


# ---------------------------------------------------------------------------
# approximate criticality via sampled branch gradients


def criticality_certificate(oracle: OracleInterface, x: Point, epsilon: float,
                            num_samples: int = 200, seed: int = 0) -> float:
    """Norm of the min-norm point of sampled branch gradients over the eps-ball.

    An inner approximation of the smallest-norm element of the Goldstein
    eps-subdifferential; small values certify approximate criticality.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    x = as_point(x)
    n = x.size
    rng = derive_rng(seed, 13)
    dirs = rng.standard_normal((num_samples, n))
    dirs /= np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True), 1e-300)
    radii = epsilon * rng.uniform(0, 1, num_samples) ** (1.0 / n)
    pts = np.vstack([x[None, :], x + dirs * radii[:, None]])
    grads = np.stack([oracle.query(pt, 1).grad for pt in pts])
    return float(np.linalg.norm(min_norm_point(grads)))


# ---------------------------------------------------------------------------
# empirical Taylor-remainder envelope


@dataclass(frozen=True)
class RemainderEstimate:
    k_hat: float
    slope: float
    per_delta_max: List[float]
    value_proxy: bool  # True when branch values were unavailable (f - model used)


def remainder_constant_estimator(oracle: OracleInterface, x: Point, deltas: Sequence[float],
                                 samples_per_delta: int, q: int, sigma: float = 0.5,
                                 cap: float = 0.1, seed: int = 0) -> RemainderEstimate:
    """Envelope constant and log-log slope of the model error over shrinking radii.

    For each radius a bundle is built by the enrichment loop, the gap between
    the sampled-branch max and the model is sampled over the region, and the
    per-radius maxima are fitted against radius on a log-log scale.
    """
    deltas = [float(d) for d in deltas]
    if len(deltas) < 4 or any(d2 >= d1 for d1, d2 in zip(deltas, deltas[1:])):
        raise ValueError("need at least 4 strictly decreasing radii")
    x = as_point(x)
    kind = NormKind.MAX if q == 1 else NormKind.EUCLIDEAN
    rng = derive_rng(seed, 17)

    proxy = False
    maxima: List[float] = []
    for delta in deltas:
        region = TrustRegion(x, delta, kind)
        center = oracle.query(x, q)
        result = compute_W(oracle, center, region, sigma, cap,
                           memory=PointMemory(0), solver_seed=seed)
        bundle = result.bundle

        if kind is NormKind.MAX:
            Z = x[None, :] + rng.uniform(-delta, delta, (samples_per_delta, x.size))
        else:
            dirs = rng.standard_normal((samples_per_delta, x.size))
            dirs /= np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True), 1e-300)
            radii = delta * rng.uniform(0, 1, samples_per_delta) ** (1.0 / x.size)
            Z = x[None, :] + dirs * radii[:, None]
        Z = np.vstack([Z, bundle.bases])

        model_vals = bundle.cut_values(Z).max(axis=1)
        tags = sorted({s.selector_tag for s in bundle.samples})
        try:
            branch_vals = np.stack([
                np.array([oracle.branch_value(tag, z) for z in Z]) for tag in tags
            ]).max(axis=0)
            errs = np.abs(branch_vals - model_vals)
        except NotImplementedError:
            proxy = True
            errs = np.maximum(oracle.eval_values(Z) - model_vals, 0.0)
        maxima.append(float(errs.max()))

    powered = [m / d ** (q + 1) for m, d in zip(maxima, deltas)]
    k_hat = max(powered)
    f_scale = max(1.0, abs(oracle.eval_value(x)))
    positive = [(d, m) for d, m in zip(deltas, maxima) if m > 1e-12 * f_scale]
    if len(positive) >= 2:
        ld = np.log([d for d, _ in positive])
        lm = np.log([m for _, m in positive])
        slope = float(np.polyfit(ld, lm, 1)[0])
    else:
        slope = float("nan")  # gaps at machine precision: order unresolvable
    return RemainderEstimate(k_hat=float(k_hat), slope=slope,
                             per_delta_max=maxima, value_proxy=proxy)
