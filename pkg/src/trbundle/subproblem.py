"""Trust-region subproblem: minimize the bundle model over the region.

Two cases, mirroring how the method is run in practice:
  * order-1 cuts with a max-norm region -> an exact linear program,
  * order-2 cuts with a Euclidean region -> smoothed multi-start descent with
    a best-of-candidates guarantee (the model can be nonconvex).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .geometry import DEFAULT_TOL, NormKind, Point, TrustRegion, derive_rng
from .hull import min_norm_point
from .model import Bundle

_ACTIVE_TOL = 1e-8
_STAGE_MUS = (1e-1, 1e-2, 1e-3, 1e-4)
_STAGE_ITER_CAP = 60


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    MAX_ITER_FALLBACK = "max-iter-fallback"


@dataclass(frozen=True)
class SubproblemSolution:
    z_bar: Point
    theta: float
    status: SolveStatus
    kkt_residual: float
    active_cuts: tuple = field(default_factory=tuple)
    feas_ratio: float = 0.0  # ||z_bar - center|| / radius in the region norm


def _best_candidate(bundle: Bundle, region: TrustRegion, pool: np.ndarray):
    """Evaluate the true max-model on the pool; return the best row.

    The pool always contains the region center, so theta <= model(center)
    holds regardless of how well any descent stage converged.
    """
    pool = np.atleast_2d(pool)
    if region.kind is NormKind.EUCLIDEAN:
        pool = _project_rows(region, pool)
    else:
        pool = np.clip(pool, region.center - region.radius, region.center + region.radius)
    vals = bundle.cut_values(pool).max(axis=1)
    best = int(np.argmin(vals))
    return pool[best], float(vals[best])


def solve_linear(bundle: Bundle, region: TrustRegion) -> SubproblemSolution:
    """Exact LP solution of the order-1 model over a max-norm region."""
    if bundle.order != 1:
        raise ValueError("solve_linear requires an order-1 bundle")
    if region.kind is not NormKind.MAX:
        raise ValueError("solve_linear requires a max-norm trust region")

    n, K = bundle.dim, len(bundle)
    x, delta = region.center, region.radius
    c = np.zeros(n + 1)
    c[n] = 1.0
    A_ub = np.hstack([bundle.grads, -np.ones((K, 1))])
    b_ub = np.einsum("kn,kn->k", bundle.grads, bundle.bases) - bundle.values
    bounds = [(x[i] - delta, x[i] + delta) for i in range(n)] + [(None, None)]
    res = scipy.optimize.linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        # z = x with theta = model(x) is always feasible
        raise RuntimeError(f"internal error: trust-region LP failed ({res.message})")

    z_bar, theta = _best_candidate(bundle, region, np.vstack([res.x[:n], x]))

    lam = -np.asarray(res.ineqlin.marginals)          # >= 0 duals of the cuts
    mu_lo = np.asarray(res.lower.marginals)[:n]       # >= 0
    mu_up = -np.asarray(res.upper.marginals)[:n]      # >= 0
    stat_z = lam @ bundle.grads - mu_lo + mu_up
    slacks = b_ub - A_ub @ res.x
    kkt = max(
        float(np.max(np.abs(stat_z))) if n else 0.0,
        abs(1.0 - float(lam.sum())),
        float(np.max(-slacks, initial=0.0)),
        float(np.max(np.abs(lam * slacks), initial=0.0)),
    )
    active = tuple(int(k) for k in np.nonzero(lam > 1e-9)[0])
    return SubproblemSolution(
        z_bar=z_bar, theta=theta, status=SolveStatus.OPTIMAL, kkt_residual=kkt,
        active_cuts=active, feas_ratio=region.distance_from_center(z_bar) / delta,
    )


# ---------------------------------------------------------------------------
# order-2 path


def trs_exact(g: np.ndarray, H: np.ndarray, delta: float) -> np.ndarray:
    """Global minimizer w of g^T w + 0.5 w^T H w over ||w|| <= delta.

    Eigendecomposition plus the secular equation; handles the hard case.
    """
    n = g.size
    if n == 0:
        return np.zeros(0)
    evals, Q = np.linalg.eigh(H)
    gh = Q.T @ g
    lam_min = float(evals[0])
    lo = max(0.0, -lam_min)
    floor = 1e-13 * max(1.0, float(np.abs(evals).max()))
    deg = (evals + lo) <= floor
    gscale = max(1.0, float(np.linalg.norm(gh)))

    if not deg.any() or np.all(np.abs(gh[deg]) <= 1e-12 * gscale):
        shifted = evals + lo
        w = np.zeros(n)
        free = ~deg
        w[free] = -gh[free] / shifted[free]
        r = float(np.linalg.norm(w))
        if lo == 0.0 and r <= delta:
            return Q @ w  # interior Newton point
        if r <= delta and deg.any():
            # hard case: pad with the most negative-curvature eigendirection
            w[int(np.nonzero(deg)[0][0])] = np.sqrt(max(0.0, delta * delta - r * r))
            return Q @ w

    def inv_norm(lam):
        d = evals + lam
        d = np.where(np.abs(d) < 1e-300, 1e-300, d)
        return 1.0 / float(np.linalg.norm(gh / d))

    eps0 = 1e-12 * max(1.0, abs(lam_min))
    lo_eval = lo + eps0
    hi = max(lo + 1.0, float(np.linalg.norm(gh)) / delta - lam_min) + 1.0
    while inv_norm(hi) < 1.0 / delta:
        hi = 2.0 * hi + 1.0
    if inv_norm(lo_eval) >= 1.0 / delta:
        lam_star = lo_eval  # boundary multiplier is (numerically) at the floor
    else:
        lam_star = scipy.optimize.brentq(
            lambda lam: inv_norm(lam) - 1.0 / delta, lo_eval, hi, xtol=1e-15, rtol=8.9e-16
        )
    d = evals + lam_star
    d = np.where(np.abs(d) < 1e-300, 1e-300, d)
    w = -gh / d
    nw = float(np.linalg.norm(w))
    if nw > delta:
        w *= delta / nw
    return Q @ w


def _lse(bundle: Bundle, Z: np.ndarray, mu: float):
    """Log-sum-exp smoothing of the max-model: values and gradients per row."""
    T, G = bundle.cut_values_and_grads(Z)
    tmax = T.max(axis=1, keepdims=True)
    E = np.exp((T - tmax) / mu)
    S = E.sum(axis=1, keepdims=True)
    vals = tmax[:, 0] + mu * np.log(S[:, 0])
    grads = np.einsum("rk,rkn->rn", E / S, G)
    return vals, grads


def _project_rows(region: TrustRegion, Z: np.ndarray) -> np.ndarray:
    D = Z - region.center[None, :]
    r = np.linalg.norm(D, axis=1)
    factor = np.where(r > region.radius, region.radius / np.maximum(r, 1e-300), 1.0)
    return region.center[None, :] + D * factor[:, None]


def _exact_1d_candidates(bundle: Bundle, region: TrustRegion) -> np.ndarray:
    """All possible minimizers of a 1-d max-of-quadratics: cut vertices,
    pairwise crossings, and the interval endpoints."""
    x, delta = float(region.center[0]), region.radius
    y = bundle.bases[:, 0]
    g = bundle.grads[:, 0]
    h = bundle.hesses[:, 0, 0] if bundle.order == 2 else np.zeros_like(g)
    # cut k as a polynomial a2 z^2 + a1 z + a0
    a2 = 0.5 * h
    a1 = g - h * y
    a0 = bundle.values - g * y + 0.5 * h * y * y
    cands = [x - delta, x + delta]
    for k in range(len(y)):
        if abs(a2[k]) > 1e-300:
            cands.append(-a1[k] / (2.0 * a2[k]))
        for l in range(k + 1, len(y)):
            coeffs = np.array([a2[k] - a2[l], a1[k] - a1[l], a0[k] - a0[l]])
            lead = np.nonzero(np.abs(coeffs) > 1e-300)[0]
            if lead.size == 0 or lead[0] == 2:
                continue
            for root in np.roots(coeffs[lead[0]:]):
                if abs(root.imag) < 1e-12:
                    cands.append(float(root.real))
    cands = np.clip(np.array(cands, dtype=float), x - delta, x + delta)
    return cands[:, None]


_POLISH_EPS_LEVELS = (1e-12, 1e-9, 1e-6, 1e-3)


def _polish_on_max_model(bundle: Bundle, region: TrustRegion, z0: np.ndarray,
                         iters: int = 80) -> np.ndarray:
    """Descend the true max model from z0.

    The direction is the negated min-norm point of the gradients of the
    eps-active cuts (boundary-projected); the eps level persists across
    iterations and escalates only when the current level stops improving.
    Every trial step is projected back onto the ball and accepted only if
    the true model improves.
    """
    x, delta = region.center, region.radius
    z = region.project(z0)
    vals, grads = bundle.cut_values_and_grads(z[None, :])
    vals, grads = vals[0], grads[0]
    theta = float(vals.max())
    step_grid = delta * 0.5 ** np.arange(36)
    level = 0
    for _ in range(iters):
        scale = max(1.0, abs(theta))
        dist = float(np.linalg.norm(z - x))
        on_boundary = dist >= delta * (1.0 - 1e-12)
        moved = False
        while level < len(_POLISH_EPS_LEVELS):
            active = np.nonzero(vals >= theta - _POLISH_EPS_LEVELS[level] * scale)[0]
            g = min_norm_point(grads[active])
            if on_boundary:
                nhat = (z - x) / dist
                g = g + max(0.0, -float(g @ nhat)) * nhat
            gn = float(np.linalg.norm(g))
            if gn > 1e-15 * scale:
                trial = _project_rows(region, z[None, :] - (step_grid / gn)[:, None] * g[None, :])
                tv = bundle.cut_values(trial).max(axis=1)
                k = int(np.argmin(tv))
                if tv[k] < theta:
                    z = trial[k]
                    theta = float(tv[k])
                    vals, grads = bundle.cut_values_and_grads(z[None, :])
                    vals, grads = vals[0], grads[0]
                    moved = True
                    level = max(0, level - 1)
                    break
            level += 1
        if not moved:
            break
    return z


def _pg_stage(bundle: Bundle, region: TrustRegion, Z: np.ndarray, mu: float,
              tol_improve: float, iter_cap: int):
    """One smoothing stage: batched projected gradient with backtracking."""
    Z = Z.copy()
    vals, grads = _lse(bundle, Z, mu)
    gn = np.linalg.norm(grads, axis=1)
    steps = region.radius / np.maximum(gn, 1e-300)
    hit_cap = True
    for _ in range(iter_cap):
        moved = np.zeros(len(Z), dtype=bool)
        improve = np.zeros(len(Z))
        active = np.ones(len(Z), dtype=bool)
        for _bt in range(30):
            if not active.any():
                break
            trial = _project_rows(region, Z[active] - steps[active, None] * grads[active])
            tvals = bundle.cut_values(trial)
            tmax = tvals.max(axis=1, keepdims=True)
            tv = tmax[:, 0] + mu * np.log(np.exp((tvals - tmax) / mu).sum(axis=1))
            dd = ((trial - Z[active]) ** 2).sum(axis=1)
            ok = tv <= vals[active] - 1e-4 * dd / np.maximum(steps[active], 1e-300)
            idx = np.nonzero(active)[0]
            good = idx[ok]
            improve[good] = vals[good] - tv[ok]
            Z[good] = trial[ok]
            moved[good] = True
            steps[good] *= 1.3
            bad = idx[~ok]
            steps[bad] *= 0.5
            stalled = bad[dd[~ok] <= 1e-32]
            active_next = np.zeros_like(active)
            active_next[bad] = True
            active_next[stalled] = False
            active = active_next
        if not moved.any() or improve.max(initial=0.0) < tol_improve:
            hit_cap = False
            break
        vals, grads = _lse(bundle, Z, mu)
    return Z, hit_cap


def solve_quadratic(bundle: Bundle, region: TrustRegion, accuracy: float = 1e-9,
                    seed: int = 0) -> SubproblemSolution:
    """Approximate minimizer of the order-2 model over a Euclidean region.

    Smoothed (log-sum-exp) descent over an annealed temperature schedule,
    restarted from the center, every bundle base, and seeded boundary
    points; exact single-cut trust-region minimizers join the candidate
    pool, and the returned point is the best candidate under the true max
    model.
    """
    if bundle.order != 2:
        raise ValueError("solve_quadratic requires an order-2 bundle")
    if region.kind is not NormKind.EUCLIDEAN:
        raise ValueError("solve_quadratic requires a Euclidean trust region")

    x, delta, n = region.center, region.radius, bundle.dim
    rng = derive_rng(seed, 97)
    dirs = rng.standard_normal((4, n))
    dirs /= np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True), 1e-300)

    # exact per-cut ball minimizers: strong basin representatives that join
    # both the start set and the candidate pool
    trs_points = np.empty((len(bundle), n))
    for k in range(len(bundle)):
        Hk = bundle.hesses[k]
        gk = bundle.grads[k] + Hk @ (x - bundle.bases[k])
        trs_points[k] = x + trs_exact(gk, Hk, delta)

    start_blocks = [x[None, :], bundle.bases, x[None, :] + delta * dirs]
    lattice = None
    if 2 <= n <= 3:
        # low dimensions admit interior crease minima that gradient starts
        # miss; a coarse lattice of extra starts covers every delta-scale basin
        axes = np.meshgrid(*([np.linspace(-delta, delta, 7)] * n), indexing="ij")
        lattice = _project_rows(region, x[None, :] + np.stack([a.ravel() for a in axes], axis=1))
        start_blocks.append(lattice)
    if n > 1:
        # extra seeded interior/boundary points hedge against missed basins
        extra_dirs = rng.standard_normal((16, n))
        extra_dirs /= np.maximum(np.linalg.norm(extra_dirs, axis=1, keepdims=True), 1e-300)
        radii = delta * np.concatenate([rng.uniform(0, 1, 8) ** (1.0 / n), np.ones(8)])
        start_blocks.append(x[None, :] + extra_dirs * radii[:, None])
    starts = _project_rows(region, np.vstack(start_blocks))

    pool = [starts]
    if n == 1:
        pool.append(_exact_1d_candidates(bundle, region))

    hit_cap = False
    if len(bundle) > 1:
        T0 = bundle.cut_values(starts)
        scale = max(float(T0.max() - T0.min()), 1e-12)
        tol_floor = DEFAULT_TOL.sub_opt_tol_factor * accuracy
        Z = starts.copy()
        for mu in _STAGE_MUS:
            # a stage only needs accuracy at its own smoothing level; the
            # final polish supplies the precision
            tol_stage = max(tol_floor, 1e-4 * mu * scale)
            Z, capped = _pg_stage(bundle, region, Z, mu * scale, tol_stage, _STAGE_ITER_CAP)
            hit_cap = hit_cap or capped
            pool.append(Z.copy())

    pool.append(trs_points)
    flat = np.vstack(pool)
    if n > 1 and len(bundle) > 1:
        # polish the most promising pool candidates and per-cut minimizers on
        # the true max model. The center cut's own ball minimizer is always
        # polished: when a poorly extrapolated cut towers over the descent
        # region, max-model descent from there recovers the hidden basin.
        # Raw lattice points are polished too (the smoothing stages can drag
        # them out of narrow crease valleys before they rank well).
        vals = bundle.cut_values(_project_rows(region, flat)).max(axis=1)
        to_polish = [flat[k] for k in np.argsort(vals, kind="stable")[:8]]
        to_polish.append(trs_points[0])
        tvals = bundle.cut_values(trs_points).max(axis=1)
        to_polish.extend(trs_points[k] for k in np.argsort(tvals, kind="stable")[:4])
        if lattice is not None:
            to_polish.extend(lattice)
        unique = []
        for z0 in to_polish:
            if all(np.max(np.abs(z0 - u)) > 1e-9 * delta for u in unique):
                unique.append(z0)
        polished = [_polish_on_max_model(bundle, region, z0) for z0 in unique]
        flat = np.vstack([flat] + [p[None, :] for p in polished])
    z_bar, theta = _best_candidate(bundle, region, flat)

    cut_vals = bundle.cut_values_at(z_bar)
    active = np.nonzero(cut_vals >= theta - _ACTIVE_TOL * max(1.0, abs(theta)))[0]
    g_hat = min_norm_point(bundle.cut_grads(z_bar[None, :])[0][active])
    dist = float(np.linalg.norm(z_bar - x))
    if dist >= delta * (1.0 - 1e-9):
        nrm = (z_bar - x) / dist
        lam = max(0.0, -float(g_hat @ nrm))
        kkt = float(np.linalg.norm(g_hat + lam * nrm))
    else:
        kkt = float(np.linalg.norm(g_hat))

    return SubproblemSolution(
        z_bar=z_bar, theta=theta,
        status=SolveStatus.MAX_ITER_FALLBACK if hit_cap else SolveStatus.OPTIMAL,
        kkt_residual=kkt, active_cuts=tuple(int(k) for k in active),
        feas_ratio=dist / delta,
    )


def solve(bundle: Bundle, region: TrustRegion, accuracy: float = 1e-9,
          seed: int = 0) -> SubproblemSolution:
    """Dispatch on model order; rejects mismatched order/norm pairings."""
    if bundle.order == 1:
        return solve_linear(bundle, region)
    return solve_quadratic(bundle, region, accuracy=accuracy, seed=seed)
