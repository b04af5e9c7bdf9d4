import numpy as np
import pytest
import scipy.optimize
from hypothesis import given, settings
from hypothesis import strategies as st

from trbundle.diagnostics import grid_minimize
from trbundle.geometry import NormKind, TrustRegion, derive_rng
from trbundle.model import Bundle, model_eval
from trbundle.oracle import OracleSample
from trbundle.subproblem import SolveStatus, solve, solve_linear, solve_quadratic, trs_exact


def model_grid_oracle(bundle, region, pts=201):
    """Independent subproblem oracle: dense grid plus an NLP polish.

    The polish solves the epigraph form (min theta s.t. every cut <= theta,
    point in the ball) with a sequential-quadratic-programming step from the
    grid incumbent; infeasible or non-improving polish results are discarded.
    """
    mv = lambda Z: bundle.cut_values(Z).max(axis=1)
    zg, fg = grid_minimize(mv, region, pts)
    n = bundle.dim
    x, delta = region.center, region.radius

    cons = []
    for k in range(len(bundle)):
        cons.append({
            "type": "ineq",
            "fun": lambda w, k=k: w[n] - float(bundle.cut_values(w[None, :n])[0, k]),
            "jac": lambda w, k=k: np.append(-bundle.cut_grads(w[None, :n])[0, k], 1.0),
        })
    if region.kind is NormKind.EUCLIDEAN:
        cons.append({
            "type": "ineq",
            "fun": lambda w: delta ** 2 - float((w[:n] - x) @ (w[:n] - x)),
            "jac": lambda w: np.append(-2.0 * (w[:n] - x), 0.0),
        })
        bounds = None
    else:
        bounds = [(x[i] - delta, x[i] + delta) for i in range(n)] + [(None, None)]

    res = scipy.optimize.minimize(
        lambda w: w[n], np.append(zg, fg), jac=lambda w: np.append(np.zeros(n), 1.0),
        method="SLSQP", constraints=cons, bounds=bounds,
        options={"maxiter": 300, "ftol": 1e-16})
    z = res.x[:n]
    if region.contains(z):
        val = float(mv(z[None, :])[0])
        if val < fg:
            return z, val
    return zg, fg


def cut1(base, value, grad):
    return OracleSample(base=[base], value=value, grad=[grad], hess=None, order=1)


def cut2(base, value, grad, hess):
    base = np.atleast_1d(np.asarray(base, dtype=float))
    return OracleSample(base=base, value=value, grad=np.atleast_1d(grad),
                        hess=np.atleast_2d(hess), order=2)


def random_bundle(rng, n, order, kind, delta=None):
    x = rng.standard_normal(n)
    delta = delta or rng.uniform(0.3, 1.5)
    region = TrustRegion(x, delta, kind)
    samples = []
    for _ in range(int(rng.integers(1, 7))):
        base = region.project(x + rng.uniform(-delta, delta, n))
        if order == 1:
            samples.append(OracleSample(base=base, value=float(rng.standard_normal()),
                                        grad=rng.standard_normal(n), hess=None, order=1))
        else:
            M = rng.standard_normal((n, n))
            samples.append(OracleSample(base=base, value=float(rng.standard_normal()),
                                        grad=rng.standard_normal(n), hess=M + M.T, order=2))
    bundle = Bundle([s for i, s in enumerate(samples)
                     if all(np.max(np.abs(s.base - t.base)) > 1e-14 for t in samples[:i])], region)
    return bundle, region


# ---------------------------------------------------------------------------
# order-1 LP


def test_lp_single_cut_steepest_point():
    region = TrustRegion([0.0], 0.5, NormKind.MAX)
    b = Bundle([cut1(0.0, 0.0, 2.0)], region)
    sol = solve_linear(b, region)
    assert sol.z_bar[0] == pytest.approx(-0.5, abs=1e-12)
    assert sol.theta == pytest.approx(-1.0, abs=1e-12)
    assert sol.kkt_residual <= 1e-9
    assert sol.active_cuts == (0,)


def test_lp_abs_model_min_at_kink():
    # cuts at +-1 build the model |z|; solving over [-0.5, 0.5] pins zero
    big = TrustRegion([0.0], 2.0, NormKind.MAX)
    b = Bundle([cut1(1.0, 1.0, 1.0), cut1(-1.0, 1.0, -1.0)], big)
    region = TrustRegion([0.0], 0.5, NormKind.MAX)
    sol = solve_linear(b, region)
    assert abs(sol.z_bar[0]) <= 1e-12
    assert sol.theta == pytest.approx(0.0, abs=1e-12)


def test_lp_matches_grid_oracle_2d():
    rng = derive_rng(7, 50)
    b, region = random_bundle(rng, 2, 1, NormKind.MAX, delta=0.8)
    sol = solve_linear(b, region)
    _, fg = model_grid_oracle(b, region)
    assert abs(sol.theta - fg) <= 1e-6


def test_lp_complementary_slackness():
    for seed in range(10):
        rng = derive_rng(seed, 51)
        b, region = random_bundle(rng, 3, 1, NormKind.MAX)
        sol = solve_linear(b, region)
        assert sol.kkt_residual <= 1e-9
        vals = b.cut_values_at(sol.z_bar)
        for k in sol.active_cuts:
            assert vals[k] >= sol.theta - 1e-8


def test_lp_rejects_wrong_inputs():
    region_e = TrustRegion([0.0], 1.0, NormKind.EUCLIDEAN)
    region_m = TrustRegion([0.0], 1.0, NormKind.MAX)
    b1 = Bundle([cut1(0.0, 0.0, 1.0)], region_m)
    with pytest.raises(ValueError):
        solve_linear(b1, region_e)  # Euclidean norm with order-1 cuts
    b2 = Bundle([cut2(0.0, 0.0, 0.0, 2.0)], region_e)
    with pytest.raises(ValueError):
        solve_linear(b2, region_m)  # order-2 cuts in the LP path
    with pytest.raises(ValueError):
        solve_quadratic(b2, region_m)  # max-norm with order-2 cuts
    with pytest.raises(ValueError):
        solve_quadratic(b1, region_e)  # order-1 cuts in the smooth path


# ---------------------------------------------------------------------------
# exact single-cut solver


def test_trs_interior_newton_point():
    g = np.array([1.0, -2.0])
    H = np.diag([2.0, 4.0])
    w = trs_exact(g, H, 10.0)
    assert np.allclose(w, np.linalg.solve(H, -g), atol=1e-10)


def test_trs_boundary_and_hard_case():
    w = trs_exact(np.array([2.0]), np.array([[2.0]]), 0.5)
    assert w[0] == pytest.approx(-0.5, abs=1e-12)
    w = trs_exact(np.array([0.0]), np.array([[-2.0]]), 1.0)
    assert abs(w[0]) == pytest.approx(1.0, abs=1e-12)


def test_trs_against_polar_grid():
    for seed in range(25):
        rng = derive_rng(seed, 52)
        g = rng.standard_normal(2)
        M = rng.standard_normal((2, 2))
        H = M + M.T
        delta = float(rng.uniform(0.1, 2.0))
        w = trs_exact(g, H, delta)
        assert np.linalg.norm(w) <= delta * (1 + 1e-9)
        th = np.linspace(0, 2 * np.pi, 721)[:-1]
        rr = np.linspace(0, delta, 301)
        RR, TT = np.meshgrid(rr, th)
        X, Y = RR * np.cos(TT), RR * np.sin(TT)
        V = g[0] * X + g[1] * Y + 0.5 * (H[0, 0] * X * X + 2 * H[0, 1] * X * Y + H[1, 1] * Y * Y)
        q = float(g @ w + 0.5 * w @ H @ w)
        assert q <= V.min() + 1e-6


# ---------------------------------------------------------------------------
# order-2 smoothed multi-start


def test_quadratic_single_convex_cut_newton():
    region = TrustRegion([0.0, 0.0], 10.0, NormKind.EUCLIDEAN)
    b = Bundle([cut2([0.0, 0.0], 1.0, [1.0, -2.0], np.diag([2.0, 4.0]))], region)
    sol = solve_quadratic(b, region)
    zn = np.linalg.solve(np.diag([2.0, 4.0]), -np.array([1.0, -2.0]))
    assert np.linalg.norm(sol.z_bar - zn) <= 1e-8
    assert sol.theta == pytest.approx(1.0 + float(np.array([1.0, -2.0]) @ zn) / 2.0, abs=1e-8)
    assert sol.kkt_residual <= 1e-8


def test_quadratic_indefinite_boundary():
    region = TrustRegion([0.0], 1.0, NormKind.EUCLIDEAN)
    b = Bundle([cut2(0.0, 0.0, 0.0, -2.0)], region)
    sol = solve_quadratic(b, region)
    assert abs(sol.z_bar[0]) == pytest.approx(1.0, abs=1e-10)
    assert sol.theta == pytest.approx(-1.0, abs=1e-10)


def test_quadratic_matches_grid_oracle_quick():
    for seed in range(10):
        rng = derive_rng(seed, 53)
        b, region = random_bundle(rng, 2, 2, NormKind.EUCLIDEAN)
        sol = solve_quadratic(b, region, accuracy=1e-9, seed=seed)
        _, fg = model_grid_oracle(b, region)
        assert abs(sol.theta - fg) <= 1e-6
        assert sol.status in (SolveStatus.OPTIMAL, SolveStatus.MAX_ITER_FALLBACK)


@given(st.integers(0, 100_000))
@settings(max_examples=25, deadline=None)
def test_solver_contract_properties(seed):
    rng = derive_rng(seed, 54)
    order = int(rng.integers(1, 3))
    kind = NormKind.MAX if order == 1 else NormKind.EUCLIDEAN
    n = int(rng.integers(1, 4))
    b, region = random_bundle(rng, n, order, kind)
    sol = solve(b, region, accuracy=1e-9, seed=seed)
    # feasibility with relative slack
    assert sol.feas_ratio <= 1.0 + 1e-9
    assert region.contains(sol.z_bar)
    # monotone safety: never worse than the center
    center_val, _ = model_eval(b, region.center)
    assert sol.theta <= center_val + 1e-12
    # theta is the model value at the returned point
    assert sol.theta == pytest.approx(model_eval(b, sol.z_bar)[0], abs=1e-10)
