import itertools

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from trbundle.geometry import derive_rng
from trbundle.hull import min_norm_point, min_norm_point_with_coefficients


def _simplex_lattice(k, g):
    """All weight vectors with entries i/g summing to one (stars and bars)."""
    out = []
    for bars in itertools.combinations(range(g + k - 1), k - 1):
        prev = -1
        comp = []
        for b in bars:
            comp.append(b - prev - 1)
            prev = b
        comp.append(g + k - 2 - prev)
        out.append(comp)
    return np.asarray(out, dtype=float) / g


def brute_force_min_norm(P):
    """Carathéodory enumeration with simplex-grid refinement (test oracle).

    The min-norm point lies in the hull of at most n+1 vectors; every such
    subset is scanned on a coarse barycentric lattice and the best few are
    refined by shrinking local lattices.
    """
    m, n = P.shape
    k = min(n + 1, m)
    coarse = _simplex_lattice(k, 8)
    scored = []
    for idx in itertools.combinations(range(m), k):
        V = P[list(idx)]
        pts = coarse @ V
        sq = np.einsum("ij,ij->i", pts, pts)
        j = int(np.argmin(sq))
        scored.append((float(sq[j]), idx, coarse[j]))
    scored.sort(key=lambda t: t[0])

    fine = _simplex_lattice(k, 12)
    best, best_sq = None, np.inf
    for _, idx, lam in scored[:40]:
        V = P[list(idx)]
        width = 1.0
        for _ in range(120):
            cand = (1.0 - width) * lam[None, :] + width * fine
            pts = cand @ V
            sq = np.einsum("ij,ij->i", pts, pts)
            j = int(np.argmin(sq))
            lam = cand[j]
            width *= 0.85
        x = lam @ V
        if float(x @ x) < best_sq:
            best, best_sq = x, float(x @ x)
    return best


def test_single_vector():
    v = np.array([[3.0, 4.0]])
    assert np.allclose(min_norm_point(v), [3.0, 4.0])


def test_opposite_signs_give_zero():
    assert abs(min_norm_point(np.array([[-1.0], [1.0]]))[0]) <= 1e-12


def test_twenty_random_vectors_r3_vs_brute_force():
    rng = derive_rng(0, 80)
    P = rng.standard_normal((20, 3)) + 0.4
    x = min_norm_point(P)
    xb = brute_force_min_norm(P)
    assert float(x @ x) <= float(xb @ xb) + 1e-6
    assert abs(float(x @ x) - float(xb @ xb)) <= 1e-6


def test_hull_membership_certificate():
    rng = derive_rng(1, 81)
    for _ in range(20):
        P = rng.standard_normal((rng.integers(1, 12), rng.integers(1, 5)))
        x, lam = min_norm_point_with_coefficients(P)
        assert lam.min() >= -1e-12
        assert abs(lam.sum() - 1.0) <= 1e-10
        assert np.linalg.norm(lam @ P - x) <= 1e-9


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_wolfe_optimality_criterion(seed):
    rng = derive_rng(seed, 82)
    P = rng.standard_normal((int(rng.integers(1, 10)), int(rng.integers(1, 6))))
    x = min_norm_point(P)
    scale = max(1.0, float(np.einsum("ij,ij->i", P, P).max()))
    # optimality: no vertex improves on x
    assert float((P @ x).min()) >= float(x @ x) - 1e-9 * scale


def test_empty_input_rejected():
    import pytest

    with pytest.raises(ValueError):
        min_norm_point(np.zeros((0, 3)))
