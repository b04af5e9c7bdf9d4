import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trbundle.geometry import NormKind, Tolerances, TrustRegion, as_point, derive_rng, norm

finite_vectors = st.lists(
    st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False), min_size=1, max_size=8
).map(np.array)


def test_norm_examples():
    assert norm(np.array([3.0, 4.0]), NormKind.EUCLIDEAN) == 5.0
    assert norm(np.array([3.0, 4.0]), NormKind.MAX) == 4.0
    assert norm(np.zeros(7), NormKind.EUCLIDEAN) == 0.0
    assert norm(np.zeros(7), NormKind.MAX) == 0.0


def test_norm_rejects_non_finite():
    with pytest.raises(ValueError):
        norm(np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        norm(np.array([np.inf]))


@given(finite_vectors)
@settings(max_examples=50, deadline=None)
def test_norm_equivalence_bounds(v):
    e = norm(v, NormKind.EUCLIDEAN)
    m = norm(v, NormKind.MAX)
    assert m <= e + 1e-12
    assert e <= np.sqrt(v.size) * m + 1e-12


def test_as_point_validation():
    p = as_point([1, 2, 3])
    assert p.dtype == np.float64
    with pytest.raises(ValueError):
        as_point([[1.0, 2.0]])
    with pytest.raises(ValueError):
        as_point([np.nan])


def test_trust_region_membership_slack():
    tr = TrustRegion([0.0, 0.0], 1.0, NormKind.EUCLIDEAN)
    assert tr.contains(np.array([1.0, 0.0]))
    # within the relative slack
    assert tr.contains(np.array([1.0 + 5e-10, 0.0]))
    assert not tr.contains(np.array([1.0 + 1e-8, 0.0]))


def test_trust_region_max_norm():
    tr = TrustRegion([1.0, -1.0], 0.5, NormKind.MAX)
    assert tr.contains(np.array([1.5, -0.5]))
    assert not tr.contains(np.array([1.6, -1.0]))


def test_trust_region_purity():
    tr = TrustRegion([0.3], 0.2, NormKind.MAX)
    z = np.array([0.45])
    first = tr.contains(z)
    assert all(tr.contains(z) == first for _ in range(3))


def test_trust_region_project():
    tr = TrustRegion([0.0, 0.0], 1.0, NormKind.EUCLIDEAN)
    z = tr.project(np.array([3.0, 4.0]))
    assert np.allclose(z, [0.6, 0.8])
    trm = TrustRegion([0.0, 0.0], 1.0, NormKind.MAX)
    assert np.allclose(trm.project(np.array([3.0, -0.5])), [1.0, -0.5])


def test_trust_region_rejects_bad_radius():
    with pytest.raises(ValueError):
        TrustRegion([0.0], 0.0)
    with pytest.raises(ValueError):
        TrustRegion([0.0], -1.0)


def test_tolerances_validation():
    with pytest.raises(ValueError):
        Tolerances(sub_opt_tol_factor=1.5)
    with pytest.raises(ValueError):
        Tolerances(feas_tol=0.0)


def test_derive_rng_is_deterministic_and_keyed():
    a = derive_rng(42, 1, 2).standard_normal(4)
    b = derive_rng(42, 1, 2).standard_normal(4)
    c = derive_rng(42, 1, 3).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
