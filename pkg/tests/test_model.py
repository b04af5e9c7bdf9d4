import numpy as np
import pytest

from trbundle.geometry import NormKind, TrustRegion, derive_rng
from trbundle.model import Bundle, PointMemory, model_eval, model_gap, seed_bundle
from trbundle.oracle import OracleSample, taylor_eval
from trbundle.problems import Family, generate, oracle_of


def abs_cut(base, order=1):
    s = 1.0 if base >= 0 else -1.0
    hess = np.array([[0.0]]) if order == 2 else None
    return OracleSample(base=[base], value=abs(base), grad=[s], hess=hess, order=order,
                        selector_tag=int(s))


def test_singleton_model_is_taylor():
    s = abs_cut(1.0)
    region = TrustRegion([0.0], 2.0, NormKind.MAX)
    b = Bundle([s], region)
    z = np.array([-0.7])
    val, idx = model_eval(b, z)
    assert idx == 0
    assert val == pytest.approx(taylor_eval(s, z), abs=1e-15)


def test_abs_two_cuts_model_is_abs():
    region = TrustRegion([0.0], 2.0, NormKind.MAX)
    b = Bundle([abs_cut(-1.0), abs_cut(1.0)], region)
    for z in (-1.5, -0.3, 0.0, 0.4, 1.9):
        val, _ = model_eval(b, np.array([z]))
        assert val == pytest.approx(abs(z), abs=1e-15)


def test_model_majorizes_f_at_bundle_points(abs_oracle):
    region = TrustRegion([0.0], 2.0, NormKind.MAX)
    b = Bundle([abs_cut(-1.0), abs_cut(0.5), abs_cut(1.5)], region)
    for s in b.samples:
        val, _ = model_eval(b, s.base)
        assert val >= s.value - 1e-15
        assert model_gap(b, abs_oracle, s.base) <= 1e-15


def test_model_gap_on_quartic_bundle_points():
    inst = generate(Family.MAX_QUARTIC, n=3, m=4, seed=1)
    o = oracle_of(inst)
    rng = derive_rng(1, 60)
    x = rng.standard_normal(3)
    region = TrustRegion(x, 0.5, NormKind.EUCLIDEAN)
    samples = [o.query(region.project(x + rng.uniform(-0.5, 0.5, 3)), 2) for _ in range(5)]
    samples.insert(0, o.query(x, 2))
    b = Bundle(samples, region)
    for s in b.samples:
        assert model_gap(b, o, s.base) <= 1e-12


def test_model_gap_zero_for_smooth_quadratic():
    o = oracle_of(generate(Family.TOY_QUADRATIC, n=1))
    region = TrustRegion([0.3], 1.0, NormKind.EUCLIDEAN)
    b = Bundle([o.query(np.array([0.3]), 2)], region)
    for z in (-0.5, 0.0, 0.9):
        assert abs(model_gap(b, o, np.array([z]))) <= 1e-14


def test_model_gap_abs_single_cut(abs_oracle):
    # single cut at +1: model is the line z, so the gap at -0.5 is 1.0
    region = TrustRegion([0.5], 1.5, NormKind.MAX)
    b = Bundle([abs_cut(1.0)], region)
    assert model_gap(b, abs_oracle, np.array([-0.5])) == pytest.approx(1.0, abs=1e-15)


def test_adding_positive_gap_point_raises_model_there(abs_oracle):
    region = TrustRegion([0.0], 2.0, NormKind.MAX)
    b = Bundle([abs_cut(1.0)], region)
    z = np.array([-0.5])
    before, _ = model_eval(b, z)
    assert model_gap(b, abs_oracle, z) > 0
    b2 = b.extended(abs_oracle.query(z, 1))
    after, _ = model_eval(b2, z)
    assert after > before
    assert len(b) == 1  # value semantics: original untouched


def test_bundle_invariants():
    region = TrustRegion([0.0], 1.0, NormKind.MAX)
    with pytest.raises(ValueError):
        Bundle([], region)
    with pytest.raises(ValueError):  # outside the region
        Bundle([abs_cut(2.0)], region)
    with pytest.raises(ValueError):  # duplicates
        Bundle([abs_cut(0.5), abs_cut(0.5)], region)
    with pytest.raises(ValueError):  # mixed orders
        Bundle([abs_cut(0.5, order=1), abs_cut(-0.5, order=2)], region)


def test_duplicate_tolerance_boundary():
    region = TrustRegion([0.0], 1.0, NormKind.MAX)
    a = abs_cut(0.5)
    nearby = OracleSample(base=[0.5 + 5e-15], value=0.5, grad=[1.0], hess=None, order=1)
    with pytest.raises(ValueError):
        Bundle([a, nearby], region)
    farther = OracleSample(base=[0.5 + 5e-14], value=0.5, grad=[1.0], hess=None, order=1)
    assert len(Bundle([a, farther], region)) == 2


def test_cut_values_batch_matches_single():
    inst = generate(Family.MAX_QUARTIC, n=3, m=4, seed=5)
    o = oracle_of(inst)
    rng = derive_rng(5, 61)
    x = rng.standard_normal(3)
    region = TrustRegion(x, 1.0, NormKind.EUCLIDEAN)
    b = Bundle([o.query(region.project(x + rng.uniform(-1, 1, 3)), 2) for _ in range(4)], region)
    Z = x[None, :] + rng.uniform(-1, 1, (10, 3))
    batch = b.cut_values(Z)
    for i, z in enumerate(Z):
        single = np.array([taylor_eval(s, z) for s in b.samples])
        assert np.allclose(batch[i], single, atol=1e-11, rtol=1e-11)


def test_point_memory_fifo():
    mem = PointMemory(3)
    cuts = [abs_cut(v) for v in (0.1, 0.2, 0.3, 0.4, 0.5)]
    for c in cuts:
        mem.push(c)
    assert len(mem) == 3
    assert [float(s.base[0]) for s in mem] == [0.3, 0.4, 0.5]
    assert PointMemory(0).capacity == 0


def test_seed_bundle_rules(abs_oracle):
    center = abs_cut(0.3)
    region = TrustRegion([0.3], 0.2, NormKind.MAX)

    # empty memory: singleton
    assert len(seed_bundle(PointMemory(10), center, region)) == 1
    assert len(seed_bundle(None, center, region)) == 1

    mem = PointMemory(10)
    mem.push(abs_cut(0.45))   # inside
    mem.push(abs_cut(0.9))    # outside: excluded
    mem.push(abs_cut(0.45))   # duplicate: included exactly once
    mem.push(abs_cut(0.3))    # duplicate of center
    b = seed_bundle(mem, center, region)
    assert len(b) == 2
    assert float(b.samples[0].base[0]) == 0.3  # center first

    with pytest.raises(ValueError):
        seed_bundle(mem, abs_cut(0.5), region)  # center sample not at center


@pytest.mark.parametrize("order", [1, 2])
def test_bundle_remainder_envelope_order(order):
    # max over sampled points in the region of |branch-max - model| shrinks
    # like radius^(order+1)
    inst = generate(Family.MAX_QUARTIC, n=2, m=3, seed=6)
    o = oracle_of(inst)
    x = np.array([0.45, -0.3])
    rng = derive_rng(6, 62)
    dirs = rng.standard_normal((128, 2))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = rng.uniform(0, 1, 128) ** 0.5

    deltas = [1e-1, 1e-2, 1e-3, 1e-4]
    maxima = []
    for d in deltas:
        region = TrustRegion(x, d, NormKind.EUCLIDEAN)
        offsets = dirs * (radii * d)[:, None]
        samples = [o.query(x, order)] + [o.query(x + off, order) for off in offsets[:5]]
        # de-duplicate bases
        b = Bundle([s for i, s in enumerate(samples)
                    if all(np.max(np.abs(s.base - t.base)) > 1e-14 for t in samples[:i])], region)
        tags = {s.selector_tag for s in b.samples}
        Z = x[None, :] + offsets
        model_vals = b.cut_values(Z).max(axis=1)
        branch_vals = np.stack([[o.branch_value(tag, z) for z in Z] for tag in tags]).max(axis=0)
        maxima.append(np.abs(branch_vals - model_vals).max())
    slope = np.polyfit(np.log(deltas), np.log(maxima), 1)[0]
    assert slope >= order + 0.75
