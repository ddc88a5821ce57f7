import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multisub import (
    CappedOracle,
    ConvexCombinationOracle,
    CoverageFunction,
    ElementSet,
    FunctionOracle,
    GroundSet,
    MinOracle,
    ModularFunction,
    ScaledResidualOracle,
    greedy_fraction,
    check_submodular,
    marginal_of_set,
)

from conftest import random_coverage


def test_greedy_fraction_values():
    assert greedy_fraction(0) == 0
    assert greedy_fraction(1) == pytest.approx(0.6321205588, abs=1e-10)
    assert greedy_fraction(0.5) == pytest.approx(0.3934693, abs=1e-7)
    assert greedy_fraction(0.5) >= (1 - 1 / math.e) / 2


@pytest.mark.parametrize("ratio", [-0.1, 1.5])
def test_greedy_fraction_domain(ratio):
    with pytest.raises(ValueError):
        greedy_fraction(ratio)


@given(st.integers(1, 50), st.integers(1, 50))
def test_greedy_fraction_dominates_linear(a, b):
    kp, k = min(a, b), max(a, b)
    assert greedy_fraction(kp / k) >= (1 - 1 / math.e) * kp / k - 1e-12


def test_marginal_of_set(three_sets):
    assert marginal_of_set(three_sets, [], [0, 1]) == 0
    # {3} is already covered by element 0
    f = CoverageFunction([[1, 2, 3], [3], [3, 4]], universe_size=6)
    assert marginal_of_set(f, [1], [0]) == 0
    assert marginal_of_set(three_sets, [1], [0]) == 1


def test_element_set_basics():
    S = ElementSet([3, 1], n=5)
    assert len(S) == 2 and 3 in S and 2 not in S
    assert S == {1, 3}
    assert S.add(0).sorted() == [0, 1, 3]
    assert S.indicator().tolist() == [False, True, False, True, False]
    with pytest.raises(ValueError):
        ElementSet([1, 1])
    with pytest.raises(ValueError):
        ElementSet([7], n=5)
    assert GroundSet(4).full() == {0, 1, 2, 3}


def test_check_submodular_examples():
    assert check_submodular(random_coverage(12, 20, 0), 1000, rng_seed=1)
    assert check_submodular(ModularFunction([3, 1, 4, 1, 5]), 1000)
    square = FunctionOracle(8, lambda ids: len(set(ids.tolist())) ** 2)
    rep = check_submodular(square, 1000, rng_seed=0)
    assert not rep.ok
    B, A, e, gain_a, gain_b = rep.counterexample
    assert set(B) <= set(A) and e not in A and gain_a > gain_b


def test_query_counting(three_sets):
    f = three_sets
    f.eval([0])
    assert f.query_count == 1
    f.marginal(1, [0])
    assert f.query_count == 2  # native marginal
    f.marginals([0], [1, 2])
    assert f.query_count == 4
    g = FunctionOracle(3, lambda ids: len(ids))
    g.marginal(1, [0])
    assert g.query_count == 2  # two evals


def test_capped_oracle(three_sets):
    c = CappedOracle(three_sets, 3.5)
    assert c.eval([0, 1, 2]) == 3.5
    assert c.eval([1]) == 2
    assert c.marginal(1, [0]) == pytest.approx(0.5)
    assert check_submodular(c, 1000)
    with pytest.raises(ValueError):
        CappedOracle(three_sets, 0)


def test_scaled_residual(three_sets):
    capped = CappedOracle(three_sets, 4)
    r = ScaledResidualOracle(capped, [1], 4 - capped.eval([1]))
    assert r.eval([]) == 0
    assert r.eval([0, 1, 2]) == pytest.approx(1.0)
    assert r.eval([0]) == pytest.approx(1.0)
    assert r.marginal(2, []) == pytest.approx(0.5)
    assert check_submodular(r, 1000)


def test_convex_combination_and_min(three_sets):
    other = ModularFunction([0, 0, 2])
    g = ConvexCombinationOracle([three_sets, other], [0.5, 0.5])
    assert g.eval([2]) == pytest.approx(0.5 * 1 + 0.5 * 2)
    assert check_submodular(g, 1000)
    h = MinOracle([three_sets, other])
    assert h.eval([0]) == 0 and h.eval([0, 2]) == 2


@pytest.mark.parametrize("seed", range(5))
def test_wrappers_submodular(seed):
    f = random_coverage(10, 15, seed, density=0.1)
    cap = 0.9 * f.eval(range(10))
    capped = CappedOracle(f, cap)
    base = [0, 3]
    resid = ScaledResidualOracle(capped, base, cap - capped.eval(base))
    combo = ConvexCombinationOracle([capped, resid], [0.3, 0.7])
    for oracle in (capped, resid, combo):
        assert check_submodular(oracle, 1000, rng_seed=seed)


def _layered(oracles, weights):
    """Sum of chains evaluated one oracle at a time (no fused path)."""

    class Plain(ConvexCombinationOracle):
        def __init__(self, fs, w):
            super().__init__(fs, w)
            self._stack = None

    return Plain(oracles, weights)


@pytest.mark.parametrize("seed", range(4))
def test_fused_coverage_matches_layered(seed):
    rng = np.random.default_rng(seed)
    n = 20

    def chains():
        covs = [random_coverage(n, 40, 10 * seed + i, density=0.08) for i in range(4)]
        base = [1, 5]
        out = [covs[0], CappedOracle(covs[1], 6)]
        cap = covs[2].eval(range(n)) - 2
        capped = CappedOracle(covs[2], cap)
        out.append(ScaledResidualOracle(capped, base, cap - capped.eval(base)))
        out.append(ScaledResidualOracle(covs[3], base, 3.0))
        return covs, out

    w = rng.random(4)
    covs_a, fused_parts = chains()
    covs_b, plain_parts = chains()
    fused = ConvexCombinationOracle(fused_parts, w)
    plain = _layered(plain_parts, w)
    assert fused._stack is not None
    for _ in range(10):
        S = rng.choice(n, size=rng.integers(0, 6), replace=False)
        cand = np.setdiff1d(np.arange(n), S)
        assert fused.eval(S) == pytest.approx(plain.eval(S), abs=1e-12)
        np.testing.assert_allclose(fused.marginals(S, cand), plain.marginals(S, cand), atol=1e-12)
    assert [c.query_count for c in covs_a] == [c.query_count for c in covs_b]
    assert [f.query_count for f in fused_parts] == [f.query_count for f in plain_parts]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.5, 12))
def test_capped_never_exceeds_cap(seed, cap):
    f = random_coverage(8, 12, seed)
    c = CappedOracle(f, cap)
    rng = np.random.default_rng(seed)
    for _ in range(5):
        S = rng.choice(8, size=rng.integers(0, 9), replace=False)
        v = f.eval(S)
        assert c.eval(S) <= cap
        if v < cap:
            assert c.eval(S) == v


def test_eval_many_matches_eval():
    f = random_coverage(9, 14, 3)
    rng = np.random.default_rng(0)
    masks = rng.random((30, 9)) < 0.4
    expect = [f.eval(np.flatnonzero(m)) for m in masks]
    np.testing.assert_array_equal(f.eval_many(masks), expect)
