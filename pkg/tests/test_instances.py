import numpy as np
import pytest

from multisub import (
    CoverageFunction,
    Graph,
    InitiatorMatrix,
    ModularFunction,
    MultiObjectiveInstance,
    brute_force_max_min,
    check_submodular,
    kronecker_generate,
    load_instance,
    max_cover_objectives,
    planted_instance,
    save_instance,
)
from multisub.instances import dumps, expected_edges, kronecker_power, instance_from_dict, instance_to_dict
from multisub.multiobjective import naive_min_greedy, round_robin_greedy, saturate_with_search

from conftest import random_coverage

ONES = InitiatorMatrix(((1.0, 1.0), (1.0, 1.0)))


def test_initiator_rules():
    with pytest.raises(ValueError):
        InitiatorMatrix(((0.0, 0.0), (0.0, 0.0)))
    with pytest.raises(ValueError):
        InitiatorMatrix(((0.2, 0.2), (0.2, 0.2)))
    with pytest.raises(ValueError):
        InitiatorMatrix(((1.2, 0.0), (0.0, 0.0)))
    rng = np.random.default_rng(0)
    for _ in range(50):
        assert InitiatorMatrix.draw(rng).array.sum() >= 1


def test_all_ones_initiator_gives_complete_graph():
    g = kronecker_generate(4, rng_seed=1, initiator=ONES)
    assert g.n_vertices == 16 and g.n_edges == 16 * 15 // 2
    assert all(len(a) == 15 for a in g.adjacency)


def test_generation_is_seed_deterministic():
    a, b, c = kronecker_generate(6, 7), kronecker_generate(6, 7), kronecker_generate(6, 8)
    np.testing.assert_array_equal(a.edges, b.edges)
    assert a.initiator == b.initiator
    assert a.initiator != c.initiator or not np.array_equal(a.edges, c.edges)


def test_generation_bounds():
    with pytest.raises(ValueError):
        kronecker_generate(0)
    with pytest.raises(ValueError):
        kronecker_generate(13)


def test_adjacency_symmetric():
    g = kronecker_generate(5, 3, InitiatorMatrix(((0.9, 0.6), (0.6, 0.3))))
    for u, nb in enumerate(g.adjacency):
        for v in nb:
            assert u in g.adjacency[v]
    assert np.all(g.edges[:, 0] < g.edges[:, 1])


def test_edge_count_within_three_sigma():
    init = InitiatorMatrix(((0.9, 0.5), (0.5, 0.2)))
    mean, var = expected_edges(init, 6)
    # the full power sums to the entry sum raised to the power
    assert kronecker_power(init, 6).sum() == pytest.approx(2.1**6)
    counts = [kronecker_generate(6, s, init).n_edges for s in range(30)]
    inside = sum(abs(c - mean) <= 3 * np.sqrt(var) for c in counts)
    assert inside >= 28


def test_graph_round_trip():
    g = kronecker_generate(4, 11)
    h = Graph.from_dict(g.to_dict())
    np.testing.assert_array_equal(g.edges, h.edges)
    assert h.initiator == g.initiator and h.seed == 11


def test_cover_objective_examples():
    n = 8
    empty, = max_cover_objectives([Graph(n, np.zeros((0, 2)))])
    for S in ([], [0], [1, 4, 6]):
        assert empty.eval(S) == len(S)
    full, = max_cover_objectives([kronecker_generate(3, 0, ONES)])
    assert full.eval([]) == 0 and full.eval([5]) == n and full.eval([1, 2]) == n
    star, = max_cover_objectives([Graph(n, [(0, v) for v in range(1, n)])])
    assert star.eval([0]) == n and star.eval([3]) == 2


def test_cover_objectives_reject_mismatched_sizes():
    with pytest.raises(ValueError):
        max_cover_objectives([Graph(4, []), Graph(8, [])])


@pytest.mark.parametrize("seed", range(5))
def test_cover_objectives_submodular(seed):
    graphs = [kronecker_generate(4, 10 * seed + i) for i in range(2)]
    for f in max_cover_objectives(graphs):
        assert check_submodular(f, 1000, rng_seed=seed)


def test_planted_instance_properties():
    inst, s_star = planted_instance(64, 4, 8, rng_seed=2)
    assert len(s_star) == 8
    np.testing.assert_array_equal(inst.values(s_star), inst.targets)
    assert np.min(inst.values(s_star) / inst.targets) == 1
    for f in inst.oracles:
        assert check_submodular(f, 1000)


@pytest.mark.parametrize("seed", range(4))
def test_planted_single_objective_is_optimal(seed):
    inst, s_star = planted_instance(16, 1, 4, rng_seed=seed)
    _, best = brute_force_max_min(inst)
    assert inst.min_value(s_star) == best


def test_brute_force_examples(three_sets):
    f = random_coverage(7, 12, 0)
    S, v = brute_force_max_min(MultiObjectiveInstance([f], 7))
    assert S == set(range(7)) and v == f.eval(range(7))
    assert brute_force_max_min(MultiObjectiveInstance([three_sets], 2))[1] == 4
    w = [3.0, 8.0, 1.0, 5.0, 2.0]
    assert brute_force_max_min(MultiObjectiveInstance([ModularFunction(w)], 2))[0] == {1, 3}
    with pytest.raises(ValueError):
        brute_force_max_min(MultiObjectiveInstance([random_coverage(40, 10, 0)], 10))


def test_brute_force_lexicographic_tie():
    f = CoverageFunction([[0], [0], [0]], universe_size=1)
    assert brute_force_max_min(MultiObjectiveInstance([f], 1))[0] == {0}


@pytest.mark.parametrize("seed", range(10))
def test_brute_force_dominates_heuristics(seed):
    fs = [random_coverage(12, 18, 100 * seed + i, density=0.15) for i in range(3)]
    inst = MultiObjectiveInstance(fs, 3)
    _, opt = brute_force_max_min(inst)
    for S in (round_robin_greedy(inst), naive_min_greedy(inst), saturate_with_search(inst)):
        assert inst.min_value(S) <= opt + 1e-9


def test_opt_monotone_in_k():
    fs = [random_coverage(10, 15, i, density=0.2) for i in range(2)]
    vals = [brute_force_max_min(MultiObjectiveInstance(fs, k))[1] for k in range(1, 11)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_serialisation_round_trip(tmp_path):
    inst, _ = planted_instance(32, 3, 4, rng_seed=5)
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    text = path.read_text()
    back = load_instance(path)
    assert dumps(instance_to_dict(back)) == text
    assert back.k == 4 and back.m == 3
    np.testing.assert_array_equal(back.targets, inst.targets)
    S = [0, 5, 9]
    np.testing.assert_array_equal(back.values(S), inst.values(S))


def test_serialisation_rejects_bad_documents():
    inst, _ = planted_instance(16, 1, 2)
    doc = instance_to_dict(inst)
    with pytest.raises(ValueError):
        instance_from_dict({**doc, "version": 99})
    with pytest.raises(ValueError):
        instance_from_dict({**doc, "format": "other"})
    with pytest.raises(ValueError):
        instance_from_dict({**doc, "m": 5})
