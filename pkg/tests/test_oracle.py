import json
import math

import numpy as np
import pytest

from rcoreset import (CapacityError, CoverageInstance, CutInstance,
                      InputError, brute_force_best_k, load_instance,
                      save_instance)
from rcoreset.oracle import instance_from_json_dict, instance_to_json


def small_coverage():
    # items: 0 covers {0,1,2}, 1 covers {2,3}, 2 covers {3}, 3 covers {}
    return CoverageInstance([[0, 1, 2], [2, 3], [3], []], 5)


def test_coverage_values():
    inst = small_coverage()
    assert inst.value(set()) == 0.0
    assert inst.value({0}) == 3.0
    assert inst.value({0, 1}) == 4.0
    assert inst.value({0, 1, 2}) == 4.0
    assert inst.value({3}) == 0.0
    assert inst.marginal(1, {0}) == 1.0
    assert inst.marginal(2, {0, 1}) == 0.0


def test_weighted_coverage():
    inst = CoverageInstance([[0], [0, 1], [2]], 3, weights=[5, 7, 11])
    assert inst.value({0}) == 5.0
    assert inst.value({1}) == 12.0
    assert inst.value({0, 1, 2}) == 23.0
    assert inst.marginal(2, {1}) == 11.0
    assert inst.kind == "weighted-coverage"


def test_cut_values():
    # arcs: 0->1 (w3), 1->2 (w2), 2->0 (w5)
    inst = CutInstance(3, [(0, 1, 3), (1, 2, 2), (2, 0, 5)])
    assert inst.value(set()) == 0.0
    assert inst.value({0}) == 3.0        # 0->1 crosses
    assert inst.value({0, 1}) == 2.0     # only 1->2 crosses
    assert inst.value({0, 1, 2}) == 0.0  # nothing leaves the full set
    # non-monotone: adding 1 to {0} decreases the value
    assert inst.marginal(1, {0}) == -1.0


def test_submodularity_random_spot_checks():
    rng = np.random.default_rng(7)
    for trial in range(30):
        n, u = 10, 20
        sets = [sorted(rng.choice(u, size=rng.integers(0, 6),
                                  replace=False).tolist()) for _ in range(n)]
        inst = CoverageInstance(sets, u)
        small = set(int(x) for x in rng.choice(n, size=2, replace=False))
        big = small | {int(x) for x in rng.choice(n, size=4)}
        x = int(rng.integers(n))
        if x in big:
            continue
        assert inst.marginal(x, small) >= inst.marginal(x, big) - 1e-12
        assert inst.value(big) >= inst.value(small) - 1e-12  # monotone


def test_oracle_stats_counters():
    inst = small_coverage()
    v0, m0 = inst.stats.snapshot()
    inst.value({0, 1})
    inst.marginal(2, {0})
    v1, m1 = inst.stats.snapshot()
    assert (v1 - v0, m1 - m0) == (1, 1)


def test_evaluator_incremental_matches_value():
    inst = small_coverage()
    state = inst.evaluator()
    total = 0.0
    for x in (0, 1, 2):
        g = state.gain(x)
        assert g == inst.marginal(x, set(state.items))
        total += state.add(x)
    assert total == state.value == inst.value({0, 1, 2})


def test_input_validation():
    inst = small_coverage()
    with pytest.raises(InputError):
        inst.value({4})
    with pytest.raises(InputError):
        inst.marginal(-1, set())
    with pytest.raises(InputError):
        CoverageInstance([[0, 99]], 5)
    with pytest.raises(InputError):
        CutInstance(2, [(0, 0, 1)])


def test_brute_force_best_k():
    inst = small_coverage()
    best, val = brute_force_best_k(inst, range(4), 2)
    assert val == 4.0
    assert best == {0, 1}  # smallest lexicographic optimum
    # non-monotone: singleton {2} ties the best pair {1,2} at value 5
    cut = CutInstance(3, [(0, 1, 3), (1, 2, 2), (2, 0, 5)])
    best, val = brute_force_best_k(cut, range(3), 2)
    assert val == 5.0
    assert cut.value(best) == 5.0


def test_brute_force_capacity_guard():
    inst = CoverageInstance([[0]] * 40, 1)
    with pytest.raises(CapacityError):
        brute_force_best_k(inst, range(40), 15)


def test_json_round_trip(tmp_path):
    for inst in (small_coverage(),
                 CoverageInstance([[0], [1]], 2, weights=[2, 3]),
                 CutInstance(3, [(0, 1, 3), (2, 0, 5)])):
        text = instance_to_json(inst)
        again = instance_from_json_dict(json.loads(text))
        assert instance_to_json(again) == text
        assert again.value({0, 1}) == inst.value({0, 1})
        path = tmp_path / "inst.json"
        save_instance(inst, path)
        loaded = load_instance(path)
        assert instance_to_json(loaded) == text


def test_integer_weights_make_ties_exact():
    inst = CoverageInstance([[0, 1], [2, 3]], 4, weights=[1, 2, 2, 1])
    assert inst.value({0}) == inst.value({1})
    assert math.isclose(inst.value({0}), 3.0, abs_tol=0)
