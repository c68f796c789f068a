import json
import math

import numpy as np
import pytest

from rcoreset import (PipelineConfig, SeedTree, compose_and_post,
                      lazy_greedy, measure_fk, pipeline_k_prime,
                      pseudo_greedy, random_clustering, run_coreset_phase,
                      run_distributed, run_small_coreset_phase,
                      run_streaming, small_coreset_machine)
from rcoreset.instances import gen_random_coverage, gen_small_hard
from rcoreset.oracle import InputError


def test_pipeline_k_prime_values():
    assert pipeline_k_prime(1) == 4
    assert pipeline_k_prime(10) == math.ceil((2 * math.sqrt(2) + 1) * 10)


def test_config_validation():
    PipelineConfig(k=3, k_prime=3, m=2, C=1).validate()
    with pytest.raises(InputError):
        PipelineConfig(k=3, k_prime=3, m=2, C=3).validate()
    with pytest.raises(InputError):
        PipelineConfig(k=3, k_prime=3, m=2, C=1,
                       core_alg="pseudo_greedy").validate()
    with pytest.raises(InputError):
        PipelineConfig(k=3, k_prime=3, m=2, C=1,
                       post="pseudo_greedy").validate()  # k' too small
    PipelineConfig(k=3, k_prime=pipeline_k_prime(3), m=2, C=1,
                   post="pseudo_greedy").validate()


def test_run_coreset_phase_sizes():
    gi = gen_random_coverage(40, 60, 0.15, seed=1)
    cfg = PipelineConfig(k=4, k_prime=6, m=4, C=1, seeds=SeedTree(3))
    cl = random_clustering(40, 4, 1, cfg.seeds)
    sels = run_coreset_phase(gi.instance, cl, cfg)
    assert len(sels) == 4
    for part, sel in zip(cl.parts, sels):
        assert len(sel) <= 6
        assert set(sel.items) <= set(part)


def test_compose_greedy_equals_lazy_on_union():
    gi = gen_random_coverage(30, 50, 0.2, seed=2)
    cfg = PipelineConfig(k=5, k_prime=5, m=3, C=1, seeds=SeedTree(1))
    cl = random_clustering(30, 3, 1, cfg.seeds)
    sels = run_coreset_phase(gi.instance, cl, cfg)
    final = compose_and_post(gi.instance, sels, 5, "greedy")
    union = sorted(set().union(*[set(s.items) for s in sels]))
    assert final.items == lazy_greedy(gi.instance, union, 5).items


def test_pseudo_greedy_invariants_small():
    gi = gen_random_coverage(40, 80, 0.12, seed=4)
    k = 4
    kp = pipeline_k_prime(k)
    cfg = PipelineConfig(k=k, k_prime=kp, m=3, C=1, seeds=SeedTree(5))
    cl = random_clustering(40, 3, 1, cfg.seeds)
    sels = run_coreset_phase(gi.instance, cl, cfg)
    union = sorted(set().union(*[set(s.items) for s in sels]))
    res = pseudo_greedy(gi.instance, sels[0], union, k,
                        np.random.default_rng(0))
    assert len(res.v_items) <= k + 128
    assert res.v_value >= res.greedy_k.value - 1e-12
    assert res.final.value >= res.greedy_k.value - 1e-12
    assert len(res.final) <= k
    assert set(res.subset.items) <= set(res.v_items)


def test_pseudo_greedy_deterministic_given_seed():
    gi = gen_random_coverage(25, 40, 0.2, seed=6)
    union = list(range(25))
    s1 = lazy_greedy(gi.instance, range(12), 8)
    a = pseudo_greedy(gi.instance, s1, union, 3, np.random.default_rng(9))
    b = pseudo_greedy(gi.instance, s1, union, 3, np.random.default_rng(9))
    assert a.final.items == b.final.items
    assert a.v_key == b.v_key


def test_small_coreset_machine_output():
    gi = gen_small_hard(25, 5, seed=1)
    rng = np.random.default_rng(2)
    out = small_coreset_machine(gi.instance, range(gi.instance.n), 25, 5, rng)
    assert len(out) <= 5
    assert out <= set(range(gi.instance.n))
    with pytest.raises(InputError):
        small_coreset_machine(gi.instance, range(10), 5, 9, rng)


def test_run_small_coreset_phase():
    gi = gen_random_coverage(60, 80, 0.1, seed=3)
    cl = random_clustering(60, 5, 1, SeedTree(4))
    outs = run_small_coreset_phase(gi.instance, cl, 10, 3, SeedTree(4))
    assert len(outs) == 5
    assert all(len(o) <= 3 for o in outs)


def test_run_streaming_memory_bound():
    gi = gen_random_coverage(100, 60, 0.1, seed=5)
    sel = run_streaming(gi.instance, 4, 4, SeedTree(7))
    assert len(sel) <= 4
    base = lazy_greedy(gi.instance, range(100), 4)
    assert sel.value <= base.value + 1e-12
    # single block degenerate case
    gi2 = gen_random_coverage(9, 20, 0.3, seed=8)
    one = run_streaming(gi2.instance, 9, 9, SeedTree(0))
    assert one.items == lazy_greedy(gi2.instance, range(9), 9).items


def test_run_distributed_report():
    gi = gen_random_coverage(18, 30, 0.2, seed=9, k=3)
    cfg = PipelineConfig(k=3, k_prime=3, m=3, C=1, seeds=SeedTree(11))
    rep = run_distributed(gi.instance, cfg, opt_value=gi.opt_value, seed=11)
    assert rep.opt_value == gi.opt_value
    assert 0 < rep.ratio <= 1.0 + 1e-12
    assert rep.oracle_calls["marginal_calls"] > 0
    d = rep.to_json_dict()
    assert "wall_time" not in json.dumps(d)
    # deterministic rerun: identical serialized report
    rep2 = run_distributed(gi.instance,
                           PipelineConfig(k=3, k_prime=3, m=3, C=1,
                                          seeds=SeedTree(11)),
                           opt_value=gi.opt_value, seed=11)
    a, b = rep.to_json_dict(), rep2.to_json_dict()
    a.pop("oracle_calls"), b.pop("oracle_calls")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_measure_fk_methods():
    gi = gen_random_coverage(10, 20, 0.25, seed=10)
    val, method = measure_fk(gi.instance, range(10), 3)
    assert method == "brute-force"
    sel = lazy_greedy(gi.instance, range(10), 3)
    assert val >= sel.value - 1e-12


def test_random_greedy_post_deterministic_by_seedtree():
    gi = gen_random_coverage(20, 30, 0.2, seed=12)
    sels = [lazy_greedy(gi.instance, range(0, 10), 4),
            lazy_greedy(gi.instance, range(10, 20), 4)]
    a = compose_and_post(gi.instance, sels, 3, "random_greedy",
                         seeds=SeedTree(5))
    b = compose_and_post(gi.instance, sels, 3, "random_greedy",
                         seeds=SeedTree(5))
    assert a.items == b.items
