"""Two-phase distributed simulator, post-processors, and streaming mode.

Phase 1 clusters the ground set onto m simulated machines and runs a
selection algorithm per machine; phase 2 composes the union of the machine
outputs and post-processes it down to k items.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .algorithms import (greedy, lazy_greedy, random_greedy, threshold_greedy,
                         Selection, selection_from_items)
from .clustering import SeedTree, random_clustering, stream_blocks
from .oracle import (CapacityError, InputError, brute_force_best_k)

D_CONST = 2.0 * math.sqrt(2.0) + 1.0


def pipeline_k_prime(k: int) -> int:
    """Per-machine output size required by the pseudo-greedy pipeline."""
    return math.ceil(D_CONST * k)


def parse_core_alg(spec: str):
    """Parse a core/post algorithm spec string.

    Accepted: "greedy", "lazy", "random_greedy", "threshold(0.1)".
    Returns (name, epsilon-or-None).
    """
    spec = spec.strip()
    if spec in ("greedy", "lazy", "random_greedy", "pseudo_greedy"):
        return spec, None
    if spec.startswith("threshold(") and spec.endswith(")"):
        return "threshold", float(spec[len("threshold("):-1])
    raise InputError(f"unknown algorithm spec {spec!r}")


@dataclass
class PipelineConfig:
    k: int
    k_prime: int
    m: int
    C: int
    core_alg: str = "greedy"
    post: str = "greedy"
    seeds: SeedTree = field(default_factory=lambda: SeedTree(0))

    def validate(self):
        if self.k < 1 or self.k_prime < 1:
            raise InputError("k and k_prime must be >= 1")
        if not (1 <= self.C <= self.m):
            raise InputError("need 1 <= C <= m")
        name, _ = parse_core_alg(self.core_alg)
        if name == "pseudo_greedy":
            raise InputError("pseudo_greedy is a post-processor only")
        post_name, _ = parse_core_alg(self.post)
        if post_name == "lazy":
            raise InputError("post must be greedy, pseudo_greedy or random_greedy")
        if post_name == "pseudo_greedy" and self.k_prime < pipeline_k_prime(self.k):
            raise InputError(
                f"pseudo_greedy post needs k_prime >= {pipeline_k_prime(self.k)}")
        return self


@dataclass
class RunReport:
    per_machine: list
    union_size: int
    final: Selection
    opt_value: object
    ratio: object
    best_single_machine: float
    oracle_calls: dict
    wall_time: float
    seed: int

    def to_json_dict(self):
        # wall_time deliberately excluded: serialized outputs must be
        # byte-identical across reruns and worker counts
        return {
            "seed": self.seed,
            "per_machine": [{"items": list(s.items),
                             "gains": list(s.gains),
                             "value": s.value} for s in self.per_machine],
            "union_size": self.union_size,
            "final": {"items": list(self.final.items),
                      "gains": list(self.final.gains),
                      "value": self.final.value},
            "opt_value": self.opt_value,
            "ratio": self.ratio,
            "best_single_machine": self.best_single_machine,
            "oracle_calls": dict(self.oracle_calls),
        }


def _run_core_alg(instance, t, k_prime, spec, rng):
    name, eps = parse_core_alg(spec)
    if name == "greedy":
        return greedy(instance, t, k_prime)
    if name == "lazy":
        return lazy_greedy(instance, t, k_prime)
    if name == "threshold":
        return threshold_greedy(instance, t, k_prime, eps)
    if name == "random_greedy":
        return random_greedy(instance, t, k_prime, rng)
    raise InputError(f"unsupported core algorithm {spec!r}")


def run_coreset_phase(instance, clustering, config: PipelineConfig):
    if clustering.m != config.m:
        raise InputError("clustering.m must equal config.m")
    out = []
    for i, part in enumerate(clustering.parts):
        rng = config.seeds.generator("core", i)
        out.append(_run_core_alg(instance, part, config.k_prime,
                                 config.core_alg, rng))
    return out


def _greedy_extend(instance, seed_items, pool, steps):
    """Greedily add up to `steps` items from `pool` on top of `seed_items`.

    Lazy-heap implementation; tie-break ascending id.  Returns the ordered
    item list (seed first) and the final value.
    """
    state = instance.evaluator()
    ordered = []
    for x in seed_items:
        state.add(x)
        ordered.append(x)
    cand = [x for x in sorted(pool) if x not in state.items]
    heap = [(-state.gain(x), x) for x in cand]
    heapq.heapify(heap)
    added = 0
    while added < steps and heap:
        neg_g, x = heapq.heappop(heap)
        fresh = -state.gain(x)
        if fresh > neg_g:
            heapq.heappush(heap, (fresh, x))
            continue
        state.add(x)
        ordered.append(x)
        added += 1
    return ordered, float(state.value)


@dataclass
class PseudoGreedyResult:
    final: Selection
    v_items: tuple
    v_value: float
    v_key: tuple            # (k'_2, I-bitmask) of the winning candidate
    subset: Selection       # the random size-k subset of V
    greedy_k: Selection     # plain greedy(union, k) baseline


def pseudo_greedy(instance, s1: Selection, union, k, rng) -> PseudoGreedyResult:
    """Seeded-candidate post-processor.

    For every target split k = k'_1 + k'_2: cut the first 8*k3 items of
    machine 1's ordered output into 8 blocks (short/empty tail blocks when
    the output is short), seed a candidate with each admissible block subset
    I (|I| <= 4 + k'_1/k3, exact rational, capped at 8), and greedily extend
    it by k'_1 + (4-|I|)*k3 items from the union.  V is the best candidate;
    the returned selection is the better of a uniformly random size-k subset
    of V and plain greedy over the union.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    union = sorted(set(union))
    greedy_k = lazy_greedy(instance, union, k)
    best_val = -math.inf
    best_items = None
    best_key = None
    for k2p in range(1, k + 1):
        k3 = 32 * math.ceil(k2p / 128)
        k1p = k - k2p
        head = s1.items[:8 * k3]
        blocks = [head[i * k3:(i + 1) * k3] for i in range(8)]
        max_i = 4 + Fraction(k1p, k3)
        for bitmask in range(256):
            size = bitmask.bit_count()
            if Fraction(size) > max_i or size > 8:
                continue
            seed_items = []
            for i in range(8):
                if bitmask >> i & 1:
                    seed_items.extend(blocks[i])
            steps = k1p + (4 - size) * k3
            items, val = _greedy_extend(instance, seed_items, union, steps)
            if val > best_val:
                best_val = val
                best_items = items
                best_key = (k2p, bitmask)
    v_items = tuple(best_items)
    if len(v_items) > k:
        picked = sorted(int(x) for x in
                        rng.choice(sorted(v_items), size=k, replace=False))
    else:
        picked = sorted(v_items)
    subset = selection_from_items(instance, picked)
    final = greedy_k if greedy_k.value >= subset.value else subset
    return PseudoGreedyResult(final=final, v_items=v_items,
                              v_value=float(best_val), v_key=best_key,
                              subset=subset, greedy_k=greedy_k)


def compose_and_post(instance, selections, k, post, seeds=None, s1=None):
    """Union the machine outputs and post-process down to k items."""
    if k < 1:
        raise InputError("k must be >= 1")
    union = sorted(set().union(*[set(s.items) for s in selections])
                   if selections else set())
    name, _ = parse_core_alg(post)
    if name == "greedy":
        return lazy_greedy(instance, union, k)
    seeds = seeds or SeedTree(0)
    if name == "random_greedy":
        return random_greedy(instance, union, k, seeds.generator("post"))
    if name == "pseudo_greedy":
        src = s1 if s1 is not None else selections[0]
        return pseudo_greedy(instance, src, union, k,
                             seeds.generator("post")).final
    raise InputError(f"unsupported post-processor {post!r}")


def small_coreset_machine(instance, t, k, k_prime, rng):
    """Per-machine selector whose output has only ~sqrt(k'k) distinct "useful"
    items: greedy to size k, keep the tau-significant prefix set, then return
    a random k'-subset of either the full greedy set or the significant set
    (fair coin)."""
    if not (1 <= k_prime <= k):
        raise InputError("need 1 <= k_prime <= k")
    s_l = lazy_greedy(instance, t, k)
    tau = s_l.value / math.sqrt(k_prime * k)
    state = instance.evaluator()
    s_prime = []
    changed = True
    while changed:
        changed = False
        for x in s_l.items:         # greedy order scan
            if x in state.items:
                continue
            if state.gain(x) >= tau:
                state.add(x)
                s_prime.append(x)
                changed = True
    if rng.random() < 0.5:
        pool = list(s_l.items)
    else:
        pool = s_prime
    if len(pool) <= k_prime:
        return set(pool)
    return set(int(x) for x in rng.choice(sorted(pool), size=k_prime,
                                          replace=False))


def run_small_coreset_phase(instance, clustering, k, k_prime, seeds):
    out = []
    for i, part in enumerate(clustering.parts):
        rng = seeds.generator("small-core", i)
        out.append(small_coreset_machine(instance, part, k, k_prime, rng))
    return out


def measure_fk(instance, ground, k):
    """f_k over a measured union: brute force when enumerable, else the
    greedy lower bound.  Returns (value, method)."""
    try:
        _, v = brute_force_best_k(instance, ground, k)
        return v, "brute-force"
    except CapacityError:
        return lazy_greedy(instance, ground, k).value, "greedy"


def run_distributed(instance, config: PipelineConfig, opt_value=None,
                    fixed_clustering=None, seed=0) -> RunReport:
    config.validate()
    t0 = time.perf_counter()
    before = instance.stats.snapshot()
    clustering = fixed_clustering
    if clustering is None:
        clustering = random_clustering(instance.n, config.m, config.C,
                                       config.seeds)
    selections = run_coreset_phase(instance, clustering, config)
    union = set().union(*[set(s.items) for s in selections])
    final = compose_and_post(instance, selections, config.k, config.post,
                             seeds=config.seeds, s1=selections[0])
    best_single = max((s.value for s in selections), default=0.0)
    if opt_value is None:
        try:
            _, opt_value = brute_force_best_k(instance, range(instance.n),
                                              config.k)
        except CapacityError:
            opt_value = None
    ratio = None
    if opt_value:
        ratio = max(final.value, best_single) / opt_value
    after = instance.stats.snapshot()
    return RunReport(
        per_machine=selections, union_size=len(union), final=final,
        opt_value=opt_value, ratio=ratio, best_single_machine=best_single,
        oracle_calls={"value_calls": after[0] - before[0],
                      "marginal_calls": after[1] - before[1]},
        wall_time=time.perf_counter() - t0, seed=seed)


def run_streaming(instance, k, k_prime, seeds) -> Selection:
    """Random-order streaming: select k' per block, re-select k from the
    union of the block selections."""
    blocks = stream_blocks(instance.n, k, seeds)
    union = set()
    for block in blocks:
        union |= set(lazy_greedy(instance, block, k_prime).items)
    assert len(union) <= len(blocks) * k_prime
    return lazy_greedy(instance, sorted(union), k)
