"""Single-machine selection algorithms and the nice-ness property checker.

All deterministic algorithms break marginal-gain ties with a TieOrder (a
fixed strict total order over item ids, ascending id by default).  Gains are
exact: instance weights are integers, so equal marginals compare equal in
double precision and tie-breaking is well defined.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .oracle import ContractError, InputError


class TieOrder:
    """Strict total order over item ids; rank(x) is the sort key."""

    def __init__(self, ranks=None):
        # ranks: optional dict/sequence mapping item id -> rank
        self._ranks = ranks

    def rank(self, x):
        if self._ranks is None:
            return x
        return self._ranks[x]


ASCENDING_IDS = TieOrder()


@dataclass(frozen=True)
class Selection:
    items: tuple
    gains: tuple
    value: float

    def __len__(self):
        return len(self.items)

    @property
    def item_set(self):
        return frozenset(self.items)


@dataclass
class NiceReport:
    beta_observed: float
    property1_violations: int
    property2_violations: int
    trials: int


def _empty_selection():
    return Selection(items=(), gains=(), value=0.0)


def selection_from_items(instance, items):
    """Build a Selection (with its gain trace) from an already-ordered list."""
    state = instance.evaluator()
    gains = []
    for x in items:
        gains.append(state.add(x))
    return Selection(items=tuple(items), gains=tuple(gains),
                     value=float(state.value))


def greedy(instance, t, k_prime, order=ASCENDING_IDS):
    """Plain greedy: repeatedly take the item of maximum marginal gain."""
    if k_prime < 0:
        raise InputError("k_prime must be >= 0")
    candidates = sorted(set(t))
    instance._check_set(candidates)
    state = instance.evaluator()
    chosen, gains = [], []
    steps = min(k_prime, len(candidates))
    for _ in range(steps):
        best = None
        best_key = None
        for x in candidates:
            g = state.gain(x)
            key = (-g, order.rank(x))
            if best_key is None or key < best_key:
                best, best_key = x, key
        state.add(best)
        chosen.append(best)
        gains.append(-best_key[0])
        candidates.remove(best)
    return Selection(items=tuple(chosen), gains=tuple(gains),
                     value=float(state.value))


greedy.deterministic = True


def lazy_greedy(instance, t, k_prime, order=ASCENDING_IDS):
    """Greedy with stale-upper-bound heap; output bit-identical to greedy().

    Valid because marginals never increase as the selection grows
    (submodularity), so a stale heap entry is an upper bound.
    """
    if k_prime < 0:
        raise InputError("k_prime must be >= 0")
    candidates = sorted(set(t))
    instance._check_set(candidates)
    state = instance.evaluator()
    heap = [(-state.gain(x), order.rank(x), x) for x in candidates]
    heapq.heapify(heap)
    chosen, gains = [], []
    steps = min(k_prime, len(candidates))
    while len(chosen) < steps:
        neg_g, r, x = heapq.heappop(heap)
        fresh = -state.gain(x)
        if fresh > neg_g:
            # stale; reinsert with the current bound
            heapq.heappush(heap, (fresh, r, x))
            continue
        state.add(x)
        chosen.append(x)
        gains.append(-fresh)
    return Selection(items=tuple(chosen), gains=tuple(gains),
                     value=float(state.value))


lazy_greedy.deterministic = True


def threshold_greedy(instance, t, k_prime, epsilon, order=ASCENDING_IDS):
    """Descending geometric thresholds tau <- tau*(1-eps), scan in TieOrder.

    Every selected item has gain >= (1-eps) * (max marginal at selection
    time).  Stops below tau_min = eps*d_max/k_prime: any marginal still under
    that floor is <= (eps/(1-eps)) * f(S)/k_prime, which keeps the
    (1+2*eps)-nice bound intact for short outputs.
    """
    if not (0 < epsilon <= 0.5):
        raise InputError("epsilon must be in (0, 0.5]")
    if k_prime < 0:
        raise InputError("k_prime must be >= 0")
    candidates = sorted(set(t), key=lambda x: (order.rank(x), x))
    instance._check_set(candidates)
    state = instance.evaluator()
    chosen, gains = [], []
    if not candidates or k_prime == 0:
        return _empty_selection()
    d_max = max(state.gain(x) for x in candidates)
    if d_max <= 0:
        return _empty_selection()
    tau = d_max
    tau_min = epsilon * d_max / max(k_prime, 1)
    remaining = list(candidates)
    while tau >= tau_min and len(chosen) < k_prime and remaining:
        still = []
        for x in remaining:
            if len(chosen) >= k_prime:
                still.append(x)
                continue
            g = state.gain(x)
            if g >= tau:
                state.add(x)
                chosen.append(x)
                gains.append(g)
            else:
                still.append(x)
        remaining = still
        tau *= (1.0 - epsilon)
    return Selection(items=tuple(chosen), gains=tuple(gains),
                     value=float(state.value))


threshold_greedy.deterministic = True


def make_threshold_greedy(epsilon):
    """Fixed-epsilon deterministic handle, e.g. for check_beta_nice."""
    def alg(instance, t, k_prime, order=ASCENDING_IDS):
        return threshold_greedy(instance, t, k_prime, epsilon, order)
    alg.deterministic = True
    alg.__name__ = f"threshold_greedy_eps{epsilon}"
    return alg


def random_greedy(instance, t, k, rng, order=ASCENDING_IDS):
    """Cardinality-constrained random greedy for (possibly) non-monotone f.

    At each of k steps: rank the remaining items by marginal gain, take the
    k largest (conceptually padded with zero-gain dummies up to k slots),
    pick a slot uniformly at random, and add the item if its marginal is
    strictly positive.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    candidates = sorted(set(t))
    instance._check_set(candidates)
    state = instance.evaluator()
    chosen, gains = [], []
    for _ in range(k):
        pool = [x for x in candidates if x not in state.items]
        scored = sorted(((state.gain(x), x) for x in pool),
                        key=lambda gx: (-gx[0], order.rank(gx[1])))
        top = scored[:k]
        slot = int(rng.integers(k))
        if slot < len(top) and top[slot][0] > 0:
            g, x = top[slot]
            state.add(x)
            chosen.append(x)
            gains.append(g)
    return Selection(items=tuple(chosen), gains=tuple(gains),
                     value=float(state.value))


random_greedy.deterministic = False


def check_beta_nice(algorithm, instance, t, k_prime, beta, trials, rng):
    """Empirical check of the two nice-ness properties.

    Property 1: dropping any unselected item leaves the output unchanged.
    Property 2: every unselected item's marginal against the output is at
    most beta * f(output) / k_prime (+1e-9 slack).

    The unselected-item scan is exhaustive when there are <= 64 such items,
    otherwise `trials` of them are sampled without replacement.
    """
    if not getattr(algorithm, "deterministic", False):
        raise ContractError(
            "check_beta_nice requires a deterministic algorithm handle")
    t = sorted(set(t))
    base = algorithm(instance, t, k_prime)
    base_set = set(base.items)
    outside = [x for x in t if x not in base_set]
    if len(outside) <= 64:
        probes = outside
    else:
        idx = rng.choice(len(outside), size=min(trials, len(outside)),
                         replace=False)
        probes = [outside[i] for i in sorted(idx)]
    p1 = 0
    p2 = 0
    beta_obs = 0.0
    bound = beta * base.value / max(k_prime, 1) + 1e-9
    for x in probes:
        reduced = algorithm(instance, [y for y in t if y != x], k_prime)
        if set(reduced.items) != base_set:
            p1 += 1
        delta = instance.marginal(x, base_set)
        if delta > bound:
            p2 += 1
        if base.value > 0:
            beta_obs = max(beta_obs, delta * max(k_prime, 1) / base.value)
    return NiceReport(beta_observed=beta_obs, property1_violations=p1,
                      property2_violations=p2, trials=len(probes))
