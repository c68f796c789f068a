"""Submodular set functions: exact evaluation, marginal gains, brute-force optima.

Two concrete families are provided:

* coverage (optionally element-weighted): f(S) = size (or total weight) of the
  union of the element sets of the items in S.  Monotone.
* directed cut: f(S) = total weight of arcs leaving S.  Submodular but not
  monotone; marginals may be negative.

Coverage element sets are stored as Python int bitmasks so unions and
marginals are a couple of machine-word operations per universe word.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np


class InputError(ValueError):
    """Bad item ids or malformed construction parameters."""


class CapacityError(RuntimeError):
    """An enumeration / dense-build guard was exceeded."""


class ContractError(RuntimeError):
    """A caller violated an operation's contract (e.g. non-deterministic
    algorithm handed to the nice-ness checker)."""


@dataclass
class OracleStats:
    value_calls: int = 0
    marginal_calls: int = 0

    def snapshot(self):
        return (self.value_calls, self.marginal_calls)


def _iter_bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class SubmodularInstance:
    """Base class.  Instances are immutable after construction apart from the
    stats counters."""

    kind: str
    monotone: bool
    n: int

    def __init__(self):
        self.stats = OracleStats()

    def _check_item(self, x):
        if not (0 <= x < self.n):
            raise InputError(f"item id {x} out of range [0, {self.n})")

    def _check_set(self, s):
        for x in s:
            self._check_item(x)

    def value(self, s) -> float:
        self._check_set(s)
        self.stats.value_calls += 1
        return self._value(frozenset(s))

    def marginal(self, x, s) -> float:
        self._check_item(x)
        self._check_set(s)
        self.stats.marginal_calls += 1
        base = frozenset(s)
        if x in base:
            return 0.0
        return self._value(base | {x}) - self._value(base)

    def _value(self, s) -> float:
        raise NotImplementedError

    def evaluator(self):
        """Incremental union/cut state for selection loops."""
        raise NotImplementedError

    def to_json_dict(self) -> dict:
        raise NotImplementedError


class CoverageInstance(SubmodularInstance):
    monotone = True

    def __init__(self, sets, universe, weights=None):
        super().__init__()
        self.universe = int(universe)
        if self.universe < 0:
            raise InputError("universe size must be >= 0")
        self.n = len(sets)
        self.weights = None
        if weights is not None:
            weights = [int(w) for w in weights]
            if len(weights) != self.universe:
                raise InputError("weights length must equal universe size")
            if any(w < 0 or w > 2**30 for w in weights):
                raise InputError("element weights must be integers in [0, 2^30]")
            self.weights = tuple(weights)
        self.kind = "coverage" if self.weights is None else "weighted-coverage"
        masks = []
        elems = []
        for es in sets:
            es = sorted(set(int(e) for e in es))
            if es and (es[0] < 0 or es[-1] >= self.universe):
                raise InputError("element out of universe range")
            m = 0
            for e in es:
                m |= 1 << e
            masks.append(m)
            elems.append(tuple(es))
        self.masks = tuple(masks)
        self.element_sets = tuple(elems)

    def _mask_weight(self, mask) -> float:
        if self.weights is None:
            return float(mask.bit_count())
        return float(sum(self.weights[e] for e in _iter_bits(mask)))

    def _value(self, s) -> float:
        m = 0
        for x in s:
            m |= self.masks[x]
        return self._mask_weight(m)

    def evaluator(self):
        return _CoverageState(self)

    def to_json_dict(self):
        d = {
            "kind": "coverage",
            "universe": self.universe,
            "sets": [list(es) for es in self.element_sets],
        }
        if self.weights is not None:
            d["weights"] = list(self.weights)
        return d


class _CoverageState:
    """Incremental union state; gain(x) costs one AND-free OR + popcount."""

    __slots__ = ("inst", "covered", "covered_count", "value", "items")

    def __init__(self, inst):
        self.inst = inst
        self.covered = 0
        self.covered_count = 0
        self.value = 0.0
        self.items = set()

    def gain(self, x) -> float:
        self.inst.stats.marginal_calls += 1
        if x in self.items:
            return 0.0
        inst = self.inst
        if inst.weights is None:
            return float((inst.masks[x] | self.covered).bit_count()
                         - self.covered_count)
        new = inst.masks[x] & ~self.covered
        return inst._mask_weight(new)

    def add(self, x) -> float:
        g = self.gain(x)
        self.covered |= self.inst.masks[x]
        self.covered_count = self.covered.bit_count()
        self.value += g
        self.items.add(x)
        return g


class CutInstance(SubmodularInstance):
    monotone = False

    def __init__(self, n, arcs):
        super().__init__()
        self.n = int(n)
        if self.n < 0:
            raise InputError("node count must be >= 0")
        w = np.zeros((self.n, self.n), dtype=np.float64)
        canon = []
        for a, b, wt in arcs:
            a, b, wt = int(a), int(b), int(wt)
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise InputError("arc endpoint out of range")
            if a == b:
                raise InputError("self-loops not allowed")
            if wt < 0 or wt > 2**30:
                raise InputError("arc weights must be integers in [0, 2^30]")
            w[a, b] += wt
            canon.append((a, b, wt))
        self.w = w
        self.arcs = tuple(sorted(canon))
        self.kind = "directed-cut"

    def _value(self, s) -> float:
        if not s:
            return 0.0
        inside = np.zeros(self.n, dtype=bool)
        inside[list(s)] = True
        return float(self.w[inside][:, ~inside].sum())

    def evaluator(self):
        return _CutState(self)

    def to_json_dict(self):
        return {"kind": "cut", "n": self.n, "arcs": [list(a) for a in self.arcs]}


class _CutState:
    __slots__ = ("inst", "inside", "value", "items")

    def __init__(self, inst):
        self.inst = inst
        self.inside = np.zeros(inst.n, dtype=bool)
        self.value = 0.0
        self.items = set()

    def gain(self, x) -> float:
        self.inst.stats.marginal_calls += 1
        if x in self.items:
            return 0.0
        w = self.inst.w
        outside = ~self.inside
        outside_x = outside.copy()
        outside_x[x] = False
        gained = float(w[x][outside_x].sum())
        lost = float(w[:, x][self.inside].sum())
        return gained - lost

    def add(self, x) -> float:
        g = self.gain(x)
        self.inside[x] = True
        self.value += g
        self.items.add(x)
        return g


def value(instance, s) -> float:
    return instance.value(s)


def marginal(instance, x, s) -> float:
    return instance.marginal(x, s)


BRUTE_FORCE_GROUND_LIMIT = 30
BRUTE_FORCE_COMB_LIMIT = 10**7


def brute_force_best_k(instance, ground, k):
    """Exact maximizer of f over subsets of `ground` of size <= k.

    Ties broken by lexicographically smallest id sequence (shorter sequences
    compare smaller when they are a prefix).
    """
    ground = sorted(set(ground))
    instance._check_set(ground)
    if k < 0:
        raise InputError("k must be >= 0")
    g = len(ground)
    kk = min(k, g)
    if g > BRUTE_FORCE_GROUND_LIMIT and math.comb(g, kk) > BRUTE_FORCE_COMB_LIMIT:
        raise CapacityError(
            f"enumeration guard exceeded: |ground|={g}, k={kk}")
    best_tuple = ()
    best_val = instance.value(())
    for r in range(1, kk + 1):
        for combo in combinations(ground, r):
            v = instance.value(combo)
            if v > best_val or (v == best_val and combo < best_tuple):
                best_val = v
                best_tuple = combo
    return set(best_tuple), best_val


def instance_to_json(instance) -> str:
    return json.dumps(instance.to_json_dict(), sort_keys=True,
                      separators=(",", ":")) + "\n"


def instance_from_json_dict(d) -> SubmodularInstance:
    kind = d.get("kind")
    if kind == "coverage":
        return CoverageInstance(d["sets"], d["universe"], d.get("weights"))
    if kind == "cut":
        return CutInstance(d["n"], d["arcs"])
    raise InputError(f"unknown instance kind {kind!r}")


def instance_from_json(text) -> SubmodularInstance:
    return instance_from_json_dict(json.loads(text))


def save_instance(instance, path):
    from .ioutil import atomic_write_text
    atomic_write_text(path, instance_to_json(instance))


def load_instance(path) -> SubmodularInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_json(fh.read())
