"""Instance generators: hardness constructions with known optima plus random
benchmark families.

Every generator is pure given its seed.  Universe elements and item ids are
shuffled by the seed so that ascending-id tie-breaking is neither
accidentally adversarial nor accidentally helpful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clustering import Clustering
from .oracle import (CapacityError, CoverageInstance, CutInstance, InputError,
                     brute_force_best_k)


@dataclass
class GeneratedInstance:
    instance: object
    opt_value: object          # float, or None when unknown
    opt_set: object            # set of item ids, or None
    fixed_clustering: object = None
    metadata: dict = field(default_factory=dict)


def _shuffle_coverage(element_sets, universe, opt_items, rng, weights=None):
    """Apply random element and item permutations; returns (instance, opt_set)."""
    eperm = rng.permutation(universe)
    iperm = rng.permutation(len(element_sets))
    # iperm[j] = new id of original item j
    new_sets = [None] * len(element_sets)
    for j, es in enumerate(element_sets):
        new_sets[int(iperm[j])] = [int(eperm[e]) for e in es]
    new_weights = None
    if weights is not None:
        new_weights = [0] * universe
        for e, w in enumerate(weights):
            new_weights[int(eperm[e])] = w
    inst = CoverageInstance(new_sets, universe, new_weights)
    opt = None if opt_items is None else {int(iperm[j]) for j in opt_items}
    return inst, opt, iperm


def gen_half_barrier(k, m, C, epsilon, seed=0) -> GeneratedInstance:
    """Coverage family where random composition cannot beat ~1/2.

    Universe k^2+(k-1)^2.  One big set covering the k^2 region, k-1 disjoint
    (k-1)-blocks completing the optimum, and L identical copies of each of k
    "decoy rows" of the big region that bait per-machine greedy.
    """
    if k < 2:
        raise InputError("k must be >= 2")
    if not (1 <= C <= m):
        raise InputError("need 1 <= C <= m")
    if C > math.sqrt(epsilon * m / 2):
        raise InputError("need C <= sqrt(epsilon*m/2)")
    L = math.ceil(m * math.log(2 * C * k / epsilon))
    universe = k * k + (k - 1) * (k - 1)
    sets = []
    sets.append(list(range(k * k)))                       # the big set
    for i in range(k - 1):                                # completions
        lo = k * k + i * (k - 1)
        sets.append(list(range(lo, lo + k - 1)))
    opt_items = list(range(k))
    rows = [list(range(i * k, (i + 1) * k)) for i in range(k)]
    for i in range(k):
        for _ in range(L):
            sets.append(rows[i])
    rng = np.random.default_rng(seed)
    inst, opt_set, _ = _shuffle_coverage(sets, universe, opt_items, rng)
    return GeneratedInstance(
        instance=inst, opt_value=float(universe), opt_set=opt_set,
        metadata={"generator": "half-barrier", "k": k, "m": m, "C": C,
                  "epsilon": epsilon, "L": L, "seed": seed})


def gen_info_theoretic(n, k, ell, seed=0) -> GeneratedInstance:
    """Random partition of a k*ell universe hidden among random ell-subsets."""
    if n <= k:
        raise InputError("need n > k")
    if k < 1 or ell < 1:
        raise InputError("need k >= 1 and ell >= 1")
    universe = k * ell
    rng = np.random.default_rng(seed)
    perm = rng.permutation(universe)
    sets = [sorted(int(e) for e in perm[i * ell:(i + 1) * ell])
            for i in range(k)]
    for _ in range(n - k):
        sets.append(sorted(int(e) for e in
                           rng.choice(universe, size=ell, replace=False)))
    opt_items = list(range(k))
    inst, opt_set, _ = _shuffle_coverage(sets, universe, opt_items, rng)
    return GeneratedInstance(
        instance=inst, opt_value=float(universe), opt_set=opt_set,
        metadata={"generator": "info-theoretic", "n": n, "k": k, "ell": ell,
                  "seed": seed})


def gen_tightness_585(k, epsilon, m, k_prime, seed=0) -> GeneratedInstance:
    """Coverage family on which greedy core-sets land near the 0.5857 ceiling.

    A (k-1) x k3 grid of blocks; rows R_i form the optimum together with one
    big side pool; augmented disjoint column sets X_j (heavily duplicated)
    bait greedy into covering columns plus slices of the pool instead.
    """
    if epsilon <= 0 or k < math.ceil(1.0 / epsilon):
        raise InputError("need k >= ceil(1/epsilon)")
    alpha = math.sqrt(0.5)
    lam = 1.0 - alpha
    k2 = k - 1
    k3 = math.ceil(alpha * k2 / lam)
    blk = math.ceil(alpha / epsilon)

    # extra pool elements consumed by each column set X_j (disjoint slices)
    extras = [max(1, (k3 - k2 - j) * blk + 1) for j in range(k3)]
    pool_needed = sum(extras)
    pool_decl = math.ceil((1 + epsilon) * k * k3 *
                          math.ceil((1 - alpha) / epsilon))
    nb = max(pool_decl, pool_needed)

    grid_total = k2 * k3 * blk
    universe = grid_total + nb + k_prime

    def block_elems(i, j):  # row i in [0,k2), column j in [0,k3)
        base = (i * k3 + j) * blk
        return list(range(base, base + blk))

    pool_lo = grid_total
    z_lo = grid_total + nb

    sets = []
    kinds = []
    sets.append(list(range(pool_lo, pool_lo + nb)))       # big pool item
    kinds.append("pool")
    for i in range(k2):                                   # rows
        row = []
        for j in range(k3):
            row.extend(block_elems(i, j))
        sets.append(row)
        kinds.append("row")
    opt_items = list(range(1 + k2))

    copies = math.ceil(10 * m * math.log(m * k))
    cols = []
    used = 0
    for j in range(k3):
        col = []
        for i in range(k2):
            col.extend(block_elems(i, j))
        col.extend(range(pool_lo + used, pool_lo + used + extras[j]))
        used += extras[j]
        cols.append(col)
    for j in range(k3):
        for _ in range(copies):
            sets.append(cols[j])
            kinds.append("column")
    for z in range(k_prime):
        for _ in range(copies):
            sets.append([z_lo + z])
            kinds.append("singleton")

    rng = np.random.default_rng(seed)
    inst, opt_set, iperm = _shuffle_coverage(sets, universe, opt_items, rng)
    opt_value = float(grid_total + nb)
    meta = {"generator": "tightness-585", "k": k, "epsilon": epsilon, "m": m,
            "k_prime": k_prime, "seed": seed, "k2": k2, "k3": k3,
            "block_size": blk, "pool_size": nb, "copies": copies,
            # one representative (pre-copy) id per column, post-shuffle
            "column_items": [int(iperm[1 + k2 + j * copies])
                             for j in range(k3)],
            "row_items": [int(iperm[1 + i]) for i in range(k2)]}
    return GeneratedInstance(instance=inst, opt_value=opt_value,
                             opt_set=opt_set, metadata=meta)


def gen_small_hard(k, k_prime, seed=0) -> GeneratedInstance:
    """Duplicated-singleton family capping any k'-bounded composition at
    ~sqrt(k'/k) of the optimum."""
    if not (1 <= k_prime <= k):
        raise InputError("need 1 <= k_prime <= k")
    gamma = int(math.isqrt(k_prime * k))
    dup = k // k_prime
    sets = []
    opt_items = []
    for e in range(k - gamma):
        opt_items.append(len(sets))
        sets.append([e])
    for e in range(k - gamma, k):
        opt_items.append(len(sets))
        for _ in range(dup):
            sets.append([e])
    rng = np.random.default_rng(seed)
    inst, opt_set, _ = _shuffle_coverage(sets, k, opt_items, rng)
    return GeneratedInstance(
        instance=inst, opt_value=float(k), opt_set=opt_set,
        metadata={"generator": "small-hard", "k": k, "k_prime": k_prime,
                  "gamma": gamma, "duplication": dup, "seed": seed})


def gen_nonrandomized_hard(k, n, m=2, seed=0) -> GeneratedInstance:
    """Modular f(S) = |S intersect A| with an adversarial fixed clustering
    that puts all of A on one machine."""
    if n <= k:
        raise InputError("need n > k")
    if m < 1:
        raise InputError("need m >= 1")
    sets = [[e] for e in range(k)] + [[] for _ in range(n - k)]
    opt_items = list(range(k))
    rng = np.random.default_rng(seed)
    inst, opt_set, iperm = _shuffle_coverage(sets, k, opt_items, rng)
    assignment = [None] * n
    nxt = 1 % m
    for orig in range(n):
        new_id = int(iperm[orig])
        if orig < k:
            assignment[new_id] = (0,)
        else:
            assignment[new_id] = (nxt,)
            nxt = (nxt + 1) % m
    parts = [[] for _ in range(m)]
    for i, machs in enumerate(assignment):
        parts[machs[0]].append(i)
    fixed = Clustering(m=m, C=1, parts=parts, assignment=assignment)
    return GeneratedInstance(
        instance=inst, opt_value=float(k), opt_set=opt_set,
        fixed_clustering=fixed,
        metadata={"generator": "nonrandomized-hard", "k": k, "n": n, "m": m,
                  "seed": seed})


def _maybe_brute_opt(inst, k):
    if k is None:
        return None, None
    try:
        s, v = brute_force_best_k(inst, range(inst.n), k)
        return v, s
    except CapacityError:
        return None, None


def gen_random_coverage(n, u, density, seed=0, k=None) -> GeneratedInstance:
    if n < 1 or u < 0:
        raise InputError("need n >= 1 and u >= 0")
    if not (0 <= density <= 1):
        raise InputError("density must be in [0,1]")
    rng = np.random.default_rng(seed)
    hits = rng.random((n, u)) < density
    sets = [np.flatnonzero(hits[i]).tolist() for i in range(n)]
    inst = CoverageInstance(sets, u)
    opt_value, opt_set = _maybe_brute_opt(inst, k)
    return GeneratedInstance(
        instance=inst, opt_value=opt_value, opt_set=opt_set,
        metadata={"generator": "random-coverage", "n": n, "u": u,
                  "density": density, "seed": seed, "k": k})


def gen_random_cut(n, arc_prob, seed=0, k=None) -> GeneratedInstance:
    if n < 1:
        raise InputError("need n >= 1")
    if not (0 <= arc_prob <= 1):
        raise InputError("arc_prob must be in [0,1]")
    rng = np.random.default_rng(seed)
    arcs = []
    for a in range(n):
        for b in range(n):
            if a != b and rng.random() < arc_prob:
                arcs.append((a, b, int(rng.integers(1, 9))))
    inst = CutInstance(n, arcs)
    opt_value, opt_set = _maybe_brute_opt(inst, k)
    return GeneratedInstance(
        instance=inst, opt_value=opt_value, opt_set=opt_set,
        metadata={"generator": "random-cut", "n": n, "arc_prob": arc_prob,
                  "seed": seed, "k": k})


GENERATORS = {
    "half-barrier": gen_half_barrier,
    "info-theoretic": gen_info_theoretic,
    "tightness-585": gen_tightness_585,
    "small-hard": gen_small_hard,
    "nonrandomized-hard": gen_nonrandomized_hard,
    "random-coverage": gen_random_coverage,
    "random-cut": gen_random_cut,
}
