"""Random clustering with multiplicity C and streaming block formation.

All randomness is counter-based: item i's machine draws depend only on
(master seed, role string, i, draw counter), never on evaluation order, so a
clustering is identical no matter how many workers build or consume it.

Mixing function: seed_i = H(master_seed, role, i) where H is composed from
the splitmix64 finalizer (Steele et al.) over 64-bit lanes:

    stream(s, role) = mix64(s ^ fnv1a64(role))

and the j-th draw for item i is mix64(stream + 1 + i*1000003 + j).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .oracle import InputError

_MASK64 = (1 << 64) - 1


def mix64(x: int) -> int:
    """splitmix64 finalizer on a 64-bit lane."""
    x &= _MASK64
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for b in text.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & _MASK64
    return h


def _mix64_np(x):
    # vectorized splitmix64 finalizer; uint64 arithmetic wraps by design
    x = x + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


class SeedTree:
    """Derives independent, order-free 64-bit streams from one master seed."""

    def __init__(self, master_seed: int):
        self.master_seed = int(master_seed) & _MASK64

    def derive(self, role: str, index: int = 0) -> int:
        base = mix64(self.master_seed ^ fnv1a64(role))
        return mix64((base + (int(index) & _MASK64)) & _MASK64)

    def draw(self, role: str, index: int, counter: int) -> int:
        return mix64((self.derive(role, index) + 1 + counter) & _MASK64)

    def generator(self, role: str, index: int = 0) -> np.random.Generator:
        return np.random.default_rng(self.derive(role, index))


@dataclass
class Clustering:
    m: int
    C: int
    parts: list          # m lists of item ids, each sorted
    assignment: list     # per item: tuple of C distinct machine indices

    @property
    def n(self):
        return len(self.assignment)


def random_clustering(n: int, m: int, C: int, seeds: SeedTree) -> Clustering:
    """Assign each of n items to C distinct machines uniformly at random."""
    if n < 1:
        raise InputError("n must be >= 1")
    if m < 1:
        raise InputError("m must be >= 1")
    if not (1 <= C <= m):
        raise InputError(f"multiplicity C={C} must satisfy 1 <= C <= m={m}")
    stream = seeds.derive("clustering")
    assignment = [None] * n
    if C == 1:
        ids = np.arange(n, dtype=np.uint64) * np.uint64(1_000_003)
        vals = _mix64_np(np.uint64(stream) + np.uint64(1) + ids)
        machines = (vals % np.uint64(m)).astype(np.int64)
        assignment = [(int(mi),) for mi in machines]
    else:
        for i in range(n):
            chosen = []
            j = 0
            while len(chosen) < C:
                v = mix64((stream + 1 + i * 1_000_003 + j) & _MASK64)
                cand = v % m
                if cand not in chosen:
                    chosen.append(cand)
                j += 1
            assignment[i] = tuple(chosen)
    parts = [[] for _ in range(m)]
    for i, machs in enumerate(assignment):
        for mi in machs:
            parts[mi].append(i)
    return Clustering(m=m, C=C, parts=parts, assignment=assignment)


def stream_blocks(n: int, k: int, seeds: SeedTree) -> list:
    """Uniform random permutation of [0,n) cut into blocks of ceil(sqrt(nk))."""
    if not (n >= k >= 1):
        raise InputError("need n >= k >= 1")
    rng = seeds.generator("stream")
    perm = rng.permutation(n)
    size = int(np.ceil(np.sqrt(n * k)))
    return [perm[i:i + size].tolist() for i in range(0, n, size)]


def clustering_to_csv(clustering: Clustering) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["item_id"] + [f"machine_{j + 1}" for j in range(clustering.C)])
    for i, machs in enumerate(clustering.assignment):
        w.writerow([i] + list(machs))
    return buf.getvalue()


def clustering_from_csv(text: str) -> Clustering:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    C = len(header) - 1
    assignment = [None] * len(body)
    m = 0
    for row in body:
        i = int(row[0])
        machs = tuple(int(v) for v in row[1:])
        assignment[i] = machs
        m = max(m, max(machs) + 1)
    parts = [[] for _ in range(m)]
    for i, machs in enumerate(assignment):
        for mi in machs:
            parts[mi].append(i)
    return Clustering(m=m, C=C, parts=parts, assignment=assignment)
