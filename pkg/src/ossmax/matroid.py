"""Matroids over the ground set {0, ..., n-1}.

Every matroid exposes an independence oracle; rank, the greedy linear
maximization oracle, basis extension and exchange pairs are built on top of it.
Sets are passed around as ``frozenset`` of element indices.
"""

from __future__ import annotations

import itertools
from collections import deque
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class MatroidError(ValueError):
    pass


class ExchangePairNotFound(MatroidError):
    """Raised when two bases admit no symmetric exchange (input is not a matroid)."""


class UnionFind:
    """Disjoint-set forest over 0..size-1 with path halving and union by size."""

    def __init__(self, size: int):
        self._parent = list(range(size))
        self._size = [1] * size

    def find(self, a: int) -> int:
        parent = self._parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        """Merge the sets holding a and b; False if they were already joined."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self._size[ra] < self._size[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        self._size[ra] += self._size[rb]
        return True


class Matroid:
    """Base class. Subclasses implement ``_independent`` on validated frozensets."""

    n: int

    def _independent(self, s: frozenset[int]) -> bool:
        raise NotImplementedError

    def _check(self, s: Iterable[int]) -> frozenset[int]:
        s = frozenset(int(e) for e in s)
        for e in s:
            if e < 0 or e >= self.n:
                raise MatroidError(f"element {e} outside ground set of size {self.n}")
        return s

    def is_independent(self, s: Iterable[int]) -> bool:
        return self._independent(self._check(s))

    def rank(self, s: Iterable[int]) -> int:
        """Size of a maximum independent subset of ``s``."""
        s = self._check(s)
        current: set[int] = set()
        for e in sorted(s):
            current.add(e)
            if not self._independent(frozenset(current)):
                current.discard(e)
        return len(current)

    @cached_property
    def r(self) -> int:
        return self.rank(range(self.n))

    @cached_property
    def c(self) -> int | None:
        """Minimum circuit size, or None when the matroid has no circuit."""
        return self._min_circuit_size()

    def _min_circuit_size(self) -> int | None:
        return _exhaustive_min_circuit(self)

    def ground(self) -> frozenset[int]:
        return frozenset(range(self.n))

    def is_basis(self, s: Iterable[int]) -> bool:
        s = self._check(s)
        return len(s) == self.r and self._independent(s)

    def to_spec(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.to_spec() == other.to_spec()

    def __hash__(self):
        return hash(repr(self.to_spec()))


class Uniform(Matroid):
    def __init__(self, n: int, r: int):
        if n < 1 or r < 0:
            raise MatroidError("uniform matroid needs n >= 1 and r >= 0")
        self.n = int(n)
        self._r = min(int(r), self.n)

    def _independent(self, s):
        return len(s) <= self._r

    def rank(self, s):
        return min(len(self._check(s)), self._r)

    def _min_circuit_size(self):
        return self._r + 1 if self.n > self._r else None

    def to_spec(self):
        return {"type": "uniform", "n": self.n, "r": self._r}

    def __repr__(self):
        return f"Uniform({self.n}, {self._r})"


class Partition(Matroid):
    """Blocks must partition the ground set 0..n-1; each block has a capacity."""

    def __init__(self, blocks: Sequence[tuple[Iterable[int], int]]):
        self.blocks = tuple((tuple(sorted(int(e) for e in elems)), int(cap)) for elems, cap in blocks)
        members = [e for elems, _ in self.blocks for e in elems]
        self.n = len(members)
        if self.n < 1 or sorted(members) != list(range(self.n)):
            raise MatroidError("partition blocks must cover 0..n-1 exactly once")
        if any(cap < 0 for _, cap in self.blocks):
            raise MatroidError("block capacities must be non-negative")
        self._block_of = np.empty(self.n, dtype=int)
        for idx, (elems, _) in enumerate(self.blocks):
            self._block_of[list(elems)] = idx

    def _independent(self, s):
        counts = [0] * len(self.blocks)
        for e in s:
            b = self._block_of[e]
            counts[b] += 1
            if counts[b] > self.blocks[b][1]:
                return False
        return True

    def rank(self, s):
        s = self._check(s)
        counts = [0] * len(self.blocks)
        for e in s:
            counts[self._block_of[e]] += 1
        return sum(min(k, cap) for k, (_, cap) in zip(counts, self.blocks))

    def _min_circuit_size(self):
        sizes = [cap + 1 for elems, cap in self.blocks if len(elems) > cap]
        return min(sizes) if sizes else None

    def to_spec(self):
        return {
            "type": "partition",
            "blocks": [{"elements": list(elems), "capacity": cap} for elems, cap in self.blocks],
        }

    def __repr__(self):
        return f"Partition({list(self.blocks)})"


class Graphic(Matroid):
    """Cycle matroid of a multigraph; element i is the i-th edge."""

    def __init__(self, vertices: int, edges: Sequence[tuple[int, int]]):
        self.vertices = int(vertices)
        self.edges = tuple((int(u), int(v)) for u, v in edges)
        self.n = len(self.edges)
        if self.n < 1:
            raise MatroidError("graphic matroid needs at least one edge")
        for u, v in self.edges:
            if not (0 <= u < self.vertices and 0 <= v < self.vertices):
                raise MatroidError(f"edge ({u}, {v}) has an endpoint outside 0..{self.vertices - 1}")

    def _independent(self, s):
        uf = UnionFind(self.vertices)
        for e in s:
            u, v = self.edges[e]
            if not uf.union(u, v):
                return False
        return True

    def _min_circuit_size(self):
        # girth: for each edge, shortest u-v path avoiding that edge
        best = None
        adjacency: list[list[tuple[int, int]]] = [[] for _ in range(self.vertices)]
        for idx, (u, v) in enumerate(self.edges):
            if u == v:
                return 1
            adjacency[u].append((v, idx))
            adjacency[v].append((u, idx))
        for idx, (u, v) in enumerate(self.edges):
            dist = _bfs_distance(adjacency, u, v, skip_edge=idx)
            if dist is not None and (best is None or dist + 1 < best):
                best = dist + 1
        return best

    def to_spec(self):
        return {"type": "graphic", "vertices": self.vertices, "edges": [list(e) for e in self.edges]}

    def __repr__(self):
        return f"Graphic({self.vertices}, {list(self.edges)})"


def _bfs_distance(adjacency, source, target, skip_edge):
    seen = {source: 0}
    queue = deque([source])
    while queue:
        a = queue.popleft()
        for b, idx in adjacency[a]:
            if idx == skip_edge or b in seen:
                continue
            seen[b] = seen[a] + 1
            if b == target:
                return seen[b]
            queue.append(b)
    return None


class PairedCircuit(Matroid):
    """Ground set of 2k elements grouped into pairs {2i, 2i+1}.

    A set is independent iff it fully contains at most t-1 of the pairs, so the
    circuits are exactly the unions of t pairs: rank k+t-1 and girth 2t.
    """

    def __init__(self, k: int, t: int):
        if not 1 <= t <= k:
            raise MatroidError("paired-circuit matroid needs 1 <= t <= k")
        self.k, self.t = int(k), int(t)
        self.n = 2 * self.k

    def _independent(self, s):
        full = sum(1 for i in range(self.k) if 2 * i in s and 2 * i + 1 in s)
        return full <= self.t - 1

    def rank(self, s):
        s = self._check(s)
        full = sum(1 for i in range(self.k) if 2 * i in s and 2 * i + 1 in s)
        return len(s) - max(0, full - (self.t - 1))

    def _min_circuit_size(self):
        return 2 * self.t

    def pairs(self) -> list[frozenset[int]]:
        return [frozenset((2 * i, 2 * i + 1)) for i in range(self.k)]

    def to_spec(self):
        return {"type": "paired", "k": self.k, "t": self.t}

    def __repr__(self):
        return f"PairedCircuit({self.k}, {self.t})"


EXPLICIT_MAX_N = 16


class Explicit(Matroid):
    """Matroid given by the complete list of its independent sets (testing only)."""

    def __init__(self, n: int, independent: Iterable[Iterable[int]]):
        if not 1 <= n <= EXPLICIT_MAX_N:
            raise MatroidError(f"explicit matroids are limited to 1 <= n <= {EXPLICIT_MAX_N}")
        self.n = int(n)
        self.independent_sets = frozenset(self._check(s) for s in independent)

    def _independent(self, s):
        return s in self.independent_sets

    def rank(self, s):
        s = self._check(s)
        return max((len(i) for i in self.independent_sets if i <= s), default=0)

    def to_spec(self):
        sets = sorted(sorted(s) for s in self.independent_sets)
        sets.sort(key=lambda s: (len(s), s))
        return {"type": "explicit", "n": self.n, "independent": sets}

    def __repr__(self):
        return f"Explicit({self.n}, {len(self.independent_sets)} sets)"


def matroid_from_spec(spec: dict) -> Matroid:
    kind = spec.get("type")
    if kind == "uniform":
        return Uniform(spec["n"], spec["r"])
    if kind == "partition":
        return Partition([(b["elements"], b["capacity"]) for b in spec["blocks"]])
    if kind == "graphic":
        return Graphic(spec["vertices"], [tuple(e) for e in spec["edges"]])
    if kind == "paired":
        return PairedCircuit(spec["k"], spec["t"])
    if kind == "explicit":
        return Explicit(spec["n"], spec["independent"])
    raise MatroidError(f"unknown matroid type {kind!r}")


def greedy_max_weight(m: Matroid, w: Sequence[float]) -> frozenset[int]:
    """Maximum-weight independent set by the matroid greedy algorithm.

    Only strictly positive weights are considered. Ties are broken by
    ascending element index.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (m.n,):
        raise MatroidError(f"weight vector must have length {m.n}")
    order = sorted((i for i in range(m.n) if w[i] > 0), key=lambda i: (-w[i], i))
    chosen: set[int] = set()
    for i in order:
        chosen.add(i)
        if not m._independent(frozenset(chosen)):
            chosen.discard(i)
    return frozenset(chosen)


def extend_to_basis(m: Matroid, s: Iterable[int], pool: Iterable[int] | None = None) -> frozenset[int]:
    """Augment independent ``s`` with elements of ``pool`` (default: everything), lowest index first."""
    s = m._check(s)
    if not m._independent(s):
        raise MatroidError("cannot extend a dependent set")
    candidates = range(m.n) if pool is None else sorted(m._check(pool))
    current = set(s)
    for e in candidates:
        if e in current:
            continue
        current.add(e)
        if not m._independent(frozenset(current)):
            current.discard(e)
    return frozenset(current)


def find_exchange_pair(m: Matroid, first: Iterable[int], second: Iterable[int]) -> tuple[int, int]:
    """First (i, j) in ascending scan order with first-i+j and second-j+i both independent."""
    first, second = m._check(first), m._check(second)
    if first == second:
        raise MatroidError("bases are identical; nothing to exchange")
    for i in sorted(first - second):
        for j in sorted(second - first):
            if m._independent((first - {i}) | {j}) and m._independent((second - {j}) | {i}):
                return i, j
    raise ExchangePairNotFound(f"no symmetric exchange between {sorted(first)} and {sorted(second)}")


AXIOM_CHECK_MAX_N = 12


def _independence_table(m: Matroid) -> bytearray:
    table = bytearray(1 << m.n)
    for mask in range(1 << m.n):
        s = frozenset(i for i in range(m.n) if mask >> i & 1)
        table[mask] = 1 if m._independent(s) else 0
    return table


def verify_matroid_axioms(m: Matroid) -> bool:
    """Exhaustively check non-emptiness, heredity and the exchange property.

    Exchange is checked in its equivalent closure form: for every independent
    I, the set I plus all elements that cannot be added to I has rank |I|.
    """
    if m.n > AXIOM_CHECK_MAX_N:
        raise MatroidError(f"axiom check limited to n <= {AXIOM_CHECK_MAX_N}")
    n = m.n
    indep = _independence_table(m)
    if not indep[0]:
        return False
    for mask in range(1, 1 << n):
        if indep[mask]:
            for i in range(n):
                if mask >> i & 1 and not indep[mask & ~(1 << i)]:
                    return False
    size = [bin(mask).count("1") for mask in range(1 << n)]
    rank = [0] * (1 << n)
    for mask in range(1, 1 << n):
        if indep[mask]:
            rank[mask] = size[mask]
        else:
            rank[mask] = max(rank[mask & ~(1 << i)] for i in range(n) if mask >> i & 1)
    for mask in range(1 << n):
        if not indep[mask]:
            continue
        closure = mask
        for i in range(n):
            if not mask >> i & 1 and not indep[mask | 1 << i]:
                closure |= 1 << i
        if rank[closure] != size[mask]:
            return False
    return True


def _exhaustive_min_circuit(m: Matroid) -> int | None:
    if m.n > EXPLICIT_MAX_N:
        raise MatroidError(f"exhaustive circuit search limited to n <= {EXPLICIT_MAX_N}")
    for size in range(1, m.n + 1):
        for combo in itertools.combinations(range(m.n), size):
            s = frozenset(combo)
            if m._independent(s):
                continue
            if all(m._independent(s - {e}) for e in s):
                return size
    return None


def min_circuit_size(m: Matroid) -> int | None:
    return m.c


def independent_sets(m: Matroid) -> list[frozenset[int]]:
    """All independent sets by depth-first extension in index order (n <= 16)."""
    if m.n > EXPLICIT_MAX_N:
        raise MatroidError(f"enumeration limited to n <= {EXPLICIT_MAX_N}")
    out: list[frozenset[int]] = []

    def extend(current: frozenset[int], start: int):
        out.append(current)
        for e in range(start, m.n):
            nxt = current | {e}
            if m._independent(nxt):
                extend(nxt, e + 1)

    extend(frozenset(), 0)
    return out


def bases(m: Matroid) -> list[frozenset[int]]:
    """All bases, by scanning r-subsets in lexicographic order."""
    if m.n > EXPLICIT_MAX_N:
        raise MatroidError(f"enumeration limited to n <= {EXPLICIT_MAX_N}")
    return [frozenset(c) for c in itertools.combinations(range(m.n), m.r) if m._independent(frozenset(c))]


def in_matroid_polytope(m: Matroid, x: Sequence[float], atol: float = 1e-9) -> bool:
    """Check 0 <= x and x(S) <= rank(S) for every subset S (n <= 16)."""
    x = np.asarray(x, dtype=float)
    if m.n > EXPLICIT_MAX_N:
        raise MatroidError(f"polytope check limited to n <= {EXPLICIT_MAX_N}")
    if np.any(x < -atol):
        return False
    for mask in range(1, 1 << m.n):
        members = [i for i in range(m.n) if mask >> i & 1]
        if x[members].sum() > m.rank(members) + atol:
            return False
    return True
