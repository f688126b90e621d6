"""Rounding fractional matroid points, given as convex combinations of independent sets.

Two procedures are provided. Coverage rounding builds a weighted family of
independent sets whose pair and singleton weights dominate x(u)x(v) and x(v),
then returns its best member. Swap rounding merges the bases pairwise through
exchange pairs, choosing each swap by weighted marginal value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import nnls

from .matroid import (
    Matroid,
    MatroidError,
    extend_to_basis,
    find_exchange_pair,
    independent_sets,
)
from .objective import QuadraticObjective
from .tolerances import INEQUALITY_ATOL, NEGLIGIBLE_WEIGHT, WEIGHT_SUM_ATOL

# (weight, set) pairs; weights are non-negative
WeightedSetFamily = list[tuple[float, frozenset[int]]]


class RoundingError(ValueError):
    pass


class CircuitTooSmall(RoundingError):
    pass


class CoverageConditionViolated(RoundingError):
    pass


class MergeStepViolated(RoundingError):
    pass


def normalize_family(family: Iterable[tuple[float, Iterable[int]]]) -> WeightedSetFamily:
    out = []
    for w, s in family:
        w = float(w)
        if w < 0:
            raise RoundingError(f"negative weight {w}")
        out.append((w, frozenset(int(e) for e in s)))
    if not out:
        raise RoundingError("empty family")
    return out


def family_point(n: int, family: WeightedSetFamily) -> np.ndarray:
    x = np.zeros(n)
    for w, s in family:
        x[list(s)] += w
    return x


def merge_duplicates(family: WeightedSetFamily) -> WeightedSetFamily:
    """Sum the weights of repeated sets, keeping first-occurrence order."""
    merged: dict[frozenset[int], float] = {}
    for w, s in family:
        merged[s] = merged.get(s, 0.0) + w
    return [(w, s) for s, w in merged.items()]


def _check_convex(family: WeightedSetFamily):
    total = sum(w for w, _ in family)
    if abs(total - 1) > WEIGHT_SUM_ATOL:
        raise RoundingError(f"weights sum to {total}, expected 1")


def saturate_to_bases(m: Matroid, family) -> WeightedSetFamily:
    """Extend every set to a basis (lowest index first) and merge duplicates."""
    family = normalize_family(family)
    _check_convex(family)
    out = []
    for w, s in family:
        if not m.is_independent(s):
            raise MatroidError(f"set {sorted(s)} is dependent")
        out.append((w, extend_to_basis(m, s)))
    return merge_duplicates(out)


def check_basis_family(m: Matroid, family: WeightedSetFamily):
    _check_convex(family)
    for _, s in family:
        if not m.is_basis(s):
            raise RoundingError(f"set {sorted(s)} is not a basis")


@dataclass
class QuadraticCoverage:
    entries: WeightedSetFamily
    source_point: np.ndarray
    max_leftover: int = 0

    @property
    def total_weight(self) -> float:
        return float(sum(w for w, _ in self.entries))

    def pair_weights(self) -> np.ndarray:
        n = len(self.source_point)
        P = np.zeros((n, n))
        for w, s in self.entries:
            idx = sorted(s)
            P[np.ix_(idx, idx)] += w
        return P

    def singleton_weights(self) -> np.ndarray:
        return family_point(len(self.source_point), self.entries)

    def condition_violations(self) -> tuple[float, float]:
        """Worst shortfall of pair coverage below x(u)x(v) and of singleton coverage below x(v)."""
        x = self.source_point
        P = self.pair_weights()
        need = np.outer(x, x)
        off = ~np.eye(len(x), dtype=bool)
        pair_gap = float(np.max((need - P)[off], initial=0.0))
        single_gap = float(np.max(x - self.singleton_weights(), initial=0.0))
        return pair_gap, single_gap


def coverage_size_bound(r: int, c: int) -> float:
    return 3 + 2 * r / (c - 2)


def build_quadratic_coverage(m: Matroid, family) -> QuadraticCoverage:
    family = normalize_family(family)
    check_basis_family(m, family)
    c = m.c
    if c is None or c < 3:
        raise CircuitTooSmall(f"coverage rounding needs minimum circuit size >= 3, got {c}")
    t = (c - 1) // 2
    family = merge_duplicates(family)
    entries: WeightedSetFamily = [(w * w, s) for w, s in family]
    max_leftover = 0
    for a in range(len(family)):
        for b in range(a + 1, len(family)):
            la, Bi = family[a]
            lb, Bj = family[b]
            if min(la, lb) < NEGLIGIBLE_WEIGHT:
                continue
            w = la * lb
            if Bi & Bj:
                entries.append((w, Bi))
                entries.append((w, Bj))
            only_i = Bi - Bj
            only_j = sorted(Bj - Bi)
            for start in range(0, len(only_j), t):
                chunk = frozenset(only_j[start:start + t])
                R = extend_to_basis(m, chunk, pool=only_i)
                Z = only_i - R
                if len(Z) > t:
                    raise CoverageConditionViolated(f"augmentation left {len(Z)} > {t} elements uncovered")
                max_leftover = max(max_leftover, len(Z))
                entries.append((w, R))
                entries.append((w, Z | chunk))
    cov = QuadraticCoverage(entries, family_point(m.n, family), max_leftover)
    for _, s in entries:
        if not m.is_independent(s):
            raise CoverageConditionViolated(f"coverage set {sorted(s)} is dependent")
    pair_gap, single_gap = cov.condition_violations()
    if pair_gap > INEQUALITY_ATOL or single_gap > INEQUALITY_ATOL:
        raise CoverageConditionViolated(f"pair shortfall {pair_gap:.3e}, singleton shortfall {single_gap:.3e}")
    if cov.total_weight > coverage_size_bound(m.r, c) + INEQUALITY_ATOL:
        raise CoverageConditionViolated(f"total weight {cov.total_weight} exceeds {coverage_size_bound(m.r, c)}")
    return cov


@dataclass
class RoundingResult:
    set: frozenset[int]
    method: str
    value: float
    fractional_value: float
    certificate: float
    details: dict = field(default_factory=dict)


def _require_diversity(q):
    if not getattr(q, "is_diversity", False):
        raise RoundingError("rounding guarantees need a non-negative A and b")


def round_by_coverage(q: QuadraticObjective, cov: QuadraticCoverage) -> RoundingResult:
    _require_diversity(q)
    best_val, best = -np.inf, None
    weighted = 0.0
    for w, s in cov.entries:
        v = q.eval_set(s)
        weighted += w * v
        if v > best_val:
            best_val, best = v, s
    return RoundingResult(
        best,
        "coverage",
        best_val,
        q.value(cov.source_point),
        cov.total_weight,
        {"weightedValue": weighted, "entries": len(cov.entries), "maxLeftover": cov.max_leftover},
    )


def _set_weights(A: np.ndarray, s: Iterable[int]) -> np.ndarray:
    """A(e, s) for every element e."""
    idx = list(s)
    return A[:, idx].sum(axis=1) if idx else np.zeros(A.shape[0])


@dataclass
class MergeResult:
    merged: frozenset[int]
    matching: list[tuple[int, int]]
    worst_step_gap: float


def merge_bases(
    q: QuadraticObjective,
    m: Matroid,
    sets: Sequence[frozenset[int]],
    weights: Sequence[float],
) -> MergeResult:
    """Merge the first two bases, treating the rest as fixed context.

    Each exchange (i, j) keeps whichever of i, j has the larger weighted
    marginal; ties keep the element of the first basis.
    """
    if len(sets) < 2 or len(sets) != len(weights):
        raise RoundingError("merging needs at least two sets with matching weights")
    I1, I2 = frozenset(sets[0]), frozenset(sets[1])
    l1, l2 = float(weights[0]), float(weights[1])
    for s in (I1, I2):
        if not m.is_basis(s):
            raise RoundingError(f"set {sorted(s)} is not a basis")
    A, b = q.A, q.b
    context = np.zeros(q.n)
    for w, s in zip(weights[2:], sets[2:]):
        context[list(s)] += w
    context_grad = A @ context

    def point(s1, s2):
        x = context.copy()
        x[list(s1)] += l1
        x[list(s2)] += l2
        return x

    matching = []
    worst = -np.inf
    value = q.value(point(I1, I2))
    while I1 != I2:
        diff = len(I1 ^ I2)
        i, j = find_exchange_pair(m, I1, I2)
        matching.append((i, j))
        a1 = _set_weights(A, I1 - {i})
        a2 = _set_weights(A, I2 - {j})
        score_i = b[i] + l1 * a1[i] + l2 * a2[i] + context_grad[i]
        score_j = b[j] + l1 * a1[j] + l2 * a2[j] + context_grad[j]
        if score_i >= score_j:
            I2 = (I2 - {j}) | {i}
        else:
            I1 = (I1 - {i}) | {j}
        new_value = q.value(point(I1, I2))
        gap = value - (new_value + l1 * l2 * A[i, j])
        worst = max(worst, gap)
        if gap > INEQUALITY_ATOL:
            raise MergeStepViolated(f"merge step ({i}, {j}) lost {gap:.3e} beyond the pair term")
        if len(I1 ^ I2) >= diff:
            raise RoundingError("symmetric difference did not shrink")
        value = new_value
    return MergeResult(I1, matching, float(worst) if matching else 0.0)


def swap_certificate(sigma: float, r: int) -> float:
    if r < 2:
        raise RoundingError("swap certificate needs rank >= 2")
    return 3 + 2 * sigma / (r - 1)


def swap_round(q: QuadraticObjective, m: Matroid, family, sigma: float) -> RoundingResult:
    """Sequential merging, then a balanced re-merge of the heaviest matching."""
    _require_diversity(q)
    family = normalize_family(family)
    check_basis_family(m, family)
    cert = swap_certificate(sigma, m.r)
    fractional = q.value(family_point(m.n, family))
    weights = [w for w, _ in family]
    sets = [s for _, s in family]
    p = len(sets)
    if p == 1:
        return RoundingResult(sets[0], "swap", q.eval_set(sets[0]), fractional, cert, {"merges": 0})
    merged = [sets[0]]  # merged[k] is I'_{k+1} in 1-based terms
    cumulative = weights[0]
    matchings = []
    worst = -np.inf
    for k in range(p - 1):
        res = merge_bases(q, m, [merged[k]] + sets[k + 1:], [cumulative] + weights[k + 1:])
        merged.append(res.merged)
        matchings.append(res.matching)
        worst = max(worst, res.worst_step_gap)
        cumulative += weights[k + 1]
    loads = [sum(q.A[i, j] for i, j in M) for M in matchings]
    t = int(np.argmax(loads))
    balanced = merge_bases(q, m, [merged[t], sets[t + 1]], [0.5, 0.5])
    worst = max(worst, balanced.worst_step_gap)
    last = merged[-1]
    v_star, v_last = q.eval_set(balanced.merged), q.eval_set(last)
    chosen, value = (balanced.merged, v_star) if v_star >= v_last else (last, v_last)
    return RoundingResult(
        chosen,
        "swap",
        value,
        fractional,
        cert,
        {"merges": p - 1, "heaviestMatching": t, "worstStepGap": float(worst), "balancedValue": v_star, "sequentialValue": v_last},
    )


def round_best(q: QuadraticObjective, m: Matroid, family, sigma: float) -> RoundingResult:
    """Run every applicable rounding and keep the better set; ties go to coverage."""
    family = normalize_family(family)
    results = []
    if m.c is not None and m.c >= 3:
        results.append(round_by_coverage(q, build_quadratic_coverage(m, family)))
    if m.r >= 2:
        results.append(swap_round(q, m, family, sigma))
    if not results:
        raise RoundingError(f"no rounding applies (rank {m.r}, minimum circuit size {m.c})")
    best = results[0]
    for res in results[1:]:
        if res.value > best.value:
            best = res
    cert = min(res.certificate for res in results)
    details = {res.method: {"value": res.value, "certificate": res.certificate} for res in results}
    return RoundingResult(best.set, best.method, best.value, best.fractional_value, cert, details)


DECOMPOSE_MAX_N = 12


def decompose_point(m: Matroid, x, atol: float = 1e-9) -> WeightedSetFamily:
    """Write x as a convex combination of independent sets (testing utility, n <= 12).

    Solves a non-negative least-squares problem over all independent sets.
    """
    if m.n > DECOMPOSE_MAX_N:
        raise RoundingError(f"decomposition limited to n <= {DECOMPOSE_MAX_N}")
    x = np.asarray(x, dtype=float)
    sets = independent_sets(m)
    V = np.zeros((m.n + 1, len(sets)))
    for col, s in enumerate(sets):
        V[list(s), col] = 1.0
    V[m.n, :] = 1.0
    target = np.append(x, 1.0)
    weights, resid = nnls(V, target)
    if resid > atol:
        raise RoundingError(f"point is not in the matroid polytope (residual {resid:.3e})")
    return [(float(w), s) for w, s in zip(weights, sets) if w > NEGLIGIBLE_WEIGHT]
