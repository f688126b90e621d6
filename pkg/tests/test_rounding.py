import numpy as np
import pytest

from ossmax.instances import gen_gap_instance, random_diversity, random_matroid
from ossmax.matroid import Graphic, Uniform, greedy_max_weight
from ossmax.objective import QuadraticObjective, estimate_sigma
from ossmax.rounding import (
    CircuitTooSmall,
    RoundingError,
    build_quadratic_coverage,
    decompose_point,
    family_point,
    merge_bases,
    round_best,
    round_by_coverage,
    saturate_to_bases,
    swap_round,
)


def random_family(m, rng, pieces=None):
    pieces = pieces or int(rng.integers(1, 5))
    weights = rng.dirichlet(np.ones(pieces))
    return saturate_to_bases(m, [(float(w), greedy_max_weight(m, rng.random(m.n) + 1e-3)) for w in weights])


def coverage_sums(cov, n):
    """Direct pair and singleton sums, one entry at a time."""
    pairs = np.zeros((n, n))
    singles = np.zeros(n)
    for w, s in cov.entries:
        for u in s:
            singles[u] += w
            for v in s:
                if u != v:
                    pairs[u, v] += w
    return pairs, singles


def test_saturate_examples():
    assert saturate_to_bases(Uniform(4, 2), [(1.0, set())]) == [(1.0, frozenset({0, 1}))]
    fam = [(0.5, frozenset({0, 1})), (0.5, frozenset({0, 1}))]
    assert saturate_to_bases(Uniform(4, 2), fam) == [(1.0, frozenset({0, 1}))]
    with pytest.raises(ValueError):
        saturate_to_bases(Uniform(4, 2), [(1.0, {0, 1, 2})])


def test_saturate_increases_value():
    rng = np.random.default_rng(0)
    for _ in range(30):
        m = random_matroid("graphic", 8, rng)
        q = random_diversity("metric", m.n, rng)
        w = rng.dirichlet(np.ones(3))
        fam = []
        for wi in w:
            s = greedy_max_weight(m, rng.random(m.n) - 0.5)
            fam.append((float(wi), s))
        out = saturate_to_bases(m, fam)
        x0, x1 = family_point(m.n, fam), family_point(m.n, out)
        assert np.all(x1 >= x0 - 1e-12)
        assert q.value(x1) >= q.value(x0) - 1e-12


def test_coverage_single_basis():
    m = Uniform(4, 2)
    cov = build_quadratic_coverage(m, [(1.0, {0, 1})])
    assert cov.entries == [(1.0, frozenset({0, 1}))]
    assert cov.total_weight == 1.0


def test_coverage_uniform_two_disjoint_bases():
    m = Uniform(4, 2)
    cov = build_quadratic_coverage(m, [(0.5, {0, 1}), (0.5, {2, 3})])
    x = np.full(4, 0.5)
    pairs, singles = coverage_sums(cov, 4)
    off = ~np.eye(4, dtype=bool)
    assert np.all(pairs[off] >= np.outer(x, x)[off] - 1e-9)
    assert np.all(singles >= x - 1e-9)
    assert cov.total_weight <= 7 + 1e-9
    # chunks {2} and {3}, each augmented from {0, 1}
    assert [sorted(s) for _, s in cov.entries[2:]] == [[0, 2], [1, 2], [0, 3], [1, 3]]


def test_coverage_needs_circuit_size_three():
    m = Graphic(2, [(0, 1), (0, 1), (0, 1)])
    with pytest.raises(CircuitTooSmall):
        build_quadratic_coverage(m, [(1.0, {0})])
    with pytest.raises(CircuitTooSmall):
        build_quadratic_coverage(Uniform(3, 3), [(1.0, {0, 1, 2})])


@pytest.mark.parametrize("family", ["uniform", "partition", "graphic", "paired"])
def test_coverage_random(family):
    rng = np.random.default_rng(["uniform", "partition", "graphic", "paired"].index(family))
    done = 0
    while done < 10:
        m = random_matroid(family, int(rng.integers(5, 12)), rng)
        if m.c is None or m.c < 3:
            continue
        fam = random_family(m, rng)
        cov = build_quadratic_coverage(m, fam)
        x = family_point(m.n, fam)
        pairs, singles = coverage_sums(cov, m.n)
        off = ~np.eye(m.n, dtype=bool)
        assert np.all(pairs[off] >= np.outer(x, x)[off] - 1e-9)
        assert np.all(singles >= x - 1e-9)
        assert cov.total_weight <= 3 + 2 * m.r / (m.c - 2) + 1e-9
        assert cov.max_leftover <= (m.c - 1) // 2
        assert all(m.is_independent(s) for _, s in cov.entries)
        q = random_diversity("negtype", m.n, rng)
        res = round_by_coverage(q, cov)
        assert res.value * (3 + 2 * m.r / (m.c - 2)) >= q.value(x) - 1e-9
        assert res.details["weightedValue"] >= q.value(x) - 1e-9
        done += 1


def test_coverage_integral_point():
    m = Uniform(5, 3)
    q = random_diversity("metric", 5, np.random.default_rng(1))
    res = round_by_coverage(q, build_quadratic_coverage(m, [(1.0, {1, 2, 4})]))
    assert res.set == {1, 2, 4}
    assert res.value == pytest.approx(res.fractional_value)


def test_coverage_rejects_non_diversity():
    q = QuadraticObjective([[0, -1, 0], [-1, 0, 0], [0, 0, 0]])
    cov = build_quadratic_coverage(Uniform(3, 2), [(1.0, {0, 1})])
    with pytest.raises(RoundingError):
        round_by_coverage(q, cov)


def test_merge_identical():
    q = random_diversity("metric", 4, np.random.default_rng(2))
    res = merge_bases(q, Uniform(4, 2), [frozenset({0, 1}), frozenset({0, 1})], [0.5, 0.5])
    assert res.merged == {0, 1} and res.matching == []


def test_merge_tie_keeps_first_basis_element():
    A = np.full((4, 4), 0.1)
    np.fill_diagonal(A, 0)
    res = merge_bases(QuadraticObjective(A), Uniform(4, 2), [frozenset({0, 1}), frozenset({2, 3})], [0.5, 0.5])
    assert res.merged == {0, 1}


def test_merge_keeps_heavy_elements():
    A = np.full((4, 4), 0.1)
    A[2, 3] = A[3, 2] = 50.0
    np.fill_diagonal(A, 0)
    q = QuadraticObjective(A)
    m = Uniform(4, 2)
    res = merge_bases(q, m, [frozenset({0, 1}), frozenset({2, 3})], [0.5, 0.5])
    # (0, 2): 2 gains 0.5 * 50 through 3, so I1 takes it; then (1, 3) likewise
    assert res.matching == [(0, 2), (1, 3)]
    assert res.merged == {2, 3}
    assert len(res.matching) == 2
    assert res.worst_step_gap <= 1e-9


def test_merge_step_inequality_by_hand():
    rng = np.random.default_rng(3)
    q = random_diversity("powered", 6, rng)
    m = Uniform(6, 3)
    I1, I2 = frozenset({0, 1, 2}), frozenset({3, 4, 5})
    l1, l2 = 0.3, 0.7
    res = merge_bases(q, m, [I1, I2], [l1, l2])
    a, b = set(I1), set(I2)
    for i, j in res.matching:
        before = q.value(l1 * np.isin(range(6), list(a)) + l2 * np.isin(range(6), list(b)))
        gain_i = q.b[i] + l1 * sum(q.A[i, e] for e in a - {i}) + l2 * sum(q.A[i, e] for e in b - {j})
        gain_j = q.b[j] + l1 * sum(q.A[j, e] for e in a - {i}) + l2 * sum(q.A[j, e] for e in b - {j})
        if gain_i >= gain_j:
            b = (b - {j}) | {i}
        else:
            a = (a - {i}) | {j}
        after = q.value(l1 * np.isin(range(6), list(a)) + l2 * np.isin(range(6), list(b)))
        assert before <= after + l1 * l2 * q.A[i, j] + 1e-9
    assert a == b == set(res.merged)


def test_merge_shrinks_difference_each_step():
    rng = np.random.default_rng(4)
    for _ in range(20):
        m = random_matroid("partition", 9, rng)
        q = random_diversity("metric", m.n, rng)
        I1 = greedy_max_weight(m, rng.random(m.n))
        I2 = greedy_max_weight(m, rng.random(m.n))
        res = merge_bases(q, m, [I1, I2], [0.5, 0.5])
        assert len(res.matching) == len(I1 - I2)


def test_swap_single_basis():
    q = random_diversity("metric", 5, np.random.default_rng(5))
    res = swap_round(q, Uniform(5, 3), [(1.0, {0, 2, 4})], 1.0)
    assert res.set == {0, 2, 4}
    assert res.value == pytest.approx(res.fractional_value)


def test_swap_two_disjoint_bases_uniform():
    rng = np.random.default_rng(6)
    q = random_diversity("negtype", 4, rng)
    sigma = estimate_sigma(q.A).oss_sigma
    res = swap_round(q, Uniform(4, 2), [(0.5, {0, 1}), (0.5, {2, 3})], sigma)
    assert res.certificate == pytest.approx(3 + 2 * sigma)
    assert res.value * res.certificate >= res.fractional_value - 1e-9


def test_swap_random_runs():
    rng = np.random.default_rng(7)
    for i in range(40):
        m = random_matroid(("uniform", "partition", "graphic", "paired")[i % 4], int(rng.integers(5, 12)), rng)
        if m.r < 2:
            continue
        q = random_diversity(("metric", "negtype", "graph", "powered")[i % 4], m.n, rng)
        sigma = estimate_sigma(q.A).oss_sigma
        fam = random_family(m, rng)
        res = swap_round(q, m, fam, sigma)
        assert m.is_basis(res.set)
        assert res.fractional_value <= (3 + 2 * sigma / (m.r - 1)) * res.value + 1e-9


def test_swap_needs_rank_two():
    q = random_diversity("metric", 3, np.random.default_rng(8))
    with pytest.raises(RoundingError):
        swap_round(q, Uniform(3, 1), [(1.0, {0})], 1.0)


def test_round_best_free_matroid_uses_swap():
    q = random_diversity("metric", 4, np.random.default_rng(9))
    res = round_best(q, Uniform(4, 4), [(1.0, {0, 1, 2, 3})], 1.0)
    assert res.method == "swap"


def test_round_best_uniform_certificate():
    rng = np.random.default_rng(10)
    m = Uniform(8, 4)
    q = random_diversity("graph", 8, rng)
    sigma = estimate_sigma(q.A).oss_sigma
    fam = random_family(m, rng, pieces=3)
    res = round_best(q, m, fam, sigma)
    assert res.certificate <= min(3 + 2 * 4 / 3, 3 + 2 * sigma / 3) + 1e-12
    assert res.value * res.certificate >= res.fractional_value - 1e-9


def test_round_best_nothing_applies():
    q = random_diversity("metric", 3, np.random.default_rng(11))
    with pytest.raises(RoundingError):
        round_best(q, Uniform(3, 1), [(1.0, {0})], 1.0)


def test_gap_instance_rounding():
    gap = gen_gap_instance(4, 2, 16.0)
    m = gap.matroid
    fam = decompose_point(m, gap.fractional_point())
    fam = saturate_to_bases(m, fam)
    res = round_best(gap.objective, m, fam, estimate_sigma(gap.objective.A).oss_sigma)
    assert res.value >= gap.objective.value(gap.fractional_point()) / res.certificate - 1e-9


def test_decompose_point_round_trip():
    rng = np.random.default_rng(12)
    m = random_matroid("graphic", 7, rng)
    fam = [(float(w), greedy_max_weight(m, rng.random(m.n))) for w in rng.dirichlet(np.ones(3))]
    x = family_point(m.n, fam)
    out = decompose_point(m, x)
    np.testing.assert_allclose(family_point(m.n, out), x, atol=1e-8)
    assert sum(w for w, _ in out) == pytest.approx(1, abs=1e-8)
    with pytest.raises(RoundingError):
        decompose_point(Uniform(3, 1), [0.9, 0.9, 0.0])
