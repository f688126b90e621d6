import math

import numpy as np
import pytest

from ossmax.greedy import (
    GreedyConfig,
    GreedyError,
    Mode,
    NonMonotoneGradient,
    StepNotDivisible,
    best_alpha,
    bound_general,
    bound_third_order,
    discretization_factor,
    resolve,
    run_jump_start_greedy,
)
from ossmax.instances import gen_procurement, random_diversity, random_matroid
from ossmax.matroid import Uniform, in_matroid_polytope
from ossmax.objective import QuadraticObjective, estimate_sigma
from ossmax.oracle import brute_force_opt

# argmax of (1 - a)(a / (a + 1))^(2 sigma) on a 1e-6 grid, frozen
GRID_ARGMAX = {0.0: 0.0, 0.5: 0.414214, 1.0: 0.561553, 2.0: 0.701562, 4.0: 0.815073, 8.0: 0.894147}


@pytest.mark.parametrize("sigma", sorted(GRID_ARGMAX))
def test_best_alpha_matches_grid(sigma):
    assert abs(best_alpha(sigma) - GRID_ARGMAX[sigma]) <= 1e-3


def test_best_alpha_examples():
    assert best_alpha(0) == 0
    assert best_alpha(1) == pytest.approx((-3 + math.sqrt(17)) / 2)


def test_bound_general_examples():
    assert bound_general(0, 0) == pytest.approx(1 - 1 / math.e)
    for sigma in range(6):
        assert bound_general(0.5, sigma) > 0.5 / (3 ** (2 * sigma) + 0.5)
    assert bound_general(1 - 1e-12, 2.0) == pytest.approx(0, abs=1e-9)


def test_bound_third_order_examples():
    for sigma in (0.5, 1, 3):
        assert bound_third_order(0.5, sigma) == pytest.approx(1 - math.exp(-1 / (4 * sigma + 2)))
    assert bound_third_order(0.5, 1) == pytest.approx(1 - math.exp(-1 / 6))
    assert bound_third_order(0.5, 1) >= 1 / 7
    assert bound_third_order(0.5, 0) == pytest.approx(1 - math.exp(-0.5))
    with pytest.raises(GreedyError):
        bound_third_order(0, 0)


def test_discretization_examples():
    rc = resolve(GreedyConfig(alpha=0.5, mode=Mode.ONE_STEP, sigma=1.0), 5)
    assert discretization_factor(rc, 5) == pytest.approx(1 - math.exp(-1 / 6))
    n, alpha = 4, 0.5
    rc = resolve(GreedyConfig(alpha=alpha, mode=Mode.MULTILINEAR, sigma=1.0), n)
    assert rc.delta == pytest.approx((1 - alpha) / n**3)
    slack = discretization_factor(rc, n) / (1 - math.exp(-0.5 * (1 - alpha) * rc.mu))
    assert slack == pytest.approx(1 - 1 / n)
    eta = 3.0
    rc = resolve(GreedyConfig(alpha=alpha, mode=Mode.ETA_LOCAL, sigma=1.0, eta=eta), n)
    assert rc.delta == pytest.approx(1 / (n * eta * (1 - alpha)))
    slack = discretization_factor(rc, n) / (1 - math.exp(-(1 - alpha) * rc.mu))
    assert slack == pytest.approx(1 - 1 / n)


def test_step_checks():
    with pytest.raises(StepNotDivisible):
        resolve(GreedyConfig(alpha=0.5, delta=0.3, mode=Mode.MULTILINEAR, sigma=1.0), 3)
    rc = resolve(GreedyConfig(alpha=0.5, delta=0.25, mode=Mode.MULTILINEAR, sigma=1.0), 3)
    assert rc.steps == 4
    assert discretization_factor(rc, 3) == 0.0  # step longer than the certified maximum
    with pytest.raises(GreedyError):
        resolve(GreedyConfig(alpha=1.0), 3)
    with pytest.raises(GreedyError):
        resolve(GreedyConfig(mode=Mode.ETA_LOCAL, sigma=1.0), 3)


def test_auto_alpha():
    assert resolve(GreedyConfig(sigma=2.0), 4).alpha == 0.5
    assert resolve(GreedyConfig(sigma=2.0, third_order=False), 4).alpha == pytest.approx(best_alpha(2.0))
    assert resolve(GreedyConfig(sigma=0.0), 4).alpha == 0.0


def test_linear_objective_is_exact():
    q = QuadraticObjective(np.zeros((3, 3)), [3, 1, 2])
    run = run_jump_start_greedy(q, Uniform(3, 1), GreedyConfig(alpha=0.0, mode=Mode.ONE_STEP))
    np.testing.assert_array_equal(run.final_point, [1, 0, 0])
    assert run.final_value == 3


def test_rejects_negative_gradient():
    q = QuadraticObjective(np.zeros((3, 3)), [1, -1, 2])
    with pytest.raises(NonMonotoneGradient):
        run_jump_start_greedy(q, Uniform(3, 2), GreedyConfig(alpha=0.0, mode=Mode.MULTILINEAR))


def test_mode_applicability():
    rng = np.random.default_rng(0)
    p = gen_procurement(4, 2, rng)
    for mode in (Mode.ONE_STEP, Mode.MULTILINEAR):
        with pytest.raises(GreedyError):
            run_jump_start_greedy(p, Uniform(4, 2), GreedyConfig(mode=mode))


def _instances(seed, count):
    rng = np.random.default_rng(seed)
    for i in range(count):
        fam = ("uniform", "partition", "graphic", "paired")[i % 4]
        m = random_matroid(fam, int(rng.integers(4, 9)), rng)
        q = random_diversity(("metric", "negtype", "graph", "powered")[i % 4], m.n, rng)
        yield q, m


@pytest.mark.parametrize("mode", [Mode.ONE_STEP, Mode.MULTILINEAR])
def test_run_invariants_and_guarantee(mode):
    for q, m in _instances(1, 12):
        sigma = estimate_sigma(q.A).oss_sigma
        run = run_jump_start_greedy(q, m, GreedyConfig(alpha=0.5, mode=mode, sigma=sigma))
        x = run.final_point
        assert len(run.start_set) == m.r
        np.testing.assert_allclose(run.iterates[0], 0.5 * np.isin(np.arange(m.n), list(run.start_set)))
        assert np.all(x >= 0) and np.all(x <= 1 + 1e-12)
        assert in_matroid_polytope(m, x)
        recon = np.zeros(m.n)
        for w, s in run.decomposition:
            recon[list(s)] += w
            assert m.is_independent(s)
        np.testing.assert_allclose(recon, x, atol=1e-12)
        assert sum(w for w, _ in run.decomposition) == pytest.approx(1, abs=1e-12)
        assert all(b >= a - 1e-12 for a, b in zip(run.values, run.values[1:]))
        _, opt = brute_force_opt(q, m)
        assert run.final_value >= run.certified_bound * opt - 1e-9


def test_update_rule():
    q, m = next(_instances(2, 1))
    run = run_jump_start_greedy(q, m, GreedyConfig(alpha=0.25, delta=1 / 8, mode=Mode.MULTILINEAR, sigma=1.0))
    assert len(run.vertices) == 8
    for x0, x1, v in zip(run.iterates, run.iterates[1:], run.vertices):
        step = np.zeros(m.n)
        step[list(v)] = (1 / 8) * 0.75
        np.testing.assert_allclose(x1, x0 + step, atol=1e-12)


def test_zero_sigma_multilinear_anchor():
    rng = np.random.default_rng(3)
    for _ in range(10):
        m = random_matroid("partition", 8, rng)
        q = QuadraticObjective(np.zeros((m.n, m.n)), rng.random(m.n))
        run = run_jump_start_greedy(q, m, GreedyConfig(alpha=0.0, mode=Mode.MULTILINEAR, sigma=0.0))
        _, opt = brute_force_opt(q, m)
        assert run.final_value / opt >= (1 - 1 / math.e) * (1 - 1 / m.n) - 1e-12


def test_trajectory_csv():
    q, m = next(_instances(4, 1))
    run = run_jump_start_greedy(q, m, GreedyConfig(alpha=0.5, delta=0.5, mode=Mode.MULTILINEAR, sigma=1.0))
    lines = run.trajectory_csv().strip().splitlines()
    assert lines[0] == "t,l1,F"
    assert len(lines) == 4
    assert float(lines[-1].split(",")[0]) == 1.0


def test_eta_local_procurement():
    rng = np.random.default_rng(5)
    p = gen_procurement(5, 2, rng)
    m = Uniform(5, 3)
    run = run_jump_start_greedy(p, m, GreedyConfig(mode=Mode.ETA_LOCAL, eta=p.eta))
    assert run.config.alpha == 0.0
    _, opt = brute_force_opt(p, m)
    assert run.final_value >= run.certified_bound * opt - 1e-9
    assert in_matroid_polytope(m, run.final_point)
