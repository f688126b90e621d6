"""Brute-force ground truth and inequality checks.

Every check is one-sided: it measures how far a stated lower bound is
violated and compares that against a named tolerance.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np

from . import tolerances as tol
from .greedy import GreedyConfig, Mode, best_alpha, run_jump_start_greedy
from .instances import (
    MATROID_FAMILIES,
    OBJECTIVE_KINDS,
    gen_gap_instance,
    gen_procurement,
    random_diversity,
    random_matroid,
    rng_for,
)
from .matroid import EXPLICIT_MAX_N, Matroid, independent_sets
from .objective import (
    check_oss_direct,
    estimate_sigma,
    gradient_growth_bound,
)
from .rounding import build_quadratic_coverage, round_by_coverage, saturate_to_bases, swap_round

BRUTE_FORCE_MAX_N = EXPLICIT_MAX_N


class OracleError(ValueError):
    pass


@dataclass
class VerificationReport:
    check_name: str
    passed: bool
    worst_violation: float
    tolerance: str
    trials: int
    witness: str | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


class _Tracker:
    """Keeps the worst violation seen and a description of where it happened."""

    def __init__(self, name: str, tolerance: str):
        self.name, self.tolerance = name, tolerance
        self.limit = tol.TOLERANCES[tolerance]
        self.worst = -np.inf
        self.witness = None
        self.trials = 0

    def add(self, violation: float, describe: Callable[[], str]):
        self.trials += 1
        if violation > self.worst:
            self.worst = float(violation)
            if violation > self.limit:
                self.witness = describe()

    def report(self, **extra) -> VerificationReport:
        worst = self.worst if self.trials else 0.0
        return VerificationReport(self.name, bool(worst <= self.limit), worst, self.tolerance, self.trials, self.witness, extra)


def brute_force_opt(obj, m: Matroid) -> tuple[frozenset[int], float]:
    """Best independent set by enumerating every independent set."""
    if m.n > BRUTE_FORCE_MAX_N:
        raise OracleError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}")
    best, best_val = frozenset(), obj.eval_set(())
    for s in independent_sets(m):
        v = obj.eval_set(s)
        if v > best_val:
            best, best_val = s, v
    return best, best_val


def brute_force_opt_bases(obj, m: Matroid) -> tuple[frozenset[int], float]:
    """Best basis by scanning all r-subsets; equals the optimum for monotone objectives."""
    if m.n > BRUTE_FORCE_MAX_N:
        raise OracleError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}")
    best, best_val = None, -np.inf
    for combo in itertools.combinations(range(m.n), m.r):
        s = frozenset(combo)
        if m.is_independent(s):
            v = obj.eval_set(s)
            if v > best_val:
                best, best_val = s, v
    return best, best_val


def _sample_direction(n: int, rng: np.random.Generator) -> np.ndarray:
    mask = rng.random(n) < rng.uniform(0.2, 1.0)
    if not mask.any():
        mask[rng.integers(n)] = True
    return rng.random(n) * mask


def sample_growth_draw(n: int, rng: np.random.Generator):
    """A point x in (0, 1]^n (sparse), a direction u >= 0 and a step keeping x + eps u in the box."""
    x = _sample_direction(n, rng)
    u = _sample_direction(n, rng)
    room = np.min(np.where(u > 0, (1 - x) / np.where(u > 0, u, 1), np.inf))
    eps = rng.uniform(0, min(room, 1.0))
    return x, u, eps


def verify_gradient_growth(q, sigma: float, trials: int, seed: int) -> VerificationReport:
    rng = rng_for(seed)
    track = _Tracker("gradient-growth", "INEQUALITY_ATOL")
    for _ in range(trials):
        x, u, eps = sample_growth_draw(q.n, rng)
        lhs, rhs = gradient_growth_bound(q, x, u, eps, sigma)
        track.add(lhs - rhs, lambda: f"x={x.tolist()} u={u.tolist()} eps={eps}")
    return track.report(sigma=sigma)


def _rounding_family(obj, m, rng, pieces=None):
    """A random convex combination of bases obtained from greedy vertices under random weights."""
    from .matroid import greedy_max_weight

    pieces = pieces or int(rng.integers(1, 5))
    weights = rng.dirichlet(np.ones(pieces))
    family = [(float(w), greedy_max_weight(m, rng.random(m.n) + 1e-3)) for w in weights]
    return saturate_to_bases(m, family)


def verify_coverage(obj, m, family) -> tuple[VerificationReport, VerificationReport]:
    """Coverage conditions and size, then the best-member guarantee."""
    cov = build_quadratic_coverage(m, family)
    c, r = m.c, m.r
    pair_gap, single_gap = cov.condition_violations()
    t = (c - 1) // 2
    cond = _Tracker("coverage-conditions", "INEQUALITY_ATOL")
    cond.add(pair_gap, lambda: "pair condition")
    cond.add(single_gap, lambda: "singleton condition")
    cond.add(cov.total_weight - (3 + 2 * r / (c - 2)), lambda: f"total weight {cov.total_weight}")
    cond.add(float(cov.max_leftover - t), lambda: f"leftover {cov.max_leftover} > {t}")
    res = round_by_coverage(obj, cov)
    gap = _Tracker("coverage-rounding", "INEQUALITY_ATOL")
    gap.add(res.fractional_value - res.value * (3 + 2 * r / (c - 2)), lambda: f"set {sorted(res.set)}")
    gap.add(res.fractional_value - res.details["weightedValue"], lambda: "weighted average below F(x)")
    return cond.report(), gap.report()


def verify_swap(obj, m, family, sigma: float) -> VerificationReport:
    res = swap_round(obj, m, family, sigma)
    track = _Tracker("swap-rounding", "INEQUALITY_ATOL")
    track.add(res.details.get("worstStepGap", -np.inf), lambda: "merge step")
    track.add(res.fractional_value - res.certificate * res.value, lambda: f"set {sorted(res.set)}")
    return track.report()


def verify_end_to_end(inst_obj, m: Matroid, cfg: GreedyConfig | None = None, name="end-to-end") -> VerificationReport:
    from .pipeline import solve

    report = solve(inst_obj, m, cfg, brute_force=True)
    track = _Tracker(name, "INEQUALITY_ATOL")
    track.add(
        report.certified_bound / report.gap_certificate * report.brute_force_value - report.rounded_value,
        lambda: f"rounded {report.rounded_value} vs optimum {report.brute_force_value}",
    )
    track.add(report.fractional_value - report.gap_certificate * report.rounded_value, lambda: "rounding certificate")
    return track.report(achievedRatio=report.achieved_ratio, method=report.method)


def _seed_stream(seed: int, label: str) -> np.random.Generator:
    return np.random.default_rng([seed, sum(map(ord, label))])


def suite_lemmas(seed: int, trials: int = 200) -> list[VerificationReport]:
    rng = _seed_stream(seed, "lemmas")
    growth = _Tracker("gradient-growth", "INEQUALITY_ATOL")
    direct = _Tracker("oss-direct", "POINTWISE_SLACK")
    for kind in OBJECTIVE_KINDS:
        q = random_diversity(kind, int(rng.integers(3, 10)), rng)
        cert = estimate_sigma(q.A)
        for _ in range(trials):
            x, u, eps = sample_growth_draw(q.n, rng)
            lhs, rhs = gradient_growth_bound(q, x, u, eps, cert.oss_sigma)
            growth.add(lhs - rhs, lambda: f"{kind} x={x.tolist()} u={u.tolist()} eps={eps}")
            direct.add(0.0 if check_oss_direct(q, x, u, cert.oss_sigma) else np.inf, lambda: f"{kind} x={x.tolist()} u={u.tolist()}")
    grid = np.arange(0, 1, 1e-4)
    alpha = _Tracker("best-alpha", "INEQUALITY_ATOL")
    for sigma in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0):
        g = (1 - grid) * (grid / (grid + 1)) ** (2 * sigma)
        alpha.add(abs(best_alpha(sigma) - grid[int(np.argmax(g))]) - 1e-3 + tol.INEQUALITY_ATOL, lambda: f"sigma={sigma}")
    return [growth.report(), direct.report(), alpha.report()]


def suite_rounding(seed: int, runs: int = 8) -> list[VerificationReport]:
    rng = _seed_stream(seed, "rounding")
    cond = _Tracker("coverage-conditions", "INEQUALITY_ATOL")
    cover = _Tracker("coverage-rounding", "INEQUALITY_ATOL")
    swap = _Tracker("swap-rounding", "INEQUALITY_ATOL")
    for family in MATROID_FAMILIES:
        for _ in range(runs):
            m = random_matroid(family, int(rng.integers(6, 11)), rng)
            q = random_diversity(str(rng.choice(OBJECTIVE_KINDS)), m.n, rng)
            fam = _rounding_family(q, m, rng)
            if m.c is not None and m.c >= 3:
                a, b = verify_coverage(q, m, fam)
                cond.add(a.worst_violation, lambda: f"{family} {m!r}")
                cover.add(b.worst_violation, lambda: f"{family} {m!r}")
            if m.r >= 2:
                s = verify_swap(q, m, fam, estimate_sigma(q.A).oss_sigma)
                swap.add(s.worst_violation, lambda: f"{family} {m!r}")
    return [cond.report(), cover.report(), swap.report()]


def suite_endtoend(seed: int, runs: int = 4) -> list[VerificationReport]:
    rng = _seed_stream(seed, "endtoend")
    e2e = _Tracker("end-to-end", "INEQUALITY_ATOL")
    for family in MATROID_FAMILIES:
        for _ in range(runs):
            m = random_matroid(family, int(rng.integers(6, 11)), rng)
            q = random_diversity(str(rng.choice(OBJECTIVE_KINDS)), m.n, rng)
            rep = verify_end_to_end(q, m)
            e2e.add(rep.worst_violation, lambda: f"{family} {m!r}")
    gap = _Tracker("gap-instances", "INEQUALITY_ATOL")
    for k in range(2, 5):
        for t in range(2, k + 1):
            inst = gen_gap_instance(k, t, 4.0)
            rep = verify_end_to_end(inst.objective, inst.matroid)
            gap.add(rep.worst_violation, lambda: f"k={k} t={t}")
    proc = _Tracker("procurement", "INEQUALITY_ATOL")
    for _ in range(runs):
        n = int(rng.integers(3, 8))
        p = gen_procurement(n, 2, rng)
        m = random_matroid("uniform", n, rng)
        run = run_jump_start_greedy(p, m, GreedyConfig(mode=Mode.ETA_LOCAL, eta=p.eta))
        _, opt = brute_force_opt(p, m)
        proc.add(run.certified_bound * opt - run.final_value, lambda: f"n={n}")
    return [e2e.report(), gap.report(), proc.report()]


SUITES = {"lemmas": suite_lemmas, "rounding": suite_rounding, "endtoend": suite_endtoend}


def run_suite(name: str, seed: int) -> list[VerificationReport]:
    names = list(SUITES) if name == "all" else [name]
    reports = []
    for key in names:
        if key not in SUITES:
            raise OracleError(f"unknown suite {key!r}")
        reports.extend(SUITES[key](seed))
    return sorted(reports, key=lambda r: r.check_name)
