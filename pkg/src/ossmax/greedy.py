"""Discretized jump-start continuous greedy over a matroid polytope.

The run starts at alpha times the indicator of a maximum-size independent set
and then takes 1/delta steps of length delta (1 - alpha) towards the linear
maximization vertex at the current gradient.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .matroid import Matroid, greedy_max_weight
from .tolerances import NEGATIVE_GRADIENT_ATOL


class GreedyError(ValueError):
    pass


class NonMonotoneGradient(GreedyError):
    def __init__(self, step: int, index: int, value: float):
        self.step, self.index, self.value = step, index, value
        super().__init__(f"gradient component {index} is {value:.3e} at step {step}")


class StepNotDivisible(GreedyError):
    pass


class Mode(str, Enum):
    ONE_STEP = "one-step"
    MULTILINEAR = "multilinear"
    ETA_LOCAL = "eta-local"


AUTO = "auto"


@dataclass(frozen=True)
class GreedyConfig:
    """User-facing configuration; ``alpha`` and ``delta`` accept ``"auto"``."""

    alpha: float | str = AUTO
    delta: float | str = AUTO
    mode: Mode = Mode.ONE_STEP
    sigma: float = 0.0
    eta: float | None = None
    third_order: bool = True

    def to_spec(self) -> dict:
        return {"alpha": self.alpha, "delta": self.delta, "mode": Mode(self.mode).value, "eta": self.eta}


@dataclass(frozen=True)
class ResolvedConfig:
    alpha: float
    delta: float
    steps: int
    mode: Mode
    sigma: float
    mu: float
    eta: float | None
    delta_max: float
    third_order: bool


def best_alpha(sigma: float) -> float:
    """Maximizer of (1 - a) (a / (a + 1))^(2 sigma) over [0, 1)."""
    if sigma < 0:
        raise GreedyError("sigma must be non-negative")
    return (-(2 * sigma + 1) + math.sqrt(4 * sigma * sigma + 12 * sigma + 1)) / 2


def _check_alpha(alpha):
    if not 0 <= alpha < 1:
        raise GreedyError("alpha must lie in [0, 1)")


def bound_general(alpha: float, sigma: float) -> float:
    _check_alpha(alpha)
    return 1 - math.exp(-(1 - alpha) * (alpha / (alpha + 1)) ** (2 * sigma))


def bound_third_order(alpha: float, sigma: float) -> float:
    _check_alpha(alpha)
    if alpha == 0 and sigma == 0:
        raise GreedyError("third-order bound is undefined at alpha = sigma = 0")
    return 1 - math.exp(-alpha * (1 - alpha) / (alpha + sigma))


def progress_rate(alpha: float, sigma: float, third_order: bool) -> float:
    """The rate mu in F(x(1)) >= (1 - exp(-(1 - alpha) mu)) OPT."""
    if sigma == 0:
        return 1.0
    if third_order:
        return alpha / (alpha + sigma)
    return (alpha / (alpha + 1)) ** (2 * sigma)


def _step_from(delta_max: float) -> tuple[float, int]:
    steps = max(1, math.ceil(1 / delta_max - 1e-12))
    return 1.0 / steps, steps


def _steps_of(delta: float) -> int:
    if not 0 < delta <= 1:
        raise StepNotDivisible(f"delta must lie in (0, 1], got {delta}")
    steps = round(1 / delta)
    if abs(steps * delta - 1) > 1e-9:
        raise StepNotDivisible(f"1/delta = {1 / delta} is not an integer")
    return steps


def resolve(cfg: GreedyConfig, n: int) -> ResolvedConfig:
    mode = Mode(cfg.mode)
    sigma = float(cfg.sigma)
    if sigma < 0:
        raise GreedyError("sigma must be non-negative")
    if cfg.alpha == AUTO:
        if sigma == 0:
            alpha = 0.0
        elif cfg.third_order:
            alpha = 0.5
        else:
            alpha = best_alpha(sigma)
    else:
        alpha = float(cfg.alpha)
    _check_alpha(alpha)
    mu = progress_rate(alpha, sigma, cfg.third_order)
    long_step = 1 / ((1 - alpha) * mu)
    eta = None
    if mode is Mode.ONE_STEP:
        delta_max = 1.0
    elif mode is Mode.MULTILINEAR:
        delta_max = min((1 - alpha) / n**3, long_step)
    else:
        if cfg.eta is None or cfg.eta < 0:
            raise GreedyError("eta-local mode needs a non-negative eta")
        eta = float(cfg.eta)
        local = math.inf if eta == 0 else 1 / (n * eta * (1 - alpha))
        delta_max = min(local, long_step, 1.0)
    if cfg.delta == AUTO:
        delta, steps = _step_from(delta_max)
    else:
        steps = _steps_of(float(cfg.delta))
        delta = 1.0 / steps
        if mode is Mode.ONE_STEP and steps != 1:
            raise GreedyError("one-step mode takes a single step of length 1")
    return ResolvedConfig(alpha, delta, steps, mode, sigma, mu, eta, delta_max, cfg.third_order)


def discretization_factor(rc: ResolvedConfig, n: int) -> float:
    """Certified fraction of OPT reached by the discrete run."""
    a, mu, d = rc.alpha, rc.mu, rc.delta
    if d > rc.delta_max * (1 + 1e-12):
        return 0.0
    if rc.mode is Mode.ONE_STEP:
        return 1 - math.exp(-(1 - a) * mu)
    if rc.mode is Mode.MULTILINEAR:
        return max(0.0, (1 - math.exp(-0.5 * (1 - a) * mu)) * (1 - n * n * d / (1 - a)))
    return max(0.0, (1 - math.exp(-(1 - a) * mu)) * (1 - rc.eta * d * (1 - a)))


@dataclass
class GreedyRun:
    config: ResolvedConfig
    start_set: frozenset[int]
    iterates: list[np.ndarray]
    vertices: list[frozenset[int]]
    values: list[float]
    decomposition: list[tuple[float, frozenset[int]]]
    certified_bound: float
    lmo_calls: int = field(default=0)

    @property
    def final_point(self) -> np.ndarray:
        return self.iterates[-1]

    @property
    def final_value(self) -> float:
        return self.values[-1]

    def trajectory_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "l1", "F"])
        for step, (x, v) in enumerate(zip(self.iterates, self.values)):
            writer.writerow([f"{step * self.config.delta:.17g}", f"{x.sum():.17g}", f"{v:.17g}"])
        return buf.getvalue()


def check_mode(obj, mode: Mode) -> None:
    """Refuse modes whose guarantee does not cover the objective."""
    H = np.asarray(obj.hessian)
    if mode is Mode.ONE_STEP and np.any(H < 0):
        raise GreedyError("one-step mode needs an entrywise non-negative Hessian")
    if mode is Mode.MULTILINEAR and np.any(np.diag(H) != 0):
        raise GreedyError("multilinear mode needs a zero-diagonal Hessian")


def max_size_independent(m: Matroid) -> frozenset[int]:
    return greedy_max_weight(m, np.ones(m.n))


def _merge(entries: list[tuple[float, frozenset[int]]]) -> list[tuple[float, frozenset[int]]]:
    merged: dict[frozenset[int], float] = {}
    for w, s in entries:
        if w > 0:
            merged[s] = merged.get(s, 0.0) + w
    return [(w, s) for s, w in merged.items()]


def run_jump_start_greedy(obj, m: Matroid, cfg: GreedyConfig) -> GreedyRun:
    if obj.n != m.n:
        raise GreedyError(f"objective has {obj.n} elements but matroid has {m.n}")
    if m.r < 1:
        raise GreedyError("matroid has rank 0")
    rc = resolve(cfg, m.n)
    check_mode(obj, rc.mode)
    n = m.n
    start = max_size_independent(m)
    base = np.zeros(n)
    base[list(start)] = rc.alpha
    step_len = rc.delta * (1 - rc.alpha)
    counts = np.zeros(n)
    cache: dict[tuple[int, ...], frozenset[int]] = {}
    x = base.copy()
    iterates = [x.copy()]
    values = [obj.value(x)]
    vertices: list[frozenset[int]] = []
    lmo_calls = 0
    for step in range(rc.steps):
        g = obj.gradient(x)
        low = int(np.argmin(g))
        if g[low] < -NEGATIVE_GRADIENT_ATOL:
            raise NonMonotoneGradient(step, low, float(g[low]))
        # the greedy vertex depends only on the order of the positive weights
        key = tuple(i for i in np.lexsort((np.arange(n), -g)) if g[i] > 0)
        v = cache.get(key)
        if v is None:
            v = greedy_max_weight(m, g)
            cache[key] = v
            lmo_calls += 1
        vertices.append(v)
        counts[list(v)] += 1
        x = base + step_len * counts
        iterates.append(x.copy())
        values.append(obj.value(x))
    entries = [(rc.alpha, start)] + [(step_len, v) for v in vertices]
    decomposition = _merge(entries)
    slack = 1.0 - sum(w for w, _ in decomposition)
    if slack > 1e-12:
        decomposition.append((slack, frozenset()))
    bound = discretization_factor(rc, n)
    return GreedyRun(rc, start, iterates, vertices, values, decomposition, bound, lmo_calls)
