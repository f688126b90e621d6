"""End-to-end solve: continuous greedy, saturation to bases, rounding, report."""

from __future__ import annotations

import csv
import io
import itertools
import json
import time
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from .greedy import GreedyConfig, Mode, run_jump_start_greedy
from .matroid import Matroid
from .objective import ObjectiveError, ProcurementObjective, estimate_sigma
from .rounding import round_best, saturate_to_bases
from .tolerances import INEQUALITY_ATOL


def default_mode(obj) -> Mode:
    if isinstance(obj, ProcurementObjective):
        return Mode.ETA_LOCAL
    if obj.is_diversity:
        return Mode.ONE_STEP
    return Mode.MULTILINEAR


def smoothness_of(obj) -> tuple[float | None, float]:
    """(triple-scan sigma, sigma used by the guarantees) for an objective."""
    if isinstance(obj, ProcurementObjective):
        # concave: the Hessian term is never positive, so the objective is 0-smooth
        return None, 0.0
    if np.any(obj.A < 0):
        raise ObjectiveError("sigma is only estimated for non-negative A; pass it explicitly")
    cert = estimate_sigma(obj.A)
    return cert.sigma, cert.oss_sigma


@dataclass
class SolveReport:
    meta: dict[str, Any]
    config: dict[str, Any]
    sigma: float | None
    oss_sigma: float
    fractional_value: float
    fractional_point: list[float]
    rounded_set: list[int] | None
    rounded_value: float | None
    certified_bound: float
    gap_certificate: float | None
    method: str
    brute_force_value: float | None = None
    brute_force_set: list[int] | None = None
    achieved_ratio: float | None = None
    wall_time_ms: float | None = None
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "meta": self.meta,
            "config": self.config,
            "sigma": self.sigma,
            "ossSigma": self.oss_sigma,
            "fractionalValue": self.fractional_value,
            "fractionalPoint": self.fractional_point,
            "roundedSet": self.rounded_set,
            "roundedValue": self.rounded_value,
            "certifiedBound": self.certified_bound,
            "gapCertificate": self.gap_certificate,
            "method": self.method,
            "bruteForceValue": self.brute_force_value,
            "bruteForceSet": self.brute_force_set,
            "achievedRatio": self.achieved_ratio,
            "checks": self.checks,
        }
        if timing:
            out["wallTimeMs"] = self.wall_time_ms
        return out


def solve(
    obj,
    m: Matroid,
    cfg: GreedyConfig | None = None,
    brute_force: bool = False,
    meta: dict | None = None,
    sigma: float | None = None,
) -> SolveReport:
    start = time.perf_counter()
    if sigma is None:
        scanned, oss_sigma = smoothness_of(obj)
    else:
        scanned, oss_sigma = None, float(sigma)
    if cfg is None:
        cfg = GreedyConfig(mode=default_mode(obj))
    eta = cfg.eta
    if Mode(cfg.mode) is Mode.ETA_LOCAL and eta is None:
        if not isinstance(obj, ProcurementObjective):
            raise ObjectiveError("eta-local mode needs an explicit eta for this objective")
        eta = obj.eta
    cfg = GreedyConfig(cfg.alpha, cfg.delta, cfg.mode, oss_sigma, eta, True)
    run = run_jump_start_greedy(obj, m, cfg)
    rc = run.config
    config = {
        "alpha": rc.alpha,
        "delta": rc.delta,
        "steps": rc.steps,
        "mode": rc.mode.value,
        "mu": rc.mu,
        "eta": rc.eta,
        "lmoCalls": run.lmo_calls,
    }
    fractional = run.final_value
    rounded_set = rounded_value = gap = None
    method = "none"
    checks: dict[str, bool] = {}
    if getattr(obj, "is_diversity", False):
        bases = saturate_to_bases(m, run.decomposition)
        res = round_best(obj, m, bases, oss_sigma)
        rounded_set, rounded_value, gap, method = sorted(res.set), res.value, res.certificate, res.method
        checks["independent"] = m.is_independent(res.set)
        checks["roundingCertificate"] = bool(rounded_value * gap >= fractional - INEQUALITY_ATOL)
    report = SolveReport(
        meta=dict(meta or {}),
        config=config,
        sigma=scanned,
        oss_sigma=oss_sigma,
        fractional_value=fractional,
        fractional_point=run.final_point.tolist(),
        rounded_set=rounded_set,
        rounded_value=rounded_value,
        certified_bound=run.certified_bound,
        gap_certificate=gap,
        method=method,
        checks=checks,
    )
    if brute_force:
        from .oracle import brute_force_opt

        best, value = brute_force_opt(obj, m)
        report.brute_force_value = value
        report.brute_force_set = sorted(best)
        checks["fractionalBound"] = bool(fractional >= run.certified_bound * value - INEQUALITY_ATOL)
        if rounded_value is not None:
            report.achieved_ratio = rounded_value / value if value > 0 else 1.0
            checks["endToEndBound"] = bool(rounded_value >= run.certified_bound / gap * value - INEQUALITY_ATOL)
    report.wall_time_ms = (time.perf_counter() - start) * 1e3
    return report


SWEEP_COLUMNS = [
    "index",
    "family",
    "params",
    "n",
    "r",
    "c",
    "sigma",
    "ossSigma",
    "mode",
    "alpha",
    "delta",
    "fractionalValue",
    "roundedValue",
    "method",
    "certifiedBound",
    "gapCertificate",
    "bruteForceValue",
    "achievedRatio",
    "measuredGapRatio",
    "analyticRatioLB",
    "gapBoundHolds",
    "passed",
    "error",
]


def expand_grid(grid: dict[str, list]) -> list[dict]:
    if not grid:
        return []
    keys = sorted(grid)
    return [dict(zip(keys, values)) for values in itertools.product(*(grid[k] for k in keys))]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def sweep_row(index: int, family: str, params: dict, seed: int, brute_force_max_n: int = 14) -> dict:
    from .instances import gen_gap_instance, generate
    from .oracle import brute_force_opt

    row: dict[str, Any] = {col: None for col in SWEEP_COLUMNS}
    row.update(index=index, family=family, params=json.dumps(params, sort_keys=True))
    try:
        inst = generate(family, seed, **params)
        m, obj = inst.matroid, inst.objective
        row.update(n=m.n, r=m.r, c=m.c)
        rep = solve(obj, m, brute_force=m.n <= brute_force_max_n, meta=inst.meta)
        row.update(
            sigma=rep.sigma,
            ossSigma=rep.oss_sigma,
            mode=rep.config["mode"],
            alpha=rep.config["alpha"],
            delta=rep.config["delta"],
            fractionalValue=rep.fractional_value,
            roundedValue=rep.rounded_value,
            method=rep.method,
            certifiedBound=rep.certified_bound,
            gapCertificate=rep.gap_certificate,
            bruteForceValue=rep.brute_force_value,
            achievedRatio=rep.achieved_ratio,
            passed=rep.passed,
        )
        if family == "gap":
            gap = gen_gap_instance(int(params.get("k", 3)), int(params.get("t", 2)), float(params.get("sigma0", 4.0)))
            x0 = gap.fractional_point()
            if m.n <= brute_force_max_n:
                _, integral = brute_force_opt(gap.objective, gap.matroid)
            else:
                integral = gap.integral_value_closed_form()
            measured = gap.objective.value(x0) / integral
            row.update(measuredGapRatio=measured, analyticRatioLB=gap.analytic_ratio_lb,
                       gapBoundHolds=bool(measured >= gap.analytic_ratio_lb - INEQUALITY_ATOL))
    except (ValueError, ArithmeticError) as exc:
        row["passed"] = False
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep(family: str, grid: dict[str, list], seed: int) -> list[dict]:
    return [sweep_row(i, family, params, seed) for i, params in enumerate(expand_grid(grid))]


def rows_to_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row.get(col)) for col in SWEEP_COLUMNS])
    return buf.getvalue()
