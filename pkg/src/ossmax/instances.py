"""Instance generators and the JSON instance format.

Instance files hold one objective block (``objective`` for a diversity or
general quadratic, ``procurement`` for the concave procurement model), one
``matroid`` block and a ``meta`` block recording the generator, its parameters
and the seed.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .matroid import Graphic, Matroid, PairedCircuit, Partition, Uniform, matroid_from_spec
from .objective import ProcurementObjective, QuadraticObjective


class InstanceError(ValueError):
    pass


def rng_for(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


def _pairwise_distances(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def gen_graph_semimetric(n: int, edges: Sequence[tuple[int, int]], sigma0: float) -> QuadraticObjective:
    """Distance 2 sigma0 on edges and 1 on non-edges."""
    if sigma0 < 1:
        raise InstanceError("sigma0 must be at least 1")
    A = np.ones((n, n))
    for u, v in edges:
        if u == v:
            raise InstanceError("graph must be simple")
        A[u, v] = A[v, u] = 2 * sigma0
    np.fill_diagonal(A, 0)
    return QuadraticObjective(A)


def random_graph(n: int, p: float, rng: np.random.Generator) -> list[tuple[int, int]]:
    return [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p]


def random_points(k: int, d: int, rng: np.random.Generator) -> np.ndarray:
    return rng.random((k, d))


def gen_negative_type(points) -> QuadraticObjective:
    """Squared Euclidean distances between the given points."""
    points = np.asarray(points, dtype=float)
    if points.shape[0] < 3:
        raise InstanceError("need at least 3 points")
    D = _pairwise_distances(points) ** 2
    np.fill_diagonal(D, 0)
    return QuadraticObjective(D)


def gen_powered_metric(points, p: float) -> QuadraticObjective:
    """Euclidean distances raised to the power p."""
    if p < 1:
        raise InstanceError("p must be at least 1")
    D = _pairwise_distances(np.asarray(points, dtype=float)) ** p
    np.fill_diagonal(D, 0)
    return QuadraticObjective(D)


@dataclass(frozen=True)
class GapInstance:
    objective: QuadraticObjective
    matroid: PairedCircuit
    analytic_ratio_lb: float
    k: int
    t: int
    sigma0: float

    @property
    def rank(self) -> int:
        return self.k + self.t - 1

    @property
    def girth(self) -> int:
        return 2 * self.t

    def fractional_point(self) -> np.ndarray:
        return np.full(2 * self.k, (self.k + self.t - 1) / (2 * self.k))

    def fractional_value_closed_form(self) -> float:
        k, t, s = self.k, self.t, self.sigma0
        return k * ((k + t - 1) / (2 * k)) ** 2 * (1 + 2 * (k - 1) / s)

    def integral_value_closed_form(self) -> float:
        r, c, s = self.rank, self.girth, self.sigma0
        return ((s - 1) * (c - 2) + r * (r - 1)) / (2 * s)


def gap_ratio_lower_bound(k: int, t: int, sigma0: float) -> float:
    r, c = k + t - 1, 2 * t
    circuit_term = math.inf if c == 2 else r / (c - 2)
    return 0.25 * min(circuit_term, sigma0 / r)


def gen_gap_instance(k: int, t: int, sigma0: float) -> GapInstance:
    """Weight 1 inside the pairs {2i, 2i+1} and 1/sigma0 between pairs, over the paired-circuit matroid."""
    if not 1 <= t <= k:
        raise InstanceError("need 1 <= t <= k")
    if sigma0 < 1:
        raise InstanceError("sigma0 must be at least 1")
    n = 2 * k
    A = np.full((n, n), 1.0 / sigma0)
    for i in range(k):
        A[2 * i, 2 * i + 1] = A[2 * i + 1, 2 * i] = 1.0
    np.fill_diagonal(A, 0)
    return GapInstance(QuadraticObjective(A), PairedCircuit(k, t), gap_ratio_lower_bound(k, t, sigma0), k, t, float(sigma0))


def gen_procurement(n: int, m: int, rng: np.random.Generator, bid_scale: float = 1.0) -> ProcurementObjective:
    """Random collusion weights, support levels in {-1, 0, 1}, and bids large enough to keep F monotone."""
    if n < 1 or m < 1:
        raise InstanceError("need n, m >= 1")
    upper = np.triu(rng.random((n, n)), 1)
    collusion = upper + upper.T
    G = rng.integers(-1, 2, size=(m, n)).astype(float)
    C = collusion + G.T @ G
    bids = bid_scale * (np.clip(C, 0, None).sum(axis=1) + 1.0 / n)
    return ProcurementObjective(collusion, G, bids)


# random matroids and objectives used by tests, the verifier and the CLI

MATROID_FAMILIES = ("uniform", "partition", "graphic", "paired")


def random_matroid(family: str, n: int, rng: np.random.Generator) -> Matroid:
    if family == "uniform":
        return Uniform(n, int(rng.integers(2, max(3, n))))
    if family == "partition":
        blocks_count = int(rng.integers(2, max(3, n // 2 + 1)))
        labels = rng.integers(0, blocks_count, size=n)
        labels[:blocks_count] = np.arange(blocks_count)  # no empty block
        blocks = []
        for b in range(blocks_count):
            elems = [int(e) for e in np.flatnonzero(labels == b)]
            blocks.append((elems, int(rng.integers(1, len(elems) + 1))))
        return Partition(blocks)
    if family == "graphic":
        vertices = int(rng.integers(3, max(4, n)))
        edges = []
        # a random spanning tree first keeps the rank at vertices - 1
        for v in range(1, min(vertices, n + 1)):
            edges.append((int(rng.integers(0, v)), v))
        while len(edges) < n:
            u, v = rng.choice(vertices, size=2, replace=False)
            edges.append((int(min(u, v)), int(max(u, v))))
        return Graphic(vertices, edges[:n])
    if family == "paired":
        k = max(2, n // 2)
        return PairedCircuit(k, int(rng.integers(2, k + 1)))
    raise InstanceError(f"unknown matroid family {family!r}")


OBJECTIVE_KINDS = ("metric", "negtype", "squared-metric", "graph", "powered")


def random_diversity(kind: str, n: int, rng: np.random.Generator, linear: bool = True) -> QuadraticObjective:
    d = int(rng.integers(1, 4))
    if kind == "metric":
        A = gen_powered_metric(random_points(n, d, rng), 1.0).A
    elif kind == "negtype":
        A = gen_negative_type(random_points(n, d, rng)).A
    elif kind == "squared-metric":
        # squares of a shortest-path metric on a random weighted complete graph
        W = rng.random((n, n)) + 0.1
        W = (W + W.T) / 2
        np.fill_diagonal(W, 0)
        for k in range(n):
            W = np.minimum(W, W[:, [k]] + W[[k], :])
        A = W**2
    elif kind == "graph":
        A = gen_graph_semimetric(n, random_graph(n, 0.4, rng), float(rng.choice([1.0, 2.0, 4.0]))).A
    elif kind == "powered":
        A = gen_powered_metric(random_points(n, d, rng), float(rng.uniform(1.0, 3.0))).A
    else:
        raise InstanceError(f"unknown objective kind {kind!r}")
    b = rng.random(n) * A.max() * 0.5 if linear else np.zeros(n)
    return QuadraticObjective(A, b)


# instance files


@dataclass
class Instance:
    objective: QuadraticObjective | ProcurementObjective
    matroid: Matroid
    meta: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        key = "procurement" if isinstance(self.objective, ProcurementObjective) else "objective"
        return {key: self.objective.to_spec(), "matroid": self.matroid.to_spec(), "meta": self.meta}

    @classmethod
    def from_dict(cls, data: dict) -> "Instance":
        if "matroid" not in data:
            raise InstanceError("instance has no matroid block")
        if ("objective" in data) == ("procurement" in data):
            raise InstanceError("instance needs exactly one of an objective or a procurement block")
        try:
            matroid = matroid_from_spec(data["matroid"])
            if "objective" in data:
                obj = data["objective"]
                objective = QuadraticObjective(obj["A"], obj.get("b"))
            else:
                obj = data["procurement"]
                objective = ProcurementObjective(obj["collusion"], obj["G"], obj["bids"])
        except KeyError as exc:
            raise InstanceError(f"missing field {exc}") from exc
        if objective.n != matroid.n:
            raise InstanceError(f"objective has {objective.n} elements but matroid has {matroid.n}")
        return cls(objective, matroid, dict(data.get("meta", {})))

    def __eq__(self, other):
        return isinstance(other, Instance) and self.to_dict() == other.to_dict()


def _render(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return "null"
        return "%.17g" % value
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        items = sorted((str(k), v) for k, v in value.items())
        return "{" + ",".join(f"{json.dumps(k)}:{_render(v)}" for k, v in items) + "}"
    if isinstance(value, (list, tuple, np.ndarray, frozenset, set)):
        seq = sorted(value) if isinstance(value, (frozenset, set)) else list(value)
        return "[" + ",".join(_render(v) for v in seq) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def canonical_dumps(value) -> str:
    """Compact JSON with sorted keys and every float printed with 17 significant digits."""
    return _render(value) + "\n"


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(canonical_dumps(inst.to_dict()))


def load_instance(path: str | Path) -> Instance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: invalid JSON ({exc})") from exc
    return Instance.from_dict(data)


def generate(family: str, seed: int, **params) -> Instance:
    """Build an instance of a named family; used by the ``gen`` subcommand."""
    rng = rng_for(seed)
    if family == "gap":
        k, t, s0 = int(params.get("k", 3)), int(params.get("t", 2)), float(params.get("sigma0", 4.0))
        gap = gen_gap_instance(k, t, s0)
        meta = {"generator": "gap", "params": {"k": k, "t": t, "sigma0": s0}, "seed": seed,
                "analyticRatioLB": gap.analytic_ratio_lb}
        return Instance(gap.objective, gap.matroid, meta)
    n = int(params.get("n", 8))
    matroid_family = params.get("matroid", "uniform")
    if matroid_family == "uniform" and "r" in params:
        matroid = Uniform(n, int(params["r"]))
    else:
        matroid = random_matroid(matroid_family, n, rng)
    n = matroid.n
    if family == "graph":
        s0 = float(params.get("sigma0", 2.0))
        p = float(params.get("p", 0.4))
        obj = gen_graph_semimetric(n, random_graph(n, p, rng), s0)
        used = {"n": n, "sigma0": s0, "p": p}
    elif family == "negtype":
        d = int(params.get("d", 2))
        obj = gen_negative_type(random_points(n, d, rng))
        used = {"n": n, "d": d}
    elif family == "powered":
        d, power = int(params.get("d", 2)), float(params.get("power", 2.0))
        obj = gen_powered_metric(random_points(n, d, rng), power)
        used = {"n": n, "d": d, "power": power}
    elif family == "procurement":
        m_groups, scale = int(params.get("m", 3)), float(params.get("bid_scale", 1.0))
        obj = gen_procurement(n, m_groups, rng, scale)
        used = {"n": n, "m": m_groups, "bidScale": scale}
    else:
        raise InstanceError(f"unknown family {family!r}")
    used["matroid"] = matroid_family
    return Instance(obj, matroid, {"generator": family, "params": used, "seed": seed})
