"""Quadratic objectives, smoothness constants and exact multilinear extensions.

The diversity objective is f(S) = sum_{u<v in S} A_uv + sum_{v in S} b_v with
multilinear extension F(x) = 1/2 x^T A x + b^T x. The procurement objective is
the concave quadratic F(x) = b^T x - 1/2 x^T C x with C = collusion + G^T G.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .tolerances import POINTWISE_SLACK, SYMMETRY_ATOL


class ObjectiveError(ValueError):
    pass


class InfiniteSigma(ObjectiveError):
    """A positive entry A_ik is bridged by two zero entries, so no finite sigma exists."""

    def __init__(self, triple):
        self.triple = triple
        super().__init__(f"no finite sigma: A{triple[0], triple[2]} > 0 but A{triple[0], triple[1]} + A{triple[1], triple[2]} = 0")


def _as_matrix(A, name="A") -> np.ndarray:
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ObjectiveError(f"{name} must be a square matrix")
    if not np.all(np.isfinite(A)):
        raise ObjectiveError(f"{name} has non-finite entries")
    if np.max(np.abs(A - A.T), initial=0.0) > SYMMETRY_ATOL:
        raise ObjectiveError(f"{name} is not symmetric")
    return A


def _indicator(n: int, s: Iterable[int]) -> np.ndarray:
    x = np.zeros(n)
    x[list(s)] = 1.0
    return x


class QuadraticObjective:
    """F(x) = 1/2 x^T A x + b^T x with symmetric, zero-diagonal A."""

    is_quadratic = True

    def __init__(self, A, b=None):
        A = _as_matrix(A)
        if np.any(np.diag(A) != 0):
            raise ObjectiveError("A must have zero diagonal")
        n = A.shape[0]
        if n < 1:
            raise ObjectiveError("objective needs at least one element")
        b = np.zeros(n) if b is None else np.array(b, dtype=float)
        if b.shape != (n,):
            raise ObjectiveError(f"b must have length {n}")
        # symmetrize exactly so later sums do not depend on which triangle is read
        self.A = (A + A.T) / 2
        self.b = b
        self.A.setflags(write=False)
        self.b.setflags(write=False)
        self.n = n

    @property
    def is_diversity(self) -> bool:
        return bool(np.all(self.A >= 0) and np.all(self.b >= 0))

    @property
    def hessian(self) -> np.ndarray:
        return self.A

    def eval_set(self, s: Iterable[int]) -> float:
        idx = sorted(set(int(e) for e in s))
        if not idx:
            return 0.0
        sub = self.A[np.ix_(idx, idx)]
        return float(np.triu(sub, 1).sum() + self.b[idx].sum())

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.A @ x + self.b @ x)

    def gradient(self, x) -> np.ndarray:
        return self.A @ np.asarray(x, dtype=float) + self.b

    def to_spec(self) -> dict:
        return {"A": self.A.tolist(), "b": self.b.tolist()}

    def __eq__(self, other):
        return (
            isinstance(other, QuadraticObjective)
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.b, other.b)
        )

    def __repr__(self):
        return f"QuadraticObjective(n={self.n})"


class ProcurementObjective:
    """Concave quadratic F(x) = b^T x - 1/2 x^T C x, with C = collusion + G^T G."""

    is_quadratic = True
    is_diversity = False

    def __init__(self, collusion, G, bids):
        collusion = _as_matrix(collusion, "collusion")
        if np.any(collusion < 0):
            raise ObjectiveError("collusion matrix must be non-negative")
        n = collusion.shape[0]
        G = np.array(G, dtype=float).reshape(-1, n) if np.size(G) else np.zeros((0, n))
        bids = np.array(bids, dtype=float)
        if bids.shape != (n,):
            raise ObjectiveError(f"bids must have length {n}")
        if np.any(bids < 0):
            raise ObjectiveError("bids must be non-negative")
        self.collusion = (collusion + collusion.T) / 2
        self.G = G
        self.b = bids
        self.n = n
        self.C = self.collusion + G.T @ G
        self.U = float(np.max(np.abs(self.C), initial=0.0))
        self.eta = n**3 * self.U

    @property
    def hessian(self) -> np.ndarray:
        return -self.C

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.b @ x - 0.5 * x @ self.C @ x)

    def eval_set(self, s: Iterable[int]) -> float:
        return self.value(_indicator(self.n, s))

    def gradient(self, x) -> np.ndarray:
        return self.b - self.C @ np.asarray(x, dtype=float)

    def monotone_check(self) -> bool:
        """The affine gradient b - Cx is smallest over the box at the vertex picking positive C_ij."""
        worst = self.b - np.clip(self.C, 0, None).sum(axis=1)
        return bool(np.all(worst >= 1.0 / self.n - POINTWISE_SLACK))

    def to_spec(self) -> dict:
        return {"collusion": self.collusion.tolist(), "G": self.G.tolist(), "bids": self.b.tolist()}

    def __eq__(self, other):
        return (
            isinstance(other, ProcurementObjective)
            and np.array_equal(self.collusion, other.collusion)
            and np.array_equal(self.G, other.G)
            and np.array_equal(self.b, other.b)
        )

    def __repr__(self):
        return f"ProcurementObjective(n={self.n}, m={self.G.shape[0]})"


@dataclass(frozen=True)
class SigmaCertificate:
    """Result of the triple scan.

    ``sigma`` is the largest ratio A_ik / (A_ij + A_jk) over distinct triples.
    ``oss_sigma`` is the constant the smoothness guarantees are stated with:
    the definition also admits repeated indices, and the triple (i, i, k)
    contributes the ratio 1, so any nonzero A needs at least 1.
    """

    sigma: float
    witness: tuple[int, int, int] | None
    oss_sigma: float = field(default=0.0)


def estimate_sigma(A) -> SigmaCertificate:
    A = _as_matrix(A)
    n = A.shape[0]
    if np.any(A < 0) or np.any(np.diag(A) != 0):
        raise ObjectiveError("sigma estimation needs a non-negative, zero-diagonal matrix")
    if not np.any(A > 0):
        return SigmaCertificate(0.0, None, 0.0)
    oss_floor = 1.0
    if n < 3:
        return SigmaCertificate(0.0, None, oss_floor)
    # denom[i, j, k] = A_ij + A_jk ; numer[i, j, k] = A_ik
    denom = A[:, :, None] + A[None, :, :]
    numer = np.broadcast_to(A[:, None, :], (n, n, n))
    i, j, k = np.indices((n, n, n))
    distinct = (i != j) & (j != k) & (i != k)
    bridged = distinct & (denom == 0) & (numer > 0)
    if np.any(bridged):
        flat = int(np.flatnonzero(bridged)[0])
        raise InfiniteSigma(tuple(int(v) for v in np.unravel_index(flat, (n, n, n))))
    valid = distinct & (denom > 0)
    if not np.any(valid):
        return SigmaCertificate(0.0, None, oss_floor)
    ratio = np.where(valid, numer / np.where(valid, denom, 1.0), -np.inf)
    flat = int(np.argmax(ratio))  # first maximum in C order is the lexicographically smallest triple
    sigma = float(ratio.flat[flat])
    witness = tuple(int(v) for v in np.unravel_index(flat, (n, n, n)))
    return SigmaCertificate(sigma, witness, max(sigma, oss_floor))


def _check_nonzero(x):
    x = np.asarray(x, dtype=float)
    if not np.any(x != 0):
        raise ObjectiveError("x must be nonzero")
    return x


def check_oss_sufficient(q: QuadraticObjective, x, sigma: float) -> bool:
    """Pairwise condition ||x||_1 A_ij <= sigma (g_i + g_j) with g the gradient at x."""
    x = _check_nonzero(x)
    g = q.gradient(x)
    lhs = np.abs(x).sum() * q.hessian
    rhs = sigma * (g[:, None] + g[None, :]) + POINTWISE_SLACK
    off = ~np.eye(q.n, dtype=bool)
    return bool(np.all(lhs[off] <= rhs[off]))


def check_oss_direct(q, x, u, sigma: float) -> bool:
    """One-sided smoothness at x in direction u: 1/2 u^T H u <= sigma (|u|/|x|) u^T grad F(x)."""
    x = _check_nonzero(x)
    u = np.asarray(u, dtype=float)
    lhs = 0.5 * u @ q.hessian @ u
    rhs = sigma * (np.abs(u).sum() / np.abs(x).sum()) * (u @ q.gradient(x))
    return bool(lhs <= rhs + POINTWISE_SLACK)


def gradient_growth_bound(q, x, u, eps: float, sigma: float) -> tuple[float, float]:
    """(u^T grad F(x + eps u), (|x + eps u|_1 / |x|_1)^(2 sigma) u^T grad F(x))."""
    x = _check_nonzero(x)
    u = np.asarray(u, dtype=float)
    y = x + eps * u
    lhs = float(u @ q.gradient(y))
    ratio = np.abs(y).sum() / np.abs(x).sum()
    rhs = float(ratio ** (2 * sigma) * (u @ q.gradient(x)))
    return lhs, rhs


def decomposition_identity(q: QuadraticObjective, family) -> tuple[float, float]:
    """Evaluate F at x = sum_k w_k 1_{I_k} directly and through the per-set expansion."""
    weights = [float(w) for w, _ in family]
    inds = [_indicator(q.n, s) for _, s in family]
    x = sum((w * v for w, v in zip(weights, inds)), np.zeros(q.n))
    lhs = q.value(x)
    rhs = 0.0
    for k, (w, v) in enumerate(zip(weights, inds)):
        rhs += w * (q.b @ v) + w * w * (0.5 * v @ q.A @ v)
        for l in range(k + 1, len(inds)):
            rhs += w * weights[l] * (v @ q.A @ inds[l])
    return lhs, float(rhs)


TABLE_MAX_N = 16


class SetFunctionTable:
    """Set function stored as 2^n values; bit i of the index marks element i."""

    def __init__(self, n: int, values: Sequence[float]):
        if not 1 <= n <= TABLE_MAX_N:
            raise ObjectiveError(f"set-function tables are limited to 1 <= n <= {TABLE_MAX_N}")
        values = np.asarray(values, dtype=float)
        if values.shape != (1 << n,):
            raise ObjectiveError(f"expected {1 << n} values")
        self.n = n
        self.values = values

    @classmethod
    def from_function(cls, n: int, f) -> "SetFunctionTable":
        if not 1 <= n <= TABLE_MAX_N:
            raise ObjectiveError(f"set-function tables are limited to 1 <= n <= {TABLE_MAX_N}")
        vals = [f(frozenset(i for i in range(n) if mask >> i & 1)) for mask in range(1 << n)]
        return cls(n, vals)

    @classmethod
    def from_quadratic(cls, q: QuadraticObjective) -> "SetFunctionTable":
        n = q.n
        if not 1 <= n <= TABLE_MAX_N:
            raise ObjectiveError(f"set-function tables are limited to 1 <= n <= {TABLE_MAX_N}")
        masks = np.arange(1 << n)
        bits = ((masks[:, None] >> np.arange(n)) & 1).astype(float)
        vals = 0.5 * np.einsum("si,ij,sj->s", bits, q.A, bits) + bits @ q.b
        return cls(n, vals)

    def __call__(self, s: Iterable[int]) -> float:
        mask = 0
        for e in s:
            mask |= 1 << int(e)
        return float(self.values[mask])

    @property
    def empty_value(self) -> float:
        return float(self.values[0])

    def is_monotone(self, atol: float = 0.0) -> bool:
        masks = np.arange(1 << self.n)
        for i in range(self.n):
            without = masks[(masks >> i & 1) == 0]
            if np.any(self.values[without | (1 << i)] < self.values[without] - atol):
                return False
        return True


def exact_multilinear(table: SetFunctionTable, x) -> float:
    """E[f(R(x))] with R(x) containing each i independently with probability x_i."""
    x = np.asarray(x, dtype=float)
    if x.shape != (table.n,):
        raise ObjectiveError(f"x must have length {table.n}")
    probs = np.ones(1)
    for xi in x:
        probs = np.concatenate([probs * (1 - xi), probs * xi])
    return float(probs @ table.values)
