"""Domain types, alignment metrics, and the objective functions shared by the
exhaustive oracle and the relaxation solver."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GAUSSIAN_WIGNER = "gw"
ERDOS_RENYI = "er"
STUDENT_T = "st"
MODEL_KINDS = (GAUSSIAN_WIGNER, ERDOS_RENYI, STUDENT_T)


def _frozen_array(a, dtype) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Permutation:
    """A bijection on {0, ..., n-1}; ``map[i]`` is the image of vertex i."""

    map: np.ndarray

    def __post_init__(self):
        m = _frozen_array(self.map, np.intp)
        if m.ndim != 1:
            raise ValueError("permutation map must be one-dimensional")
        n = m.size
        if n == 0:
            raise ValueError("empty permutation")
        counts = np.bincount(m, minlength=n) if m.min() >= 0 and m.max() < n else None
        if counts is None or not np.all(counts == 1):
            raise ValueError("map is not a bijection on {0..n-1}")
        object.__setattr__(self, "map", m)

    @property
    def n(self) -> int:
        return self.map.size

    def __len__(self) -> int:
        return self.map.size

    def __call__(self, i: int) -> int:
        return int(self.map[i])

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Permutation":
        return cls(rng.permutation(n))

    def inverse(self) -> "Permutation":
        inv = np.empty(self.n, dtype=np.intp)
        inv[self.map] = np.arange(self.n)
        return Permutation(inv)

    def compose(self, inner: "Permutation") -> "Permutation":
        """Return self o inner, i.e. i -> self(inner(i))."""
        if inner.n != self.n:
            raise ValueError("size mismatch in composition")
        return Permutation(self.map[inner.map])

    def matrix(self) -> np.ndarray:
        """Dense 0/1 permutation matrix P with P[i, map[i]] = 1."""
        p = np.zeros((self.n, self.n))
        p[np.arange(self.n), self.map] = 1.0
        return p


@dataclass(frozen=True)
class ModelParams:
    """Parameters of one of the three correlated attributed-graph models.

    ``kind`` is one of ``"gw"`` (Gaussian Wigner), ``"er"`` (Erdos-Renyi,
    requires ``p``), ``"st"`` (Student-t, requires ``df`` > 2). ``rho`` is the
    edge correlation and ``r`` the per-coordinate feature correlation; both
    live in [0, 1], where 1 means perfectly matched pairs.
    """

    kind: str
    n: int
    d: int
    rho: float
    r: float
    p: float | None = None
    df: float | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive")
        if not (0.0 <= self.rho <= 1.0 and 0.0 <= self.r <= 1.0):
            raise ValueError("correlations must lie in [0, 1]; flip signs upstream "
                             "to reduce negative correlations to positive ones")
        if self.kind == ERDOS_RENYI:
            if self.p is None or not (0.0 < self.p < 1.0):
                raise ValueError("Erdos-Renyi model needs connection probability p in (0, 1)")
        if self.kind == STUDENT_T:
            if self.df is None or not (self.df > 2.0):
                raise ValueError("Student-t model needs df > 2 (finite variance)")


@dataclass(frozen=True)
class AlignmentInstance:
    """Two symmetric weighted graphs with node features, optionally carrying
    the hidden permutation that matches graph 1 vertices to graph 2 vertices.

    ``a1``, ``a2`` are n x n symmetric with exactly-zero diagonal; ``x``, ``y``
    are the n x d feature matrices (row v = feature vector of vertex v).
    """

    a1: np.ndarray
    a2: np.ndarray
    x: np.ndarray
    y: np.ndarray
    truth: Permutation | None = None

    def __post_init__(self):
        a1 = _frozen_array(self.a1, float)
        a2 = _frozen_array(self.a2, float)
        x = _frozen_array(self.x, float)
        y = _frozen_array(self.y, float)
        n = a1.shape[0]
        for name, a in (("a1", a1), ("a2", a2)):
            if a.shape != (n, n):
                raise ValueError(f"{name} must be square of matching size")
            if not np.array_equal(a, a.T):
                raise ValueError(f"{name} must be symmetric")
            if np.any(np.diagonal(a) != 0.0):
                raise ValueError(f"{name} must have zero diagonal (no self-loops)")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} has non-finite entries")
        if x.ndim != 2 or y.ndim != 2 or x.shape != y.shape or x.shape[0] != n:
            raise ValueError("x and y must both be n x d")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("features have non-finite entries")
        if self.truth is not None and self.truth.n != n:
            raise ValueError("truth permutation size mismatch")
        for name, a in (("a1", a1), ("a2", a2), ("x", x), ("y", y)):
            object.__setattr__(self, name, a)

    @property
    def n(self) -> int:
        return self.a1.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class DoublyStochastic:
    """An n x n matrix lying within ``tol`` of the doubly stochastic polytope."""

    mat: np.ndarray
    tol: float = 1e-8

    def __post_init__(self):
        m = _frozen_array(self.mat, float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if np.any(m < -self.tol) or np.any(m > 1.0 + self.tol):
            raise ValueError("entries leave [0, 1] by more than tol")
        if feasibility_residual(m) > self.tol:
            raise ValueError("row/column sums deviate from 1 by more than tol")
        object.__setattr__(self, "mat", m)

    @property
    def n(self) -> int:
        return self.mat.shape[0]


def feasibility_residual(mat: np.ndarray) -> float:
    """Largest deviation of any row or column sum from 1."""
    rows = np.abs(mat.sum(axis=1) - 1.0).max()
    cols = np.abs(mat.sum(axis=0) - 1.0).max()
    return float(max(rows, cols))


def phi(x: float) -> float:
    """x / (1 - x^2), the correlation-to-score weight; requires |x| < 1."""
    if not abs(x) < 1.0:
        raise ValueError("phi requires |x| < 1")
    return x / (1.0 - x * x)


def lambda_from(rho: float, r: float) -> float:
    """Edge weight phi(rho) / (phi(rho) + phi(r)) balancing the two loss terms.

    Both correlations must be strictly inside (0, 1): at 0 the weight
    degenerates, so callers wanting pure-edge or pure-feature behaviour pass
    lam = 1 or lam = 0 to the solver directly.
    """
    if not (0.0 < rho < 1.0 and 0.0 < r < 1.0):
        raise ValueError("lambda_from requires rho, r in (0, 1)")
    pr = phi(rho)
    return pr / (pr + phi(r))


def overlap(p1: Permutation, p2: Permutation) -> float:
    """Fraction of vertices on which the two permutations agree."""
    if p1.n != p2.n:
        raise ValueError("permutation size mismatch")
    return float(np.count_nonzero(p1.map == p2.map)) / p1.n


def hamming(p1: Permutation, p2: Permutation) -> int:
    """Number of disagreeing vertices, n * (1 - overlap); never 1 for bijections."""
    if p1.n != p2.n:
        raise ValueError("permutation size mismatch")
    return int(np.count_nonzero(p1.map != p2.map))


def _check_score_params(inst: AlignmentInstance, perm: Permutation, rho: float, r: float):
    if perm.n != inst.n:
        raise ValueError("permutation size mismatch")
    if not (0.0 < rho < 1.0 and 0.0 < r < 1.0):
        raise ValueError("similarity score requires rho, r in (0, 1)")


def similarity_score(inst: AlignmentInstance, perm: Permutation, rho: float, r: float) -> float:
    """Log-likelihood similarity of matching graph 1 to graph 2 via ``perm``:
    phi(rho) * sum over unordered pairs of matched edge-weight products plus
    phi(r) * sum over vertices of matched feature inner products.
    """
    _check_score_params(inst, perm, rho, r)
    p = perm.map
    # a2 reindexed by the match; the full-matrix sum counts each pair twice
    edge_cross = 0.5 * np.sum(inst.a1 * inst.a2[np.ix_(p, p)])
    feat_cross = np.sum(inst.x * inst.y[p])
    return float(phi(rho) * edge_cross + phi(r) * feat_cross)


def squared_loss(inst: AlignmentInstance, perm: Permutation, lam: float) -> float:
    """Weighted squared mismatch under ``perm``:
    lam * sum_{i<j} (a1_ij - a2_{perm(i)perm(j)})^2
    + (1 - lam) * sum_i ||x_i - y_{perm(i)}||^2.
    """
    if perm.n != inst.n:
        raise ValueError("permutation size mismatch")
    if not (0.0 <= lam <= 1.0):
        raise ValueError("lam must lie in [0, 1]")
    p = perm.map
    edge = 0.5 * np.sum((inst.a1 - inst.a2[np.ix_(p, p)]) ** 2)
    feat = np.sum((inst.x - inst.y[p]) ** 2)
    return float(lam * edge + (1.0 - lam) * feat)


def pairwise_sqdist(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Matrix of squared Euclidean distances between rows of x and rows of y."""
    sq = (x * x).sum(axis=1)[:, None] + (y * y).sum(axis=1)[None, :] - 2.0 * (x @ y.T)
    return np.maximum(sq, 0.0)


def qap_objective(inst: AlignmentInstance, pi: np.ndarray, lam: float) -> float:
    """Relaxed objective lam * ||A1 P - P A2||_F^2 + (1-lam) * sum_kj D_kj P_kj^2
    with D_kj = ||x_k - y_j||^2, defined for any square matrix P.

    On a permutation matrix the Frobenius edge term counts every unordered
    pair twice, so relative to :func:`squared_loss` at the same ``lam`` the
    edge weight is doubled: qap_objective(P_pi, lam) equals
    (1 + lam) * squared_loss(pi, 2*lam / (1 + lam)).
    """
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (inst.n, inst.n):
        raise ValueError("pi must be n x n")
    if not (0.0 <= lam <= 1.0):
        raise ValueError("lam must lie in [0, 1]")
    e = inst.a1 @ pi - pi @ inst.a2
    d = pairwise_sqdist(inst.x, inst.y)
    return float(lam * np.sum(e * e) + (1.0 - lam) * np.sum(d * pi * pi))


def regularized_objective(inst: AlignmentInstance, pi: np.ndarray, lam: float, mu: float) -> float:
    """qap_objective plus the vertex-pushing penalty mu * sum_kj P_kj (1 - P_kj),
    which vanishes exactly on 0/1 matrices."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    pi = np.asarray(pi, dtype=float)
    return qap_objective(inst, pi, lam) + float(mu * np.sum(pi * (1.0 - pi)))
