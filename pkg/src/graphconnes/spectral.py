"""Spectral norms of self-adjoint graph operators by power iteration."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .graph import Graph, GraphError
from .operators import GraphOperator, adjacency

RESTARTS = 5
SEED = 42
# below this size the Gram matrix is iterated densely
DENSE_GRAM = 512


@dataclass(frozen=True)
class NormEstimate:
    """Operator-norm estimate with a Rayleigh-quotient certificate.

    ``lower_bound`` is the Rayleigh value itself (never above the true norm);
    ``upper_bound`` is the Hölder bound ``sqrt(||A||_1 ||A||_inf)``.
    """

    value: float
    iterations: int
    residual: float
    lower_bound: float
    upper_bound: float


def _as_matrix(op) -> sp.csr_matrix:
    if isinstance(op, GraphOperator):
        return op.matrix
    return sp.csr_matrix(op)


def spectral_norm(
    op,
    tol: float = 1e-10,
    *,
    seed: int = SEED,
    restarts: int = RESTARTS,
    max_iterations: int = 100_000,
) -> NormEstimate:
    """Largest |eigenvalue| of a self-adjoint operator.

    Raises ValueError when a randomized adjointness test fails.
    """
    mat = _as_matrix(op)
    wrapped = op if isinstance(op, GraphOperator) else GraphOperator("op", "", "", mat)
    if mat.shape[0] != mat.shape[1] or not wrapped.is_self_adjoint(seed=seed):
        raise ValueError("spectral_norm needs a self-adjoint operator")
    return operator_norm(mat, tol, seed=seed, restarts=restarts,
                         max_iterations=max_iterations)


def operator_norm(
    op,
    tol: float = 1e-10,
    *,
    seed: int = SEED,
    restarts: int = RESTARTS,
    max_iterations: int = 100_000,
) -> NormEstimate:
    """Operator norm of any matrix by block power iteration on ``op* op``.

    The ``restarts`` random start vectors are iterated together and
    re-orthonormalized, with a Rayleigh-Ritz step picking the top pair, so
    clusters of nearly equal top eigenvalues do not stall convergence. Stops
    once the residual of the top Ritz pair certifies ``tol`` on the norm.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    mat = _as_matrix(op)
    abs_mat = abs(mat)
    if mat.nnz == 0:
        return NormEstimate(0.0, 0, 0.0, 0.0, 0.0)
    holder = float(np.sqrt(abs_mat.sum(axis=0).max() * abs_mat.sum(axis=1).max()))
    gram = (mat.conj().T @ mat).tocsr()
    if gram.shape[0] <= DENSE_GRAM:
        gram = gram.toarray()

    dim = mat.shape[1]
    block = max(1, min(restarts, dim))
    rng = np.random.default_rng(seed)
    x, _ = np.linalg.qr(rng.standard_normal((dim, block)))
    rho, res, it = 0.0, np.inf, 0
    for it in range(1, max_iterations + 1):
        y = gram @ x
        theta, w = np.linalg.eigh(x.conj().T @ y)
        top = w[:, -1]
        rho = float(theta[-1])
        res = float(np.linalg.norm(y @ top - rho * (x @ top)))
        if res <= tol * max(math.sqrt(max(rho, 0.0)), 1.0):
            break
        x, _ = np.linalg.qr(y @ w[:, ::-1])
    # the Hoelder bound is rigorous, so round-off above it is clipped
    value = min(math.sqrt(max(rho, 0.0)), holder)
    # some eigenvalue of op* op lies within res of rho; map that through sqrt
    residual = math.sqrt(max(rho, 0.0) + res) - value
    return NormEstimate(value, it, residual, value, holder)


def adjacency_norm_bounds(g: Graph) -> tuple[float, float]:
    """Average degree and maximal degree, which bracket ||A||."""
    if g.directed:
        raise GraphError(
            "adjacency_norm_bounds needs an undirected graph; use A_in + A_out "
            "for directed graphs"
        )
    if g.node_count == 0:
        return 0.0, 0.0
    degrees = g.degrees()
    return float(degrees.sum() / g.node_count), float(degrees.max())


def _is_nested(small: Graph, big: Graph) -> bool:
    if small.node_count > big.node_count or small.directed != big.directed:
        return False
    n = small.node_count
    return small.edges == tuple(e for e in big.edges if e[0] < n and e[1] < n)


def norm_exhaustion(
    generator: Callable[[int], Graph],
    max_level: int,
    tol: float = 1e-9,
    *,
    min_level: int = 1,
    operator: Callable[[Graph], GraphOperator] = adjacency,
) -> list[NormEstimate]:
    """Norm estimates along a nested family ``generator(min_level..max_level)``.

    Each level must be the induced subgraph of the next on its first nodes.
    The estimates must be nondecreasing up to ``10 * tol``.
    """
    graphs = [generator(level) for level in range(min_level, max_level + 1)]
    for level, (small, big) in enumerate(zip(graphs, graphs[1:]), start=min_level):
        if not _is_nested(small, big):
            raise GraphError(f"level {level} is not an induced subgraph of level {level + 1}")
    estimates = [spectral_norm(operator(g), tol) for g in graphs]
    for level, (a, b) in enumerate(zip(estimates, estimates[1:]), start=min_level):
        if b.value < a.value - 10 * tol:
            raise ArithmeticError(
                f"norm decreased from level {level} ({a.value}) to {level + 1} ({b.value})"
            )
    return estimates
