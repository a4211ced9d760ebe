"""Graph constructions (S, B) per recipe, the Laplacian-like quadratic P,
and the ridged constraint matrix.

Every recipe keeps S's diagonal at zero (self-similarity never contributes to
the pairwise objective) and yields symmetric S, so P = E - S with
E = diag(row sums) has rows summing to zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ConvergenceWarning, GraphError, NumericError
from .kernels import median_heuristic_bandwidth, pairwise_sq_dists
from .types import MEDIAN, GraphRecipe


@dataclass(frozen=True)
class GraphPair:
    """Similarity S, constraint factor B, and whether the kernelized
    constraint is K B K (uses_kbk) or K itself. notes carries non-fatal
    construction diagnostics (e.g. lasso columns that hit the iteration cap)."""

    S: np.ndarray
    B: np.ndarray
    uses_kbk: bool
    notes: tuple = ()


def pca_graph(n: int) -> GraphPair:
    """Dense -1/n off-diagonal similarity; constraint is K itself."""
    if n < 2:
        raise GraphError(f"need at least 2 samples, got {n}")
    S = np.full((n, n), -1.0 / n)
    np.fill_diagonal(S, 0.0)
    return GraphPair(S=S, B=np.eye(n), uses_kbk=False)


def lpp_graph(X: np.ndarray, k: int, heat) -> GraphPair:
    """Heat-kernel weights exp(-||x_i - x_j||^2 / t) on the symmetric kNN
    graph (edge when i is among j's k nearest or vice versa); B is the degree
    matrix of S."""
    X = np.asarray(X, dtype=float)
    n = X.shape[1]
    if not 1 <= k < n:
        raise GraphError(f"neighbor count must satisfy 1 <= k < N, got k={k}, N={n}")
    t = float(median_heuristic_bandwidth(X) ** 2 if heat == MEDIAN else heat)
    if t <= 0:
        raise GraphError("heat parameter must be positive")
    sq = pairwise_sq_dists(X)
    order = np.argsort(sq, axis=0, kind="stable")
    adj = np.zeros((n, n), dtype=bool)
    for j in range(n):
        neighbors = [i for i in order[:, j] if i != j][:k]
        adj[neighbors, j] = True
    adj |= adj.T  # the OR rule keeps the graph symmetric
    S = np.where(adj, np.exp(-sq / t), 0.0)
    np.fill_diagonal(S, 0.0)
    return GraphPair(S=S, B=np.diag(S.sum(axis=1)), uses_kbk=True)


def lda_graph(labels) -> GraphPair:
    """Within-class +1/n_c, between-class -1/n_c weights, symmetrized as
    (S + S^T)/2 since unequal class sizes make the raw entries asymmetric;
    B is the centering matrix I - (1/N) ones."""
    labels = np.asarray(labels, dtype=int)
    n = len(labels)
    if n < 2:
        raise GraphError(f"need at least 2 samples, got {n}")
    if labels.min() < 0:
        raise GraphError("class ids must be >= 0")
    counts = np.bincount(labels)
    missing = np.nonzero(counts == 0)[0]
    if missing.size:
        raise GraphError(
            f"class ids {missing.tolist()} have no members after 0..C-1 compaction"
        )
    same = labels[:, None] == labels[None, :]
    delta = np.where(same, 1.0, -1.0)
    S = delta / counts[labels][:, None]
    S = 0.5 * (S + S.T)
    np.fill_diagonal(S, 0.0)
    B = np.eye(n) - np.full((n, n), 1.0 / n)
    return GraphPair(S=S, B=B, uses_kbk=True)


def soft_threshold(z: float, gamma: float) -> float:
    if z > gamma:
        return z - gamma
    if z < -gamma:
        return z + gamma
    return 0.0


def lasso_coordinate_descent(
    A: np.ndarray,
    y: np.ndarray,
    lam: float,
    max_iters: int,
    tol: float = 1e-6,
):
    """Minimize 0.5 ||y - A c||^2 + lam ||c||_1 by cyclic coordinate descent.

    Returns (c, converged); converged is False when max_iters full sweeps pass
    without the largest coefficient change dropping to tol.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    p = A.shape[1]
    col_sq = np.sum(A * A, axis=0)
    c = np.zeros(p)
    resid = y.copy()
    for _ in range(max_iters):
        max_delta = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            old = c[j]
            resid += A[:, j] * old
            rho = float(A[:, j] @ resid)
            new = soft_threshold(rho, lam) / col_sq[j]
            resid -= A[:, j] * new
            c[j] = new
            max_delta = max(max_delta, abs(new - old))
        if max_delta <= tol:
            return c, True
    return c, False


def spp_graph(X: np.ndarray, lam: float, max_iters: int) -> GraphPair:
    """Sparse-coding similarity: column i of M reconstructs x_i from the other
    samples under an l1 penalty (self-coefficient fixed at 0), then
    S = M + M^T + M^T M with the diagonal zeroed; constraint is K."""
    X = np.asarray(X, dtype=float)
    n = X.shape[1]
    if n < 2:
        raise GraphError(f"need at least 2 samples, got {n}")
    if lam <= 0:
        raise GraphError("lasso weight must be positive")
    M = np.zeros((n, n))
    notes = []
    others = np.arange(n)
    for i in range(n):
        keep = others != i
        coeffs, converged = lasso_coordinate_descent(
            X[:, keep], X[:, i], lam, max_iters
        )
        M[keep, i] = coeffs
        if not converged:
            notes.append(f"lasso column {i} hit max_iters={max_iters} before tol")
    if notes:
        warnings.warn(
            f"{len(notes)} sparse-coding column(s) hit the iteration cap",
            ConvergenceWarning,
            stacklevel=2,
        )
    S = M + M.T + M.T @ M
    np.fill_diagonal(S, 0.0)
    return GraphPair(S=S, B=np.eye(n), uses_kbk=False, notes=tuple(notes))


def laplacian(S: np.ndarray) -> np.ndarray:
    """P = E - S with E = diag(row sums of S); rows of P sum to zero."""
    S = np.asarray(S, dtype=float)
    return np.diag(S.sum(axis=1)) - S


def constraint_matrix(K: np.ndarray, pair: GraphPair, ridge: float) -> np.ndarray:
    """Ridged constraint: (K B K or K) + ridge * (trace/N) * I, symmetrized.

    The trace-scaled ridge keeps the generalized eigenproblem definite without
    distorting well-conditioned cases. Raises NumericError if the result still
    fails a Cholesky factorization (degenerate kernel; raise the ridge).
    """
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    M = K @ pair.B @ K if pair.uses_kbk else K
    M = 0.5 * (M + M.T)
    M_ridge = M + ridge * (np.trace(M) / n) * np.eye(n)
    M_ridge = 0.5 * (M_ridge + M_ridge.T)
    try:
        sla.cholesky(M_ridge, lower=True)
    except sla.LinAlgError as exc:
        raise NumericError(
            "constraint matrix is not positive definite even after the ridge; "
            "raise the ridge or center/rescale the data"
        ) from exc
    return M_ridge


def build_graph(X: np.ndarray, labels, recipe: GraphRecipe) -> GraphPair:
    """Dispatch a recipe to its construction."""
    n = np.asarray(X).shape[1]
    if recipe.kind == "pca":
        return pca_graph(n)
    if recipe.kind == "lpp":
        return lpp_graph(X, recipe.k, recipe.heat)
    if recipe.kind == "lda":
        if labels is None:
            raise GraphError("lda graph recipe requires labels")
        return lda_graph(labels)
    if recipe.kind == "spp":
        return spp_graph(X, recipe.lasso_lambda, recipe.lasso_max_iters)
    raise GraphError(f"unknown graph recipe {recipe.kind!r}")
