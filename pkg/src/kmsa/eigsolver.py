"""Symmetric-definite generalized eigensolver.

Solves H u = xi M u for the d algebraically smallest eigenpairs via the
stable congruence route: Cholesky-factor M, transform to a standard symmetric
problem, solve, back-transform. Ordering (ascending eigenvalues) and the sign
convention (largest-magnitude entry of each vector positive, ties to the
lowest index) are part of the contract so downstream embeddings and golden
files are reproducible. Bases of repeated eigenvalues are not unique; compare
subspace projectors, not raw vectors.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .errors import NumericError


def fix_signs(V: np.ndarray) -> np.ndarray:
    """Flip columns so each one's largest-magnitude entry is positive."""
    V = V.copy()
    for i in range(V.shape[1]):
        j = int(np.argmax(np.abs(V[:, i])))  # argmax takes the lowest index on ties
        if V[j, i] < 0:
            V[:, i] = -V[:, i]
    return V


def generalized_eigh(H: np.ndarray, M_ridge: np.ndarray, d: int):
    """d smallest eigenpairs of the pencil (H, M_ridge).

    Returns (values, vectors): values ascending, vectors N x d with
    V^T M_ridge V = I. Raises NumericError if M_ridge is not positive
    definite or a computed pair violates its backward-error bound.
    """
    H = np.asarray(H, dtype=float)
    M_ridge = np.asarray(M_ridge, dtype=float)
    n = H.shape[0]
    if not (1 <= d <= n):
        raise NumericError(f"requested {d} eigenpairs from an order-{n} pencil")
    try:
        L = sla.cholesky(M_ridge, lower=True)
    except sla.LinAlgError as exc:
        raise NumericError(
            "constraint matrix is not positive definite; raise the ridge"
        ) from exc

    Linv = sla.solve_triangular(L, np.eye(n), lower=True)
    Ht = Linv @ H @ Linv.T
    Ht = 0.5 * (Ht + Ht.T)
    w, Q = np.linalg.eigh(Ht)
    V = fix_signs(Linv.T @ Q[:, :d])
    w = w[:d]

    scale = 1e-6 * np.linalg.norm(H, "fro") / np.sqrt(n)
    for i in range(d):
        resid = np.linalg.norm(H @ V[:, i] - w[i] * (M_ridge @ V[:, i]))
        if resid > (1.0 + abs(w[i])) * scale:
            raise NumericError(
                f"eigenpair {i} residual {resid:.3e} exceeds its backward-error bound"
            )
    return w, V
