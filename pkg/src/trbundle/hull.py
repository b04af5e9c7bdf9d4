"""Minimum-norm point of the convex hull of finitely many vectors (Wolfe's method)."""

from __future__ import annotations

import numpy as np


def _affine_minimizer(C: np.ndarray) -> np.ndarray:
    """Weights beta (summing to 1, sign-free) minimizing ||C^T beta|| over the affine hull."""
    k = C.shape[0]
    M = np.zeros((k + 1, k + 1))
    M[:k, :k] = C @ C.T
    M[:k, k] = 1.0
    M[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return sol[:k]


def min_norm_point_with_coefficients(vectors, tol: float = 1e-12, max_iter: int = 0):
    """Min-norm point of conv{vectors} and its convex-combination coefficients.

    Wolfe's active-set ("corral") method; terminates when the Wolfe
    optimality criterion min_j p_j^T x >= ||x||^2 holds up to ``tol`` times
    the squared data scale.
    """
    P = np.atleast_2d(np.asarray(vectors, dtype=float))
    m, n = P.shape
    if m == 0:
        raise ValueError("empty vector list")
    if not np.isfinite(P).all():
        raise ValueError("non-finite input vectors")
    if max_iter <= 0:
        max_iter = 16 * m + 64

    sq = np.einsum("ij,ij->i", P, P)
    scale = max(1.0, float(sq.max()))
    j0 = int(np.argmin(sq))
    corral = [j0]
    alpha = np.array([1.0])
    x = P[j0].copy()

    for _ in range(max_iter):
        dots = P @ x
        jnew = int(np.argmin(dots))
        if dots[jnew] >= float(x @ x) - tol * scale:
            break  # Wolfe criterion: no vertex improves
        if jnew in corral:
            break  # numerically stalled; x is the best representable point
        corral.append(jnew)
        alpha = np.append(alpha, 0.0)

        while True:
            C = P[corral]
            beta = _affine_minimizer(C)
            if beta.min() > tol:
                alpha = beta
                break
            # walk from alpha toward beta until a coefficient hits zero
            mask = beta <= tol
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(mask, alpha / (alpha - beta), np.inf)
            theta = min(1.0, float(ratios.min()))
            alpha = (1.0 - theta) * alpha + theta * beta
            drop = int(np.argmin(np.where(mask, alpha, np.inf)))
            corral.pop(drop)
            alpha = np.delete(alpha, drop)
            alpha = np.clip(alpha, 0.0, None)
            s = alpha.sum()
            alpha = alpha / s if s > 0 else np.full(len(corral), 1.0 / len(corral))
            if len(corral) == 1:
                alpha = np.array([1.0])
                break
        x = P[corral].T @ alpha

    lam = np.zeros(m)
    for idx, a in zip(corral, alpha):
        lam[idx] += a
    return x, lam


def min_norm_point(vectors, tol: float = 1e-12) -> np.ndarray:
    """Min-norm point of the convex hull of ``vectors`` (rows)."""
    x, _ = min_norm_point_with_coefficients(vectors, tol=tol)
    return x
