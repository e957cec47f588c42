"""G-optimal experimental design over candidate value vectors.

By the Kiefer-Wolfowitz equivalence theorem the D-optimal (log-det) design
is also G-optimal, with optimal maximum leverage equal to the dimension of
the span. We run a Frank-Wolfe vertex-direction method with away steps on
the log-det objective; rank-deficient inputs are handled by working in an
orthonormal basis of the span.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DesignWeights:
    """Sampling distribution over candidate vectors with its achieved max leverage."""

    alpha: np.ndarray  # (L,) probability vector
    g_value: float
    effective_dim: int

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        if np.any(a < -1e-12) or abs(a.sum() - 1.0) > 1e-9:
            raise ValueError("design weights must form a probability vector")


def effective_dimension(vectors: np.ndarray, rtol: float = 1e-9) -> int:
    """Rank of the span of the candidate vectors."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    s = np.linalg.svd(vectors, compute_uv=False)
    if len(s) == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def leverage_score(vectors: np.ndarray, alpha: np.ndarray) -> tuple[float, np.ndarray]:
    """Max and per-vector leverages v_i' G_alpha^+ v_i on the span of the vectors.

    A vector outside the span of the alpha-supported vectors gets +inf.
    """
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    alpha = np.asarray(alpha, dtype=float)
    if len(alpha) != len(vectors):
        raise ValueError("alpha length does not match the number of vectors")
    g_mat = np.einsum("i,ij,ik->jk", alpha, vectors, vectors)
    g_pinv = np.linalg.pinv(g_mat, hermitian=True)
    per_vector = np.einsum("ij,jk,ik->i", vectors, g_pinv, vectors)
    # Residual outside range(G_alpha) means infinite leverage.
    residual = vectors - vectors @ (g_pinv @ g_mat).T
    norms = np.linalg.norm(vectors, axis=1)
    outside = np.linalg.norm(residual, axis=1) > 1e-8 * np.maximum(norms, 1e-12)
    per_vector = np.where(outside, np.inf, per_vector)
    return float(per_vector.max()), per_vector


def _spanning_subset(u: np.ndarray) -> list[int]:
    """Greedy selection of rows forming a basis of the row span."""
    chosen: list[int] = []
    basis = np.zeros((0, u.shape[1]))
    for i, row in enumerate(u):
        resid = row - basis.T @ (basis @ row) if len(basis) else row
        if np.linalg.norm(resid) > 1e-9 * max(np.linalg.norm(row), 1e-12):
            basis = np.vstack([basis, resid / np.linalg.norm(resid)])
            chosen.append(i)
        if len(basis) == u.shape[1]:
            break
    return chosen


def g_optimal_design(
    vectors: np.ndarray, tolerance: float = 0.05, max_iters: int = 10000
) -> DesignWeights:
    """Approximate G-optimal design: returns alpha with g(alpha) <= k * (1 + tolerance),
    where k is the rank of the span (the Kiefer-Wolfowitz optimum is exactly k).
    """
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    if not np.all(np.isfinite(vectors)):
        raise ValueError("design vectors must be finite")
    num_l = len(vectors)
    k = effective_dimension(vectors)
    if k == 0:
        raise ValueError("all candidate vectors are zero")

    # Work in an orthonormal basis of the span so G is k x k and invertible.
    _, _, vt = np.linalg.svd(vectors, full_matrices=False)
    u = vectors @ vt[:k].T  # (L, k)

    alpha = np.zeros(num_l)
    support = _spanning_subset(u)
    alpha[support] = 1.0 / len(support)

    target = k * (1.0 + tolerance)
    for _ in range(max_iters):
        g_mat = np.einsum("i,ij,ik->jk", alpha, u, u)
        lev = np.einsum("ij,jk,ik->i", u, np.linalg.inv(g_mat), u)
        g_max = lev.max()
        if g_max <= target:
            break
        # Toward step on the max-leverage vertex.
        i_add = int(np.argmax(lev))
        lam_add = (g_max / k - 1.0) / (g_max - 1.0)
        # Away step on the worst supported vertex.
        sup = alpha > 0
        i_away = int(np.flatnonzero(sup)[np.argmin(lev[sup])])
        lev_away = lev[i_away]
        lam_away = 0.0
        if lev_away < k and alpha[i_away] < 1.0 - 1e-12:
            lam_full = -alpha[i_away] / (1.0 - alpha[i_away])
            if lev_away > 1.0 + 1e-12:
                lam_away = max((lev_away / k - 1.0) / (lev_away - 1.0), lam_full)
            else:
                lam_away = lam_full
        if _logdet_gain(lam_away, lev_away, k) > _logdet_gain(lam_add, g_max, k):
            lam, i = lam_away, i_away
        else:
            lam, i = lam_add, i_add
        alpha *= 1.0 - lam
        alpha[i] += lam
        np.clip(alpha, 0.0, None, out=alpha)
        alpha /= alpha.sum()

    # Prune numerically dead support, then shrink to a Caratheodory-sized
    # support while preserving the moment matrix (and hence g) exactly.
    pruned = np.where(alpha < 1e-7, 0.0, alpha)
    pruned /= pruned.sum()
    reduced = _caratheodory_reduce(u, pruned)
    g_raw, _ = leverage_score(vectors, alpha)
    budget = max(g_raw, target) + 1e-9
    for candidate in (reduced, pruned):
        g_cand, _ = leverage_score(vectors, candidate)
        if g_cand <= budget:
            return DesignWeights(alpha=candidate, g_value=float(g_cand), effective_dim=k)
    return DesignWeights(alpha=alpha, g_value=float(g_raw), effective_dim=k)


def _caratheodory_reduce(u: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Reduce the design support to at most k(k+1)/2 + 1 atoms without
    changing the moment matrix, by walking along null directions of the
    atoms' second-moment features until weights hit zero.
    """
    k = u.shape[1]
    bound = k * (k + 1) // 2 + 1
    alpha = alpha.copy()
    triu = np.triu_indices(k)
    while True:
        support = np.flatnonzero(alpha > 0)
        if len(support) <= bound:
            break
        feats = np.array([np.outer(v, v)[triu] for v in u[support]])
        a_mat = np.vstack([feats.T, np.ones(len(support))])
        direction = np.linalg.svd(a_mat)[2][-1]
        pos = direction > 1e-15
        if not np.any(pos):
            direction, pos = -direction, direction < -1e-15
        if not np.any(pos):
            break
        step = (alpha[support][pos] / direction[pos]).min()
        alpha[support] -= step * direction
        np.clip(alpha, 0.0, None, out=alpha)
        alpha[alpha < 1e-15] = 0.0
        alpha /= alpha.sum()
    return alpha


def _logdet_gain(lam: float, lev: float, k: int) -> float:
    """Log-det improvement of mixing toward a vertex with leverage ``lev`` by step ``lam``."""
    if lam == 0.0:
        return 0.0
    inner = 1.0 + lam * lev / (1.0 - lam)
    if inner <= 0:
        return -np.inf
    return k * np.log1p(-lam) + np.log(inner)


def sample_from_design(weights: DesignWeights, rng: np.random.Generator) -> int:
    """One i.i.d. categorical draw of a candidate index."""
    return int(rng.choice(len(weights.alpha), p=weights.alpha))
