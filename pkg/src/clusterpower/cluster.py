"""The six subgroup analyses: k-means, Ward linkage, fuzzy c-means, and
Gaussian / diagonal-Gaussian / Bernoulli mixtures fitted with EM.

Every fit returns a :class:`ClusterSolution` with hard labels and, where
the method produces them, row-stochastic soft memberships, a
log-likelihood, and a free-parameter count for information criteria.
Fits are deterministic given the config seed: restarts consume
substreams in a fixed order and ties break towards the lowest index.

Each fit is single-threaded and self-contained; running several fits
concurrently on shared read-only data is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import logsumexp

__all__ = [
    "FitConfig",
    "ClusterSolution",
    "kmeans",
    "ward",
    "cmeans",
    "gmm",
    "lpa",
    "lca",
]

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class FitConfig:
    """Shared knobs for the fitting routines.

    ``restarts`` matters mainly near the detection threshold, where a bad
    initialization can cost a rejection; the default of 10 with best-of
    selection is deliberate and worth logging alongside results.
    ``seed`` may be an int, a Generator (consumed in place), or None.
    """

    k: int
    max_iter: int = 300
    tol: float = 1e-6
    restarts: int = 10
    fuzzifier_m: float = 2.0
    covariance_floor: float = 1e-6
    seed: int | np.random.Generator | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if not self.fuzzifier_m > 1:
            raise ValueError(f"fuzzifier_m must be > 1, got {self.fuzzifier_m}")
        if not self.covariance_floor > 0:
            raise ValueError(
                f"covariance_floor must be positive, got {self.covariance_floor}"
            )


@dataclass
class ClusterSolution:
    """Result of one fit.

    ``params`` is method-specific: centroids for the hard/fuzzy methods,
    weights/means/(co)variances for the Gaussian mixtures, weights and
    item probabilities for the Bernoulli mixture. ``log_likelihood``,
    ``n_params`` and ``log_likelihood_history`` are present for the
    model-based methods only.
    """

    hard_labels: np.ndarray
    k: int
    params: dict
    soft_memberships: np.ndarray | None = None
    log_likelihood: float | None = None
    n_params: int | None = None
    converged: bool = True
    iterations: int = 0
    log_likelihood_history: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.soft_memberships is not None:
            sums = self.soft_memberships.sum(axis=1)
            if not np.allclose(sums, 1.0, atol=1e-9):
                raise ValueError("soft membership rows must sum to 1")
            if not np.array_equal(
                self.hard_labels, np.argmax(self.soft_memberships, axis=1)
            ):
                raise ValueError("hard labels must be the row-argmax of memberships")
        if self.hard_labels.min() < 0 or self.hard_labels.max() >= self.k:
            raise ValueError("labels must lie in 0..k-1")


def _as_matrix(data: np.ndarray) -> np.ndarray:
    matrix = np.asarray(data, dtype=float)
    if matrix.ndim != 2:
        raise ValueError("data must be a 2-D matrix")
    return matrix


def _pairwise_sq(data: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, observations x centers."""
    cross = data @ centers.T
    sq = (
        np.sum(data * data, axis=1)[:, None]
        + np.sum(centers * centers, axis=1)[None, :]
        - 2.0 * cross
    )
    np.maximum(sq, 0.0, out=sq)
    return sq


def _kmeanspp_init(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: spread initial centers proportionally to squared distance."""
    n_obs = data.shape[0]
    centers = np.empty((k, data.shape[1]))
    centers[0] = data[rng.integers(n_obs)]
    closest = _pairwise_sq(data, centers[:1])[:, 0]
    for j in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = rng.choice(n_obs, p=closest / total)
        else:  # all remaining points coincide with a chosen center
            idx = rng.integers(n_obs)
        centers[j] = data[idx]
        closest = np.minimum(closest, _pairwise_sq(data, centers[j : j + 1])[:, 0])
    return centers


def _lloyd(
    data: np.ndarray, centers: np.ndarray, cfg: FitConfig
) -> tuple[np.ndarray, np.ndarray, float, int, bool]:
    k = centers.shape[0]
    labels = np.full(data.shape[0], -1, dtype=np.int64)
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iter + 1):
        sq = _pairwise_sq(data, centers)
        new_labels = np.argmin(sq, axis=1)
        # Reseed empty clusters to the point farthest from its own center,
        # instead of silently dropping to fewer clusters.
        for cluster in range(k):
            if not np.any(new_labels == cluster):
                farthest = int(np.argmax(sq[np.arange(len(new_labels)), new_labels]))
                centers[cluster] = data[farthest]
                sq[:, cluster] = _pairwise_sq(data, centers[cluster : cluster + 1])[:, 0]
                new_labels = np.argmin(sq, axis=1)
        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels
        for cluster in range(k):
            points = data[labels == cluster]
            if len(points):
                centers[cluster] = points.mean(axis=0)
    wcss = float(np.sum((data - centers[labels]) ** 2))
    return labels, centers, wcss, iterations, converged


def kmeans(data: np.ndarray, cfg: FitConfig) -> ClusterSolution:
    """Lloyd's k-means from k-means++ starts, best of ``cfg.restarts`` by WCSS."""
    data = _as_matrix(data)
    if data.shape[0] < cfg.k:
        raise ValueError("more clusters than points")
    rng = np.random.default_rng(cfg.seed)
    best: tuple[float, np.ndarray, np.ndarray, int, bool] | None = None
    for _ in range(cfg.restarts):
        centers = _kmeanspp_init(data, cfg.k, rng)
        labels, centers, wcss, iters, conv = _lloyd(data, centers.copy(), cfg)
        if best is None or wcss < best[0]:
            best = (wcss, labels, centers, iters, conv)
    wcss, labels, centers, iters, conv = best
    return ClusterSolution(
        hard_labels=labels,
        k=cfg.k,
        params={"centroids": centers, "wcss": wcss},
        converged=conv,
        iterations=iters,
    )


def ward(data: np.ndarray, k: int) -> ClusterSolution:
    """Agglomerative clustering under the Ward criterion, cut at ``k`` clusters.

    Merge costs are the increase in within-cluster sum of squares,
    maintained with the Lance-Williams recurrence; ties go to the pair
    with the lowest cluster ids, which makes the merge sequence fully
    deterministic.
    """
    data = _as_matrix(data)
    n_obs = data.shape[0]
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n_obs < k:
        raise ValueError("more clusters than points")

    # cost[i, j] = SSE increase when merging clusters i and j.
    cost = 0.5 * _pairwise_sq(data, data)
    np.fill_diagonal(cost, np.inf)
    sizes = np.ones(n_obs)
    active = np.ones(n_obs, dtype=bool)
    members: list[list[int] | None] = [[i] for i in range(n_obs)]

    for _ in range(n_obs - k):
        flat = int(np.argmin(cost))  # row-major scan -> lowest (i, j) on ties
        first, second = divmod(flat, n_obs)
        if first > second:
            first, second = second, first
        n_a, n_b = sizes[first], sizes[second]
        merged_cost = cost[first, second]
        other = active.copy()
        other[first] = other[second] = False
        n_c = sizes[other]
        # Lance-Williams update for the Ward criterion.
        cost_new = (
            (n_a + n_c) * cost[first, other]
            + (n_b + n_c) * cost[second, other]
            - n_c * merged_cost
        ) / (n_a + n_b + n_c)
        cost[first, other] = cost_new
        cost[other, first] = cost_new
        cost[second, :] = np.inf
        cost[:, second] = np.inf
        sizes[first] = n_a + n_b
        members[first].extend(members[second])
        members[second] = None
        active[second] = False

    labels = np.empty(n_obs, dtype=np.int64)
    clusters = [m for m in members if m is not None]
    clusters.sort(key=min)  # stable label order: by each cluster's first point
    for label, points in enumerate(clusters):
        labels[points] = label
    centroids = np.vstack([data[points].mean(axis=0) for points in clusters])
    return ClusterSolution(
        hard_labels=labels,
        k=k,
        params={"centroids": centroids},
        converged=True,
        iterations=n_obs - k,
    )


def cmeans(data: np.ndarray, cfg: FitConfig) -> ClusterSolution:
    """Fuzzy c-means: alternating membership and centroid updates.

    Minimizes ``sum_ij u_ij**m d_ij**2`` with fuzzifier ``m``; a point
    coinciding with a centroid takes full membership there (split evenly
    if it coincides with several).
    """
    data = _as_matrix(data)
    n_obs = data.shape[0]
    if n_obs < cfg.k:
        raise ValueError("more clusters than points")
    rng = np.random.default_rng(cfg.seed)
    exponent = -1.0 / (cfg.fuzzifier_m - 1.0)

    def memberships_for(sq: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            weights = sq**exponent
            u = weights / weights.sum(axis=1, keepdims=True)
        zero_rows = np.any(sq == 0.0, axis=1)
        if np.any(zero_rows):
            hits = sq[zero_rows] == 0.0
            u[zero_rows] = hits / hits.sum(axis=1, keepdims=True)
        return u

    best = None
    for _ in range(cfg.restarts):
        centers = _kmeanspp_init(data, cfg.k, rng)
        objective = np.inf
        converged = False
        iterations = 0
        for iterations in range(1, cfg.max_iter + 1):
            sq = _pairwise_sq(data, centers)
            u = memberships_for(sq)
            um = u**cfg.fuzzifier_m
            centers = (um.T @ data) / um.sum(axis=0)[:, None]
            new_objective = float(np.sum(um * _pairwise_sq(data, centers)))
            if abs(objective - new_objective) <= cfg.tol * max(new_objective, 1e-12):
                objective = new_objective
                converged = True
                break
            objective = new_objective
        sq = _pairwise_sq(data, centers)
        u = memberships_for(sq)
        if best is None or objective < best[0]:
            best = (objective, u, centers, iterations, converged)
    objective, u, centers, iterations, converged = best
    return ClusterSolution(
        hard_labels=np.argmax(u, axis=1),
        k=cfg.k,
        params={"centroids": centers, "objective": objective},
        soft_memberships=u,
        converged=converged,
        iterations=iterations,
    )


# --- EM mixtures -----------------------------------------------------------


def _floor_covariance(cov: np.ndarray, floor: float) -> np.ndarray:
    """Raise eigenvalues to at least ``floor`` to keep the component usable."""
    eigvals, eigvecs = np.linalg.eigh(cov)
    if eigvals[0] >= floor:
        return cov
    eigvals = np.maximum(eigvals, floor)
    return (eigvecs * eigvals) @ eigvecs.T


def _gaussian_log_density(
    data: np.ndarray, mean: np.ndarray, cov: np.ndarray
) -> np.ndarray:
    dim = data.shape[1]
    chol = np.linalg.cholesky(cov)
    centred = data - mean
    ys = np.linalg.solve(chol, centred.T)
    maha = np.sum(ys * ys, axis=0)
    log_det = 2.0 * np.sum(np.log(np.diag(chol)))
    return -0.5 * (dim * _LOG_2PI + log_det + maha)


def _run_em(
    cfg: FitConfig,
    init_resp: Callable[[np.random.Generator], np.ndarray],
    m_step: Callable[[np.ndarray], dict],
    log_prob: Callable[[dict], np.ndarray],
    rng: np.random.Generator,
) -> tuple[dict, np.ndarray, float, tuple[float, ...], int, bool]:
    """One EM run: returns params, responsibilities, ll, history, iters, converged.

    The reported log-likelihood and responsibilities always correspond to
    the returned parameters, including when the iteration cap is hit.
    """

    def evaluate(params: dict) -> tuple[float, np.ndarray]:
        joint = log_prob(params)  # n_obs x k: log weight + log component density
        total = logsumexp(joint, axis=1)
        return float(total.sum()), joint - total[:, None]

    params = m_step(init_resp(rng))
    history: list[float] = []
    converged = False
    iterations = 0
    ll, log_post = evaluate(params)
    history.append(ll)
    for iterations in range(1, cfg.max_iter + 1):
        params = m_step(np.exp(log_post))
        ll, log_post = evaluate(params)
        history.append(ll)
        if abs(history[-1] - history[-2]) <= cfg.tol * max(abs(history[-2]), 1e-12):
            converged = True
            break
    resp = np.exp(log_post)
    # Renormalize away any residual rounding so rows sum to one exactly.
    resp /= resp.sum(axis=1, keepdims=True)
    return params, resp, ll, tuple(history), iterations, converged


def _best_em(
    cfg: FitConfig,
    init_resp: Callable[[np.random.Generator], np.ndarray],
    m_step: Callable[[np.ndarray], dict],
    log_prob: Callable[[dict], np.ndarray],
) -> tuple[dict, np.ndarray, float, tuple[float, ...], int, bool]:
    rng = np.random.default_rng(cfg.seed)
    best = None
    for _ in range(cfg.restarts):
        run = _run_em(cfg, init_resp, m_step, log_prob, rng)
        if best is None or run[2] > best[2]:
            best = run
    return best


def _kmeans_responsibilities(
    data: np.ndarray, k: int, rng: np.random.Generator
) -> np.ndarray:
    """One-hot responsibilities from a single k-means run (standard EM warm start)."""
    cfg = FitConfig(k=k, restarts=1, seed=rng)
    labels = kmeans(data, cfg).hard_labels
    resp = np.zeros((data.shape[0], k))
    resp[np.arange(data.shape[0]), labels] = 1.0
    return resp


def _gaussian_mixture(data: np.ndarray, cfg: FitConfig, diagonal: bool) -> ClusterSolution:
    data = _as_matrix(data)
    n_obs, dim = data.shape
    if n_obs < cfg.k:
        raise ValueError("more clusters than points")
    k = cfg.k
    floor = cfg.covariance_floor

    def m_step(resp: np.ndarray) -> dict:
        weights = resp.sum(axis=0)
        weights = np.maximum(weights, 1e-10)
        means = (resp.T @ data) / weights[:, None]
        if diagonal:
            variances = np.empty((k, dim))
            for g in range(k):
                centred = data - means[g]
                variances[g] = np.maximum(
                    (resp[:, g] @ (centred * centred)) / weights[g], floor
                )
            return {"weights": weights / n_obs, "means": means, "variances": variances}
        covariances = np.empty((k, dim, dim))
        for g in range(k):
            centred = data - means[g]
            cov = (resp[:, g][:, None] * centred).T @ centred / weights[g]
            covariances[g] = _floor_covariance(cov, floor)
        return {"weights": weights / n_obs, "means": means, "covariances": covariances}

    def log_prob(params: dict) -> np.ndarray:
        out = np.empty((n_obs, k))
        log_w = np.log(np.maximum(params["weights"], 1e-300))
        for g in range(k):
            if diagonal:
                var = params["variances"][g]
                centred = data - params["means"][g]
                dens = -0.5 * (
                    dim * _LOG_2PI
                    + np.sum(np.log(var))
                    + np.sum(centred * centred / var, axis=1)
                )
            else:
                dens = _gaussian_log_density(
                    data, params["means"][g], params["covariances"][g]
                )
            out[:, g] = log_w[g] + dens
        return out

    def init_resp(rng: np.random.Generator) -> np.ndarray:
        return _kmeans_responsibilities(data, k, rng)

    params, resp, ll, history, iters, conv = _best_em(cfg, init_resp, m_step, log_prob)
    if diagonal:
        n_params = k * dim + k * dim + (k - 1)
    else:
        n_params = k * dim + k * dim * (dim + 1) // 2 + (k - 1)
    return ClusterSolution(
        hard_labels=np.argmax(resp, axis=1),
        k=k,
        params=params,
        soft_memberships=resp,
        log_likelihood=ll,
        n_params=n_params,
        converged=conv,
        iterations=iters,
        log_likelihood_history=history,
    )


def gmm(data: np.ndarray, cfg: FitConfig) -> ClusterSolution:
    """Gaussian mixture with a full covariance matrix per component.

    EM warm-started from k-means labels; free parameters count means,
    covariance triangles, and the k-1 free weights.
    """
    return _gaussian_mixture(data, cfg, diagonal=False)


def lpa(data: np.ndarray, cfg: FitConfig) -> ClusterSolution:
    """Gaussian mixture with diagonal covariances (latent profile analysis)."""
    return _gaussian_mixture(data, cfg, diagonal=True)


def lca(data: np.ndarray, cfg: FitConfig) -> ClusterSolution:
    """Bernoulli mixture over binary features (latent class analysis).

    Runs on the raw 0/1 matrix, never on an embedding. Item
    probabilities are clamped to [1e-6, 1 - 1e-6] so no observation can
    acquire zero likelihood. Initialization draws random
    responsibilities, which is the conventional choice for this model.
    """
    data = _as_matrix(data)
    if not np.all((data == 0.0) | (data == 1.0)):
        raise ValueError("latent class analysis expects binary (0/1) data")
    n_obs, n_feat = data.shape
    if n_obs < cfg.k:
        raise ValueError("more clusters than points")
    k = cfg.k

    def m_step(resp: np.ndarray) -> dict:
        weights = resp.sum(axis=0)
        weights = np.maximum(weights, 1e-10)
        item_probs = (resp.T @ data) / weights[:, None]
        np.clip(item_probs, 1e-6, 1.0 - 1e-6, out=item_probs)
        return {"weights": weights / n_obs, "item_probs": item_probs}

    def log_prob(params: dict) -> np.ndarray:
        probs = params["item_probs"]
        log_w = np.log(np.maximum(params["weights"], 1e-300))
        return log_w[None, :] + data @ np.log(probs).T + (1.0 - data) @ np.log1p(-probs).T

    def init_resp(rng: np.random.Generator) -> np.ndarray:
        return rng.dirichlet(np.ones(k), size=n_obs)

    params, resp, ll, history, iters, conv = _best_em(
        n_obs, cfg, init_resp, m_step, log_prob
    )
    return ClusterSolution(
        hard_labels=np.argmax(resp, axis=1),
        k=k,
        params=params,
        soft_memberships=resp,
        log_likelihood=ll,
        n_params=k * n_feat + (k - 1),
        converged=conv,
        iterations=iters,
        log_likelihood_history=history,
    )
