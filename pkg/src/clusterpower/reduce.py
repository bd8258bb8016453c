"""Standardization and reduction of feature matrices to a low-dimensional embedding.

Clustering many features head-on runs into the curse of dimensionality,
so the simulation pipeline projects data to two dimensions first. Two
projections are provided:

* :func:`pca` - principal component analysis via singular value
  decomposition of the centred data.
* :func:`mds` - classical (Torgerson) metric multidimensional scaling:
  spectral embedding of the double-centred squared Euclidean distance
  matrix. For Euclidean input this coincides with PCA scores up to sign,
  a classical duality that doubles as a cross-check between the two
  implementations.

Because of that duality, classical MDS cannot behave differently from
PCA on the same data. Stress-based scaling can: :func:`smacof` refines
the classical solution by majorizing raw stress, which tends to retain
more of the between-group separation when features are correlated and
the variance budget is dominated by shared factors. The simulation
pipeline uses the refined version whenever multidimensional scaling is
requested.

All functions are deterministic, including component signs (each
axis is flipped so its largest-magnitude loading is positive).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "Reducer",
    "Embedding",
    "standardize",
    "pca",
    "mds",
    "smacof",
    "embed",
]

#: Eigenvalues below this fraction of the largest are treated as zero.
EIGENVALUE_RTOL = 1e-10


class Reducer(Enum):
    NONE = "none"
    PCA = "pca"
    MDS = "mds"


@dataclass
class Embedding:
    """A reduced coordinate matrix plus how it was obtained.

    ``explained`` holds PCA eigenvalue shares for every component of the
    decomposition (not just the retained ones); it is empty for MDS and
    for untouched data.
    """

    coords: np.ndarray
    method: Reducer
    explained: tuple[float, ...] = field(default_factory=tuple)

    @property
    def n_dims(self) -> int:
        return self.coords.shape[1]


def standardize(data: np.ndarray) -> np.ndarray:
    """Rescale every column to sample mean 0 and sample SD 1 (ddof=1).

    Constant columns have no defined SD; they are centred, left at zero,
    and reported with a warning.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2:
        raise ValueError("need a 2-D matrix with at least 2 rows")
    centred = data - data.mean(axis=0)
    sd = centred.std(axis=0, ddof=1)
    constant = sd == 0.0
    if np.any(constant):
        warnings.warn(
            f"{int(constant.sum())} constant column(s) centred to zero; SD undefined",
            stacklevel=2,
        )
        sd = np.where(constant, 1.0, sd)
    return centred / sd


def _fix_signs(components: np.ndarray) -> np.ndarray:
    """Flip rows so each component's largest-magnitude entry is positive."""
    flipped = components.copy()
    for row in flipped:
        pivot = int(np.argmax(np.abs(row)))
        if row[pivot] < 0:
            row *= -1.0
    return flipped


def pca(data: np.ndarray, n_dims: int = 2) -> Embedding:
    """Project centred data onto the top principal components.

    Components are ordered by non-increasing eigenvalue of the sample
    covariance and sign-fixed deterministically. Computed through the
    thin SVD of the centred matrix, which stays cheap when the feature
    count dwarfs the number of observations.
    """
    data = np.asarray(data, dtype=float)
    n_obs, n_feat = data.shape
    if not (1 <= n_dims <= min(n_obs, n_feat)):
        raise ValueError(
            f"n_dims must lie in [1, {min(n_obs, n_feat)}], got {n_dims}"
        )
    centred = data - data.mean(axis=0)
    left, singulars, right = np.linalg.svd(centred, full_matrices=False)
    right = _fix_signs(right)
    coords = centred @ right[:n_dims].T
    eigvals = singulars**2 / max(n_obs - 1, 1)
    if eigvals.size and eigvals[0] > 0:
        eigvals = np.where(eigvals < EIGENVALUE_RTOL * eigvals[0], 0.0, eigvals)
    total = eigvals.sum()
    shares = eigvals / total if total > 0 else np.zeros_like(eigvals)
    return Embedding(coords=coords, method=Reducer.PCA, explained=tuple(shares))


def _squared_distances(data: np.ndarray) -> np.ndarray:
    norms = np.sum(data * data, axis=1)
    sq = norms[:, None] + norms[None, :] - 2.0 * (data @ data.T)
    np.maximum(sq, 0.0, out=sq)
    np.fill_diagonal(sq, 0.0)
    return sq


def mds(data: np.ndarray, n_dims: int = 2) -> Embedding:
    """Classical (Torgerson) metric MDS on Euclidean distances.

    Double-centres the squared-distance matrix and embeds with the top
    eigenpairs. Requested dimensions beyond the number of positive
    eigenvalues are zero-filled with a warning.
    """
    data = np.asarray(data, dtype=float)
    n_obs = data.shape[0]
    if not (1 <= n_dims <= n_obs - 1):
        raise ValueError(f"n_dims must lie in [1, {n_obs - 1}], got {n_dims}")
    sq = _squared_distances(data)
    row_means = sq.mean(axis=1)
    gram = -0.5 * (sq - row_means[:, None] - row_means[None, :] + row_means.mean())
    eigvals, eigvecs = np.linalg.eigh(gram)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    cutoff = EIGENVALUE_RTOL * max(eigvals[0], 0.0)
    positive = int(np.sum(eigvals > cutoff))
    if positive < n_dims:
        warnings.warn(
            f"only {positive} positive eigenvalue(s); zero-filling {n_dims - positive} "
            "coordinate(s)",
            stacklevel=2,
        )
    keep = min(positive, n_dims)
    coords = np.zeros((n_obs, n_dims))
    if keep:
        axes = _fix_signs(eigvecs[:, :keep].T).T
        coords[:, :keep] = axes * np.sqrt(eigvals[:keep])
    return Embedding(coords=coords, method=Reducer.MDS)


def smacof(
    data: np.ndarray,
    n_dims: int = 2,
    max_iter: int = 300,
    tol: float = 1e-7,
) -> Embedding:
    """Stress-majorization MDS, initialized from the classical solution.

    Iterates the Guttman transform, which never increases raw stress, and
    stops when the relative stress improvement drops below ``tol``. With
    the deterministic classical start there is no randomness anywhere, so
    repeated calls agree exactly.
    """
    data = np.asarray(data, dtype=float)
    target = np.sqrt(_squared_distances(data))
    coords = mds(data, n_dims).coords.copy()
    n_obs = data.shape[0]

    def stress_of(points: np.ndarray) -> tuple[float, np.ndarray]:
        dist = np.sqrt(_squared_distances(points))
        diff = target - dist
        np.fill_diagonal(diff, 0.0)
        return 0.5 * float(np.sum(diff * diff)), dist

    stress, dist = stress_of(coords)
    for _ in range(max_iter):
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dist > 0, target / dist, 0.0)
        np.fill_diagonal(ratio, 0.0)
        b_matrix = -ratio
        b_matrix[np.diag_indices(n_obs)] = ratio.sum(axis=1)
        updated = (b_matrix @ coords) / n_obs
        new_stress, new_dist = stress_of(updated)
        coords, dist = updated, new_dist
        if stress - new_stress <= tol * max(stress, np.finfo(float).tiny):
            stress = new_stress
            break
        stress = new_stress
    return Embedding(coords=coords, method=Reducer.MDS)


def embed(data: np.ndarray, reducer: Reducer, n_dims: int = 2) -> Embedding:
    """Apply the pipeline's reducer choice to a data matrix.

    ``Reducer.MDS`` means stress-refined scaling (:func:`smacof`);
    classical MDS is available directly via :func:`mds`.
    """
    if reducer is Reducer.NONE:
        return Embedding(coords=np.asarray(data, dtype=float), method=Reducer.NONE)
    if reducer is Reducer.PCA:
        return pca(data, n_dims)
    if reducer is Reducer.MDS:
        return smacof(data, n_dims)
    raise ValueError(f"unknown reducer {reducer!r}")
