"""
Eigenvalue machinery for symmetric matrices.

- power iteration for the largest eigenvalue of a sparse PSD matrix
- dense symmetric eigendecomposition for matrices under a size cap
- block subspace iteration for the leading eigenvectors
- eigenvalue histograms of renormalized Laplacians
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np
import scipy.sparse as sp

from pyage.common import make_rng
from pyage.errors import CapacityError, DomainError

if TYPE_CHECKING:
    from pyage.common import FloatMatrix, Seed

log = logging.getLogger(__file__)

__all__ = (
    "DEFAULT_DENSE_CAP",
    "LambdaMaxEstimate",
    "SpectrumSummary",
    "lambda_max_power_iteration",
    "dense_sym_eig",
    "top_m_eigenpairs",
    "top_m_eigenvectors",
    "spectrum_summary",
)

DEFAULT_DENSE_CAP = 3000
SYMMETRY_TOL = 1e-8


@dataclass(frozen=True)
class LambdaMaxEstimate:
    """
    Result of power iteration.

    Attributes:
        value: best estimate of the dominant eigenvalue.
        iterations: matrix-vector products performed.
        converged: True when successive estimates differed by less than tol.
    """

    value: float
    iterations: int
    converged: bool

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class SpectrumSummary:
    """
    Largest eigenvalue plus an equal-width histogram over [0, lambda_max].

    The histogram is empty in estimate-only mode.
    """

    lambda_max: float
    histogram: tuple[tuple[float, float, int], ...]
    n: int

    @property
    def estimate_only(self) -> bool:
        return not self.histogram

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda_max": self.lambda_max,
            "bins": [[lo, hi, count] for lo, hi, count in self.histogram],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _as_operator(m: sp.spmatrix | np.ndarray) -> sp.csr_matrix | np.ndarray:
    if sp.issparse(m):
        return sp.csr_matrix(m)
    return np.asarray(m, dtype=np.float64)


def lambda_max_power_iteration(
    m: sp.spmatrix | np.ndarray,
    tol: float = 1e-8,
    max_iter: int = 1000,
    seed: Seed = 0,
) -> LambdaMaxEstimate:
    """
    Estimate the largest-magnitude eigenvalue of a symmetric matrix.

    The start vector is drawn from a seeded normal distribution, so the
    estimate is reproducible. For a PSD matrix such as the renormalized
    Laplacian the result is lambda_max. Non-convergence is reported through
    the ``converged`` flag, not raised.

    Args:
        m: symmetric sparse or dense matrix.
        tol: stop when successive Rayleigh estimates differ by less than this.
        max_iter: cap on matrix-vector products.
        seed: seed or Generator for the start vector.
    """
    op = _as_operator(m)
    n = op.shape[0]
    if op.shape != (n, n):
        raise DomainError(f"power iteration needs a square matrix, got {op.shape}")

    v = make_rng(seed).standard_normal(n)
    v /= np.linalg.norm(v)

    estimate = 0.0
    for iteration in range(1, max_iter + 1):
        w = op @ v
        theta = float(v @ w)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            # v lies in the null space; for a PSD matrix that only happens
            # when every eigenvalue is zero
            log.debug("power iteration hit the null space at step %d", iteration)
            return LambdaMaxEstimate(0.0, iteration, True)
        if iteration > 1 and abs(theta - estimate) < tol:
            log.debug("power iteration converged in %d steps", iteration)
            return LambdaMaxEstimate(theta, iteration, True)
        estimate = theta
        v = w / norm

    log.warning(
        "power iteration did not converge in %d steps (estimate %.10f)",
        max_iter,
        estimate,
    )
    return LambdaMaxEstimate(estimate, max_iter, False)


def _dense(m: sp.spmatrix | np.ndarray, cap: int) -> np.ndarray:
    n = m.shape[0]
    if m.shape != (n, n):
        raise DomainError(f"expected a square matrix, got {m.shape}")
    if n > cap:
        raise CapacityError(f"matrix order {n} exceeds the dense cap of {cap}")
    dense = m.toarray() if sp.issparse(m) else np.asarray(m, dtype=np.float64)
    asymmetry = np.max(np.abs(dense - dense.T)) if n else 0.0
    if asymmetry > SYMMETRY_TOL:
        raise DomainError(f"matrix is not symmetric (max |M - M^T| = {asymmetry:g})")
    return dense


def dense_sym_eig(
    m: sp.spmatrix | np.ndarray, cap: int = DEFAULT_DENSE_CAP
) -> tuple[np.ndarray, FloatMatrix]:
    """
    Full eigendecomposition of a symmetric matrix.

    Returns:
        eigenvalues in ascending order and the matching orthonormal
        eigenvectors as columns.
    """
    dense = _dense(m, cap)
    values, vectors = np.linalg.eigh(dense)
    return values, vectors


def top_m_eigenpairs(
    m: sp.spmatrix | np.ndarray,
    m_count: int,
    seed: Seed = 0,
    tol: float = 1e-10,
    max_iter: int = 1000,
    oversample: int = 8,
    dense_cap: int = DEFAULT_DENSE_CAP,
) -> tuple[np.ndarray, FloatMatrix]:
    """
    Leading eigenpairs of a symmetric PSD matrix by block subspace iteration.

    A block of ``m_count + oversample`` vectors is multiplied and
    re-orthonormalized with QR until the Rayleigh-Ritz residuals of the
    top ``m_count`` pairs drop below ``tol`` (relative to the largest Ritz
    value). If that does not happen within ``max_iter`` steps the dense
    solver is used when the order is under ``dense_cap``.

    Returns:
        eigenvalues in descending order and orthonormal eigenvectors as
        columns.
    """
    n = m.shape[0]
    if m_count < 1 or m_count > n:
        raise DomainError(
            f"cannot extract {m_count} eigenvectors of an order-{n} matrix"
        )

    op = _as_operator(m)
    block = min(n, m_count + oversample)
    q, _ = np.linalg.qr(make_rng(seed).standard_normal((n, block)))

    values = np.zeros(m_count)
    vectors = q[:, :m_count]
    for iteration in range(1, max_iter + 1):
        y = np.asarray(op @ q)
        ritz_values, ritz_vectors = np.linalg.eigh(q.T @ y)
        top = np.argsort(ritz_values)[::-1][:m_count]
        values = ritz_values[top]
        vectors = q @ ritz_vectors[:, top]

        residual = y @ ritz_vectors[:, top] - vectors * values
        scale = max(abs(values[0]), 1.0)
        worst = float(np.max(np.linalg.norm(residual, axis=0)))
        if worst <= tol * scale:
            log.debug("subspace iteration converged in %d steps", iteration)
            return values, vectors

        q, _ = np.linalg.qr(y)

    if n <= dense_cap:
        log.warning(
            "subspace iteration stalled (residual %.3g); using the dense solver",
            worst,
        )
        all_values, all_vectors = dense_sym_eig(m, cap=dense_cap)
        order = np.argsort(all_values)[::-1][:m_count]
        return all_values[order], all_vectors[:, order]

    log.warning("subspace iteration stalled (residual %.3g)", worst)
    return values, vectors


def top_m_eigenvectors(
    m: sp.spmatrix | np.ndarray, m_count: int, seed: Seed = 0, **kwargs: Any
) -> FloatMatrix:
    """Orthonormal basis of the dominant ``m_count``-dimensional eigenspace."""
    _, vectors = top_m_eigenpairs(m, m_count, seed, **kwargs)
    return vectors


def spectrum_summary(
    l_sym: sp.spmatrix | np.ndarray,
    bins: int = 50,
    dense_cap: int = DEFAULT_DENSE_CAP,
    estimate_only: bool = False,
    seed: Seed = 0,
) -> SpectrumSummary:
    """
    Summarize the spectrum of a renormalized Laplacian.

    Matrices under the dense cap get a full eigenvalue histogram with
    ``bins`` equal-width bins over [0, lambda_max]. Larger matrices, or
    ``estimate_only=True``, only get the power iteration estimate.
    """
    n = l_sym.shape[0]
    if estimate_only or n > dense_cap:
        estimate = lambda_max_power_iteration(l_sym, seed=seed)
        return SpectrumSummary(max(estimate.value, 0.0), (), n)

    values = np.clip(np.linalg.eigvalsh(_dense(l_sym, dense_cap)), 0.0, None)
    lambda_max = float(values.max()) if n else 0.0
    if lambda_max <= 0.0:
        return SpectrumSummary(0.0, ((0.0, 0.0, n),), n)

    counts, edges = np.histogram(values, bins=bins, range=(0.0, lambda_max))
    histogram = tuple(
        (float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(bins)
    )
    return SpectrumSummary(lambda_max, histogram, n)
