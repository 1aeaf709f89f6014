from __future__ import annotations

from typing import TYPE_CHECKING, TypeAlias

import numpy as np
import scipy.sparse as sp

if TYPE_CHECKING:
    from numpy.typing import NDArray

SparseMatrix: TypeAlias = sp.csr_matrix
FloatMatrix: TypeAlias = "NDArray[np.float64]"
IntPairs: TypeAlias = "NDArray[np.int64]"
Seed: TypeAlias = int | np.random.Generator


def make_rng(seed: Seed) -> np.random.Generator:
    """Return a Generator, passing an existing one through untouched."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def as_csr(matrix: sp.spmatrix | np.ndarray) -> sp.csr_matrix:
    """
    Convert to CSR with sorted column indices and no stored duplicates.
    """
    csr = sp.csr_matrix(matrix, dtype=np.float64)
    csr.sum_duplicates()
    csr.sort_indices()
    return csr


def symmetric_scale(matrix: sp.csr_matrix, scale: np.ndarray) -> sp.csr_matrix:
    """
    Return diag(scale) @ matrix @ diag(scale).

    Entries are scaled by scale[row] * scale[col] in one product, so a
    symmetric input stays bitwise symmetric.
    """
    coo = matrix.tocoo()
    data = coo.data * (scale[coo.row] * scale[coo.col])
    return as_csr(sp.coo_matrix((data, (coo.row, coo.col)), shape=matrix.shape))
