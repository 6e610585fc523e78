"""Sparse assembly buffers and the direct linear solve.

Assembled systems are collected as COO triplets, compressed to CSR (duplicate
entries summed, column indices sorted) and factorized with a sparse direct LU.
Every solve verifies the relative residual against a hard ceiling and raises
if the contract is violated, so downstream error norms can trust the algebra.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

RESIDUAL_RTOL = 1e-10


class SolverError(RuntimeError):
    """Base class for linear-solver failures."""


class SingularMatrixError(SolverError):
    """Factorization failed; the system is singular or numerically rank
    deficient (e.g. a pure-flux problem with no potential pinned)."""


class ResidualError(SolverError):
    """The computed solution violated the relative-residual ceiling."""


def compress(rows, cols, vals, shape) -> sp.csr_matrix:
    """Sum duplicate COO triplets into a CSR matrix with sorted indices.

    Rejects indices outside `shape`.  An empty triplet list produces an
    all-zero matrix.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=float)
    if not (rows.shape == cols.shape == vals.shape):
        raise ValueError("triplet arrays must have identical shapes")
    n, m = shape
    if rows.size:
        if rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= m:
            raise ValueError("triplet index outside matrix shape")
    mat = sp.coo_matrix((vals, (rows, cols)), shape=shape).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def solve(A: sp.spmatrix, b: np.ndarray, symmetric: bool = False,
          rtol: float = RESIDUAL_RTOL):
    """Direct sparse solve of A x = b with residual verification.

    Returns (x, relative_residual).  The `symmetric` flag is advisory; the
    LU factorization handles both cases.  Raises SingularMatrixError when the
    factorization breaks down and ResidualError when the relative residual
    exceeds `rtol`.
    """
    b = np.asarray(b, dtype=float)
    n = b.size
    if A.shape != (n, n):
        raise ValueError(f"matrix shape {A.shape} incompatible with rhs size {n}")
    if n == 0:
        return np.empty(0), 0.0
    try:
        lu = splu(sp.csc_matrix(A))
        x = lu.solve(b)
    except RuntimeError as exc:
        raise SingularMatrixError(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise SingularMatrixError("solution contains non-finite entries")
    norm_b = np.linalg.norm(b)
    residual = np.linalg.norm(A @ x - b) / (norm_b if norm_b > 0.0 else 1.0)
    if residual > rtol:
        raise ResidualError(
            f"relative residual {residual:.3e} exceeds {rtol:.1e}"
        )
    return x, float(residual)
