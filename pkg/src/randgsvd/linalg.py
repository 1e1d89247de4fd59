"""Dense linear-algebra kernels shared by the rest of the package.

Everything operates on plain float64 numpy arrays: matrices are 2-D,
vectors 1-D, all entries finite. The factorizations are thin wrappers
around LAPACK (through numpy/scipy) that pin down the conventions the
rest of the package relies on: nonnegative R diagonal in QR, ascending
eigenvalues, descending singular values, and an explicit relative rank
cutoff for minimum-norm least squares.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg


class DimensionError(ValueError):
    """Input shapes are inconsistent with the requested operation."""


class RankDeficiencyError(ValueError):
    """A matrix that must have full (row or column) rank does not."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array and reject non-finite entries."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.size and not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_vector(v, name: str = "vector") -> np.ndarray:
    """Coerce to a 1-D float64 array and reject non-finite entries."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got ndim={arr.ndim}")
    if arr.size and not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class QrFactors:
    """Reduced QR factors; q has orthonormal columns, r is upper triangular
    with a nonnegative diagonal."""

    q: np.ndarray
    r: np.ndarray


def qr_reduced(a) -> QrFactors:
    """Reduced (economy) QR of a tall-or-square matrix.

    The factorization is normalized so that diag(r) >= 0, which makes the
    factors unique for full-rank input and keeps golden tests deterministic
    across LAPACK builds. Requires rows >= cols.
    """
    a = as_matrix(a, "qr input")
    m, n = a.shape
    if m < n:
        raise DimensionError(f"qr_reduced requires rows >= cols, got {m}x{n}")
    q, r = np.linalg.qr(a)
    sign = np.sign(np.diag(r))
    sign[sign == 0] = 1.0
    q = q * sign
    r = np.triu(r * sign[:, None])
    return QrFactors(q=q, r=r)


@dataclass(frozen=True)
class SymEig:
    """Eigendecomposition of a symmetric matrix; values ascending,
    vectors orthonormal columns aligned with values."""

    vectors: np.ndarray
    values: np.ndarray


def symmetric_eig(s) -> SymEig:
    """Full eigendecomposition of a symmetric matrix (ascending values).

    The input is symmetrized internally, so tiny asymmetries from rounding
    in products like Q^T Q are harmless.
    """
    s = as_matrix(s, "symmetric_eig input")
    if s.shape[0] != s.shape[1]:
        raise DimensionError(f"symmetric_eig needs a square matrix, got {s.shape}")
    w, v = np.linalg.eigh(0.5 * (s + s.T))
    return SymEig(vectors=v, values=w)


class ThinSvd(NamedTuple):
    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray


def thin_svd(a) -> ThinSvd:
    """Thin SVD a = u @ diag(sigma) @ v.T with sigma descending."""
    a = as_matrix(a, "svd input")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    return ThinSvd(u=u, sigma=s, v=vt.T)


def rank_cutoff(sigma: np.ndarray, m: int, n: int) -> float:
    """Relative cutoff tau = 1e-12 * max(m, n) * sigma_max used to decide
    which singular values participate in pseudo-inverse applications."""
    if sigma.size == 0:
        return 0.0
    return 1e-12 * max(m, n) * float(sigma[0])


def min_norm_lstsq(a, rhs) -> np.ndarray:
    """Minimum-norm least-squares solution of a @ x = rhs via the thin SVD.

    Singular values at or below the relative cutoff from ``rank_cutoff``
    are treated as zero, so rank-deficient systems return the minimum-norm
    minimizer instead of amplifying noise.
    """
    a = as_matrix(a, "lstsq matrix")
    rhs = as_vector(rhs, "lstsq rhs")
    m, n = a.shape
    if rhs.shape[0] != m:
        raise DimensionError(f"rhs length {rhs.shape[0]} != row count {m}")
    u, sigma, v = thin_svd(a)
    if sigma.size == 0 or sigma[0] == 0.0:
        return np.zeros(n)
    keep = sigma > rank_cutoff(sigma, m, n)
    coeff = (u.T @ rhs)[keep] / sigma[keep]
    return v[:, keep] @ coeff


def solve_upper_triangular(r, b) -> np.ndarray:
    """Back-substitution solve r @ x = b for upper-triangular r.

    Accepts a vector or a matrix right-hand side.
    """
    r = as_matrix(r, "triangular matrix")
    if r.shape[0] != r.shape[1]:
        raise DimensionError(f"triangular solve needs a square matrix, got {r.shape}")
    diag = np.abs(np.diag(r))
    if r.shape[0] and diag.min() == 0.0:
        raise RankDeficiencyError("upper-triangular factor is exactly singular")
    return scipy.linalg.solve_triangular(r, b, lower=False)


def spectral_norm(a) -> float:
    """Largest singular value (2-norm); 0.0 for an empty matrix."""
    a = as_matrix(a, "spectral_norm input")
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def smallest_singular_value(a) -> float:
    """Smallest singular value of a (of min(m, n) total); 0.0 if empty."""
    a = as_matrix(a, "smallest_singular_value input")
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[-1])
