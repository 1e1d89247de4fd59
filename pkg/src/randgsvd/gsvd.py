"""Exact generalized SVD of a full-column-rank matrix pair.

For a pair {A (m x n), L (p x n)} whose vertical stack has full column
rank, the factorization produces orthonormal-column factors U and V1, a
nonsingular X, and nonnegative diagonals alpha (ascending) and beta
(descending) with alpha_i^2 + beta_i^2 = 1, such that

    tall branch (n <= m):  U.T @ A @ X           = diag(alpha)   (n values)
    wide branch (m <  n):  U.T @ A @ X[:, n-m:]  = diag(alpha)   (m values)
    both:                  V1.T @ L @ X[:, :n-r] = diag(beta)

where r counts the generalized values with beta = 0 (directions A sees but
L annihilates). The route is a reduced QR of the stack followed by a
symmetric eigendecomposition of the top Gram block: with [A; L] = Q R and
Q1.T @ Q1 = S diag(psi) S.T (psi ascending in [0, 1]), the columns of
X = R^-1 S simultaneously diagonalize both Gram matrices, alpha = sqrt(psi)
on the branch's index window, and beta = sqrt(1 - psi) wherever psi < 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import matio
from .linalg import (
    DimensionError,
    RankDeficiencyError,
    as_matrix,
    qr_reduced,
    smallest_singular_value,
    solve_upper_triangular,
    symmetric_eig,
    thin_svd,
)

# stack-rank check is O(n^3); trust larger inputs (callers pay for a full
# factorization anyway, which surfaces rank trouble on its own)
GMP_CHECK_MAX_N = 512


class GmpViolationError(RankDeficiencyError):
    """The stacked pair [A; L] is (numerically) column rank deficient."""


def check_stack_rank(a: np.ndarray, l: np.ndarray, context: str = "matrix pair") -> None:
    """Raise GmpViolationError when [A; L] is numerically rank deficient.

    Only runs the O(n^3) check for n <= GMP_CHECK_MAX_N.
    """
    n = a.shape[1]
    if n > GMP_CHECK_MAX_N:
        return
    sigma = np.linalg.svd(np.vstack([a, l]), compute_uv=False)
    if sigma.size < n or sigma[0] == 0.0 or sigma[n - 1] <= 1e-10 * sigma[0]:
        raise GmpViolationError(
            f"{context}: stacked matrix is numerically column rank deficient "
            f"(sigma_min/sigma_max = {0.0 if sigma[0] == 0 else sigma[n-1]/sigma[0]:.3e})"
        )


@dataclass(frozen=True)
class GmpPair:
    """A matrix pair {a, l} acting on the same solution space, with the
    vertical stack [a; l] required to have full column rank."""

    a: np.ndarray
    l: np.ndarray

    def __post_init__(self):
        a = as_matrix(self.a, "pair member a")
        l = as_matrix(self.l, "pair member l")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "l", l)
        if a.shape[1] != l.shape[1]:
            raise DimensionError(
                f"pair members need matching column counts, got {a.shape} and {l.shape}"
            )
        if a.shape[0] + l.shape[0] < a.shape[1]:
            raise GmpViolationError(
                f"stack has fewer rows ({a.shape[0] + l.shape[0]}) than columns ({a.shape[1]})"
            )
        check_stack_rank(a, l, "GmpPair")

    @property
    def shape(self) -> tuple[int, int, int]:
        """(m, p, n) row counts of both members and the shared column count."""
        return self.a.shape[0], self.l.shape[0], self.a.shape[1]


@dataclass(frozen=True)
class GsvdFactors:
    """Generalized SVD factors of a pair (see module docstring for the
    identities each branch satisfies).

    u      -- m x n (tall) or m x m (wide), orthonormal columns
    v1     -- p x (n - r), orthonormal columns (empty when r = n)
    alpha  -- ascending, in [0, 1]
    beta   -- descending, in (0, 1]; length n - r
    x      -- n x n nonsingular
    r      -- number of generalized values with beta = 0
    branch -- "tall" or "wide"
    """

    u: np.ndarray
    v1: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    x: np.ndarray
    r: int
    branch: str

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def offset(self) -> int:
        """Index of alpha[0] within the global spectrum 1..n (0 for the tall
        branch, n - m for the wide branch whose leading directions have
        alpha = 0)."""
        return 0 if self.branch == "tall" else self.n - self.u.shape[0]

    @property
    def x_cols(self) -> np.ndarray:
        """Columns of x aligned with the alpha entries."""
        return self.x if self.branch == "tall" else self.x[:, self.offset :]

    def gamma(self) -> np.ndarray:
        """Generalized values alpha_i / beta_i aligned with alpha
        (np.inf where beta = 0)."""
        k0 = self.offset
        nb = self.beta.shape[0]
        out = np.full(self.alpha.shape[0], np.inf)
        for i in range(self.alpha.shape[0]):
            g = k0 + i
            if g < nb and self.beta[g] > 0.0:
                out[i] = self.alpha[i] / self.beta[g]
        return out

    def beta_aligned(self) -> np.ndarray:
        """beta values aligned with alpha entries (0.0 where beta absent)."""
        k0 = self.offset
        nb = self.beta.shape[0]
        idx = np.arange(self.alpha.shape[0]) + k0
        out = np.zeros_like(self.alpha)
        inside = idx < nb
        out[inside] = self.beta[idx[inside]]
        return out


def _gsvd_core(a: np.ndarray, l: np.ndarray, check_rank: bool):
    """Shared GSVD workhorse; returns (factors, eigvecs, rtri) so callers
    that need X^-1 can form it exactly as S.T @ R."""
    m, n = a.shape
    p = l.shape[0]

    stack = qr_reduced(np.vstack([a, l]))
    diag_r = np.abs(np.diag(stack.r))
    if diag_r.size and diag_r.min() <= 1e-12 * max(1.0, diag_r.max()) * max(m + p, n):
        raise GmpViolationError(
            "stacked pair is numerically column rank deficient (triangular factor "
            f"diagonal ratio {diag_r.min() / max(diag_r.max(), 1e-300):.3e})"
        )
    q1 = stack.q[:m]
    q2 = stack.q[m:]

    eig = symmetric_eig(q1.T @ q1)
    psi = np.clip(eig.values, 0.0, 1.0)
    svecs = eig.vectors

    tol = 1e-12 * n
    r = int(np.count_nonzero(psi > 1.0 - tol))
    tall = n <= m
    k0 = 0 if tall else n - m
    needed = psi[k0:]

    if check_rank and needed.size and needed.min() <= tol:
        raise RankDeficiencyError(
            "first pair member is numerically rank deficient on the requested "
            f"branch (smallest required psi = {needed.min():.3e})"
        )

    alpha = np.sqrt(needed)
    # Columns of q1 @ svecs carry norm sqrt(psi) in exact arithmetic, but for
    # the tolerant path psi can round to zero while the computed column still
    # holds rounding noise; normalizing by the computed norm keeps every
    # column at unit length instead of amplifying that noise.
    raw_u = q1 @ svecs if tall else q1 @ svecs[:, k0:]
    col_norms = np.linalg.norm(raw_u, axis=0)
    u = raw_u / np.maximum(col_norms, np.finfo(float).tiny)

    nb = n - r
    beta = np.sqrt(1.0 - psi[:nb])
    if nb > 0:
        v1 = (q2 @ svecs[:, :nb]) / beta
    else:
        v1 = np.empty((p, 0))

    x = solve_upper_triangular(stack.r, svecs)

    factors = GsvdFactors(
        u=u,
        v1=v1,
        alpha=alpha,
        beta=beta,
        x=x,
        r=r,
        branch="tall" if tall else "wide",
    )
    return factors, svecs, stack.r


def gsvd_full_rank(pair: GmpPair, check_rank: bool = True) -> GsvdFactors:
    """Exact GSVD of a full-column-rank pair via stacked QR + symmetric eig.

    With check_rank=True (default) the routine refuses pairs whose first
    member is numerically rank deficient on the branch it would need
    (required psi values at or below 1e-12 * n). check_rank=False instead
    floors the offending divisors; discretized ill-posed operators are
    numerically rank deficient by nature, and their noise directions carry
    generalized values so small that any sensible regularizer filters them
    out, so the tolerant mode is what large-scale callers want.
    """
    factors, _, _ = _gsvd_core(pair.a, pair.l, check_rank)
    return factors


def reconstruct(factors: GsvdFactors, pair: GmpPair) -> tuple[float, float]:
    """Frobenius residuals of the two diagonalization identities:
    (|U.T A Xcols - diag(alpha)|_F, |V1.T L X1 - diag(beta)|_F)."""
    a, l = pair.a, pair.l
    err_a = np.linalg.norm(factors.u.T @ a @ factors.x_cols - np.diag(factors.alpha))
    nb = factors.beta.shape[0]
    err_l = np.linalg.norm(
        factors.v1.T @ l @ factors.x[:, :nb] - np.diag(factors.beta)
    )
    return float(err_a), float(err_l)


def save_gsvd_factors(directory, factors: GsvdFactors) -> None:
    """Persist factors as Matrix Market files plus a JSON sidecar."""
    import os

    os.makedirs(directory, exist_ok=True)
    matio.write_matrix_mm(os.path.join(directory, "u.mtx"), factors.u)
    matio.write_matrix_mm(os.path.join(directory, "v1.mtx"), factors.v1)
    matio.write_matrix_mm(os.path.join(directory, "x.mtx"), factors.x)
    matio.write_vector_csv(os.path.join(directory, "alpha.csv"), factors.alpha)
    matio.write_vector_csv(os.path.join(directory, "beta.csv"), factors.beta)
    with open(os.path.join(directory, "meta.json"), "w") as fh:
        json.dump({"r": factors.r, "branch": factors.branch}, fh)


def load_gsvd_factors(directory) -> GsvdFactors:
    import os

    with open(os.path.join(directory, "meta.json")) as fh:
        meta = json.load(fh)
    return GsvdFactors(
        u=matio.read_matrix_mm(os.path.join(directory, "u.mtx")),
        v1=matio.read_matrix_mm(os.path.join(directory, "v1.mtx")),
        alpha=matio.read_vector_csv(os.path.join(directory, "alpha.csv")),
        beta=matio.read_vector_csv(os.path.join(directory, "beta.csv")),
        x=matio.read_matrix_mm(os.path.join(directory, "x.mtx")),
        r=int(meta["r"]),
        branch=str(meta["branch"]),
    )
