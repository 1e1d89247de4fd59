"""Test-problem generators: seven classic first-kind Fredholm
discretizations, the first-difference regularizer, noise injection,
underdetermined row truncation, and a parallel-beam tomography operator.

The Fredholm problems follow the standard Regularization Tools
discretizations: midpoint quadrature for the kernels evaluated pointwise
(shaw, foxgood, gravity, heat) and Galerkin with orthonormal box functions
for the rest (deriv2, phillips, baart; baart's cell integrals are done with
a fixed-order Gauss rule since its kernel has no convenient closed form).
Entry-level fidelity is pinned in the tests against an independent
quadrature oracle. In every case the clean data is synthesized as
b = A @ x_true exactly, so solvers can be scored against a consistent
discrete ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import matio
from .linalg import DimensionError, as_vector
from .tikhonov import TikhonovProblem

_MASK64 = (1 << 64) - 1

QUADRATURE_PROBLEMS = ("shaw", "baart", "deriv2", "foxgood", "gravity", "heat", "phillips")


@dataclass(frozen=True)
class TestProblemSpec:
    """Recipe for one synthetic instance.

    m defaults to n; m < n truncates rows (underdetermined variant built
    from the noiseless square problem, then noised at level delta). The
    'tomo' name interprets n as the grid side N and builds the
    parallel-beam operator with angles 0:12:179 and 4N rays per angle.
    """

    __test__ = False  # keep pytest from collecting this as a test class

    name: str
    n: int
    m: int | None = None
    delta: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.name not in QUADRATURE_PROBLEMS + ("tomo",):
            raise ValueError(f"unknown problem name {self.name!r}")
        if self.name != "tomo" and self.n < 8:
            raise ValueError(f"n must be at least 8, got {self.n}")
        if self.delta < 0.0:
            raise ValueError("delta must be nonnegative")
        rows = self.n if self.m is None else self.m
        if self.name != "tomo" and rows > self.n:
            raise ValueError("m > n variants are not supported")


def _midpoints(lo: float, hi: float, n: int) -> np.ndarray:
    h = (hi - lo) / n
    return lo + (np.arange(n) + 0.5) * h


def shaw_matrix(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint quadrature of the kernel (cos s + cos t)^2 (sin u / u)^2,
    u = pi (sin s + sin t), on [-pi/2, pi/2]^2; two-Gaussian-bump solution."""
    h = np.pi / n
    g = _midpoints(-np.pi / 2, np.pi / 2, n)
    s = g[:, None]
    t = g[None, :]
    u = np.pi * (np.sin(s) + np.sin(t))
    safe = np.where(u == 0.0, 1.0, u)
    sinc = np.where(u == 0.0, 1.0, np.sin(safe) / safe)
    a = h * (np.cos(s) + np.cos(t)) ** 2 * sinc**2
    x = 2.0 * np.exp(-6.0 * (g - 0.8) ** 2) + np.exp(-2.0 * (g + 0.5) ** 2)
    return a, x


def deriv2_matrix(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Galerkin discretization of the second-derivative Green's function
    K(s,t) = s(t-1) for s < t and t(s-1) otherwise, on [0,1]^2.

    The solution is the symmetric hat f(t) = min(t, 1-t) (the variant whose
    sine coefficients decay quadratically, so it stays representable in the
    few-column sketches this operator admits). Requires even n so the peak
    falls on a cell boundary."""
    if n % 2:
        raise ValueError(f"deriv2 requires even n, got {n}")
    h = 1.0 / n
    idx = np.arange(1, n + 1, dtype=float)
    ii = idx[:, None]
    jj = idx[None, :]
    lower = h**2 * (jj - 0.5) * ((ii - 0.5) * h - 1.0)
    a = np.where(jj < ii, lower, 0.0)
    a = a + a.T
    np.fill_diagonal(a, h**2 * ((idx**2 - idx + 0.25) * h - (idx - 2.0 / 3.0)))
    x = h**1.5 * np.minimum(idx - 0.5, n - idx + 0.5)
    return a, x


def foxgood_matrix(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint quadrature of sqrt(s^2 + t^2) on [0,1]^2; solution t."""
    h = 1.0 / n
    g = _midpoints(0.0, 1.0, n)
    a = h * np.sqrt(g[:, None] ** 2 + g[None, :] ** 2)
    return a, g.copy()


def gravity_matrix(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint quadrature of the gravity surveying kernel
    d (d^2 + (s-t)^2)^(-3/2) at depth d = 0.25 on [0,1]^2."""
    h = 1.0 / n
    d = 0.25
    g = _midpoints(0.0, 1.0, n)
    a = h * d * (d**2 + (g[:, None] - g[None, :]) ** 2) ** (-1.5)
    x = np.sin(np.pi * g) + 0.5 * np.sin(2.0 * np.pi * g)
    return a, x


def heat_matrix(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Volterra heat-conduction kernel (unit conductivity): lower-triangular
    Toeplitz with first column c t^(-3/2) exp(-1/(4t)) at midpoints.
    Requires even n; the solution ramp lives on the first half."""
    if n % 2:
        raise ValueError(f"heat requires even n, got {n}")
    h = 1.0 / n
    t = (np.arange(1, n + 1) - 0.5) * h
    c = h / (2.0 * np.sqrt(np.pi))
    with np.errstate(under="ignore"):
        col = c * t**-1.5 * np.exp(-0.25 / t)
    row = np.zeros(n)
    row[0] = col[0]
    a = scipy.linalg.toeplitz(col, row)
    x = np.zeros(n)
    for i in range(1, n // 2 + 1):
        ti = i * 20.0 / n
        if ti < 2.0:
            x[i - 1] = 0.75 * ti**2 / 4.0
        elif ti < 3.0:
            x[i - 1] = 0.75 + (ti - 2.0) * (3.0 - ti)
        else:
            x[i - 1] = 0.75 * np.exp(-(ti - 3.0) * 2.0)
    return a, x


def phillips_matrix(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Galerkin discretization of the convolution kernel
    1 + cos(pi (s-t)/3) (support |s-t| < 3) on [-6,6]^2; requires n
    divisible by 4. The solution is the cell-integrated hat
    1 + cos(pi t/3) on |t| < 3."""
    if n % 4:
        raise ValueError(f"phillips requires n divisible by 4, got {n}")
    h = 12.0 / n
    n4 = n // 4
    r = np.zeros(n)
    j = np.arange(1, n4 + 1, dtype=float)
    ang = 4.0 * np.pi / n
    r[: n4] = h + (9.0 / (h * np.pi**2)) * (
        2.0 * np.cos(ang * (j - 1.0)) - np.cos(ang * (j - 2.0)) - np.cos(ang * j)
    )
    r[n4] = h / 2.0 + (9.0 / (h * np.pi**2)) * (np.cos(ang) - 1.0)
    a = scipy.linalg.toeplitz(r)
    x = np.zeros(n)
    left = -6.0 + np.arange(2 * n4, 3 * n4) * h
    x[2 * n4 : 3 * n4] = h + (3.0 / np.pi) * (
        np.sin(np.pi * (left + h) / 3.0) - np.sin(np.pi * left / 3.0)
    )
    x[n4 : 2 * n4] = x[2 * n4 : 3 * n4][::-1]
    return a, x


_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(4)


def _cell_rule(lo: float, width: float, cells: int):
    """Gauss nodes/weights for `cells` equal subintervals of [lo, lo+cells*width]."""
    left = lo + width * np.arange(cells)[:, None]
    nodes = left + width * (0.5 * (_GAUSS_NODES[None, :] + 1.0))
    weights = np.broadcast_to(0.5 * width * _GAUSS_WEIGHTS, nodes.shape)
    return nodes, weights


def baart_matrix(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Galerkin (orthonormal boxes) discretization of the kernel
    exp(s cos t) for s in [0, pi/2], t in [0, pi]; solution sin t.

    Cell integrals use a fixed 4-point Gauss product rule, far below
    rounding error for this analytic kernel at any usable n.
    """
    hs = np.pi / (2 * n)
    ht = np.pi / n
    s_nodes, s_weights = _cell_rule(0.0, hs, n)
    t_nodes, t_weights = _cell_rule(0.0, ht, n)
    cos_t = np.cos(t_nodes)
    scale = 1.0 / np.sqrt(hs * ht)
    a = np.empty((n, n))
    chunk = max(1, 4096 // 4)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        block = np.exp(s_nodes[start:stop, :, None, None] * cos_t[None, None, :, :])
        block = block * s_weights[start:stop, :, None, None] * t_weights[None, None, :, :]
        a[start:stop] = scale * block.sum(axis=(1, 3))
    t_left = ht * np.arange(n)
    x = (np.cos(t_left) - np.cos(t_left + ht)) / np.sqrt(ht)
    return a, x


_GENERATORS = {
    "shaw": shaw_matrix,
    "deriv2": deriv2_matrix,
    "foxgood": foxgood_matrix,
    "gravity": gravity_matrix,
    "heat": heat_matrix,
    "phillips": phillips_matrix,
    "baart": baart_matrix,
}


def first_difference(n: int) -> np.ndarray:
    """(n-1) x n forward-difference operator; null space = constants."""
    if n < 2:
        raise ValueError(f"first_difference needs n >= 2, got {n}")
    l = np.zeros((n - 1, n))
    idx = np.arange(n - 1)
    l[idx, idx] = 1.0
    l[idx, idx + 1] = -1.0
    return l


def add_noise(b, delta: float, seed: int) -> np.ndarray:
    """Perturb b by a seeded Gaussian direction scaled so that
    |out - b| = delta * |b| exactly."""
    b = as_vector(b, "data")
    if delta < 0.0:
        raise ValueError("delta must be nonnegative")
    if delta == 0.0:
        return b.copy()
    gen = np.random.Generator(np.random.Philox(key=seed & _MASK64))
    zeta = gen.standard_normal(b.shape[0])
    norm = np.linalg.norm(zeta)
    if norm == 0.0:
        return b.copy()
    return b + delta * np.linalg.norm(b) * zeta / norm


def make_underdetermined(prob: TikhonovProblem, m: int, seed: int = 0) -> TikhonovProblem:
    """Keep the first m rows of the operator and data; the regularizer and
    x_true are untouched. The construction (and seed argument, kept for
    provenance) is recorded in the metadata."""
    n = prob.a.shape[1]
    if m >= prob.a.shape[0]:
        raise ValueError(f"m must be smaller than the current row count, got m={m}")
    meta = dict(prob.meta or {})
    meta.update({"construction": "row-truncation", "m": m, "truncation_seed": seed})
    return TikhonovProblem(
        a=prob.a[:m].copy(),
        l=prob.l,
        b=prob.b[:m].copy(),
        x_true=prob.x_true,
        delta=prob.delta,
        meta=meta,
    )


def generate(spec: TestProblemSpec) -> TikhonovProblem:
    """Build the instance a TestProblemSpec describes.

    Quadrature problems: A and x_true from the discretization, then
    b = A x_true + noise at level spec.delta (seeded). Underdetermined
    variants truncate the noiseless rows first so the noise level is exact
    for the rows that remain. 'tomo' builds the parallel-beam operator on
    an n x n pixel grid with the phantom as ground truth.
    """
    if spec.name == "tomo":
        return _generate_tomo(spec)
    a, x_true = _GENERATORS[spec.name](spec.n)
    l = first_difference(spec.n)
    meta = {"name": spec.name, "n": spec.n, "seed": spec.seed}
    m = spec.n if spec.m is None else spec.m
    if m < spec.n:
        a = a[:m]
        meta.update({"construction": "row-truncation", "m": m})
    b = add_noise(a @ x_true, spec.delta, spec.seed)
    return TikhonovProblem(a=a, l=l, b=b, x_true=x_true, delta=spec.delta, meta=meta)


@dataclass(frozen=True)
class SparseOperator:
    """Triplet (COO) sparse matrix with unique, in-range coordinates."""

    rows: int
    cols: int
    row_idx: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        row_idx = np.asarray(self.row_idx, dtype=np.int64)
        col_idx = np.asarray(self.col_idx, dtype=np.int64)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "row_idx", row_idx)
        object.__setattr__(self, "col_idx", col_idx)
        object.__setattr__(self, "values", values)
        if not (row_idx.shape == col_idx.shape == values.shape):
            raise DimensionError("triplet arrays must share one shape")
        if values.size:
            if not np.isfinite(values).all():
                raise ValueError("sparse values must be finite")
            if row_idx.min() < 0 or row_idx.max() >= self.rows:
                raise ValueError("row index out of range")
            if col_idx.min() < 0 or col_idx.max() >= self.cols:
                raise ValueError("column index out of range")
            flat = row_idx * self.cols + col_idx
            if np.unique(flat).size != flat.size:
                raise ValueError("duplicate (row, col) coordinate")

    @property
    def nnz(self) -> int:
        return self.values.size

    def triplets(self) -> list[tuple[int, int, float]]:
        return list(zip(self.row_idx.tolist(), self.col_idx.tolist(), self.values.tolist()))

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.rows, self.cols))
        a[self.row_idx, self.col_idx] = self.values
        return a


def _cell_of(coord: float, n_grid: int) -> int:
    """Cell index of a coordinate in [0,1]; exact gridline hits go to the
    lower cell (corner ties resolve downward)."""
    scaled = coord * n_grid
    k = int(np.floor(scaled))
    if k > 0 and scaled == np.floor(scaled):
        k -= 1
    return min(max(k, 0), n_grid - 1)


def _trace_ray(p0: np.ndarray, direction: np.ndarray, n_grid: int):
    """Intersection lengths of one line with the unit-square pixel grid.

    Returns (pixel_indices, lengths) with pixels flattened row-major as
    iy * n_grid + ix, iy counted from the bottom edge.
    """
    t_lo, t_hi = -np.inf, np.inf
    for axis in range(2):
        d = direction[axis]
        o = p0[axis]
        if abs(d) < 1e-14:
            if not (0.0 <= o <= 1.0):
                return np.empty(0, dtype=np.int64), np.empty(0)
        else:
            ta = (0.0 - o) / d
            tb = (1.0 - o) / d
            t_lo = max(t_lo, min(ta, tb))
            t_hi = min(t_hi, max(ta, tb))
    if not (t_hi > t_lo):
        return np.empty(0, dtype=np.int64), np.empty(0)

    crossings = [np.array([t_lo, t_hi])]
    for axis in range(2):
        d = direction[axis]
        if abs(d) >= 1e-14:
            lines = np.arange(1, n_grid) / n_grid
            ts = (lines - p0[axis]) / d
            crossings.append(ts[(ts > t_lo) & (ts < t_hi)])
    ts = np.unique(np.concatenate(crossings))
    lengths = np.diff(ts)
    keep = lengths > 1e-14
    if not keep.any():
        return np.empty(0, dtype=np.int64), np.empty(0)
    mids = 0.5 * (ts[:-1] + ts[1:])[keep]
    lengths = lengths[keep]
    pix = np.empty(lengths.size, dtype=np.int64)
    for k, t in enumerate(mids):
        point = p0 + t * direction
        ix = _cell_of(point[0], n_grid)
        iy = _cell_of(point[1], n_grid)
        pix[k] = iy * n_grid + ix
    return pix, lengths


def parallel_tomo(
    n_grid: int, angles_deg, rays: int, phantom_seed: int = 0
) -> tuple[SparseOperator, np.ndarray]:
    """Parallel-beam line-integral operator on the unit square.

    For each angle, `rays` parallel lines cross the square with offsets
    centered across the sqrt(2) diagonal span. Row (angle_index * rays + k)
    holds the per-pixel intersection lengths of ray k at that angle. Also
    returns a seeded piecewise phantom (values in [0,1]) flattened in the
    same pixel order.
    """
    if n_grid < 2:
        raise ValueError(f"n_grid must be at least 2, got {n_grid}")
    if rays < 1:
        raise ValueError(f"rays must be at least 1, got {rays}")
    angles = np.atleast_1d(np.asarray(angles_deg, dtype=float))
    if angles.size == 0:
        raise ValueError("need at least one angle")
    span = np.sqrt(2.0)
    offsets = ((np.arange(rays) + 0.5) / rays - 0.5) * span
    center = np.array([0.5, 0.5])
    rows_i: list[np.ndarray] = []
    cols_i: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    for ia, ang in enumerate(angles):
        rad = np.deg2rad(ang)
        direction = np.array([np.cos(rad), np.sin(rad)])
        normal = np.array([-np.sin(rad), np.cos(rad)])
        for k in range(rays):
            p0 = center + offsets[k] * normal
            pix, lengths = _trace_ray(p0, direction, n_grid)
            if pix.size:
                r = ia * rays + k
                rows_i.append(np.full(pix.size, r, dtype=np.int64))
                cols_i.append(pix)
                vals.append(lengths)
    op = SparseOperator(
        rows=angles.size * rays,
        cols=n_grid * n_grid,
        row_idx=np.concatenate(rows_i) if rows_i else np.empty(0, dtype=np.int64),
        col_idx=np.concatenate(cols_i) if cols_i else np.empty(0, dtype=np.int64),
        values=np.concatenate(vals) if vals else np.empty(0),
    )
    return op, phantom(n_grid, phantom_seed)


def phantom(n_grid: int, seed: int = 0, shapes: int = 8) -> np.ndarray:
    """Seeded synthetic test image: a mixture of axis-aligned rectangles and
    disks with intensities in [0,1], max-blended, flattened like the
    tomography pixel order."""
    gen = np.random.Generator(np.random.Philox(key=seed & _MASK64))
    xs = (np.arange(n_grid) + 0.5) / n_grid
    gx, gy = np.meshgrid(xs, xs)  # gy rows follow iy (bottom-up)
    img = np.zeros((n_grid, n_grid))
    for _ in range(shapes):
        kind = gen.random()
        cx, cy = gen.uniform(0.2, 0.8, size=2)
        size = gen.uniform(0.08, 0.25)
        level = gen.uniform(0.3, 1.0)
        if kind < 0.5:
            mask = (np.abs(gx - cx) <= size) & (np.abs(gy - cy) <= size * gen.uniform(0.5, 1.5))
        else:
            mask = (gx - cx) ** 2 + (gy - cy) ** 2 <= size**2
        img = np.maximum(img, np.where(mask, level, 0.0))
    return img.reshape(-1)


def _generate_tomo(spec: TestProblemSpec) -> TikhonovProblem:
    n_grid = spec.n
    angles = np.arange(0.0, 180.0, 12.0)
    rays = 4 * n_grid
    op, x_true = parallel_tomo(n_grid, angles, rays, phantom_seed=spec.seed)
    a = op.to_dense()
    b = add_noise(a @ x_true, spec.delta, spec.seed)
    meta = {
        "name": "tomo",
        "n_grid": n_grid,
        "angles": angles.tolist(),
        "rays": rays,
        "seed": spec.seed,
    }
    return TikhonovProblem(
        a=a,
        l=first_difference(n_grid * n_grid),
        b=b,
        x_true=x_true,
        delta=spec.delta,
        meta=meta,
    )


def export_problem(directory, prob: TikhonovProblem) -> None:
    """Write a problem as a Matrix Market + CSV bundle (a.mtx, l.mtx,
    b.csv, x_true.csv)."""
    import os

    os.makedirs(directory, exist_ok=True)
    matio.write_matrix_mm(os.path.join(directory, "a.mtx"), prob.a)
    matio.write_matrix_mm(os.path.join(directory, "l.mtx"), prob.l)
    matio.write_vector_csv(os.path.join(directory, "b.csv"), prob.b)
    if prob.x_true is not None:
        matio.write_vector_csv(os.path.join(directory, "x_true.csv"), prob.x_true)


def import_problem(directory, delta: float = 0.0) -> TikhonovProblem:
    """Read a bundle written by export_problem (or by an external toolbox
    using the same layout)."""
    import os

    x_path = os.path.join(directory, "x_true.csv")
    x_true = matio.read_vector_csv(x_path) if os.path.exists(x_path) else None
    return TikhonovProblem(
        a=matio.read_matrix_mm(os.path.join(directory, "a.mtx")),
        l=matio.read_matrix_mm(os.path.join(directory, "l.mtx")),
        b=matio.read_vector_csv(os.path.join(directory, "b.csv")),
        x_true=x_true,
        delta=delta,
        meta={"source": str(directory)},
    )
