"""Shared numerical substrate.

Time series are plain 2-D float arrays with one row per time step. This module
holds the polynomial expansion, sphering, lag embedding and the eigen-based
helpers every other module builds on.
"""
from __future__ import annotations

import functools
import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np
from scipy.linalg import blas

#: Relative eigenvalue floor used wherever a matrix is inverted.
EIGEN_FLOOR = 1e-8

#: Rows per block when streaming expanded moments.
CHUNK_ROWS = 8192


class NumericError(ValueError):
    """Raised for numerically invalid inputs (non-finite data, zero variance...)."""


def as_series(values, *, name: str = "series", min_len: int = 1) -> np.ndarray:
    """Validate and return ``values`` as a finite 2-D float array.

    A 1-D input is read as a scalar series (one column).
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 1-D or 2-D, got shape {arr.shape}")
    if arr.shape[0] < min_len:
        raise ValueError(f"{name} needs at least {min_len} steps, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains non-finite values")
    return arr


# ---------------------------------------------------------------------------
# polynomial expansion
# ---------------------------------------------------------------------------

_clamped_entries = 0


def clamp_count() -> int:
    """Number of input entries clamped to Legendre bounds since the last reset."""
    return _clamped_entries


def reset_clamp_count() -> None:
    global _clamped_entries
    _clamped_entries = 0


def multi_indices(input_dim: int, degree: int) -> list[tuple[int, ...]]:
    """Sorted variable-index tuples of every monomial with total degree 1..degree.

    Ordering is graded lexicographic: all degree-1 terms, then degree-2, and so
    on; inside a degree the tuples follow ``itertools.combinations_with_replacement``.
    For two inputs and degree 2 this gives x1, x2, x1², x1·x2, x2².
    """
    out: list[tuple[int, ...]] = []
    for d in range(1, degree + 1):
        out.extend(itertools.combinations_with_replacement(range(input_dim), d))
    return out


def expanded_dim(input_dim: int, degree: int) -> int:
    return math.comb(input_dim + degree, degree) - 1


@dataclass(frozen=True)
class ExpansionSpec:
    """Polynomial basis without constant term.

    ``lower``/``upper`` are per-coordinate training bounds. They are mandatory
    for the Legendre basis, where each coordinate is mapped affinely onto
    [-1, 1] and clamped there. For monomials they are optional; when given, the
    same affine map is applied first (it spans the same function space but keeps
    high powers well conditioned).
    """

    basis: str
    degree: int
    input_dim: int
    lower: Optional[tuple[float, ...]] = None
    upper: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if self.basis not in ("monomial", "legendre"):
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.degree < 1:
            raise ValueError("expansion degree must be positive")
        if self.input_dim < 1:
            raise ValueError("input_dim must be positive")
        if (self.lower is None) != (self.upper is None):
            raise ValueError("lower and upper bounds must be given together")
        if self.lower is not None:
            lo = np.asarray(self.lower, dtype=float)
            hi = np.asarray(self.upper, dtype=float)
            if lo.shape != (self.input_dim,) or hi.shape != (self.input_dim,):
                raise ValueError("bounds must have one entry per input coordinate")
            if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(hi > lo)):
                raise ValueError("bounds must be finite with positive width")
        elif self.basis == "legendre":
            raise ValueError("legendre expansion requires training bounds")

    @classmethod
    def fit(cls, basis: str, degree: int, data) -> "ExpansionSpec":
        """Build a spec whose bounds are the per-coordinate min/max of ``data``."""
        x = as_series(data, name="training input")
        lo, hi = x.min(axis=0), x.max(axis=0)
        flat = hi <= lo
        hi = np.where(flat, lo + 1.0, hi)
        return cls(basis, degree, x.shape[1], tuple(map(float, lo)), tuple(map(float, hi)))

    @property
    def output_dim(self) -> int:
        return expanded_dim(self.input_dim, self.degree)

    def to_dict(self) -> dict:
        return {
            "basis": self.basis,
            "degree": self.degree,
            "input_dim": self.input_dim,
            "lower": None if self.lower is None else list(self.lower),
            "upper": None if self.upper is None else list(self.upper),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExpansionSpec":
        lower = None if d.get("lower") is None else tuple(float(v) for v in d["lower"])
        upper = None if d.get("upper") is None else tuple(float(v) for v in d["upper"])
        return cls(d["basis"], int(d["degree"]), int(d["input_dim"]), lower, upper)


def _legendre_table(x: np.ndarray, degree: int) -> np.ndarray:
    """P_0..P_degree evaluated at ``x`` (shape (rows,)), via the three-term recurrence."""
    table = np.empty((degree + 1, x.shape[0]))
    table[0] = 1.0
    if degree >= 1:
        table[1] = x
    for k in range(1, degree):
        table[k + 1] = ((2 * k + 1) * x * table[k] - k * table[k - 1]) / (k + 1)
    return table


def expand(series, spec: ExpansionSpec) -> np.ndarray:
    """Evaluate the basis of ``spec`` on every row of ``series``.

    Returns an array of shape (len, spec.output_dim) with columns in graded
    lexicographic order.
    """
    global _clamped_entries
    x = as_series(series, name="expansion input")
    if x.shape[1] != spec.input_dim:
        raise ValueError(f"expansion expects {spec.input_dim} inputs, got {x.shape[1]}")
    if spec.lower is not None:
        lo = np.asarray(spec.lower)
        hi = np.asarray(spec.upper)
        x = 2.0 * (x - lo) / (hi - lo) - 1.0
        if spec.basis == "legendre":
            outside = (x < -1.0) | (x > 1.0)
            n_out = int(np.count_nonzero(outside))
            if n_out:
                _clamped_entries += n_out
                warnings.warn(
                    f"{n_out} input entries outside Legendre bounds were clamped",
                    RuntimeWarning,
                    stacklevel=2,
                )
                x = np.clip(x, -1.0, 1.0)

    if spec.basis == "monomial":
        parents, variables, bounds = _monomial_plan(spec.input_dim, spec.degree)
        out = np.empty((x.shape[0], spec.output_dim))
        out[:, : spec.input_dim] = x
        # each degree-d term is a degree-(d-1) term times one input
        for lo, hi in bounds:
            np.multiply(out[:, parents[lo:hi]], x[:, variables[lo:hi]], out=out[:, lo:hi])
        return out

    powers = _power_table(spec.input_dim, spec.degree)
    out = np.ones((x.shape[0], spec.output_dim))
    for k in range(spec.input_dim):
        table = _legendre_table(x[:, k], spec.degree)
        cols = np.flatnonzero(powers[:, k])
        out[:, cols] *= table[powers[cols, k]].T
    return out


@functools.lru_cache(maxsize=None)
def _monomial_plan(input_dim: int, degree: int):
    """Parent column, multiplying input and column range of every term above degree 1."""
    index = multi_indices(input_dim, degree)
    col_of = {idx: col for col, idx in enumerate(index)}
    parents = np.zeros(len(index), dtype=np.intp)
    variables = np.zeros(len(index), dtype=np.intp)
    for col, idx in enumerate(index):
        if len(idx) > 1:
            parents[col] = col_of[idx[:-1]]
            variables[col] = idx[-1]
    bounds = []
    lo = input_dim
    for d in range(2, degree + 1):
        hi = lo + math.comb(input_dim + d - 1, d)
        bounds.append((lo, hi))
        lo = hi
    return parents, variables, tuple(bounds)


@functools.lru_cache(maxsize=None)
def _power_table(input_dim: int, degree: int) -> np.ndarray:
    """Per-column exponent of each input, shape (output_dim, input_dim)."""
    index = multi_indices(input_dim, degree)
    return np.array([np.bincount(idx, minlength=input_dim) for idx in index], dtype=np.intp)


# ---------------------------------------------------------------------------
# eigen helpers
# ---------------------------------------------------------------------------

def symmetric_eig_ascending(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvector columns of a symmetric matrix."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericError("matrix contains non-finite entries")
    return np.linalg.eigh(0.5 * (m + m.T))


def thresholded_pseudo_inverse(m, rel_eps: float = EIGEN_FLOOR) -> np.ndarray:
    """Inverse of a symmetric matrix with near-null eigenspaces projected away.

    Eigenvalues with ``|λ| < rel_eps * max|λ|`` are replaced by zero; the others
    are inverted.
    """
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return m.copy()
    w, v = symmetric_eig_ascending(m)
    top = np.max(np.abs(w))
    if top == 0.0:
        return np.zeros_like(m)
    keep = np.abs(w) >= rel_eps * top
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    out = (v * inv) @ v.T
    return 0.5 * (out + out.T)


# ---------------------------------------------------------------------------
# sphering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpheringTransform:
    """Affine map ``z = whitener @ (h - mean)`` with a symmetric whitener."""

    mean: np.ndarray
    whitener: np.ndarray

    @property
    def expanded_dim(self) -> int:
        return self.mean.shape[0]

    @property
    def rank(self) -> int:
        """Number of directions the whitener keeps."""
        return int(np.count_nonzero(np.linalg.eigvalsh(self.whitener) > 0.0))


def sphering_basis(mean, cov, eigen_floor: float = EIGEN_FLOOR
                   ) -> tuple[SpheringTransform, np.ndarray]:
    """Sphering transform plus the scaled basis of the directions it keeps.

    The second returned array ``W`` (expanded_dim × rank) has orthogonal
    columns ``v_i / √λ_i``; ``(h − mean) @ W`` are coordinates of the sphered
    signal in an orthonormal basis of its range.
    """
    mean = np.asarray(mean, dtype=float)
    w, v = symmetric_eig_ascending(cov)
    top = w[-1]
    if not top > 0.0:
        raise NumericError("zero variance: input covariance vanishes")
    keep = w > eigen_floor * top
    scale = np.zeros_like(w)
    scale[keep] = 1.0 / np.sqrt(w[keep])
    whitener = (v * scale) @ v.T
    return (SpheringTransform(mean.copy(), 0.5 * (whitener + whitener.T)),
            v[:, keep] * scale[keep])


def sphering_from_moments(mean, cov, eigen_floor: float = EIGEN_FLOOR) -> SpheringTransform:
    """Sphering transform from a mean vector and centered covariance."""
    return sphering_basis(mean, cov, eigen_floor)[0]


def fit_sphering(series, eigen_floor: float = EIGEN_FLOOR) -> SpheringTransform:
    """Fit the mean and symmetric inverse square root covariance of ``series``.

    Directions whose variance is below ``eigen_floor`` times the largest one are
    projected away (the whitener is zero there).
    """
    h = as_series(series, name="sphering input")
    if h.shape[0] < h.shape[1] + 1:
        raise ValueError(f"need at least {h.shape[1] + 1} samples to sphere {h.shape[1]} dims")
    mean = h.mean(axis=0)
    centered = h - mean
    cov = centered.T @ centered / h.shape[0]
    return sphering_from_moments(mean, cov, eigen_floor)


def apply_sphering(t: SpheringTransform, series) -> np.ndarray:
    h = np.asarray(series, dtype=float)
    single = h.ndim == 1
    h = np.atleast_2d(h)
    if h.shape[1] != t.expanded_dim:
        raise ValueError(f"sphering expects {t.expanded_dim} dims, got {h.shape[1]}")
    z = (h - t.mean) @ t.whitener
    return z[0] if single else z


# ---------------------------------------------------------------------------
# streamed moments of expanded data
# ---------------------------------------------------------------------------

def iter_expanded(raw: np.ndarray, spec: ExpansionSpec, chunk: int = CHUNK_ROWS,
                  overlap: int = 0) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(start, expand(raw[start:stop + overlap]))`` blocks."""
    n = raw.shape[0]
    for start in range(0, n, chunk):
        stop = min(start + chunk + overlap, n)
        yield start, expand(raw[start:stop], spec)


@dataclass(frozen=True)
class ExpandedMoments:
    """Mean, centered covariance and derivative covariance of an expanded signal."""

    mean: np.ndarray
    cov: np.ndarray
    dcov: np.ndarray
    n_samples: int


def expanded_moments(raw, spec: ExpansionSpec, chunk: int = CHUNK_ROWS) -> ExpandedMoments:
    """Two-pass moments of ``expand(raw)`` without materializing the expansion.

    ``dcov`` is ⟨ḣḣᵀ⟩ with the unit-step forward difference ḣ(t) = h(t+1) - h(t).
    """
    raw = as_series(raw, name="training input", min_len=2)
    n = raw.shape[0]
    total = np.zeros(spec.output_dim)
    for _, h in iter_expanded(raw, spec, chunk):
        total += h.sum(axis=0)
    mean = total / n

    cov = np.zeros((spec.output_dim, spec.output_dim), order="F")
    dcov = np.zeros_like(cov, order="F")
    for start, h in iter_expanded(raw, spec, chunk, overlap=1):
        own = np.asfortranarray(h[: min(chunk, n - start)] - mean)
        d = np.asfortranarray(np.diff(h, axis=0))
        # symmetric rank-k updates fill the upper triangle only
        cov = blas.dsyrk(1.0, own, beta=1.0, c=cov, trans=1, overwrite_c=1)
        dcov = blas.dsyrk(1.0, d, beta=1.0, c=dcov, trans=1, overwrite_c=1)
    return ExpandedMoments(mean, _symmetrize_upper(cov) / n, _symmetrize_upper(dcov) / (n - 1), n)


def _symmetrize_upper(m: np.ndarray) -> np.ndarray:
    upper = np.triu(m)
    return upper + np.triu(m, 1).T


# ---------------------------------------------------------------------------
# lag embedding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LaggedEmbedding:
    """Stacked histories aligned on a common time index.

    Row k corresponds to time ``t = offset + k`` where ``offset = max(p, q)``.
    ``zeta[k] = (z(t-1), ..., z(t-p))``, ``mu[k] = (u(t-1), ..., u(t-q))`` and
    ``target[k] = z(t)``.
    """

    zeta: np.ndarray
    mu: np.ndarray
    target: np.ndarray
    p: int
    q: int

    @property
    def offset(self) -> int:
        return max(self.p, self.q)

    def __len__(self) -> int:
        return self.target.shape[0]


def _history(x: np.ndarray, order: int, offset: int) -> np.ndarray:
    n = x.shape[0]
    return np.hstack([x[offset - k: n - k] for k in range(1, order + 1)])


def lag_embed(z, u, p: int = 1, q: int = 1) -> LaggedEmbedding:
    """Build most-recent-first histories of ``z`` (order p) and ``u`` (order q)."""
    if p < 1 or q < 1:
        raise ValueError("prediction orders p and q must be at least 1")
    z = as_series(z, name="z")
    u = as_series(u, name="u")
    if u.shape[0] != z.shape[0]:
        raise ValueError("z and u must share the same time index")
    offset = max(p, q)
    if z.shape[0] < offset + 1:
        raise ValueError(f"series of length {z.shape[0]} too short for orders p={p}, q={q}")
    return LaggedEmbedding(
        zeta=_history(z, p, offset),
        mu=_history(u, q, offset),
        target=z[offset:].copy(),
        p=p,
        q=q,
    )


def block_lift(m: np.ndarray, p: int) -> np.ndarray:
    """``I_p ⊗ m``: ``p`` copies of ``m`` on the block diagonal."""
    return np.kron(np.eye(p), m)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def write_series_csv(path, values, columns: Optional[Sequence[str]] = None) -> None:
    """Write a series as ``t,c0,c1,...`` with round-trip float precision."""
    arr = as_series(values)
    if columns is None:
        columns = [f"c{i}" for i in range(arr.shape[1])]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(["t", *columns]) + "\n")
        for t, row in enumerate(arr):
            fh.write(f"{t}," + ",".join(repr(float(v)) for v in row) + "\n")


def read_series_csv(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return as_series(data[:, 1:], name=str(path))


def write_table_csv(path, header: Sequence[str], rows) -> None:
    """Write rows under ``header``; floats use round-trip precision, NaN stays empty."""
    def cell(v):
        if isinstance(v, str):
            return v
        if isinstance(v, (bool, np.bool_)):
            return str(int(v))
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        v = float(v)
        return "" if np.isnan(v) else repr(v)

    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell(v) for v in row) + "\n")
