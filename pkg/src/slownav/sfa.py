"""Linear slow feature analysis on sphered signals, plus closed-form references.

The references are the analytic slow features of simple one-dimensional
sources: cosine harmonics for a uniformly occupied interval, scaled Hermite
polynomials for a Gaussian one, and the Chebyshev relation tying higher
cosine harmonics to the first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special

from .numeric import (
    EIGEN_FLOOR,
    ExpansionSpec,
    NumericError,
    SpheringTransform,
    apply_sphering,
    as_series,
    expand,
    expanded_moments,
    sphering_basis,
    symmetric_eig_ascending,
)

#: Fraction of the training run used to fix the sign of each component.
SIGN_FRACTION = 0.1

DEFAULT_COMPONENTS = 12


@dataclass(frozen=True)
class SfaModel:
    """Trained linear SFA.

    Attributes
    ----------
    sphering : SpheringTransform or None
        Maps expanded signals to sphered ones. ``None`` when the model was
        trained directly on an already sphered signal.
    expansion : ExpansionSpec or None
        Basis applied to raw input. ``None`` means raw input is used as is.
    extraction : ndarray, shape (n, r)
        Orthonormal columns; output component i is ``z @ extraction[:, i]``.
    delta_values : ndarray, shape (r,)
        Mean squared unit-step derivative of each output, ascending.
    """

    sphering: Optional[SpheringTransform]
    expansion: Optional[ExpansionSpec]
    extraction: np.ndarray
    delta_values: np.ndarray
    _fused: Optional[tuple] = field(default=None, init=False, repr=False, compare=False)

    @property
    def n_components(self) -> int:
        return self.extraction.shape[1]

    @property
    def input_dim(self) -> int:
        if self.expansion is not None:
            return self.expansion.input_dim
        return self.extraction.shape[0]

    def _affine(self) -> tuple[np.ndarray, np.ndarray]:
        # whitener and extraction fused once: features = (h - mean) @ W
        if self._fused is None:
            if self.sphering is None:
                w, mean = self.extraction, np.zeros(self.extraction.shape[0])
            else:
                w = self.sphering.whitener @ self.extraction
                mean = self.sphering.mean
            object.__setattr__(self, "_fused", (mean, w))
        return self._fused

    def truncated(self, r: int) -> "SfaModel":
        """Same model keeping only the ``r`` slowest components."""
        if not 1 <= r <= self.n_components:
            raise ValueError(f"cannot keep {r} of {self.n_components} components")
        return SfaModel(self.sphering, self.expansion, self.extraction[:, :r].copy(),
                        self.delta_values[:r].copy())


def _slow_directions(zcov: np.ndarray, dcov: np.ndarray, r: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal slowest directions of ``dcov`` inside the range of ``zcov``.

    ``zcov`` is the second moment of the sphered signal: the identity, or a
    projector when sphering dropped near-null directions. Restricting to its
    range keeps the dropped (constant zero) directions from looking slow.
    """
    w, v = symmetric_eig_ascending(zcov)
    basis = v[:, w > 0.5]
    if r > basis.shape[1]:
        raise NumericError(
            f"requested {r} components but the sphered signal has rank {basis.shape[1]}")
    reduced = basis.T @ dcov @ basis
    lam, q = symmetric_eig_ascending(reduced)
    if not np.all(np.isfinite(lam[:r])):
        raise NumericError("derivative covariance has non-finite eigenvalues")
    return basis @ q[:, :r], lam[:r].copy()


def _fix_signs(extraction: np.ndarray, early: np.ndarray) -> np.ndarray:
    """Flip columns so outputs correlate positively with time on ``early``."""
    y = early @ extraction
    t = np.arange(y.shape[0], dtype=float)
    t -= t.mean()
    score = t @ (y - y.mean(axis=0))
    signs = np.where(score < 0.0, -1.0, 1.0)
    return extraction * signs


def _n_early(n: int) -> int:
    return max(2, int(math.ceil(SIGN_FRACTION * n)))


def train_sfa(z, r: int = DEFAULT_COMPONENTS, *, sphering: Optional[SpheringTransform] = None,
              expansion: Optional[ExpansionSpec] = None) -> SfaModel:
    """Slowest ``r`` directions of an already sphered signal.

    Parameters
    ----------
    z : array_like, shape (len, n)
        Sphered signal (zero mean, identity or projector covariance).
    r : int
        Number of components.
    sphering, expansion : optional
        Stored on the model so that :func:`sfa_extract` can take raw input.

    Returns
    -------
    SfaModel
        Columns are eigenvectors of the derivative covariance ⟨żżᵀ⟩ for the
        ``r`` smallest eigenvalues, ascending.
    """
    z = as_series(z, name="sphered signal")
    n = z.shape[1]
    if r < 1 or r > n:
        raise ValueError(f"r must lie in [1, {n}], got {r}")
    if z.shape[0] < n + 2:
        raise ValueError(f"need at least {n + 2} samples for {n} dims")
    zcov = z.T @ z / z.shape[0]
    dz = np.diff(z, axis=0)
    dcov = dz.T @ dz / dz.shape[0]
    a, lam = _slow_directions(zcov, dcov, r)
    a = _fix_signs(a, z[: _n_early(z.shape[0])])
    return SfaModel(sphering, expansion, a, lam)


def fit_sfa(raw, expansion: ExpansionSpec, r: int = DEFAULT_COMPONENTS,
            eigen_floor: float = EIGEN_FLOOR) -> SfaModel:
    """Expand, sphere and run SFA on a raw series using streamed moments.

    Equivalent to ``train_sfa(apply_sphering(s, expand(raw)), r)`` but never
    holds the whole expanded series in memory.
    """
    raw = as_series(raw, name="training input", min_len=3)
    mom = expanded_moments(raw, expansion)
    sph, basis = sphering_basis(mom.mean, mom.cov, eigen_floor)
    if r < 1 or r > basis.shape[1]:
        raise ValueError(f"r must lie in [1, {basis.shape[1]}], got {r}")
    # the sphered signal's second moment is the projector onto span(v_keep),
    # so the slow directions solve a reduced problem in that orthonormal basis
    reduced = basis.T @ mom.dcov @ basis
    lam, q = symmetric_eig_ascending(reduced)
    if not np.all(np.isfinite(lam[:r])):
        raise NumericError("derivative covariance has non-finite eigenvalues")
    a = (basis / np.linalg.norm(basis, axis=0)) @ q[:, :r]
    lam = lam[:r].copy()
    early = apply_sphering(sph, expand(raw[: _n_early(raw.shape[0])], expansion))
    a = _fix_signs(a, early)
    return SfaModel(sph, expansion, a, lam)


def sfa_extract(model: SfaModel, raw) -> np.ndarray:
    """Slow features of raw input; a single point gives a 1-D result."""
    x = np.asarray(raw, dtype=float)
    # a 1-D array is one point unless the model takes scalar input
    single = x.ndim == 0 or (x.ndim == 1 and model.input_dim > 1)
    if single:
        x = x.reshape(1, -1)
    x = as_series(x, name="raw input")
    if x.shape[1] != model.input_dim:
        raise ValueError(f"model expects {model.input_dim} inputs, got {x.shape[1]}")
    h = expand(x, model.expansion) if model.expansion is not None else x
    mean, w = model._affine()
    out = (h - mean) @ w
    return out[0] if single else out


def sfa_extract_chunked(model: SfaModel, raw, chunk: int = 8192) -> np.ndarray:
    """:func:`sfa_extract` over a long series in fixed-size blocks."""
    raw = as_series(raw, name="raw input")
    out = np.empty((raw.shape[0], model.n_components))
    for start in range(0, raw.shape[0], chunk):
        out[start:start + chunk] = sfa_extract(model, raw[start:start + chunk])
    return out


def constraint_report(y) -> dict:
    """Deviation of an output signal from zero mean, unit variance, decorrelation."""
    y = as_series(y)
    mean = y.mean(axis=0)
    cov = np.cov(y, rowvar=False, bias=True).reshape(y.shape[1], y.shape[1])
    off = cov - np.diag(np.diag(cov))
    return {
        "max_abs_mean": float(np.max(np.abs(mean))),
        "max_var_error": float(np.max(np.abs(np.diag(cov) - 1.0))),
        "max_abs_corr": float(np.max(np.abs(off))) if y.shape[1] > 1 else 0.0,
    }


# ---------------------------------------------------------------------------
# closed-form references
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HarmonicReference:
    """Analytic slow feature of a 1-D source.

    ``kind`` is ``"uniform_cosine"`` (source uniform on [0, length]) or
    ``"hermite"`` (standard normal source).
    """

    kind: str
    index: int
    length: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("uniform_cosine", "hermite"):
            raise ValueError(f"unknown harmonic kind {self.kind!r}")
        if self.index < 1:
            raise ValueError("harmonic index must be positive")
        if self.kind == "uniform_cosine" and not (self.length and self.length > 0):
            raise ValueError("uniform_cosine needs a positive interval length")


def harmonic_eval(ref: HarmonicReference, s) -> np.ndarray:
    """Evaluate ``ref`` at ``s``.

    uniform_cosine gives √2·cos(iπs/L) and requires s in [0, L]; hermite gives
    H_i(s/√2)/√(2^i i!) with physicists' Hermite polynomials H_i.
    """
    s = np.asarray(s, dtype=float)
    i = ref.index
    if ref.kind == "uniform_cosine":
        tol = 1e-12 * ref.length
        if np.any(s < -tol) or np.any(s > ref.length + tol):
            raise ValueError(f"uniform_cosine is defined on [0, {ref.length}]")
        return math.sqrt(2.0) * np.cos(i * math.pi * s / ref.length)
    norm = 1.0 / math.sqrt(2.0 ** i * math.factorial(i))
    return norm * special.eval_hermite(i, s / math.sqrt(2.0))


def chebyshev_compose(i: int, g1) -> np.ndarray:
    """Predict the i-th cosine harmonic from the first: √2·T_i(g1/√2)."""
    if i < 1:
        raise ValueError("harmonic index must be positive")
    g1 = np.asarray(g1, dtype=float)
    return math.sqrt(2.0) * special.eval_chebyt(i, g1 / math.sqrt(2.0))
