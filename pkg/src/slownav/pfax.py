"""Predictable feature analysis with a control signal (PFAx).

The model predicts reduced features ``m(t) = A_rᵀ z(t)`` from their own
history and the control history,

    m(t) ≈ B · Lᵀ ζ(t) + U · μ(t),    L = I_p ⊗ A_r,

with ζ, μ the lag embeddings of z and u. For a fixed extraction ``A_r`` the
least-squares optimal ``B`` and ``U`` have closed forms; the extraction itself
is either the most predictable subspace of the residual or taken from SFA.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numeric import (
    EIGEN_FLOOR,
    LaggedEmbedding,
    NumericError,
    as_series,
    block_lift,
    symmetric_eig_ascending,
    thresholded_pseudo_inverse,
)
from .sfa import SfaModel


@dataclass(frozen=True)
class PfaxModel:
    """Extraction plus linear predictor.

    Attributes
    ----------
    extraction : ndarray, shape (n, r)
    B : ndarray, shape (r, r*p)
        Blocks (B_1 ... B_p), B_i acting on m(t-i).
    U : ndarray, shape (r, n_u*q)
        Blocks (U_1 ... U_q), U_j acting on u(t-j).
    p, q : int
    pfa_eigenvalues : ndarray
        Residual eigenvalues behind the extraction, ascending; empty in proxy mode.
    proxy_mode : bool
        True when the extraction came from SFA.
    V : ndarray or None
        Companion matrix of the iterated predictor, when one was trained.
    horizon : int
        Iteration horizon k of the extraction objective.
    """

    extraction: np.ndarray
    B: np.ndarray
    U: np.ndarray
    p: int
    q: int
    pfa_eigenvalues: np.ndarray
    proxy_mode: bool = False
    V: Optional[np.ndarray] = None
    horizon: int = 0

    @property
    def r(self) -> int:
        return self.extraction.shape[1]

    @property
    def n_u(self) -> int:
        return self.U.shape[1] // self.q

    def u_block(self, j: int) -> np.ndarray:
        """U_j, the coefficient of u(t-j), for j = 1..q."""
        if not 1 <= j <= self.q:
            raise IndexError(f"U block {j} out of range 1..{self.q}")
        return self.U[:, (j - 1) * self.n_u: j * self.n_u]


def lift(a: np.ndarray, p: int) -> np.ndarray:
    """Block-diagonal ``I_p ⊗ a`` used to project a stacked history."""
    return block_lift(np.asarray(a, dtype=float), p)


@dataclass(frozen=True)
class _Moments:
    """Raw second moments of (target, ζ, μ) over the embedding rows."""

    zz: np.ndarray
    zzeta: np.ndarray
    zmu: np.ndarray
    zetazeta: np.ndarray
    zetamu: np.ndarray
    mumu: np.ndarray


def _moments(target: np.ndarray, zeta: np.ndarray, mu: np.ndarray) -> _Moments:
    n = target.shape[0]
    for name, arr in (("target", target), ("zeta", zeta), ("mu", mu)):
        if not np.all(np.isfinite(arr)):
            raise NumericError(f"non-finite values in {name}")
    return _Moments(
        zz=target.T @ target / n,
        zzeta=target.T @ zeta / n,
        zmu=target.T @ mu / n,
        zetazeta=zeta.T @ zeta / n,
        zetamu=zeta.T @ mu / n,
        mumu=mu.T @ mu / n,
    )


def _closed_form(a: np.ndarray, mom: _Moments, p: int,
                 rel_eps: float) -> tuple[np.ndarray, np.ndarray]:
    lf = lift(a, p)
    mumu_inv = thresholded_pseudo_inverse(mom.mumu, rel_eps)
    mu_zeta_l = mom.zetamu.T @ lf
    # Schur complements of the control block
    left = a.T @ mom.zzeta @ lf - a.T @ mom.zmu @ mumu_inv @ mu_zeta_l
    inner = lf.T @ mom.zetazeta @ lf - mu_zeta_l.T @ mumu_inv @ mu_zeta_l
    b = left @ thresholded_pseudo_inverse(inner, rel_eps)
    u = (a.T @ mom.zmu - b @ lf.T @ mom.zetamu) @ mumu_inv
    return b, u


def _check_embedding(emb: LaggedEmbedding, n: int) -> None:
    if emb.zeta.shape[1] != n * emb.p:
        raise ValueError(f"zeta width {emb.zeta.shape[1]} does not match n*p = {n * emb.p}")
    if len(emb) < emb.zeta.shape[1] + emb.mu.shape[1]:
        raise ValueError("too few samples to fit the predictor")


def fit_predictors(a_r, emb: LaggedEmbedding, rel_eps: float = EIGEN_FLOOR
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares optimal ``(B, U)`` for a fixed extraction.

    Parameters
    ----------
    a_r : ndarray, shape (n, r)
        Extraction matrix.
    emb : LaggedEmbedding
        Histories of the (sphered) signal and control; ``emb.target`` holds z(t).
    rel_eps : float
        Eigenvalue floor of every inversion.

    Returns
    -------
    B : ndarray, shape (r, r*p)
    U : ndarray, shape (r, n_u*q)
    """
    a = np.atleast_2d(np.asarray(a_r, dtype=float))
    n = emb.target.shape[1]
    if a.shape[0] != n:
        raise ValueError(f"extraction has {a.shape[0]} rows, signal has {n} dims")
    _check_embedding(emb, n)
    return _closed_form(a, _moments(emb.target, emb.zeta, emb.mu), emb.p, rel_eps)


def stationarity_residuals(model: PfaxModel, emb: LaggedEmbedding) -> tuple[float, float]:
    """Relative norms of the gradients of the prediction error in B and U.

    Each gradient is a sum of three moment terms; the returned value is the
    Frobenius norm of the sum divided by the sum of the terms' norms. Both are
    zero at the least-squares optimum. As in :func:`proxy_from_sfa`, ``emb``
    may embed the extracted features themselves.
    """
    mom = _moments(emb.target, emb.zeta, emb.mu)
    a, b, u = model.extraction, model.B, model.U
    if emb.target.shape[1] == model.r and a.shape[0] != model.r:
        a = np.eye(model.r)
    lf = lift(a, model.p)
    db_terms = (-2 * a.T @ mom.zzeta @ lf, 2 * u @ mom.zetamu.T @ lf,
                2 * b @ lf.T @ mom.zetazeta @ lf)
    du_terms = (-2 * a.T @ mom.zmu, 2 * b @ lf.T @ mom.zetamu, 2 * u @ mom.mumu)

    def rel(terms):
        scale = sum(np.linalg.norm(t) for t in terms)
        return float(np.linalg.norm(sum(terms)) / scale) if scale > 0 else 0.0

    return rel(db_terms), rel(du_terms)


def prediction_error(model: PfaxModel, emb: LaggedEmbedding) -> float:
    """Mean squared one-step prediction error ⟨‖m − m̂‖²⟩."""
    m = emb.target @ model.extraction
    m_hat = emb.zeta @ lift(model.extraction, model.p) @ model.B.T + emb.mu @ model.U.T
    return float(np.mean(np.sum((m - m_hat) ** 2, axis=1)))


def _extract_smallest(cov: np.ndarray, r: int) -> tuple[np.ndarray, np.ndarray]:
    w, v = symmetric_eig_ascending(cov)
    return v[:, :r], w


def train_pfax(z, emb: LaggedEmbedding, r: int, rel_eps: float = EIGEN_FLOOR) -> PfaxModel:
    """Most predictable ``r``-dimensional extraction and its predictor.

    The full-rank predictor (extraction = identity) is fitted first; the
    extraction is the eigenvectors of its residual covariance for the ``r``
    smallest eigenvalues. ``B`` and ``U`` are then refitted for it.
    """
    return train_pfax_iterated(z, emb, r, 0, rel_eps)


def _companion(emb: LaggedEmbedding, u_full: np.ndarray, rel_eps: float) -> np.ndarray:
    n = emb.target.shape[1]
    np_ = emb.zeta.shape[1]
    # ζ(t+1) = (z(t), z(t-1), ..., z(t-p+1)) is available for every embedding row
    zeta_next = np.hstack([emb.target, emb.zeta[:, : np_ - n]])
    rows = len(emb)
    cross = zeta_next.T @ emb.zeta / rows
    mu_zeta = emb.mu.T @ emb.zeta / rows
    top = np.zeros((np_, n))
    top[:n] = np.eye(n)
    zz_inv = thresholded_pseudo_inverse(emb.zeta.T @ emb.zeta / rows, rel_eps)
    return (cross - top @ u_full @ mu_zeta) @ zz_inv


def iterated_predictions(b_full: np.ndarray, u_full: np.ndarray, v: np.ndarray,
                         emb: LaggedEmbedding, i: int) -> np.ndarray:
    """``i``-step iterated prediction of z(t) for embedding rows ``i..end``.

    Uses ζ(t-i) and the controls μ(t-i)..μ(t).
    """
    n = emb.target.shape[1]
    np_ = v.shape[0]
    rows = len(emb)
    top = np.zeros((np_, n))
    top[:n] = np.eye(n)
    vi = np.linalg.matrix_power(v, i)
    pred = emb.zeta[: rows - i] @ (b_full @ vi).T
    vj = np.eye(np_)
    for j in range(i + 1):
        gain = top.T @ vj @ top @ u_full
        pred = pred + emb.mu[i - j: rows - j] @ gain.T
        vj = v @ vj
    return pred


def train_pfax_iterated(z, emb: LaggedEmbedding, r: int, k: int,
                        rel_eps: float = EIGEN_FLOOR) -> PfaxModel:
    """PFAx extraction minimizing the summed residuals of 0..k-step predictions."""
    z = as_series(z, name="z")
    n = z.shape[1]
    if r < 1 or r > n:
        raise ValueError(f"r must lie in [1, {n}], got {r}")
    if k < 0:
        raise ValueError("iteration horizon k must be non-negative")
    if emb.target.shape[1] != n:
        raise ValueError("embedding does not match z")
    _check_embedding(emb, n)
    if len(emb) <= k:
        raise ValueError("series too short for the iteration horizon")
    b_full, u_full = fit_predictors(np.eye(n), emb, rel_eps)
    v = _companion(emb, u_full, rel_eps) if k > 0 else None
    total = np.zeros((n, n))
    for i in range(k + 1):
        if i == 0:
            pred = emb.zeta @ b_full.T + emb.mu @ u_full.T
        else:
            pred = iterated_predictions(b_full, u_full, v, emb, i)
        res = emb.target[i:] - pred
        total += res.T @ res / res.shape[0]
    a, eig = _extract_smallest(total, r)
    b, u = fit_predictors(a, emb, rel_eps)
    return PfaxModel(a, b, u, emb.p, emb.q, eig, False, v, k)


def companion_matrix(z, emb: LaggedEmbedding, rel_eps: float = EIGEN_FLOOR) -> np.ndarray:
    """The iterated-prediction matrix V for the full-rank predictor."""
    n = as_series(z).shape[1]
    _, u_full = fit_predictors(np.eye(n), emb, rel_eps)
    return _companion(emb, u_full, rel_eps)


def proxy_from_sfa(sfa: SfaModel, emb: LaggedEmbedding, z=None,
                   rel_eps: float = EIGEN_FLOOR) -> PfaxModel:
    """Predictor for the SFA extraction (SFA used in place of PFAx extraction).

    ``emb`` may embed either the sphered signal z (width n·p) or the SFA
    features themselves (width r·p). The latter is cheaper and algebraically
    identical, because every moment enters the closed form projected by the
    extraction.
    """
    a = sfa.extraction
    n, r = a.shape
    width = emb.target.shape[1]
    if width == n:
        b, u = fit_predictors(a, emb, rel_eps)
    elif width == r:
        b, u = fit_predictors(np.eye(r), emb, rel_eps)
    else:
        raise ValueError(f"embedding width {width} matches neither the sphered "
                         f"dimension {n} nor the feature count {r}")
    return PfaxModel(a.copy(), b, u, emb.p, emb.q, np.empty(0), True)


def predict_next(model: PfaxModel, zeta_row, mu_row) -> np.ndarray:
    """m̂(t) = B·Lᵀζ(t) + U·μ(t) for one raw history pair."""
    zeta_row = np.asarray(zeta_row, dtype=float)
    mu_row = np.asarray(mu_row, dtype=float)
    n = model.extraction.shape[0]
    if zeta_row.shape != (n * model.p,):
        raise ValueError(f"zeta row must have width {n * model.p}")
    m_hist = lift(model.extraction, model.p).T @ zeta_row
    return predict_features(model, m_hist, mu_row)


def predict_features(model: PfaxModel, m_hist, mu_row) -> np.ndarray:
    """m̂(t) = B·(m(t-1), ..., m(t-p)) + U·μ(t) from a feature history."""
    m_hist = np.asarray(m_hist, dtype=float)
    mu_row = np.asarray(mu_row, dtype=float)
    if m_hist.shape != (model.B.shape[1],):
        raise ValueError(f"feature history must have width {model.B.shape[1]}")
    if mu_row.shape != (model.U.shape[1],):
        raise ValueError(f"control history must have width {model.U.shape[1]}")
    return model.B @ m_hist + model.U @ mu_row
