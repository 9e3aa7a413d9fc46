"""One-step control: drive predicted features toward a goal.

With everything but the current control known, the predicted features are
affine in u(t): m̂ = A_SFAᵀ(known part) + Ũ₁u. The controller minimizes
‖u* − Ũ₁u‖² either freely or on the sphere ‖u‖ = c.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numeric import EIGEN_FLOOR, symmetric_eig_ascending, thresholded_pseudo_inverse
from .pfax import PfaxModel, lift

MAX_NEWTON_ITER = 200
SECULAR_RTOL = 1e-12


@dataclass(frozen=True)
class ControlProblem:
    """min ‖u_star − u_tilde1 · u‖², optionally subject to ‖u‖ = norm_c."""

    u_tilde1: np.ndarray
    u_star: np.ndarray
    norm_c: Optional[float] = None

    def __post_init__(self):
        if not (np.all(np.isfinite(self.u_tilde1)) and np.all(np.isfinite(self.u_star))):
            raise ValueError("control problem has non-finite entries")
        if self.u_tilde1.shape[0] != self.u_star.shape[0]:
            raise ValueError("u_tilde1 rows must match u_star length")
        if self.norm_c is not None and not self.norm_c > 0:
            raise ValueError("norm constraint c must be positive")

    def objective(self, u) -> np.ndarray:
        """Squared residual; ``u`` may be a single vector or rows of vectors."""
        u = np.asarray(u, dtype=float)
        res = self.u_star - u @ self.u_tilde1.T
        return np.sum(res ** 2, axis=-1)


def assemble_control_problem(pfax: PfaxModel, a_sfa, goal, zeta_next, mu_known=None, *,
                             norm_c: Optional[float] = None,
                             projected: bool = False) -> ControlProblem:
    """Build the problem for the control u(t) that moves toward ``goal``.

    Parameters
    ----------
    pfax : PfaxModel
    a_sfa : ndarray, shape (r, j) or None
        Maps PFAx features to the goal features; ``None`` means identity.
        Selecting the first j columns of the identity restricts the goal to
        the first j components.
    goal : ndarray, shape (j,)
        Goal features m*.
    zeta_next : ndarray
        ζ(t+1) = (z(t), ..., z(t-p+1)), width n·p; or, with ``projected``,
        the feature history (m(t), ..., m(t-p+1)) of width r·p.
    mu_known : ndarray, optional
        (u(t-1), ..., u(t-q+1)), width n_u·(q-1). Unused when q = 1.
    norm_c : float, optional
        Speed c for the norm-constrained solve.

    Notes
    -----
    u* = m* − A_SFAᵀ(B·Lᵀζ(t+1) + Σ_{j≥2} U_j u(t−j+1)), with the control
    history entering with the same sign as in the predictor itself.
    """
    r = pfax.r
    a = np.eye(r) if a_sfa is None else np.atleast_2d(np.asarray(a_sfa, dtype=float))
    if a.shape[0] != r:
        raise ValueError(f"A_SFA must have {r} rows, got {a.shape[0]}")
    goal = np.atleast_1d(np.asarray(goal, dtype=float))
    if goal.shape != (a.shape[1],):
        raise ValueError(f"goal must have {a.shape[1]} entries")
    zeta_next = np.asarray(zeta_next, dtype=float)
    if projected:
        if zeta_next.shape != (r * pfax.p,):
            raise ValueError(f"feature history must have width {r * pfax.p}")
        m_hist = zeta_next
    else:
        n = pfax.extraction.shape[0]
        if zeta_next.shape != (n * pfax.p,):
            raise ValueError(f"zeta must have width {n * pfax.p}")
        m_hist = lift(pfax.extraction, pfax.p).T @ zeta_next
    known = pfax.B @ m_hist
    if pfax.q > 1:
        if mu_known is None:
            raise ValueError(f"control history u(t-1)..u(t-{pfax.q - 1}) is required")
        mu_known = np.asarray(mu_known, dtype=float)
        if mu_known.shape != (pfax.n_u * (pfax.q - 1),):
            raise ValueError(f"control history must have width {pfax.n_u * (pfax.q - 1)}")
        known = known + pfax.U[:, pfax.n_u:] @ mu_known
    u_star = goal - a.T @ known
    u_tilde1 = a.T @ pfax.u_block(1)
    return ControlProblem(u_tilde1, u_star, norm_c)


def solve_unconstrained(problem: ControlProblem, rel_eps: float = EIGEN_FLOOR) -> np.ndarray:
    """Minimum-norm least-squares control."""
    ut = problem.u_tilde1
    return thresholded_pseudo_inverse(ut.T @ ut, rel_eps) @ (ut.T @ problem.u_star)


def _secular(b2: np.ndarray, d: np.ndarray, lam: float) -> float:
    return float(np.sum(b2 / (d - lam) ** 2))


def _solve_secular(b2: np.ndarray, d: np.ndarray, c: float) -> float:
    """λ < d_min with Σ b_i²/(d_i − λ)² = c², assuming the sum diverges at d_min."""
    c2 = c * c
    bnorm = math.sqrt(float(np.sum(b2)))
    lo = d[0] - bnorm / c
    hi = min(d[0], d[-1] - bnorm / c)
    # φ(lo) <= c² since every |d_i - lo| >= ‖b‖/c; φ(hi) >= c² or hi = d_min
    lam = lo
    for _ in range(MAX_NEWTON_ITER):
        phi = _secular(b2, d, lam)
        if abs(phi - c2) <= SECULAR_RTOL * c2:
            return lam
        if phi < c2:
            lo = lam
        else:
            hi = lam
        # Newton on ψ(λ) = 1/√φ − 1/c, which is close to linear left of d_min
        dphi = float(np.sum(2.0 * b2 / (d - lam) ** 3))
        step = (1.0 / math.sqrt(phi) - 1.0 / c) / (0.5 * phi ** -1.5 * dphi)
        nxt = lam + step
        if not (lo < nxt < hi) or not np.isfinite(nxt):
            nxt = 0.5 * (lo + hi)
        if nxt == lam:
            break
        lam = nxt
    # bisection fallback on the monotone branch
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        phi = _secular(b2, d, mid)
        if abs(phi - c2) <= SECULAR_RTOL * c2:
            return mid
        if phi < c2:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-14)
    return -v if nz.size and v[nz[0]] < 0 else v


def solve_norm_constrained(problem: ControlProblem) -> np.ndarray:
    """Global minimizer of ‖u* − Ũ₁u‖² on the sphere ‖u‖ = c.

    Stationary points satisfy (H − λI)u = Ũ₁ᵀu* with H = Ũ₁ᵀŨ₁; the global
    minimum is the one with λ ≤ d_min, the smallest eigenvalue of H. In the
    eigenbasis this becomes the secular equation Σ b_i²/(d_i − λ)² = c², solved
    by safeguarded Newton iteration. When b vanishes on the d_min eigenspace
    and the secular sum stays below c² (the hard case), λ = d_min and the
    remaining norm is placed along a canonical d_min eigenvector.
    """
    c = problem.norm_c
    if c is None or not c > 0:
        raise ValueError("norm-constrained solve needs a positive norm_c")
    ut = problem.u_tilde1
    h = ut.T @ ut
    d, q = symmetric_eig_ascending(h)
    b = q.T @ (ut.T @ problem.u_star)
    scale = max(abs(d[-1]), float(np.max(np.abs(b))), 1e-300)
    tol = 1e-12 * scale
    near_min = np.abs(d - d[0]) <= tol
    b2 = b * b
    if np.all(np.abs(b[near_min]) <= tol):
        # hard case candidate: evaluate the secular sum at λ = d_min
        rest = ~near_min
        w = np.zeros_like(b)
        w[rest] = b[rest] / (d[rest] - d[0])
        filled = float(np.sum(w ** 2))
        if filled <= c * c:
            # fill the remaining norm along a sign-canonical d_min eigenvector
            e = _canonical_sign(q[:, np.flatnonzero(near_min)[0]])
            u = q[:, rest] @ w[rest] + math.sqrt(c * c - filled) * e
            return u * (c / np.linalg.norm(u))
        b2 = np.where(near_min, 0.0, b2)
    lam = _solve_secular(b2, d, c)
    w = b / (d - lam)
    u = q @ w
    return u * (c / np.linalg.norm(u))


def sphere_scan_oracle(problem: ControlProblem, n_points: int = 1_000_000,
                       seed: int = 0) -> tuple[np.ndarray, float]:
    """Brute-force minimum over a dense set of points on the sphere ‖u‖ = c.

    2-D problems scan ``n_points`` equally spaced angles; higher dimensions use
    a Fibonacci lattice (3-D) or random directions.
    """
    c = problem.norm_c
    dim = problem.u_tilde1.shape[1]
    if dim == 1:
        pts = np.array([[c], [-c]])
    elif dim == 2:
        ang = np.linspace(0.0, 2 * math.pi, n_points, endpoint=False)
        pts = c * np.column_stack([np.cos(ang), np.sin(ang)])
    elif dim == 3:
        i = np.arange(n_points) + 0.5
        phi = np.arccos(1 - 2 * i / n_points)
        theta = math.pi * (1 + 5 ** 0.5) * i
        pts = c * np.column_stack([np.cos(theta) * np.sin(phi),
                                   np.sin(theta) * np.sin(phi), np.cos(phi)])
    else:
        rng = np.random.default_rng(seed)
        pts = rng.standard_normal((n_points, dim))
        pts *= c / np.linalg.norm(pts, axis=1, keepdims=True)
    best = None
    best_val = math.inf
    for start in range(0, pts.shape[0], 200_000):
        block = pts[start:start + 200_000]
        vals = problem.objective(block)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, best = float(vals[k]), block[k]
    return best, best_val
