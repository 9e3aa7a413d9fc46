"""Exploration-to-model training: expand, sphere, SFA, then the PFAx predictor."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .navigator import Models
from .numeric import ExpansionSpec, LaggedEmbedding, apply_sphering, as_series, expand, lag_embed
from .pfax import proxy_from_sfa, train_pfax
from .sfa import fit_sfa, sfa_extract_chunked


@dataclass(frozen=True)
class TrainingRun:
    """Trained models with the training features and the predictor's embedding."""

    models: Models
    features: np.ndarray
    embedding: LaggedEmbedding


def train_models(raw, controls, basis: str = "monomial", degree: int = 2, r: int = 12,
                 p: int = 1, q: int = 1, *, rescale: bool = True,
                 full_pfax: bool = False,
                 expansion: Optional[ExpansionSpec] = None) -> Models:
    """Train SFA on ``raw`` and fit the control predictor; see :func:`run_training`."""
    return run_training(raw, controls, basis, degree, r, p, q, rescale=rescale,
                        full_pfax=full_pfax, expansion=expansion).models


def run_training(raw, controls, basis: str = "monomial", degree: int = 2, r: int = 12,
                 p: int = 1, q: int = 1, *, rescale: bool = True,
                 full_pfax: bool = False,
                 expansion: Optional[ExpansionSpec] = None) -> TrainingRun:
    """Train SFA on ``raw`` and fit the control predictor.

    ``controls[t]`` is the control that moved state t to state t+1. With
    ``rescale`` each raw coordinate is mapped to [-1, 1] by its training
    range before expansion (required for Legendre, optional for monomials).
    ``full_pfax`` replaces the SFA-proxy predictor with a PFAx extraction on
    the sphered signal, which needs the whole expanded series in memory.
    """
    raw = as_series(raw, name="sensor series", min_len=3)
    controls = as_series(controls, name="control series")
    if controls.shape[0] != raw.shape[0]:
        raise ValueError("sensor and control series must have equal length")
    if expansion is None:
        if rescale or basis == "legendre":
            expansion = ExpansionSpec.fit(basis, degree, raw)
        else:
            expansion = ExpansionSpec(basis, degree, raw.shape[1])
    sfa = fit_sfa(raw, expansion, r)
    feats = sfa_extract_chunked(sfa, raw)
    if full_pfax:
        z = apply_sphering(sfa.sphering, expand(raw, expansion))
        emb = lag_embed(z, controls, p, q)
        pfax = train_pfax(z, emb, r)
    else:
        emb = lag_embed(feats, controls, p, q)
        pfax = proxy_from_sfa(sfa, emb)
    return TrainingRun(Models(sfa, pfax), feats, emb)

