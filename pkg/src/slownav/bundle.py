"""Serialized model bundles.

A bundle is a zip archive holding ``manifest.json`` (scalars, expansion spec,
provenance) and one ``.npy`` member per array. Members are written in a fixed
order with a fixed timestamp and no compression, so saving the same bundle
twice gives identical bytes.
"""
from __future__ import annotations

import hashlib
import io
import json
import zipfile
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .navigator import Models
from .numeric import ExpansionSpec, SpheringTransform
from .pfax import PfaxModel
from .sfa import SfaModel

BUNDLE_SCHEMA = 1
_EPOCH = (1980, 1, 1, 0, 0, 0)


@dataclass(frozen=True)
class ModelBundle:
    """Trained models plus the facts needed to reuse them.

    ``plant`` describes the sensed system (e.g. ``{"kind": "room",
    "preset": "two_rooms", "sensor": "wall", "drop_last": true}``);
    ``provenance`` holds the config hash, seed and package version.
    """

    models: Models
    plant: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)


def config_hash(config: dict) -> str:
    """SHA-256 of the canonical JSON form of ``config``."""
    text = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def make_provenance(config: Optional[dict], seed: Optional[int]) -> dict:
    return {
        "config_hash": config_hash(config or {}),
        "seed": seed,
        "version": __version__,
    }


def _npy_bytes(a: np.ndarray) -> bytes:
    buf = io.BytesIO()
    np.save(buf, np.ascontiguousarray(a), allow_pickle=False)
    return buf.getvalue()


def _write_member(zf: zipfile.ZipFile, name: str, data: bytes) -> None:
    info = zipfile.ZipInfo(name, date_time=_EPOCH)
    info.compress_type = zipfile.ZIP_STORED
    info.external_attr = 0o644 << 16
    zf.writestr(info, data)


def save_bundle(bundle: ModelBundle, path) -> None:
    sfa, pfax = bundle.models.sfa, bundle.models.pfax
    arrays = {
        "sfa_extraction": sfa.extraction,
        "sfa_delta": sfa.delta_values,
        "pfax_extraction": pfax.extraction,
        "pfax_B": pfax.B,
        "pfax_U": pfax.U,
        "pfax_eigenvalues": pfax.pfa_eigenvalues,
    }
    if sfa.sphering is not None:
        arrays["sphering_mean"] = sfa.sphering.mean
        arrays["sphering_whitener"] = sfa.sphering.whitener
    if pfax.V is not None:
        arrays["pfax_V"] = pfax.V
    manifest = {
        "schema": BUNDLE_SCHEMA,
        "expansion": None if sfa.expansion is None else sfa.expansion.to_dict(),
        "pfax": {"p": pfax.p, "q": pfax.q, "proxy_mode": pfax.proxy_mode,
                 "horizon": pfax.horizon},
        "plant": bundle.plant,
        "provenance": bundle.provenance,
        "arrays": sorted(arrays),
    }
    with zipfile.ZipFile(path, "w") as zf:
        _write_member(zf, "manifest.json",
                      json.dumps(manifest, sort_keys=True, indent=1).encode())
        for name in sorted(arrays):
            _write_member(zf, f"{name}.npy", _npy_bytes(np.asarray(arrays[name], dtype=float)))


def load_bundle(path) -> ModelBundle:
    try:
        with zipfile.ZipFile(path) as zf:
            manifest = json.loads(zf.read("manifest.json"))
            if manifest.get("schema") != BUNDLE_SCHEMA:
                raise ValueError(f"unsupported bundle schema {manifest.get('schema')!r}")
            arr = {name: np.load(io.BytesIO(zf.read(f"{name}.npy")), allow_pickle=False)
                   for name in manifest["arrays"]}
    except (zipfile.BadZipFile, KeyError) as exc:
        raise ValueError(f"{path}: not a model bundle ({exc})") from exc
    exp = manifest["expansion"]
    expansion = None if exp is None else ExpansionSpec.from_dict(exp)
    sphering = None
    if "sphering_mean" in arr:
        sphering = SpheringTransform(arr["sphering_mean"], arr["sphering_whitener"])
    sfa = SfaModel(sphering, expansion, arr["sfa_extraction"], arr["sfa_delta"])
    pm = manifest["pfax"]
    pfax = PfaxModel(arr["pfax_extraction"], arr["pfax_B"], arr["pfax_U"], int(pm["p"]),
                     int(pm["q"]), arr["pfax_eigenvalues"], bool(pm["proxy_mode"]),
                     arr.get("pfax_V"), int(pm["horizon"]))
    return ModelBundle(Models(sfa, pfax), manifest["plant"], manifest["provenance"])
