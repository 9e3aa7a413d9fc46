from pathlib import Path

import numpy as np
import pytest

from slownav.bundle import ModelBundle, config_hash, load_bundle, make_provenance, save_bundle
from slownav.config import ConfigError, config_from_dict, dump_config, load_config
from slownav.envsim import RandomWalkConfig, make_preset, random_walk
from slownav.experiments import default_config, experiment_names
from slownav.navigator import RoomPlant
from slownav.pipeline import train_models
from slownav.sfa import sfa_extract


@pytest.fixture(scope="module")
def trained():
    env = make_preset("two_rooms")
    plant = RoomPlant(env)
    pos, u = random_walk(env, RandomWalkConfig(5000, 0.02, 1))
    raw = plant.sense_batch(pos)
    return raw, train_models(raw, u, "monomial", 2, 4)


@pytest.mark.parametrize("full", [False, True])
def test_bundle_round_trip(tmp_path, full):
    env = make_preset("single_room")
    plant = RoomPlant(env)
    pos, u = random_walk(env, RandomWalkConfig(3000, 0.02, 2))
    raw = plant.sense_batch(pos)
    models = train_models(raw, u, "legendre", 3, 3, full_pfax=full)
    bundle = ModelBundle(models, {"kind": "room", "preset": "single_room"},
                         make_provenance({"a": 1}, 2))
    a, b = tmp_path / "a.bundle", tmp_path / "b.bundle"
    save_bundle(bundle, a)
    loaded = load_bundle(a)
    save_bundle(loaded, b)
    assert a.read_bytes() == b.read_bytes()
    np.testing.assert_allclose(sfa_extract(loaded.models.sfa, raw[:200]),
                               sfa_extract(models.sfa, raw[:200]), atol=1e-12)
    np.testing.assert_array_equal(loaded.models.pfax.B, models.pfax.B)
    np.testing.assert_array_equal(loaded.models.pfax.U, models.pfax.U)
    assert loaded.models.pfax.proxy_mode == (not full)
    assert loaded.plant == bundle.plant and loaded.provenance == bundle.provenance


def test_bundle_rejects_garbage(tmp_path, trained):
    bad = tmp_path / "bad.bundle"
    bad.write_bytes(b"not a zip")
    with pytest.raises(ValueError):
        load_bundle(bad)
    with pytest.raises(OSError):
        load_bundle(tmp_path / "missing.bundle")


def test_save_is_deterministic(tmp_path, trained):
    _, models = trained
    bundle = ModelBundle(models, {"kind": "room", "preset": "two_rooms"}, make_provenance(None, 0))
    save_bundle(bundle, tmp_path / "1.bundle")
    save_bundle(bundle, tmp_path / "2.bundle")
    assert (tmp_path / "1.bundle").read_bytes() == (tmp_path / "2.bundle").read_bytes()


def test_config_hash_ignores_key_order():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


def test_config_defaults_and_round_trip(tmp_path):
    cfg = config_from_dict({"experiment": "x", "preset": "two_rooms"})
    assert cfg.degree == 5
    path = tmp_path / "c.yaml"
    path.write_text(dump_config(cfg))
    assert load_config(path) == cfg
    assert cfg.with_seed(7).walk.seed == 7


@pytest.mark.parametrize("name", experiment_names())
def test_shipped_configs_match_defaults(name):
    path = Path(__file__).resolve().parents[1] / "experiments" / f"{name}.yaml"
    assert load_config(path) == default_config(name)


@pytest.mark.parametrize("data", [
    {"preset": "maze"},
    {"sensor": "sonar"},
    {"expansion": {"basis": "fourier"}},
    {"expansion": {"degree": 0}},
    {"walk": {"steps": 2}},
    {"walk": {"step_size": -1}},
    {"model": {"r": 2, "R": 3}},
    {"schema_version": 9},
    {"colour": "blue"},
    {"walk": {"stride": 1}},
    {"walk": [1, 2]},
])
def test_config_errors(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_load_config_errors(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text("walk: {steps: [\n")
    with pytest.raises(ConfigError):
        load_config(path)
