import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ortho_group, spearmanr

from slownav.envsim import interval_walk_1d
from slownav.numeric import ExpansionSpec, apply_sphering, expand, fit_sphering
from slownav.sfa import (
    HarmonicReference,
    chebyshev_compose,
    constraint_report,
    fit_sfa,
    harmonic_eval,
    sfa_extract,
    sfa_extract_chunked,
    train_sfa,
)


def _two_cosines(n=100_000):
    t = np.arange(n)
    slow = np.cos(2 * np.pi * t / 1000)
    fast = np.cos(2 * np.pi * t / 50)
    mix = np.column_stack([slow + fast, slow - 0.5 * fast])
    return slow, apply_sphering(fit_sphering(mix), mix)


def test_slowest_output_is_slow_cosine():
    slow, z = _two_cosines()
    model = train_sfa(z, 2)
    y = z @ model.extraction
    assert abs(np.corrcoef(y[:, 0], slow)[0, 1]) >= 0.999
    assert np.all(np.diff(model.delta_values) >= 0)


def test_empirical_delta_matches():
    rng = np.random.default_rng(0)
    x = np.cumsum(rng.standard_normal((5000, 4)), axis=0) + rng.standard_normal((5000, 4))
    z = apply_sphering(fit_sphering(x), x)
    model = train_sfa(z, 3)
    y = z @ model.extraction
    emp = np.mean(np.diff(y, axis=0) ** 2, axis=0)
    np.testing.assert_allclose(emp, model.delta_values, rtol=1e-6)


def test_rotation_invariance_of_delta_values():
    rng = np.random.default_rng(1)
    x = np.cumsum(rng.standard_normal((3000, 5)), axis=0)
    z = apply_sphering(fit_sphering(x), x)
    q = ortho_group.rvs(5, random_state=2)
    a = train_sfa(z, 5).delta_values
    b = train_sfa(z @ q, 5).delta_values
    np.testing.assert_allclose(a, b, rtol=1e-8, atol=1e-14)


def test_train_sfa_errors():
    z = np.random.default_rng(0).standard_normal((50, 3))
    with pytest.raises(ValueError):
        train_sfa(z, 4)
    with pytest.raises(ValueError):
        train_sfa(z[:4], 1)


def test_sign_convention_positive_early_trend():
    x = interval_walk_1d(20_000, seed=3)
    model = fit_sfa(x, ExpansionSpec.fit("monomial", 3, x), 3)
    y = sfa_extract_chunked(model, x)
    early = y[: 2000]
    t = np.arange(2000) - 999.5
    assert np.all(t @ (early - early.mean(axis=0)) > 0)


def test_fit_sfa_matches_dense_pipeline():
    x = interval_walk_1d(20_000, seed=1)
    spec = ExpansionSpec.fit("monomial", 4, x)
    model = fit_sfa(x, spec, 3)
    h = expand(x, spec)
    z = apply_sphering(fit_sphering(h), h)
    dense = train_sfa(z, 3)
    y1 = sfa_extract(model, x)
    y2 = z @ dense.extraction
    for i in range(3):
        assert abs(np.corrcoef(y1[:, i], y2[:, i])[0, 1]) > 1 - 1e-8
    np.testing.assert_allclose(model.delta_values, dense.delta_values, rtol=1e-6)


def test_constraint_suite_on_training_output():
    x = interval_walk_1d(50_000, seed=2)
    model = fit_sfa(x, ExpansionSpec.fit("monomial", 6, x), 4)
    rep = constraint_report(sfa_extract_chunked(model, x))
    assert rep["max_abs_mean"] <= 1e-8
    assert rep["max_var_error"] <= 1e-6
    assert rep["max_abs_corr"] <= 1e-6
    a = model.extraction
    assert np.linalg.norm(a.T @ a - np.eye(4)) <= 1e-8


def test_legendre_and_monomial_agree():
    x = interval_walk_1d(50_000, seed=4)
    mono = fit_sfa(x, ExpansionSpec.fit("monomial", 5, x), 3)
    leg = fit_sfa(x, ExpansionSpec.fit("legendre", 5, x), 3)
    y1, y2 = sfa_extract(mono, x), sfa_extract(leg, x)
    for i in range(3):
        assert abs(np.corrcoef(y1[:, i], y2[:, i])[0, 1]) >= 0.999


def test_extract_single_point_and_series_agree():
    rng = np.random.default_rng(5)
    x = np.cumsum(rng.standard_normal((3000, 2)), axis=0)
    model = fit_sfa(x, ExpansionSpec.fit("monomial", 2, x), 3)
    series = sfa_extract(model, x[:5])
    np.testing.assert_allclose(sfa_extract(model, x[3]), series[3], atol=1e-12)
    np.testing.assert_array_equal(sfa_extract(model, x[3]), sfa_extract(model, x[3]))
    with pytest.raises(ValueError):
        sfa_extract(model, np.zeros((2, 3)))


def test_harmonic_examples():
    cos1 = HarmonicReference("uniform_cosine", 1, 100.0)
    cos2 = HarmonicReference("uniform_cosine", 2, 100.0)
    assert harmonic_eval(cos1, 0.0) == pytest.approx(math.sqrt(2))
    assert harmonic_eval(cos2, 100.0) == pytest.approx(math.sqrt(2))
    with pytest.raises(ValueError):
        harmonic_eval(cos1, 101.0)
    with pytest.raises(ValueError):
        HarmonicReference("uniform_cosine", 1)


@given(st.floats(-5, 5))
def test_hermite_first_is_identity(s):
    assert harmonic_eval(HarmonicReference("hermite", 1), s) == pytest.approx(s, abs=1e-12)


def test_hermite_orthonormal_under_gaussian():
    nodes, weights = np.polynomial.hermite_e.hermegauss(40)
    weights = weights / weights.sum()
    vals = np.array([harmonic_eval(HarmonicReference("hermite", i), nodes) for i in range(1, 5)])
    np.testing.assert_allclose((vals * weights) @ vals.T, np.eye(4), atol=1e-10)


def test_chebyshev_examples():
    g = np.linspace(-1.4, 1.4, 9)
    np.testing.assert_allclose(chebyshev_compose(1, g), g)
    assert chebyshev_compose(2, math.sqrt(2)) / math.sqrt(2) == pytest.approx(1.0)


@settings(max_examples=50)
@given(st.integers(1, 6), st.floats(0, 100))
def test_chebyshev_relation_on_ideal_harmonics(i, s):
    g1 = harmonic_eval(HarmonicReference("uniform_cosine", 1, 100.0), s)
    gi = harmonic_eval(HarmonicReference("uniform_cosine", i, 100.0), s)
    assert chebyshev_compose(i, g1) == pytest.approx(gi, abs=1e-9)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_first_component_monotone_on_interval_walks(seed):
    # the slowest feature of a 1-D source is a monotonic signal of it; the
    # short interval keeps the walk well mixed (about a dozen crossings)
    x = interval_walk_1d(60_000, length=20.0, seed=seed)
    model = fit_sfa(x, ExpansionSpec.fit("monomial", 4, x), 1)
    y = sfa_extract(model, x[::10])[:, 0]
    assert abs(spearmanr(y, x[::10, 0])[0]) >= 0.99
