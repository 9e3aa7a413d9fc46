import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from slownav.numeric import (
    ExpansionSpec,
    NumericError,
    apply_sphering,
    as_series,
    clamp_count,
    expand,
    expanded_dim,
    expanded_moments,
    fit_sphering,
    lag_embed,
    multi_indices,
    read_series_csv,
    reset_clamp_count,
    symmetric_eig_ascending,
    thresholded_pseudo_inverse,
    write_series_csv,
)


def test_monomial_1d_degree2():
    out = expand([[2.0]], ExpansionSpec("monomial", 2, 1))
    np.testing.assert_array_equal(out, [[2.0, 4.0]])


def test_legendre_at_zero():
    spec = ExpansionSpec("legendre", 2, 1, (-1.0,), (1.0,))
    np.testing.assert_allclose(expand([[0.0]], spec), [[0.0, -0.5]])


def test_monomial_2d_order():
    out = expand([[2.0, 3.0]], ExpansionSpec("monomial", 2, 2))
    np.testing.assert_array_equal(out, [[2.0, 3.0, 4.0, 6.0, 9.0]])


def test_legendre_products_match_numpy():
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, (50, 3))
    spec = ExpansionSpec("legendre", 4, 3, (-1.0,) * 3, (1.0,) * 3)
    out = expand(x, spec)
    for col, idx in enumerate(multi_indices(3, 4)):
        expected = np.ones(50)
        for k in range(3):
            deg = idx.count(k)
            expected *= np.polynomial.legendre.legval(x[:, k], [0] * deg + [1])
        np.testing.assert_allclose(out[:, col], expected, atol=1e-12)


@given(st.integers(1, 5), st.integers(1, 6))
def test_expanded_dim_counts_multi_indices(n, d):
    assert expanded_dim(n, d) == math.comb(n + d, d) - 1
    idx = multi_indices(n, d)
    assert len(idx) == expanded_dim(n, d)
    # graded: degrees never decrease
    assert all(len(a) <= len(b) for a, b in zip(idx, idx[1:]))


def test_expand_errors():
    with pytest.raises(ValueError):
        ExpansionSpec("monomial", 0, 1)
    with pytest.raises(ValueError):
        ExpansionSpec("legendre", 3, 1)
    with pytest.raises(ValueError):
        expand([[1.0, 2.0]], ExpansionSpec("monomial", 2, 1))
    with pytest.raises(ValueError):
        as_series([[np.nan]])


def test_legendre_clamps_and_counts():
    spec = ExpansionSpec("legendre", 3, 1, (0.0,), (1.0,))
    reset_clamp_count()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out = expand([[2.0], [0.5]], spec)
    assert clamp_count() == 1
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)
    np.testing.assert_allclose(out[0], expand([[1.0]], spec)[0])


def test_sphering_constant_series_rejected():
    with pytest.raises(NumericError, match="zero variance"):
        fit_sphering(np.ones((20, 2)))


def test_sphering_identity_input():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((4000, 3))
    x -= x.mean(axis=0)
    w, v = np.linalg.eigh(x.T @ x / x.shape[0])
    x = x @ v @ np.diag(w ** -0.5) @ v.T
    s = fit_sphering(x)
    assert np.linalg.norm(s.whitener - np.eye(3)) <= 1e-8


def test_sphering_diag_cov():
    # four points with zero mean and covariance diag(4, 1)
    x = np.array([[2.0, 1.0], [-2.0, -1.0], [2.0, -1.0], [-2.0, 1.0]])
    s = fit_sphering(x)
    np.testing.assert_allclose(s.whitener, np.diag([0.5, 1.0]), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(arrays(float, (60, 3), elements=st.floats(-10, 10)))
def test_sphering_training_statistics(x):
    c = np.cov(x, rowvar=False, bias=True)
    w = np.linalg.eigvalsh(c)
    if w[-1] <= 1e-6 or w[0] <= 1e-3 * w[-1]:
        return
    s = fit_sphering(x)
    z = apply_sphering(s, x)
    assert np.max(np.abs(z.mean(axis=0))) <= 1e-10
    assert np.linalg.norm(z.T @ z / z.shape[0] - np.eye(3)) <= 1e-8
    np.testing.assert_allclose(s.whitener, s.whitener.T)
    assert np.all(np.linalg.eigvalsh(s.whitener) >= -1e-12)


def test_apply_sphering_affine():
    rng = np.random.default_rng(2)
    s = fit_sphering(rng.standard_normal((200, 3)) * [1, 2, 3])
    np.testing.assert_allclose(apply_sphering(s, s.mean), 0.0, atol=1e-14)
    a, b = rng.standard_normal(3), rng.standard_normal(3)
    np.testing.assert_allclose(apply_sphering(s, a) - apply_sphering(s, b),
                               s.whitener @ (a - b), atol=1e-12)
    with pytest.raises(ValueError):
        apply_sphering(s, np.zeros(4))


def test_pinv_threshold():
    np.testing.assert_allclose(thresholded_pseudo_inverse(np.diag([2.0, 1e-12]), 1e-8),
                               np.diag([0.5, 0.0]))
    np.testing.assert_allclose(thresholded_pseudo_inverse(np.eye(3)), np.eye(3))
    np.testing.assert_array_equal(thresholded_pseudo_inverse(np.zeros((2, 2))), np.zeros((2, 2)))


@settings(max_examples=30, deadline=None)
@given(arrays(float, (3, 3), elements=st.floats(-3, 3)))
def test_pinv_spd_properties(a):
    m = a @ a.T + 0.1 * np.eye(3)
    p = thresholded_pseudo_inverse(m)
    assert np.linalg.norm(m @ p @ m - m) <= 1e-10 * max(1.0, np.linalg.norm(m))
    np.testing.assert_allclose(p, np.linalg.inv(m), rtol=1e-8, atol=1e-10)
    np.testing.assert_array_equal(p, p.T)


def test_eig_ascending():
    w, v = symmetric_eig_ascending(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(w, [1, 2, 3])
    with pytest.raises(ValueError):
        symmetric_eig_ascending(np.array([[np.inf, 0], [0, 1]]))


@settings(max_examples=30, deadline=None)
@given(arrays(float, (4, 4), elements=st.floats(-5, 5)))
def test_eig_reconstruction(a):
    m = a + a.T
    w, v = symmetric_eig_ascending(m)
    assert np.all(np.diff(w) >= 0)
    assert np.linalg.norm(v.T @ v - np.eye(4)) <= 1e-10
    assert np.linalg.norm(v @ np.diag(w) @ v.T - m) <= 1e-10 * max(1, np.linalg.norm(m))


def test_lag_embed_examples():
    z = np.array([[1.0], [2.0], [3.0], [4.0]])
    emb = lag_embed(z, np.zeros((4, 1)), p=2, q=1)
    # rows for 1-based t = 3, 4
    np.testing.assert_array_equal(emb.zeta, [[2, 1], [3, 2]])
    np.testing.assert_array_equal(emb.target, [[3], [4]])
    assert len(emb) == 4 - 2
    emb1 = lag_embed(z, np.zeros((4, 1)), p=1, q=1)
    np.testing.assert_array_equal(emb1.zeta, z[:-1])
    with pytest.raises(ValueError):
        lag_embed(z[:2], np.zeros((2, 1)), p=2, q=1)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(8, 20))
def test_lag_embed_invertible(p, q, n):
    rng = np.random.default_rng(n)
    z = rng.standard_normal((n, 2))
    u = rng.standard_normal((n, 3))
    emb = lag_embed(z, u, p, q)
    assert emb.zeta.shape == (n - max(p, q), 2 * p)
    assert emb.mu.shape == (n - max(p, q), 3 * q)
    # the first block of zeta(t+1) is z(t)
    np.testing.assert_array_equal(emb.zeta[1:, :2], emb.target[:-1])


def test_streamed_moments_match_dense():
    rng = np.random.default_rng(3)
    x = np.cumsum(rng.standard_normal((1000, 2)), axis=0)
    spec = ExpansionSpec.fit("monomial", 3, x)
    mom = expanded_moments(x, spec, chunk=97)
    h = expand(x, spec)
    np.testing.assert_allclose(mom.mean, h.mean(axis=0), atol=1e-12)
    np.testing.assert_allclose(mom.cov, np.cov(h, rowvar=False, bias=True), atol=1e-12)
    d = np.diff(h, axis=0)
    np.testing.assert_allclose(mom.dcov, d.T @ d / d.shape[0], atol=1e-12)


def test_series_csv_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    x = rng.standard_normal((10, 3))
    path = tmp_path / "s.csv"
    write_series_csv(path, x)
    assert path.read_text().splitlines()[0] == "t,c0,c1,c2"
    np.testing.assert_array_equal(read_series_csv(path), x)


def test_expansion_spec_dict_round_trip():
    spec = ExpansionSpec("legendre", 5, 2, (0.0, -1.0), (1.0, 2.0))
    assert ExpansionSpec.from_dict(spec.to_dict()) == spec
