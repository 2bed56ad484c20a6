from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfcorr.errors import ConfigurationError, DegeneracyError
from pfcorr.measures import ASYMMETRIC, HERMITIAN, build_measure
from pfcorr.partition import (build_moment_matrices, monomial_basis, moment_matrix, shifted_basis,
                              z_pfaffian)
from pfcorr.pfaffian import pf
from pfcorr.skeworth import (construct_family, family_moments, invert_w, regauge, w_from_family,
                             z_from_rs)

SQRT2PI = np.sqrt(2 * np.pi)
KINDS = [HERMITIAN, ASYMMETRIC]


@pytest.fixture(scope="module", params=KINDS)
def measure(request):
    return build_measure(request.param)


def test_single_polynomial(measure):
    f = construct_family(measure, 1)
    assert f.coeffs[0].tolist() == [1.0]
    assert f.r.size == 0
    assert f.s[0] == pytest.approx(SQRT2PI, rel=1e-13)
    assert z_from_rs(f) == pytest.approx(SQRT2PI, rel=1e-13)


def test_gaussian_three_partition(gauss):
    f = construct_family(gauss, 3)
    assert z_from_rs(f) == pytest.approx(6 * np.sqrt(2) * np.pi, rel=1e-10)


@pytest.mark.parametrize("n", [3, 5, 7])
def test_partition_agrees_with_moments(measure, n):
    f = construct_family(measure, n)
    z = z_pfaffian(build_moment_matrices(measure, monomial_basis(n), n))
    assert z_from_rs(f) == pytest.approx(z, rel=1e-9)


def test_known_gaussian_family(gauss):
    # skew-orthogonal monic family for exp(-x^2/2): q1 = x, q2 = x^2 - 1/2 ... r_0 = 2 sqrt(pi)
    f = construct_family(gauss, 3)
    assert f.r[0] == pytest.approx(2 * np.sqrt(np.pi), rel=1e-13)
    assert np.allclose(f.coeffs[1], [0.0, 1.0], atol=1e-14)


def test_known_ginibre_normalizations(ginibre):
    # r_j = 2 sqrt(2 pi) (2j)! for the real Ginibre weight
    f = construct_family(ginibre, 7)
    expected = 2 * SQRT2PI * np.array([1.0, 2.0, 24.0])
    assert np.allclose(f.r, expected, rtol=1e-10)


@pytest.mark.parametrize("n", [3, 5, 7, 9])
def test_block_structure(measure, n):
    f = construct_family(measure, n)
    w = family_moments(f, measure).entries
    scale = np.abs(w).max()
    assert np.abs(w - w_from_family(f)).max() <= 1e-8 * scale


@pytest.mark.parametrize("n", [1, 3, 5, 7])
def test_inverse(measure, n):
    f = construct_family(measure, n)
    inv = invert_w(f)
    w = w_from_family(f)
    assert np.abs(w.T @ inv.c - np.eye(n + 1)).max() <= 1e-9
    assert inv.shadow_gap <= 1e-9
    assert pf(w) == pytest.approx(f.s[-1] * np.prod(f.r), rel=1e-9)


def test_inverse_two_by_two(gauss):
    f = construct_family(gauss, 1)
    s0 = f.s[0]
    assert np.allclose(invert_w(f).c, [[0, 1 / s0], [-1 / s0, 0]])


def test_zero_normalization_rejected(gauss):
    f = construct_family(gauss, 3)
    with pytest.raises(DegeneracyError):
        invert_w(replace(f, r=np.array([0.0])))
    with pytest.raises(DegeneracyError):
        invert_w(replace(f, s=np.array([1.0, 0.0, 0.0])))


def test_degenerate_weight_rejected():
    # on a support of width 0.03 the second normalization falls ~13 orders below the moments
    from pfcorr.measures import CUSTOM
    m = build_measure(CUSTOM, 16, table=(np.array([0.0, 0.01, 0.02, 0.03]), np.array([0, 1, 1, 0.0])))
    assert construct_family(m, 3).r[0] > 0
    with pytest.raises(DegeneracyError):
        construct_family(m, 5)


def test_even_n_rejected(gauss):
    with pytest.raises(ConfigurationError):
        construct_family(gauss, 4)


@pytest.mark.parametrize("n", [3, 5, 7])
def test_idempotent(measure, n):
    f = construct_family(measure, n)
    g = construct_family(measure, n, basis=f.coeffs)
    for a, b in zip(f.coeffs, g.coeffs):
        assert np.allclose(a, b, atol=1e-10, rtol=0)


def test_gauge_fixed(measure):
    f = construct_family(measure, 7)
    for j in range(f.n_pairs):
        assert abs(f.coeffs[2 * j + 1][2 * j]) < 1e-12


def test_family_from_other_basis(measure):
    f = construct_family(measure, 5)
    g = construct_family(measure, 5, basis=shifted_basis(5, -0.6))
    for a, b in zip(f.coeffs, g.coeffs):
        assert np.allclose(a, b, atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(KINDS), st.integers(0, 2), st.floats(-3, 3))
def test_regauge_keeps_skew_orthogonality(kind, j, alpha):
    m = build_measure(kind)
    f = construct_family(m, 7)
    g = regauge(f, m, j, alpha)
    w = family_moments(g, m).entries
    scale = np.abs(w).max()
    assert np.abs(w - w_from_family(g)).max() <= 1e-8 * scale
    assert np.allclose(g.r, f.r, rtol=1e-10)
    assert z_from_rs(g) == pytest.approx(z_from_rs(f), rel=1e-9)


def test_moment_matrix_in_family_basis_is_block_diagonal(gauss):
    f = construct_family(gauss, 5)
    u = moment_matrix(gauss, f.coeffs)
    mask = np.ones_like(u, dtype=bool)
    for j in range(2):
        mask[2 * j, 2 * j + 1] = mask[2 * j + 1, 2 * j] = False
    assert np.abs(u[mask]).max() < 1e-12 * np.abs(u).max()
