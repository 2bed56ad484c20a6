import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial.legendre import leggauss
from scipy import special

from pfcorr import _quad
from pfcorr.errors import ConfigurationError, DomainError
from pfcorr.measures import (ASYMMETRIC, CUSTOM, HERMITIAN, SpectralPoint, build_measure, epsilon,
                             epsilon_real, ginibre_weight, ginibre_weight_squared, imag_truncation,
                             load_custom_table, polyval, skew_form)

SQRT2PI = np.sqrt(2 * np.pi)
polys = st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=6).map(np.array)


def test_epsilon_of_constant_at_origin(gauss):
    assert abs(epsilon(1.0, SpectralPoint.real(0.0), gauss)) < 1e-14


def test_epsilon_of_constant_far_left_and_right(gauss):
    half_mass = 0.5 * SQRT2PI
    # 1/2 int sgn(xi - p) w: all mass above p far to the left, below it far to the right
    assert epsilon(1.0, SpectralPoint.real(-9.5), gauss).real / half_mass == pytest.approx(1.0, abs=1e-12)
    assert epsilon(1.0, SpectralPoint.real(9.5), gauss).real / half_mass == pytest.approx(-1.0, abs=1e-12)


def test_epsilon_real_matches_erf(gauss):
    x = np.linspace(-4, 4, 17)
    expected = -0.5 * SQRT2PI * special.erf(x / np.sqrt(2))
    assert np.allclose(epsilon_real(np.array([1.0]), x, gauss), expected, atol=1e-13)


def test_epsilon_complex_branch(ginibre):
    z = 1 + 1j
    got = epsilon(ginibre_weight, SpectralPoint.pair(z), ginibre)
    assert got == pytest.approx(1j * ginibre_weight(np.conj(z)), rel=1e-15)


def test_skew_form_constant_and_linear(gauss):
    # int int xi sgn(xi - lam) w(lam) w(xi): the inner integral is 2 exp(-lam^2 / 2)
    assert skew_form(np.array([1.0]), np.array([0.0, 1.0]), gauss) == pytest.approx(2 * np.sqrt(np.pi), rel=1e-13)


def test_skew_form_against_double_quadrature(gauss):
    # brute-force ordered double integral, no epsilon operator involved
    f = lambda x: 1 + x - 0.5 * x**3
    g = lambda x: x**2 - 2 * x
    pts, wts = _quad.ordered_nodes(2, -10, 10, np.linspace(-8, 8, 9), order=30)
    lam, xi = pts[:, 0], pts[:, 1]
    w = gauss.real_weight(lam) * gauss.real_weight(xi)
    brute = wts @ ((f(lam) * g(xi) - f(xi) * g(lam)) * w)
    assert skew_form(f, g, gauss) == pytest.approx(brute, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(polys, polys)
def test_skew_form_antisymmetric(f, g):
    m = build_measure(HERMITIAN)
    assert skew_form(f, g, m) == -skew_form(g, f, m)
    assert skew_form(f, f, m) == 0.0


@settings(max_examples=40, deadline=None)
@given(polys, polys, st.floats(-3, 3), st.floats(-3, 3), st.floats(-4, 4))
def test_epsilon_is_linear(f, g, a, b, x):
    m = build_measure(HERMITIAN)
    n = max(f.size, g.size)
    f, g = np.pad(f, (0, n - f.size)), np.pad(g, (0, n - g.size))
    p = SpectralPoint.real(x)
    combo = epsilon(a * f + b * g, p, m)
    parts = a * epsilon(f, p, m) + b * epsilon(g, p, m)
    assert abs(combo - parts) <= 1e-12 * max(1.0, abs(parts))


@settings(max_examples=25, deadline=None)
@given(polys, polys)
def test_asymmetric_skew_form_two_term_expression(f, g):
    m = build_measure(ASYMMETRIC)
    pts, wts = _quad.ordered_nodes(2, -10, 10, np.linspace(-8, 8, 9), order=30)
    lam, xi = pts[:, 0], pts[:, 1]
    w = m.real_weight(lam) * m.real_weight(xi)
    real_part = wts @ ((polyval(f, lam) * polyval(g, xi) - polyval(f, xi) * polyval(g, lam)) * w)
    z, wz = _quad.half_plane_grid(ginibre_weight_squared, x_half=8.0, height=6.3, nx=120, ny=80)
    cross = polyval(f, z) * polyval(g, np.conj(z)) - polyval(f, np.conj(z)) * polyval(g, z)
    complex_part = 2j * (wz @ cross)
    expected = real_part + complex_part.real
    assert abs(complex_part.imag) < 1e-10
    assert skew_form(f, g, m) == pytest.approx(expected, rel=1e-8, abs=1e-8)


def test_gaussian_rule_exactness():
    m = build_measure(HERMITIAN, 64)
    for k in range(0, 128):
        got = m.real_rule.integrate(lambda x, k=k: x**k)
        if k % 2:
            # odd moments vanish; compare against the neighbouring even moment's scale
            assert abs(got) <= 1e-10 * special.factorial2(k) * SQRT2PI
        else:
            exact = special.factorial2(k - 1, exact=True) * SQRT2PI if k else SQRT2PI
            assert got == pytest.approx(float(exact), rel=1e-10)


def _trapezoid_half_plane(n, x_half=8.0, height=6.3):
    x = np.linspace(-x_half, x_half, n)
    y = np.linspace(0.0, height, n)
    vals = ginibre_weight_squared(x[:, None] + 1j * y[None, :])
    return np.trapezoid(np.trapezoid(vals, y, axis=1), x)


def test_half_plane_mass_against_dense_trapezoid():
    m = build_measure(ASYMMETRIC, 64, (64, 32))
    got = m.complex_rule.integrate(lambda z: np.ones_like(z))
    # 400 x 400 trapezoid with one Richardson step (the y = 0 edge limits it to h^2)
    ref = (4 * _trapezoid_half_plane(401) - _trapezoid_half_plane(201)) / 3
    assert got.real == pytest.approx(ref, rel=1e-6)


def test_complex_weight_identity():
    z = np.array([0.3 + 0.2j, -1.0 + 2.5j, 2.0 + 0.01j])
    direct = np.exp(-(z**2).real) * special.erfc(np.sqrt(2) * z.imag)
    assert np.allclose(ginibre_weight(z) ** 2, direct, rtol=1e-13)
    assert np.allclose(ginibre_weight_squared(z), direct, rtol=1e-13)


def test_imag_truncation_level():
    y = imag_truncation()
    assert np.exp(y * y) * special.erfc(np.sqrt(2) * y) == pytest.approx(1e-18, rel=1e-8)


def test_build_measure_errors():
    with pytest.raises(ConfigurationError):
        build_measure(HERMITIAN, 4)
    with pytest.raises(ConfigurationError):
        build_measure("complex-ginibre")
    with pytest.raises(ConfigurationError):
        build_measure(ASYMMETRIC, 64, (4, 32))
    with pytest.raises(ConfigurationError):
        build_measure(CUSTOM)


def test_spectral_points():
    assert SpectralPoint.pair(1 - 2j).value == 1 + 2j
    assert SpectralPoint.from_value(0.5).is_real
    with pytest.raises(DomainError):
        SpectralPoint.pair(1.0)
    with pytest.raises(DomainError):
        SpectralPoint("real", 1 + 1j)
    with pytest.raises(DomainError):
        SpectralPoint("complex-pair", 1 - 1j)
    with pytest.raises(DomainError):
        SpectralPoint.real(np.nan)


def _gauss_table(tmp_path, step=0.02):
    xs = np.arange(-9.0, 9.0 + step / 2, step)
    path = tmp_path / "gauss.txt"
    lines = ["# tabulated exp(-x^2/2)", ""] + [f"{x:.6f}, {np.exp(-x * x / 2):.17g}" for x in xs]
    path.write_text("\n".join(lines) + "\n")
    return path


def test_custom_table_reproduces_gaussian_moments(tmp_path):
    m = build_measure(CUSTOM, 200, table=load_custom_table(_gauss_table(tmp_path)))
    assert m.real_total(lambda x: np.ones_like(x)) == pytest.approx(SQRT2PI, rel=1e-6)
    assert m.real_rule.integrate(lambda x: x**2) == pytest.approx(SQRT2PI, rel=1e-6)
    assert skew_form(np.array([1.0]), np.array([0.0, 1.0]), m) == pytest.approx(2 * np.sqrt(np.pi), rel=1e-6)


def test_custom_weight_stays_nonnegative(tmp_path):
    path = tmp_path / "w.txt"
    path.write_text("0 0\n1 1\n2 0\n3 0\n4 5\n5 0\n")
    m = build_measure(CUSTOM, table=load_custom_table(path))
    x = np.linspace(-1, 6, 2001)
    assert np.all(m.real_weight(x) >= 0)
    assert m.real_weight(np.array([-0.5, 5.5])).tolist() == [0.0, 0.0]


@pytest.mark.parametrize("text", ["1 2 3\n", "a b\n", "# only comments\n",
                                  "0 1\n1 1\n1 1\n2 1\n", "0 1\n1 -1\n2 1\n3 1\n"])
def test_custom_table_errors(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(ConfigurationError):
        build_measure(CUSTOM, table=load_custom_table(path))
