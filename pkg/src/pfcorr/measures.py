"""Weights, quadrature rules, the epsilon operator and the skew bilinear form.

Sign convention: for a real point ``x`` the epsilon operator is::

    eps f(x) = 1/2 * int f(xi) sgn(xi - x) dkappa(xi)

and for a point ``z`` off the real axis ``eps f(z) = i f(conj z) sgn(Im z)``.
With this orientation ``<f|g> = int (f eps g - g eps f) dkappa`` equals the
de Bruijn double integral ``int int f(l) g(e) sgn(e - l)`` on the real line
plus ``2i int f(b) g(conj b) sgn(Im b) dkappa_2(b)`` off it, and the moment
matrices built from it have a positive Pfaffian.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss
from scipy import optimize, special
from scipy.interpolate import PchipInterpolator

from .errors import ConfigurationError, ConsistencyError, DomainError

HERMITIAN = "hermitian-beta1"
ASYMMETRIC = "real-asymmetric"
CUSTOM = "custom"
KINDS = (HERMITIAN, ASYMMETRIC, CUSTOM)

MIN_NODES = 8
GAUSSIAN_HALF_WIDTH = 10.0  # exp(-50) ~ 2e-22
IMAG_CUTOFF = 1e-18
SQRT2 = np.sqrt(2.0)


def polyval(coeffs, x):
    """Evaluate a polynomial given by ascending coefficients (works for complex x)."""
    return np.polynomial.polynomial.polyval(x, np.asarray(coeffs))


def as_function(f) -> Callable:
    """Callables pass through; coefficient sequences become polynomials."""
    if callable(f):
        return f
    coeffs = np.asarray(f, dtype=float)
    return lambda x: polyval(coeffs, x)


def gaussian_weight(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x)


def ginibre_weight(z):
    """``|exp(-z^2/2)| * sqrt(erfc(sqrt(2) |Im z|))``; on the real axis it is Gaussian."""
    z = np.asarray(z, dtype=complex)
    return np.exp(-0.5 * (z * z).real) * np.sqrt(special.erfc(SQRT2 * np.abs(z.imag)))


def ginibre_weight_squared(z):
    """``w(z) w(conj z)``, evaluated without underflow through ``erfcx``."""
    z = np.asarray(z, dtype=complex)
    y = np.abs(z.imag)
    return np.exp(-(z.real ** 2) - y * y) * special.erfcx(SQRT2 * y)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights; ``weights @ f(nodes)`` approximates the
    integral of ``f`` against the rule's reference density.

    ``exact_degree`` is the polynomial degree integrated exactly. For the
    half-plane rule it refers to the real-part direction only.
    """

    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int

    def __post_init__(self):
        if self.nodes.shape != self.weights.shape:
            raise ConfigurationError("nodes and weights differ in length")
        if not np.all(self.weights > 0):
            raise ConfigurationError("quadrature weights must be positive")

    def __len__(self):
        return self.nodes.size

    def integrate(self, f):
        return self.weights @ f(self.nodes)


@dataclass(frozen=True)
class SpectralPoint:
    """An eigenvalue location: a real number, or the upper-half-plane
    representative of a complex-conjugate pair."""

    tag: str
    value: complex

    def __post_init__(self):
        if self.tag == "real":
            if not np.isfinite(self.value) or np.imag(self.value) != 0:
                raise DomainError(f"real point must be a finite real, got {self.value!r}")
            object.__setattr__(self, "value", float(np.real(self.value)))
        elif self.tag == "complex-pair":
            v = complex(self.value)
            if not (np.isfinite(v.real) and np.isfinite(v.imag)) or v.imag <= 0:
                raise DomainError(f"pair representative needs Im > 0, got {v!r}")
            object.__setattr__(self, "value", v)
        else:
            raise DomainError(f"unknown tag {self.tag!r}")

    @classmethod
    def real(cls, x: float) -> SpectralPoint:
        return cls("real", x)

    @classmethod
    def pair(cls, z: complex) -> SpectralPoint:
        z = complex(z)
        if z.imag == 0:
            raise DomainError("a conjugate pair cannot sit on the real axis")
        return cls("complex-pair", z if z.imag > 0 else z.conjugate())

    @classmethod
    def from_value(cls, v) -> SpectralPoint:
        v = complex(v)
        return cls.real(v.real) if v.imag == 0 else cls.pair(v)

    @property
    def is_real(self) -> bool:
        return self.tag == "real"


@dataclass(frozen=True, eq=False)
class WeightedMeasure:
    """A weight on the real line and optionally on the open upper half-plane.

    ``real_rule`` integrates against ``real_weight``; ``complex_rule``
    integrates over the upper half-plane against ``complex_weight**2``.
    ``edges`` splits the truncated real support into panels used for
    partial (half-line) integrals, which the epsilon operator needs.
    """

    kind: str
    real_weight: Callable
    real_rule: QuadratureRule
    edges: np.ndarray
    panel_order: int = 24
    complex_weight: Callable | None = None
    complex_weight_squared: Callable | None = None
    complex_rule: QuadratureRule | None = None
    _gl: tuple = field(init=False, repr=False)

    def __post_init__(self):
        t, w = leggauss(self.panel_order)
        object.__setattr__(self, "_gl", ((t + 1.0) / 2.0, w / 2.0))

    @property
    def has_complex(self) -> bool:
        return self.complex_rule is not None

    def _weighted(self, f, x):
        return f(x) * self.real_weight(x)

    def panel_integrals(self, f) -> np.ndarray:
        t, wt = self._gl
        a, b = self.edges[:-1], self.edges[1:]
        nodes = a[:, None] + (b - a)[:, None] * t
        return (self._weighted(f, nodes) * wt).sum(axis=1) * (b - a)

    def upper_integral(self, f, x):
        """``int_x^inf f w dmu`` for an array of real ``x``."""
        t, wt = self._gl
        e = self.edges
        npan = e.size - 1
        panels = self.panel_integrals(f)
        tail = np.append(np.cumsum(panels[::-1])[::-1], 0.0)
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, e[0], e[-1])
        idx = np.clip(np.searchsorted(e, xc, side="right") - 1, 0, npan - 1)
        length = e[idx + 1] - xc
        nodes = xc[..., None] + length[..., None] * t
        partial = (self._weighted(f, nodes) * wt).sum(axis=-1) * length
        return partial + tail[idx + 1]

    def real_total(self, f):
        return self.panel_integrals(f).sum()


def epsilon_real(f, x, m: WeightedMeasure):
    """Vectorised real branch: ``1/2 int f(xi) sgn(xi - x) w(xi) dxi``."""
    f = as_function(f)
    return m.upper_integral(f, x) - 0.5 * m.real_total(f)


def epsilon_complex(f, z):
    """Vectorised off-axis branch: ``i f(conj z) sgn(Im z)``."""
    f = as_function(f)
    z = np.asarray(z, dtype=complex)
    return 1j * f(np.conj(z)) * np.sign(z.imag)


def epsilon(f, p: SpectralPoint, m: WeightedMeasure) -> complex:
    if not isinstance(p, SpectralPoint):
        p = SpectralPoint.from_value(p)
    if p.is_real:
        return complex(epsilon_real(f, p.value, m))
    return complex(epsilon_complex(f, p.value))


def skew_form(f, g, m: WeightedMeasure) -> float:
    """``<f|g> = int (f eps g - g eps f) dkappa`` over every component of ``m``.

    The off-axis contribution is summed over upper-half-plane nodes and
    doubled; the lower half contributes the same amount by conjugation
    symmetry of the weight.
    """
    f, g = as_function(f), as_function(g)
    x, wx = m.real_rule.nodes, m.real_rule.weights
    fg = wx @ (f(x) * epsilon_real(g, x, m))
    gf = wx @ (g(x) * epsilon_real(f, x, m))
    if m.has_complex:
        z, wz = m.complex_rule.nodes, m.complex_rule.weights
        fg = fg + 2.0 * (wz @ (f(z) * epsilon_complex(g, z)))
        gf = gf + 2.0 * (wz @ (g(z) * epsilon_complex(f, z)))
    value = fg - gf
    im = np.imag(value)
    if abs(im) > 1e-9 * max(abs(value), 1e-300) and abs(im) > 1e-14:
        raise ConsistencyError(f"skew form has imaginary residue {im:.3e}")
    return float(np.real(value))


def _gaussian_real_rule(n: int) -> QuadratureRule:
    x, w = hermegauss(n)
    return QuadratureRule(x, w, 2 * n - 1)


def imag_truncation(threshold: float = IMAG_CUTOFF) -> float:
    """Height above which ``exp(y^2) erfc(sqrt(2) y)`` drops below ``threshold``."""
    def h(y):
        return np.log(special.erfcx(SQRT2 * y)) - y * y - np.log(threshold)

    return float(optimize.brentq(h, 0.0, 50.0))


def half_plane_rule(nx: int, ny: int, height: float | None = None) -> QuadratureRule:
    """Product rule on the upper half-plane against ``ginibre_weight_squared``.

    Gauss-Hermite in the real part (exact for polynomials times exp(-x^2))
    and Gauss-Legendre on ``[0, height]`` in the imaginary part.
    """
    height = imag_truncation() if height is None else height
    xr, wr = hermgauss(nx)
    ty, wy = leggauss(ny)
    y = 0.5 * height * (ty + 1.0)
    wy = 0.5 * height * wy * np.exp(-y * y) * special.erfcx(SQRT2 * y)
    z = (xr[:, None] + 1j * y[None, :]).ravel()
    w = (wr[:, None] * wy[None, :]).ravel()
    return QuadratureRule(z, w, 2 * nx - 1)


def _gaussian_edges():
    return np.linspace(-GAUSSIAN_HALF_WIDTH, GAUSSIAN_HALF_WIDTH, 11)


def build_measure(kind: str = HERMITIAN, n_real_nodes: int = 80, n_complex_nodes=(48, 32),
                  table=None) -> WeightedMeasure:
    """Construct one of the supported measures.

    ``n_complex_nodes`` is an ``(n_re, n_im)`` pair or a single count used
    for both directions. ``custom`` needs ``table``, an ``(x, w)`` pair of
    arrays (see ``load_custom_table``).
    """
    if kind not in KINDS:
        raise ConfigurationError(f"unsupported measure kind {kind!r}")
    if n_real_nodes < MIN_NODES:
        raise ConfigurationError(f"need at least {MIN_NODES} real nodes, got {n_real_nodes}")
    if kind == HERMITIAN:
        return WeightedMeasure(HERMITIAN, gaussian_weight, _gaussian_real_rule(n_real_nodes),
                               _gaussian_edges())
    if kind == ASYMMETRIC:
        nx, ny = (n_complex_nodes, n_complex_nodes) if np.isscalar(n_complex_nodes) else n_complex_nodes
        if min(nx, ny) < MIN_NODES:
            raise ConfigurationError(f"need at least {MIN_NODES} complex nodes per direction")
        return WeightedMeasure(ASYMMETRIC, gaussian_weight, _gaussian_real_rule(n_real_nodes),
                               _gaussian_edges(), complex_weight=ginibre_weight,
                               complex_weight_squared=ginibre_weight_squared,
                               complex_rule=half_plane_rule(int(nx), int(ny)))
    if table is None:
        raise ConfigurationError("custom measure needs a tabulated weight")
    return _custom_measure(*table, n_real_nodes=n_real_nodes)


def _custom_measure(xs, ws, n_real_nodes: int) -> WeightedMeasure:
    xs = np.asarray(xs, dtype=float)
    ws = np.asarray(ws, dtype=float)
    if xs.size < 4 or np.any(np.diff(xs) <= 0) or np.any(ws < 0):
        raise ConfigurationError("custom weight needs >= 4 rows, increasing x and w >= 0")
    spline = PchipInterpolator(xs, ws, extrapolate=False)

    def weight(x):
        v = spline(np.asarray(x, dtype=float))
        return np.where(np.isnan(v), 0.0, np.maximum(v, 0.0))

    order = max(MIN_NODES, -(-n_real_nodes // (xs.size - 1)))
    t, wt = leggauss(order)
    a, b = xs[:-1, None], xs[1:, None]
    nodes = (a + (b - a) * (t + 1) / 2).ravel()
    weights = ((b - a) / 2 * wt).ravel() * weight(nodes)
    keep = weights > 0
    # piecewise cubic density times a degree-k polynomial is exact when k + 3 <= 2*order - 1
    rule = QuadratureRule(nodes[keep], weights[keep], 2 * order - 4)
    return WeightedMeasure(CUSTOM, weight, rule, xs.copy(), panel_order=order)


def load_custom_table(path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``x w`` rows (whitespace or comma separated, ``#`` comments)."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].replace(",", " ").strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ConfigurationError(f"{path}:{lineno}: expected 'x w', got {line!r}")
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise ConfigurationError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ConfigurationError(f"{path}: no data rows")
    data = np.array(rows)
    return data[:, 0], data[:, 1]
