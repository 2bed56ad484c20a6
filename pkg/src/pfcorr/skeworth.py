"""Odd-N skew-orthogonal monic families, the block form of W and its inverse.

The family ``q_0..q_{N-1}`` satisfies ``<q_2j|q_2j+1> = r_j`` with every
other skew product among ``q_0..q_{N-2}`` zero, and ``q_{N-1}`` is
skew-orthogonal to everything below it. ``s_n`` is the real-line integral
of ``q_n`` against the weight.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import ConfigurationError, ConsistencyError, DegeneracyError
from .identities import inverse_transpose
from .measures import ASYMMETRIC, WeightedMeasure
from .partition import bordered, border_integrals, check_monic, moment_matrix, monomial_basis
from .pfaffian import SkewMatrix

DEGENERACY_RTOL = 1e-10


@dataclass(frozen=True)
class SkewOrthFamily:
    kind: str
    n: int
    coeffs: tuple
    r: np.ndarray
    s: np.ndarray
    scale: float = 1.0

    @property
    def n_pairs(self) -> int:
        return (self.n - 1) // 2

    def coefficient_matrix(self) -> np.ndarray:
        """Row k holds the ascending monomial coefficients of ``q_k``."""
        out = np.zeros((self.n, self.n))
        for k, c in enumerate(self.coeffs):
            out[k, :c.size] = c
        return out


@dataclass(frozen=True)
class InverseMatrix:
    c: np.ndarray
    shadow_gap: float


def _basis_matrix(basis, n):
    out = np.zeros((n, n))
    for k in range(n):
        c = np.trim_zeros(np.asarray(basis[k], dtype=float), "b")
        out[k, :c.size] = c
    return out


def construct_family(m: WeightedMeasure, n: int, basis=None) -> SkewOrthFamily:
    """Skew Gram-Schmidt on a monic basis (monomials by default).

    Pairs ``(q_2j, q_2j+1)`` are built in ascending order, each cleared
    against all earlier pairs; the gauge freedom ``q_2j+1 += a q_2j`` is
    fixed by zeroing the ``x^{2j}`` coefficient of ``q_2j+1``. The last
    polynomial is cleared against every pair.
    """
    if n < 1 or n % 2 == 0:
        raise ConfigurationError(f"only odd N >= 1 is supported, got {n}")
    basis = monomial_basis(n) if basis is None else list(basis)
    check_monic(basis, n)
    g = moment_matrix(m, basis[:n])
    b = border_integrals(m, basis[:n])
    pmat = _basis_matrix(basis, n)
    scale = max(float(np.max(np.abs(g), initial=0.0)), float(np.max(np.abs(b))), 1e-300)

    def skew(u, v):
        return u @ g @ v

    def clear(v, pairs):
        for e, o, r in pairs:
            v = v - (skew(v, o) / r) * e + (skew(v, e) / r) * o
        return v

    q = np.eye(n)
    pairs = []
    r = []
    for j in range((n - 1) // 2):
        e = clear(q[2 * j], pairs)
        o = clear(q[2 * j + 1], pairs)
        o = o - (o @ pmat)[2 * j] * e
        rj = skew(e, o)
        if abs(rj) < DEGENERACY_RTOL * scale:
            raise DegeneracyError(f"normalization r_{j} = {rj:.3e} vanishes (scale {scale:.3e})")
        pairs.append((e, o, rj))
        q[2 * j], q[2 * j + 1] = e, o
        r.append(rj)
    q[n - 1] = clear(q[n - 1], pairs)
    s = q @ b
    if abs(s[-1]) < DEGENERACY_RTOL * scale:
        raise DegeneracyError(f"border value s_{n - 1} = {s[-1]:.3e} vanishes")
    mono = q @ pmat
    coeffs = tuple(np.r_[mono[k, :k], 1.0] for k in range(n))
    return SkewOrthFamily(m.kind, n, coeffs, np.array(r), s, scale)


def z_from_rs(f: SkewOrthFamily) -> float:
    """Partition function ``s_{N-1} prod r_j`` (times ``N!`` for beta = 1 Hermitian)."""
    value = float(f.s[-1] * np.prod(f.r))
    return value if f.kind == ASYMMETRIC else factorial(f.n) * value


def w_from_family(f: SkewOrthFamily) -> np.ndarray:
    """The bordered matrix in the skew-orthogonal basis: 2x2 ``r_j`` blocks,
    a zero row/column for ``q_{N-1}`` and the ``s`` border."""
    n = f.n
    u = np.zeros((n, n))
    for j, rj in enumerate(f.r):
        u[2 * j, 2 * j + 1] = rj
        u[2 * j + 1, 2 * j] = -rj
    return bordered(u, f.s)


def inverse_closed_form(r, s) -> np.ndarray:
    """``(W)^{-T}`` written out entry by entry from ``r`` and ``s``."""
    n = len(s)
    last = s[-1]
    c = np.zeros((n + 1, n + 1))
    for j, rj in enumerate(r):
        e, o = 2 * j, 2 * j + 1
        c[e, o] = 1.0 / rj
        c[o, e] = -1.0 / rj
        c[e, n - 1] = -s[o] / (rj * last)
        c[n - 1, e] = s[o] / (rj * last)
        c[o, n - 1] = s[e] / (rj * last)
        c[n - 1, o] = -s[e] / (rj * last)
    c[n - 1, n] = 1.0 / last
    c[n, n - 1] = -1.0 / last
    return c


def invert_w(f: SkewOrthFamily, rtol: float = 1e-9) -> InverseMatrix:
    """Closed-form inverse-transpose of W, checked against a dense LU inverse."""
    if np.any(f.r == 0) or f.s[-1] == 0:
        raise DegeneracyError("zero normalization or border value; W is singular")
    c = inverse_closed_form(f.r, f.s)
    shadow = inverse_transpose(w_from_family(f)).entries
    scale = max(1.0, float(np.max(np.abs(c))))
    gap = float(np.max(np.abs(c - shadow)))
    if gap > rtol * scale:
        raise ConsistencyError(f"closed-form inverse differs from LU inverse by {gap:.3e}")
    return InverseMatrix(c, gap)


def regauge(f: SkewOrthFamily, m: WeightedMeasure, j: int, alpha: float) -> SkewOrthFamily:
    """Shift ``q_{2j+1} += alpha q_{2j}`` and recompute ``r`` and ``s``."""
    coeffs = list(f.coeffs)
    odd = coeffs[2 * j + 1].copy()
    odd[:2 * j + 1] += alpha * coeffs[2 * j]
    coeffs[2 * j + 1] = odd
    g = moment_matrix(m, coeffs)
    r = np.array([g[2 * i, 2 * i + 1] for i in range(f.n_pairs)])
    s = border_integrals(m, coeffs)
    return SkewOrthFamily(f.kind, f.n, tuple(coeffs), r, s, f.scale)


def family_moments(f: SkewOrthFamily, m: WeightedMeasure) -> SkewMatrix:
    """W re-assembled from the family's own skew products (structure check)."""
    g = moment_matrix(m, f.coeffs)
    b = border_integrals(m, f.coeffs)
    w = bordered(g, b)
    return SkewMatrix(w, atol=1e-12 * max(1.0, float(np.max(np.abs(w)))))
