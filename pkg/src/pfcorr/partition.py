"""de Bruijn moment matrices, odd-N bordered matrices and partition functions."""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from . import _quad
from .errors import ConfigurationError, ConsistencyError, SizeError
from .measures import ASYMMETRIC, WeightedMeasure, epsilon_complex, epsilon_real, polyval
from .pfaffian import SkewMatrix, pf

BRUTEFORCE_MAX_N = 3


def monomial_basis(n: int) -> list[np.ndarray]:
    return [np.eye(k + 1)[k] for k in range(n)]


def shifted_basis(n: int, shift: float) -> list[np.ndarray]:
    """Monic ``(x - shift)**k`` in ascending coefficients."""
    return [np.polynomial.polynomial.polypow([-shift, 1.0], k) for k in range(n)]


def check_monic(basis, n: int):
    if len(basis) < n:
        raise ConfigurationError(f"basis has {len(basis)} polynomials, need {n}")
    for k in range(n):
        c = np.trim_zeros(np.asarray(basis[k], dtype=float), "b")
        if c.size != k + 1 or c[-1] != 1.0:
            raise ConfigurationError(f"basis[{k}] is not monic of degree {k}")


def moment_matrix(m: WeightedMeasure, basis) -> np.ndarray:
    """``[<p_j|p_k>]`` for all pairs, assembled from node tables in one pass."""
    x, wx = m.real_rule.nodes, m.real_rule.weights
    p = np.array([polyval(c, x) for c in basis])
    e = np.array([epsilon_real(c, x, m) for c in basis])
    half = (p * wx) @ e.T
    if m.has_complex:
        z, wz = m.complex_rule.nodes, m.complex_rule.weights
        pz = np.array([polyval(c, z) for c in basis])
        ez = np.array([epsilon_complex(c, z) for c in basis])
        half = half + 2.0 * (pz * wz) @ ez.T
    u = half - half.T
    scale = max(1.0, float(np.max(np.abs(u), initial=0.0)))
    if np.max(np.abs(u.imag), initial=0.0) > 1e-9 * scale:
        raise ConsistencyError("moment matrix has a non-negligible imaginary part")
    return np.real(u)


def border_integrals(m: WeightedMeasure, basis) -> np.ndarray:
    x, wx = m.real_rule.nodes, m.real_rule.weights
    return np.array([wx @ polyval(c, x) for c in basis])


def bordered(u: np.ndarray, border: np.ndarray) -> np.ndarray:
    """Append ``border`` as last column and ``-border`` as last row."""
    n = u.shape[0]
    w = np.zeros((n + 1, n + 1))
    w[:n, :n] = u
    w[:n, n] = border
    w[n, :n] = -border
    return w


@dataclass(frozen=True)
class MomentMatrices:
    kind: str
    u: SkewMatrix
    border: np.ndarray
    w: SkewMatrix

    @property
    def n(self) -> int:
        return self.u.dim


def _skew(a: np.ndarray) -> SkewMatrix:
    return SkewMatrix(a, atol=1e-12 * max(1.0, float(np.max(np.abs(a), initial=0.0))))


def build_moment_matrices(m: WeightedMeasure, basis, n: int) -> MomentMatrices:
    if n < 1 or n % 2 == 0:
        raise ConfigurationError(f"only odd N >= 1 is supported, got {n}")
    check_monic(basis, n)
    basis = list(basis[:n])
    u = moment_matrix(m, basis)
    border = border_integrals(m, basis)
    return MomentMatrices(m.kind, _skew(u), border, _skew(bordered(u, border)))


def z_pfaffian(mm: MomentMatrices) -> float:
    """Partition function from the bordered Pfaffian.

    ``Pf W`` is the ordered integral over ``l_1 < ... < l_N``; for the
    beta = 1 Hermitian ensemble the partition function is taken over all
    of R^N and so carries an extra ``N!``. For the real asymmetric ensemble
    the sector factorials are already part of the definition.
    """
    value = pf(mm.w)
    return value if mm.kind == ASYMMETRIC else factorial(mm.n) * value


def z_bruteforce(m: WeightedMeasure, n: int, order: int = 20) -> float:
    """Partition function by direct quadrature of its defining integral.

    Hermitian: ``int_{R^n} |Delta| prod w``, integrated over the ordered
    simplex (where ``|Delta|`` is a polynomial) and multiplied by ``n!``.
    Real asymmetric: ``sum_{L+2M=n} 1/(L! M!) int_{R^L} int_{C^M} |Delta|``,
    the normalizer of the sector densities with their ``2^M`` prefactor.
    """
    if not 1 <= n <= BRUTEFORCE_MAX_N:
        raise SizeError(f"brute force supports 1 <= n <= {BRUTEFORCE_MAX_N}, got {n}")
    lo, hi = float(m.edges[0]), float(m.edges[-1])
    breaks = _quad.coarse_breaks(m.edges)
    if m.kind != ASYMMETRIC:
        pts, wts = _quad.ordered_nodes(n, lo, hi, breaks, order)
        vals = _quad.abs_vandermonde(pts) * np.prod(m.real_weight(pts), axis=1)
        return factorial(n) * float(wts @ vals)
    total = 0.0
    for pairs in range(n // 2 + 1):
        total += _sector_integral(m, n - 2 * pairs, pairs, lo, hi, breaks, order)
    return total


def _sector_integral(m, n_real, n_pairs, lo, hi, breaks, order):
    """``1/(L! M!) int_{R^L} int_{C^M} |Delta|`` for ``M <= 1``."""
    if n_pairs > 1:
        raise SizeError("brute-force sectors limited to one conjugate pair")
    if n_real:
        pts, wts = _quad.ordered_nodes(n_real, lo, hi, breaks, order)
        wts = wts * np.prod(m.real_weight(pts), axis=1)
    else:
        pts, wts = np.zeros((1, 0)), np.ones(1)
    if n_pairs == 0:
        return float(wts @ _quad.abs_vandermonde(pts))
    z, wz = _quad.half_plane_grid(m.complex_weight_squared)
    full = np.concatenate([
        np.broadcast_to(pts[:, None, :], (pts.shape[0], z.size, n_real)).astype(complex),
        z[None, :, None] * np.ones((pts.shape[0], 1, 1)),
        np.conj(z)[None, :, None] * np.ones((pts.shape[0], 1, 1)),
    ], axis=2)
    vals = _quad.abs_vandermonde(full)
    # C^M = both half-planes: factor 2^M / M! with M = 1
    return 2.0 * float(wts @ vals @ wz)
