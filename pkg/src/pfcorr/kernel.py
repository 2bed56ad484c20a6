"""Matrix kernel K_N, the perturbation matrices A, J, E, and Pfaffian
correlation functions with brute-force oracles.

Points are ``SpectralPoint`` objects (plain numbers are converted). For a
point ``y`` the two slot vectors over the family are ``a_n = w(y) q_n(y)``
and ``b_n = eps(w q_n)(y)``. At a complex point ``b = i w(y) q_n(conj y)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from . import _quad
from .errors import ConsistencyError, DimensionError, DomainError, SizeError
from .identities import inverse_transpose
from .measures import ASYMMETRIC, SpectralPoint, WeightedMeasure, epsilon_real, polyval
from .partition import bordered, border_integrals, moment_matrix, z_bruteforce
from .pfaffian import SkewMatrix, pf, standard_j
from .skeworth import InverseMatrix, SkewOrthFamily

ANTISYM_TOL = 1e-9
PERTURB_TOL = 1e-8


@dataclass(frozen=True)
class KernelEvaluation:
    """Kernel entries at ``(y, y')``; ``s_swapped`` is ``S_N(y', y)``."""
    ds: complex
    s: complex
    s_swapped: complex
    sni: complex
    at: tuple

    def block(self) -> np.ndarray:
        y, y2 = self.at
        return np.array([[self.ds, self.s],
                         [-self.s_swapped, self.sni + 0.5 * _sgn(y, y2)]])


def _point(p) -> SpectralPoint:
    return p if isinstance(p, SpectralPoint) else SpectralPoint.from_value(p)


def _sgn(p: SpectralPoint, q: SpectralPoint) -> float:
    """``sgn(p - q)`` for two real points, zero otherwise."""
    if not (p.is_real and q.is_real):
        return 0.0
    return float(np.sign(p.value.real - q.value.real))


def slot_values(m: WeightedMeasure, coeffs, points):
    """Slot arrays ``a, b`` of shape ``(T, N)`` and the real-point indicator."""
    points = [_point(p) for p in points]
    n = len(coeffs)
    a = np.zeros((len(points), n), dtype=complex)
    b = np.zeros((len(points), n), dtype=complex)
    chi = np.array([1.0 if p.is_real else 0.0 for p in points])
    real_idx = [t for t, p in enumerate(points) if p.is_real]
    cplx_idx = [t for t, p in enumerate(points) if not p.is_real]
    if real_idx:
        x = np.array([points[t].value.real for t in real_idx])
        wx = m.real_weight(x)
        for k, c in enumerate(coeffs):
            a[real_idx, k] = wx * polyval(c, x)
            b[real_idx, k] = epsilon_real(c, x, m)
    if cplx_idx:
        if not m.has_complex:
            raise DimensionError("this measure has no off-axis part; complex points are not allowed")
        z = np.array([points[t].value for t in cplx_idx])
        wz = m.complex_weight(z)
        for k, c in enumerate(coeffs):
            a[cplx_idx, k] = wz * polyval(c, z)
            b[cplx_idx, k] = 1j * wz * polyval(c, np.conj(z))
    return a, b, chi


def _tables_simplified(f: SkewOrthFamily, a, b, chi, a2, b2, chi2, pair=np.outer):
    """DS, S, SNI between two point sets written with r and s only.

    ``pair`` combines a column over the first set with one over the second:
    ``np.outer`` for full tables, ``np.multiply`` for the diagonal.
    """
    r, s = f.r, f.s
    last = s[-1]

    def g(u):
        out = np.zeros(u.shape[0], dtype=complex)
        for j, rj in enumerate(r):
            out += (s[2 * j + 1] * u[:, 2 * j] - s[2 * j] * u[:, 2 * j + 1]) / rj
        return out

    def k(u, v):
        out = 0j
        for j, rj in enumerate(r):
            e, o = 2 * j, 2 * j + 1
            out = out + 2.0 * (pair(u[:, e], v[:, o]) - pair(u[:, o], v[:, e])) / rj
        return out + (2.0 / last) * (pair(u[:, -1], g(v)) - pair(g(u), v[:, -1]))

    ds = k(a, a2)
    s_ = k(a, b2) + pair(a[:, -1], chi2) / last
    sni = k(b, b2) + (pair(b[:, -1], chi2) - pair(chi, b2[:, -1])) / last
    return ds, s_, sni


def _tables_generic(cmat, a, b, chi, a2, b2, chi2):
    """DS, S, SNI as double sums over the entries of ``C = W^{-T}``."""
    n = a.shape[1]
    core = cmat[:n, :n]
    col = cmat[:n, n]
    ds = 2.0 * a @ core @ a2.T
    s_ = 2.0 * a @ core @ b2.T + np.outer(a @ col, chi2)
    sni = 2.0 * b @ core @ b2.T + np.outer(b @ col, chi2) - np.outer(chi, b2 @ col)
    return ds, s_, sni


def kernel_tables(f: SkewOrthFamily, c: InverseMatrix | None, m: WeightedMeasure, points,
                  points2=None, method: str = "simplified"):
    """All kernel entries between two point lists as ``(T, T')`` arrays."""
    points2 = points if points2 is None else points2
    a, b, chi = slot_values(m, f.coeffs, points)
    a2, b2, chi2 = slot_values(m, f.coeffs, points2)
    if method == "simplified":
        return _tables_simplified(f, a, b, chi, a2, b2, chi2)
    if method == "generic":
        return _tables_generic(c.c, a, b, chi, a2, b2, chi2)
    raise ValueError(f"unknown kernel method {method!r}")


def kernel_tables_from_basis(m: WeightedMeasure, basis, points, points2=None):
    """Kernel tables from an arbitrary monic basis and a dense ``W^{-T}``.

    No skew-orthogonality is used, so agreement with the family-based
    tables checks that the kernel does not depend on the basis.
    """
    points2 = points if points2 is None else points2
    w = bordered(moment_matrix(m, basis), border_integrals(m, basis))
    cmat = inverse_transpose(w).entries
    a, b, chi = slot_values(m, basis, points)
    a2, b2, chi2 = slot_values(m, basis, points2)
    return _tables_generic(cmat, a, b, chi, a2, b2, chi2)


def kernel_entries(f: SkewOrthFamily, c: InverseMatrix, m: WeightedMeasure, y, y2,
                   method: str = "simplified") -> KernelEvaluation:
    y, y2 = _point(y), _point(y2)
    ds, s_, sni = kernel_tables(f, c, m, [y, y2], method=method)
    return KernelEvaluation(complex(ds[0, 1]), complex(s_[0, 1]), complex(s_[1, 0]),
                            complex(sni[0, 1]), (y, y2))


def kernel_matrix(f: SkewOrthFamily, c: InverseMatrix | None, m: WeightedMeasure, points,
                  scale=None, method: str = "simplified") -> np.ndarray:
    """The ``2T x 2T`` matrix of blocks ``sqrt(c_u c_t) K_N(y_u, y_t)``."""
    points = [_point(p) for p in points]
    t = len(points)
    ds, s_, sni = kernel_tables(f, c, m, points, method=method)
    sgn = np.array([[_sgn(p, q) for q in points] for p in points])
    out = np.zeros((2 * t, 2 * t), dtype=complex)
    out[0::2, 0::2] = ds
    out[0::2, 1::2] = s_
    out[1::2, 0::2] = -s_.T
    out[1::2, 1::2] = sni + 0.5 * sgn
    if scale is not None:
        root = np.repeat(np.sqrt(np.asarray(scale, dtype=float)), 2)
        out *= np.outer(root, root)
    return out


def one_point_density(f: SkewOrthFamily, m: WeightedMeasure, points) -> np.ndarray:
    """``R_1`` (or ``R_{1,0}`` / ``R_{0,1}``) at many points: the diagonal ``S_N(y, y)``."""
    points = [_point(p) for p in points]
    a, b, chi = slot_values(m, f.coeffs, points)
    _, s_, _ = _tables_simplified(f, a, b, chi, a, b, chi, pair=np.multiply)
    scale = max(1.0, float(np.max(np.abs(s_), initial=0.0)))
    if np.max(np.abs(s_.imag), initial=0.0) > ANTISYM_TOL * scale:
        raise ConsistencyError("one-point density is not real")
    return s_.real


def real_reduce(x: np.ndarray, points) -> tuple[np.ndarray, float]:
    """Congruence that makes a kernel-type matrix real.

    At a complex point the ``b`` slot is ``i`` times the conjugate of the
    ``a`` slot, so mixing the two rows (and columns) with
    ``[[1/2, -i/2], [-i/2, 1/2]]`` turns them into real and imaginary parts.
    Returns the real matrix and the factor ``f`` with ``Pf(x) = f Pf(result)``.
    """
    points = [_point(p) for p in points]
    t = len(points)
    mix = np.eye(2 * t, dtype=complex)
    blk = np.array([[0.5, -0.5j], [-0.5j, 0.5]])
    n_cplx = 0
    for k, p in enumerate(points):
        if not p.is_real:
            mix[2 * k:2 * k + 2, 2 * k:2 * k + 2] = blk
            n_cplx += 1
    y = mix @ x @ mix.T
    scale = max(1.0, float(np.max(np.abs(y), initial=0.0)))
    resid = float(np.max(np.abs(y.imag), initial=0.0))
    if resid > ANTISYM_TOL * scale:
        raise ConsistencyError(f"real reduction left imaginary part {resid:.3e}")
    return y.real, 2.0 ** n_cplx


def _checked_pf(x: np.ndarray, points) -> float:
    real, factor = real_reduce(x, points)
    scale = max(1.0, float(np.max(np.abs(real), initial=0.0)))
    asym = float(np.max(np.abs(real + real.T), initial=0.0))
    if asym > ANTISYM_TOL * scale:
        raise ConsistencyError(f"assembled matrix is not antisymmetric (gap {asym:.3e})")
    return factor * pf(SkewMatrix(real, atol=ANTISYM_TOL * scale))


def _correlation(f, c, m, points, tol):
    if not points:
        raise DimensionError("need at least one point")
    x = kernel_matrix(f, c, m, points)
    value = _checked_pf(x, points)
    scale = max(1.0, abs(value))
    if value < -tol * scale:
        raise ConsistencyError(f"correlation function came out negative ({value:.3e})")
    return max(value, 0.0)


def correlation_hermitian(f: SkewOrthFamily, c: InverseMatrix, m: WeightedMeasure, points) -> float:
    """``R_n(y_1..y_n) = Pf[K_N(y_j, y_k)]`` for real points."""
    points = [_point(p) for p in points]
    if any(not p.is_real for p in points):
        raise DimensionError("Hermitian correlations take real points only")
    return _correlation(f, c, m, points, 1e-9)


def correlation_asymmetric(f: SkewOrthFamily, c: InverseMatrix, m: WeightedMeasure, x=(), z=()) -> float:
    """``R_{l,m}`` at real points ``x`` and conjugate-pair representatives ``z``."""
    xs = [SpectralPoint.real(float(np.real(v))) if not isinstance(v, SpectralPoint) else v for v in x]
    zs = [SpectralPoint.pair(complex(v)) if not isinstance(v, SpectralPoint) else v for v in z]
    if any(not p.is_real for p in xs) or any(p.is_real for p in zs):
        raise DimensionError("x must be real points and z complex-pair points")
    if len(xs) + 2 * len(zs) > f.n:
        raise DimensionError(f"l + 2m = {len(xs) + 2 * len(zs)} exceeds N = {f.n}")
    return _correlation(f, c, m, xs + zs, 1e-8)


def _masses(c_vals, t):
    c_vals = np.asarray(c_vals, dtype=float)
    if c_vals.shape != (t,):
        raise DimensionError("c_vals must match points")
    if np.any(c_vals < 0) or not np.all(np.isfinite(c_vals)):
        raise DomainError("point masses must be finite and nonnegative")
    return c_vals


def assemble_tw_matrices(m: WeightedMeasure, f: SkewOrthFamily, points, c_vals):
    """Matrices ``A (N+1 x 2T)``, ``J`` and ``E`` of the perturbation identity.

    The product form ``W + A J A^T + A E A^T`` is compared with a direct
    assembly of the perturbed moments; a mismatch raises.
    """
    points = [_point(p) for p in points]
    t = len(points)
    if t == 0 or t % 2:
        raise DimensionError(f"need an even, positive number of points, got {t}")
    c_vals = _masses(c_vals, t)
    a_slot, b_slot, chi = slot_values(m, f.coeffs, points)
    n = f.n
    a = np.zeros((n + 1, 2 * t), dtype=complex)
    root = np.sqrt(2.0 * c_vals)
    a[:n, 0::2] = (a_slot * root[:, None]).T
    a[:n, 1::2] = (b_slot * root[:, None]).T
    a[n, 1::2] = chi * np.sqrt(c_vals / 2.0)
    j = standard_j(t)
    e = np.zeros((2 * t, 2 * t))
    for u in range(t):
        for v in range(t):
            e[2 * u, 2 * v] = 0.5 * np.sqrt(c_vals[u] * c_vals[v]) * _sgn(points[v], points[u])
    base = bordered(moment_matrix(m, f.coeffs), border_integrals(m, f.coeffs))
    product = base + a @ j @ a.T + a @ e @ a.T
    direct = perturbed_w(m, f.coeffs, points, c_vals)
    gap = float(np.max(np.abs(product - direct)))
    if gap > PERTURB_TOL * max(1.0, float(np.max(np.abs(direct)))):
        raise ConsistencyError(f"A J A^T + A E A^T disagrees with direct assembly ({gap:.3e})")
    return a, j, e


def perturbed_w(m: WeightedMeasure, coeffs, points, c_vals) -> np.ndarray:
    """Bordered moment matrix of the measure plus point masses.

    A real point ``y`` carries mass ``c w(y)``; a complex representative
    ``z`` carries ``c |w(z)|^2`` at both ``z`` and its conjugate.
    """
    points = [_point(p) for p in points]
    n = len(coeffs)
    u = moment_matrix(m, coeffs).astype(float)
    border = border_integrals(m, coeffs).astype(float)
    reals = [(p.value.real, cv) for p, cv in zip(points, c_vals) if p.is_real]
    for p, cv in zip(points, c_vals):
        if p.is_real:
            y = p.value.real
            wy = float(m.real_weight(np.array(y)))
            vals = np.array([polyval(c, y) for c in coeffs])
            # int p(xi) sgn(xi - y) w(xi) dxi
            sided = np.array([2.0 * m.upper_integral(lambda t, c=c: polyval(c, t), y)
                              - m.real_total(lambda t, c=c: polyval(c, t)) for c in coeffs])
            u += cv * wy * (np.outer(vals, sided) - np.outer(sided, vals))
            border += cv * wy * vals
        else:
            z = p.value
            w2 = abs(complex(m.complex_weight(np.array(z)))) ** 2
            pz = np.array([polyval(c, z) for c in coeffs])
            cross = np.outer(pz, np.conj(pz))
            u += (2j * cv * w2 * (cross - cross.T)).real
    for y1, c1 in reals:
        for y2, c2 in reals:
            w12 = float(m.real_weight(np.array(y1)) * m.real_weight(np.array(y2)))
            v1 = np.array([polyval(c, y1) for c in coeffs])
            v2 = np.array([polyval(c, y2) for c in coeffs])
            u += c1 * c2 * w12 * np.sign(y2 - y1) * np.outer(v1, v2)
    return bordered(u, border)


def generating_check(m: WeightedMeasure, f: SkewOrthFamily, c: InverseMatrix, points, c_vals):
    """Both sides of ``Pf(W^{eta+nu}) / Pf(W^nu) = Pf(J + K)``."""
    points = [_point(p) for p in points]
    t = len(points)
    if not 1 <= t <= 4:
        raise SizeError(f"generating check supports 1..4 points, got {t}")
    c_vals = _masses(c_vals, t)
    base = bordered(moment_matrix(m, f.coeffs), border_integrals(m, f.coeffs))
    pert = perturbed_w(m, f.coeffs, points, c_vals)
    lhs = pf(SkewMatrix(pert, atol=1e-9 * max(1.0, np.abs(pert).max()))) / pf(
        SkewMatrix(base, atol=1e-9 * max(1.0, np.abs(base).max())))
    jk = standard_j(t) + kernel_matrix(f, c, m, points, scale=c_vals)
    rhs = _checked_pf(jk, points)
    return float(lhs), float(rhs)


def correlation_bruteforce(m: WeightedMeasure, n: int, x=(), z=(), order: int = 20) -> float:
    """Correlation function by integrating the joint density over the rest.

    Only small systems: ``n <= 3`` and at most one free conjugate pair.
    """
    if not 1 <= n <= 3:
        raise SizeError(f"brute-force correlations support n <= 3, got {n}")
    x = np.asarray([float(np.real(v)) for v in x])
    z = np.asarray([complex(v.real, abs(v.imag)) for v in z])
    lo, hi = float(m.edges[0]), float(m.edges[-1])
    breaks = np.r_[_quad.coarse_breaks(m.edges), x]
    z_total = z_bruteforce(m, n, order)
    fixed = np.r_[x, z, np.conj(z)].astype(complex)
    fixed_w = np.prod(m.real_weight(x)) if x.size else 1.0
    if z.size:
        fixed_w *= np.prod(m.complex_weight_squared(z))
    if m.kind != ASYMMETRIC:
        if z.size:
            raise DimensionError("Hermitian correlations take real points only")
        total = _free_integral(m, fixed, n - x.size, 0, lo, hi, breaks, order)
        return factorial(n) * fixed_w * total / z_total
    total = 0.0
    for pairs in range(z.size, n // 2 + 1):
        free_real = n - 2 * pairs - x.size
        if free_real < 0:
            continue
        free_pairs = pairs - z.size
        if free_pairs > 1:
            raise SizeError("brute force limited to one free conjugate pair")
        total += 2.0 ** pairs / factorial(free_pairs) * _free_integral(
            m, fixed, free_real, free_pairs, lo, hi, breaks, order)
    return fixed_w * total / z_total


def _free_integral(m, fixed, n_real, n_pairs, lo, hi, breaks, order):
    """``int_{ordered R^L} int_{C+^M} |Delta(fixed, free)| prod w`` for ``M <= 1``."""
    if n_real:
        pts, wts = _quad.ordered_nodes(n_real, lo, hi, breaks, order)
        wts = wts * np.prod(m.real_weight(pts), axis=1)
    else:
        pts, wts = np.zeros((1, 0)), np.ones(1)
    base = np.concatenate([np.broadcast_to(fixed, (pts.shape[0], fixed.size)), pts], axis=1)
    if n_pairs == 0:
        return float(wts @ _quad.abs_vandermonde(base))
    zz, wz = _quad.half_plane_grid(m.complex_weight_squared)
    rows = base.shape[0]
    full = np.concatenate([
        np.broadcast_to(base[:, None, :], (rows, zz.size, base.shape[1])),
        np.broadcast_to(zz[None, :, None], (rows, zz.size, 1)),
        np.broadcast_to(np.conj(zz)[None, :, None], (rows, zz.size, 1)),
    ], axis=2)
    return float(wts @ _quad.abs_vandermonde(full) @ wz)


def bin_average_density(f: SkewOrthFamily, m: WeightedMeasure, lo, hi, order: int = 8) -> np.ndarray:
    """Mean of the real-axis one-point density over each interval ``[lo_k, hi_k]``."""
    t, wt = _quad.unit_gauss_legendre(order)
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    x = lo[:, None] + (hi - lo)[:, None] * t
    return (one_point_density(f, m, x.ravel()).reshape(x.shape) * wt).sum(axis=1)
