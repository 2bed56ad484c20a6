"""Numerical validators for the two determinant/Pfaffian identities behind
the Pfaffian kernel construction, plus seeded random suites used by ``pfcorr validate``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DimensionError, DomainError, SingularityError
from .pfaffian import SkewMatrix, pf, pf_minor_expansion, pf_oracle, standard_j

COND_LIMIT = 1e12


def _finite(*arrays):
    for x in arrays:
        if not np.all(np.isfinite(x)):
            raise DomainError("input has NaN or infinite entries")


def check_det_commutation(a, b) -> tuple[float, float]:
    """Return ``(det(I_T - a b), det(I_N - b a))`` for ``a`` T x N, ``b`` N x T."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    _finite(a, b)
    if a.shape[1] != b.shape[0] or a.shape[0] != b.shape[1]:
        raise DimensionError(f"incompatible shapes {a.shape} and {b.shape}")
    lhs = np.linalg.det(np.eye(a.shape[0]) - a @ b)
    rhs = np.linalg.det(np.eye(b.shape[0]) - b @ a)
    return float(lhs), float(rhs)


def inverse_transpose(m) -> SkewMatrix:
    """``m^{-T}`` of an antisymmetric matrix by dense LU with partial pivoting."""
    m = np.asarray(m, dtype=float)
    if m.shape[0] == 0:
        return SkewMatrix(m)
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularityError(f"condition number {cond:.3e} exceeds {COND_LIMIT:.0e}")
    lu = linalg.lu_factor(m)
    inv_t = linalg.lu_solve(lu, np.eye(m.shape[0]), trans=1)
    scale = max(1.0, float(np.max(np.abs(inv_t))))
    return SkewMatrix(inv_t, atol=1e-9 * scale)


def _pad(a: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Append one zero row and/or column so ``a`` joins the given skew forms."""
    r, c = a.shape
    if r not in (rows, rows - 1) or c not in (cols, cols - 1):
        raise DimensionError(f"a has shape {a.shape}, skew forms need {(rows, cols)}")
    if (r, c) == (rows, cols):
        return a
    out = np.zeros((rows, cols))
    out[:r, :c] = a
    return out


def check_rains(a, b, c) -> tuple[float, float]:
    """Both sides of the Pfaffian Cauchy-Binet identity.

    With ``a`` of shape (2N, 2T), ``b`` a 2T x 2T and ``c`` a 2N x 2N
    invertible antisymmetric matrix::

        lhs = Pf(c^{-T} - a b a^T) / Pf(c^{-T})
        rhs = Pf(b^{-T} - a^T c a) / Pf(b^{-T})

    An ``a`` with one row (column) fewer than ``c`` (``b``) is padded with
    zeros, which is how an odd-sized coefficient block is joined to a
    bordered even-sized skew form.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    bm = np.asarray(b, dtype=float)
    cm = np.asarray(c, dtype=float)
    _finite(a, bm, cm)
    b = SkewMatrix(bm, atol=1e-12 * max(1.0, float(np.max(np.abs(bm), initial=0))))
    c = SkewMatrix(cm, atol=1e-12 * max(1.0, float(np.max(np.abs(cm), initial=0))))
    if b.dim % 2 or c.dim % 2:
        raise DimensionError("skew forms must have even dimension")
    a = _pad(a, c.dim, b.dim)
    b_it = inverse_transpose(b.entries)
    c_it = inverse_transpose(c.entries)
    left = c_it.entries - a @ b.entries @ a.T
    right = b_it.entries - a.T @ c.entries @ a
    lhs = pf(_skew(left)) / pf(c_it)
    rhs = pf(_skew(right)) / pf(b_it)
    return float(lhs), float(rhs)


def _skew(m: np.ndarray) -> SkewMatrix:
    return SkewMatrix(m, atol=1e-10 * max(1.0, float(np.max(np.abs(m), initial=0))))


def random_skew(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.standard_normal((dim, dim))
    return g - g.T


def rel_gap(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


@dataclass(frozen=True)
class SuiteResult:
    name: str
    instances: int
    failures: int
    max_rel_err: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _suite(name, gaps, tol) -> SuiteResult:
    gaps = np.asarray(gaps, dtype=float)
    return SuiteResult(name, len(gaps), int(np.sum(~(gaps <= tol))), float(gaps.max()), tol)


def det_commutation_suite(seed: int, count: int = 200, tol: float = 1e-10) -> SuiteResult:
    rng = np.random.default_rng([seed, 1])
    gaps = []
    for _ in range(count):
        t, n = rng.integers(1, 9, size=2)
        a = rng.standard_normal((t, n)) / np.sqrt(n)
        b = rng.standard_normal((n, t)) / np.sqrt(t)
        lhs, rhs = check_det_commutation(a, b)
        gaps.append(abs(lhs - rhs) / max(1.0, abs(lhs)))
    return _suite("det_commutation", gaps, tol)


def rains_suite(seed: int, count: int = 200, tol: float = 1e-9) -> SuiteResult:
    rng = np.random.default_rng([seed, 2])
    gaps = []
    while len(gaps) < count:
        n2, t2 = 2 * rng.integers(1, 6, size=2)
        a = rng.standard_normal((n2, t2)) / np.sqrt(t2)
        b = random_skew(rng, t2) / np.sqrt(t2)
        c = random_skew(rng, n2) / np.sqrt(n2)
        try:
            lhs, rhs = check_rains(a, b, c)
        except SingularityError:
            continue
        gaps.append(rel_gap(lhs, rhs))
    return _suite("rains_cauchy_binet", gaps, tol)


def pfaffian_suite(seed: int, count: int = 500, tol: float = 1e-10) -> SuiteResult:
    rng = np.random.default_rng([seed, 3])
    gaps = []
    for _ in range(count):
        dim = 2 * int(rng.integers(1, 6))
        m = random_skew(rng, dim)
        a, b = pf(m), pf_oracle(m)
        gaps.append(abs(a - b) / max(abs(b), 1e-300))
    return _suite("pfaffian_vs_matchings", gaps, tol)


def minor_expansion_suite(seed: int, count: int = 100, tol: float = 1e-10) -> SuiteResult:
    rng = np.random.default_rng([seed, 4])
    gaps = []
    for _ in range(count):
        t = int(rng.integers(1, 5))
        k = random_skew(rng, 2 * t) / 2
        j = standard_j(t)
        direct = pf(j + k)
        gaps.append(abs(pf_minor_expansion(j, k) - direct) / max(1.0, abs(direct)))
    return _suite("minor_expansion", gaps, tol)


def run_all(seed: int) -> list[SuiteResult]:
    return [
        pfaffian_suite(seed),
        det_commutation_suite(seed),
        rains_suite(seed),
        minor_expansion_suite(seed),
    ]
