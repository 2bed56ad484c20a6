"""Dense Pfaffians of real antisymmetric matrices.

The production routine is a skew-symmetric Gaussian elimination
(Parlett-Reid with partial pivoting). ``pf_oracle`` is an independent
perfect-matching expansion kept for cross-checks on small matrices.
"""
from __future__ import annotations

from itertools import combinations

import numpy as np

from .errors import AntisymmetryError, DimensionError, DomainError, SizeError

ORACLE_MAX_DIM = 12


class SkewMatrix:
    """Real antisymmetric matrix validated on construction.

    Inputs whose asymmetry ``max|M + M^T|`` is at most ``atol`` are
    projected onto ``(M - M^T) / 2``; anything worse is rejected.
    """

    __slots__ = ("entries",)

    def __init__(self, entries, atol: float = 1e-12):
        a = np.array(entries, dtype=float, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise DomainError("matrix has NaN or infinite entries")
        asym = np.max(np.abs(a + a.T)) if a.size else 0.0
        if asym > atol:
            raise AntisymmetryError(f"max |M + M^T| = {asym:.3e} exceeds {atol:.1e}")
        a = 0.5 * (a - a.T)
        a.setflags(write=False)
        self.entries = a

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __repr__(self):
        return f"SkewMatrix(dim={self.dim})"


def as_skew(m, atol: float = 1e-12) -> SkewMatrix:
    return m if isinstance(m, SkewMatrix) else SkewMatrix(m, atol=atol)


def standard_j(t: int) -> np.ndarray:
    """Block-diagonal symplectic form with ``t`` blocks ``[[0, 1], [-1, 0]]``."""
    j = np.zeros((2 * t, 2 * t))
    idx = np.arange(t)
    j[2 * idx, 2 * idx + 1] = 1.0
    j[2 * idx + 1, 2 * idx] = -1.0
    return j


def pf(m, zero_tol: float = 1e-14) -> float:
    """Pfaffian by skew Gaussian elimination with partial pivoting.

    Each interchange of a row/column pair flips the sign. When every
    candidate pivot in a column is below ``zero_tol * max|m|`` the matrix
    is numerically singular and 0 is returned.
    """
    a = np.array(as_skew(m).entries, copy=True)
    n = a.shape[0]
    if n % 2:
        raise DimensionError(f"Pfaffian needs an even dimension, got {n}")
    if n == 0:
        return 1.0
    scale = np.max(np.abs(a))
    if scale == 0.0:
        return 0.0
    result = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            result = -result
        if abs(a[k + 1, k]) <= zero_tol * scale:
            return 0.0
        result *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2:] / a[k, k + 1]
            col = a[k + 2:, k + 1]
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return float(result)


def _pf_expand(a: np.ndarray, idx: tuple) -> float:
    if not idx:
        return 1.0
    first, rest = idx[0], idx[1:]
    total = 0.0
    for pos, j in enumerate(rest):
        if a[first, j] == 0.0:
            continue
        sign = 1.0 if pos % 2 == 0 else -1.0
        total += sign * a[first, j] * _pf_expand(a, rest[:pos] + rest[pos + 1:])
    return total


def pf_oracle(m) -> float:
    """Pfaffian as a signed sum over perfect matchings (first-row expansion)."""
    a = as_skew(m).entries
    n = a.shape[0]
    if n % 2:
        raise DimensionError(f"Pfaffian needs an even dimension, got {n}")
    if n > ORACLE_MAX_DIM:
        raise SizeError(f"oracle limited to dim <= {ORACLE_MAX_DIM}, got {n}")
    return float(_pf_expand(a, tuple(range(n))))


def pf_minor_expansion(j, k) -> float:
    """``1 + sum over nonempty block subsets t of Pf(k restricted to t)``.

    Minors are taken in 2x2 blocks: subset ``t`` of ``{0..T-1}`` selects
    rows/columns ``2i, 2i+1`` for every ``i`` in ``t``. For the standard
    form ``j`` this equals ``pf(j + k)``.
    """
    j = np.asarray(j, dtype=float)
    k = as_skew(k).entries
    if j.shape != k.shape:
        raise DimensionError(f"shape mismatch {j.shape} vs {k.shape}")
    if k.shape[0] % 2:
        raise DimensionError("block minors need an even dimension")
    t = k.shape[0] // 2
    if not np.array_equal(j, standard_j(t)):
        raise DimensionError("first argument must be the standard block form J")
    total = 1.0
    for size in range(1, t + 1):
        for blocks in combinations(range(t), size):
            rows = np.ravel([(2 * b, 2 * b + 1) for b in blocks])
            total += pf(k[np.ix_(rows, rows)])
    return total
