"""Monte Carlo eigenvalue samples for GOE-type and real Ginibre matrices.

Random numbers: numpy's ``PCG64`` bit generator. The master seed feeds a
``SeedSequence`` whose ``spawn`` children seed one stream per chunk of
``CHUNK`` matrices, so results do not depend on how chunks are scheduled.
Normal variates come from the Box-Muller transform applied to consecutive
pairs of ``Generator.random()`` uniforms.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericError

GOE = "hermitian-beta1"
GINIBRE = "real-asymmetric"
CHUNK = 50_000
MIN_SAMPLES = 10_000
REAL_RTOL = 1e-9
RNG_NAME = "PCG64/SeedSequence.spawn/Box-Muller"


@dataclass(frozen=True)
class SpectralSample:
    """Eigenvalues of one matrix: sorted reals and upper-half-plane pair representatives."""
    reals: np.ndarray
    pairs: np.ndarray

    @property
    def n(self) -> int:
        return self.reals.size + 2 * self.pairs.size


@dataclass(frozen=True)
class SampleSet:
    """Many samples stored as NaN-padded arrays ``reals (S, n)`` and ``pairs (S, n // 2)``."""
    n: int
    reals: np.ndarray
    pairs: np.ndarray

    def __len__(self):
        return self.reals.shape[0]

    def __getitem__(self, i) -> SpectralSample:
        r = self.reals[i]
        p = self.pairs[i]
        return SpectralSample(r[~np.isnan(r)], p[~np.isnan(p.real)])

    def real_counts(self) -> np.ndarray:
        return np.sum(~np.isnan(self.reals), axis=1)

    def pair_counts(self) -> np.ndarray:
        return np.sum(~np.isnan(self.pairs.real), axis=1)


def box_muller(rng: np.random.Generator, size: int) -> np.ndarray:
    half = (size + 1) // 2
    u1 = 1.0 - rng.random(half)  # (0, 1], keeps the log finite
    u2 = rng.random(half)
    rad = np.sqrt(-2.0 * np.log(u1))
    out = np.empty(2 * half)
    out[0::2] = rad * np.cos(2.0 * np.pi * u2)
    out[1::2] = rad * np.sin(2.0 * np.pi * u2)
    return out[:size]


def _streams(seed, count: int):
    n_chunks = -(-count // CHUNK)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    for k, child in enumerate(children):
        size = min(CHUNK, count - k * CHUNK)
        yield np.random.Generator(np.random.PCG64(child)), size


def _goe_batch(rng, size, n):
    g = box_muller(rng, size * n * n).reshape(size, n, n)
    return np.linalg.eigvalsh((g + np.swapaxes(g, 1, 2)) / 2.0)


def _ginibre_batch(rng, size, n, seed):
    g = box_muller(rng, size * n * n).reshape(size, n, n)
    try:
        return np.linalg.eigvals(g)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigenvalue solver failed (seed {seed}): {exc}") from exc


def classify(values) -> SpectralSample:
    """Split eigenvalues of one real matrix into reals and conjugate pairs.

    A value is real when ``|Im| <= 1e-9 (1 + |lambda|)``. The remaining
    values are matched greedily, each upper one with the nearest conjugate
    of a lower one.
    """
    values = np.asarray(values, dtype=complex)
    tol = REAL_RTOL * (1.0 + np.abs(values))
    is_real = np.abs(values.imag) <= tol
    upper = list(values[~is_real & (values.imag > 0)])
    lower = list(values[~is_real & (values.imag < 0)])
    if len(upper) != len(lower):
        raise NumericError("eigenvalues off the real axis do not come in conjugate pairs")
    pairs = []
    for u in upper:
        k = int(np.argmin([abs(u - np.conj(v)) for v in lower]))
        lower.pop(k)
        pairs.append(u)
    return SpectralSample(np.sort(values[is_real].real), np.array(pairs, dtype=complex))


def _classify_batch(vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    tol = REAL_RTOL * (1.0 + np.abs(vals))
    is_real = np.abs(vals.imag) <= tol
    upper = ~is_real & (vals.imag > 0)
    lower = ~is_real & (vals.imag < 0)
    if np.any(upper.sum(axis=1) != lower.sum(axis=1)):
        raise NumericError("eigenvalues off the real axis do not come in conjugate pairs")
    reals = np.sort(np.where(is_real, vals.real, np.nan), axis=1)
    pairs = np.where(upper, vals, np.nan + 0j)
    order = np.argsort(np.isnan(pairs.real), axis=1, kind="stable")
    pairs = np.take_along_axis(pairs, order, axis=1)[:, :vals.shape[1] // 2]
    return reals, pairs


def sample_many(ensemble: str, n: int, count: int, seed) -> SampleSet:
    """``count`` independent samples from either ensemble."""
    if n < 1 or count < 1:
        raise ConfigurationError("need n >= 1 and count >= 1")
    reals, pairs = [], []
    for rng, size in _streams(seed, count):
        if ensemble == GOE:
            r = _goe_batch(rng, size, n)
            reals.append(r)
            pairs.append(np.full((size, n // 2), np.nan + 0j))
        elif ensemble == GINIBRE:
            r, p = _classify_batch(_ginibre_batch(rng, size, n, seed))
            reals.append(r)
            pairs.append(p)
        else:
            raise ConfigurationError(f"unsupported ensemble {ensemble!r}")
    return SampleSet(n, np.concatenate(reals), np.concatenate(pairs))


def sample_goe(n: int, seed) -> SpectralSample:
    """Eigenvalues of ``(G + G^T) / 2`` with ``G`` standard normal (density ``prod e^{-x^2/2} |Delta|``)."""
    return sample_many(GOE, n, 1, seed)[0]


def sample_ginibre_real(n: int, seed) -> SpectralSample:
    """Eigenvalues of an ``n x n`` matrix with independent standard normal entries."""
    return sample_many(GINIBRE, n, 1, seed)[0]


@dataclass(frozen=True)
class Histogram:
    """Density per sample per unit length (or area) with standard errors.

    For the real axis ``edges`` is one array; for pair representatives it
    is ``(x_edges, y_edges)`` and ``density`` has shape ``(nx, ny)``.
    """
    edges: object
    density: np.ndarray
    stderr: np.ndarray
    n_samples: int

    @property
    def bin_lo(self):
        return self.edges[:-1]

    @property
    def bin_hi(self):
        return self.edges[1:]


def _edges(region):
    lo, hi, bins = region
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo or int(bins) < 1:
        raise ConfigurationError(f"empty region {region!r}")
    return np.linspace(float(lo), float(hi), int(bins) + 1)


def _bin_moments(idx: np.ndarray, n_bins: int):
    """Per-bin sums of counts and of squared per-sample counts.

    ``idx`` is ``(S, k)`` with ``-1`` for entries outside every bin.
    """
    valid = idx >= 0
    total = np.bincount(idx[valid], minlength=n_bins).astype(float)
    squares = total.copy()
    for a in range(idx.shape[1]):
        for b in range(a + 1, idx.shape[1]):
            same = valid[:, a] & (idx[:, a] == idx[:, b])
            squares += 2.0 * np.bincount(idx[same, a], minlength=n_bins)
    return total, squares


def _locate(values, edges):
    k = np.searchsorted(edges, values, side="right") - 1
    inside = (values >= edges[0]) & (values < edges[-1]) & ~np.isnan(values)
    return np.where(inside, k, -1)


def density_estimate(samples: SampleSet, region, which: str = "real") -> Histogram:
    """Histogram of real eigenvalues (``region = (lo, hi, bins)``) or of pair
    representatives (``region = ((xlo, xhi, nx), (ylo, yhi, ny))``)."""
    s = len(samples)
    if s < MIN_SAMPLES:
        raise ConfigurationError(f"need at least {MIN_SAMPLES} samples, got {s}")
    if which == "real":
        edges = _edges(region)
        idx = _locate(samples.reals, edges)
        n_bins = edges.size - 1
        size = np.diff(edges)
        shape = (n_bins,)
        out_edges = edges
    elif which == "pairs":
        ex, ey = _edges(region[0]), _edges(region[1])
        ix = _locate(samples.pairs.real, ex)
        iy = _locate(np.where(np.isnan(samples.pairs.real), np.nan, samples.pairs.imag), ey)
        ny = ey.size - 1
        idx = np.where((ix >= 0) & (iy >= 0), ix * ny + iy, -1)
        n_bins = (ex.size - 1) * ny
        size = np.outer(np.diff(ex), np.diff(ey)).ravel()
        shape = (ex.size - 1, ny)
        out_edges = (ex, ey)
    else:
        raise ConfigurationError(f"unknown histogram target {which!r}")
    total, squares = _bin_moments(idx, n_bins)
    mean = total / s
    var = np.maximum(squares / s - mean ** 2, 0.0)
    density = (mean / size).reshape(shape)
    stderr = (np.sqrt(var / s) / size).reshape(shape)
    return Histogram(out_edges, density, stderr, s)


def z_scores(hist: Histogram, predicted) -> np.ndarray:
    """``(density - predicted) / stderr``.

    A bin with no hits has zero sample variance; its error is floored at
    the one-hit resolution ``1 / (samples * bin size)``.
    """
    predicted = np.asarray(predicted, dtype=float)
    if isinstance(hist.edges, tuple):
        size = np.outer(np.diff(hist.edges[0]), np.diff(hist.edges[1]))
    else:
        size = np.diff(hist.edges)
    floor = 1.0 / (hist.n_samples * size)
    return (hist.density - predicted) / np.maximum(hist.stderr, floor)


def fraction_within(hist: Histogram, predicted, sigmas: float = 3.0) -> float:
    return float(np.mean(np.abs(z_scores(hist, predicted)) <= sigmas))
