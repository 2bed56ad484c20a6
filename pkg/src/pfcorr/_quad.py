"""Brute-force integration helpers for the partition and correlation oracles.

These deliberately avoid the quadrature rules stored on a measure so the
oracles stay independent of the Pfaffian path they check.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss


def unit_gauss_legendre(order: int):
    t, w = leggauss(order)
    return (t + 1.0) / 2.0, w / 2.0


def abs_vandermonde(points: np.ndarray) -> np.ndarray:
    """``prod_{i<j} |v_j - v_i|`` along the last axis (real or complex)."""
    points = np.asarray(points)
    out = np.ones(points.shape[:-1])
    k = points.shape[-1]
    for i in range(k):
        for j in range(i + 1, k):
            out = out * np.abs(points[..., j] - points[..., i])
    return out


def coarse_breaks(edges, max_panels: int = 10) -> np.ndarray:
    """Interior panel breaks of a measure, thinned to at most ``max_panels`` panels.

    Tabulated weights can have hundreds of knots; using each as a break
    would multiply the simplex node count by the number of knots per axis.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.size - 1 <= max_panels:
        return edges[1:-1]
    return np.linspace(edges[0], edges[-1], max_panels + 1)[1:-1]


def ordered_nodes(k: int, lo: float, hi: float, breaks=(), order: int = 20):
    """Product Gauss-Legendre nodes on ``lo < x_1 < ... < x_k < hi``.

    Every variable's range is split at ``breaks`` so an integrand that is
    smooth away from the hyperplanes ``x_i = b`` is integrated to high
    accuracy. Returns ``(points (M, k), weights (M,))``.
    """
    edges = np.unique(np.r_[lo, [b for b in breaks if lo < b < hi], hi])
    npan = edges.size - 1
    t, wt = unit_gauss_legendre(order)
    pts = np.zeros((1, 0))
    wts = np.ones(1)
    lower = np.array([float(lo)])
    panel = np.zeros(1, dtype=int)
    for _ in range(k):
        out_p, out_w, out_l, out_pan = [], [], [], []
        for p in range(npan):
            sel = panel == p
            if not np.any(sel):
                continue
            a = lower[sel]
            length = edges[p + 1] - a
            x = a[:, None] + length[:, None] * t
            w = wts[sel][:, None] * length[:, None] * wt
            base = np.repeat(pts[sel], order, axis=0)
            out_p.append(np.column_stack([base, x.ravel()]))
            out_w.append(w.ravel())
            out_l.append(x.ravel())
            out_pan.append(np.full(x.size, p))
            for q in range(p + 1, npan):
                xq = edges[q] + (edges[q + 1] - edges[q]) * t
                wq = (edges[q + 1] - edges[q]) * wt
                base = np.repeat(pts[sel], order, axis=0)
                out_p.append(np.column_stack([base, np.tile(xq, sel.sum())]))
                out_w.append((wts[sel][:, None] * wq).ravel())
                out_l.append(np.tile(xq, sel.sum()))
                out_pan.append(np.full(sel.sum() * order, q))
        pts = np.concatenate(out_p)
        wts = np.concatenate(out_w)
        lower = np.concatenate(out_l)
        panel = np.concatenate(out_pan)
    return pts, wts


def half_plane_grid(weight_sq, x_half: float = 7.5, height: float = 6.5,
                    nx: int = 96, ny: int = 64):
    """Tensor Gauss-Legendre nodes on ``[-x_half, x_half] x (0, height]``
    with weights multiplied by ``weight_sq``."""
    tx, wx = unit_gauss_legendre(nx)
    ty, wy = unit_gauss_legendre(ny)
    x = -x_half + 2 * x_half * tx
    y = height * ty
    z = (x[:, None] + 1j * y[None, :]).ravel()
    w = (2 * x_half * wx[:, None] * height * wy[None, :]).ravel() * weight_sq(z)
    return z, w
