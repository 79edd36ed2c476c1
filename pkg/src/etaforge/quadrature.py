"""Deterministic quadrature building blocks.

Radial integrals are composed from Gauss-Legendre panels laid out on a
geometric shell ladder; angular integrals use product rules on S^{p-1}
(endpoints for S^0, trapezoid on S^1, Gauss-Legendre x trapezoid on S^2,
double Gauss-Legendre x trapezoid in hyperspherical coordinates on S^3).
All reductions run in a fixed index order so results are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Callable

import numpy as np


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def panel_rule(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on the interval [a, b]."""
    x, w = gauss_legendre(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def geometric_ladder(r_min: float, r_max: float, count: int) -> np.ndarray:
    if not (0 < r_min < r_max) or count < 2:
        raise ValueError("ladder requires 0 < r_min < r_max and count >= 2")
    return np.exp(np.linspace(math.log(r_min), math.log(r_max), count))


def sphere_surface(p: int) -> float:
    """Surface measure of S^{p-1} in R^p."""
    return 2.0 * math.pi ** (p / 2.0) / math.gamma(p / 2.0)


@dataclass(frozen=True)
class SphereRule:
    """Point set on S^{p-1} with weights summing to the sphere surface."""

    p: int
    points: np.ndarray  # (M, p) unit vectors
    weights: np.ndarray  # (M,)

    def integrate(self, values: np.ndarray) -> complex:
        return complex(np.sum(self.weights * values))


def sphere_rule(p: int, resolution: int | tuple[int, int] = 48) -> SphereRule:
    """Quadrature on S^{p-1} for p in {1, 2, 3}.

    For p=3 the resolution is (n_polar, n_azimuthal); a single int n maps
    to (n, 2n).
    """
    if p == 1:
        pts = np.array([[1.0], [-1.0]])
        return SphereRule(1, pts, np.array([1.0, 1.0]))
    if p == 2:
        n = resolution if isinstance(resolution, int) else resolution[0]
        th = 2.0 * math.pi * np.arange(n) / n
        pts = np.stack([np.cos(th), np.sin(th)], axis=1)
        return SphereRule(2, pts, np.full(n, 2.0 * math.pi / n))
    if p == 3:
        if isinstance(resolution, int):
            n_t, n_ph = resolution, 2 * resolution
        else:
            n_t, n_ph = resolution
        t, wt = gauss_legendre(n_t)  # t = cos(theta)
        ph = 2.0 * math.pi * np.arange(n_ph) / n_ph
        wph = 2.0 * math.pi / n_ph
        st = np.sqrt(1.0 - t ** 2)
        T, PH = np.meshgrid(t, ph, indexing="ij")
        ST = np.sqrt(1.0 - T ** 2)
        pts = np.stack([ST * np.cos(PH), ST * np.sin(PH), T], axis=-1).reshape(-1, 3)
        w = (wt[:, None] * np.full(n_ph, wph)[None, :]).ravel()
        return SphereRule(3, pts, w)
    raise ValueError(f"sphere_rule supports p in 1..3, got {p}")


# ---------------------------------------------------------------------------
# Sphere charts for differential-form pullback (S^d embedded in R^{d+1}).


def sphere_chart(d: int, resolution=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Chart sample for S^d: ambient points X (M, d+1), Jacobians J (M, d+1, d),
    parameter weights W (M,).

    The pullback of a top form through these charts needs no extra metric
    factor; the Jacobian minors carry the full volume element.
    """
    if d == 1:
        n = resolution or 256
        th = 2.0 * math.pi * np.arange(n) / n
        X = np.stack([np.cos(th), np.sin(th)], axis=1)
        J = np.stack([-np.sin(th), np.cos(th)], axis=1)[:, :, None]
        W = np.full(n, 2.0 * math.pi / n)
        return X, J, W
    if d == 2:
        n_t, n_ph = resolution or (48, 96)
        xg, wg = gauss_legendre(n_t)
        th = 0.5 * math.pi * (xg + 1.0)
        wth = 0.5 * math.pi * wg
        ph = 2.0 * math.pi * np.arange(n_ph) / n_ph
        TH, PH = np.meshgrid(th, ph, indexing="ij")
        W = (wth[:, None] * np.full(n_ph, 2.0 * math.pi / n_ph)[None, :]).ravel()
        t, f = TH.ravel(), PH.ravel()
        X = np.stack([np.sin(t) * np.cos(f), np.sin(t) * np.sin(f), np.cos(t)], axis=1)
        J = np.zeros((len(t), 3, 2))
        J[:, 0, 0] = np.cos(t) * np.cos(f)
        J[:, 0, 1] = -np.sin(t) * np.sin(f)
        J[:, 1, 0] = np.cos(t) * np.sin(f)
        J[:, 1, 1] = np.sin(t) * np.cos(f)
        J[:, 2, 0] = -np.sin(t)
        return X, J, W
    if d == 3:
        n1, n2, n3 = resolution or (48, 48, 96)
        x1, w1 = gauss_legendre(n1)
        psi = 0.5 * math.pi * (x1 + 1.0)
        wpsi = 0.5 * math.pi * w1
        x2, w2 = gauss_legendre(n2)
        th = 0.5 * math.pi * (x2 + 1.0)
        wth = 0.5 * math.pi * w2
        ph = 2.0 * math.pi * np.arange(n3) / n3
        wph = np.full(n3, 2.0 * math.pi / n3)
        PS, TH, PH = np.meshgrid(psi, th, ph, indexing="ij")
        W = (wpsi[:, None, None] * wth[None, :, None] * wph[None, None, :]).ravel()
        s, t, f = PS.ravel(), TH.ravel(), PH.ravel()
        X = np.stack(
            [
                np.cos(s),
                np.sin(s) * np.cos(t),
                np.sin(s) * np.sin(t) * np.cos(f),
                np.sin(s) * np.sin(t) * np.sin(f),
            ],
            axis=1,
        )
        J = np.zeros((len(s), 4, 3))
        J[:, 0, 0] = -np.sin(s)
        J[:, 1, 0] = np.cos(s) * np.cos(t)
        J[:, 1, 1] = -np.sin(s) * np.sin(t)
        J[:, 2, 0] = np.cos(s) * np.sin(t) * np.cos(f)
        J[:, 2, 1] = np.sin(s) * np.cos(t) * np.cos(f)
        J[:, 2, 2] = -np.sin(s) * np.sin(t) * np.sin(f)
        J[:, 3, 0] = np.cos(s) * np.sin(t) * np.sin(f)
        J[:, 3, 1] = np.sin(s) * np.cos(t) * np.sin(f)
        J[:, 3, 2] = np.sin(s) * np.sin(t) * np.cos(f)
        return X, J, W
    raise ValueError(f"sphere_chart supports d in 1..3, got {d}")


def chart_minor_determinants(J: np.ndarray, index_tuple: tuple[int, ...]) -> np.ndarray:
    """det of the Jacobian rows selected by a strictly increasing index tuple."""
    return np.linalg.det(J[:, index_tuple, :])


def coarser_chart_resolution(d: int, resolution):
    if d == 1:
        n = resolution or 256
        return max(8, (2 * n) // 3)
    if d == 2:
        n_t, n_ph = resolution or (48, 96)
        return (max(6, (2 * n_t) // 3), max(8, (2 * n_ph) // 3))
    n1, n2, n3 = resolution or (48, 48, 96)
    return (max(6, (2 * n1) // 3), max(6, (2 * n2) // 3), max(8, (2 * n3) // 3))


# ---------------------------------------------------------------------------
# Cumulative shell integration on balls and half-lines. Every routine returns
# both the signed cumulative integral at the ladder radii and an
# absolute-value accumulation used downstream as a per-row noise floor.


def _shell_bounds(start: float, ladder: np.ndarray, inner: tuple[float, ...]) -> list[float]:
    bounds = [x for x in inner if start <= x < ladder[0]]
    if not bounds or bounds[0] > start:
        bounds = [start] + bounds
    # keep shell ratios <= 2 between the inner region and the first ladder radius
    r = bounds[-1]
    fill = []
    while ladder[0] / max(r, 1e-30) > 2.0 and r > 0:
        r = r * 2.0 if r > 0 else 1.0
        if r < ladder[0]:
            fill.append(r)
        else:
            break
    return bounds + fill + list(ladder)


DEFAULT_INNER = (0.0, 0.25, 0.5, 0.75, 1.0)


def cumulative_ball(
    f: Callable[[np.ndarray], np.ndarray],
    p: int,
    ladder: np.ndarray,
    sphere: SphereRule,
    n_radial: int = 32,
) -> tuple[np.ndarray, np.ndarray]:
    """I(R_j) = int_{|x|<=R_j} f(x) dx on the ladder, with |.|-accumulation.

    f maps an (M, p) point array to (M,) complex values.
    """
    bounds = _shell_bounds(0.0, ladder, DEFAULT_INNER)
    ladder_set = {float(r) for r in ladder}
    dirs, wdirs = sphere.points, sphere.weights
    out, aout = [], []
    re_parts, im_parts, abs_parts = [], [], []
    for i in range(len(bounds) - 1):
        r, wr = panel_rule(bounds[i], bounds[i + 1], n_radial)
        pts = (r[:, None, None] * dirs[None, :, :]).reshape(-1, p)
        vals = np.asarray(f(pts), dtype=complex).reshape(len(r), len(dirs))
        contrib = (wr * r ** (p - 1))[:, None] * wdirs[None, :] * vals
        re_parts.append(math.fsum(contrib.real.ravel().tolist()))
        im_parts.append(math.fsum(contrib.imag.ravel().tolist()))
        abs_parts.append(math.fsum(np.abs(contrib).ravel().tolist()))
        if float(bounds[i + 1]) in ladder_set:
            out.append(math.fsum(re_parts) + 1j * math.fsum(im_parts))
            aout.append(math.fsum(abs_parts))
    return np.array(out), np.array(aout)


def cumulative_radial(
    g: Callable[[np.ndarray], np.ndarray],
    p: int,
    ladder: np.ndarray,
    n_radial: int = 32,
) -> tuple[np.ndarray, np.ndarray]:
    """Radial reduction of cumulative_ball for g = g(|x|): carries the exact
    S^{p-1} surface factor."""
    surf = sphere_surface(p)
    bounds = _shell_bounds(0.0, ladder, DEFAULT_INNER)
    ladder_set = {float(r) for r in ladder}
    out, aout = [], []
    re_parts, im_parts, abs_parts = [], [], []
    for i in range(len(bounds) - 1):
        r, wr = panel_rule(bounds[i], bounds[i + 1], n_radial)
        contrib = wr * r ** (p - 1) * np.asarray(g(r), dtype=complex)
        re_parts.append(math.fsum(contrib.real.tolist()))
        im_parts.append(math.fsum(contrib.imag.tolist()))
        abs_parts.append(math.fsum(np.abs(contrib).tolist()))
        if float(bounds[i + 1]) in ladder_set:
            out.append(surf * (math.fsum(re_parts) + 1j * math.fsum(im_parts)))
            aout.append(surf * math.fsum(abs_parts))
    return np.array(out), np.array(aout)


def cumulative_halfline_out(
    g: Callable[[np.ndarray], np.ndarray],
    ladder: np.ndarray,
    n_radial: int = 32,
) -> tuple[np.ndarray, np.ndarray]:
    """J(b_j) = int_1^{b_j} g(x) dx on an outward ladder (b_j > 1)."""
    bounds = _shell_bounds(1.0, ladder, (1.0, 1.5))
    ladder_set = {float(r) for r in ladder}
    out, aout = [], []
    re_parts, im_parts, abs_parts = [], [], []
    for i in range(len(bounds) - 1):
        x, w = panel_rule(bounds[i], bounds[i + 1], n_radial)
        contrib = w * np.asarray(g(x), dtype=complex)
        re_parts.append(math.fsum(contrib.real.tolist()))
        im_parts.append(math.fsum(contrib.imag.tolist()))
        abs_parts.append(math.fsum(np.abs(contrib).tolist()))
        if float(bounds[i + 1]) in ladder_set:
            out.append(math.fsum(re_parts) + 1j * math.fsum(im_parts))
            aout.append(math.fsum(abs_parts))
    return np.array(out), np.array(aout)


def cumulative_halfline_in(
    g: Callable[[np.ndarray], np.ndarray],
    u_ladder: np.ndarray,
    n_radial: int = 32,
) -> tuple[np.ndarray, np.ndarray]:
    """K(u_j) = int_{1/u_j}^1 g(x) dx on an inward ladder indexed by u = 1/a.

    Panels never touch x = 0, so integrable endpoint singularities are fine.
    """
    a_vals = 1.0 / np.asarray(u_ladder, dtype=float)
    bounds = [1.0]
    # fill between 1 and the first a with ratio <= 2
    r = 1.0
    while r / a_vals[0] > 2.0:
        r *= 0.5
        if r > a_vals[0]:
            bounds.append(r)
    bounds = bounds + list(a_vals)
    a_set = {float(a) for a in a_vals}
    out, aout = [], []
    re_parts, im_parts, abs_parts = [], [], []
    for i in range(len(bounds) - 1):
        x, w = panel_rule(bounds[i + 1], bounds[i], n_radial)
        contrib = w * np.asarray(g(x), dtype=complex)
        re_parts.append(math.fsum(contrib.real.tolist()))
        im_parts.append(math.fsum(contrib.imag.tolist()))
        abs_parts.append(math.fsum(np.abs(contrib).tolist()))
        if float(bounds[i + 1]) in a_set:
            out.append(math.fsum(re_parts) + 1j * math.fsum(im_parts))
            aout.append(math.fsum(abs_parts))
    return np.array(out), np.array(aout)


def top_index_tuples(p: int, q: int):
    """Strictly increasing q-tuples from range(p)."""
    return list(combinations(range(p), q))
