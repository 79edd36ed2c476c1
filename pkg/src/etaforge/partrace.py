"""Parametric traces of spectrally explicit operator families.

Supported operators: the circle operator with spectrum {n + a : n in Z}
(a not an integer) and finite "point" models, either an explicit eigenvalue
list or a matrix family over the parameter space.  Scalar symbols F(D, mu)
are drawn from a small closed algebra of monomials
c * lam^a * t^b * (lam^2 + t)^{-k} in t = |mu|^2, which is closed under
products and d/dt, so canonical Taylor subtraction at mu0 = 0 and the
mu-derivative families stay analytic.

Eigenvalue sums run over a symmetric window with order-2 Euler-Maclaurin
tail corrections; the window escalates by factors of 4 until the tail
estimate clears tolerance.  Blocks are reduced in a fixed index order.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

import numpy as np

from .asymptotics import (
    DEFAULT_FIT,
    DEFAULT_LADDER,
    ExpansionModel,
    FitConfig,
    RadiusLadder,
    RegularizedValue,
    fit_expansion,
    regint_rp,
    regint_rp_radial,
)
from .errors import OrderError, TruncationError
from .forms import MatrixFamily
from .quadrature import SphereRule, gauss_legendre, sphere_rule

__all__ = [
    "hurwitz_zeta",
    "Kernel",
    "KernelMonomial",
    "kernel",
    "parse_kernel",
    "SpectralModel",
    "SpectralFamily",
    "TraceValue",
    "WindowConfig",
    "l2_trace",
    "tr_param",
    "tr_param_values",
    "l2_trace_values",
    "extended_trace",
    "formal_trace",
    "formal_trace_via_regint",
    "trace_expansion_model",
    "family_from_json",
]


# ---------------------------------------------------------------------------
# Hurwitz zeta by Euler-Maclaurin (valid for all s != 1, in particular s = 0)

_BERNOULLI = [
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
    Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510),
    Fraction(43867, 798), Fraction(-174611, 330),
]


def hurwitz_zeta(s: complex, a: float, n_direct: int = 48, n_correction: int = 8) -> complex:
    """zeta(s, a) = sum_{n>=0} (n+a)^{-s}, continued past Re s <= 1.

    Direct sum over n < N, then integral, midpoint, and Bernoulli
    corrections at N.  At s = 0 the correction terms vanish and the value
    1/2 - a is exact.
    """
    if a <= 0:
        raise ValueError("offset a must be positive")
    s = complex(s)
    if s == 1.0:
        raise ValueError("pole at s = 1")
    N = n_direct
    n = np.arange(N)
    direct = complex(np.sum((n + a) ** (-s)))
    x = N + a
    total = direct + x ** (1.0 - s) / (s - 1.0) + 0.5 * x ** (-s)
    poch = s
    for j in range(1, n_correction + 1):
        b = float(_BERNOULLI[j - 1])
        total += b / math.factorial(2 * j) * poch * x ** (-s - 2 * j + 1)
        poch = poch * (s + 2 * j - 1) * (s + 2 * j)
    if abs(s.imag) < 1e-300:
        return complex(total.real)
    return total


# ---------------------------------------------------------------------------
# Scalar symbol algebra


@dataclass(frozen=True)
class KernelMonomial:
    coef: complex
    lam_pow: int
    t_pow: int
    res_pow: int  # (lam^2 + t)^{-res_pow}

    @property
    def homogeneity(self) -> float:
        return self.lam_pow + 2 * self.t_pow - 2 * self.res_pow


@dataclass(frozen=True)
class Kernel:
    """Finite sum of monomials c lam^a t^b (lam^2+t)^{-k}; closed under
    products and d/dt."""

    monomials: tuple[KernelMonomial, ...]

    def eval(self, lam: np.ndarray, t: np.ndarray) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        t = np.asarray(t, dtype=float)
        out = np.zeros(np.broadcast_shapes(lam.shape, t.shape), dtype=complex)
        for m in self.monomials:
            term = np.full_like(out, m.coef)
            if m.lam_pow:
                term = term * lam ** m.lam_pow
            if m.t_pow:
                term = term * t ** m.t_pow
            if m.res_pow:
                term = term * (lam ** 2 + t) ** (-m.res_pow)
            out += term
        return out

    def dt(self) -> "Kernel":
        parts = []
        for m in self.monomials:
            if m.t_pow:
                parts.append(KernelMonomial(m.coef * m.t_pow, m.lam_pow, m.t_pow - 1, m.res_pow))
            if m.res_pow:
                parts.append(KernelMonomial(-m.coef * m.res_pow, m.lam_pow, m.t_pow, m.res_pow + 1))
        return Kernel(tuple(parts))

    def t_coefficient(self, m: int) -> Callable[[np.ndarray], np.ndarray]:
        """g_m with K(lam, t) = sum_m g_m(lam) t^m near t = 0."""
        parts = []
        for mono in self.monomials:
            mp = m - mono.t_pow
            if mp < 0:
                continue
            c = mono.coef
            for i in range(mp):  # binomial series of (lam^2+t)^{-k}
                c *= -(mono.res_pow + i) / (i + 1.0)
            if c != 0:
                parts.append((c, int(mono.lam_pow - 2 * mono.res_pow - 2 * mp)))

        def g(lam):
            lam = np.asarray(lam, dtype=float)
            out = np.zeros(lam.shape, dtype=complex)
            for c, e in parts:
                # integer exponent keeps negative lambda exact
                out += c * lam ** e
            return out

        return g

    @property
    def homogeneity(self) -> float:
        return max((m.homogeneity for m in self.monomials), default=-math.inf)

    def scale(self, c: complex) -> "Kernel":
        return Kernel(tuple(KernelMonomial(m.coef * c, m.lam_pow, m.t_pow, m.res_pow) for m in self.monomials))

    def __add__(self, other: "Kernel") -> "Kernel":
        return Kernel(self.monomials + other.monomials)

    def __mul__(self, other: "Kernel") -> "Kernel":
        out = []
        for m1 in self.monomials:
            for m2 in other.monomials:
                out.append(
                    KernelMonomial(
                        m1.coef * m2.coef,
                        m1.lam_pow + m2.lam_pow,
                        m1.t_pow + m2.t_pow,
                        m1.res_pow + m2.res_pow,
                    )
                )
        return Kernel(tuple(out))


def kernel(name: str, k: int) -> Kernel:
    """Named kernels: resolvent(k) = (lam^2+t)^{-k},
    eta_kernel(k) = lam (lam^2+t)^{-k}, weighted_eta(k) = t^{k-1} lam (lam^2+t)^{-k}."""
    if name == "resolvent":
        return Kernel((KernelMonomial(1.0, 0, 0, k),))
    if name == "eta_kernel":
        return Kernel((KernelMonomial(1.0, 1, 0, k),))
    if name == "weighted_eta":
        return Kernel((KernelMonomial(1.0, 1, k - 1, k),))
    raise KeyError(f"unknown kernel {name!r}")


_KERNEL_RE = re.compile(r"^\s*(\w+)\s*\(\s*(\d+)\s*\)\s*$")


def parse_kernel(spec: str) -> tuple[Kernel, float]:
    """Parse "name(k)" and return the kernel with its natural order."""
    m = _KERNEL_RE.match(spec)
    if not m:
        raise ValueError(f"cannot parse kernel spec {spec!r}")
    k = kernel(m.group(1), int(m.group(2)))
    return k, k.homogeneity


# ---------------------------------------------------------------------------
# Spectral models and families


@dataclass(frozen=True)
class SpectralModel:
    """Operator substrate: circle spectrum {n + a}, or a point model given by
    an explicit eigenvalue list or a direct matrix family."""

    kind: str  # "circle" | "point"
    a: float | None = None
    eigenvalues: tuple[float, ...] | None = None
    operator: MatrixFamily | None = None

    def __post_init__(self):
        if self.kind == "circle":
            if self.a is None or abs(self.a - round(self.a)) < 1e-12:
                raise ValueError("circle model needs a non-integer offset (invertible operator)")
        elif self.kind == "point":
            if self.eigenvalues is None and self.operator is None:
                raise ValueError("point model needs eigenvalues or a matrix family")
        else:
            raise ValueError(f"unknown spectral model kind {self.kind!r}")

    @property
    def dim_m(self) -> int:
        return 1 if self.kind == "circle" else 0

    @classmethod
    def circle(cls, a: float) -> "SpectralModel":
        return cls("circle", a=float(a))

    @classmethod
    def point_spectrum(cls, eigenvalues) -> "SpectralModel":
        return cls("point", eigenvalues=tuple(float(x) for x in eigenvalues))

    @classmethod
    def point_family(cls, operator: MatrixFamily) -> "SpectralModel":
        return cls("point", operator=operator)


@dataclass(frozen=True)
class SpectralFamily:
    """A(mu) = F(D, mu) with F = mu_pref * kernel(lam, |mu|^2).

    ``pref_power`` multiplies by mu[pref_index]^pref_power (used by the
    analytic mu-derivative families and by odd p = 1 symbols).  The declared
    order bounds |F| by C (1+|lam|+|mu|)^order.
    """

    base: SpectralModel
    kernel: Kernel | None
    order: float
    p: int
    clifford_rank: int = 1
    pref_index: int = 0
    pref_power: int = 0

    @property
    def dim_m(self) -> int:
        return self.base.dim_m

    @property
    def is_radial(self) -> bool:
        return self.pref_power == 0

    def minimal_taylor_order(self) -> int:
        return max(0, math.floor(self.order + self.dim_m) + 1)

    def order_consistent(self, n_samples: int = 64, seed: int = 0, bound: float = 50.0) -> bool:
        """Sampled check of |F(lam, mu)| <= C (1 + |lam| + |mu|)^order."""
        if self.kernel is None:
            return True
        rng = np.random.default_rng(seed)
        lam = rng.uniform(0.5, 100.0, n_samples) * rng.choice([-1.0, 1.0], n_samples)
        mu = rng.uniform(0.0, 100.0, (n_samples, self.p))
        vals = np.abs(
            (mu[:, self.pref_index] ** self.pref_power if self.pref_power else 1.0)
            * self.kernel.eval(lam, np.sum(mu ** 2, axis=1))
        )
        weight = (1.0 + np.abs(lam) + np.linalg.norm(mu, axis=1)) ** self.order
        return bool(np.all(vals <= bound * weight))

    def d_mu(self, j: int) -> "SpectralFamily":
        """Analytic mu_j-derivative family (radial kernels only)."""
        if self.kernel is None:
            op = self.base.operator
            return replace(self, base=SpectralModel.point_family(op.partial_family(j)), order=self.order - 1.0)
        if not self.is_radial:
            raise NotImplementedError("mu-derivative of a non-radial family")
        return replace(self, kernel=self.kernel.dt().scale(2.0), order=self.order - 1.0, pref_index=j, pref_power=1)

    def summand(self, lam: np.ndarray, mu: np.ndarray, n_subtract: int) -> np.ndarray:
        """Subtracted summand values, shape (M, L) for mu (M, p), lam (L,)."""
        lam = np.asarray(lam, dtype=float)
        mu = np.asarray(mu, dtype=float)
        t = np.sum(mu ** 2, axis=1)[:, None]
        pref = (mu[:, self.pref_index] ** self.pref_power)[:, None] if self.pref_power else 1.0
        vals = pref * self.kernel.eval(lam[None, :], t)
        if n_subtract > 0:
            m = 0
            while self.pref_power + 2 * m <= n_subtract - 1:
                g = self.kernel.t_coefficient(m)(lam)[None, :]
                vals = vals - pref * t ** m * g
                m += 1
        return vals

    def scalar_trace(self, mu: np.ndarray, n_subtract: int) -> np.ndarray:
        """Point-model trace (finite spectrum or direct family), shape (M,)."""
        mu = np.asarray(mu, dtype=float)
        if self.base.operator is not None:
            op = self.base.operator
            vals = np.trace(op(mu), axis1=-2, axis2=-1)
            if n_subtract >= 1:
                origin = np.zeros((1, self.p))
                vals = vals - np.trace(op(origin), axis1=-2, axis2=-1)[0]
            if n_subtract >= 2:
                if op.partials is None:
                    raise NotImplementedError("Taylor order >= 2 for a point family needs analytic partials")
                origin = np.zeros((1, self.p))
                for j in range(self.p):
                    dj = np.trace(op.partials[j](origin), axis1=-2, axis2=-1)[0]
                    vals = vals - dj * mu[:, j]
            if n_subtract >= 3:
                raise NotImplementedError("Taylor order >= 3 for point families is not supported")
            return vals
        lam = np.asarray(self.base.eigenvalues, dtype=float)
        return np.sum(self.summand(lam, mu, n_subtract), axis=1)


def family_from_json(data) -> SpectralFamily:
    """Family spec like {"base": {"kind": "circle", "a": 0.25},
    "F": "eta_kernel(2)", "order": -3, "clifford_k": 2, "p": 1}."""
    import json as _json

    if isinstance(data, str):
        data = _json.loads(data)
    base = data["base"]
    if base["kind"] == "circle":
        model = SpectralModel.circle(float(base["a"]))
    elif base["kind"] == "point":
        model = SpectralModel.point_spectrum(base["eigenvalues"])
    else:
        raise ValueError(f"unknown base kind {base['kind']!r}")
    kern, natural_order = parse_kernel(data["F"])
    order = float(data.get("order", natural_order))
    ck = data.get("clifford_k")
    rank = 2 ** (int(ck) - 1) if ck else 1
    return SpectralFamily(model, kern, order, int(data.get("p", 1)), clifford_rank=rank)


# ---------------------------------------------------------------------------
# Windowed eigenvalue sums with Euler-Maclaurin tails


@dataclass(frozen=True)
class WindowConfig:
    start: int = 4096
    cap: int = 1_048_576
    rtol: float = 1e-10
    atol: float = 1e-13
    lam_block: int = 8192
    mu_chunk: int = 1024


DEFAULT_WINDOW = WindowConfig()


@dataclass
class TraceValue:
    value: complex
    ambiguity_degree: int
    truncation: dict = field(default_factory=dict)


def _tail_quadrature(g, x0: float) -> np.ndarray:
    """int_{x0}^infty g via x = x0 / u on (0, 1]; g vectorized over points."""
    u, w = gauss_legendre(64)
    u = 0.5 * (u + 1.0)
    w = 0.5 * w
    acc = 0.0
    for ui, wi in zip(u, w):
        acc = acc + wi * g(x0 / ui) * x0 / ui ** 2
    return acc


def _em_tail(g, x0: float):
    """Order-2 Euler-Maclaurin tail sum_{n >= x0} g(n) with an error estimate
    from the next correction order."""
    integral = _tail_quadrature(g, x0)
    g0 = g(x0)
    h = 0.5
    g1 = (g(x0 + h) - g(x0 - h)) / (2.0 * h)
    g1b = (g(x0 + 0.5 * h) - g(x0 - 0.5 * h)) / h
    g1 = (4.0 * g1b - g1) / 3.0
    hh = max(1.0, x0 / 64.0)
    g3 = (g(x0 + 2 * hh) - 2 * g(x0 + hh) + 2 * g(x0 - hh) - g(x0 - 2 * hh)) / (2.0 * hh ** 3)
    tail = integral + 0.5 * g0 - g1 / 12.0
    est = np.abs(g3) / 720.0 * 2.0 + 1e-18 * np.abs(integral)
    return tail, est


def _circle_sum(fam: SpectralFamily, mu: np.ndarray, n_subtract: int, cfg: WindowConfig):
    a = fam.base.a
    mu = np.asarray(mu, dtype=float)
    total = np.zeros(len(mu), dtype=complex)
    est = np.zeros(len(mu))
    for lo in range(0, len(mu), cfg.mu_chunk):
        sl = slice(lo, min(lo + cfg.mu_chunk, len(mu)))
        chunk = mu[sl]
        N = cfg.start
        while True:
            n = np.arange(-N, N + 1)
            vals = np.zeros(len(chunk), dtype=complex)
            for b in range(0, len(n), cfg.lam_block):
                lam = n[b : b + cfg.lam_block] + a
                vals = vals + np.sum(fam.summand(lam, chunk, n_subtract), axis=1)
            x0 = float(N + 1)
            tp, ep = _em_tail(lambda x: fam.summand(np.atleast_1d(x + a), chunk, n_subtract)[:, 0], x0)
            tm, em = _em_tail(lambda x: fam.summand(np.atleast_1d(-x + a), chunk, n_subtract)[:, 0], x0)
            vals = vals + tp + tm
            errs = ep + em
            ok = errs <= np.maximum(cfg.rtol * np.abs(vals), cfg.atol)
            if np.all(ok):
                break
            if N >= cfg.cap:
                raise TruncationError(
                    f"tail estimate {float(np.max(errs)):.3e} above tolerance at the maximum "
                    f"eigenvalue window {cfg.cap}"
                )
            N = min(4 * N, cfg.cap)
        total[sl] = vals
        est[sl] = errs
    return total, est, N


def _trace_values(fam: SpectralFamily, mu: np.ndarray, n_subtract: int, cfg: WindowConfig):
    mu = np.asarray(mu, dtype=float)
    if mu.ndim == 1:
        mu = mu[None, :]
    if fam.base.kind == "point":
        vals = fam.scalar_trace(mu, n_subtract)
        return fam.clifford_rank * vals, np.zeros(len(mu)), 0
    vals, est, window = _circle_sum(fam, mu, n_subtract, cfg)
    return fam.clifford_rank * vals, fam.clifford_rank * est, window


def l2_trace_values(fam: SpectralFamily, mu: np.ndarray, cfg: WindowConfig = DEFAULT_WINDOW) -> np.ndarray:
    if fam.order + fam.dim_m >= 0:
        raise OrderError(
            f"trace-class trace needs order + dim_M < 0, got {fam.order} + {fam.dim_m}"
        )
    vals, _, _ = _trace_values(fam, mu, 0, cfg)
    return vals


def l2_trace(fam: SpectralFamily, mu, cfg: WindowConfig = DEFAULT_WINDOW) -> TraceValue:
    """Ordinary trace sum_n F(lam_n, mu); requires order + dim_M < 0."""
    mu = np.atleast_2d(np.asarray(mu, dtype=float))
    if fam.order + fam.dim_m >= 0:
        raise OrderError(
            f"trace-class trace needs order + dim_M < 0, got {fam.order} + {fam.dim_m}"
        )
    vals, est, window = _trace_values(fam, mu, 0, cfg)
    return TraceValue(complex(vals[0]), -1, {"window": window, "tail_estimate": float(est[0])})


def tr_param_values(
    fam: SpectralFamily, mu: np.ndarray, cfg: WindowConfig = DEFAULT_WINDOW
) -> np.ndarray:
    """Canonical symbol-valued trace at mu0 = 0 (Taylor subtraction with the
    minimal order), vectorized over parameter points."""
    n_sub = fam.minimal_taylor_order()
    vals, _, _ = _trace_values(fam, mu, n_sub, cfg)
    return vals


def tr_param(fam: SpectralFamily, mu, mu0=0.0, cfg: WindowConfig = DEFAULT_WINDOW) -> TraceValue:
    """The parametric trace: trace of A(mu) minus its Taylor polynomial of
    minimal degree at the star point mu0 = 0, defined modulo polynomials of
    that degree."""
    if np.any(np.asarray(mu0) != 0.0):
        raise NotImplementedError("the canonical representative is anchored at mu0 = 0")
    mu = np.atleast_2d(np.asarray(mu, dtype=float))
    n_sub = fam.minimal_taylor_order()
    vals, est, window = _trace_values(fam, mu, n_sub, cfg)
    return TraceValue(
        complex(vals[0]),
        n_sub - 1,
        {"window": window, "tail_estimate": float(est[0]), "taylor_order": n_sub},
    )


# ---------------------------------------------------------------------------
# Extended and formal traces


def trace_expansion_model(order: float, dim_m: int, depth: int = 8, logs: bool | None = None) -> ExpansionModel:
    """Default fitted-degree ladder for a trace of the given order:
    degrees order + dim_M - j, with a log slot at nonnegative integers."""
    start = order + dim_m
    if logs is None:
        logs = start >= 0
    terms = []
    for j in range(depth):
        d = start - j
        lmax = 1 if (logs and d >= -1e-9 and abs(d - round(d)) < 1e-9) else 0
        terms.append((float(d), lmax))
    return ExpansionModel.make(terms)


def extended_trace(
    fam: SpectralFamily,
    model: ExpansionModel,
    ladder: RadiusLadder = DEFAULT_LADDER,
    n_radial: int = 32,
    fit: FitConfig = DEFAULT_FIT,
    window: WindowConfig = DEFAULT_WINDOW,
    sphere: SphereRule | None = None,
) -> RegularizedValue:
    """Regularized integral over R^p of the parametric trace.

    The polynomial ambiguity of the trace is harmless here: the regularized
    integral of a polynomial vanishes, so the result carries none.
    """
    p = fam.p

    if fam.is_radial and p >= 2 and fam.base.kind == "circle":
        def g(r):
            pts = np.zeros((len(r), p))
            pts[:, 0] = r
            return tr_param_values(fam, pts, window)

        return regint_rp_radial(g, model, p, ladder, n_radial, fit)

    def f(x):
        return tr_param_values(fam, x, window)

    return regint_rp(f, model, p, ladder, sphere, n_radial, fit)


def formal_trace(
    fam: SpectralFamily,
    j: int,
    model: ExpansionModel,
    radii: RadiusLadder | np.ndarray = DEFAULT_LADDER,
    directions: SphereRule | None = None,
    fit: FitConfig = DEFAULT_FIT,
    window: WindowConfig = DEFAULT_WINDOW,
) -> complex:
    """Formal trace of omega = (-1)^{j-1} A dmu_1 ^ ... (dmu_j omitted) ... ^ dmu_p,
    with j counted from 1.

    Symbolic route: the sphere integral of the degree (1-p) homogeneous
    coefficient of the parametric trace of A itself against mu_j.  The
    polynomial ambiguity cannot reach this coefficient (degree 1-p <= 0, and
    a constant integrates to zero against mu_j), so the value is canonical.
    """
    p = fam.p
    rule = directions if directions is not None else sphere_rule(p, (24, 48) if p == 3 else 64)

    def f(x):
        return tr_param_values(fam, x, window)

    fitted = fit_expansion(f, model, p, radii=radii, directions=rule, cfg=fit)
    want = 1.0 - float(p)
    return fitted.integrate_coefficient(want, 0, fitted.directions[:, j - 1])


def formal_trace_via_regint(
    fam: SpectralFamily,
    j: int,
    model_of_derivative: ExpansionModel,
    ladder: RadiusLadder = DEFAULT_LADDER,
    n_radial: int = 32,
    fit: FitConfig = DEFAULT_FIT,
    window: WindowConfig = DEFAULT_WINDOW,
) -> complex:
    """Cross-route for the formal trace: the regularized integral of the
    parametric trace of the mu_j-derivative family (the exterior-derivative
    definition unwound on the top form)."""
    dfam = fam.d_mu(j - 1)

    def f(x):
        return tr_param_values(dfam, x, window)

    return regint_rp(f, model_of_derivative, fam.p, ladder, None, n_radial, fit).value
