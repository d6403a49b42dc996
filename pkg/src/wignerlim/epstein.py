"""Analytic continuation of Epstein zeta functions Z_Q(s) = sum' Q(n)^(-s).

Three independent routes are provided for the cubic form Q = x_1^2 + ... + x_d^2:
the incomplete-theta (Mellin) continuation, the modified Bessel double
series and, in even dimensions 2, 4, 6, 8 and 24, closed forms in terms of
zeta, beta and L_Delta. General positive definite forms use the two-sided
theta continuation with Theta_Q built from the lattice spectrum.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import DomainError, PoleError, TableTooSmall
from .lattice import CoeffTable, q_spectrum, r_squares_table
from .quadform import QuadForm, inverse_form
from .specfun import (
    SeriesResult,
    _bessel_k_complex_order,
    bessel_k,
    dirichlet_beta,
    gamma,
    ksum,
    l_delta,
    rgamma,
    riemann_zeta,
)

__all__ = [
    "ContinuationConfig",
    "z_cubic_theta",
    "z_cubic_bessel",
    "cosh_series",
    "z_boundary_value",
    "z_epstein",
    "completed_epstein",
    "functional_equation_residual",
    "residue_probe",
    "z_closed_form",
    "POLE_GUARD",
]

# Direct evaluation this close to s = d/2 is refused.
POLE_GUARD = 1e-8


@dataclass(frozen=True)
class ContinuationConfig:
    """Numerical knobs for the continuations.

    ``quad_points`` is the Gauss-Legendre order on each of ``quad_panels``
    panels covering the mapped half-line. ``spectrum_cutoff`` of None means
    "derive from ``theta_tail_tol``".
    """

    theta_tail_tol: float = 1e-17
    quad_points: int = 64
    quad_panels: int = 4
    bessel_m_max: int = 40
    bessel_n_max: int = 20
    spectrum_cutoff: float | None = None
    spectrum_budget: int = 20_000_000

    def __post_init__(self):
        for name in ("theta_tail_tol", "quad_points", "quad_panels", "bessel_m_max", "bessel_n_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.spectrum_cutoff is not None and not self.spectrum_cutoff > 0:
            raise ValueError("spectrum_cutoff must be positive")


DEFAULT_CONFIG = ContinuationConfig()


def _check_pole(d: int, s: complex) -> None:
    if abs(s - d / 2) < POLE_GUARD:
        raise PoleError(f"Z has a simple pole at s = d/2 = {d / 2}; use residue_probe")


# ---------------------------------------------------------------------------
# Half-line quadrature


@lru_cache(maxsize=16)
def _half_line_nodes(n: int, panels: int):
    """Nodes/weights for int_0^inf g(y) dy via y = u/(1-u), composite GL in u."""
    x, w = np.polynomial.legendre.leggauss(n)
    edges = np.linspace(0.0, 1.0, panels + 1) ** 2
    us, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        us.append(0.5 * (b - a) * x + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * w)
    u = np.concatenate(us)
    wu = np.concatenate(ws)
    y = u / (1.0 - u)
    wy = wu / (1.0 - u) ** 2
    return y, wy


def _mellin_tail(
    theta_m1: Callable[[np.ndarray], np.ndarray],
    a: float,
    scale: float,
    exponents: list[complex],
    cfg: ContinuationConfig,
) -> tuple[list[complex], float]:
    """int_a^inf theta_m1(t) t^(e-1) dt for each exponent e.

    ``theta_m1`` must decay at least like exp(-t / scale). The error estimate
    compares against a rule with half the panels.
    """
    out = []
    err = 0.0
    for panels in (cfg.quad_panels, max(1, cfg.quad_panels // 2)):
        y, wy = _half_line_nodes(cfg.quad_points, panels)
        t = a + scale * y
        base = theta_m1(t) * (scale * wy)
        logt = np.log(t)
        vals = []
        for e in exponents:
            e = complex(e)
            if e.imag == 0.0:
                pw = np.exp((e.real - 1.0) * logt)
            else:
                pw = np.exp((e - 1.0) * logt)
            vals.append(complex(np.dot(base, pw)))
        if not out:
            out = vals
        else:
            err = max(abs(u - v) for u, v in zip(out, vals))
    return out, err


# ---------------------------------------------------------------------------
# Cubic lattice: theta continuation


def _theta_power_m1(d: int, lam: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    """t -> theta_3(i lam t)^d - 1 for t > 0, without cancellation for lam t >= 1."""
    ns = np.arange(1, 8, dtype=float) ** 2

    def tail(y: np.ndarray) -> np.ndarray:
        return np.exp(-math.pi * np.outer(y, ns)).sum(axis=1)

    def f(t: np.ndarray) -> np.ndarray:
        y = lam * np.asarray(t, dtype=float)
        out = np.empty_like(y)
        big = y >= 1.0
        out[big] = np.expm1(d * np.log1p(2.0 * tail(y[big])))
        small = ~big
        if np.any(small):
            ys = y[small]
            # theta_3(i y) = y^(-1/2) theta_3(i / y)
            out[small] = np.exp(d * (np.log1p(2.0 * tail(1.0 / ys)) - 0.5 * np.log(ys))) - 1.0
        return out

    return f


def _cubic_bracket(d: int, s: complex, cfg: ContinuationConfig) -> tuple[complex, float]:
    """1/(s-d/2) + int_1^inf (theta^d - 1)(x^(s-1) + x^(d/2-s-1)) dx, without the -1/s term."""
    (i1, i2), err = _mellin_tail(_theta_power_m1(d), 1.0, 1.0 / math.pi, [s, d / 2 - s], cfg)
    return 1.0 / (s - d / 2) + i1 + i2, err


def z_cubic_theta(d: int, s: complex, cfg: ContinuationConfig = DEFAULT_CONFIG) -> SeriesResult:
    """Z_d(s) for the cubic lattice via the incomplete-theta continuation.

    Valid for every s except the pole at d/2. The Gamma factor is applied in
    reciprocal form so that s = 0 and negative integers are regular points.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    s = complex(s)
    _check_pole(d, s)
    bracket, err = _cubic_bracket(d, s, cfg)
    ps = cmath.exp(s * math.log(math.pi))
    value = ps * (rgamma(s) * bracket - rgamma(s + 1.0))
    err = abs(ps * rgamma(s)) * err + 1e-15 * abs(value)
    return SeriesResult(value, err, cfg.quad_points * cfg.quad_panels)


# ---------------------------------------------------------------------------
# Cubic lattice: Bessel double series


def _zeta_gamma_product(a: complex, d: int) -> complex:
    """Gamma(a) * zeta(2a - 2), finite where Gamma has poles (trivial zeros of zeta)."""
    if a.imag == 0.0 and a.real <= 0 and a.real == math.floor(a.real):
        k = int(-a.real)
        n = k + 1
        # zeta'(-2n) = (-1)^n (2n)! zeta(2n+1) / (2 (2 pi)^(2n))
        zprime = (-1) ** n * math.factorial(2 * n) * riemann_zeta(2 * n + 1).real / (2.0 * (2.0 * math.pi) ** (2 * n))
        return complex(2.0 * (-1) ** k * zprime / math.factorial(k))
    return gamma(a) * riemann_zeta(2.0 * a - 2.0)


def z_cubic_bessel(
    d: int,
    s: complex,
    cfg: ContinuationConfig = DEFAULT_CONFIG,
    r_table: CoeffTable | None = None,
) -> SeriesResult:
    """Z_d(s) from the modified Bessel double series (d >= 2).

    The Gamma(nu) zeta(2 nu - 2) factor, nu = (2s - d + 3)/2, is evaluated by its
    limit where Gamma has poles, since zeta vanishes there.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    s = complex(s)
    _check_pole(d, s)
    m_max, n_max = cfg.bessel_m_max, cfg.bessel_n_max
    if r_table is None:
        r_table = r_squares_table(d - 1, m_max + 1)
    elif r_table.dim != d - 1 or r_table.max_index < m_max:
        raise TableTooSmall(f"need r_{d - 1}(m) up to m = {m_max}")
    r = r_table.values
    nu = (2.0 * s - d + 3.0) / 2.0
    lead = 2.0 * d * rgamma(s + 1.0) * math.pi ** ((d - 1) / 2) * _zeta_gamma_product(nu, d)
    pref = 4.0 * d * cmath.exp((s + 1.0) * math.log(math.pi)) * rgamma(s + 1.0)

    def kfun(x: float) -> complex:
        if x > 700.0:
            return 0j
        if nu.imag == 0.0:
            return complex(bessel_k(nu.real, x))
        return _bessel_k_complex_order(nu, x)

    def row(m: int, n_hi: int) -> tuple[complex, complex]:
        sm = math.sqrt(m)
        terms = [kfun(2.0 * math.pi * n * sm) * cmath.exp(-(2.0 * s - d - 1.0) / 2.0 * math.log(n)) for n in range(1, n_hi + 2)]
        w = cmath.exp(-(d - 2.0 * s - 3.0) / 4.0 * math.log(m))
        return w * ksum(terms[:-1]), w * terms[-1]

    rows = []
    n_tail = 0.0
    for m in range(1, m_max + 1):
        if r[m] == 0:
            continue
        val, nxt = row(m, n_max)
        rows.append(int(r[m]) * val)
        n_tail += int(r[m]) * abs(nxt)
    m_tail = 0.0
    if len(r) > m_max + 1 and r[m_max + 1]:
        m_tail = int(r[m_max + 1]) * abs(row(m_max + 1, n_max)[0])
    double = pref * ksum(rows)
    value = lead + double
    # Geometric decay in both indices: omitted mass is a small multiple of the first omitted term.
    err = abs(pref) * 2.0 * (n_tail + m_tail) + 1e-15 * (abs(lead) + abs(double))
    return SeriesResult(value, err, m_max * n_max)


def cosh_series(d: int, tol: float = 1e-18) -> SeriesResult:
    """(1/2) sum_{m>=1} r_{d-1}(m) / (cosh(2 pi sqrt m) - 1).

    For d = 2 this is sum_{k>=1} 1/(cosh(2 pi k) - 1). Terms are summed until
    the next nonzero one is negligible; that term is the error estimate.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    M = 64
    while True:
        r = r_squares_table(d - 1, M).values
        terms = []
        last = 0.0
        for m in range(1, M + 1):
            if r[m] == 0:
                continue
            x = math.pi * math.sqrt(m)
            # cosh(2x) - 1 = 2 sinh(x)^2, no cancellation for small x.
            t = int(r[m]) / (4.0 * math.sinh(x) ** 2)
            terms.append(t)
            last = t
        total = math.fsum(terms)
        if last <= tol * max(total, 1e-300):
            return SeriesResult(complex(total), last, len(terms))
        M *= 2


def z_boundary_value(d: int, cfg: ContinuationConfig = DEFAULT_CONFIG) -> SeriesResult:
    """Z_d(d/2 - 1) from the hyperbolic-cosine series (d >= 2)."""
    hs = cosh_series(d)
    pref = 2.0 * d * math.pi ** (d / 2) / math.gamma(d / 2)
    value = pref * (-1.0 / 12.0 + hs.value.real)
    return SeriesResult(complex(value), pref * hs.abs_err_estimate + 1e-16 * abs(value), hs.terms_used)


# ---------------------------------------------------------------------------
# General forms


def _auto_cutoff(t_min: float, cfg: ContinuationConfig, d: int, det: float) -> float:
    if cfg.spectrum_cutoff is not None:
        return cfg.spectrum_cutoff
    # exp(-pi t c) * (number of points near Q = c) < tol, with a polynomial allowance.
    c = (-math.log(cfg.theta_tail_tol)) / (math.pi * t_min)
    for _ in range(4):
        c = (-math.log(cfg.theta_tail_tol) + (d / 2) * math.log(max(c, 1.0)) + max(0.0, -0.5 * math.log(det)) + 3.0) / (math.pi * t_min)
    return c


def _spectrum_theta(spectrum: CoeffTable) -> Callable[[np.ndarray], np.ndarray]:
    keys = np.asarray(spectrum.keys, dtype=float)
    mult = np.asarray(spectrum.values, dtype=float)

    def f(t: np.ndarray) -> np.ndarray:
        return np.exp(-math.pi * np.outer(t, keys)) @ mult

    return f


@lru_cache(maxsize=64)
def _spectrum_cached(matrix_bytes: bytes, d: int, cutoff: float, budget: int) -> CoeffTable:
    Q = QuadForm(np.frombuffer(matrix_bytes, dtype=float).reshape(d, d))
    return q_spectrum(Q, cutoff, budget)


def _theta_for(Q: QuadForm, t_min: float, cfg: ContinuationConfig):
    """Theta_Q(t) - 1 for t >= t_min and the decay scale of that function."""
    lam = Q.scalar_multiple()
    if lam is not None:
        return _theta_power_m1(Q.dim, lam), 1.0 / (math.pi * lam)
    cutoff = _auto_cutoff(t_min, cfg, Q.dim, Q.det)
    spectrum = _spectrum_cached(np.ascontiguousarray(Q.matrix).tobytes(), Q.dim, float(cutoff), cfg.spectrum_budget)
    if len(spectrum.keys) == 0:
        raise DomainError("spectrum cutoff below the lattice minimum; raise spectrum_cutoff")
    return _spectrum_theta(spectrum), 1.0 / (math.pi * float(spectrum.keys[0]))


def completed_epstein(
    Q: QuadForm, s: complex, cfg: ContinuationConfig = DEFAULT_CONFIG, split: float = 1.0
) -> SeriesResult:
    """Lambda_Q(s) = pi^(-s) Gamma(s) Z_Q(s) from the two-sided theta continuation.

    ``split`` is the point t0 where the Mellin integral is cut; the result
    does not depend on it, which makes it a useful numerical check.
    """
    s = complex(s)
    d = Q.dim
    _check_pole(d, s)
    if abs(s) < POLE_GUARD:
        raise PoleError("completed function has a pole at s = 0")
    val, err = _completed_parts(Q, s, cfg, split)
    return SeriesResult(val - split**s / s, err, cfg.quad_points * cfg.quad_panels)


def _completed_parts(Q: QuadForm, s: complex, cfg: ContinuationConfig, t0: float) -> tuple[complex, float]:
    """Everything in Lambda_Q(s) except the -t0^s/s term."""
    d = Q.dim
    rdet = 1.0 / math.sqrt(Q.det)
    th, sc = _theta_for(Q, t0, cfg)
    thi, sci = _theta_for(inverse_form(Q), 1.0 / t0, cfg)
    (i1,), e1 = _mellin_tail(th, t0, sc, [s], cfg)
    (i2,), e2 = _mellin_tail(thi, 1.0 / t0, sci, [d / 2 - s], cfg)
    pole = rdet * cmath.exp((s - d / 2) * math.log(t0)) / (s - d / 2)
    return pole + i1 + rdet * i2, e1 + rdet * e2


def z_epstein(
    Q: QuadForm, s: complex, cfg: ContinuationConfig = DEFAULT_CONFIG, split: float = 1.0
) -> SeriesResult:
    """Z_Q(s) for any positive definite form, valid for all s != d/2."""
    s = complex(s)
    d = Q.dim
    _check_pole(d, s)
    rest, err = _completed_parts(Q, s, cfg, split)
    ps = cmath.exp(s * math.log(math.pi))
    t0s = cmath.exp(s * math.log(split))
    value = ps * (rgamma(s) * rest - t0s * rgamma(s + 1.0))
    return SeriesResult(value, abs(ps * rgamma(s)) * err + 1e-15 * abs(value), cfg.quad_points * cfg.quad_panels)


def functional_equation_residual(
    Q: QuadForm, s: complex, cfg: ContinuationConfig = DEFAULT_CONFIG, split: float = 1.25
) -> float:
    """Relative mismatch of Lambda_Q(s) and Delta^(-1/2) Lambda_{Q^-1}(d/2 - s).

    Both sides are evaluated with the Mellin cut at ``split`` (not 1), so the
    two sides use different theta data and quadrature nodes.
    """
    s = complex(s)
    d = Q.dim
    lhs = completed_epstein(Q, s, cfg, split).value
    rhs = completed_epstein(inverse_form(Q), d / 2 - s, cfg, split).value / math.sqrt(Q.det)
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1e-300)


def residue_probe(Q: QuadForm, cfg: ContinuationConfig = DEFAULT_CONFIG, steps=(1e-3, 1e-4)) -> float:
    """Relative deviation of the Richardson-extrapolated h Z_Q(d/2 + h) from
    Delta^(-1/2) pi^(d/2) / Gamma(d/2)."""
    d = Q.dim
    h1, h2 = steps
    r1 = h1 * z_epstein(Q, d / 2 + h1, cfg).value
    r2 = h2 * z_epstein(Q, d / 2 + h2, cfg).value
    est = (h1 * r2 - h2 * r1) / (h1 - h2)
    exact = math.pi ** (d / 2) / math.gamma(d / 2) / math.sqrt(Q.det)
    return abs(est - exact) / exact


# ---------------------------------------------------------------------------
# Closed forms


def _expm1(z: complex) -> complex:
    """exp(z) - 1 without cancellation for small |z|."""
    x, y = z.real, z.imag
    em1 = math.expm1(x)
    half = math.sin(0.5 * y)
    # cos y - 1 = -2 sin^2(y/2)
    return complex(em1 * math.cos(y) - 2.0 * half * half, math.exp(x) * math.sin(y))


def _pow2(x: complex) -> complex:
    return cmath.exp(complex(x) * math.log(2.0))


def z_closed_form(d: int, s: complex, l_delta_terms: int = 200) -> complex:
    """Exact evaluation of the cubic Z_d(s) for d in {2, 4, 6, 8, 24}.

    Points where a pole of one factor meets a zero of another raise
    :class:`PoleError` except for the documented limit Z_4(1) = -8 log 2.
    """
    s = complex(s)
    if d == 2:
        return 4.0 * riemann_zeta(s) * dirichlet_beta(s)
    if d == 4:
        if s == 1:
            return complex(-8.0 * math.log(2.0))
        # 1 - 2^(2-2s) without cancellation near s = 1
        f = -_expm1((2.0 - 2.0 * s) * math.log(2.0))
        return 8.0 * f * riemann_zeta(s - 1.0) * riemann_zeta(s)
    if d == 6:
        return 16.0 * riemann_zeta(s - 2.0) * dirichlet_beta(s) - 4.0 * riemann_zeta(s) * dirichlet_beta(s - 2.0)
    if d == 8:
        return 16.0 * (1.0 - _pow2(1.0 - s) + _pow2(2.0 * (2.0 - s))) * riemann_zeta(s) * riemann_zeta(s - 3.0)
    if d == 24:
        if s.real <= 6.5:
            raise DomainError("Z_24 closed form needs L_Delta(s) with Re s > 13/2")
        zz = (16.0 / 691.0) * (_pow2(12.0 - 2.0 * s) - _pow2(1.0 - s) + 1.0) * riemann_zeta(s) * riemann_zeta(s - 11.0)
        ll = (128.0 / 691.0) * (259.0 + 745.0 * _pow2(4.0 - s) + 259.0 * _pow2(12.0 - 2.0 * s))
        return zz + ll * _l_delta_cached(s, l_delta_terms)
    raise ValueError("closed forms are available for d in {2, 4, 6, 8, 24}")


@lru_cache(maxsize=32)
def _l_delta_cached(s: complex, n_terms: int) -> complex:
    return l_delta(s, n_terms).value
