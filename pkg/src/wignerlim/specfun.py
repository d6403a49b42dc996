"""Complex special functions used throughout the package.

Everything here is double precision and self-contained (the Hurwitz zeta
function borrows 40 decimal digits from ``decimal`` left of Re s = 0, where
the Euler-Maclaurin terms cancel heavily): a Lanczos gamma,
Euler-Maclaurin Hurwitz zeta (backing both the Riemann zeta function and
Dirichlet's beta), the modified Bessel function K_nu for real order,
the Jacobi theta function on the imaginary axis and the Dirichlet series
of Ramanujan's tau function.
"""

from __future__ import annotations

import cmath
import decimal
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import DomainError, PoleError

__all__ = [
    "SeriesResult",
    "ksum",
    "gamma",
    "rgamma",
    "hurwitz_zeta",
    "riemann_zeta",
    "dirichlet_beta",
    "bessel_k",
    "theta3_imag",
    "l_delta",
]

PI = math.pi
SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class SeriesResult:
    """A computed value with a heuristic bound on its absolute error."""

    value: complex
    abs_err_estimate: float
    terms_used: int = 0

    def __post_init__(self):
        if not (self.abs_err_estimate >= 0.0):
            raise ValueError("abs_err_estimate must be nonnegative")


def ksum(values: Iterable[complex]) -> complex:
    """Correctly rounded sum of complex numbers (``math.fsum`` per component)."""
    vals = list(values)
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))


def _is_nonpositive_integer(s: complex) -> bool:
    return s.imag == 0.0 and s.real <= 0.0 and s.real == math.floor(s.real)


def _sinpi(z: complex) -> complex:
    # argument reduction keeps sin(pi*n) exactly zero at integers
    r = z.real - 2.0 * round(z.real / 2.0)
    return cmath.sin(PI * complex(r, z.imag))


def _cospi(z: complex) -> complex:
    return _sinpi(z + 0.5)


# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _gamma_lanczos(s: complex) -> complex:
    z = s - 1.0
    x = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        x += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return SQRT_2PI * cmath.exp((z + 0.5) * cmath.log(t) - t) * x


def gamma(s: complex) -> complex:
    """Gamma function for complex ``s``.

    Lanczos approximation on Re s >= 1/2 and the reflection formula
    elsewhere. Raises :class:`PoleError` at 0, -1, -2, ...
    """
    s = complex(s)
    if _is_nonpositive_integer(s):
        raise PoleError(f"gamma has a pole at s = {s.real:g}")
    if s.real < 0.5:
        return PI / (_sinpi(s) * _gamma_lanczos(1.0 - s))
    return _gamma_lanczos(s)


def rgamma(s: complex) -> complex:
    """Reciprocal gamma 1/Gamma(s); entire, exactly zero at the poles of gamma."""
    s = complex(s)
    if _is_nonpositive_integer(s):
        return 0j
    if s.real < 0.5:
        return _sinpi(s) * _gamma_lanczos(1.0 - s) / PI
    return 1.0 / _gamma_lanczos(s)


# B_2, B_4, ..., B_30
_BERNOULLI_EXACT = tuple(
    Fraction(n, d)
    for n, d in (
        (1, 6), (-1, 30), (1, 42), (-1, 30), (5, 66), (-691, 2730), (7, 6),
        (-3617, 510), (43867, 798), (-174611, 330), (854513, 138),
        (-236364091, 2730), (8553103, 6), (-23749461029, 870),
        (8615841276005, 14322),
    )
)
_BERNOULLI = tuple(float(b) for b in _BERNOULLI_EXACT)


def _em_cutoff(s: complex, n_direct: int) -> int:
    return max(n_direct, int(abs(s)) + 1)


def _neg_pow(x: float, s: complex) -> complex:
    """x^(-s); the real case goes through pow, which is within an ulp."""
    if s.imag == 0.0:
        return complex(x ** -s.real)
    return cmath.exp(-s * math.log(x))


def _hurwitz_em(s: complex, a: float, n_direct: int, n_bernoulli: int, singular: bool = True):
    """Euler-Maclaurin evaluation; returns ``(value, size of first omitted term)``.

    With ``singular=False`` the term (n + a)^(1-s)/(s-1) carrying the pole
    is left out so that differences can combine it analytically.
    """
    n_bernoulli = min(n_bernoulli, len(_BERNOULLI) - 1)
    n = _em_cutoff(s, n_direct)
    terms = [_neg_pow(k + a, s) for k in range(n)]
    x = n + a
    x_ms = _neg_pow(x, s)
    if singular:
        terms.append(x * x_ms / (s - 1.0))
    terms.append(0.5 * x_ms)
    # B_{2j}/(2j)! * s(s+1)...(s+2j-2) * x^{-s-2j+1}
    rising = s
    fact = 2.0
    xpow = x_ms / x
    tail = 0.0
    for j in range(1, n_bernoulli + 2):
        term = _BERNOULLI[j - 1] / fact * rising * xpow
        if j == n_bernoulli + 1:
            tail = abs(term)
            break
        terms.append(term)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        fact *= (2 * j + 1) * (2 * j + 2)
        xpow /= x * x
    return ksum(terms), tail


_DEC_PREC = 40
_DEC_PI = decimal.Decimal("3.14159265358979323846264338327950288419716939937510582097494")


def _dec_sincos(x: decimal.Decimal) -> tuple[decimal.Decimal, decimal.Decimal]:
    two_pi = 2 * _DEC_PI
    x = x - two_pi * (x / two_pi).to_integral_value(rounding=decimal.ROUND_FLOOR)
    if x > _DEC_PI:
        x -= two_pi
    x2 = x * x
    s = term = x
    c = cterm = decimal.Decimal(1)
    k = 1
    eps = decimal.Decimal(10) ** (-_DEC_PREC - 2)
    while abs(term) > eps or abs(cterm) > eps:
        term = -term * x2 / ((2 * k) * (2 * k + 1))
        cterm = -cterm * x2 / ((2 * k - 1) * (2 * k))
        s += term
        c += cterm
        k += 1
    return s, c


def _hurwitz_em_decimal(s: complex, a: float, n_direct: int, n_bernoulli: int) -> complex:
    """The Euler-Maclaurin sum of :func:`_hurwitz_em` carried out in decimal arithmetic."""
    D = decimal.Decimal
    with decimal.localcontext() as ctx:
        ctx.prec = _DEC_PREC
        sr, si = D(s.real), D(s.imag)

        def npow(x: D) -> tuple[D, D]:
            # x^(-s) = exp(-sr L) (cos(si L) - i sin(si L)), L = log x
            L = x.ln()
            m = (-sr * L).exp()
            if si == 0:
                return m, D(0)
            sn, cs = _dec_sincos(si * L)
            return m * cs, -m * sn

        n = _em_cutoff(s, n_direct)
        da = D(a)
        re = im = D(0)
        for k in range(n):
            pr, pi_ = npow(da + k)
            re += pr
            im += pi_
        x = da + n
        xr, xi = npow(x)
        # x^(1-s)/(s-1) = x * x^(-s) * conj(s-1)/|s-1|^2
        den = (sr - 1) ** 2 + si**2
        ur, ui = x * xr, x * xi
        re += (ur * (sr - 1) + ui * si) / den
        im += (ui * (sr - 1) - ur * si) / den
        re += xr / 2
        im += xi / 2
        # Bernoulli corrections: B_2j/(2j)! * (s)_{2j-1} * x^(-s-2j+1)
        rr, ri = sr, si
        pr, pi_ = xr / x, xi / x
        fact = D(2)
        for j in range(1, min(n_bernoulli, len(_BERNOULLI_EXACT)) + 1):
            b = D(_BERNOULLI_EXACT[j - 1].numerator) / D(_BERNOULLI_EXACT[j - 1].denominator) / fact
            cr = rr * pr - ri * pi_
            ci = rr * pi_ + ri * pr
            re += b * cr
            im += b * ci
            for m in (2 * j - 1, 2 * j):
                rr, ri = rr * (sr + m) - ri * si, rr * si + ri * (sr + m)
            fact *= (2 * j + 1) * (2 * j + 2)
            pr, pi_ = pr / (x * x), pi_ / (x * x)
        return complex(float(re), float(im))


def hurwitz_zeta(s: complex, a: float = 1.0, n_direct: int = 20, n_bernoulli: int = 12) -> complex:
    """Hurwitz zeta function zeta(s, a) for 0 < a <= 1.

    ``n_direct`` terms are summed explicitly (raised to ``|s|`` when that is
    larger) and ``n_bernoulli`` Euler-Maclaurin corrections are applied.
    """
    s = complex(s)
    if not 0.0 < a <= 1.0:
        raise DomainError("hurwitz_zeta requires 0 < a <= 1")
    if s == 1.0:
        raise PoleError("hurwitz_zeta has a pole at s = 1")
    if s.real < 0.0:
        return _hurwitz_em_decimal(s, a, n_direct, n_bernoulli)
    return _hurwitz_em(s, a, n_direct, n_bernoulli)[0]


def riemann_zeta(s: complex) -> complex:
    """Riemann zeta function; functional equation used for Re s < 0."""
    s = complex(s)
    if s == 1.0:
        raise PoleError("riemann_zeta has a pole at s = 1")
    if s.real < 0.0:
        t = 1.0 - s
        return (
            cmath.exp(s * math.log(2.0) + (s - 1.0) * math.log(PI))
            * _sinpi(s / 2.0)
            * gamma(t)
            * hurwitz_zeta(t, 1.0)
        )
    return hurwitz_zeta(s, 1.0)


def dirichlet_beta(s: complex) -> complex:
    """Dirichlet beta function, the L-series of the character mod 4."""
    s = complex(s)
    if s.real < 0.0:
        t = 1.0 - s
        return (
            cmath.exp((s - 1.0) * math.log(PI / 2.0))
            * _cospi(s / 2.0)
            * gamma(t)
            * dirichlet_beta(t)
        )
    scale = cmath.exp(-s * math.log(4.0))
    return scale * _hurwitz_difference(s, 0.25, 0.75)


def _expm1_over(u: complex, ell: float) -> complex:
    """(exp(u * ell) - 1) / u, continuous at u = 0."""
    z = u * ell
    if abs(z) < 1e-4:
        return ell * (1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0)
    return (cmath.exp(z) - 1.0) / u


def _hurwitz_difference(s: complex, a: float, b: float, n_direct: int = 20, n_bernoulli: int = 12) -> complex:
    """zeta(s, a) - zeta(s, b); entire in s, the two poles cancel analytically."""
    va, _ = _hurwitz_em(s, a, n_direct, n_bernoulli, singular=False)
    vb, _ = _hurwitz_em(s, b, n_direct, n_bernoulli, singular=False)
    n = _em_cutoff(s, n_direct)
    u = 1.0 - s
    # [(n+a)^u - (n+b)^u] / (s - 1) = -(n+b)^u * expm1(u log((n+a)/(n+b))) / u
    yb = cmath.exp(u * math.log(n + b))
    sing = -yb * _expm1_over(u, math.log((n + a) / (n + b)))
    return va - vb + sing


# ---------------------------------------------------------------------------
# Modified Bessel function of the second kind, real order.

BESSEL_SERIES_MAX = 2.0
BESSEL_ASYMPTOTIC_MIN = 18.0

# Taylor coefficients of 1/Gamma(z) around 0, index k <-> z**k
_RGAMMA_TAYLOR = (
    0.0, 1.0, 0.57721566490153286061, -0.65587807152025388108,
    -0.042002635034095235529, 0.1665386113822914895, -0.042197734555544336748,
    -0.0096219715278769735621, 0.0072189432466630995424,
    -0.0011651675918590651121, -0.00021524167411495097282,
    0.00012805028238811618615, -0.000020134854780788238656,
    -1.2504934821426706573e-6, 1.1330272319816958824e-6,
    -2.0563384169776071035e-7, 6.1160951044814158179e-9,
    5.0020076444692229301e-9, -1.1812745704870201446e-9,
    1.0434267116911005105e-10, 7.782263439905071254e-12,
    -3.6968056186422057082e-12, 5.100370287454475979e-13,
    -2.0583260535665067832e-14, -5.3481225394230179824e-15,
    1.2267786282382607902e-15, -1.1812593016974587695e-16,
)


def _temme_gammas(mu: float):
    """gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu), gam2 = mean of the two, and both reciprocals."""
    gam1 = 0.0
    gam2 = 0.0
    m2 = mu * mu
    p = 1.0
    for k in range(2, len(_RGAMMA_TAYLOR), 2):
        gam1 -= _RGAMMA_TAYLOR[k] * p
        gam2 += _RGAMMA_TAYLOR[k - 1] * p
        p *= m2
    gampl = gam2 - mu * gam1  # 1/Gamma(1 + mu)
    gammi = gam2 + mu * gam1  # 1/Gamma(1 - mu)
    return gam1, gam2, gampl, gammi


def _split_order(nu: float):
    nl = int(nu + 0.5)
    return nl, nu - nl


def _recur_up(kmu: float, k1: float, mu: float, nl: int, x: float) -> float:
    for i in range(1, nl + 1):
        kmu, k1 = k1, (mu + i) * (2.0 / x) * k1 + kmu
    return kmu


def _bessel_k_series(nu: float, x: float) -> float:
    """Temme's series for K_mu, K_mu+1 with |mu| <= 1/2, then upward recurrence."""
    nl, mu = _split_order(nu)
    gam1, gam2, gampl, gammi = _temme_gammas(mu)
    d = -math.log(x / 2.0)
    e = mu * d
    fact = 1.0 if abs(mu) < 1e-15 else PI * mu / math.sin(PI * mu)
    fact2 = 1.0 if abs(e) < 1e-15 else math.sinh(e) / e
    ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
    total = ff
    ee = math.exp(e)
    p = 0.5 * ee / gampl
    q = 0.5 / (ee * gammi)
    c = 1.0
    dd = 0.25 * x * x
    total1 = p
    for i in range(1, 500):
        ff = (i * ff + p + q) / (i * i - mu * mu)
        c *= dd / i
        p /= i - mu
        q /= i + mu
        delta = c * ff
        total += delta
        total1 += c * (p - i * ff)
        if abs(delta) < abs(total) * 1e-17:
            break
    return _recur_up(total, total1 * 2.0 / x, mu, nl, x)


def _bessel_k_cf(nu: float, x: float) -> float:
    """Steed's continued fraction (CF2) for K_mu, K_mu+1, then upward recurrence."""
    nl, mu = _split_order(nu)
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25 - mu * mu
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 10000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < 1e-17:
            break
    h = a1 * h
    kmu = math.sqrt(PI / (2.0 * x)) * math.exp(-x) / s
    k1 = kmu * (mu + x + 0.5 - h) / x
    return _recur_up(kmu, k1, mu, nl, x)


def _bessel_k_asymptotic(nu: float, x: float) -> float:
    """Large-x expansion, truncated at its smallest term."""
    four_nu2 = 4.0 * nu * nu
    term = 1.0
    total = 1.0
    prev = math.inf
    for k in range(1, 200):
        term *= (four_nu2 - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if term == 0.0:
            break
        if abs(term) >= prev:
            break
        total += term
        prev = abs(term)
        if abs(term) < 1e-17 * abs(total):
            break
    return math.sqrt(PI / (2.0 * x)) * math.exp(-x) * total


def _bessel_k_half_integer(nu: float, x: float) -> float:
    n = int(nu - 0.5)
    total = 0.0
    c = 1.0
    for k in range(n + 1):
        if k > 0:
            c *= (n + k) * (n - k + 1) / k
        total += c / (2.0 * x) ** k
    return math.sqrt(PI / (2.0 * x)) * math.exp(-x) * total


def bessel_k(nu: float, x: float) -> float:
    """Modified Bessel function K_nu(x) for real order and x > 0.

    K is even in the order so ``nu`` is replaced by ``|nu|``. Half-integer
    orders use the terminating elementary form; otherwise Temme's series is
    used for ``x <= 2``, Steed's continued fraction up to the asymptotic
    region and the large-argument expansion beyond it.
    """
    nu = abs(float(nu))
    x = float(x)
    if not x > 0.0:
        raise DomainError("bessel_k requires x > 0")
    if 2.0 * nu == math.floor(2.0 * nu) and int(2.0 * nu) % 2 == 1:
        return _bessel_k_half_integer(nu, x)
    if x <= BESSEL_SERIES_MAX:
        return _bessel_k_series(nu, x)
    if x >= max(BESSEL_ASYMPTOTIC_MIN, nu * nu):
        return _bessel_k_asymptotic(nu, x)
    return _bessel_k_cf(nu, x)


def _bessel_k_complex_order(nu: complex, x: float, h: float = 0.05) -> complex:
    """K_nu(x) for complex order via the trapezoidal rule on
    K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt."""
    nu = complex(nu)
    if nu.imag == 0.0:
        return complex(bessel_k(nu.real, x))
    a = abs(nu.real)
    t_max = 1.0
    while x * (math.cosh(t_max) - 1.0) - a * t_max < 60.0:
        t_max += 0.5
    t = np.arange(0.0, t_max + h, h)
    w = np.exp(-x * (np.cosh(t) - 1.0)) * np.cosh(nu * t)
    w[0] *= 0.5
    return complex(h * math.exp(-x) * w.sum())


# ---------------------------------------------------------------------------


def theta3_imag(t: float) -> float:
    """theta_3(i t) = sum over n of exp(-pi n^2 t), for t > 0.

    For t < 1 the modular transformation theta_3(i t) = t^(-1/2) theta_3(i/t)
    keeps the number of terms small.
    """
    t = float(t)
    if not t > 0.0:
        raise DomainError("theta3_imag requires t > 0")
    if t < 1.0:
        return theta3_imag(1.0 / t) / math.sqrt(t)
    return 1.0 + 2.0 * _theta3_tail(t)


def _theta3_tail(t: float) -> float:
    """sum_{n>=1} exp(-pi n^2 t) for t >= 1 (so theta_3 - 1 = 2 * tail)."""
    total = 0.0
    n = 1
    while True:
        term = math.exp(-PI * n * n * t)
        total += term
        if term < 1e-17 * total:
            return total
        n += 1


def _divisor_tail_bound(n_terms: int, sigma: float) -> float:
    """Upper bound on sum_{n > N} d(n) n^(11/2 - sigma) using D(x) <= x(log x + 1)."""
    a = sigma - 5.5
    big_n = float(n_terms)
    lead = big_n ** (1.0 - a)
    return a * lead * (math.log(big_n) / (a - 1.0) + 1.0 / (a - 1.0) ** 2 + 1.0 / (a - 1.0))


def l_delta(s: complex, n_terms: int) -> SeriesResult:
    """Partial sum of L_Delta(s) = sum tau(n)/n^s with a Deligne-type tail bound."""
    from .lattice import tau_table

    s = complex(s)
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    if s.real <= 6.5:
        raise DomainError("l_delta direct sum requires Re s > 13/2")
    tau = tau_table(n_terms).values
    terms = [int(tau[n]) * cmath.exp(-s * math.log(n)) for n in range(1, n_terms + 1)]
    return SeriesResult(ksum(terms), _divisor_tail_bound(n_terms, s.real), n_terms)
