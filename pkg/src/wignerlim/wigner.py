"""Wigner limits: truncated lattice sums minus truncated integrals.

For a positive definite form Q and the cube region ||n||_inf <= N,

    alpha_N(s) = sum over 0 < ||n||_inf <= N of Q(n)^(-s)
    beta_N(s)  = integral of Q(x)^(-s) over ||x||_inf <= N + 1/2
    sigma_N(s) = alpha_N(s) - beta_N(s)

and sigma(s) is the limit N -> oo where it exists. The same construction
with p-norm balls gives the hatted variants.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import kernels
from .epstein import DEFAULT_CONFIG, ContinuationConfig, z_boundary_value, z_epstein
from .errors import BudgetExceeded, IllConditioned, PoleError, StripViolation
from .lattice import TruncationRegion, cube_square_counts, pball_volume, r_squares_table
from .quadform import QuadForm, SurfaceRule, form_power_integrand, surface_integral, surface_symmetry, v_q_prime_boundary
from .specfun import SeriesResult

__all__ = [
    "WignerEval",
    "LimitEstimate",
    "JumpReport",
    "alpha_n",
    "alpha_sweep",
    "beta_0",
    "beta_n",
    "sigma_n",
    "sigma_limit",
    "sigma_sweep",
    "jump_cubic",
    "jump_general",
    "jump_verify",
    "alpha_hat_n",
    "beta_hat_1",
    "beta_hat_n",
    "sigma_hat_limit",
    "default_lambda",
    "fit_power_tail",
]

_POLE_GUARD = 1e-8
# Above this many cube points a scalar form switches to exact shell counting.
_COUNTS_THRESHOLD = 4_000_000
_PBALL_BUDGET = 60_000_000


@dataclass(frozen=True)
class WignerEval:
    s: complex
    region: TruncationRegion
    alpha_N: complex
    beta_N: complex
    sigma_N: complex
    N: float


@dataclass(frozen=True)
class LimitEstimate:
    """Extrapolated limit of a sequence sampled at ``N_sequence``.

    ``model`` names the tail model; ``exponents`` lists the fitted powers of N.
    """

    value: complex
    model: str
    abs_err_estimate: float
    N_sequence: tuple
    exponents: tuple = ()
    notes: str = ""

    def __post_init__(self):
        seq = self.N_sequence
        if len(seq) < 4:
            raise ValueError("N_sequence needs at least 4 entries")
        if any(b <= a for a, b in zip(seq, seq[1:])):
            raise ValueError("N_sequence must be strictly increasing")


# ---------------------------------------------------------------------------
# Cube sums


def _pow_real_or_complex(base: float, expo: complex) -> complex:
    if expo.imag == 0.0:
        return complex(base**expo.real)
    return cmath.exp(expo * math.log(base))


def _counts_sum(d: int, N: int, s: complex, lam: float) -> complex:
    c = cube_square_counts(d, N)
    v = np.nonzero(c)[0]
    v = v[v > 0]
    cnt = c[v].astype(float)
    if s.imag == 0.0:
        total = complex(math.fsum(cnt * v.astype(float) ** (-s.real)))
    else:
        terms = cnt * np.exp(-s * np.log(v.astype(float)))
        total = complex(math.fsum(terms.real), math.fsum(terms.imag))
    return _pow_real_or_complex(lam, -s) * total


def alpha_sweep(Q: QuadForm, N_list: Sequence[int], s: complex) -> dict[int, complex]:
    """alpha_N(s) for every N in ``N_list``; one pass over the largest cube."""
    s = complex(s)
    Ns = sorted({int(N) for N in N_list})
    if not Ns or Ns[0] < 1:
        raise ValueError("N values must be >= 1")
    d = Q.dim
    if s == 0:
        return {N: complex((2 * N + 1) ** d - 1) for N in Ns}
    lam = Q.scalar_multiple()
    n_max = Ns[-1]
    if lam is not None and (n_max + 1) * (2 * n_max + 1) ** (d - 1) > _COUNTS_THRESHOLD:
        return {N: _counts_sum(d, N, s, lam) for N in Ns}
    shells = kernels.cube_shell_sums(np.ascontiguousarray(Q.matrix), s.real, s.imag, n_max)
    re = kernels.compensated_cumsum(np.ascontiguousarray(shells.real))
    im = kernels.compensated_cumsum(np.ascontiguousarray(shells.imag))
    return {N: complex(re[N], im[N]) for N in Ns}


def alpha_n(Q: QuadForm, N: int, s: complex) -> complex:
    """Sum of Q(n)^(-s) over 0 < ||n||_inf <= N."""
    return alpha_sweep(Q, [N], s)[int(N)]


@lru_cache(maxsize=256)
def _surface_q_power(matrix_bytes: bytes, d: int, s: complex, rule: SurfaceRule) -> SeriesResult:
    Q = QuadForm(np.frombuffer(matrix_bytes, dtype=float).reshape(d, d))
    return surface_integral(d, form_power_integrand(Q, s), rule, symmetric=True, **surface_symmetry(Q))


def _key(Q: QuadForm) -> bytes:
    return np.ascontiguousarray(Q.matrix).tobytes()


def beta_0(Q: QuadForm, s: complex, rule: SurfaceRule = SurfaceRule()) -> complex:
    """Integral of Q(x)^(-s) over [-1/2, 1/2]^d, continued meromorphically in s.

    Uses the homogeneity reduction to a surface integral over ||x||_inf = 1,
    which also supplies the continuation past Re s = d/2. At s = 0 the value
    is exactly 1.
    """
    s = complex(s)
    d = Q.dim
    if s == 0:
        return 1.0 + 0j
    if abs(s - d / 2) < _POLE_GUARD:
        raise PoleError("beta has a simple pole at s = d/2")
    surf = _surface_q_power(_key(Q), d, s, rule).value
    return _pow_real_or_complex(0.5, d - 2.0 * s) * surf / (d - 2.0 * s)


def beta_n(Q: QuadForm, N: int, s: complex, rule: SurfaceRule = SurfaceRule()) -> complex:
    """Integral of Q(x)^(-s) over ||x||_inf <= N + 1/2: (2N + 1)^(d - 2s) beta_0(s)."""
    s = complex(s)
    b0 = beta_0(Q, s, rule)
    if s == 0:
        return complex((2 * int(N) + 1) ** Q.dim)
    return _pow_real_or_complex(2.0 * N + 1.0, Q.dim - 2.0 * s) * b0


def sigma_n(Q: QuadForm, N: int, s: complex, rule: SurfaceRule = SurfaceRule()) -> WignerEval:
    s = complex(s)
    a = alpha_n(Q, N, s)
    b = beta_n(Q, N, s, rule)
    return WignerEval(s, TruncationRegion("cube", float(N)), a, b, a - b, float(N))


# ---------------------------------------------------------------------------
# Extrapolation


def sigma_sweep(
    Q: QuadForm, N_list: Sequence[int], s: complex, rule: SurfaceRule = SurfaceRule()
) -> list[tuple[int, complex, float]]:
    """(N, sigma_N(s), error bound) for each N, sharing one lattice pass.

    The bound combines the cubature error of beta_N with a rounding
    allowance of 16 ulp on |alpha_N| + |beta_N|.
    """
    s = complex(s)
    d = Q.dim
    Ns = sorted({int(N) for N in N_list})
    alphas = alpha_sweep(Q, Ns, s)
    if s == 0:
        return [(N, alphas[N] - beta_n(Q, N, s, rule), 0.0) for N in Ns]
    if abs(s - d / 2) < _POLE_GUARD:
        raise PoleError("sigma_N has a simple pole at s = d/2")
    surf = _surface_q_power(_key(Q), d, s, rule)
    out = []
    for N in Ns:
        scale = abs(_pow_real_or_complex(N + 0.5, d - 2.0 * s) / (d - 2.0 * s))
        b = beta_n(Q, N, s, rule)
        a = alphas[N]
        err = scale * surf.abs_err_estimate + 16 * 2.0**-52 * (abs(a) + abs(b))
        out.append((N, a - b, err))
    return out


def fit_power_tail(
    Ns: Sequence[float], values: Sequence[complex], exponents: Sequence[complex], cond_limit: float = 1e13
) -> tuple[complex, float]:
    """Least-squares fit values ~ L + sum_k c_k N^e_k; returns (L, error estimate).

    The error estimate is the largest fit residual plus the change in L when
    the smallest N is dropped and the fit repeated.
    """
    Ns = np.asarray(Ns, dtype=float)
    y = np.asarray(values, dtype=complex)
    exps = list(exponents)

    def solve(n, yy):
        cols = [np.ones_like(n, dtype=complex)]
        for e in exps:
            col = np.exp(complex(e) * np.log(n))
            cols.append(col / np.max(np.abs(col)))
        M = np.stack(cols, axis=1)
        cond = np.linalg.cond(M)
        if not np.isfinite(cond) or cond > cond_limit:
            raise IllConditioned(f"extrapolation matrix condition number {cond:.3g}")
        coef, *_ = np.linalg.lstsq(M, yy, rcond=None)
        return coef[0], np.max(np.abs(M @ coef - yy))

    L, resid = solve(Ns, y)
    stab = 0.0
    if len(Ns) - 1 > len(exps) + 1:
        L2, _ = solve(Ns[1:], y[1:])
        stab = abs(L - L2)
    return complex(L), float(resid + stab)


def _on_boundary(d: int, s: complex) -> bool:
    return s.imag == 0.0 and abs(s.real - (d / 2 - 1)) < 1e-12


def _cube_exponents(d: int, s: complex, n_terms: int) -> list[complex]:
    if _on_boundary(d, s):
        return [-1.0 - k for k in range(n_terms)]
    g = d - 2.0 * s - 2.0
    return [g - k for k in range(n_terms)]


def default_N_list(Q: QuadForm) -> list[int]:
    d = Q.dim
    if Q.scalar_multiple() is not None and d >= 4:
        return [40, 60, 80, 100, 120, 140, 160]
    return {1: [200, 400, 600, 800, 1000, 1200], 2: [100, 150, 200, 250, 300, 350, 400], 3: [40, 60, 80, 100, 120, 140, 160]}.get(
        d, [6, 8, 10, 12, 14, 16]
    )


def sigma_limit(
    Q: QuadForm,
    s: complex,
    rule: SurfaceRule = SurfaceRule(),
    N_list: Sequence[int] | None = None,
    n_terms: int = 3,
) -> LimitEstimate:
    """Extrapolate sigma_N(s) to N = oo on the closed-open strip d/2 - 1 <= Re s < d/2.

    The tail model is sigma + sum_k c_k N^(d - 2s - 2 - k); on the boundary
    the leading power N^0 is absent and the powers are -1, -2, ....
    """
    s = complex(s)
    d = Q.dim
    if not (d / 2 - 1 - 1e-12 <= s.real < d / 2):
        raise StripViolation(f"Re s = {s.real} outside [{d / 2 - 1}, {d / 2})")
    Ns = sorted(int(N) for N in (N_list if N_list is not None else default_N_list(Q)))
    if len(Ns) < 4:
        raise ValueError("N_list needs at least 4 values")
    alphas = alpha_sweep(Q, Ns, s)
    vals = [alphas[N] - beta_n(Q, N, s, rule) for N in Ns]
    k = max(1, min(n_terms, len(Ns) - 3))
    exps = _cube_exponents(d, s, k)
    L, err = fit_power_tail(Ns, vals, exps)
    model = "power_tail(" + ", ".join(f"{complex(e).real:.6g}" + (f"{complex(e).imag:+.6g}i" if complex(e).imag else "") for e in exps) + ")"
    return LimitEstimate(L, model, err, tuple(Ns), tuple(exps))


# ---------------------------------------------------------------------------
# Jumps


def jump_cubic(d: int) -> float:
    """(1/6) pi^(d/2) / Gamma(d/2 - 1); zero for d = 2 where 1/Gamma(0) = 0."""
    if d < 2:
        raise ValueError("d must be >= 2")
    if d == 2:
        return 0.0
    return math.pi ** (d / 2) / (6.0 * math.gamma(d / 2 - 1))


def jump_general(Q: QuadForm, rule: SurfaceRule = SurfaceRule()) -> SeriesResult:
    """-(d/2 - 1)/24 V_Q'(d/2 - 1)."""
    d = Q.dim
    if d == 2:
        return SeriesResult(0j, 0.0, 0)
    vp = v_q_prime_boundary(Q, rule)
    f = (d / 2 - 1) / 24.0
    return SeriesResult(complex(-f * vp.value.real), f * vp.abs_err_estimate, vp.terms_used)


@dataclass(frozen=True)
class JumpReport:
    """Both sides of sigma(d/2-1) - J = alpha(d/2-1) = lim sigma(d/2-1+eps)."""

    dim: int
    sigma_boundary: complex
    sigma_boundary_err: float
    jump: float
    lhs: complex
    rhs: complex
    eps_list: tuple
    sigma_eps: tuple
    eps_limit: complex
    discrepancy: float
    jump_err: float = 0.0

    def to_json(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            if isinstance(v, complex):
                out[k] = v.real if v.imag == 0 else [v.real, v.imag]
            elif isinstance(v, tuple):
                out[k] = [x.real if isinstance(x, complex) and x.imag == 0 else (list((x.real, x.imag)) if isinstance(x, complex) else x) for x in v]
            else:
                out[k] = v
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def boundary_alpha(Q: QuadForm, cfg: ContinuationConfig = DEFAULT_CONFIG) -> complex:
    """alpha(d/2 - 1) = Z_Q(d/2 - 1); scalar forms use the hyperbolic series."""
    d = Q.dim
    lam = Q.scalar_multiple()
    if lam is not None and d >= 2:
        return lam ** -(d / 2 - 1) * z_boundary_value(d, cfg).value
    return z_epstein(Q, d / 2 - 1, cfg).value


def jump_verify(
    Q: QuadForm,
    rule: SurfaceRule = SurfaceRule(),
    N_list: Sequence[int] | None = None,
    eps_list: Sequence[float] = (0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625),
    cfg: ContinuationConfig = DEFAULT_CONFIG,
) -> JumpReport:
    """Check sigma(d/2-1) - J = alpha(d/2-1) and lim_{eps->0+} sigma(d/2-1+eps) = alpha(d/2-1).

    The one-sided limit is a polynomial extrapolation in eps through the
    lattice-sum estimates at each eps.
    """
    d = Q.dim
    s0 = d / 2 - 1
    sb = sigma_limit(Q, s0, rule, N_list)
    if Q.scalar_multiple() == 1.0:
        J, J_err = jump_cubic(d), 0.0
    else:
        jg = jump_general(Q, rule)
        J, J_err = jg.value.real, jg.abs_err_estimate
    alpha = boundary_alpha(Q, cfg)
    eps = [float(e) for e in eps_list]
    sig = [sigma_limit(Q, s0 + e, rule, N_list).value for e in eps]
    if len(eps) >= 2:
        coef_r = np.polyfit(eps, [v.real for v in sig], len(eps) - 1)
        coef_i = np.polyfit(eps, [v.imag for v in sig], len(eps) - 1)
        eps_limit = complex(coef_r[-1], coef_i[-1])
    else:
        eps_limit = sig[0]
    lhs = sb.value - J
    disc = max(abs(lhs - alpha), abs(eps_limit - alpha))
    return JumpReport(d, sb.value, sb.abs_err_estimate, J, lhs, alpha, tuple(eps), tuple(sig), eps_limit, disc, J_err)


# ---------------------------------------------------------------------------
# p-norm balls


def _norm_p(X: np.ndarray, p: float) -> np.ndarray:
    A = np.abs(X)
    if math.isinf(p):
        return A.max(axis=1)
    if p == 2:
        return np.sqrt(np.einsum("ij,ij->i", A, A))
    return (A**p).sum(axis=1) ** (1.0 / p)


class _PBallPrefix:
    """Sorted norms and compensated prefix sums of Q(n)^(-s) over a p-ball."""

    def __init__(self, Q: QuadForm, p: float, s: complex, R: float):
        d = Q.dim
        s = complex(s)
        self.p = p
        self.R = R
        if Q.scalar_multiple() is not None and p == 2:
            lam = Q.scalar_multiple()
            M = int(math.floor(R * R * (1 + 1e-12)))
            r = r_squares_table(d, M).values
            v = np.nonzero(np.asarray(r, dtype=float))[0]
            v = v[v > 0]
            self.keys = v.astype(float)  # squared radii
            self.squared = True
            w = np.asarray(r, dtype=float)[v]
            terms = w * np.exp(-s * np.log(lam * self.keys)) if s.imag else w * (lam * self.keys) ** (-s.real)
        else:
            Ri = int(math.floor(R * (1 + 1e-12)))
            if (2 * Ri + 1) ** d > _PBALL_BUDGET:
                raise BudgetExceeded(f"p-ball enumeration box (2*{Ri}+1)^{d} exceeds budget")
            line = np.arange(-Ri, Ri + 1, dtype=float)
            X = np.stack(np.meshgrid(*([line] * d), indexing="ij"), axis=-1).reshape(-1, d)
            nrm = _norm_p(X, p)
            keep = (nrm <= R * (1 + 1e-12)) & (nrm > 0)
            X, nrm = X[keep], nrm[keep]
            q = np.einsum("ij,ij->i", X @ Q.matrix, X)
            terms = np.exp(-s * np.log(q)) if s.imag else q ** (-s.real)
            order = np.argsort(nrm, kind="stable")
            self.keys = nrm[order]
            self.squared = False
            terms = terms[order]
        terms = np.asarray(terms, dtype=complex)
        self.cum_re = kernels.compensated_cumsum(np.ascontiguousarray(terms.real))
        self.cum_im = kernels.compensated_cumsum(np.ascontiguousarray(terms.imag))

    def __call__(self, radii) -> np.ndarray:
        radii = np.asarray(radii, dtype=float)
        if np.any(radii > self.R * (1 + 1e-12)):
            raise ValueError("radius beyond the enumerated ball")
        key = radii * radii if self.squared else radii
        idx = np.searchsorted(self.keys, key * (1 + 1e-12), side="right")
        out = np.zeros(radii.shape, dtype=complex)
        pos = idx > 0
        out[pos] = self.cum_re[idx[pos] - 1] + 1j * self.cum_im[idx[pos] - 1]
        return out


def alpha_hat_n(Q: QuadForm, region: TruncationRegion, s: complex) -> complex:
    """Sum of Q(n)^(-s) over lattice points with 0 < ||n||_p <= N.

    Norms within 1e-12 relative of N count as inside, so a radius produced
    by float arithmetic (2.9999999999999996) still reaches the shell at 3.
    """
    if region.kind != "pball":
        raise ValueError("alpha_hat_n needs a p-ball region")
    return complex(_PBallPrefix(Q, region.p, s, region.N)([region.N])[0])


def _even_integer(p: float) -> bool:
    return math.isfinite(p) and p == math.floor(p) and int(p) % 2 == 0


@lru_cache(maxsize=128)
def _beta_hat_1_cached(matrix_bytes: bytes, d: int, p: float, s: complex, rule: SurfaceRule) -> complex:
    Q = QuadForm(np.frombuffer(matrix_bytes, dtype=float).reshape(d, d))
    qs = form_power_integrand(Q, s)
    expo = 2.0 * s - d

    def f(X):
        nrm = _norm_p(X, p)
        w = np.exp(expo * np.log(nrm)) if expo.imag else nrm**expo.real
        return qs(X) * w

    split = not (_even_integer(p) or math.isinf(p))
    return surface_integral(d, f, rule, symmetric=True, split_at_zero=split).value / (d - 2.0 * s)


def beta_hat_1(Q: QuadForm, p: float, s: complex, rule: SurfaceRule = SurfaceRule()) -> complex:
    """Integral of Q(x)^(-s) over the unit p-ball, continued in s.

    Radial projection from the cube faces gives
    (1/(d - 2s)) * surface integral of Q(y)^(-s) ||y||_p^(2s - d).
    """
    s = complex(s)
    d = Q.dim
    if s == 0:
        return complex(pball_volume(d, p, 1.0))
    if abs(s - d / 2) < _POLE_GUARD:
        raise PoleError("beta_hat has a simple pole at s = d/2")
    return _beta_hat_1_cached(_key(Q), d, float(p), s, rule)


def beta_hat_n(Q: QuadForm, region: TruncationRegion, s: complex, rule: SurfaceRule = SurfaceRule()) -> complex:
    s = complex(s)
    b1 = beta_hat_1(Q, region.p, s, rule)
    return _pow_real_or_complex(region.N, Q.dim - 2.0 * s) * b1


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def default_lambda(d: int, p: float) -> tuple[float, bool]:
    """Reference counting exponent and whether it rests on an unproven value."""
    if p == 2:
        if d == 2:
            return 0.5, True
        if d == 3:
            return 1.0, True
        return float(d - 2), False
    if math.isfinite(p) and p == math.floor(p) and p > d + 1:
        return (d - 1) * (1.0 - 1.0 / p), False
    return float(d - 1), False


def sigma_hat_limit(
    Q: QuadForm,
    p: float,
    s: complex,
    rule: SurfaceRule = SurfaceRule(),
    N_max: float = 400.0,
    n_grid: int = 4001,
    lam: float | None = None,
    blocks: int = 16,
) -> LimitEstimate:
    """Limit of alpha_hat_N - beta_hat_N over p-balls.

    The lattice-count error makes the sequence oscillate with amplitude
    ~ N^(lambda - 2 Re s) and no usable power-law structure, so the limit is
    the mean over radii in [N_max/2, N_max]. Radii follow a golden-ratio Weyl
    sequence: an evenly spaced grid lines up with lattice norms and biases the
    mean. The error estimate is twice the standard error of contiguous block
    means.
    """
    s = complex(s)
    d = Q.dim
    conditional = False
    if lam is None:
        lam, conditional = default_lambda(d, p)
    lo = max(d / 2 - 1, lam / 2)
    if not (lo < s.real < d / 2):
        raise StripViolation(f"Re s = {s.real} outside ({lo}, {d / 2}) for lambda = {lam}")
    if n_grid < 4 * blocks:
        raise ValueError("n_grid must be at least 4 * blocks")
    u = np.sort(np.mod((np.arange(n_grid) + 0.5) * _GOLDEN, 1.0))
    radii = N_max / 2 * (1.0 + u)
    prefix = _PBallPrefix(Q, p, s, N_max)
    b1 = beta_hat_1(Q, p, s, rule)
    vals = prefix(radii) - np.exp((d - 2.0 * s) * np.log(radii)) * b1
    L = complex(math.fsum(vals.real), math.fsum(vals.imag)) / n_grid
    means = np.array([b.mean() for b in np.array_split(vals, blocks)])
    err = 2.0 * float(np.std(means, ddof=1)) / math.sqrt(blocks)
    notes = f"lambda={lam:g}" + (" (conditional)" if conditional else "")
    return LimitEstimate(L, "window_mean", err, tuple(radii.tolist()), (), notes)
