"""Named identity checks run by ``wignerlim verify``.

Each check returns a :class:`CheckResult` whose ``value`` is the worst
observed deviation and ``tolerance`` the threshold it was held to.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import epstein, lattice, quadform, specfun, wigner
from .quadform import QuadForm, identity_form, make_form

__all__ = ["CheckResult", "CHECKS", "random_form", "run_checks"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""
    seconds: float = 0.0

    def to_json(self, timings: bool = False) -> dict:
        out = {
            "name": self.name,
            "status": "pass" if self.passed else "fail",
            "value": self.value,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }
        if timings:
            out["time"] = self.seconds
        return out


def random_form(d: int, rng: np.random.Generator, cond_max: float = 20.0) -> QuadForm:
    """Random positive definite form with condition number at most ``cond_max``."""
    while True:
        m = rng.normal(size=(d, d))
        a = m @ m.T + 0.5 * np.eye(d)
        w = np.linalg.eigvalsh(a)
        if w[-1] / w[0] <= cond_max:
            return make_form(a / np.exp(np.mean(np.log(w))))


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _result(name: str, worst: float, tol: float, detail: str = "") -> CheckResult:
    return CheckResult(name, bool(worst < tol), float(worst), tol, detail)


def _real_grid(d: int, n: int = 40) -> list[float]:
    # evenly spaced, shifted off the integers and half-integers
    return [float(x) for x in np.linspace(-0.9, d / 2 + 2.0, n) + 0.0137]


# ---------------------------------------------------------------------------


def check_cosh_identity(trials: int, rng) -> CheckResult:
    got = epstein.cosh_series(2).value.real
    return _result("cosh-identity", abs(got - (1 / 12 - 1 / (4 * math.pi))), 1e-12)


def check_gamma_reflection(trials: int, rng) -> CheckResult:
    worst = 0.0
    for _ in range(trials * 4):
        s = complex(rng.uniform(0.01, 0.99), rng.uniform(-20, 20))
        v = specfun.gamma(s) * specfun.gamma(1 - s) * specfun._sinpi(s) / math.pi
        worst = max(worst, abs(v - 1))
    return _result("gamma-reflection", worst, 1e-10)


def check_zeta_functional_equation(trials: int, rng) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        s = complex(rng.uniform(0.05, 0.95), rng.uniform(-20, 20))
        rhs = (2**s) * math.pi ** (s - 1) * specfun._sinpi(s / 2) * specfun.gamma(1 - s) * specfun.riemann_zeta(1 - s)
        worst = max(worst, _rel(specfun.riemann_zeta(s), rhs))
    return _result("zeta-functional-equation", worst, 1e-9)


def check_beta_functional_equation(trials: int, rng) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        s = complex(rng.uniform(0.05, 0.95), rng.uniform(-10, 10))
        rhs = (math.pi / 2) ** (-s) * specfun._sinpi(s / 2) * specfun.gamma(s) * specfun.dirichlet_beta(s)
        worst = max(worst, _rel(specfun.dirichlet_beta(1 - s), rhs))
    return _result("beta-functional-equation", worst, 1e-9)


def check_bessel_seam(trials: int, rng) -> CheckResult:
    worst = 0.0
    for nu in (0.0, 0.5, 1.0, 2.5):
        seam = max(specfun.BESSEL_ASYMPTOTIC_MIN, nu * nu)
        below = specfun.bessel_k(nu, seam * (1 - 1e-12))
        above = specfun.bessel_k(nu, seam * (1 + 1e-12))
        worst = max(worst, _rel(below, above))
    return _result("bessel-seam", worst, 1e-10)


def check_theta_modular(trials: int, rng) -> CheckResult:
    worst = 0.0
    for t in np.geomspace(0.1, 10.0, 25):
        lhs = specfun.theta3_imag(1 / t)
        worst = max(worst, abs(lhs - math.sqrt(t) * specfun.theta3_imag(t)) / lhs)
    return _result("theta-modular", worst, 1e-13)


def check_closed_forms(trials: int, rng) -> CheckResult:
    worst, where = 0.0, ""
    for d in (2, 4, 6, 8):
        for s in _real_grid(d):
            e = _rel(epstein.z_cubic_theta(d, s).value, epstein.z_closed_form(d, s))
            if e > worst:
                worst, where = e, f"d={d} s={s:.4f}"
    return _result("closed-forms", worst, 1e-9, where)


def check_dual_continuation(trials: int, rng) -> CheckResult:
    worst, where = 0.0, ""
    for d in (2, 3, 4, 5):
        for s in _real_grid(d):
            a = epstein.z_cubic_theta(d, s).value
            b = epstein.z_cubic_bessel(d, s).value
            e = abs(a - b) / (1 + abs(a))
            if e > worst:
                worst, where = e, f"d={d} s={s:.4f}"
    return _result("dual-continuation", worst, 1e-8, where)


def _random_s(d: int, rng) -> complex:
    while True:
        s = complex(rng.uniform(-1.0, d / 2 + 1.0), rng.uniform(-3.0, 3.0))
        if abs(s) > 0.1 and abs(s - d / 2) > 0.1:
            return s


def check_functional_equation(trials: int, rng) -> CheckResult:
    worst = 0.0
    for k in range(trials):
        Q = random_form(2 + k % 2, rng)
        for _ in range(5):
            worst = max(worst, epstein.functional_equation_residual(Q, _random_s(Q.dim, rng)))
    return _result("functional-equation", worst, 1e-7, f"{trials} forms x 5 s")


def check_residues(trials: int, rng) -> CheckResult:
    worst = 0.0
    for d in range(2, 7):
        for lam in (1.0, 0.5, 2.0, 3.7, 10.0):
            worst = max(worst, epstein.residue_probe(identity_form(d).scaled(lam)))
    return _result("residues", worst, 1e-6)


def check_surface_lemmas(trials: int, rng) -> CheckResult:
    worst = 0.0
    for k in range(trials):
        d = 2 + k % 3
        Q = random_form(d, rng)
        vol = math.pi ** (d / 2) / math.gamma(d / 2)
        got = quadform.surface_integral(d, quadform.form_power_integrand(Q, d / 2), symmetric=True).value.real
        worst = max(worst, _rel(got, 2 * vol / math.sqrt(Q.det)))
        b = rng.normal(size=(d, d))
        b = b + b.T
        got = quadform.surface_integral(d, quadform.form_power_integrand(Q, 1 + d / 2, b), symmetric=True).value.real
        exact = np.trace(b @ Q.inv_matrix) / math.sqrt(Q.det) * math.pi ** (d / 2) / math.gamma(1 + d / 2)
        worst = max(worst, abs(got - exact) / max(1.0, abs(exact)))
    for d in (2, 3, 4, 5):
        # one face of the cubic form: x_1 = 1, rest in [-1, 1]^(d-1)
        face = quadform.surface_integral(d, quadform.form_power_integrand(identity_form(d), d / 2), symmetric=True).value.real / (2 * d)
        worst = max(worst, _rel(face, math.pi ** (d / 2) / math.gamma(d / 2) / d))
    return _result("surface-lemmas", worst, 1e-7)


def check_v_zero(trials: int, rng) -> CheckResult:
    worst = 0.0
    for k in range(trials):
        Q = random_form(2 + k % 2, rng)
        r = quadform.v_q(Q, Q.dim / 2 - 1)
        worst = max(worst, abs(r.value) / max(10 * r.abs_err_estimate, 1e-12))
    return _result("v-zero", worst, 1.0, "|V(d/2-1)| relative to 10x its error estimate")


def check_strip_convergence(trials: int, rng) -> CheckResult:
    Q = identity_form(3)
    worst = 0.0
    for s in (0.75, 1.0, 1.25):
        L = wigner.sigma_limit(Q, s, N_list=list(range(20, 81, 10)))
        worst = max(worst, abs(L.value - epstein.z_cubic_theta(3, s).value))
    return _result("strip-convergence", worst, 1e-3)


def check_jump_d3(trials: int, rng) -> CheckResult:
    rep = wigner.jump_verify(identity_form(3))
    return _result("jump-d3", rep.discrepancy, 5e-3)


def check_jump_d4(trials: int, rng) -> CheckResult:
    exact = math.pi**2 / 6 - 8 * math.log(2)
    L = wigner.sigma_limit(identity_form(4), 1.0)
    e1 = abs(L.value - exact)
    e2 = abs(wigner.jump_cubic(4) + epstein.z_closed_form(4, 1.0) - exact)
    return CheckResult("jump-d4", e1 < 5e-3 and e2 < 1e-9, max(e1, e2), 5e-3, f"extrapolated {e1:.3g}, closed {e2:.3g} (tol 1e-9)")


def check_jump_general(trials: int, rng) -> CheckResult:
    worst = 0.0
    for d in (3, 4, 5, 6):
        worst = max(worst, abs(wigner.jump_general(identity_form(d)).value.real - wigner.jump_cubic(d)))
    for _ in range(trials):
        a, b = rng.uniform(0.2, 5.0, size=2)
        exact = -8 * (math.sqrt(b / a) * math.atan(math.sqrt(a / b)) + math.sqrt(a / b) * math.atan(math.sqrt(b / a)))
        got = quadform.v_q_prime_boundary(make_form(np.diag([a, b]))).value.real
        worst = max(worst, abs(got - exact))
    return _result("jump-general", worst, 1e-6)


def check_sigma_zero(trials: int, rng) -> CheckResult:
    worst = 0.0
    for k in range(trials):
        Q = random_form(2 + k % 3, rng)
        for N in (1, 2, 5, 17):
            worst = max(worst, abs(wigner.sigma_n(Q, N, 0).sigma_N + 1))
    return CheckResult("sigma-zero", worst == 0.0, worst, 0.0, "exact equality")


def check_hyperball(trials: int, rng) -> CheckResult:
    e1 = abs(wigner.sigma_hat_limit(identity_form(2), 2, 0.6).value - epstein.z_closed_form(2, 0.6))
    e2 = abs(wigner.sigma_hat_limit(identity_form(4), 2, 1.5).value - epstein.z_closed_form(4, 1.5))
    return _result("hyperball", max(e1, e2), 1e-2, f"d=2: {e1:.3g}, d=4: {e2:.3g}")


def check_counting_exponents(trials: int, rng) -> CheckResult:
    cases = [((2, 2.0, 2048), (0.4, 0.7)), ((4, 2.0, 512), (1.8, 2.2)), ((2, 4.0, 1024), (0.6, 0.9))]
    misses, detail = 0.0, []
    for (d, p, n), (lo, hi) in cases:
        lam = lattice.lambda_estimate(d, p, n)
        detail.append(f"d={d} p={p:g}: {lam:.4f}")
        misses = max(misses, lo - lam, lam - hi, 0.0)
    return CheckResult("counting-exponents", misses == 0.0, misses, 0.0, "; ".join(detail))


def check_z24(trials: int, rng) -> CheckResult:
    closed = epstein.z_closed_form(24, 11.0)
    theta = epstein.z_cubic_theta(24, 11.0).value
    tau = lattice.tau_table(3).values
    ok_tau = int(tau[2]) == -24 and int(tau[3]) == 252
    e = _rel(closed, theta)
    return CheckResult("z24", e < 1e-6 and ok_tau, e, 1e-6, f"tau(2)={int(tau[2])}, tau(3)={int(tau[3])}")


def check_lattice_identities(trials: int, rng) -> CheckResult:
    bad = 0
    r = {k: lattice.r_squares_table(k, 200).values for k in range(1, 9)}
    for i in range(1, 5):
        for j in range(1, 9 - i):
            conv = [sum(int(r[i][k]) * int(r[j][n - k]) for k in range(n + 1)) for n in range(201)]
            bad += conv != [int(v) for v in r[i + j]]
    for d in (2, 3, 4):
        K = 4
        total = sum(1 for N in range(1, K + 1) for _ in lattice.shell_iter(d, N)) + 1
        bad += total != (2 * K + 1) ** d
        spectrum = lattice.q_spectrum(identity_form(d), 30)
        table = lattice.r_squares_table(d, 30).values
        got = {int(round(float(k))): int(v) for k, v in zip(spectrum.keys, spectrum.values)}
        bad += got != {n: int(table[n]) for n in range(1, 31) if table[n]}
    return CheckResult("lattice-identities", bad == 0, float(bad), 0.0, "count of mismatched identities")


CHECKS: dict[str, Callable[[int, np.random.Generator], CheckResult]] = {
    "cosh-identity": check_cosh_identity,
    "gamma-reflection": check_gamma_reflection,
    "zeta-functional-equation": check_zeta_functional_equation,
    "beta-functional-equation": check_beta_functional_equation,
    "bessel-seam": check_bessel_seam,
    "theta-modular": check_theta_modular,
    "closed-forms": check_closed_forms,
    "dual-continuation": check_dual_continuation,
    "functional-equation": check_functional_equation,
    "residues": check_residues,
    "surface-lemmas": check_surface_lemmas,
    "v-zero": check_v_zero,
    "strip-convergence": check_strip_convergence,
    "jump-d3": check_jump_d3,
    "jump-d4": check_jump_d4,
    "jump-general": check_jump_general,
    "sigma-zero": check_sigma_zero,
    "hyperball": check_hyperball,
    "counting-exponents": check_counting_exponents,
    "z24": check_z24,
    "lattice-identities": check_lattice_identities,
}


def run_checks(names=None, trials: int = 25, seed: int = 20240601) -> list[CheckResult]:
    """Run the named checks (all by default) with a fixed seed per check."""
    names = list(CHECKS) if not names else list(names)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown check(s): {', '.join(unknown)}")
    out = []
    for name in names:
        rng = np.random.default_rng([seed, list(CHECKS).index(name)])
        t0 = time.perf_counter()
        try:
            res = CHECKS[name](trials, rng)
        except Exception as exc:  # a crashing check is a failed check
            res = CheckResult(name, False, math.inf, math.nan, f"{type(exc).__name__}: {exc}")
        res = CheckResult(res.name, res.passed, res.value, res.tolerance, res.detail, time.perf_counter() - t0)
        out.append(res)
    return out
