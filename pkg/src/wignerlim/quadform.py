"""Positive definite quadratic forms and cubature on the unit sup-norm sphere."""

from __future__ import annotations

import cmath
import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import CrossCheckFailure, NoConvergence, NotPositiveDefinite
from .specfun import SeriesResult, gamma

__all__ = [
    "QuadForm",
    "SurfaceRule",
    "QineqResult",
    "make_form",
    "identity_form",
    "q_value",
    "inverse_form",
    "b_matrix",
    "surface_integral",
    "surface_symmetry",
    "v_q",
    "v_q_prime_boundary",
    "qineqc_check",
    "form_power_integrand",
]


class QuadForm:
    """Q(x) = x^T A x for a symmetric positive definite matrix A.

    The constructor symmetrizes its input and caches the Cholesky factor
    (lower triangular, ``A = L @ L.T``), determinant, inverse and trace.
    Instances are immutable.
    """

    __slots__ = ("dim", "matrix", "chol", "det", "inv_matrix", "trace")

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError("quadratic form needs a square d x d matrix, d >= 1")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        a = 0.5 * (a + a.T)
        d = a.shape[0]
        chol = _cholesky(a)
        inv_l = np.linalg.inv(chol)
        inv = inv_l.T @ inv_l
        inv = 0.5 * (inv + inv.T)
        for arr in (a, chol, inv):
            arr.setflags(write=False)
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "chol", chol)
        object.__setattr__(self, "det", float(np.prod(np.diag(chol)) ** 2))
        object.__setattr__(self, "inv_matrix", inv)
        object.__setattr__(self, "trace", float(np.trace(a)))

    def __setattr__(self, name, value):
        raise AttributeError("QuadForm is immutable")

    def __repr__(self):
        return f"QuadForm(dim={self.dim}, matrix={self.matrix.tolist()!r})"

    def __call__(self, x) -> np.ndarray:
        return q_value(self, x)

    def scaled(self, lam: float) -> "QuadForm":
        return QuadForm(lam * self.matrix)

    def scalar_multiple(self):
        """Return c if A = c * I exactly, else None."""
        c = self.matrix[0, 0]
        if np.array_equal(self.matrix, c * np.eye(self.dim)):
            return float(c)
        return None

    def to_json(self) -> dict:
        return {"dim": self.dim, "matrix": self.matrix.tolist()}

    @classmethod
    def from_json(cls, obj) -> "QuadForm":
        if isinstance(obj, (str, bytes)):
            obj = json.loads(obj)
        form = cls(obj["matrix"])
        if "dim" in obj and int(obj["dim"]) != form.dim:
            raise ValueError(f"dim {obj['dim']} does not match matrix size {form.dim}")
        return form


def _cholesky(a: np.ndarray) -> np.ndarray:
    d = a.shape[0]
    L = np.zeros_like(a)
    for j in range(d):
        pivot = a[j, j] - np.dot(L[j, :j], L[j, :j])
        if not pivot > 0.0:
            raise NotPositiveDefinite(f"nonpositive pivot {pivot:.3g} at index {j}")
        L[j, j] = math.sqrt(pivot)
        for i in range(j + 1, d):
            L[i, j] = (a[i, j] - np.dot(L[i, :j], L[j, :j])) / L[j, j]
    return L


def make_form(entries) -> QuadForm:
    return QuadForm(entries)


def identity_form(d: int) -> QuadForm:
    return QuadForm(np.eye(d))


def q_value(Q: QuadForm, x) -> np.ndarray:
    """Evaluate x^T A x; ``x`` may be a single vector or an (n, d) array of rows."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != Q.dim:
        raise ValueError(f"expected vectors of length {Q.dim}")
    return np.einsum("...i,ij,...j->...", x, Q.matrix, x)


def inverse_form(Q: QuadForm) -> QuadForm:
    return QuadForm(Q.inv_matrix)


def b_matrix(Q: QuadForm, s: complex) -> np.ndarray:
    """B(s) = tr(A) A - 2 (s + 1) A^2."""
    a = Q.matrix
    return Q.trace * a.astype(complex) - 2.0 * (complex(s) + 1.0) * (a @ a)


# ---------------------------------------------------------------------------
# Cubature over {x : ||x||_inf = 1}


@dataclass(frozen=True)
class SurfaceRule:
    """Tensor Gauss-Legendre on each face; ``order`` doubles per refinement."""

    order: int = 12
    max_refinements: int = 4
    tol: float = 1e-10

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("order must be >= 2")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_refinements < 0:
            raise ValueError("max_refinements must be >= 0")


@lru_cache(maxsize=64)
def _gauss_legendre(n: int, split: bool):
    x, w = np.polynomial.legendre.leggauss(n)
    if split:
        x = np.concatenate([0.5 * (x - 1.0), 0.5 * (x + 1.0)])
        w = np.concatenate([0.5 * w, 0.5 * w])
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


_INNER_POINTS = 1 << 17


def _face_sum(d: int, f, nodes, weights, face: int, sign: float) -> complex:
    """Tensor-rule sum of f over the face x[face] = sign."""
    m = len(nodes)
    free = [j for j in range(d) if j != face]
    k = len(free)
    n_inner = 0
    while n_inner < k and m ** (n_inner + 1) <= _INNER_POINTS:
        n_inner += 1
    n_inner = max(n_inner, min(k, 1))
    inner_axes = free[k - n_inner:]
    outer_axes = free[: k - n_inner]
    if n_inner:
        grids = np.meshgrid(*([nodes] * n_inner), indexing="ij")
        inner_pts = np.stack([g.ravel() for g in grids], axis=1)
        wgrids = np.meshgrid(*([weights] * n_inner), indexing="ij")
        inner_w = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    else:
        inner_pts = np.zeros((1, 0))
        inner_w = np.ones(1)
    X = np.empty((inner_pts.shape[0], d))
    X[:, face] = sign
    if n_inner:
        X[:, inner_axes] = inner_pts
    partials = []
    for idx in itertools.product(range(m), repeat=len(outer_axes)):
        wo = 1.0
        for ax, i in zip(outer_axes, idx):
            X[:, ax] = nodes[i]
            wo *= weights[i]
        vals = np.asarray(f(X))
        partials.append(wo * complex(np.dot(inner_w, vals)))
    return complex(math.fsum(p.real for p in partials), math.fsum(p.imag for p in partials))


def _surface_once(d: int, f, order: int, symmetric: bool, split: bool, reflect: bool = False, permute: bool = False) -> complex:
    nodes, weights = _gauss_legendre(order, split)
    if reflect:
        # f even in each coordinate: each face is 2^(d-1) copies of [0, 1]^(d-1)
        nodes = 0.5 * (nodes + 1.0)
        weights = 0.5 * weights
        faces = [d - 1] if permute else range(d)
        mult = 2.0**d * (d if permute else 1)
        parts = [_face_sum(d, f, nodes, weights, j, 1.0) for j in faces]
        return mult * complex(math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts))
    parts = []
    for j in range(d):
        if symmetric:
            parts.append(2.0 * _face_sum(d, f, nodes, weights, j, 1.0))
        else:
            parts.append(_face_sum(d, f, nodes, weights, j, 1.0))
            parts.append(_face_sum(d, f, nodes, weights, j, -1.0))
    return complex(math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts))


def surface_integral(
    dim: int,
    f: Callable[[np.ndarray], np.ndarray],
    rule: SurfaceRule = SurfaceRule(),
    *,
    symmetric: bool = False,
    split_at_zero: bool = False,
    reflect: bool = False,
    permute: bool = False,
) -> SeriesResult:
    """Integrate ``f`` over the 2d faces of the cube [-1, 1]^d.

    ``f`` receives an (n, d) array of points and returns n values. With
    ``symmetric=True`` the caller asserts f(-x) = f(x) and only the faces
    x_j = +1 are evaluated. ``split_at_zero`` uses a composite rule with a
    break at 0 on every axis, for integrands with kinks there.
    ``reflect=True`` asserts f is even in every coordinate separately, so
    each face is integrated over [0, 1]^(d-1) only; ``permute=True``
    additionally asserts invariance under coordinate permutations, so a
    single face is evaluated.

    Raises :class:`NoConvergence` (carrying the last estimate) when the
    refinement budget runs out.
    """
    order = rule.order
    prev = _surface_once(dim, f, order, symmetric, split_at_zero, reflect, permute)
    points = order ** (dim - 1)
    diff = math.inf
    for _ in range(rule.max_refinements):
        order *= 2
        cur = _surface_once(dim, f, order, symmetric, split_at_zero, reflect, permute)
        points += order ** (dim - 1)
        diff = abs(cur - prev)
        prev = cur
        if diff < rule.tol:
            return SeriesResult(cur, diff, points)
    res = SeriesResult(prev, diff if math.isfinite(diff) else abs(prev), points)
    raise NoConvergence(f"surface cubature did not reach tol={rule.tol:g} (last diff {diff:.3g})", res)


def _quad_rows(X: np.ndarray, root: np.ndarray) -> np.ndarray:
    """Row-wise |X @ root|^2, i.e. x^T (root root^T) x for every row x."""
    y = X @ root
    return np.einsum("ij,ij->i", y, y)


def form_power_integrand(Q: QuadForm, s: complex, numerator: np.ndarray | None = None):
    """Integrand x -> Q_B(x) / Q_A(x)^s (Q_B = 1 when no numerator matrix is given)."""
    chol = Q.chol
    s = complex(s)
    b = None if numerator is None else np.asarray(numerator, dtype=float)

    def f(X):
        qa = _quad_rows(X, chol)
        if s.imag == 0.0:
            vals = qa ** (-s.real)
        else:
            vals = np.exp(-s * np.log(qa))
        if b is not None:
            vals = vals * np.einsum("ij,ij->i", X @ b, X)
        return vals

    return f


def _vq_integrand(Q: QuadForm, s: complex):
    a = Q.matrix
    chol = Q.chol
    tr = Q.trace
    s = complex(s)

    def f(X):
        qa = _quad_rows(X, chol)
        qa2 = _quad_rows(X, a)
        num = tr * qa - 2.0 * (s + 1.0) * qa2
        if s.imag == 0.0:
            return num.real * qa ** (-(s.real + 2.0))
        return num * np.exp(-(s + 2.0) * np.log(qa))

    return f


def surface_symmetry(Q: QuadForm) -> dict:
    """Keyword flags for :func:`surface_integral` valid for integrands built from Q alone."""
    diagonal = np.count_nonzero(Q.matrix - np.diag(np.diag(Q.matrix))) == 0
    return {"reflect": bool(diagonal), "permute": Q.scalar_multiple() is not None}


def v_q(Q: QuadForm, s: complex, rule: SurfaceRule = SurfaceRule()) -> SeriesResult:
    """V_Q(s): surface integral of Q_{B(s)} / Q_A^(s+2) over ||x||_inf = 1."""
    return surface_integral(Q.dim, _vq_integrand(Q, s), rule, symmetric=True, **surface_symmetry(Q))


def _vq_prime_closed_term(Q: QuadForm) -> float:
    d = Q.dim
    return -4.0 * Q.trace / (d * math.sqrt(Q.det)) * math.pi ** (d / 2) / gamma(d / 2).real


def v_q_prime_boundary(Q: QuadForm, rule: SurfaceRule = SurfaceRule(), h: float = 1e-4, cross_check: bool = True) -> SeriesResult:
    """V_Q'(d/2 - 1) from the closed leading term plus a log-weighted surface integral.

    A central difference of :func:`v_q` about d/2 - 1 is used as an
    independent check; disagreement raises :class:`CrossCheckFailure`.
    """
    d = Q.dim
    a = Q.matrix
    chol = Q.chol
    tr = Q.trace

    def log_integrand(X):
        qa = _quad_rows(X, chol)
        qa2 = _quad_rows(X, a)
        return (tr * qa - d * qa2) * qa ** (-(d / 2 + 1.0)) * np.log(qa)

    sym = surface_symmetry(Q)
    log_part = surface_integral(d, log_integrand, rule, symmetric=True, **sym)
    value = _vq_prime_closed_term(Q) - log_part.value.real
    err = log_part.abs_err_estimate
    if cross_check:
        s0 = d / 2 - 1.0
        # Same final order as the converged log integral: the rule error
        # largely cancels in the difference quotient.
        order = _final_order(rule, d, log_part.terms_used)
        flags = (sym["reflect"], sym["permute"])
        plus = _surface_once(d, _vq_integrand(Q, s0 + h), order, True, False, *flags).real
        minus = _surface_once(d, _vq_integrand(Q, s0 - h), order, True, False, *flags).real
        fd = (plus - minus) / (2.0 * h)
        tol = max(1e-6, 10.0 * err)
        if abs(fd - value) > tol * max(1.0, abs(value)):
            raise CrossCheckFailure(
                f"V_Q'(d/2-1): analytic {value:.12g} vs finite difference {fd:.12g}"
            )
    return SeriesResult(complex(value), err, log_part.terms_used)


def _final_order(rule: SurfaceRule, d: int, points: int) -> int:
    order, total = rule.order, rule.order ** (d - 1)
    while total < points:
        order *= 2
        total += order ** (d - 1)
    return order


@dataclass(frozen=True)
class QineqResult:
    holds_leq: bool
    holds_geq: bool
    indefinite: bool
    g_min: float
    g_max: float


def qineqc_check(Q: QuadForm, grid_per_face: int = 21) -> QineqResult:
    """Sample g(x) = d Q_{A^2}(x) - tr(A) Q_A(x) on a regular grid over every face.

    Sampling only: a sign pattern observed here is evidence, not proof.
    """
    if grid_per_face < 2:
        raise ValueError("grid_per_face must be >= 2")
    d = Q.dim
    a = Q.matrix
    a2 = a @ a
    line = np.linspace(-1.0, 1.0, grid_per_face)
    g_min, g_max = math.inf, -math.inf
    for j in range(d):
        grids = np.meshgrid(*([line] * (d - 1)), indexing="ij")
        X = np.empty((grids[0].size if d > 1 else 1, d))
        free = [k for k in range(d) if k != j]
        for ax, g in zip(free, grids):
            X[:, ax] = g.ravel()
        X[:, j] = 1.0
        g = d * _quad_rows(X, a) - Q.trace * _quad_rows(X, Q.chol)
        g_min = min(g_min, float(g.min()))
        g_max = max(g_max, float(g.max()))
    scale = 1e-12 * max(1.0, float(np.abs(a2).max()) * d * d)
    leq = g_max <= scale
    geq = g_min >= -scale
    return QineqResult(leq, geq, not (leq or geq), g_min, g_max)
