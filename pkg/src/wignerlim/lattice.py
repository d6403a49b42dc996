"""Integer lattice enumeration, representation numbers, Ramanujan tau and norm-ball counts."""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import BudgetExceeded
from .quadform import QuadForm

__all__ = [
    "TruncationRegion",
    "CoeffTable",
    "shell_iter",
    "shell_points",
    "cube_square_counts",
    "count_pball",
    "pball_counts",
    "pball_volume",
    "lambda_estimate",
    "r_squares_table",
    "tau_table",
    "q_spectrum",
]

_INT64_SAFE = 2**62
_TABLE_LIMIT = 10_000_000


@dataclass(frozen=True)
class TruncationRegion:
    kind: str
    N: float
    p: float = math.inf

    def __post_init__(self):
        if self.kind not in ("cube", "pball"):
            raise ValueError(f"unknown region kind {self.kind!r}")
        if not self.N > 0:
            raise ValueError("N must be positive")
        if not self.p >= 1:
            raise ValueError("p must be >= 1")


@dataclass(frozen=True)
class CoeffTable:
    """Coefficient table.

    ``kind`` is ``"r_squares"``, ``"tau"`` or ``"q_spectrum"``. For the first two
    ``values[n]`` is the coefficient of index n. For spectra, ``keys`` holds the
    sorted distinct values of Q(n) and ``values`` their multiplicities.
    """

    kind: str
    max_index: float
    values: np.ndarray
    keys: np.ndarray | None = None
    dim: int | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.values)

    def rows(self) -> Iterator[tuple]:
        if self.keys is None:
            start = 1 if self.kind == "tau" else 0
            for n in range(start, len(self.values)):
                yield n, int(self.values[n])
        else:
            for k, v in zip(self.keys, self.values):
                yield float(k), int(v)

    def to_csv(self, dest=None) -> str | None:
        """Write ``n,value`` rows to a path or file object; return the text if ``dest`` is None."""
        buf = io.StringIO() if dest is None else None
        if isinstance(dest, str):
            fh = open(dest, "w", newline="")
        else:
            fh = buf if dest is None else dest
        try:
            w = csv.writer(fh)
            w.writerow(["n" if self.keys is None else "q", "value"])
            for k, v in self.rows():
                w.writerow([repr(k) if isinstance(k, float) else k, v])
        finally:
            if isinstance(dest, str):
                fh.close()
        return buf.getvalue() if buf is not None else None


# ---------------------------------------------------------------------------
# Cube shells


def shell_iter(d: int, N: int) -> Iterator[tuple[int, ...]]:
    """Lattice points with ||n||_inf = N, in lexicographic order."""
    if d < 1 or N < 1:
        raise ValueError("need d >= 1 and N >= 1")
    full = range(-N, N + 1)

    def rec(k: int, on_shell: bool) -> Iterator[tuple[int, ...]]:
        if k == 1:
            if on_shell:
                for x in full:
                    yield (x,)
            else:
                yield (-N,)
                yield (N,)
            return
        for x in full:
            hit = on_shell or abs(x) == N
            for rest in rec(k - 1, hit):
                yield (x,) + rest

    yield from rec(d, False)


def shell_points(d: int, N: int) -> np.ndarray:
    """The points of :func:`shell_iter` as an (m, d) int64 array, same order."""
    if d < 1 or N < 1:
        raise ValueError("need d >= 1 and N >= 1")
    if d == 1:
        return np.array([[-N], [N]], dtype=np.int64)
    line = np.arange(-N, N + 1, dtype=np.int64)
    inner = shell_points(d - 1, N)
    full = np.stack(np.meshgrid(*([line] * (d - 1)), indexing="ij"), axis=-1).reshape(-1, d - 1)
    blocks = []
    for x in line:
        rest = full if abs(x) == N else inner
        head = np.full((rest.shape[0], 1), x, dtype=np.int64)
        blocks.append(np.hstack([head, rest]))
    return np.vstack(blocks)


def _sparse_power_convolve(dist: np.ndarray, N: int, p: int, limit: int) -> np.ndarray:
    """Convolve ``dist`` with the 1-d distribution of |n|^p over |n| <= N, truncated at ``limit``."""
    out = np.zeros(min(len(dist) + N**p, limit + 1), dtype=dist.dtype)
    for k in range(N + 1):
        shift = k**p
        if shift > limit:
            break
        m = min(len(dist), len(out) - shift)
        out[shift : shift + m] += (1 if k == 0 else 2) * dist[:m]
    return out


def cube_square_counts(d: int, N: int) -> np.ndarray:
    """c[v] = #{n in [-N, N]^d : ||n||_2^2 = v}, for 0 <= v <= d N^2 (exact)."""
    if d < 1 or N < 0:
        raise ValueError("need d >= 1 and N >= 0")
    if (2 * N + 1) ** d >= _INT64_SAFE:
        raise OverflowError("cube too large for int64 counts")
    dist = np.ones(1, dtype=np.int64)
    for _ in range(d):
        dist = _sparse_power_convolve(dist, N, 2, d * N * N)
    return dist


# ---------------------------------------------------------------------------
# p-norm ball counting


def _iroot(v: int, p: int) -> int:
    """floor(v ** (1/p)) for nonnegative integers, exact."""
    if v < 0:
        return -1
    if p == 1:
        return v
    if p == 2:
        return math.isqrt(v)
    r = int(round(v ** (1.0 / p)))
    while r**p > v:
        r -= 1
    while (r + 1) ** p <= v:
        r += 1
    return r


def _is_int(x: float) -> bool:
    return math.isfinite(x) and float(x) == math.floor(x)


def _int_power_threshold(p: int, N: float) -> int:
    if _is_int(N):
        return int(N) ** p
    return int(math.floor(N**p * (1.0 + 1e-12)))


def _cumulative_table(k: int, p: int, V: int, R: int) -> np.ndarray:
    """C[v] = #{n in Z^k : sum |n_i|^p <= v} for 0 <= v <= V, exact."""
    dist = np.ones(1, dtype=np.int64)
    for _ in range(k):
        dist = _sparse_power_convolve(dist, R, p, V)
    full = np.zeros(V + 1, dtype=np.int64)
    full[: len(dist)] = dist
    return np.cumsum(full)


def pball_counts(d: int, p: float, radii) -> np.ndarray:
    """Vectorized :func:`count_pball` over an array of radii (shared tables)."""
    radii = np.asarray(radii, dtype=float)
    if d < 1 or np.any(radii < 0) or not p >= 1:
        raise ValueError("need d >= 1, p >= 1, radii >= 0")
    out = np.empty(radii.shape, dtype=object)
    flat = radii.ravel()
    res = out.ravel()
    if math.isinf(p):
        for i, N in enumerate(flat):
            res[i] = (2 * int(math.floor(N)) + 1) ** d
        return out
    if d == 1:
        for i, N in enumerate(flat):
            res[i] = 2 * int(math.floor(N * (1 + 1e-12))) + 1
        return out
    R = int(math.floor(flat.max() * (1 + 1e-12))) if flat.size else 0
    if _is_int(p):
        ip = int(p)
        thresholds = [_int_power_threshold(ip, N) for N in flat]
        V = max(thresholds) if thresholds else 0
        if d == 2:
            for i, t in enumerate(thresholds):
                r = _iroot(t, ip)
                res[i] = sum(2 * _iroot(t - abs(a) ** ip, ip) + 1 for a in range(-r, r + 1))
            return out
        if V <= _TABLE_LIMIT:
            C = _cumulative_table(d - 1, ip, V, R)
            for i, t in enumerate(thresholds):
                r = _iroot(t, ip)
                a = np.arange(-r, r + 1, dtype=np.int64)
                res[i] = int(C[t - np.abs(a) ** ip].sum())
            return out
    for i, N in enumerate(flat):
        res[i] = _count_pball_float(d, p, float(N))
    return out


def _count_pball_float(d: int, p: float, N: float) -> int:
    """Direct enumeration with a 1e-12 relative guard band on the comparison."""
    R = int(math.floor(N * (1 + 1e-12)))
    line = np.arange(-R, R + 1)
    powers = np.abs(line).astype(float) ** p
    bound = N**p * (1.0 + 1e-12)
    if d == 1:
        return 2 * R + 1
    # Sum of |n_i|^p over the last d-1 coordinates, then count the first.
    tail = powers
    for _ in range(d - 2):
        tail = (tail[:, None] + powers[None, :]).ravel()
        tail = tail[tail <= bound]
    tail = np.sort(tail)
    total = 0
    for pw in powers:
        total += int(np.searchsorted(tail, bound - pw, side="right"))
    return total


def count_pball(d: int, p: float, N: float) -> int:
    """#{n in Z^d : ||n||_p <= N}, origin included; p may be ``math.inf``.

    For finite p and non-integer N the comparison is ||n||_p^p <= N^p (1 + 1e-12),
    which absorbs rounding in radii computed from floats.
    """
    return int(pball_counts(d, p, [N])[0])


def pball_volume(d: int, p: float, N: float) -> float:
    """Volume 2^d Gamma(1 + 1/p)^d / Gamma(1 + d/p) N^d of the p-norm ball."""
    if d < 1 or not p >= 1 or N < 0:
        raise ValueError("need d >= 1, p >= 1, N >= 0")
    if math.isinf(p):
        return (2.0 * N) ** d
    logv = d * math.log(2.0) + d * math.lgamma(1.0 + 1.0 / p) - math.lgamma(1.0 + d / p)
    return math.exp(logv) * N**d


def lambda_estimate(d: int, p: float, N_max: int, blocks: int = 8) -> float:
    """Empirical exponent of |count - volume| over radii in [N_max/4, N_max].

    The error oscillates in sign, so the fit uses the largest |error| inside
    each of ``blocks`` log-spaced windows. The result is descriptive only.
    """
    if N_max < 16:
        raise ValueError("N_max must be >= 16")
    lo = max(1, N_max // 4)
    radii = np.arange(lo, N_max + 1)
    counts = pball_counts(d, p, radii)
    errs = np.array([abs(float(int(c) - 1) - pball_volume(d, p, float(N))) for c, N in zip(counts, radii)])
    edges = np.unique(np.round(np.geomspace(lo, N_max + 1, blocks + 1)).astype(int))
    xs, ys = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (radii >= a) & (radii < b)
        if not np.any(sel):
            continue
        k = int(np.argmax(np.where(sel, errs, -1.0)))
        if errs[k] > 0:
            xs.append(math.log(radii[k]))
            ys.append(math.log(errs[k]))
    if len(xs) < 2:
        raise ValueError("not enough nonzero error samples for a fit")
    slope = np.polyfit(xs, ys, 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# Coefficient tables


def r_squares_table(d: int, M: int) -> CoeffTable:
    """r_d(n) for 0 <= n <= M: signed, ordered representations as a sum of d squares."""
    if d < 1 or M < 0:
        raise ValueError("need d >= 1 and M >= 0")
    R = math.isqrt(M)
    wide = (2 * R + 1) ** d >= _INT64_SAFE
    dist = np.ones(1, dtype=object if wide else np.int64)
    for _ in range(d):
        dist = _sparse_power_convolve(dist, R, 2, M)
    vals = np.zeros(M + 1, dtype=dist.dtype)
    vals[: len(dist)] = dist
    vals.setflags(write=False)
    return CoeffTable("r_squares", M, vals, dim=d)


def _poly_mul(a: np.ndarray, b: np.ndarray, deg: int) -> np.ndarray:
    return np.convolve(a[: deg + 1], b[: deg + 1])[: deg + 1]


def tau_table(M: int) -> CoeffTable:
    """Ramanujan tau(1..M) from q * prod (1 - q^n)^24 in exact integers."""
    if M < 1:
        raise ValueError("M must be >= 1")
    deg = M - 1
    eta = np.zeros(deg + 1, dtype=object)
    eta[:] = 0
    # Euler's pentagonal series for prod (1 - q^n).
    k = 0
    while True:
        sign = -1 if k % 2 else 1
        g1 = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        if g1 > deg:
            break
        eta[g1] += sign
        if k and g2 <= deg:
            eta[g2] += sign
        k += 1
    p2 = _poly_mul(eta, eta, deg)
    p4 = _poly_mul(p2, p2, deg)
    p8 = _poly_mul(p4, p4, deg)
    p16 = _poly_mul(p8, p8, deg)
    p24 = _poly_mul(p16, p8, deg)
    vals = np.zeros(M + 1, dtype=object)
    vals[:] = 0
    vals[1:] = p24
    vals.setflags(write=False)
    return CoeffTable("tau", M, vals)


def q_spectrum(Q: QuadForm, cutoff: float, budget: int = 20_000_000) -> CoeffTable:
    """Distinct values of Q(n) <= cutoff over nonzero n in Z^d, with multiplicities."""
    if not cutoff > 0:
        raise ValueError("cutoff must be positive")
    d = Q.dim
    # Exact box containing the ellipsoid: |n_i| <= sqrt(cutoff * (A^-1)_ii).
    bounds = [int(math.floor(math.sqrt(cutoff * Q.inv_matrix[i, i]) + 1e-9)) for i in range(d)]
    box = math.prod(2 * b + 1 for b in bounds)
    if box > budget:
        raise BudgetExceeded(f"enumeration box has {box} points, budget {budget}")
    lines = [np.arange(-b, b + 1, dtype=float) for b in bounds]
    found = []
    limit = cutoff * (1.0 + 1e-12)
    head_iter = itertools.product(*lines[: max(0, d - 3)])
    tail = np.stack(np.meshgrid(*lines[max(0, d - 3):], indexing="ij"), axis=-1).reshape(-1, min(d, 3))
    X = np.empty((tail.shape[0], d))
    X[:, max(0, d - 3):] = tail
    for head in head_iter:
        if head:
            X[:, : d - 3] = head
        qv = np.einsum("ij,ij->i", X @ Q.matrix, X)
        keep = (qv <= limit) & np.any(X != 0, axis=1)
        found.append(qv[keep])
    vals = np.sort(np.concatenate(found)) if found else np.zeros(0)
    if vals.size == 0:
        keys = np.zeros(0)
        mult = np.zeros(0, dtype=np.int64)
    else:
        breaks = np.nonzero(np.diff(vals) > 1e-12 * np.maximum(vals[1:], 1.0))[0] + 1
        starts = np.concatenate([[0], breaks])
        ends = np.concatenate([breaks, [vals.size]])
        keys = np.array([vals[a:b].mean() for a, b in zip(starts, ends)])
        mult = (ends - starts).astype(np.int64)
    keys.setflags(write=False)
    mult.setflags(write=False)
    return CoeffTable("q_spectrum", cutoff, mult, keys=keys, dim=d)
