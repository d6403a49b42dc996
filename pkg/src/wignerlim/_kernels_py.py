"""Pure numpy implementations of the compiled kernels (same signatures)."""

from __future__ import annotations

import numpy as np


def _neumaier_add(total: np.ndarray, comp: np.ndarray, v: np.ndarray) -> None:
    t = total + v
    big = np.abs(total) >= np.abs(v)
    comp += np.where(big, (total - t) + v, (v - t) + total)
    total[:] = t


def cube_shell_sums(A: np.ndarray, s_re: float, s_im: float, N: int) -> np.ndarray:
    """out[k] = sum over ||n||_inf = k of Q_A(n)^(-s), for 0 <= k <= N (out[0] = 0)."""
    A = np.ascontiguousarray(A, dtype=float)
    d = A.shape[0]
    if N < 1:
        return np.zeros(max(N + 1, 0), dtype=complex)
    s = complex(s_re, s_im)
    if d == 1:
        k = np.arange(N + 1, dtype=float)
        out = np.zeros(N + 1, dtype=complex)
        out[1:] = 2.0 * np.exp(-s * np.log(A[0, 0] * k[1:] ** 2))
        return out
    line = np.arange(-N, N + 1, dtype=float)
    rest = np.stack(np.meshgrid(*([line] * (d - 1)), indexing="ij"), axis=-1).reshape(-1, d - 1)
    q_rest = np.einsum("ij,ij->i", rest @ A[1:, 1:], rest)
    lin = 2.0 * rest @ A[0, 1:]
    shell_rest = np.abs(rest).max(axis=1).astype(np.int64)
    tot_r = np.zeros(N + 1)
    tot_i = np.zeros(N + 1)
    cmp_r = np.zeros(N + 1)
    cmp_i = np.zeros(N + 1)
    for n0 in range(N + 1):
        q = q_rest + n0 * (lin + A[0, 0] * n0)
        shell = np.maximum(shell_rest, n0)
        w = 2.0 if n0 > 0 else 1.0
        if n0 == 0:
            keep = shell > 0
            q = q[keep]
            shell = shell[keep]
        logq = np.log(q)
        if s_im == 0.0:
            vals = w * np.exp(-s_re * logq)
            _neumaier_add(tot_r, cmp_r, np.bincount(shell, weights=vals, minlength=N + 1))
        else:
            mag = w * np.exp(-s_re * logq)
            ph = -s_im * logq
            _neumaier_add(tot_r, cmp_r, np.bincount(shell, weights=mag * np.cos(ph), minlength=N + 1))
            _neumaier_add(tot_i, cmp_i, np.bincount(shell, weights=mag * np.sin(ph), minlength=N + 1))
    return (tot_r + cmp_r) + 1j * (tot_i + cmp_i)


def compensated_cumsum(x: np.ndarray) -> np.ndarray:
    """Prefix sums with Neumaier compensation."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    total = 0.0
    comp = 0.0
    for i, v in enumerate(x.tolist()):
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out[i] = total + comp
    return out
