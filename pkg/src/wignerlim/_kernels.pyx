# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled lattice kernels. Must stay numerically equivalent to _kernels_py."""

import numpy as np

from libc.math cimport fabs, sqrt
from libc.stdlib cimport free, malloc

cdef extern from *:
    """
    #include <math.h>
    /* On glibc x86-64 the row loops call the vector math library (libmvec,
       <= 4 ulp) with an AVX2 clone chosen at load time. Reductions stay in
       strict scalar code. */
    #if defined(__GNUC__) && !defined(__clang__) && defined(__x86_64__) && defined(__GLIBC__)
    #pragma omp declare simd notinbranch
    double exp(double);
    #pragma omp declare simd notinbranch
    double log(double);
    #pragma omp declare simd notinbranch
    double sin(double);
    #pragma omp declare simd notinbranch
    double cos(double);
    #define WL_VEC __attribute__((target_clones("avx2", "default")))
    #else
    #define WL_VEC
    #endif
    static WL_VEC void wl_pow_row(const double* q, double* out, Py_ssize_t n, double s) {
        #pragma omp simd
        for (Py_ssize_t i = 0; i < n; i++) out[i] = exp(-s * log(q[i]));
    }
    static WL_VEC void wl_cpow_row(const double* q, double* re, double* im, Py_ssize_t n,
                                   double s_re, double s_im) {
        #pragma omp simd
        for (Py_ssize_t i = 0; i < n; i++) {
            double L = log(q[i]);
            double m = exp(-s_re * L);
            re[i] = m * cos(-s_im * L);
            im[i] = m * sin(-s_im * L);
        }
    }
    """
    void wl_pow_row(const double* q, double* out, Py_ssize_t n, double s) nogil
    void wl_cpow_row(const double* q, double* re, double* im, Py_ssize_t n, double s_re, double s_im) nogil


cdef inline void _neumaier(double* total, double* comp, double v) noexcept nogil:
    cdef double t = total[0] + v
    if fabs(total[0]) >= fabs(v):
        comp[0] += (total[0] - t) + v
    else:
        comp[0] += (v - t) + total[0]
    total[0] = t


cdef inline void _halfint_row(const double* q, double* out, Py_ssize_t n, int two_s) noexcept nogil:
    # q^(-two_s/2) with correctly rounded sqrt and repeated multiplication.
    cdef Py_ssize_t i
    cdef int m = two_s // 2, j
    cdef bint half = two_s % 2 != 0
    cdef double p
    for i in range(n):
        p = 1.0
        for j in range(m):
            p *= q[i]
        if half:
            p *= sqrt(q[i])
        out[i] = 1.0 / p


def cube_shell_sums(const double[:, ::1] A, double s_re, double s_im, Py_ssize_t N):
    """out[k] = sum over ||n||_inf = k of Q_A(n)^(-s), for 0 <= k <= N (out[0] = 0)."""
    cdef Py_ssize_t d = A.shape[0]
    cdef Py_ssize_t last = d - 1
    cdef Py_ssize_t width = 2 * N + 1
    cdef Py_ssize_t i, j, k, t, mx, at
    cdef double q0, lin, all_, w, row_r, row_i
    cdef bint real_s = s_im == 0.0
    cdef int two_s = -1
    cdef bint done

    if N < 1:
        return np.zeros(N + 1 if N >= 0 else 0, dtype=complex)
    if d == 1:
        k_arr = np.arange(1, N + 1, dtype=float)
        out = np.zeros(N + 1, dtype=complex)
        out[1:] = 2.0 * np.exp(-complex(s_re, s_im) * np.log(A[0, 0] * k_arr * k_arr))
        return out
    if real_s and 0.0 < s_re <= 16.0 and 2.0 * s_re == <double>(<int>(2.0 * s_re)):
        two_s = <int>(2.0 * s_re)

    cdef double[::1] sr = np.zeros(N + 1)
    cdef double[::1] si = np.zeros(N + 1)
    cdef double[::1] cr = np.zeros(N + 1)
    cdef double[::1] ci = np.zeros(N + 1)
    cdef Py_ssize_t[::1] n = np.zeros(d, dtype=np.intp)
    cdef double* qb = <double*> malloc(width * sizeof(double))
    cdef double* vr = <double*> malloc(width * sizeof(double))
    cdef double* vi = <double*> malloc(width * sizeof(double))
    if qb == NULL or vr == NULL or vi == NULL:
        free(qb); free(vr); free(vi)
        raise MemoryError()

    all_ = A[last, last]
    n[0] = 0
    for i in range(1, last):
        n[i] = -N
    try:
        with nogil:
            while True:
                q0 = 0.0
                lin = 0.0
                mx = 0
                for i in range(last):
                    at = n[i] if n[i] >= 0 else -n[i]
                    if at > mx:
                        mx = at
                    lin += 2.0 * A[last, i] * n[i]
                    for j in range(last):
                        q0 += A[i, j] * n[i] * n[j]
                w = 2.0 if n[0] > 0 else 1.0
                for t in range(-N, N + 1):
                    qb[t + N] = q0 + t * (lin + all_ * t)
                if mx == 0:
                    qb[N] = 1.0  # origin placeholder, never accumulated
                if two_s > 0:
                    _halfint_row(qb, vr, width, two_s)
                elif real_s:
                    wl_pow_row(qb, vr, width, s_re)
                else:
                    wl_cpow_row(qb, vr, vi, width, s_re, s_im)
                # |t| <= mx all land on shell mx: plain row sum, one compensated add.
                if mx > 0:
                    row_r = 0.0
                    row_i = 0.0
                    for t in range(N - mx, N + mx + 1):
                        row_r += vr[t]
                        if not real_s:
                            row_i += vi[t]
                    _neumaier(&sr[mx], &cr[mx], w * row_r)
                    if not real_s:
                        _neumaier(&si[mx], &ci[mx], w * row_i)
                # |t| > mx: the pair +-t lands on shell |t|.
                for k in range(mx + 1, N + 1):
                    _neumaier(&sr[k], &cr[k], w * (vr[N + k] + vr[N - k]))
                    if not real_s:
                        _neumaier(&si[k], &ci[k], w * (vi[N + k] + vi[N - k]))
                # advance the odometer over coordinates last-1 .. 0
                done = True
                i = last - 1
                while i >= 0:
                    if n[i] < N:
                        n[i] += 1
                        done = False
                        break
                    n[i] = 0 if i == 0 else -N
                    i -= 1
                if done:
                    break
    finally:
        free(qb)
        free(vr)
        free(vi)
    out = np.empty(N + 1, dtype=complex)
    for k in range(N + 1):
        out[k] = complex(sr[k] + cr[k], si[k] + ci[k])
    return out


def compensated_cumsum(const double[::1] x):
    """Prefix sums with Neumaier compensation."""
    cdef Py_ssize_t n = x.shape[0], i
    cdef double[::1] out = np.empty(n)
    cdef double total = 0.0, comp = 0.0
    for i in range(n):
        _neumaier(&total, &comp, x[i])
        out[i] = total + comp
    return np.asarray(out)
