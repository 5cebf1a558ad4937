# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Semantics are defined by ``_kernels_py``; every
floating-point operation here mirrors the Python order exactly."""

from libc.math cimport pow, log, fabs
from libc.stdlib cimport malloc, free

import numpy as np

cdef double XGK[11]
cdef double WGK[11]
cdef double WG[5]

from rgw._kernels_py import XGK as _XGK, WGK as _WGK, WG as _WG

for _i in range(11):
    XGK[_i] = _XGK[_i]
    WGK[_i] = _WGK[_i]
for _i in range(5):
    WG[_i] = _WG[_i]


cdef inline double _pi_integrand(double w, double* ks, double* exps, int nk,
                                 double k_star, double gamma) nogil:
    cdef double wg = pow(w, gamma)
    cdef double val = gamma / k_star * pow(w, gamma - 1)
    cdef int i
    for i in range(nk):
        val *= pow((k_star - ks[i] + ks[i] * wg) / k_star, exps[i])
    return val


cdef void _gk21(double a, double b, double* ks, double* exps, int nk,
                double k_star, double gamma, double* res, double* err) nogil:
    cdef double center = 0.5 * (a + b)
    cdef double half = 0.5 * (b - a)
    cdef double fc = _pi_integrand(center, ks, exps, nk, k_star, gamma)
    cdef double resk = WGK[10] * fc
    cdef double resg = 0.0
    cdef double dx, f1, f2
    cdef int j
    for j in range(10):
        dx = half * XGK[j]
        f1 = _pi_integrand(center - dx, ks, exps, nk, k_star, gamma)
        f2 = _pi_integrand(center + dx, ks, exps, nk, k_star, gamma)
        resk += WGK[j] * (f1 + f2)
        if j % 2 == 1:
            resg += WG[j // 2] * (f1 + f2)
    res[0] = resk * half
    err[0] = fabs((resk - resg) * half)


def pi_integral(ks_in, exps_in, double k_star, double gamma, double rtol, int max_intervals):
    cdef double[::1] ks = np.ascontiguousarray(ks_in, dtype=np.float64)
    cdef double[::1] exps = np.ascontiguousarray(exps_in, dtype=np.float64)
    cdef int nk = ks.shape[0]
    cdef double* pks = &ks[0] if nk > 0 else NULL
    cdef double* pex = &exps[0] if nk > 0 else NULL
    cdef double* lo = <double*> malloc(max_intervals * sizeof(double))
    cdef double* hi = <double*> malloc(max_intervals * sizeof(double))
    cdef double* vals = <double*> malloc(max_intervals * sizeof(double))
    cdef double* errs = <double*> malloc(max_intervals * sizeof(double))
    cdef int n = 1, i, worst
    cdef double total, total_err, a, b, mid
    cdef bint converged
    if lo == NULL or hi == NULL or vals == NULL or errs == NULL:
        free(lo); free(hi); free(vals); free(errs)
        raise MemoryError()
    try:
        with nogil:
            lo[0] = 0.0
            hi[0] = 1.0
            _gk21(0.0, 1.0, pks, pex, nk, k_star, gamma, &vals[0], &errs[0])
            while True:
                total = 0.0
                total_err = 0.0
                worst = 0
                for i in range(n):
                    total += vals[i]
                    total_err += errs[i]
                    if errs[i] > errs[worst]:
                        worst = i
                if total_err <= rtol * fabs(total) + 1e-300:
                    converged = True
                    break
                if n >= max_intervals:
                    converged = False
                    break
                a = lo[worst]
                b = hi[worst]
                mid = 0.5 * (a + b)
                _gk21(a, mid, pks, pex, nk, k_star, gamma, &vals[worst], &errs[worst])
                hi[worst] = mid
                _gk21(mid, b, pks, pex, nk, k_star, gamma, &vals[n], &errs[n])
                lo[n] = mid
                hi[n] = b
                n += 1
        return total, total_err, n, converged
    finally:
        free(lo); free(hi); free(vals); free(errs)


cdef double _urn_steps(long long* counts, const long long* colors, int ncol, double q,
                       double c_star, const double* cdf, const double* uni,
                       long long steps, long long n0, double logphi,
                       long long* out_xi, double* out_logphi) nogil:
    cdef long long s_mass = 0
    cdef long long s, n
    cdef int i, j
    cdef double m, star_w, x, u, w
    for i in range(ncol):
        s_mass += colors[i] * counts[i]
    for s in range(steps):
        n = n0 + s
        m = c_star + q * <double> s_mass / <double> (n + 1)
        logphi -= log(m)
        if out_logphi != NULL:
            out_logphi[s] = logphi
        star_w = c_star * <double> (n + 1)
        x = uni[2 * s] * (q * <double> s_mass + star_w)
        j = -1
        if x < star_w:
            u = uni[2 * s + 1]
            j = ncol - 1
            for i in range(ncol):
                if u < cdf[i]:
                    j = i
                    break
        else:
            x -= star_w
            for i in range(ncol):
                if counts[i] > 0:
                    w = q * <double> colors[i] * <double> counts[i]
                    if x < w:
                        j = i
                        break
                    x -= w
                    j = i
        counts[j] += 1
        s_mass += colors[j]
        if out_xi != NULL:
            out_xi[s] = colors[j]
    return logphi


def urn_walk(long long[::1] counts, const long long[::1] colors, double q, double c_star,
             const double[::1] nuhat_cdf, const double[::1] uniforms, long long n0,
             double logphi0, long long[::1] out_xi, double[::1] out_logphi):
    cdef long long steps = out_xi.shape[0]
    cdef int ncol = colors.shape[0]
    cdef double res
    if steps == 0:
        return logphi0
    if uniforms.shape[0] < 2 * steps or out_logphi.shape[0] < steps:
        raise ValueError("buffers too short for the requested steps")
    with nogil:
        res = _urn_steps(&counts[0], &colors[0], ncol, q, c_star, &nuhat_cdf[0], &uniforms[0],
                         steps, n0, logphi0, &out_xi[0], &out_logphi[0])
    return res


def urn_batch(int ell_index, const long long[::1] colors, double q, double c_star,
              const double[::1] nuhat_cdf, const double[:, ::1] uniforms,
              long long[:, ::1] out_counts, double[::1] out_logphi):
    cdef Py_ssize_t paths = uniforms.shape[0]
    cdef long long steps = uniforms.shape[1] // 2
    cdef int ncol = colors.shape[0]
    cdef Py_ssize_t p
    cdef int i
    with nogil:
        for p in range(paths):
            for i in range(ncol):
                out_counts[p, i] = 0
            out_counts[p, ell_index] = 1
            out_logphi[p] = _urn_steps(&out_counts[p, 0], &colors[0], ncol, q, c_star, &nuhat_cdf[0],
                                       &uniforms[p, 0], steps, 0, 0.0, NULL, NULL)
