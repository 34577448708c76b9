# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``; see that module for
the documented algorithms. Results must match it draw-for-draw."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, cos, floor
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef double NORMAL_SWITCH = 30.0
cdef double TWO_PI = 6.283185307179586
cdef int MAX_INVERSION_STEPS = 1000


cdef inline uint64_t _mix(uint64_t *state) nogil:
    cdef uint64_t z
    state[0] = state[0] + <uint64_t>0x9E3779B97F4A7C15ULL
    z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t *state) nogil:
    return (_mix(state) >> 11) * (1.0 / 9007199254740992.0)


cdef int64_t _poisson(double mean, uint64_t *state) nogil:
    cdef double u, p, cdf, u1, u2, z, k
    cdef int64_t n
    if mean < NORMAL_SWITCH:
        u = _uniform(state)
        n = 0
        p = exp(-mean)
        cdf = p
        while u > cdf and n < MAX_INVERSION_STEPS:
            n += 1
            p *= mean / <double>n
            cdf += p
        return n
    u1 = _uniform(state)
    u2 = _uniform(state)
    z = sqrt(-2.0 * log(1.0 - u1)) * cos(TWO_PI * u2)
    k = floor(mean + sqrt(mean) * z + 0.5)
    if k < 0:
        return 0
    return <int64_t>k


def splitmix64(state):
    cdef uint64_t s = state
    cdef uint64_t z = _mix(&s)
    return z, s


def uniform(state):
    cdef uint64_t s = state
    cdef double u = _uniform(&s)
    return u, s


def poisson_one(double mean, state):
    cdef uint64_t s = state
    cdef int64_t k = _poisson(mean, &s)
    return k, s


def poisson_draws(means, state):
    cdef double[::1] m = np.ascontiguousarray(means, dtype=np.float64)
    cdef Py_ssize_t n = m.shape[0], i
    out = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef uint64_t s = state
    with nogil:
        for i in range(n):
            o[i] = _poisson(m[i], &s)
    return out, s


def shell_sum(int shape, center, radii, double density, xs, ys, wxy, zs, wz):
    cdef double[::1] x = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(wxy, dtype=np.float64)
    cdef double[::1] z = np.ascontiguousarray(zs, dtype=np.float64)
    cdef double[::1] wzv = np.ascontiguousarray(wz, dtype=np.float64)
    cdef double cx = center[0], cy = center[1], cz = center[2]
    cdef double rx = radii[0], ry = radii[1], rz = radii[2]
    cdef Py_ssize_t i, j, nxy = x.shape[0], nz = z.shape[0]
    cdef double u, q, dz, inner, total = 0.0, total_z = 0.0
    with nogil:
        if shape == 0:
            # Separable: exp(-(u + v)) = exp(-u) exp(-v).
            for i in range(nxy):
                u = ((x[i] - cx) / rx) ** 2 + ((y[i] - cy) / ry) ** 2
                total += w[i] * exp(-u)
            for j in range(nz):
                dz = (z[j] - cz) / rz
                total_z += wzv[j] * exp(-dz * dz)
            total *= total_z
        else:
            for i in range(nxy):
                u = ((x[i] - cx) / rx) ** 2 + ((y[i] - cy) / ry) ** 2
                inner = 0.0
                for j in range(nz):
                    dz = (z[j] - cz) / rz
                    q = u + dz * dz
                    if q < 1.0:
                        inner += wzv[j]
                total += w[i] * inner
    return density * total
