"""Interpreted implementations of the numerical kernels.

These are the reference versions; ``_kernels.pyx`` must reproduce them
value-for-value (RNG and Poisson draws) or to rounding (shell sums).

Random stream (SplitMix64, all arithmetic modulo 2**64)::

    state = state + 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z = z ^ (z >> 31)
    uniform = (z >> 11) * 2**-53          # in [0, 1)

Poisson draw with mean ``m``:

* ``m < 30``: one uniform ``u``; ``k = 0, p = exp(-m), F = p``; while
  ``u > F`` and ``k < 1000``: ``k += 1; p *= m / k; F += p``. Return ``k``.
* ``m >= 30``: two uniforms ``u1, u2``;
  ``z = sqrt(-2 log(1 - u1)) * cos(6.283185307179586 * u2)``;
  return ``max(0, floor(m + sqrt(m) * z + 0.5))``.
"""
import math

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
NORMAL_SWITCH = 30.0
TWO_PI = 6.283185307179586
MAX_INVERSION_STEPS = 1000

SHAPE_GAUSSIAN = 0
SHAPE_FLATTOP = 1


def splitmix64(state):
    """Advance ``state``; return ``(output, new_state)``."""
    state = (state + GOLDEN_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31), state


def uniform(state):
    z, state = splitmix64(state)
    return (z >> 11) * (1.0 / 9007199254740992.0), state


def poisson_one(mean, state):
    if mean < NORMAL_SWITCH:
        u, state = uniform(state)
        k = 0
        p = math.exp(-mean)
        cdf = p
        while u > cdf and k < MAX_INVERSION_STEPS:
            k += 1
            p *= mean / k
            cdf += p
        return k, state
    u1, state = uniform(state)
    u2, state = uniform(state)
    z = math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(TWO_PI * u2)
    k = math.floor(mean + math.sqrt(mean) * z + 0.5)
    return max(0, int(k)), state


def poisson_draws(means, state):
    means = np.ascontiguousarray(means, dtype=np.float64)
    out = np.empty(means.shape[0], dtype=np.int64)
    for i in range(means.shape[0]):
        out[i], state = poisson_one(float(means[i]), state)
    return out, state


def shell_sum(shape, center, radii, density, xs, ys, wxy, zs, wz):
    """Weighted density sum over the tensor grid ``(xs[i], ys[i]) x zs[j]``.

    The Gaussian factorises, exp(-(u + v)) = exp(-u) exp(-v), so its sum is
    a product of two 1-D sums.
    """
    cx, cy, cz = center
    rx, ry, rz = radii
    u = ((np.asarray(xs) - cx) / rx) ** 2 + ((np.asarray(ys) - cy) / ry) ** 2
    v = ((np.asarray(zs) - cz) / rz) ** 2
    if shape == SHAPE_GAUSSIAN:
        return float(density * (np.asarray(wxy) @ np.exp(-u)) * (np.asarray(wz) @ np.exp(-v)))
    vals = (u[:, None] + v[None, :] < 1.0).astype(np.float64)
    return float(density * (np.asarray(wxy) @ vals @ np.asarray(wz)))
