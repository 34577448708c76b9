"""Least-squares fits of the cloud profile, loading and decay curves.

All three fits go through :func:`levenberg_marquardt`, a damped
Gauss-Newton solver with Marquardt's diagonal scaling. Widths are reported
as 1/e radii: the profile falls to amplitude/e at ``|x - center| = w``.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import (ConvergenceError, DegenerateDataError, EmptySegmentError,
                     InvalidDataError, ValidationError)

MAX_ITERATIONS = 200
XTOL = 1e-10
FTOL = 1e-12
LAMBDA_START = 1e-3
LAMBDA_MAX = 1e20


@dataclass
class FitResult:
    model_name: str
    parameters: dict
    residual_norm: float
    converged: bool
    iterations: int
    covariance: np.ndarray = field(repr=False)

    def value(self, name):
        return self.parameters[name][0]

    def stderr(self, name):
        return self.parameters[name][1]

    @property
    def one_over_e_diameter(self):
        return 2.0 * self.value("one_over_e_radius")

    @property
    def tau(self):
        return self.value("tau")

    def to_dict(self):
        out = {
            "model_name": self.model_name,
            "parameters": {k: {"value": v, "stderr": e} for k, (v, e) in self.parameters.items()},
            "residual_norm": self.residual_norm,
            "converged": self.converged,
            "iterations": self.iterations,
            "covariance": np.asarray(self.covariance).tolist(),
        }
        if "one_over_e_radius" in self.parameters:
            out["one_over_e_diameter"] = self.one_over_e_diameter
        return out


# Model families. Each takes the full parameter vector, offset first.

def gaussian_model(x, p):
    offset, amplitude, center, width = p
    return offset + amplitude * np.exp(-(((x - center) / width) ** 2))


def gaussian_jacobian(x, p):
    _, amplitude, center, width = p
    u = (x - center) / width
    e = np.exp(-u * u)
    return np.column_stack([np.ones_like(x), e,
                            amplitude * e * 2.0 * u / width,
                            amplitude * e * 2.0 * u * u / width])


def loading_model(t, p):
    offset, amplitude, tau = p
    return offset + amplitude * -np.expm1(-t / tau)


def loading_jacobian(t, p):
    _, amplitude, tau = p
    e = np.exp(-t / tau)
    return np.column_stack([np.ones_like(t), -np.expm1(-t / tau),
                            -amplitude * e * t / tau ** 2])


def decay_model(t, p):
    offset, amplitude, tau = p
    return offset + amplitude * np.exp(-t / tau)


def decay_jacobian(t, p):
    _, amplitude, tau = p
    e = np.exp(-t / tau)
    return np.column_stack([np.ones_like(t), e, amplitude * e * t / tau ** 2])


MODELS = {
    "gaussian": (("offset", "amplitude", "center", "one_over_e_radius"),
                 gaussian_model, gaussian_jacobian),
    "loading": (("offset", "amplitude", "tau"), loading_model, loading_jacobian),
    "decay": (("offset", "amplitude", "tau"), decay_model, decay_jacobian),
}
# Index of the parameter that must stay strictly positive.
_POSITIVE = {"gaussian": 3, "loading": 2, "decay": 2}


def levenberg_marquardt(fun, jac, x, y, p0, weights=None, free=None,
                        max_iter=MAX_ITERATIONS, xtol=XTOL, ftol=FTOL,
                        positive=()):
    """Minimise ``sum(w * (y - fun(x, p))**2)`` from ``p0``.

    ``free`` is a boolean mask of parameters to vary; the rest stay at
    their ``p0`` values. Damping is multiplied by 10 on a rejected step and
    divided by 10 on an accepted one. Returns ``(p, cost, iterations,
    converged, J)`` with ``J`` the weighted Jacobian of the free
    parameters at the solution.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    p = np.array(p0, dtype=float)
    free = np.ones(p.size, bool) if free is None else np.asarray(free, bool)
    sw = np.ones_like(y) if weights is None else np.sqrt(np.asarray(weights, dtype=float))

    def residual(q):
        return sw * (y - fun(x, q))

    r = residual(p)
    cost = float(r @ r)
    lam = LAMBDA_START
    converged = cost == 0.0
    iterations = 0
    while not converged and iterations < max_iter:
        iterations += 1
        J = sw[:, None] * jac(x, p)[:, free]
        A = J.T @ J
        g = J.T @ r
        diag = np.maximum(np.diag(A), np.finfo(float).tiny)
        while True:
            try:
                step = np.linalg.solve(A + lam * np.diag(diag), g)
            except np.linalg.LinAlgError:
                step = None
            if step is not None:
                trial = p.copy()
                trial[free] += step
                ok = np.all(np.isfinite(trial)) and all(trial[i] > 0 for i in positive)
                if ok:
                    r_trial = residual(trial)
                    cost_trial = float(r_trial @ r_trial)
                    if math.isfinite(cost_trial) and cost_trial < cost:
                        break
            lam *= 10.0
            if lam > LAMBDA_MAX:
                # No downhill step at any damping: stationary to rounding.
                converged = True
                break
        if converged:
            break
        improvement = (cost - cost_trial) / cost
        small_step = np.all(np.abs(step) <= xtol * np.abs(p[free]))
        p, r, cost = trial, r_trial, cost_trial
        lam = max(lam / 10.0, 1e-300)
        if small_step or improvement < ftol or cost == 0.0:
            converged = True
    J = sw[:, None] * jac(x, p)[:, free]
    return p, cost, iterations, converged, J


def _fit(model_name, x, y, p0, weights, free, scale):
    """Solve on data already divided by ``scale`` and report in data units."""
    names, fun, jac = MODELS[model_name]
    positive = (_POSITIVE[model_name],)
    p, cost, iterations, converged, _ = levenberg_marquardt(
        fun, jac, x, y, p0, weights=weights, free=free, positive=positive)
    # Offset and amplitude, the first two parameters, carry the data units.
    p[:2] *= scale
    cost *= scale ** 2
    sw = np.ones_like(y) if weights is None else np.sqrt(weights)
    J = sw[:, None] * jac(x, p)[:, free]
    if not converged:
        raise ConvergenceError(f"{model_name} fit did not converge in {iterations} iterations")
    n_free = int(np.sum(free))
    dof = max(x.size - n_free, 1)
    cov_free = np.linalg.pinv(J.T @ J) * (cost / dof)
    cov_free = 0.5 * (cov_free + cov_free.T)
    cov = np.zeros((p.size, p.size))
    idx = np.flatnonzero(free)
    cov[np.ix_(idx, idx)] = cov_free
    errs = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    params = {n: (float(v), float(e)) for n, v, e in zip(names, p, errs)}
    return FitResult(model_name, params, cost, converged, iterations, cov)


def _prepare(xs, ys, weights, min_points, strictly_increasing):
    x = np.asarray(xs, dtype=float).ravel()
    y = np.asarray(ys, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValidationError("x and y must have the same length")
    if x.size < min_points:
        raise ValidationError(f"need at least {min_points} points, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("data must be finite")
    if strictly_increasing and np.any(np.diff(x) <= 0):
        raise ValidationError("independent variable must be strictly increasing")
    if weights is not None:
        weights = np.asarray(weights, dtype=float).ravel()
        if weights.shape != y.shape or np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValidationError("weights must be finite, >= 0 and match the data")
    if np.ptp(y) == 0.0:
        raise DegenerateDataError("data are constant; amplitude is not identifiable")
    # Fits run on y / scale so the iteration does not depend on data units;
    # a power of two keeps the division exact.
    scale = math.ldexp(1.0, math.frexp(float(np.max(np.abs(y))))[1])
    return x, y / scale, weights, scale


def poisson_weights(ys, gate_s):
    """Inverse-variance proxy ``1 / max(y * gate, 1)`` from observed counts."""
    return 1.0 / np.maximum(np.asarray(ys, dtype=float) * gate_s, 1.0)


def _offset_setup(offset, estimate, scale):
    if offset is None:
        return estimate, True
    return float(offset) / scale, False


def fit_gaussian(xs, ys, weights=None, offset=None):
    """Fit ``offset + A exp(-((x - c) / w)^2)``.

    Pass a number as ``offset`` to hold the baseline fixed instead of
    fitting it.
    """
    x, y, weights, scale = _prepare(xs, ys, weights, 5, strictly_increasing=False)
    if np.unique(x).size != x.size:
        raise ValidationError("positions must be distinct")
    order = np.argsort(x)
    x, y = x[order], y[order]
    if weights is not None:
        weights = weights[order]
    base, free_offset = _offset_setup(offset, float(y.min()), scale)
    amplitude = float(y.max()) - base
    center = float(x[np.argmax(y)])
    above = x[y >= base + 0.5 * amplitude]
    span = float(above.max() - above.min()) if above.size > 1 else float(np.min(np.diff(x)))
    width = max(0.5 * span, 0.5 * float(np.min(np.diff(x)))) / math.sqrt(math.log(2.0))
    free = [free_offset, True, True, True]
    return _fit("gaussian", x, y, [base, amplitude, center, width], weights, free, scale)


def fit_loading(ts, ys, weights=None, offset=None):
    """Fit ``offset + A (1 - exp(-t / tau))``; ``tau`` is the 1/e loading time."""
    t, y, weights, scale = _prepare(ts, ys, weights, 4, strictly_increasing=True)
    base, free_offset = _offset_setup(offset, float(y[0]), scale)
    amplitude = float(y[-1]) - base
    if amplitude == 0.0:
        raise DegenerateDataError("no rise between first and last sample")
    reached = np.flatnonzero((y - base) / amplitude >= 1.0 - math.exp(-1.0))
    tau = float(t[reached[0]] - t[0]) if reached.size else 0.0
    if tau <= 0.0:
        tau = (float(t[-1]) - float(t[0])) / 5.0
    free = [free_offset, True, True]
    return _fit("loading", t, y, [base, amplitude, tau], weights, free, scale)


def fit_decay(ts, ys, weights=None, offset=None):
    """Fit ``offset + A exp(-t / tau)``; ``tau`` is the 1/e lifetime.

    The start point comes from a log-linear regression of the
    background-subtracted data, weighted by the data so the noisy tail
    carries little leverage.
    """
    t, y, weights, scale = _prepare(ts, ys, weights, 4, strictly_increasing=True)
    background, free_offset = _offset_setup(offset, float(y.min()) - 1e-3 * float(np.ptp(y)), scale)
    d = y - background
    keep = d > 0
    if not np.any(keep):
        raise InvalidDataError("all background-subtracted values are <= 0")
    if keep.sum() < 2:
        raise InvalidDataError("fewer than two positive background-subtracted values")
    slope, intercept = np.polyfit(t[keep], np.log(d[keep]), 1, w=d[keep])
    span = float(t[-1] - t[0])
    tau = -1.0 / slope if slope < 0 else span
    tau = min(max(tau, span * 1e-3), span * 1e3)
    amplitude = float(np.exp(np.clip(intercept, -700.0, 700.0)))
    if slope >= 0:
        amplitude = float(d[keep].max())
    free = [free_offset, True, True]
    return _fit("decay", t, y, [background, amplitude, tau], weights, free, scale)


def step_levels(ts, ys, change_times, settle_s=0.0, gate_s=None):
    """Mean and standard error of each segment between ``change_times``.

    Samples within ``settle_s`` after a change are skipped. With ``gate_s``
    the standard error is the Poisson value ``sqrt(mean / (gate * n))``
    (``ys`` in counts/s); otherwise it is the sample standard deviation
    over ``sqrt(n)``.
    """
    t = np.asarray(ts, dtype=float).ravel()
    y = np.asarray(ys, dtype=float).ravel()
    changes = [float(c) for c in change_times]
    if t.shape != y.shape or t.size == 0:
        raise ValidationError("ts and ys must be non-empty and the same length")
    if any(b <= a for a, b in zip(changes[:-1], changes[1:])):
        raise ValidationError("change_times must be strictly increasing")
    if changes and (changes[0] < t[0] or changes[-1] > t[-1]):
        raise ValidationError("change_times must lie within the sampled span")
    edges = [-math.inf] + changes + [math.inf]
    out = []
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        start = lo + settle_s if i > 0 else lo
        seg = y[(t >= start) & (t < hi)]
        if seg.size == 0:
            raise EmptySegmentError(f"segment {i} [{lo}, {hi}) has no samples")
        mean = float(seg.mean())
        if gate_s is not None:
            se = math.sqrt(max(mean, 0.0) / (gate_s * seg.size))
        elif seg.size > 1:
            se = float(seg.std(ddof=1) / math.sqrt(seg.size))
        else:
            se = 0.0
        out.append((mean, se))
    return out
