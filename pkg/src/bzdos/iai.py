"""Iterated adaptive integration of the smeared DOS.

Each dimension is integrated by a globally adaptive Gauss-Kronrod (7, 15)
rule; the integrand of an outer dimension is itself an adaptive integral over
the remaining dimensions.
"""

from dataclasses import dataclass
import heapq
import warnings

import numpy as np

from .grid import DosEstimate, Timer
from .ptr import _params, lorentzian

# Kronrod 15-point abscissae (positive half, descending) and weights
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
# 7-point Gauss weights on _XGK[1], _XGK[3], _XGK[5], 0
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
W_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
W_GAUSS = np.zeros(15)
W_GAUSS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


class BudgetExceeded(RuntimeWarning):
    """Subdivision budget hit before the tolerance was met."""


@dataclass(frozen=True)
class AdaptiveConfig:
    abs_tol: float = 1e-8
    rel_tol: float = 0.0
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.abs_tol > 0 or self.rel_tol < 0:
            raise ValueError("abs_tol must be > 0 and rel_tol >= 0")
        if self.rel_tol == 0 and self.abs_tol <= 0:
            raise ValueError("need a positive tolerance")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass
class QuadResult:
    value: float
    error: float
    n_evals: int
    converged: bool
    n_intervals: int


def _panel(f, a, b):
    c, r = 0.5 * (a + b), 0.5 * (b - a)
    fx = f(c + r * NODES)
    k = r * (W_KRONROD @ fx)
    g = r * (W_GAUSS @ fx)
    return k, abs(k - g)


def _panels(f, ab):
    """Evaluate several panels with one call to ``f``."""
    ab = np.asarray(ab, float)
    c = 0.5 * (ab[:, 0] + ab[:, 1])
    r = 0.5 * (ab[:, 1] - ab[:, 0])
    x = (c[:, None] + r[:, None] * NODES).reshape(-1)
    fx = np.asarray(f(x)).reshape(len(ab), 15)
    k = r * (fx @ W_KRONROD)
    g = r * (fx @ W_GAUSS)
    return k, np.abs(k - g)


def adaptive_1d(f, a, b, cfg=None):
    """Globally adaptive GK(7,15) quadrature of a vectorized ``f`` on ``[a, b]``.

    The interval with the largest error estimate ``|GK15 - G7|`` is bisected
    until the summed estimate is below ``max(abs_tol, rel_tol * |value|)``.
    If ``max_subdivisions`` is reached first the best estimate is returned with
    ``converged=False`` and a :class:`BudgetExceeded` warning.
    """
    cfg = cfg or AdaptiveConfig()
    val, err = _panel(f, a, b)
    heap = [(-err, 0, a, b, val, err)]
    total, total_err = val, err
    n_evals, n_sub, tick = 15, 0, 1
    while total_err > max(cfg.abs_tol, cfg.rel_tol * abs(total)):
        if n_sub >= cfg.max_subdivisions:
            warnings.warn(f"adaptive_1d: budget of {cfg.max_subdivisions} subdivisions "
                          f"exhausted (error {total_err:.2e})", BudgetExceeded, stacklevel=2)
            break
        _, _, lo, hi, v, e = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        vals, errs = _panels(f, [(lo, mid), (mid, hi)])
        n_evals += 30
        n_sub += 1
        for (l, h), v2, e2 in zip([(lo, mid), (mid, hi)], vals, errs):
            heapq.heappush(heap, (-e2, tick, l, h, v2, e2))
            tick += 1
        total += vals.sum() - v
        total_err += errs.sum() - e
        if n_sub % 64 == 0:  # limit drift of the running sums
            total = sum(item[4] for item in heap)
            total_err = sum(item[5] for item in heap)
    total = sum(item[4] for item in sorted(heap, key=lambda t: (t[2], t[3])))
    total_err = sum(item[5] for item in heap)
    converged = bool(total_err <= max(cfg.abs_tol, cfg.rel_tol * abs(total)))
    return QuadResult(float(total), float(total_err), n_evals, converged, len(heap))


def iai_dos(model, E, p, cfg=None):
    """Smeared DOS by iterated adaptive quadrature over the model's domain.

    The tolerance handed to an inner dimension is the outer tolerance divided
    by twice the width of the outer interval, so accumulated inner errors use
    at most half the outer budget.
    """
    p = _params(p)
    cfg = cfg or AdaptiveConfig()
    d = model.dim
    if d > 3:
        raise ValueError("iai_dos supports d <= 3")
    lo, hi = model.domain
    state = {"evals": 0, "converged": True, "error": 0.0}

    def integrand(points):
        state["evals"] += len(points)
        return lorentzian(model.eigvals(points) - E, p.eta).sum(axis=-1)

    def integrate(level, prefix, conf):
        if level == d - 1:
            def f(x):
                pts = np.empty((len(x), d))
                pts[:, :level] = prefix
                pts[:, level] = x
                return integrand(pts)
        else:
            width = hi[level] - lo[level]
            inner = AdaptiveConfig(conf.abs_tol / (2 * width), conf.rel_tol / 2,
                                   conf.max_subdivisions)

            def f(x):
                return np.array([integrate(level + 1, np.append(prefix, xi), inner).value
                                 for xi in x])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BudgetExceeded)
            res = adaptive_1d(f, lo[level], hi[level], conf)
        if not res.converged:
            state["converged"] = False
        if level == 0:
            state["error"] = res.error
        return res

    with Timer() as tm:
        res = integrate(0, np.empty(0), cfg)
    if not state["converged"]:
        warnings.warn("iai_dos: subdivision budget exhausted, returning partial value",
                      BudgetExceeded, stacklevel=2)
    return DosEstimate(res.value, state["evals"], tm.elapsed, "iai",
                       {"E": E, "eta": p.eta, "abs_tol": cfg.abs_tol, "rel_tol": cfg.rel_tol},
                       {"error": state["error"], "converged": state["converged"]})
