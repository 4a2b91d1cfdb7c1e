"""Linear tetrahedron (Lehmann-Taut) density of states.

Each grid cube is split into ``d!`` Kuhn simplices that share the main
diagonal ``0 -> (1, ..., 1)``.  Bands are interpolated linearly on each
simplex and the DOS of the interpolant is evaluated in closed form.

Regimes are half-open (``e_i <= E < e_{i+1}``) and each formula is only
evaluated where its denominators are strictly positive, so degenerate corner
energies need no perturbation: a collapsed regime simply has zero width.
"""

from itertools import permutations
from math import factorial

import numpy as np

from .grid import DosEstimate, Timer, ptr_grid

ROW_BLOCK = 64


def kuhn_simplices(d):
    """Vertex offsets of the ``d!`` simplices tiling the unit cube.

    Returns an int array ``(d!, d+1, d)``; each simplex walks from the origin
    to ``(1, ..., 1)`` adding one unit vector at a time.
    """
    out = []
    for perm in permutations(range(d)):
        v = np.zeros(d, dtype=int)
        verts = [v.copy()]
        for axis in perm:
            v[axis] = 1
            verts.append(v.copy())
        out.append(verts)
    return np.array(out)


def _safe(den):
    return np.where(den > 0, den, 1.0)


def simplex_dos(corners, E, volume=1.0):
    """DOS at ``E`` of the linear interpolant on simplices with ``corners``.

    ``corners`` has shape ``(..., d+1)`` and must be sorted ascending along
    the last axis; ``volume`` broadcasts against the leading axes.
    """
    with np.errstate(over="ignore", invalid="ignore"):  # unselected regimes may blow up
        return _simplex_dos(corners, E, volume)


def _simplex_dos(corners, E, volume):
    e = np.asarray(corners, dtype=float)
    d = e.shape[-1] - 1
    out = np.zeros(e.shape[:-1])
    if d == 1:
        e0, e1 = e[..., 0], e[..., 1]
        m = (e0 <= E) & (E < e1)
        out = np.where(m, 1.0 / _safe(e1 - e0), 0.0)
    elif d == 2:
        e0, e1, e2 = (e[..., i] for i in range(3))
        m1 = (e0 <= E) & (E < e1)
        m2 = (e1 <= E) & (E < e2)
        r1 = 2 * (E - e0) / _safe((e1 - e0) * (e2 - e0))
        r2 = 2 * (e2 - E) / _safe((e2 - e0) * (e2 - e1))
        out = np.where(m1, r1, 0.0) + np.where(m2, r2, 0.0)
    elif d == 3:
        e0, e1, e2, e3 = (e[..., i] for i in range(4))
        m1 = (e0 <= E) & (E < e1)
        m2 = (e1 <= E) & (E < e2)
        m3 = (e2 <= E) & (E < e3)
        e10, e20, e30 = e1 - e0, e2 - e0, e3 - e0
        e21, e31, e32 = e2 - e1, e3 - e1, e3 - e2
        r1 = 3 * (E - e0) ** 2 / _safe(e10 * e20 * e30)
        x = E - e1
        r2 = (3 * e10 + 6 * x - 3 * (e20 + e31) * x**2 / _safe(e21 * e31)) / _safe(e20 * e30)
        r3 = 3 * (e3 - E) ** 2 / _safe(e30 * e31 * e32)
        out = np.where(m1, r1, 0.0) + np.where(m2, r2, 0.0) + np.where(m3, r3, 0.0)
    else:
        raise ValueError("simplex_dos supports d = 1, 2, 3")
    return out * volume


def simplex_idos(corners, E, volume=1.0):
    """Integrated counterpart of :func:`simplex_dos`: the occupied volume below ``E``."""
    with np.errstate(over="ignore", invalid="ignore"):  # unselected regimes may blow up
        return _simplex_idos(corners, E, volume)


def _simplex_idos(corners, E, volume):
    e = np.asarray(corners, dtype=float)
    d = e.shape[-1] - 1
    top = E >= e[..., -1]
    if d == 1:
        e0, e1 = e[..., 0], e[..., 1]
        m = (e0 <= E) & (E < e1)
        frac = np.where(m, (E - e0) / _safe(e1 - e0), 0.0)
    elif d == 2:
        e0, e1, e2 = (e[..., i] for i in range(3))
        m1 = (e0 <= E) & (E < e1)
        m2 = (e1 <= E) & (E < e2)
        r1 = (E - e0) ** 2 / _safe((e1 - e0) * (e2 - e0))
        r2 = 1 - (e2 - E) ** 2 / _safe((e2 - e0) * (e2 - e1))
        frac = np.where(m1, r1, 0.0) + np.where(m2, r2, 0.0)
    elif d == 3:
        e0, e1, e2, e3 = (e[..., i] for i in range(4))
        m1 = (e0 <= E) & (E < e1)
        m2 = (e1 <= E) & (E < e2)
        m3 = (e2 <= E) & (E < e3)
        e10, e20, e30 = e1 - e0, e2 - e0, e3 - e0
        e21, e31, e32 = e2 - e1, e3 - e1, e3 - e2
        r1 = (E - e0) ** 3 / _safe(e10 * e20 * e30)
        x = E - e1
        r2 = (e10**2 + 3 * e10 * x + 3 * x**2
              - (e20 + e31) * x**3 / _safe(e21 * e31)) / _safe(e20 * e30)
        r3 = 1 - (e3 - E) ** 3 / _safe(e30 * e31 * e32)
        frac = np.where(m1, r1, 0.0) + np.where(m2, r2, 0.0) + np.where(m3, r3, 0.0)
    else:
        raise ValueError("simplex_idos supports d = 1, 2, 3")
    return np.where(top, 1.0, frac) * volume


def _closed_grid(grid, periodic):
    """Append the wrap-around layer so the grid has ``N+1`` points per axis."""
    d = grid.ndim - 1
    if not periodic:
        return grid
    return np.pad(grid, [(0, 1)] * d + [(0, 0)], mode="wrap")


def _accumulate(closed, E, volume, fn):
    d = closed.ndim - 1
    N = closed.shape[0] - 1
    simp_vol = volume / (factorial(d) * N**d)
    simplices = kuhn_simplices(d)
    partials = []
    for r0 in range(0, N, ROW_BLOCK):
        r1 = min(r0 + ROW_BLOCK, N)
        block = 0.0
        for verts in simplices:
            corners = []
            for off in verts:
                sl = (slice(r0 + off[0], r1 + off[0]),) + tuple(
                    slice(o, o + N) for o in off[1:])
                corners.append(closed[sl])
            c = np.sort(np.stack(corners, axis=-1), axis=-1)
            block = block + np.sum(fn(c, E))
        partials.append(block)
    return float(np.sum(partials)) * simp_vol


def lt_dos_from_grid(grid, E, periodic=True, volume=1.0):
    """Tetrahedron DOS from band energies already sampled on a grid.

    ``grid`` has shape ``(N,)*d + (nbands,)`` when ``periodic`` (the wrap
    layer is added here) or ``(N+1,)*d + (nbands,)`` otherwise.
    """
    grid = np.asarray(grid, dtype=float)
    return _accumulate(_closed_grid(grid, periodic), E, volume, simplex_dos)


def lt_idos_from_grid(grid, E, periodic=True, volume=1.0):
    grid = np.asarray(grid, dtype=float)
    return _accumulate(_closed_grid(grid, periodic), E, volume, simplex_idos)


def band_grid(model, N):
    """Eigenvalues on the tetrahedron grid of ``model`` (open if periodic, closed otherwise)."""
    d = model.dim
    lo, hi = model.domain
    if model.periodic:
        pts = ptr_grid(d, N, model.domain)
        shape = (N,) * d
    else:
        idx = np.indices((N + 1,) * d).reshape(d, -1).T
        pts = lo + (hi - lo) * idx / N
        shape = (N + 1,) * d
    vals = np.concatenate([model.eigvals(pts[s:s + 8192]) for s in range(0, len(pts), 8192)])
    return vals.reshape(shape + (model.nbands,)), len(pts)


def lt_dos(model, E, N, threads=1):
    """Linear tetrahedron DOS of ``model`` at ``E`` on an ``N``-per-axis grid."""
    if N < 2:
        raise ValueError("N must be >= 2")
    with Timer() as tm:
        grid, n_evals = band_grid(model, N)
        value = lt_dos_from_grid(grid, E, model.periodic, model.volume)
    return DosEstimate(value, n_evals, tm.elapsed, "lt", {"E": E, "N": N})
