"""Benchmark systems with exact or converged reference densities of states."""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .models import AnalyticBandModel, Model, TightBindingModel

SRVO3_FERMI_EV = 12.39


@dataclass(frozen=True)
class ReferenceSystem:
    name: str
    model: Model
    exact_dos: Optional[Callable] = None
    van_hove_energies: tuple = ()
    benchmark_energies: dict = field(default_factory=dict)


def make_chain(t=1.0):
    """Monatomic chain ``H(k) = 2 t cos(2 pi k)``."""
    if not t > 0:
        raise ValueError("t must be positive")
    model = TightBindingModel([[1], [-1]], [[[t]], [[t]]])

    def exact_dos(E):
        E = np.asarray(E, dtype=float)
        inside = np.abs(E) < 2 * t
        root = np.sqrt(np.where(inside, (2 * t) ** 2 - E**2, 1.0))
        return np.where(inside, 1.0 / (np.pi * root), 0.0)

    return ReferenceSystem(
        "chain", model, exact_dos, (-2 * t, 2 * t),
        {"easy": 0.0, "medium": 1.9 * t, "hard": 1.99 * t})


def chain_green_trace(z, t=1.0):
    """Local Green function ``int dk 1/(z - 2t cos 2 pi k)`` for ``Im z > 0``."""
    z = np.asarray(z, dtype=complex)
    root = np.sqrt(z - 2 * t) * np.sqrt(z + 2 * t)
    return 1.0 / root


def chain_smeared_dos(E, eta, t=1.0):
    """Closed-form Lorentzian-smeared chain DOS."""
    return -chain_green_trace(np.asarray(E) + 1j * eta, t).imag / np.pi


def elliptic_K(m):
    """Complete elliptic integral of the first kind, parameter ``m = k**2``.

    Arithmetic-geometric mean: ``K(m) = pi / (2 AGM(1, sqrt(1 - m)))``.
    """
    m = np.asarray(m, dtype=float)
    if np.any((m < 0) | (m >= 1)) or not np.all(np.isfinite(m)):
        raise ValueError("elliptic_K needs 0 <= m < 1")
    a = np.ones_like(m)
    b = np.sqrt(1.0 - m)
    for _ in range(64):
        if np.all(np.abs(a - b) <= 1e-16 * a):
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    out = np.pi / (2.0 * a)
    return float(out) if out.ndim == 0 else out


def graphene_dos_closed_form(E, t=1.0, variant="standard"):
    """Closed-form two-band graphene DOS per unit cell.

    ``variant="standard"`` uses ``F(x) = (1 + x)^2 - (x^2 - 1)^2 / 4``; the
    ``"printed"`` variant uses ``(x^2 - 1) / 4`` in place of the squared term.
    Kept for comparison only: the shipped reference is a converged
    tetrahedron run (see :func:`graphene_reference_dos`).
    """
    x = np.abs(np.atleast_1d(np.asarray(E, dtype=float))) / t
    if variant == "standard":
        F = (1 + x) ** 2 - (x**2 - 1) ** 2 / 4
    elif variant == "printed":
        F = (1 + x) ** 2 - (x**2 - 1) / 4
    else:
        raise ValueError(f"unknown variant {variant!r}")
    out = np.zeros_like(x)
    pref = 2 * x / (t * np.pi**2)
    low = (x > 0) & (x < 1)
    high = (x > 1) & (x < 3)
    with np.errstate(invalid="ignore", divide="ignore"):
        m_low = np.where(low, 4 * x / np.where(F > 0, F, 1.0), 0.0)
        m_high = np.where(high, F / np.where(x > 0, 4 * x, 1.0), 0.0)
    ok_low = low & (F > 0) & (m_low >= 0) & (m_low < 1)
    ok_high = high & (m_high >= 0) & (m_high < 1)
    out[ok_low] = pref[ok_low] / np.sqrt(F[ok_low]) * elliptic_K(m_low[ok_low])
    out[ok_high] = pref[ok_high] / np.sqrt(4 * x[ok_high]) * elliptic_K(m_high[ok_high])
    bad = (low & ~ok_low) | (high & ~ok_high)
    out[bad] = np.nan
    return out if np.ndim(E) else float(out[0])


def graphene_model(t=1.0):
    off = -t * np.array([[0, 1], [0, 0]], dtype=complex)
    terms = {
        (0, 0): off + off.conj().T,
        (1, 0): off,
        (-1, 0): off.conj().T,
        (0, 1): off,
        (0, -1): off.conj().T,
    }
    return TightBindingModel.from_terms(terms)


@lru_cache(maxsize=8)
def _graphene_grid(t, N, cache_dir):
    path = None
    if cache_dir is not None:
        path = Path(cache_dir) / f"graphene_t{t:g}_N{N}.npy"
        if path.exists():
            return np.load(path)
    k = np.arange(N) / N - 0.5
    f = -t * (1 + np.exp(2j * np.pi * k)[:, None] + np.exp(2j * np.pi * k)[None, :])
    mag = np.abs(f)
    grid = np.stack([-mag, mag], axis=-1)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.save(path, grid)
    return grid


def graphene_reference_dos(E, t=1.0, N=3000, cache_dir=None):
    """Converged linear-tetrahedron DOS of two-band graphene."""
    from .lt import lt_dos_from_grid

    grid = _graphene_grid(float(t), int(N), None if cache_dir is None else str(cache_dir))
    E = np.asarray(E, dtype=float)
    vals = [lt_dos_from_grid(grid, float(e), periodic=True) for e in E.reshape(-1)]
    return np.array(vals).reshape(E.shape) if E.ndim else vals[0]


def make_graphene(t=1.0, reference_n=3000, cache_dir=None):
    """Nearest-neighbour graphene in reduced coordinates.

    ``H12(k) = -t (1 + exp(2 pi i k1) + exp(2 pi i k2))``.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    model = graphene_model(t)

    def exact_dos(E):
        return graphene_reference_dos(E, t, reference_n, cache_dir)

    return ReferenceSystem(
        "graphene", model, exact_dos, (-3 * t, -t, 0.0, t, 3 * t),
        {"easy": 2.0 * t, "medium": 0.1 * t, "hard": 0.99 * t})


def _free_gas_model(d, g_max):
    G = np.array(list(product(range(-g_max, g_max + 1), repeat=d)), dtype=float)
    nb = len(G)
    cutoff = (g_max + 0.5) ** 2

    def bands(k):
        q = k[..., None, :] + G
        return np.sum(q * q, axis=-1)

    def gradient(k):
        return 2.0 * (k[..., None, :] + G)

    def hessian(k):
        shape = np.shape(k)[:-1] + (nb, d, d)
        return np.broadcast_to(2.0 * np.eye(d), shape)

    def weight(eps, E):
        # the box of G vectors is exact below `cutoff`; suppress everything
        # above it so the band sum is a periodic function of k
        width = (cutoff - np.asarray(E)[..., None]) / 6.0
        return np.exp(-(((eps - np.asarray(E)[..., None]) / width) ** 2))

    model = AnalyticBandModel(d, nb, bands, gradient, hessian,
                              resolvent_weight=weight, name=f"free-gas-{d}d")
    model.G = G
    model.cutoff = cutoff
    return model


def make_free_gas(d, g_max=1, fallback_n=None):
    """Free electron gas ``eps_G(k) = |k + G|^2`` for ``|G|_inf <= g_max``.

    The closed-form DOS (``1/sqrt(E)``, ``pi``, ``2 pi sqrt(E)``) is exact
    while the energy sphere fits inside the G box, i.e. for
    ``0 < E < (g_max + 1/2)^2``; above that a tetrahedron run on the
    truncated model is returned.
    """
    if d not in (1, 2, 3):
        raise ValueError("d must be 1, 2 or 3")
    if g_max < 1:
        raise ValueError("g_max must be >= 1")
    model = _free_gas_model(d, int(g_max))
    cutoff = model.cutoff
    n_fb = fallback_n or {1: 100_000, 2: 400, 3: 60}[d]

    def closed(E):
        E = np.asarray(E, dtype=float)
        pos = np.where(E > 0, E, 1.0)
        val = {1: 1.0 / np.sqrt(pos), 2: np.pi * np.ones_like(pos), 3: 2 * np.pi * np.sqrt(pos)}[d]
        return np.where(E > 0, val, 0.0)

    def exact_dos(E):
        from .lt import lt_dos

        E = np.asarray(E, dtype=float)
        out = closed(E)
        beyond = E >= cutoff
        if np.any(beyond):
            flat = out.reshape(-1)
            for i in np.flatnonzero(beyond.reshape(-1)):
                flat[i] = lt_dos(model, float(E.reshape(-1)[i]), n_fb).value
            out = flat.reshape(E.shape)
        return out if out.ndim else float(out)

    return ReferenceSystem(f"free-gas-{d}d", model, exact_dos, (0.0,),
                           {"easy": 0.1, "crossing": 0.25})


def make_two_block_toy(gamma=1.0, delta=2.0, window=None, delta_e=0.3):
    """Two decoupled linear bands ``diag(gamma k, -delta k)`` on ``[-window, window]``.

    The DOS is reported unnormalized, ``1/gamma + 1/delta`` inside the band
    range.  ``window`` defaults to ``10 * delta_e / min(gamma, delta)`` so the
    Gaussian deformation window has decayed far below rounding at the ends.
    """
    if not (gamma > 0 and delta > 0):
        raise ValueError("gamma and delta must be positive")
    if gamma == delta:
        raise ValueError("gamma == delta is excluded")
    if window is None:
        window = 10.0 * delta_e / min(gamma, delta)
    if not window > 0:
        raise ValueError("window must be positive")
    slopes = np.array([gamma, -delta], dtype=float)

    def bands(k):
        return k[..., :1] * slopes

    def gradient(k):
        return np.broadcast_to(slopes[:, None], np.shape(k)[:-1] + (2, 1)).astype(float)

    def hessian(k):
        return np.zeros(np.shape(k)[:-1] + (2, 1, 1))

    model = AnalyticBandModel(1, 2, bands, gradient, hessian, domain=(-window, window),
                              periodic=False, name="two-block")

    def exact_dos(E):
        E = np.asarray(E, dtype=float)
        val = (np.abs(E) < gamma * window) / gamma + (np.abs(E) < delta * window) / delta
        return val if val.ndim else float(val)

    return ReferenceSystem("two-block", model, exact_dos, (),
                           {"failure": 0.0})


SYSTEMS = {
    "chain": lambda: make_chain(1.0),
    "graphene": lambda: make_graphene(1.0),
    "free-gas-1d": lambda: make_free_gas(1),
    "free-gas-2d": lambda: make_free_gas(2),
    "free-gas-3d": lambda: make_free_gas(3),
    "two-block": lambda: make_two_block_toy(1.0, 2.0),
}


def get_system(name):
    try:
        return SYSTEMS[name]()
    except KeyError:
        raise KeyError(f"unknown system {name!r}; choose from {sorted(SYSTEMS)}") from None
