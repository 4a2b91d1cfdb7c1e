"""Lorentzian-smeared DOS on a uniform (Monkhorst-Pack) grid."""

from dataclasses import dataclass

import numpy as np

from .grid import DosEstimate, Timer, grid_sum, ptr_grid

__all__ = ["SmearingParams", "lorentzian", "ptr_grid", "ptr_dos", "ptr_dos_resolvent"]


@dataclass(frozen=True)
class SmearingParams:
    eta: float
    kernel: str = "lorentzian"

    def __post_init__(self):
        if not (np.isfinite(self.eta) and self.eta > 0):
            raise ValueError("eta must be positive and finite")
        if self.kernel != "lorentzian":
            raise ValueError("only the Lorentzian kernel is supported")


def lorentzian(x, eta):
    return (eta / np.pi) / (x * x + eta * eta)


def _params(p):
    return p if isinstance(p, SmearingParams) else SmearingParams(float(p))


def ptr_dos(model, E, p, N, threads=1):
    """Smeared DOS ``(V/N^d) sum_k sum_n K_eta(eps_nk - E)``."""
    p = _params(p)

    def integrand(k):
        return lorentzian(model.eigvals(k) - E, p.eta).sum(axis=-1)

    with Timer() as tm:
        total = grid_sum(integrand, model.dim, N, model.domain, threads)
        value = model.volume * total / N**model.dim
    return DosEstimate(float(value), N**model.dim, tm.elapsed, "ptr",
                       {"E": E, "eta": p.eta, "N": N})


def ptr_dos_resolvent(model, E, p, N, threads=1):
    """Same quantity through ``-Im Tr (E + i eta - H_k)^-1 / pi``."""
    p = _params(p)
    z = E + 1j * p.eta

    def integrand(k):
        return model.resolvent_trace(k.astype(complex), z)

    with Timer() as tm:
        total = grid_sum(integrand, model.dim, N, model.domain, threads)
        value = -(model.volume * total / N**model.dim).imag / np.pi
    return DosEstimate(float(value), N**model.dim, tm.elapsed, "ptr-resolvent",
                       {"E": E, "eta": p.eta, "N": N})
