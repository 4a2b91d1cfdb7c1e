"""Periodic Hamiltonians on the reduced Brillouin zone.

All wavevectors are fractional coordinates on the cube ``[-1/2, 1/2)^d`` and
phases are ``exp(2*pi*i k.R)``.  Every evaluation routine accepts arrays of
shape ``(..., d)`` and is vectorized over the leading axes; complex ``k`` is
allowed everywhere because a finite Fourier sum is an entire function.

Two model families share one interface used by all the integrators:

``TightBindingModel``
    finite sum of hopping matrices, eigen-data from a Hermitian solver.
``AnalyticBandModel``
    explicit band functions with closed-form complex extension, gradient and
    Hessian (free electron gas, two-block toy model, ...).
"""

from dataclasses import dataclass
import warnings

import numpy as np

from . import smalllinalg as sla

TWO_PI = 2.0 * np.pi
DEFAULT_SHIFT_CAP = 0.25


class HermiticityViolation(ValueError):
    pass


@dataclass(frozen=True)
class KPoint:
    """A fractional wavevector with an optional imaginary shift."""

    k: tuple
    h: tuple = None
    cap: float = DEFAULT_SHIFT_CAP

    def __post_init__(self):
        k = np.atleast_1d(np.asarray(self.k, dtype=float))
        if not np.all(np.isfinite(k)):
            raise ValueError("k must be finite")
        object.__setattr__(self, "k", tuple(k))
        if self.h is not None:
            h = np.atleast_1d(np.asarray(self.h, dtype=float))
            if h.shape != k.shape or not np.all(np.isfinite(h)):
                raise ValueError("h must be finite and match k")
            if np.any(np.abs(h) > self.cap):
                raise ValueError(f"|h| exceeds the cap {self.cap}")
            object.__setattr__(self, "h", tuple(h))

    @property
    def value(self):
        k = np.array(self.k)
        return k if self.h is None else k + 1j * np.array(self.h)


def _kvec(k, dim):
    if isinstance(k, KPoint):
        k = k.value
    k = np.asarray(k)
    if dim == 1 and (k.ndim == 0 or k.shape[-1] != 1):
        k = k[..., None]
    if k.shape[-1] != dim:
        raise ValueError(f"expected k with last axis {dim}, got shape {k.shape}")
    return k


class Model:
    """Interface shared by tight-binding and analytic band models."""

    dim: int
    nbands: int
    periodic = True

    @property
    def domain(self):
        """``(lo, hi)`` arrays bounding the integration box."""
        return np.full(self.dim, -0.5), np.full(self.dim, 0.5)

    @property
    def volume(self):
        lo, hi = self.domain
        return float(np.prod(hi - lo))

    def eigvals(self, k):
        raise NotImplementedError

    def resolvent_trace(self, kc, z, E=None):
        """``Tr((z - H(kc))^-1)`` at possibly complex ``kc``.

        ``E`` is the real target energy; band models with a
        ``resolvent_weight`` only apply it when ``E`` is given.
        """
        raise NotImplementedError

    def deformed_eigvals(self, kc):
        raise NotImplementedError


class TightBindingModel(Model):
    """Finite Fourier sum ``H(k) = sum_R exp(2 pi i k.R) H_R / w_R``.

    Parameters
    ----------
    R : (nR, d) int array
        Lattice vectors.
    HR : (nR, M, M) complex array
        Hopping matrices.
    weights : (nR,) array, optional
        Degeneracy divisors (Wannier90 convention), default 1.
    strict : bool
        If False (default) missing ``-R`` partners are added as ``H_R^dagger``;
        if True any violation of ``H_{-R} = H_R^dagger`` raises
        :class:`HermiticityViolation`.
    tol : float
        Tolerance for the closure check.
    """

    def __init__(self, R, HR, weights=None, strict=False, tol=1e-8):
        R = np.atleast_2d(np.asarray(R, dtype=np.int64))
        HR = np.asarray(HR, dtype=complex)
        if HR.ndim == 2:
            HR = HR[None]
        if HR.shape[0] != R.shape[0] or HR.shape[1] != HR.shape[2]:
            raise ValueError("R and HR shapes are inconsistent")
        w = np.ones(len(R)) if weights is None else np.asarray(weights, dtype=float)
        if w.shape != (len(R),) or np.any(w <= 0):
            raise ValueError("weights must be positive, one per R")
        if not np.all(np.isfinite(HR)):
            raise ValueError("hopping matrices must be finite")
        keys = [tuple(int(x) for x in r) for r in R]
        if len(set(keys)) != len(keys):
            raise ValueError("R vectors must be unique")

        blocks = {key: HR[i] / w[i] for i, key in enumerate(keys)}
        worst = (0.0, None)
        for key in list(blocks):
            mkey = tuple(-x for x in key)
            if mkey not in blocks:
                if strict:
                    raise HermiticityViolation(f"no partner for R={key}")
                blocks[mkey] = blocks[key].conj().T
                continue
            diff = np.abs(blocks[mkey] - blocks[key].conj().T)
            m, n = np.unravel_index(np.argmax(diff), diff.shape)
            if diff[m, n] > worst[0]:
                worst = (diff[m, n], (key, int(m), int(n)))
        if worst[0] > tol:
            (key, m, n) = worst[1]
            msg = f"H(-R) != H(R)^dagger, worst at R={key}, m={m + 1}, n={n + 1}: {worst[0]:.3e}"
            if strict:
                raise HermiticityViolation(msg)
            warnings.warn(msg + " (symmetrizing)", stacklevel=2)

        order = sorted(blocks)
        self.R = np.array(order, dtype=np.int64).reshape(len(order), -1)
        # symmetrize so that H(k) is Hermitian to rounding for real k
        self.HR = np.array([0.5 * (blocks[r] + blocks[tuple(-x for x in r)].conj().T)
                            for r in order])
        self.dim = self.R.shape[1]
        self.nbands = self.HR.shape[1]

    @classmethod
    def from_terms(cls, terms, **kwargs):
        """Build from a mapping ``{R: H_R}`` (``R`` an int tuple)."""
        items = list(terms.items())
        R = [np.atleast_1d(r) for r, _ in items]
        HR = [np.atleast_2d(np.asarray(h, dtype=complex)) for _, h in items]
        return cls(R, HR, **kwargs)

    def _phases(self, k):
        return np.exp(TWO_PI * 1j * (k @ self.R.T))  # (..., nR)

    def hamiltonian(self, k):
        k = _kvec(k, self.dim)
        return np.einsum("...r,rmn->...mn", self._phases(k), self.HR)

    def gradient(self, k):
        """``dH/dk_j`` stacked on axis -3: shape ``(..., d, M, M)``."""
        k = _kvec(k, self.dim)
        fac = TWO_PI * 1j * self.R  # (nR, d)
        return np.einsum("...r,rj,rmn->...jmn", self._phases(k), fac, self.HR)

    def hessian(self, k):
        """``d2H/dk_i dk_j``: shape ``(..., d, d, M, M)``."""
        k = _kvec(k, self.dim)
        fac = TWO_PI * 1j * self.R
        return np.einsum("...r,ri,rj,rmn->...ijmn", self._phases(k), fac, fac, self.HR)

    def eigh(self, k):
        return sla.eigh_batch(self.hamiltonian(np.asarray(k, dtype=float)))

    def eigvals(self, k):
        return np.linalg.eigvalsh(self.hamiltonian(np.asarray(k, dtype=float)))

    def resolvent_trace(self, kc, z, E=None):
        return sla.resolvent_trace_batch(self.hamiltonian(kc), z)

    def deformed_eigvals(self, kc):
        return sla.eigvals_batch(self.hamiltonian(kc))


class AnalyticBandModel(Model):
    """Bands given as explicit functions.

    Parameters
    ----------
    dim, nbands : int
    bands : callable
        ``bands(k) -> (..., nbands)``; must accept complex ``k``.
    gradient : callable
        ``gradient(k) -> (..., nbands, d)`` at real ``k``.
    hessian : callable
        ``hessian(k) -> (..., nbands, d, d)`` at real ``k``.
    domain : (lo, hi), optional
        Integration box; defaults to the unit cube centred at 0.
    periodic : bool
        Whether the bands are periodic over ``domain``.
    resolvent_weight : callable, optional
        ``resolvent_weight(eps, E) -> weights`` applied to each band's pole in
        resolvent traces.  Must be entire in ``eps`` and equal 1 at ``eps=E``;
        used to turn a box-truncated band set into a periodic one.
    """

    def __init__(self, dim, nbands, bands, gradient, hessian, domain=None,
                 periodic=True, resolvent_weight=None, name=None):
        self.dim = int(dim)
        self.nbands = int(nbands)
        self._bands = bands
        self._gradient = gradient
        self._hessian = hessian
        self._domain = None if domain is None else (
            np.broadcast_to(np.asarray(domain[0], float), (self.dim,)).copy(),
            np.broadcast_to(np.asarray(domain[1], float), (self.dim,)).copy())
        self.periodic = periodic
        self.resolvent_weight = resolvent_weight
        self.name = name

    @property
    def domain(self):
        return super().domain if self._domain is None else self._domain

    def bands(self, k):
        return self._bands(_kvec(k, self.dim))

    def band_gradient(self, k):
        return self._gradient(_kvec(k, self.dim))

    def band_hessian(self, k):
        return self._hessian(_kvec(k, self.dim))

    def eigvals(self, k):
        return self.bands(np.asarray(k, dtype=float)).real

    def resolvent_trace(self, kc, z, E=None):
        eps = self.bands(kc)
        z = np.asarray(z)[..., None]
        diff = z - eps
        if np.any(diff == 0):
            idx = int(np.argmax(np.any(diff == 0, axis=-1).reshape(-1)))
            raise sla.SingularShift("deformed band hits the energy", index=idx)
        terms = 1.0 / diff
        if self.resolvent_weight is not None and E is not None:
            terms = terms * self.resolvent_weight(eps, E)
        return terms.sum(axis=-1)

    def deformed_eigvals(self, kc):
        return self.bands(kc)


def bloch_hamiltonian(model, k):
    return model.hamiltonian(k)


def bloch_gradient(model, k):
    return model.gradient(k)


def bloch_hessian(model, k):
    return model.hessian(k)


def band_eval(model, n, k, h=None):
    """Complex energy of band ``n`` at ``k + i h``."""
    if not 0 <= n < model.nbands:
        raise IndexError(f"band {n} out of range for {model.nbands} bands")
    kc = np.asarray(k, dtype=complex)
    if h is not None:
        kc = kc + 1j * np.asarray(h, dtype=float)
    return model.bands(kc)[..., n]
