"""Complex-deformed Brillouin zone integration of the (unsmeared) DOS.

The real integration cube is pushed to ``k + i h(k)`` with a Gaussian-windowed
gradient field ``h``.  For a field that moves every pole near the Fermi
surface into the lower half plane the resolvent integrand becomes smooth, so
a plain uniform grid converges exponentially without any smearing.

Conventions: wavevectors are fractional, ``alpha`` has units of inverse
energy, and ``chi(x) = exp(-x^2)`` with ``x = (eps - E) / delta_e``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import smalllinalg as sla
from .grid import DosEstimate, Timer, grid_map, ptr_grid
from .models import AnalyticBandModel, KPoint, _kvec


@dataclass(frozen=True)
class BcdParams:
    alpha: float = 0.1
    delta_e: float = 0.3
    diag_tol: float = 1e-6
    cutoff: str = "gaussian"

    def __post_init__(self):
        if not (self.alpha > 0 and np.isfinite(self.alpha)):
            raise ValueError("alpha must be positive")
        if not (self.delta_e > 0 and np.isfinite(self.delta_e)):
            raise ValueError("delta_e must be positive")
        if not self.diag_tol >= 0:
            raise ValueError("diag_tol must be >= 0")
        if self.cutoff != "gaussian":
            raise ValueError("only the Gaussian cutoff is supported")


@dataclass
class DeformedPoint:
    k: KPoint
    h: np.ndarray
    jac: np.ndarray
    det_factor: complex


@dataclass
class FailureReport:
    """Bands whose deformed energy moved into the upper half plane.

    ``entries`` holds ``(k, band, eps_real, im_shift)`` for offending points
    only; ``worst_im`` is the largest imaginary part seen among all inspected
    bands (``-inf`` if nothing lay within ``delta_e / 2`` of ``E``).
    """

    entries: list = field(default_factory=list)
    worst_im: float = -np.inf
    failed: bool = False
    n_inspected: int = 0

    def summary(self, limit=10):
        lines = [f"failed={self.failed} worst_im={self.worst_im:.3e} "
                 f"inspected={self.n_inspected} offending={len(self.entries)}"]
        worst = sorted(self.entries, key=lambda e: -e[3])[:limit]
        for k, n, eps, im in worst:
            ks = ", ".join(f"{x:+.6f}" for x in k.k)
            lines.append(f"  k=({ks}) band={n} eps={eps:+.6f} im={im:+.3e}")
        return "\n".join(lines)


def gaussian_cutoff(x):
    return np.exp(-np.square(x))


def divided_difference_gaussian(x, y):
    """``(exp(-x^2) - exp(-y^2)) / (x - y)`` without cancellation.

    Uses ``exp(-y^2) * expm1(-(x - y)(x + y)) / (x - y)``; equal arguments give
    the derivative ``-2 x exp(-x^2)``.
    """
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    diff = x - y
    same = diff == 0
    safe = np.where(same, 1.0, diff)
    out = np.exp(-y * y) * np.expm1(-safe * (x + y)) / safe
    out = np.where(same, -2.0 * x * np.exp(-x * x), out)
    return out if out.ndim else float(out)


def _matrix_field(model, K, E, p, want_jac):
    w, U = model.eigh(K)
    Ud = np.conj(np.swapaxes(U, -1, -2))
    V = Ud[..., None, :, :] @ model.gradient(K) @ U[..., None, :, :]  # (m, d, M, M)
    x = (w - E) / p.delta_e
    chi = gaussian_cutoff(x)
    diagV = np.real(np.diagonal(V, axis1=-2, axis2=-1))  # (m, d, M)
    h = -p.alpha * np.einsum("mjn,mn->mj", diagV, chi)
    if not want_jac:
        return h, None, w
    W = Ud[..., None, None, :, :] @ model.hessian(K) @ U[..., None, None, :, :]
    diagW = np.real(np.diagonal(W, axis1=-2, axis2=-1))  # (m, d, d, M)
    D = divided_difference_gaussian(x[..., :, None], x[..., None, :]) / p.delta_e
    second = np.einsum("mnk,mjnk,mikn->mij", D, V, V).real
    jac = -p.alpha * (np.einsum("mijn,mn->mij", diagW, chi) + second)
    return h, jac, w


def _band_field(model, K, E, p, want_jac):
    eps = model.eigvals(K)
    grad = model.band_gradient(K)  # (m, nb, d)
    x = (eps - E) / p.delta_e
    chi = gaussian_cutoff(x)
    h = -p.alpha * np.einsum("mnj,mn->mj", grad, chi)
    if not want_jac:
        return h, None, eps
    dchi = -2.0 * x * chi / p.delta_e
    jac = -p.alpha * (np.einsum("mnij,mn->mij", model.band_hessian(K), chi)
                      + np.einsum("mni,mnj,mn->mij", grad, grad, dchi))
    return h, jac, eps


def deformation_field(model, K, E, p, want_jac=True):
    """Vectorized ``h`` and ``dh_j/dk_i`` for points ``K`` of shape ``(m, d)``.

    Returns ``(h, jac, eps)`` with ``jac[m, i, j] = d h_j / d k_i`` and the real
    band energies ``eps``.
    """
    K = np.atleast_2d(np.asarray(K, float))
    if isinstance(model, AnalyticBandModel):
        return _band_field(model, K, E, p, want_jac)
    return _matrix_field(model, K, E, p, want_jac)


def _single(model, k):
    k = k.value if isinstance(k, KPoint) else k
    return _kvec(np.asarray(k, float), model.dim).reshape(1, model.dim)


def deformation(model, k, E, p=None):
    """Deformation vector ``h(k)`` at one real wavevector."""
    p = p or BcdParams()
    h, _, _ = deformation_field(model, _single(model, k), E, p, want_jac=False)
    return h[0]


def deformation_jacobian(model, k, E, p=None):
    """``J[i, j] = d h_j / d k_i`` at one real wavevector."""
    p = p or BcdParams()
    _, jac, _ = deformation_field(model, _single(model, k), E, p)
    return jac[0]


def deformed_point(model, k, E, p=None):
    p = p or BcdParams()
    h, jac, _ = deformation_field(model, _single(model, k), E, p)
    det = complex(sla.complex_det(np.eye(model.dim) + 1j * jac[0]))
    kp = k if isinstance(k, KPoint) else KPoint(np.atleast_1d(k))
    return DeformedPoint(kp, h[0], jac[0], det)


def bcd_dos(model, E, p=None, N=100, eta=0.0, threads=1):
    """DOS at ``E`` from the deformed resolvent integral on an ``N``-point grid.

    A positive ``eta`` evaluates the Lorentzian-smeared DOS on the same
    deformed contour.  Raises :class:`~bzdos.smalllinalg.SingularShift` naming
    the grid point if a deformed resolvent is singular.
    """
    p = p or BcdParams()
    if N < 2:
        raise ValueError("N must be >= 2")
    d = model.dim
    z = E + 1j * eta
    eye = np.eye(d)

    def work(K, start):
        h, jac, _ = deformation_field(model, K, E, p)
        kc = K + 1j * h
        try:
            tr = model.resolvent_trace(kc, z, E=E)
        except sla.SingularShift as exc:
            i = 0 if exc.index is None else exc.index
            raise sla.SingularShift(
                f"deformed resolvent singular at k={tuple(K[i])} (grid index {start + i})",
                index=start + i) from None
        det = sla.det_batch(eye + 1j * jac)
        return np.sum(tr * det)

    with Timer() as tm:
        parts = grid_map(work, d, N, model.domain, threads)
        total = np.sum(np.array(parts))
        value = -(model.volume * total / N**d).imag / np.pi
    return DosEstimate(float(value), N**d, tm.elapsed, "bcd",
                       {"E": E, "alpha": p.alpha, "delta_e": p.delta_e, "N": N, "eta": eta})


def _greedy_pairs(real, deformed):
    """Pair each real eigenvalue with a deformed one by smallest ``|Re lam - eps|``."""
    cost = np.abs(deformed.real[None, :] - real[:, None])
    order = np.argsort(cost, axis=None, kind="stable")
    pair = np.full(len(real), -1)
    used = np.zeros(len(deformed), bool)
    for flat in order:
        n, m = divmod(int(flat), len(deformed))
        if pair[n] < 0 and not used[m]:
            pair[n] = m
            used[m] = True
    return pair


def bcd_diagnose(model, E, p=None, N=100, threads=1):
    """Check that every pole near ``E`` was pushed into the lower half plane.

    Bands with ``|eps - E| < delta_e / 2`` on the grid are inspected; the
    deformed spectrum at ``k + i h(k)`` is paired with the real one and the
    imaginary part of each partner recorded.
    """
    p = p or BcdParams()
    if N < 2:
        raise ValueError("N must be >= 2")
    d = model.dim
    band_model = isinstance(model, AnalyticBandModel)

    def work(K, start):
        h, _, eps = deformation_field(model, K, E, p, want_jac=False)
        near = np.abs(eps - E) < p.delta_e / 2
        rows = np.flatnonzero(near.any(axis=-1))
        if len(rows) == 0:
            return [], -np.inf, 0
        lam = model.deformed_eigvals(K[rows] + 1j * h[rows])
        found, worst, count = [], -np.inf, 0
        for r, lam_k in zip(rows, lam):
            if band_model:
                im = lam_k.imag
            else:
                im = lam_k[_greedy_pairs(eps[r], lam_k)].imag
            for n in np.flatnonzero(near[r]):
                count += 1
                worst = max(worst, float(im[n]))
                if im[n] > p.diag_tol:
                    found.append((KPoint(K[r]), int(n), float(eps[r, n]), float(im[n])))
        return found, worst, count

    report = FailureReport()
    for found, worst, count in grid_map(work, d, N, model.domain, threads):
        report.entries.extend(found)
        report.worst_im = max(report.worst_im, worst)
        report.n_inspected += count
    report.failed = bool(report.worst_im > p.diag_tol)
    return report


__all__ = ["BcdParams", "DeformedPoint", "FailureReport", "gaussian_cutoff",
           "divided_difference_gaussian", "deformation_field", "deformation",
           "deformation_jacobian", "deformed_point", "bcd_dos", "bcd_diagnose",
           "ptr_grid"]
