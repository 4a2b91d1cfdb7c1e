"""Small dense complex linear algebra.

The single-matrix routines (:func:`hermitian_eig`, :func:`general_eigvals`,
:func:`resolvent_trace`, :func:`complex_det`) are self-contained
implementations for matrices of dimension up to a few hundred.  The ``*_batch``
helpers operate on stacks of matrices of shape ``(..., n, n)`` and are what the
integration methods call in their inner loops.
"""

import numpy as np

MAX_DIM = 256
PIVOT_FLOOR = 1e-300
DEFLATION_TOL = 1e-14


class LinAlgError(ArithmeticError):
    pass


class NotHermitian(LinAlgError, ValueError):
    pass


class NoConvergence(LinAlgError):
    pass


class SingularShift(LinAlgError):
    """A shifted matrix ``z - A`` has a vanishing pivot.

    ``index`` holds the position in the batch (or ``None`` for a single
    matrix) so that callers can report the offending k-point.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


def _as_square(A, name="A"):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    if A.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {A.shape[0]} exceeds {MAX_DIM}")
    return A


def hermitian_eig(A, tol=1e-10):
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi.

    Returns ``(w, V)`` with ``w`` ascending and ``A @ V ~= V * w``.
    """
    A = _as_square(A)
    n = A.shape[0]
    scale = np.max(np.abs(A))
    if np.max(np.abs(A - A.conj().T)) > tol * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    a = 0.5 * (A + A.conj().T)
    V = np.eye(n, dtype=complex)
    if n == 1 or scale == 0.0:
        w = a.diagonal().real.copy()
        order = np.argsort(w, kind="stable")
        return w[order], V[:, order]

    eps = np.finfo(float).eps
    fro = np.linalg.norm(a)
    for _ in range(64 * n):
        off = np.linalg.norm(a - np.diag(a.diagonal()))
        if off <= eps * fro:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-3 * eps * (abs(a[p, p]) + abs(a[q, q])) or mag <= PIVOT_FLOOR:
                    a[p, q] = a[q, p] = 0.0
                    continue
                phase = apq / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = np.copysign(1.0, tau) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # G acts on columns (p, q): [[c, s], [-s*conj(phase), c*conj(phase)]]
                colp = a[:, p].copy()
                colq = a[:, q] * np.conj(phase)
                a[:, p] = c * colp - s * colq
                a[:, q] = s * colp + c * colq
                rowp = a[p, :].copy()
                rowq = a[q, :] * phase
                a[p, :] = c * rowp - s * rowq
                a[q, :] = s * rowp + c * rowq
                a[p, q] = a[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q] * np.conj(phase)
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise NoConvergence(f"Jacobi did not converge in {64 * n} sweeps")

    w = a.diagonal().real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def _lu_inplace(M):
    """Partial-pivot LU of a single matrix; returns (LU, perm, parity, min_pivot)."""
    n = M.shape[0]
    perm = np.arange(n)
    parity = 1
    min_piv = np.inf
    for j in range(n):
        i = j + int(np.argmax(np.abs(M[j:, j])))
        if i != j:
            M[[j, i]] = M[[i, j]]
            perm[[j, i]] = perm[[i, j]]
            parity = -parity
        piv = M[j, j]
        min_piv = min(min_piv, abs(piv))
        if abs(piv) < PIVOT_FLOOR:
            continue
        M[j + 1:, j] /= piv
        M[j + 1:, j + 1:] -= np.outer(M[j + 1:, j], M[j, j + 1:])
    return M, perm, parity, min_piv


def resolvent_trace(A, z):
    """``Tr((z I - A)^-1)`` from one LU factorization."""
    A = _as_square(A)
    n = A.shape[0]
    LU, perm, _, min_piv = _lu_inplace(z * np.eye(n) - A)
    if min_piv < PIVOT_FLOOR:
        raise SingularShift(f"z={z} is (numerically) an eigenvalue of A")
    total = 0j
    for col in range(n):
        # solve (zI - A) x = e_col, keep x[col]
        b = (perm == col).astype(complex)
        for i in range(n):
            b[i] -= LU[i, :i] @ b[:i]
        for i in range(n - 1, -1, -1):
            b[i] = (b[i] - LU[i, i + 1:] @ b[i + 1:]) / LU[i, i]
        total += b[col]
    return complex(total)


def complex_det(A):
    """Determinant by partial-pivot LU; exactly 0 for a zero pivot."""
    A = _as_square(A)
    LU, _, parity, min_piv = _lu_inplace(A.copy())
    if min_piv == 0.0:
        return 0j
    return complex(parity * np.prod(LU.diagonal()))


def hessenberg(A):
    """Householder reduction to upper Hessenberg form (similarity transform)."""
    H = _as_square(A).copy()
    n = H.shape[0]
    for j in range(n - 2):
        x = H[j + 1:, j].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        H[j + 1:, :] -= 2.0 * np.outer(v, v.conj() @ H[j + 1:, :])
        H[:, j + 1:] -= 2.0 * np.outer(H[:, j + 1:] @ v, v.conj())
        H[j + 2:, j] = 0.0
    return H


def general_eigvals(A):
    """Eigenvalues of a general complex matrix (unordered).

    Hessenberg reduction followed by single-shift complex QR with Wilkinson
    shifts.  A subdiagonal entry is dropped once it is below
    ``1e-14 * (|h_ii| + |h_i+1,i+1|)``.
    """
    H = hessenberg(A)
    n = H.shape[0]
    eig = np.empty(n, dtype=complex)
    norm = np.max(np.abs(H))
    hi = n - 1
    stall = 0
    while hi >= 0:
        if hi == 0:
            eig[0] = H[0, 0]
            break
        lo = hi
        while lo > 0:
            s = abs(H[lo, lo]) + abs(H[lo - 1, lo - 1])
            if s == 0.0:
                s = norm
            if abs(H[lo, lo - 1]) <= DEFLATION_TOL * s:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eig[hi] = H[hi, hi]
            hi -= 1
            stall = 0
            continue
        stall += 1
        if stall > 30 * n:
            raise NoConvergence(f"QR made no progress after {30 * n} sweeps")

        a, b = H[hi - 1, hi - 1], H[hi - 1, hi]
        c, d = H[hi, hi - 1], H[hi, hi]
        if stall % 11 == 0:
            mu = d + 0.75 * abs(c)  # exceptional shift breaks cycles
        else:
            disc = np.sqrt(0.25 * (a - d) ** 2 + b * c)
            mu1 = 0.5 * (a + d) + disc
            mu2 = 0.5 * (a + d) - disc
            mu = mu1 if abs(mu1 - d) < abs(mu2 - d) else mu2

        blk = slice(lo, hi + 1)
        B = H[blk, blk]
        m = B.shape[0]
        B[np.diag_indices(m)] -= mu
        rots = []
        for j in range(m - 1):
            x, y = B[j, j], B[j + 1, j]
            r = np.hypot(abs(x), abs(y))
            if r == 0.0:
                cr, sr = 1.0 + 0j, 0j
            else:
                cr, sr = x / r, y / r
            rows = B[j:j + 2, j:].copy()
            B[j, j:] = np.conj(cr) * rows[0] + np.conj(sr) * rows[1]
            B[j + 1, j:] = -sr * rows[0] + cr * rows[1]
            rots.append((cr, sr))
        for j, (cr, sr) in enumerate(rots):
            top = min(j + 2, m)
            cols = B[:top, j:j + 2].copy()
            B[:top, j] = cols[:, 0] * cr + cols[:, 1] * sr
            B[:top, j + 1] = -cols[:, 0] * np.conj(sr) + cols[:, 1] * np.conj(cr)
        B[np.diag_indices(m)] += mu
        H[blk, blk] = B
    return eig


# --- batched helpers -------------------------------------------------------

def eigh_batch(H):
    """Hermitian eigen-decomposition of a stack ``(..., n, n)`` (LAPACK)."""
    return np.linalg.eigh(H)


def eigvals_batch(H):
    """General eigenvalues of a stack ``(..., n, n)`` (LAPACK)."""
    return np.linalg.eigvals(H)


def lu_batch(M):
    """Partial-pivot LU of a stack of matrices ``(P, n, n)``.

    Returns ``(LU, perm, parity, min_pivot)`` where ``min_pivot`` has shape
    ``(P,)``.  The factorization is vectorized across the stack; only the
    column loop (length ``n``) runs in Python.
    """
    LU = np.array(M, dtype=complex, copy=True)
    P, n, _ = LU.shape
    rows = np.arange(P)
    perm = np.tile(np.arange(n), (P, 1))
    parity = np.ones(P)
    min_piv = np.full(P, np.inf)
    for j in range(n):
        i = j + np.argmax(np.abs(LU[:, j:, j]), axis=1)
        swap = i != j
        if np.any(swap):
            r = rows[swap]
            tmp = LU[r, j, :].copy()
            LU[r, j, :] = LU[r, i[swap], :]
            LU[r, i[swap], :] = tmp
            tmp = perm[r, j].copy()
            perm[r, j] = perm[r, i[swap]]
            perm[r, i[swap]] = tmp
            parity[swap] *= -1
        piv = LU[:, j, j]
        apiv = np.abs(piv)
        min_piv = np.minimum(min_piv, apiv)
        safe = np.where(apiv < PIVOT_FLOOR, 1.0, piv)
        LU[:, j + 1:, j] /= safe[:, None]
        LU[:, j + 1:, j + 1:] -= LU[:, j + 1:, j, None] * LU[:, j, None, j + 1:]
    return LU, perm, parity, min_piv


def _inverse_diagonal(LU, perm):
    P, n, _ = LU.shape
    B = np.zeros((P, n, n), dtype=complex)
    cols = np.arange(n)
    B[np.arange(P)[:, None], cols[None, :], perm] = 1.0  # B = Pmat @ I
    for i in range(n):
        B[:, i, :] -= np.einsum("pk,pkc->pc", LU[:, i, :i], B[:, :i, :])
    for i in range(n - 1, -1, -1):
        B[:, i, :] -= np.einsum("pk,pkc->pc", LU[:, i, i + 1:], B[:, i + 1:, :])
        B[:, i, :] /= LU[:, i, i, None]
    return np.einsum("pii->pi", B)


def resolvent_trace_batch(H, z):
    """``Tr((z - H)^-1)`` for a stack ``(..., n, n)`` and scalar or stacked ``z``.

    Raises :class:`SingularShift` with the flat batch index of the first
    singular matrix.
    """
    H = np.asarray(H, dtype=complex)
    lead = H.shape[:-2]
    n = H.shape[-1]
    Hf = H.reshape(-1, n, n)
    z = np.broadcast_to(np.asarray(z, dtype=complex), lead).reshape(-1)
    M = z[:, None, None] * np.eye(n) - Hf
    if n == 1:
        piv = M[:, 0, 0]
        bad = np.abs(piv) < PIVOT_FLOOR
        if np.any(bad):
            raise SingularShift("singular shifted matrix", index=int(np.argmax(bad)))
        return (1.0 / piv).reshape(lead)
    LU, perm, _, min_piv = lu_batch(M)
    bad = min_piv < PIVOT_FLOOR
    if np.any(bad):
        raise SingularShift("singular shifted matrix", index=int(np.argmax(bad)))
    return _inverse_diagonal(LU, perm).sum(axis=-1).reshape(lead)


def det_batch(M):
    """Determinants of a stack ``(..., n, n)`` via batched LU."""
    M = np.asarray(M, dtype=complex)
    lead = M.shape[:-2]
    n = M.shape[-1]
    if n == 1:
        return M[..., 0, 0].copy()
    if n == 2:
        return M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
    LU, _, parity, min_piv = lu_batch(M.reshape(-1, n, n))
    d = parity * np.prod(np.einsum("pii->pi", LU), axis=-1)
    d[min_piv == 0.0] = 0.0
    return d.reshape(lead)
