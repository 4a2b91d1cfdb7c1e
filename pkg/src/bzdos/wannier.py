"""Reader and writer for Wannier90 ``seedname_hr.dat`` files (v1 layout).

Layout::

    comment line
    num_wann
    nrpts
    degeneracies, 15 per line
    R1 R2 R3 m n Re Im      (nrpts * num_wann**2 records)

Reals may use Fortran ``D`` exponents.
"""

from dataclasses import dataclass
import io
from pathlib import Path

import numpy as np

from .models import TightBindingModel

DEGEN_PER_LINE = 15


class ParseError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class CountMismatch(ParseError):
    pass


@dataclass
class HrFile:
    header: str
    num_wann: int
    degeneracies: np.ndarray  # (nrpts,)
    R: np.ndarray  # (nrpts, 3) int, in file order
    H: np.ndarray  # (nrpts, num_wann, num_wann) complex, raw (not divided)

    @property
    def nrpts(self):
        return len(self.R)


def _int(tok, lineno):
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected integer, got {tok!r}", lineno) from None


def _real(tok, lineno):
    try:
        return float(tok.replace("D", "E").replace("d", "e"))
    except ValueError:
        raise ParseError(f"expected real, got {tok!r}", lineno) from None


def parse_hr(source):
    """Parse hr.dat content from a text stream, a string of file content or a path."""
    if isinstance(source, Path):
        text = source.read_text(encoding="utf-8")
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
    lines = text.splitlines()
    header = lines[0].rstrip("\n") if lines else ""

    def scalar(i, what):
        if i >= len(lines) or not lines[i].split():
            raise ParseError(f"missing {what}", i + 1)
        toks = lines[i].split()
        if len(toks) != 1:
            raise ParseError(f"expected a single integer for {what}", i + 1)
        val = _int(toks[0], i + 1)
        if val < 1:
            raise ParseError(f"{what} must be positive", i + 1)
        return val

    num_wann = scalar(1, "num_wann")
    nrpts = scalar(2, "nrpts")

    n_deg_lines = -(-nrpts // DEGEN_PER_LINE)
    degs = []
    for i in range(3, 3 + n_deg_lines):
        if i >= len(lines):
            raise CountMismatch(f"expected {nrpts} degeneracies, file ended", i + 1)
        degs.extend(_int(t, i + 1) for t in lines[i].split())
    if len(degs) != nrpts:
        raise CountMismatch(f"expected {nrpts} degeneracies, found {len(degs)}", 3 + n_deg_lines)
    if any(g < 1 for g in degs):
        raise ParseError("degeneracies must be positive", 4)

    M = num_wann
    blocks = {}
    seen = set()
    n_records = 0
    first = 3 + n_deg_lines
    for i in range(first, len(lines)):
        toks = lines[i].split()
        if not toks:
            continue
        lineno = i + 1
        if len(toks) != 7:
            raise ParseError(f"expected 7 fields, got {len(toks)}", lineno)
        r = tuple(_int(t, lineno) for t in toks[:3])
        m, n = _int(toks[3], lineno), _int(toks[4], lineno)
        if not (1 <= m <= M and 1 <= n <= M):
            raise ParseError(f"orbital index out of range 1..{M}", lineno)
        key = (r, m, n)
        if key in seen:
            raise ParseError(f"duplicate record R={r} m={m} n={n}", lineno)
        seen.add(key)
        val = complex(_real(toks[5], lineno), _real(toks[6], lineno))
        if r not in blocks:
            if len(blocks) == nrpts:
                raise CountMismatch(f"more than nrpts={nrpts} distinct R vectors", lineno)
            blocks[r] = np.zeros((M, M), complex)
        blocks[r][m - 1, n - 1] = val
        n_records += 1
    expected = nrpts * M * M
    if n_records != expected:
        raise CountMismatch(f"expected {expected} records, found {n_records}", len(lines))

    R = np.array(list(blocks), dtype=np.int64).reshape(nrpts, 3)
    H = np.array(list(blocks.values()))
    return HrFile(header, M, np.array(degs, dtype=np.int64), R, H)


def read_hr(path):
    return parse_hr(Path(path))


def _fmt(x):
    # leading space keeps 3-digit exponents from fusing with the previous field
    return f" {x:25.17e}"


def write_hr(hr, stream=None):
    """Serialize ``hr``; returns the text when ``stream`` is None."""
    out = io.StringIO() if stream is None else stream
    out.write(hr.header.replace("\n", " ") + "\n")
    out.write(f"{hr.num_wann:12d}\n{hr.nrpts:12d}\n")
    degs = list(hr.degeneracies)
    for s in range(0, len(degs), DEGEN_PER_LINE):
        out.write("".join(f"{g:5d}" for g in degs[s:s + DEGEN_PER_LINE]) + "\n")
    for r, block in zip(hr.R, hr.H):
        for n in range(hr.num_wann):
            for m in range(hr.num_wann):
                v = block[m, n]
                out.write(f"{r[0]:5d}{r[1]:5d}{r[2]:5d}{m + 1:5d}{n + 1:5d}"
                          f"{_fmt(v.real)}{_fmt(v.imag)}\n")
    return out.getvalue() if stream is None else None


def _infer_dim(R):
    nz = np.flatnonzero(np.any(R != 0, axis=0))
    return max(1, int(nz[-1]) + 1) if len(nz) else 1


def to_model(hr, fermi_shift=0.0, strict=False, dim=None):
    """Tight-binding model from an hr file with energies measured from ``fermi_shift``.

    Blocks are divided by their degeneracy.  ``dim`` defaults to the number of
    leading lattice axes actually used by the R vectors, so a chain stored as
    ``(R, 0, 0)`` becomes a 1D model.
    """
    d = _infer_dim(hr.R) if dim is None else int(dim)
    if np.any(hr.R[:, d:] != 0):
        raise ValueError(f"R vectors use more than {d} axes")
    R = hr.R[:, :d]
    keys = [tuple(r) for r in R]
    if len(set(keys)) != len(keys):
        raise ValueError("R vectors collide after dropping unused axes")
    H = hr.H / hr.degeneracies[:, None, None]
    shift = fermi_shift * np.eye(hr.num_wann)
    zero = [i for i, k in enumerate(keys) if not any(k)]
    if zero:
        H = H.copy()
        H[zero[0]] -= shift
    else:
        R = np.vstack([R, np.zeros((1, d), np.int64)])
        H = np.concatenate([H, -shift[None]])
    return TightBindingModel(R, H, strict=strict)


def from_model(model, header="written by bzdos"):
    """HrFile for a tight-binding model (degeneracies 1, R padded to three axes)."""
    R = np.zeros((len(model.R), 3), dtype=np.int64)
    R[:, :model.dim] = model.R
    H = model.HR.copy()
    if not np.any(np.all(R == 0, axis=1)):  # hr files always carry the on-site block
        R = np.vstack([R, np.zeros((1, 3), np.int64)])
        H = np.concatenate([H, np.zeros((1,) + H.shape[1:], complex)])
        order = np.lexsort(R.T[::-1])
        R, H = R[order], H[order]
    return HrFile(header, model.nbands, np.ones(len(R), dtype=np.int64), R, H)
