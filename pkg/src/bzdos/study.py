"""Convergence, smearing and cost studies over the four DOS integrators."""

from dataclasses import dataclass, field, replace
import csv
import io
import math
from pathlib import Path
from typing import Optional

import numpy as np

from .bcd import BcdParams, bcd_diagnose, bcd_dos
from .iai import AdaptiveConfig, iai_dos
from .lt import lt_dos
from .ptr import ptr_dos
from .reference import SYSTEMS, SRVO3_FERMI_EV, get_system

METHODS = ("ptr", "iai", "lt", "bcd")
SMEARED = ("ptr", "iai")
CSV_HEADER = ("n", "nevals", "wall_time_s", "value", "abs_error", "rel_error")
EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2


class ConfigError(ValueError):
    pass


class ReferenceMissing(ConfigError):
    pass


class TargetUnreachable(RuntimeError):
    pass


@dataclass
class StudySpec:
    """Everything needed to reproduce one study.

    ``schedule`` holds grid sizes ``N`` for ptr/lt/bcd and tolerances for iai;
    it must be ordered from cheapest to most accurate.  ``reference`` is
    ``"analytic"`` (the system's exact DOS), a path to an ``energy,value`` CSV,
    or ``None``.
    """

    system: Optional[str] = "chain"
    hr: Optional[str] = None
    fermi: float = 0.0
    method: str = "bcd"
    energies: tuple = (0.0,)
    eta: Optional[float] = None
    alpha: float = 0.1
    delta_e: float = 0.3
    diag_tol: float = 1e-6
    n: int = 100
    tol: float = 1e-8
    schedule: tuple = ()
    reference: Optional[str] = "analytic"
    out: Optional[str] = None
    threads: int = 1
    timing: bool = True
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.hr is None:
            if self.system not in SYSTEMS:
                raise ConfigError(f"unknown system {self.system!r}; choose from {sorted(SYSTEMS)}")
        elif not Path(self.hr).is_file():
            raise ConfigError(f"hr file not found: {self.hr}")
        if not self.energies or not all(math.isfinite(e) for e in self.energies):
            raise ConfigError("energies must be a nonempty list of finite numbers")
        if self.method in SMEARED and not (self.eta and self.eta > 0):
            raise ConfigError(f"method {self.method} needs a positive eta")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.schedule:
            s = list(self.schedule)
            if self.method == "iai":
                ok = all(b < a for a, b in zip(s, s[1:])) and all(x > 0 for x in s)
                what = "tolerance schedule must be positive and strictly decreasing"
            else:
                ok = all(b > a for a, b in zip(s, s[1:])) and all(x >= 2 for x in s)
                what = "N schedule must be >= 2 and strictly increasing"
            if not ok:
                raise ConfigError(what)
        return self

    @property
    def bcd_params(self):
        return BcdParams(self.alpha, self.delta_e, self.diag_tol)


@dataclass
class ConvergenceRow:
    n: float
    nevals: int
    wall_time_s: float
    value: float
    abs_error: Optional[float] = None
    rel_error: Optional[float] = None


def load_model(spec):
    """``(model, exact_dos or None)`` for the study's system."""
    if spec.hr is not None:
        from .wannier import read_hr, to_model

        return to_model(read_hr(spec.hr), spec.fermi), None
    sysm = get_system(spec.system)
    return sysm.model, sysm.exact_dos


def reference_value(spec, E, exact=None):
    if spec.reference is None:
        raise ReferenceMissing("no reference configured")
    if spec.reference == "analytic":
        if exact is None:
            raise ReferenceMissing("the system has no analytic reference DOS")
        return float(exact(E))
    table = read_reference_csv(spec.reference)
    for e, v in table:
        if abs(e - E) <= 1e-12 * max(1.0, abs(E)):
            return v
    raise ReferenceMissing(f"reference file has no entry for E={E}")


def read_reference_csv(path):
    from .wannier import ParseError

    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["energy", "value"]:
            raise ParseError("reference CSV must start with 'energy,value'", 1)
        for i, row in enumerate(reader, start=2):
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                raise ParseError(f"malformed reference row {row!r}", i) from None
    return rows


def evaluate(model, spec, E, n=None, tol=None, eta=None):
    """Run ``spec.method`` once; ``n``/``tol``/``eta`` override the spec."""
    eta = spec.eta if eta is None else eta
    m = spec.method
    if m == "ptr":
        return ptr_dos(model, E, eta, n or spec.n, spec.threads)
    if m == "iai":
        return iai_dos(model, E, eta, AdaptiveConfig(abs_tol=tol or spec.tol))
    if m == "lt":
        return lt_dos(model, E, n or spec.n, spec.threads)
    return bcd_dos(model, E, spec.bcd_params, n or spec.n, eta=eta or 0.0, threads=spec.threads)


def run_convergence(spec, E=None, model=None, exact=None, want_errors=None):
    """One :class:`ConvergenceRow` per schedule entry at energy ``E``.

    Errors are reported when a reference is configured; ``want_errors=True``
    without one raises :class:`ReferenceMissing`.
    """
    spec.validate()
    if not spec.schedule:
        raise ConfigError("convergence study needs a schedule")
    if model is None:
        model, exact = load_model(spec)
    E = spec.energies[0] if E is None else E
    if want_errors is None:
        want_errors = spec.reference is not None
    ref = reference_value(spec, E, exact) if want_errors else None
    rows = []
    for s in spec.schedule:
        if spec.method == "iai":
            est = evaluate(model, spec, E, tol=float(s))
        else:
            est = evaluate(model, spec, E, n=int(s))
        label = float(s) if spec.method == "iai" else int(s)
        row = ConvergenceRow(label, est.n_evals, est.wall_time if spec.timing else 0.0, est.value)
        if ref is not None:
            row.abs_error = abs(est.value - ref)
            row.rel_error = row.abs_error / abs(ref) if ref != 0 else math.inf
        rows.append(row)
    return rows


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def rows_to_csv(rows, stream=None):
    out = io.StringIO() if stream is None else stream
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([_cell(r.n), _cell(r.nevals), _cell(r.wall_time_s), _cell(r.value),
                    _cell(r.abs_error), _cell(r.rel_error)])
    return out.getvalue() if stream is None else None


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])


def optimal_eta_sweep(spec, etas, budgets, model=None, exact=None):
    """Best smearing width per evaluation budget, against the unsmeared reference.

    For each budget ``B`` the grid is ``N = floor(B**(1/d))`` per axis.
    Returns ``(best, rows)`` where ``best`` maps budget to ``(eta, error)``
    and ``rows`` are ``(budget, eta, N, nevals, value, abs_error)``.
    """
    spec = replace(spec, method="ptr", eta=spec.eta or 1.0)
    spec.validate()
    etas = [float(e) for e in etas]
    budgets = [int(b) for b in budgets]
    if not etas or any(e <= 0 for e in etas):
        raise ConfigError("eta grid must be nonempty and positive")
    if not budgets or any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise ConfigError("budgets must be strictly increasing")
    if model is None:
        model, exact = load_model(spec)
    E = spec.energies[0]
    ref = reference_value(spec, E, exact)
    best, rows = {}, []
    for b in budgets:
        N = max(1, int(math.floor(b ** (1.0 / model.dim) + 1e-9)))
        for eta in etas:
            est = ptr_dos(model, E, eta, N, spec.threads)
            err = abs(est.value - ref)
            rows.append((b, eta, N, est.n_evals, est.value, err))
            if b not in best or err < best[b][1]:
                best[b] = (eta, err)
    return best, rows


def smeared_reference(model, E, eta, tol=1e-12):
    """Converged smeared DOS from a tight-tolerance adaptive run."""
    return iai_dos(model, E, eta, AdaptiveConfig(abs_tol=tol, max_subdivisions=20000)).value


@dataclass
class CostRow:
    eta: float
    n: float
    nevals: int
    wall_time_s: float
    value: float
    abs_error: float
    reached: bool


def _smallest_n(run, target, n0=8, n_max=1 << 16, guard=1.25):
    """Smallest ``N`` whose error stays within ``target``: doubling, then bisection.

    A grid size only counts as reaching the target if ``ceil(guard * N)`` does
    too, which keeps an accidental dip of an oscillating error from being
    mistaken for convergence.
    """
    cache = {}

    def ok(n):
        for m in (n, math.ceil(guard * n)):
            if m not in cache:
                cache[m] = run(m)
            if cache[m][1] > target:
                return False
        return True

    lo, n = None, n0
    while not ok(n):
        lo = n
        if n >= n_max:
            raise TargetUnreachable(f"target {target:g} not reached at N={n}")
        n = min(2 * n, n_max)
    hi = n
    lo = lo or 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    est, err = cache[hi]
    return hi, est, err


def _largest_tol(run, target, steps=6):
    """Loosest tolerance meeting ``target`` (decade scan, then log bisection)."""
    tol, fail = 10 * target, None
    for _ in range(12):
        est, err = run(tol)
        if err <= target:
            break
        fail, tol = tol, tol / 10
    else:
        raise TargetUnreachable(f"target {target:g} not reached down to tol={tol:g}")
    best = (tol, est, err)
    if fail is None:
        return best
    lo, hi = math.log(tol), math.log(fail)
    for _ in range(steps):
        mid = math.exp(0.5 * (lo + hi))
        e_mid, err_mid = run(mid)
        if err_mid <= target:
            lo, best = math.log(mid), (mid, e_mid, err_mid)
        else:
            hi = math.log(mid)
    return best


def cost_to_accuracy(spec, target, etas, model=None, n_max=1 << 16):
    """Evaluation count needed to reach ``target`` against the smeared reference, per eta."""
    replace(spec, eta=spec.eta or 1.0).validate()
    if not target > 0:
        raise ConfigError("target must be positive")
    if spec.method == "lt":
        raise ConfigError("the tetrahedron method has no smearing parameter")
    if model is None:
        model, _ = load_model(spec)
    E = spec.energies[0]
    rows = []
    for eta in etas:
        ref = smeared_reference(model, E, eta)
        if spec.method == "iai":
            def run(tol, eta=eta, ref=ref):
                est = evaluate(model, spec, E, tol=tol, eta=eta)
                return est, abs(est.value - ref)
            search = lambda: _largest_tol(run, target)
        else:
            def run(n, eta=eta, ref=ref):
                est = evaluate(model, spec, E, n=n, eta=eta)
                return est, abs(est.value - ref)
            search = lambda: _smallest_n(run, target, n_max=n_max)
        try:
            n, est, err = search()
            rows.append(CostRow(eta, n, est.n_evals, est.wall_time if spec.timing else 0.0,
                                est.value, err, True))
        except TargetUnreachable:
            rows.append(CostRow(eta, math.nan, 0, 0.0, math.nan, math.nan, False))
    return rows


def cost_rows_to_csv(rows, stream=None):
    out = io.StringIO() if stream is None else stream
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("eta", "n", "nevals", "wall_time_s", "value", "abs_error", "reached"))
    for r in rows:
        w.writerow([_cell(r.eta), _cell(r.n), _cell(r.nevals), _cell(r.wall_time_s),
                    _cell(r.value), _cell(r.abs_error), int(r.reached)])
    return out.getvalue() if stream is None else None


def diagnose(spec, model=None):
    """Run the deformation diagnostic at every energy; returns ``(reports, exit_code)``."""
    spec = replace(spec, method="bcd")
    spec.validate()
    if model is None:
        model, _ = load_model(spec)
    reports = {E: bcd_diagnose(model, E, spec.bcd_params, spec.n, spec.threads)
               for E in spec.energies}
    code = EXIT_FAILED if any(r.failed for r in reports.values()) else EXIT_OK
    return reports, code


__all__ = ["CSV_HEADER", "ConfigError", "ConvergenceRow", "CostRow", "METHODS",
           "ReferenceMissing", "SRVO3_FERMI_EV", "StudySpec", "TargetUnreachable",
           "cost_rows_to_csv", "cost_to_accuracy", "diagnose", "evaluate", "load_model",
           "loglog_slope", "optimal_eta_sweep", "read_reference_csv", "rows_to_csv",
           "run_convergence", "smeared_reference"]
