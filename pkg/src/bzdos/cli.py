"""``bzdos`` command line driver.

Exit codes: 0 success, 1 usage or configuration error, 2 failed deformation
diagnostic.
"""

import argparse
from dataclasses import fields, replace
import logging
from pathlib import Path
import sys

from . import study
from .study import EXIT_OK, EXIT_USAGE, ConfigError, StudySpec

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

CONFIG_KEYS = {f.name for f in fields(StudySpec)} | {"energy", "budgets", "etas", "target"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text):
    try:
        return tuple(float(x) for x in str(text).replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_common(p):
    p.add_argument("--config", help="TOML study file; flags override its keys")
    p.add_argument("--system", help="named reference system (chain, graphene, free-gas-1d/2d/3d, two-block)")
    p.add_argument("--hr", help="Wannier90 hr.dat file instead of a named system")
    p.add_argument("--fermi", type=float, help="chemical potential subtracted from the hr model (eV)")
    p.add_argument("--method", choices=study.METHODS)
    p.add_argument("--energy", type=_floats, help="energy or comma-separated energies (eV)")
    p.add_argument("--alpha", type=float, help="deformation strength (1/eV)")
    p.add_argument("--delta-e", dest="delta_e", type=float, help="deformation window width (eV)")
    p.add_argument("--eta", type=_floats, help="smearing width, or a grid of widths for sweeps")
    p.add_argument("--n", type=int, help="grid points per axis")
    p.add_argument("--tol", type=float, help="adaptive tolerance, or target error for 'cost'")
    p.add_argument("--schedule", type=_floats, help="N values (tolerances for iai, budgets for eta-sweep)")
    p.add_argument("--reference", help="'analytic', 'none', or an energy,value CSV")
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int)
    p.add_argument("--no-timing", dest="timing", action="store_false", default=None,
                   help="write 0 for wall times so CSV output is byte-reproducible")


def build_parser():
    parser = _Parser(prog="bzdos", description="Brillouin zone DOS integration studies")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in [
        ("dos", "evaluate the DOS at one or more energies"),
        ("converge", "error against a reference over an N (or tolerance) schedule"),
        ("eta-sweep", "best smearing width per evaluation budget"),
        ("cost", "evaluations needed to reach a target error, per smearing width"),
        ("diagnose", "check the complex deformation for poles pushed the wrong way"),
    ]:
        _add_common(sub.add_parser(name, help=text, description=text))
    pl = sub.add_parser("plot", help="log-log SVG of convergence CSV files")
    pl.add_argument("csv", nargs="+")
    pl.add_argument("--out", required=True, help="SVG file to write")
    pl.add_argument("--x", default="nevals")
    pl.add_argument("--y", default="rel_error")
    pl.add_argument("--title")
    return parser


def load_config(path):
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    table = data.get("study", data)
    unknown = set(table) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return dict(table)


def spec_from_args(args):
    """Merge the config file (if any) with command-line flags into a StudySpec."""
    conf = load_config(args.config) if getattr(args, "config", None) else {}
    flags = {k: v for k, v in vars(args).items() if v is not None
             and k not in ("command", "config", "verbose")}
    merged = {**conf, **flags}

    if "energy" in merged:
        e = merged.pop("energy")
        merged["energies"] = tuple(e) if isinstance(e, (list, tuple)) else (float(e),)
    etas = merged.pop("eta", None)
    if etas is not None:
        etas = tuple(etas) if isinstance(etas, (list, tuple)) else (float(etas),)
        merged["eta"] = etas[0]
    if "etas" in merged:
        etas = tuple(merged.pop("etas"))
    extra = {k: merged.pop(k) for k in ("budgets", "target") if k in merged}
    if "tol" in merged:
        extra.setdefault("target", merged["tol"])
    if "schedule" in merged:
        merged["schedule"] = tuple(merged["schedule"])
    if "energies" in merged:
        merged["energies"] = tuple(float(x) for x in merged["energies"])
    if merged.get("reference") in ("none", ""):
        merged["reference"] = None
    if merged.get("hr"):
        merged["system"] = None
    spec = StudySpec(**merged)
    spec.extra = {"etas": etas or ((spec.eta,) if spec.eta else ()), **extra}
    return spec


def _outdir(spec):
    if spec.out is None:
        return None
    out = Path(spec.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(text, outdir, name):
    sys.stdout.write(text)
    if outdir is not None:
        (outdir / name).write_text(text)


def _tag(x):
    return f"{x:g}".replace("-", "m")


def cmd_dos(spec):
    spec.validate()
    model, exact = study.load_model(spec)
    lines = ["energy,value,nevals,wall_time_s"]
    for E in spec.energies:
        est = study.evaluate(model, spec, E)
        t = est.wall_time if spec.timing else 0.0
        lines.append(f"{E!r},{est.value!r},{est.n_evals},{t!r}")
    _emit("\n".join(lines) + "\n", _outdir(spec), f"dos_{spec.method}.csv")
    return EXIT_OK


def cmd_converge(spec):
    spec.validate()
    model, exact = study.load_model(spec)
    outdir = _outdir(spec)
    for E in spec.energies:
        rows = study.run_convergence(spec, E, model, exact)
        _emit(study.rows_to_csv(rows), outdir, f"converge_{spec.method}_E{_tag(E)}.csv")
    return EXIT_OK


def cmd_eta_sweep(spec):
    etas = spec.extra.get("etas") or ()
    budgets = spec.extra.get("budgets") or spec.schedule
    if len(etas) < 1:
        raise ConfigError("eta-sweep needs --eta with one or more widths")
    best, rows = study.optimal_eta_sweep(replace(spec, schedule=()), etas, budgets)
    lines = ["budget,eta,n,nevals,value,abs_error"]
    lines += [f"{b},{e!r},{n},{ne},{v!r},{err!r}" for b, e, n, ne, v, err in rows]
    outdir = _outdir(spec)
    _emit("\n".join(lines) + "\n", outdir, "eta_sweep.csv")
    summary = ["budget,best_eta,abs_error"] + [f"{b},{e!r},{err!r}" for b, (e, err) in best.items()]
    _emit("\n".join(summary) + "\n", outdir, "eta_best.csv")
    return EXIT_OK


def cmd_cost(spec):
    target = spec.extra.get("target")
    if target is None:
        raise ConfigError("cost needs a target error (--tol)")
    etas = spec.extra.get("etas") or ()
    if not etas:
        raise ConfigError("cost needs --eta with one or more widths")
    rows = study.cost_to_accuracy(replace(spec, eta=etas[0]), target, etas)
    _emit(study.cost_rows_to_csv(rows), _outdir(spec), f"cost_{spec.method}.csv")
    return EXIT_OK


def cmd_diagnose(spec):
    reports, code = study.diagnose(spec)
    text = []
    for E, rep in reports.items():
        text.append(f"E={E!r}: " + rep.summary())
    _emit("\n".join(text) + "\n", _outdir(spec), "diagnose.txt")
    return code


def cmd_plot(args):
    from .plot import emit_plot

    emit_plot(args.csv, args.out, args.x, args.y, title=args.title)
    return EXIT_OK


COMMANDS = {"dos": cmd_dos, "converge": cmd_converge, "eta-sweep": cmd_eta_sweep,
            "cost": cmd_cost, "diagnose": cmd_diagnose}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "plot":
            return cmd_plot(args)
        spec = spec_from_args(args)
        return COMMANDS[args.command](spec)
    except (ConfigError, FileNotFoundError, KeyError, ValueError, TypeError) as exc:
        print(f"bzdos: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
