"""Command-line interface.

Subcommands: solve, curve, kfun, invert, fit, datasets, emit-plot.
Results go to stdout; diagnostics go to stderr as a single line
``specinv: <CODE>: <message>`` whose code (E_USAGE, E_DATA, E_COMPUTE,
E_IO) also selects the exit status.  All numbers are printed with
round-trip precision, and identical inputs produce byte-identical output.

Potentials are spelled ``name:param,param`` (coulomb:0.2, hulthen:1,1,
shifted-coulomb:0.14,0.01, yukawa:1); coupling and radial grids as
``start:stop:count`` (geometric when prefixed ``log:``).  A ``--config``
file of ``key = value`` lines supplies defaults; explicit flags win.
The SPECINV_OUTDIR environment variable sets the default output
directory for commands that write files.
"""
import argparse
import os
import sys

import numpy as np

from . import dataio
from .eigensolver import EigenProblem, energy_curve, solve_state
from .inversion import InversionConfig, estimate_critical_coupling, invert
from .models import fit_coulomb
from .potentials import Coulomb, Hulthen, ShiftedCoulomb, Yukawa
from .spectral import build_curve, k_function_from_shape

E_USAGE, E_DATA, E_COMPUTE, E_IO = "E_USAGE", "E_DATA", "E_COMPUTE", "E_IO"
_EXIT = {E_USAGE: 2, E_DATA: 3, E_COMPUTE: 4, E_IO: 5}


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _fmt(x):
    return repr(float(x))


_POTENTIALS = {
    "coulomb": (Coulomb, 1),
    "shifted-coulomb": (ShiftedCoulomb, 2),
    "hulthen": (Hulthen, 2),
    "yukawa": (Yukawa, 1),
}


def parse_potential(spec):
    """name:param,param -> PotentialShape."""
    name, _, tail = str(spec).partition(":")
    name = name.strip().lower()
    if name not in _POTENTIALS:
        raise CliError(E_USAGE, f"unknown potential {name!r}; "
                       f"have {', '.join(sorted(_POTENTIALS))}")
    ctor, arity = _POTENTIALS[name]
    try:
        params = [float(t) for t in tail.split(",")] if tail else []
    except ValueError:
        raise CliError(E_USAGE, f"bad parameter list in potential spec {spec!r}")
    if len(params) != arity:
        raise CliError(E_USAGE, f"potential {name!r} takes {arity} parameter(s), "
                       f"got {len(params)}")
    try:
        return ctor(*params)
    except ValueError as exc:
        raise CliError(E_USAGE, f"bad potential {spec!r}: {exc}")


def parse_grid(spec, what="grid"):
    """start:stop:count (linear) or log:start:stop:count (geometric)."""
    parts = str(spec).split(":")
    geometric = False
    if parts and parts[0].strip().lower() == "log":
        geometric = True
        parts = parts[1:]
    if len(parts) != 3:
        raise CliError(E_USAGE, f"bad {what} {spec!r}; want start:stop:count")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise CliError(E_USAGE, f"bad {what} {spec!r}; want start:stop:count")
    if n < 2 or hi <= lo:
        raise CliError(E_USAGE, f"bad {what} {spec!r}; need stop > start, count >= 2")
    if geometric and lo <= 0:
        raise CliError(E_USAGE, f"bad {what} {spec!r}; log grid needs start > 0")
    return np.geomspace(lo, hi, n) if geometric else np.linspace(lo, hi, n)


def _load_points(args):
    """(label, points-array) from --dataset or --data."""
    if getattr(args, "dataset", None):
        try:
            ds = dataio.builtin(args.dataset)
        except KeyError as exc:
            raise CliError(E_DATA, str(exc.args[0]))
        return ds.label, np.array(ds.points)
    if getattr(args, "data", None):
        try:
            ds = dataio.load(args.data)
        except OSError as exc:
            raise CliError(E_IO, f"cannot read {args.data}: {exc}")
        except ValueError as exc:
            raise CliError(E_DATA, str(exc))
        return ds.label or os.path.basename(args.data), np.array(ds.points)
    raise CliError(E_USAGE, "need --dataset NAME or --data FILE")


def _read_config(path):
    """key = value lines; blank lines and # comments ignored."""
    table = {}
    try:
        with open(path) as fh:
            for i, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise CliError(E_USAGE,
                                   f"{path}:{i}: expected key = value")
                key, val = line.split("=", 1)
                table[key.strip().replace("-", "_")] = val.strip()
    except OSError as exc:
        raise CliError(E_IO, f"cannot read config {path}: {exc}")
    return table


def _opt(args, conf, name, default, cast=None):
    """Flag > config > default."""
    val = getattr(args, name)
    if val is None:
        val = conf.get(name, default)
    if val is None or cast is None or not isinstance(val, str):
        return val
    try:
        return cast(val)
    except (TypeError, ValueError) as exc:
        raise CliError(E_USAGE, f"bad value for {name}: {exc}")


def _outdir(args, conf, required=False):
    out = _opt(args, conf, "out", os.environ.get("SPECINV_OUTDIR"))
    if out is None and required:
        raise CliError(E_USAGE, "need --out DIR (or SPECINV_OUTDIR)")
    return out


def _float_flag(val):
    return float(val)


# ----------------------------------------------------------------- commands

def _cmd_solve(args, conf):
    shape = parse_potential(_opt(args, conf, "potential", None) or
                            _missing("potential"))
    coupling = _opt(args, conf, "coupling", None, _float_flag)
    if coupling is None:
        raise CliError(E_USAGE, "need --coupling V")
    m = _opt(args, conf, "m", 1.0, _float_flag)
    n = int(_opt(args, conf, "n", 0, int))
    ell = int(_opt(args, conf, "ell", 0, int))
    try:
        problem = EigenProblem(shape, float(coupling), m=m, n=n, l=ell)
    except ValueError as exc:
        raise CliError(E_USAGE, str(exc))
    res = solve_state(problem)
    if not res.converged:
        raise CliError(E_COMPUTE, f"no bound state at coupling {coupling}")
    print(_fmt(res.energy))
    return 0


def _missing(flag):
    raise CliError(E_USAGE, f"need --{flag}")


def _cmd_curve(args, conf):
    shape = parse_potential(_opt(args, conf, "potential", None) or
                            _missing("potential"))
    spec = _opt(args, conf, "couplings", None)
    if spec is None:
        _missing("couplings")
    couplings = parse_grid(spec, "couplings")
    m = _opt(args, conf, "m", 1.0, _float_flag)
    try:
        curve = energy_curve(shape, couplings, m=m)
    except (ValueError, RuntimeError) as exc:
        raise CliError(E_COMPUTE, str(exc))
    if curve.dropped:
        print(f"# dropped {curve.dropped} unbound coupling(s) from the left")
    for v, E in curve.samples:
        print(f"{_fmt(v)} {_fmt(E)}")
    return 0


def _cmd_kfun(args, conf):
    shape = parse_potential(_opt(args, conf, "potential", None) or
                            _missing("potential"))
    m = _opt(args, conf, "m", 1.0, _float_flag)
    r_grid = parse_grid(_opt(args, conf, "r_grid", "0.5:5:46"), "r-grid")
    couplings = parse_grid(_opt(args, conf, "couplings", "log:0.4:25:32"),
                           "couplings")
    margin = _opt(args, conf, "margin", 0.01, _float_flag)
    try:
        kf = k_function_from_shape(shape, m=m, r_grid=r_grid,
                                   coupling_grid=couplings, margin=margin)
    except (ValueError, RuntimeError) as exc:
        raise CliError(E_COMPUTE, str(exc))
    for r, K in zip(kf.r, kf.K):
        print(f"{_fmt(r)} {_fmt(K)}")
    return 0


def _cmd_fit(args, conf):
    label, pts = _load_points(args)
    m = _opt(args, conf, "m", 1.0, _float_flag)
    try:
        rep = fit_coulomb(pts, m=m, polish=bool(args.polish))
    except ValueError as exc:
        raise CliError(E_COMPUTE, str(exc))
    print(f"dataset = {label}")
    print(f"a = {_fmt(rep.params.a)}")
    print(f"b = {_fmt(rep.params.b)}")
    print(f"v0 = {_fmt(rep.params.v0)}")
    print(f"m = {_fmt(rep.params.m)}")
    print(f"rms_residual = {_fmt(rep.rms_residual)}")
    print(f"max_residual = {_fmt(rep.max_residual)}")
    print(f"window = {rep.window}")
    print(f"note = {rep.note}")
    return 0


def _cmd_datasets(args, conf):
    for label in dataio.labels():
        ds = dataio.builtin(label)
        v, E = ds.v, ds.E
        meta = ds.metadata
        tags = " ".join(f"{k}={meta[k]}" for k in sorted(meta))
        print(f"{label}: {len(ds.points)} points, v in [{_fmt(v[0])}, "
              f"{_fmt(v[-1])}], E in [{_fmt(E[-1])}, {_fmt(E[0])}]; {tags}")
    return 0


def _cmd_invert(args, conf):
    label, pts = _load_points(args)
    m = _opt(args, conf, "m", 1.0, _float_flag)
    v0 = _opt(args, conf, "v0", None, _float_flag)
    if v0 is None:
        try:
            v0 = estimate_critical_coupling(pts)
        except ValueError as exc:
            raise CliError(E_COMPUTE, f"cannot place the curve root: {exc}")
    try:
        curve = build_curve(pts, shift=v0)
    except ValueError as exc:
        raise CliError(E_DATA, str(exc))

    seed_spec = _opt(args, conf, "seed", None)
    seed = parse_potential(seed_spec) if seed_spec else None
    iterations = _opt(args, conf, "iterations", None, int)
    kw = dict(seed=seed, m=m, v0=v0)
    if iterations is not None:
        # run exactly the asked-for number of envelope steps
        kw.update(max_iterations=int(iterations), convergence_tol=0.0)
    tol = _opt(args, conf, "tol", None, _float_flag)
    if tol is not None:
        kw.update(convergence_tol=tol)
    rg = _opt(args, conf, "r_grid", None)
    if rg is not None:
        kw.update(r_grid=parse_grid(rg, "r-grid"))
    margin = _opt(args, conf, "margin", None, _float_flag)
    if margin is not None:
        kw.update(margin=margin)
    if args.no_accelerate:
        kw.update(accelerate=False)
    try:
        run = invert(curve, InversionConfig(**kw))
    except (ValueError, RuntimeError) as exc:
        raise CliError(E_COMPUTE, str(exc))

    print(f"dataset = {label}")
    print(f"v0 = {_fmt(run.v0)}")
    print(f"iterations = {run.iterations}")
    print(f"converged = {str(run.converged).lower()}")
    print("residuals = " + " ".join(_fmt(x) for x in run.residual_history))
    print(f"final = {run.shape!r}")
    for note in run.notes:
        print(f"note = {note}")

    out = _outdir(args, conf)
    if out:
        config_lines = [f"command = invert", f"dataset = {label}",
                        f"seed = {seed_spec or 'default'}",
                        f"m = {_fmt(m)}"]
        if iterations is not None:
            config_lines.append(f"iterations = {int(iterations)}")
        try:
            dataio.save_run(run, out, label=label, config_lines=config_lines)
        except OSError as exc:
            raise CliError(E_IO, f"cannot write run to {out}: {exc}")
        print(f"run written to {out}")
    return 0


def _cmd_emit_plot(args, conf):
    rundir = _opt(args, conf, "run", None)
    if rundir is None:
        _missing("run")
    out = _outdir(args, conf, required=True)
    dataset = None
    if getattr(args, "dataset", None):
        try:
            dataset = dataio.builtin(args.dataset)
        except KeyError as exc:
            raise CliError(E_DATA, str(exc.args[0]))
    try:
        files = dataio.emit_plot_data(rundir, out, dataset=dataset)
    except OSError as exc:
        raise CliError(E_IO, str(exc))
    except ValueError as exc:
        raise CliError(E_DATA, str(exc))
    for f in files:
        print(f)
    return 0


# ------------------------------------------------------------------- parser

def _build_parser():
    top = argparse.ArgumentParser(
        prog="specinv",
        description="Spectral inversion and model fits for two-fermion "
                    "binding-energy curves.")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value defaults file")
        p.add_argument("--m", default=None, help="fermion mass (default 1)")

    p = sub.add_parser("solve", help="ground-state (or excited) energy at one "
                                     "coupling")
    common(p)
    p.add_argument("--potential", help="name:param,param")
    p.add_argument("--coupling", default=None)
    p.add_argument("--n", default=None, help="radial quantum number")
    p.add_argument("--ell", default=None, help="angular momentum")
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("curve", help="(v, F) table over a coupling grid")
    common(p)
    p.add_argument("--potential")
    p.add_argument("--couplings", default=None, help="start:stop:count")
    p.set_defaults(fn=_cmd_curve)

    p = sub.add_parser("kfun", help="(r, K) table for a potential shape")
    common(p)
    p.add_argument("--potential")
    p.add_argument("--r-grid", dest="r_grid", default=None)
    p.add_argument("--couplings", default=None)
    p.add_argument("--margin", default=None)
    p.set_defaults(fn=_cmd_kfun)

    p = sub.add_parser("fit", help="shifted-Coulomb model fit of a dataset")
    common(p)
    p.add_argument("--dataset")
    p.add_argument("--data", help="external (v, E) table file")
    p.add_argument("--polish", action="store_true")
    p.set_defaults(fn=_cmd_fit)

    p = sub.add_parser("datasets", help="list embedded datasets")
    p.add_argument("--config", help=argparse.SUPPRESS)
    p.set_defaults(fn=_cmd_datasets)

    p = sub.add_parser("invert", help="reconstruct the shape behind a dataset")
    common(p)
    p.add_argument("--dataset")
    p.add_argument("--data")
    p.add_argument("--seed", default=None, help="seed potential name:params")
    p.add_argument("--iterations", default=None,
                   help="run exactly this many envelope steps")
    p.add_argument("--tol", default=None, help="convergence tolerance")
    p.add_argument("--v0", default=None, help="critical coupling shift")
    p.add_argument("--r-grid", dest="r_grid", default=None)
    p.add_argument("--margin", default=None)
    p.add_argument("--no-accelerate", action="store_true")
    p.add_argument("--out", default=None, help="run directory")
    p.set_defaults(fn=_cmd_invert)

    p = sub.add_parser("emit-plot", help="write plot-ready tables for a run")
    p.add_argument("--config", help=argparse.SUPPRESS)
    p.add_argument("--run", default=None, help="run directory")
    p.add_argument("--dataset", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_emit_plot)

    return top


def run(argv=None):
    """Entry point; returns the exit status."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    conf = _read_config(args.config) if getattr(args, "config", None) else {}
    try:
        return args.fn(args, conf)
    except CliError as exc:
        print(f"specinv: {exc.code}: {exc}", file=sys.stderr)
        return _EXIT[exc.code]
    except KeyboardInterrupt:
        print("specinv: E_COMPUTE: interrupted", file=sys.stderr)
        return 130


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
