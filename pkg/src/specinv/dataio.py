"""Embedded binding-energy datasets, text I/O, and plot-data emission.

The five embedded tables are two-fermion binding energies E(v) from
Minkowski-space Bethe-Salpeter calculations (one column per exchange
channel, shared E column).  File formats are deliberately plain: a
delimited (v, E) table with a header, and a flat key = value record
carrying the metadata.  All numbers are written in shortest round-trip
form so that save -> load is lossless.
"""
import os
from dataclasses import dataclass, field

import numpy as np

_E_COLUMN = (-0.01, -0.02, -0.03, -0.04, -0.05,
             -0.10, -0.20, -0.30, -0.40, -0.50)

_V_COLUMNS = {
    "S1": (0.6217, 0.7998, 0.9510, 1.089, 1.222, 1.840, 3.049, 4.313, 5.656, 6.919),
    "S2": (2.008, 2.347, 2.627, 2.880, 3.119, 4.203, 6.227, 8.260, 10.40, 12.53),
    "P1": (17.89, 18.53, 18.80, 19.35, 19.66, 20.86, 22.51, 23.76, 24.81, 25.71),
    "P2": (33.61, 34.23, 34.68, 35.05, 35.36, 36.60, 38.25, 39.58, 41.00, 41.85),
    "V": (0.2598, 0.3907, 0.4984, 0.5934, 0.6802, 1.046, 1.626, 2.109, 2.534, 2.914),
}

_METADATA = {
    "S1": {"exchange": "scalar", "mu": 0.15, "system": "fermion-fermion"},
    "S2": {"exchange": "scalar", "mu": 0.50, "system": "fermion-fermion"},
    "P1": {"exchange": "pseudoscalar", "mu": 0.15, "system": "fermion-fermion"},
    "P2": {"exchange": "pseudoscalar", "mu": 0.50, "system": "fermion-fermion"},
    "V": {"exchange": "vector", "mu": 0.0, "system": "fermion-antifermion"},
}

_COMMON = {"m": 1.0, "Lambda": 2.0, "L": 1.1,
           "coupling_note": "v = g^2/(4 pi)"}


@dataclass
class DataSet:
    label: str
    points: list                      # [(v, E), ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = [(float(v), float(e)) for v, e in self.points]
        v = [p[0] for p in self.points]
        e = [p[1] for p in self.points]
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError(f"{self.label}: couplings must be strictly increasing")
        if any(b >= a for a, b in zip(e, e[1:])):
            raise ValueError(f"{self.label}: energies must be strictly decreasing")

    @property
    def v(self):
        return np.array([p[0] for p in self.points])

    @property
    def E(self):
        return np.array([p[1] for p in self.points])


def labels():
    return list(_V_COLUMNS)


def builtin(label):
    """One of the five embedded datasets; accepts S1/S2/P1/P2/V."""
    key = str(label).strip().upper().replace("_", "")
    if key not in _V_COLUMNS:
        raise KeyError(f"unknown dataset {label!r}; have {', '.join(_V_COLUMNS)}")
    meta = dict(_COMMON)
    meta.update(_METADATA[key])
    return DataSet(key, list(zip(_V_COLUMNS[key], _E_COLUMN)), meta)


def _fmt(x):
    return repr(float(x))


def save(obj, path, format="delimited"):
    """Write a DataSet as a delimited (v, E) table or a key = value record."""
    lines = []
    if format == "delimited":
        lines.append("v,E")
        for v, e in obj.points:
            lines.append(f"{_fmt(v)},{_fmt(e)}")
    elif format == "record":
        lines.append(f"label = {obj.label}")
        for k, val in obj.metadata.items():
            lines.append(f"{k} = {val}")
        lines.append("points:")
        for v, e in obj.points:
            lines.append(f"{_fmt(v)} {_fmt(e)}")
    else:
        raise ValueError(f"unknown format {format!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_float(tok, path, i):
    try:
        return float(tok)
    except ValueError:
        raise ValueError(f"{path}:{i}: malformed number {tok!r}") from None


def load(path, format="delimited"):
    with open(path) as fh:
        raw = [ln.rstrip("\n") for ln in fh]
    lines = [ln for ln in raw if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty file")
    if format == "delimited":
        head = [t.strip().lower() for t in lines[0].split(",")]
        if head != ["v", "e"]:
            raise ValueError(f"{path}: missing 'v,E' header")
        pts = []
        for i, ln in enumerate(lines[1:], start=2):
            toks = [t for t in ln.replace(",", " ").split() if t]
            if len(toks) != 2:
                raise ValueError(f"{path}:{i}: expected two columns, got {ln!r}")
            pts.append((_parse_float(toks[0], path, i), _parse_float(toks[1], path, i)))
        name = os.path.splitext(os.path.basename(path))[0]
        return DataSet(name, pts)
    if format == "record":
        meta, pts, label = {}, [], ""
        in_points = False
        for i, ln in enumerate(lines, start=1):
            if ln.strip() == "points:":
                in_points = True
                continue
            if in_points:
                toks = ln.split()
                if len(toks) != 2:
                    raise ValueError(f"{path}:{i}: expected two columns, got {ln!r}")
                pts.append((_parse_float(toks[0], path, i), _parse_float(toks[1], path, i)))
            else:
                if "=" not in ln:
                    raise ValueError(f"{path}:{i}: expected 'key = value', got {ln!r}")
                k, val = ln.split("=", 1)
                k, val = k.strip(), val.strip()
                if k == "label":
                    label = val
                else:
                    try:
                        meta[k] = float(val)
                    except ValueError:
                        meta[k] = val
        return DataSet(label or "unnamed", pts, meta)
    raise ValueError(f"unknown format {format!r}")


def _write_xy(path, x, y, header):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for a, b in zip(x, y):
            fh.write(f"{_fmt(a)},{_fmt(b)}\n")


def save_run(run, outdir, label="", config_lines=()):
    """Persist an inversion run: per-iterate shape tables, curve tables, and
    a flat manifest."""
    os.makedirs(outdir, exist_ok=True)
    files = []
    r = np.asarray(getattr(run, "r_grid", np.geomspace(0.05, 20.0, 120)), float)
    for k, shape in enumerate(getattr(run, "iterates", ())):
        name = f"shape_{k}.txt"
        _write_xy(os.path.join(outdir, name), r, shape(r), "r,f")
        files.append(name)
    cd = getattr(run, "curve_data", None)
    if cd is not None:
        _write_xy(os.path.join(outdir, "curve_data.txt"), cd[0], cd[1], "u,F")
        files.append("curve_data.txt")
    ce = getattr(run, "curve_final", None)
    if ce is not None:
        _write_xy(os.path.join(outdir, "curve_final.txt"), ce[0], ce[1], "u,F")
        files.append("curve_final.txt")
    hist = ",".join(_fmt(x) for x in getattr(run, "residual_history", ()))
    with open(os.path.join(outdir, "manifest.txt"), "w") as fh:
        fh.write(f"label = {label}\n")
        fh.write(f"v0 = {_fmt(getattr(run, 'v0', 0.0))}\n")
        fh.write(f"converged = {getattr(run, 'converged', False)}\n")
        fh.write(f"iterations = {len(getattr(run, 'iterates', ())) - 1}\n")
        fh.write(f"residual_history = {hist}\n")
        for ln in config_lines:
            fh.write(ln + "\n")
        fh.write(f"files = {','.join(files)}\n")
    return outdir


def emit_plot_data(source, outdir, dataset=None):
    """Write plain (x, y) series files for external plotting.

    `source` may be an inversion run, a fit report (with the fitted dataset
    passed alongside), or a directory produced by save_run.
    """
    os.makedirs(outdir, exist_ok=True)
    written = []

    if isinstance(source, (str, os.PathLike)):
        src = str(source)
        man = os.path.join(src, "manifest.txt")
        if not os.path.isfile(man):
            raise ValueError(f"{src}: not a run directory (no manifest.txt)")
        with open(man) as fh:
            for ln in fh:
                if ln.startswith("files = "):
                    names = [s for s in ln.split("=", 1)[1].strip().split(",") if s]
                    for name in names:
                        with open(os.path.join(src, name)) as f_in, \
                             open(os.path.join(outdir, name), "w") as f_out:
                            f_out.write(f_in.read())
                        written.append(name)
    elif hasattr(source, "iterates"):
        r = np.asarray(getattr(source, "r_grid", np.geomspace(0.05, 20.0, 120)), float)
        for k, shape in enumerate(source.iterates):
            name = f"shape_{k}.txt"
            _write_xy(os.path.join(outdir, name), r, shape(r), "r,f")
            written.append(name)
        for attr, name in (("curve_data", "curve_data.txt"),
                           ("curve_final", "curve_final.txt")):
            xy = getattr(source, attr, None)
            if xy is not None:
                _write_xy(os.path.join(outdir, name), xy[0], xy[1], "u,F")
                written.append(name)
    elif hasattr(source, "params") and dataset is not None:
        rep, ds = source, dataset
        u = ds.v - (rep.params.v0 if rep.params else 0.0)
        _write_xy(os.path.join(outdir, "curve_data.txt"), u, ds.E, "u,F")
        written.append("curve_data.txt")
        if rep.params is not None:
            from .models import coulomb_level
            uu = np.linspace(u[0], u[-1], 2 * len(u) - 1)
            _write_xy(os.path.join(outdir, "curve_model.txt"), uu,
                      coulomb_level(rep.params, uu + rep.params.v0), "u,F")
            written.append("curve_model.txt")
            r = np.geomspace(0.05, 20.0, 120)
            _write_xy(os.path.join(outdir, "shape_model.txt"), r,
                      rep.params.shape()(r), "r,f")
            written.append("shape_model.txt")
    else:
        raise TypeError("emit_plot_data: expected a run, a fit report plus "
                        "dataset, or a run directory")

    with open(os.path.join(outdir, "manifest.txt"), "w") as fh:
        fh.write(f"files = {','.join(written)}\n")
    return written
