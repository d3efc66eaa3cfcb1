import numpy as np
import pytest

from specinv.cli import run, parse_potential, parse_grid, CliError
from specinv.potentials import Coulomb, Hulthen, ShiftedCoulomb


def test_parse_potential_families():
    p = parse_potential("coulomb:0.2")
    assert isinstance(p, Coulomb) and p.alpha == 0.2
    p = parse_potential("hulthen:1,1")
    assert isinstance(p, Hulthen) and (p.alpha, p.beta) == (1.0, 1.0)
    p = parse_potential("shifted-coulomb:0.14,0.01")
    assert isinstance(p, ShiftedCoulomb) and p.b == 0.01


@pytest.mark.parametrize("spec", [
    "square-well:1",          # unknown family
    "coulomb:1,2",            # wrong arity
    "coulomb:abc",            # not a number
    "coulomb:-1",             # rejected by the constructor
    "hulthen:1",              # missing parameter
])
def test_parse_potential_errors(spec):
    with pytest.raises(CliError) as err:
        parse_potential(spec)
    assert err.value.code == "E_USAGE"


def test_parse_grid_linear_and_log():
    np.testing.assert_allclose(parse_grid("1:3:5"), [1.0, 1.5, 2.0, 2.5, 3.0])
    np.testing.assert_allclose(parse_grid("log:1:100:3"), [1.0, 10.0, 100.0])


@pytest.mark.parametrize("spec", ["1:3", "3:1:5", "1:3:1", "log:0:3:4", "a:b:c"])
def test_parse_grid_errors(spec):
    with pytest.raises(CliError):
        parse_grid(spec)


def test_datasets_listing(capsys):
    assert run(["datasets"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 5
    assert out[0].startswith("S1: 10 points")
    assert "exchange=pseudoscalar" in out[3]
    assert "coupling_note=v = g^2/(4 pi)" in out[0]


def test_solve_coulomb_ground_state(capsys):
    assert run(["solve", "--potential", "coulomb:1", "--coupling", "2"]) == 0
    E = float(capsys.readouterr().out.strip())
    assert E == pytest.approx(-1.0, rel=1e-6)


def test_solve_reports_unbound(capsys):
    rc = run(["solve", "--potential", "hulthen:1,1", "--coupling", "0.5"])
    assert rc == 4
    assert "specinv: E_COMPUTE:" in capsys.readouterr().err


def test_solve_missing_flags(capsys):
    assert run(["solve", "--potential", "coulomb:1"]) == 2
    assert "specinv: E_USAGE:" in capsys.readouterr().err


def test_fit_reproduces_published_p2(capsys):
    assert run(["fit", "--dataset", "P2"]) == 0
    table = dict(line.split(" = ", 1)
                 for line in capsys.readouterr().out.splitlines())
    assert table["dataset"] == "P2"
    assert float(table["a"]) == pytest.approx(0.1432232, rel=2e-3)
    assert float(table["v0"]) == pytest.approx(30.76632, abs=0.05)
    assert int(table["window"]) == 10


def test_fit_output_is_deterministic(capsys):
    run(["fit", "--dataset", "S1"])
    first = capsys.readouterr().out
    run(["fit", "--dataset", "S1"])
    assert capsys.readouterr().out == first


def test_fit_unknown_dataset(capsys):
    assert run(["fit", "--dataset", "Q7"]) == 3
    err = capsys.readouterr().err
    assert err.startswith("specinv: E_DATA:")
    assert err.count("\n") == 1


def test_curve_reports_dropped_couplings(capsys):
    assert run(["curve", "--potential", "hulthen:1,1",
                "--couplings", "0.8:4:5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "# dropped 1 unbound coupling(s) from the left"
    assert len(lines) == 5
    v, E = map(float, lines[1].split())
    assert v == 1.6
    assert E == pytest.approx(-(1.6 - 1.0) ** 2 / 4.0, rel=1e-5)


def test_config_file_supplies_defaults(tmp_path, capsys):
    conf = tmp_path / "solve.conf"
    conf.write_text("potential = coulomb:1\n"
                    "coupling = 2   # overridden by the flag below\n")
    assert run(["solve", "--config", str(conf), "--coupling", "3"]) == 0
    E3 = float(capsys.readouterr().out.strip())
    assert E3 == pytest.approx(-2.25, rel=1e-6)
    assert run(["solve", "--config", str(conf)]) == 0
    E2 = float(capsys.readouterr().out.strip())
    assert E2 == pytest.approx(-1.0, rel=1e-6)


def test_config_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.conf"
    bad.write_text("just words\n")
    assert run(["solve", "--config", str(bad), "--potential", "coulomb:1",
                "--coupling", "1"]) == 2
    assert run(["solve", "--config", str(tmp_path / "absent.conf"),
                "--potential", "coulomb:1", "--coupling", "1"]) == 5
    capsys.readouterr()


def test_emit_plot_requires_out_and_rundir(tmp_path, capsys, monkeypatch):
    import types
    from specinv import dataio
    r = np.linspace(0.5, 5.0, 8)
    shape = ShiftedCoulomb(1.0, 0.2)
    rundir = dataio.save_run(
        types.SimpleNamespace(iterates=[shape], residual_history=[0.1],
                              converged=True, r_grid=r, v0=0.0,
                              curve_data=None, curve_final=None),
        str(tmp_path / "run"))
    monkeypatch.delenv("SPECINV_OUTDIR", raising=False)
    assert run(["emit-plot", "--run", rundir]) == 2
    capsys.readouterr()
    # SPECINV_OUTDIR provides the default output directory
    monkeypatch.setenv("SPECINV_OUTDIR", str(tmp_path / "plots"))
    assert run(["emit-plot", "--run", rundir]) == 0
    names = capsys.readouterr().out.split()
    assert "shape_0.txt" in names
    assert (tmp_path / "plots" / "shape_0.txt").is_file()
