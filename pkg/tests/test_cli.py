import json
import math

import pytest

from heatkernel.cli import main
from heatkernel.csvout import emit_csv


def write_config(tmp_path, **overrides):
    cfg = {
        "potential": {"kind": "polynomial", "coefficients": [0.0, 0.0, 1.0], "dimension": 1},
        "engine": "explicit",
        "grid": {"x": [-1.0, 1.0, 3], "y": [-1.0, 1.0, 3], "t": [0.1, 0.5, 2]},
        "envelopes": [{"family": "avg_upper", "beta": 0.9}],
        "weights": {"rh_q": 1.5, "ap_p": 2.0, "window_center": 0.0, "window_side": 2.0, "depth": 6},
        "ode": {"coefficients": [0.0, 1.0, 1.0], "t0": 0.05, "t1": 0.5, "samples": 20},
        "chain": {"x": 0.0, "y": 1.0, "t": 1.0},
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_emit_csv_empty_and_counts(tmp_path):
    path = emit_csv([], ["a", "b"], tmp_path / "empty.csv", "run=1")
    lines = path.read_text().splitlines()
    assert lines == ["# run=1", "a,b"]
    rows = [(float(i), float(i * i)) for i in range(18)]
    path2 = emit_csv(rows, ["x", "x2"], tmp_path / "grid.csv")
    assert len(path2.read_text().splitlines()) == 19


def test_emit_csv_deterministic(tmp_path):
    rows = [(1 / 3, 2.0**-40), (math.pi, math.e)]
    a = emit_csv(rows, ["u", "v"], tmp_path / "a.csv", "p")
    b = emit_csv(rows, ["u", "v"], tmp_path / "b.csv", "p")
    assert a.read_bytes() == b.read_bytes()
    assert "0.33333333333333331" in a.read_text()


def test_kernel_subcommand_row_count(tmp_path, capsys):
    cfg = write_config(tmp_path)
    rc = main(["--config", str(cfg), "--out", str(tmp_path / "out"), "kernel"])
    assert rc == 0
    lines = (tmp_path / "out" / "kernel.csv").read_text().splitlines()
    assert lines[1] == "x,y,t,log_p,p"
    assert len(lines) == 2 + 3 * 3 * 2  # provenance + header + rows


def test_kernel_rerun_byte_identical(tmp_path):
    cfg = write_config(tmp_path)
    main(["--config", str(cfg), "--out", str(tmp_path / "o1"), "kernel"])
    main(["--config", str(cfg), "--out", str(tmp_path / "o2"), "kernel"])
    assert (tmp_path / "o1" / "kernel.csv").read_bytes() == (tmp_path / "o2" / "kernel.csv").read_bytes()


def test_explicit_engine_rejects_nonquadratic(tmp_path, capsys):
    cfg = write_config(
        tmp_path, potential={"kind": "power", "exponent": 1.0, "dimension": 1}
    )
    rc = main(["--config", str(cfg), "--out", str(tmp_path / "out"), "kernel"])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_bad_json_reports_line(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"engine": "explicit",\n  bad key\n}')
    rc = main(["--config", str(path), "--out", str(tmp_path / "out"), "kernel"])
    assert rc == 2
    assert "line 2" in capsys.readouterr().err


def test_chain_subcommand_reports_m(tmp_path, capsys):
    cfg = write_config(tmp_path)
    rc = main(["--config", str(cfg), "--out", str(tmp_path / "out"), "chain"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "M=257" in out
    waypoints = (tmp_path / "out" / "chain_waypoints.csv").read_text().splitlines()
    assert len(waypoints) == 2 + 258


def test_weights_subcommand(tmp_path, capsys):
    cfg = write_config(tmp_path)
    rc = main(["--config", str(cfg), "--out", str(tmp_path / "out"), "weights"])
    assert rc == 0
    trace = (tmp_path / "out" / "weight_trace.csv").read_text().splitlines()
    assert trace[1] == "kind,exponent,side,ratio"
    assert len(trace) > 10
    assert "doubling" in capsys.readouterr().out


def test_ode_subcommand(tmp_path, capsys):
    cfg = write_config(tmp_path)
    rc = main(["--config", str(cfg), "--out", str(tmp_path / "out"), "ode"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "max_closed_form_error" in out
    err = float(out.split("max_closed_form_error=")[1].split()[0])
    assert err < 1e-7


def test_bounds_subcommand_feasible(tmp_path, capsys):
    cfg = write_config(tmp_path)
    rc = main(["--config", str(cfg), "--out", str(tmp_path / "out"), "bounds"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "avg_upper: FEASIBLE" in out
    assert (tmp_path / "out" / "bound_verdicts.csv").exists()
    assert (tmp_path / "out" / "bound_slacks.csv").exists()


def test_spectral_engine(tmp_path):
    cfg = write_config(
        tmp_path,
        engine="spectral",
        spectral={"half_width": 4.0, "points": 401},
        grid={"x": [-1.0, 1.0, 2], "y": [-1.0, 1.0, 2], "t": [0.1, 0.5, 2]},
    )
    rc = main(["--config", str(cfg), "--out", str(tmp_path / "out"), "kernel"])
    assert rc == 0
    text = (tmp_path / "out" / "kernel.csv").read_text()
    assert "engine=spectral" in text.splitlines()[0]


def test_tabulated_from_csv(tmp_path):
    table = tmp_path / "table.csv"
    table.write_text("coordinate,value\n" + "\n".join(f"{x},{x*x}" for x in [-1, -0.5, 0, 0.5, 1]))
    from heatkernel.config import load_tabulated_csv

    V = load_tabulated_csv(table)
    assert V(0.5) == pytest.approx(0.25)


def test_shipped_config_matches_builtin():
    from pathlib import Path

    from heatkernel.config import DEFAULT_CONFIG

    shipped = json.loads((Path(__file__).parent.parent / "configs" / "default.json").read_text())
    assert shipped == DEFAULT_CONFIG
