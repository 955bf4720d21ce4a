import json
import subprocess
import sys

import numpy as np
import pytest

from fourwell import cli


def _read_csv(path):
    lines = path.read_text().splitlines()
    comments = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    header = body[0].split(",")
    data = np.array([[float(x) for x in row.split(",")] for row in body[1:]])
    return comments, header, data


def _run(argv):
    return cli.main([str(a) for a in argv])


def test_dynamics_fig2_top(tmp_path):
    out = tmp_path / "top.csv"
    assert _run(["dynamics", "--preset", "fig2-top", "--grid", "0:2:41", "--out", out]) == cli.EXIT_OK
    comments, header, data = _read_csv(out)
    assert comments[0].startswith(f"# {cli.CSV_VERSION} dynamics")
    assert header == cli.DYNAMICS_HEADER
    assert data.shape == (41, 12)
    col = {name: data[:, i] for i, name in enumerate(header)}
    assert np.allclose(col["n2_frac"], col["n3_frac"], atol=1e-8)
    for k in (1, 2, 3):
        assert np.max(np.abs(col[f"n{k}_frac"] - col[f"n{k}_analytic"])) <= 0.05
    meta = json.loads(out.with_suffix(".json").read_text())
    for key in ("xi", "tau", "zeta_max", "resonance_ratio"):
        assert key in meta
    assert meta["resonance_ratio"] == pytest.approx(22.1, abs=0.05)


def test_dynamics_fig2_bottom_output_state(tmp_path):
    out = tmp_path / "bottom.csv"
    assert _run(["dynamics", "--preset", "fig2-bottom", "--grid", "0:2:3", "--out", out]) == 0
    _, header, data = _read_csv(out)
    row = data[np.argmin(np.abs(data[:, 0] - 1.0))]
    assert row[header.index("n2_frac")] == pytest.approx(1.0, abs=0.05)


def test_dynamics_seconds_and_stdout(capsys):
    assert _run(["dynamics", "--n", "4", "--grid", "0:0.5:3", "--units", "s", "--zeta", "0.1"]) == 0
    text = capsys.readouterr().out
    assert "units=s" in text.splitlines()[0]
    assert text.splitlines()[-1].startswith("0.5,")


def test_numbers_have_twelve_significant_digits(tmp_path):
    out = tmp_path / "d.csv"
    _run(["dynamics", "--n", "5", "--grid", "0:1:4", "--out", out])
    for line in out.read_text().splitlines()[2:]:
        for field in line.split(","):
            mantissa = field.split("e")[0].replace("-", "").replace(".", "").lstrip("0")
            assert len(mantissa) <= 12


def test_sensitivity_sweep(tmp_path):
    cfg = tmp_path / "sweep.ini"
    cfg.write_text("[model]\nu = 6.01\nj = 8.16\nn = 8\n\n[grid]\nstart = 0\nstop = 1\nsteps = 5\n")
    out = tmp_path / "s.csv"
    assert _run(["sensitivity", "--config", cfg, "--out", out]) == 0
    _, header, data = _read_csv(out)
    assert header[:5] == ["zeta_over_J", "imbalance_mean", "imbalance_std", "delta_alpha_analytic", "delta_alpha_numeric"]
    col = {name: data[:, i] for i, name in enumerate(header)}
    assert np.all(np.diff(col["imbalance_mean"]) > 0)
    assert col["imbalance_mean"][-1] == pytest.approx(8, rel=0.05)
    assert col["imbalance_mean_exact"][-1] == pytest.approx(8, rel=0.05)
    assert col["delta_alpha_numeric"][0] == pytest.approx(col["delta_alpha_analytic"][0], rel=0.1)


def test_sensitivity_n_sweep_footer(tmp_path):
    cfg = tmp_path / "sweep.ini"
    cfg.write_text("[grid]\nstart = 0\nstop = 1\nsteps = 3\n\n[sensitivity]\nnumeric = no\n")
    out = tmp_path / "s.csv"
    assert _run(["sensitivity", "--config", cfg, "--n-sweep", "8,12,16,20,24", "--out", out]) == 0
    comments, _, data = _read_csv(out)
    assert np.all(np.isnan(data[:, 4]))
    slope = [c for c in comments if "fitted_slope=" in c]
    assert float(slope[0].split("=")[1]) == pytest.approx(-1.5, abs=0.1)


def test_params_table(tmp_path, capsys):
    out = tmp_path / "p.csv"
    code = _run(["params", "--preset", "dy164", "--out", out])
    err = capsys.readouterr().err
    lines = out.read_text().splitlines()
    assert lines[0].startswith(f"# {cli.CSV_VERSION} params")
    rows = {l.split(",")[0]: l.split(",") for l in lines[2:]}
    assert rows["Wave length"][2] == "532"
    assert float(rows["On-site energy"][2]) == pytest.approx(24.04, rel=0.01)
    assert float(rows["Angular frequency"][2]) == pytest.approx(2.87, rel=0.03)
    breaches = [l for l in err.splitlines() if l.startswith("tolerance breach")]
    assert code == (cli.EXIT_TOLERANCE if breaches else cli.EXIT_OK)
    assert all("Hopping rate" in l for l in breaches)


def test_params_text_format(capsys):
    _run(["params", "--format", "text"])
    text = capsys.readouterr().out
    assert "[164Dy]" in text and "tau = " in text


def test_verify_passes_by_default(tmp_path):
    out = tmp_path / "v.json"
    assert _run(["verify", "--out", out]) == cli.EXIT_OK
    report = json.loads(out.read_text())
    assert report["pass"] and report["params"]["total_n"] == 8
    assert set(report["groups"]) == {
        "charges",
        "superintegrability",
        "unitarity",
        "oracle_equivalence",
        "b_tensor_unitarity",
        "entropy_monotonicity",
    }


def test_verify_detects_current_sign_flip(tmp_path, capsys):
    out = tmp_path / "v.json"
    assert _run(["verify", "--inject-current-flip", "--out", out]) == cli.EXIT_VERIFY
    report = json.loads(out.read_text())
    assert not report["groups"]["charges"]["pass"]
    assert "charges.current_is_Q3_minus_Q2" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--zeta", "frac:1.5"],
        ["verify", "--zeta", "-0.1"],
        ["verify", "--zeta", "fast"],
        ["dynamics", "--preset", "fig3"],
        ["dynamics", "--grid", "2:1:5"],
        ["dynamics", "--grid", "0:1"],
        ["dynamics", "--n", "40"],
        ["dynamics", "--config", "/nonexistent/file.ini"],
        ["sensitivity", "--grid", "0:1.5:3"],
        ["dynamics", "--units", "hours"],
        ["launch"],
    ],
)
def test_config_errors_exit_64(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(cli.main(argv))
    assert exc.value.code == cli.EXIT_CONFIG
    capsys.readouterr()


@pytest.mark.parametrize(
    "text",
    [
        "[model]\nzeta = 0.01\nzeta_fraction = 0.5\n",
        "[mystery]\nx = 1\n",
        "[model]\nn = many\n",
        "no section header\n",
        "[grid]\nstart = 0\nstop = 1\n",
    ],
)
def test_bad_config_files(tmp_path, text, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(text)
    assert cli.main(["dynamics", "--config", str(cfg)]) == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[model]\nn = 6\nzeta_fraction = 0.5\n")
    out = tmp_path / "c.csv"
    assert _run(["dynamics", "--config", cfg, "--n", "5", "--zeta", "0", "--grid", "0:1:2", "--out", out]) == 0
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["n"] == 5 and meta["zeta"] == 0.0


def test_repeat_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        _run(["dynamics", "--preset", "fig2-mid", "--n", "8", "--grid", "0:2:11", "--out", path])
    assert a.read_bytes() == b.read_bytes()
    assert a.with_suffix(".json").read_bytes() == b.with_suffix(".json").read_bytes()


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "fourwell", "verify", "--n", "4"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["pass"]
