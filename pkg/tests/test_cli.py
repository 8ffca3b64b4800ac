"""Configuration parsing and the four subcommands end to end.

Subcommand runs go through a subprocess with the numpy backend forced, so
they measure the actual console behavior (exit codes, files, determinism)
without paying a compilation per invocation.
"""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from liepoisson import BracketSign, HeavyTopParams
from liepoisson.cli import (
    ExperimentConfig,
    _coerce_preset_params,
    _jsonable,
    build_preset,
    load_config,
    main,
)

CLI = [sys.executable, "-m", "liepoisson.cli"]


def run_cli(*args, cwd=None):
    env = dict(os.environ)
    env["LIEPOISSON_NUMBA"] = "0"
    return subprocess.run(
        CLI + list(args), capture_output=True, text=True, env=env, cwd=cwd
    )


class TestLoadConfig:
    def test_full_file(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text(
            "[run]\n"
            "preset = rattleback\n"
            "dt = 0.02\n"
            "t_end = 15\n"
            "integrator = midpoint\n"
            "sample_stride = 5\n"
            "warm_start = yes\n"
            "[newton]\n"
            "tolerance = 1e-12\n"
            "max_iterations = 30\n"
            "[compare]\n"
            "baseline_dt = 0.004\n"
            "[convergence]\n"
            "dts = 0.2, 0.1, 0.05\n"
            "t_end = 3.0\n"
            "[preset.rattleback]\n"
            "lam = 2.5\n"
        )
        kw = load_config(path)
        cfg = ExperimentConfig(**kw)
        assert cfg.preset == "rattleback"
        assert cfg.dt == 0.02
        assert cfg.t_end == 15.0
        assert cfg.integrator == "midpoint"
        assert cfg.sample_stride == 5
        assert cfg.warm_start is True
        assert cfg.newton_tolerance == 1e-12
        assert cfg.max_newton_iterations == 30
        assert cfg.baseline_dt == 0.004
        assert cfg.conv_dts == (0.2, 0.1, 0.05)
        assert cfg.conv_t_end == 3.0
        assert cfg.preset_params == {"lam": "2.5"}

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValueError, match="not found"):
            load_config(tmp_path / "nope.ini")

    def test_unknown_section(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[runner]\npreset = kida\n")
        with pytest.raises(ValueError, match="unknown config section"):
            load_config(path)

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[run]\ntimestep = 0.1\n")
        with pytest.raises(ValueError, match="unknown key"):
            load_config(path)


class TestPresetParamCoercion:
    def test_scalar_floats(self):
        out = _coerce_preset_params("kida", {"eps": "0.3", "omega": "-0.8"})
        assert out == {"eps": 0.3, "omega": -0.8}

    def test_vectors(self):
        out = _coerce_preset_params("rattleback", {"mu0": "0.1, 0.2, 0.3"})
        assert out == {"mu0": (0.1, 0.2, 0.3)}

    def test_heavy_top_params_collected(self):
        out = _coerce_preset_params(
            "heavy_top", {"bob_mass": "0.5", "rho": "1.1", "omega0": "0 0.1 0"}
        )
        assert out["omega0"] == (0.0, 0.1, 0.0)
        params = out["params"]
        assert isinstance(params, HeavyTopParams)
        assert params.bob_mass == 0.5
        assert params.rho == 1.1

    def test_build_preset_sign_override(self):
        cfg = ExperimentConfig(preset="kida", sign="minus")
        preset = build_preset(cfg)
        assert preset.sign is BracketSign.MINUS
        assert build_preset(ExperimentConfig(preset="kida")).sign is BracketSign.PLUS


class TestJsonable:
    def test_bools_stay_bools(self):
        out = _jsonable({"ok": np.bool_(True), "n": np.int64(3), "x": np.float64(0.5)})
        assert out == {"ok": True, "n": 3, "x": 0.5}
        assert isinstance(out["ok"], bool)
        assert json.dumps(out) == '{"ok": true, "n": 3, "x": 0.5}'

    def test_arrays_become_lists(self):
        out = _jsonable({"m": np.eye(2)})
        assert out == {"m": [[1.0, 0.0], [0.0, 1.0]]}


class TestMainErrorPaths:
    def test_missing_config_file(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.ini")]) == 2

    def test_bad_integrator_from_config(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[run]\nintegrator = euler\n")
        assert main(["run", "--config", str(path), "--dt", "0.1",
                     "--t-end", "0.5", "--out", str(tmp_path / "o2")]) == 2

    def test_bad_preset_param(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[preset.kida]\neps = fast\n")
        assert main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


class TestCheckCommand:
    def test_kida_check_passes(self, tmp_path):
        out = tmp_path / "chk"
        res = run_cli("check", "--preset", "kida", "--out", str(out))
        assert res.returncode == 0, res.stderr
        report = json.loads((out / "check_report.json").read_text())
        assert all(report["checks"].values())
        assert report["audit"]["semisimple"] is True
        assert "check kida/jacobi: PASS" in res.stdout

    def test_algebra_file_good(self, tmp_path):
        path = tmp_path / "so3.txt"
        path.write_text(
            "n=3\n3 1 2 1.0\n3 2 1 -1.0\n1 2 3 1.0\n1 3 2 -1.0\n2 3 1 1.0\n2 1 3 -1.0\n"
        )
        res = run_cli("check", "--algebra-file", str(path), "--out", str(tmp_path / "o"))
        assert res.returncode == 0, res.stderr

    def test_algebra_file_jacobi_broken(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text(
            "n=3\n3 1 2 1.0\n3 2 1 -1.0\n1 2 3 1.0\n1 3 2 -1.0\n"
            "2 3 1 1.0\n2 1 3 -1.0\n2 1 2 0.7\n2 2 1 -0.7\n"
        )
        res = run_cli("check", "--algebra-file", str(path), "--out", str(tmp_path / "o"))
        assert res.returncode == 2
        assert "jacobi: FAIL" in res.stdout

    def test_algebra_file_malformed(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1 2 3 1.0\n")  # no header
        res = run_cli("check", "--algebra-file", str(path), "--out", str(tmp_path / "o"))
        assert res.returncode == 2
        assert "header" in res.stderr


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_run") / "out"
    res = run_cli(
        "run", "--preset", "kida", "--dt", "0.1", "--t-end", "2",
        "--out", str(out),
    )
    assert res.returncode == 0, res.stderr
    return out


class TestRunCommand:
    def test_files_written(self, run_dir):
        for name in ("qp_trajectory.csv", "mu_trajectory.csv",
                     "invariants.csv", "summary.json"):
            assert (run_dir / name).exists(), name

    def test_summary_contents(self, run_dir):
        s = json.loads((run_dir / "summary.json").read_text())
        assert s["command"] == "run"
        assert s["preset"] == "kida"
        assert s["rows"] == 21
        assert s["labels"] == ["mu1", "mu2", "mu3"]
        assert s["pinning"]["residual"] <= 1e-12
        assert s["newton_stats"]["max"] <= 25
        assert set(s["invariants"]) == {"F0", "killing_q", "killing_p", "f1", "h"}
        for name, entry in s["invariants"].items():
            # quadratic invariants are exact for Gauss methods; the energy
            # only shows a bounded oscillation of size O(dt^4)
            bound = 1e-7 if name == "h" else 1e-12
            assert entry["max_abs_relative_error"] < bound, name

    def test_csv_headers(self, run_dir):
        qp = (run_dir / "qp_trajectory.csv").read_text().splitlines()[0]
        assert qp == "t,q1,q2,q3,p1,p2,p3"
        mu = (run_dir / "mu_trajectory.csv").read_text().splitlines()[0]
        assert mu == "t,mu1,mu2,mu3"
        inv = (run_dir / "invariants.csv").read_text().splitlines()[0]
        assert inv == "t,F0_relerr,killing_q_relerr,killing_p_relerr,f1_relerr,h_relerr"

    def test_mu_matches_levels(self, run_dir):
        # row 0 of the dual trajectory is mu0 itself
        lines = (run_dir / "mu_trajectory.csv").read_text().splitlines()
        first = [float(v) for v in lines[1].split(",")]
        np.testing.assert_allclose(
            first, [0.0, 1.0, 0.08338560480365563, -1.1211392237757412], atol=1e-12
        )

    def test_rerun_byte_identical(self, run_dir, tmp_path):
        out2 = tmp_path / "again"
        res = run_cli(
            "run", "--preset", "kida", "--dt", "0.1", "--t-end", "2",
            "--out", str(out2),
        )
        assert res.returncode == 0
        for name in ("qp_trajectory.csv", "mu_trajectory.csv",
                     "invariants.csv", "summary.json"):
            assert (run_dir / name).read_bytes() == (out2 / name).read_bytes(), name

    def test_sign_override_recorded(self, tmp_path):
        out = tmp_path / "minus"
        res = run_cli(
            "run", "--preset", "kida", "--dt", "0.1", "--t-end", "1",
            "--sign", "minus", "--out", str(out),
        )
        assert res.returncode == 0, res.stderr
        s = json.loads((out / "summary.json").read_text())
        assert s["sign"] == "minus"

    def test_stride_thins_rows(self, tmp_path):
        out = tmp_path / "strided"
        res = run_cli(
            "run", "--preset", "kida", "--dt", "0.1", "--t-end", "2",
            "--sample-stride", "5", "--out", str(out),
        )
        assert res.returncode == 0
        assert json.loads((out / "summary.json").read_text())["rows"] == 5


class TestCompareCommand:
    def test_kida_compare(self, tmp_path):
        out = tmp_path / "cmp"
        res = run_cli(
            "compare", "--preset", "kida", "--dt", "0.1", "--t-end", "2",
            "--baseline-dt", "0.05", "--out", str(out),
        )
        assert res.returncode == 0, res.stderr
        rep = json.loads((out / "comparison.json").read_text())
        assert rep["baseline"] == {"integrator": "rk4", "dt": 0.05}
        assert set(rep["verdicts"]) == {"f1", "h"}
        assert isinstance(rep["all_pass"], bool)
        assert (out / "invariants.csv").exists()
        assert (out / "baseline_invariants.csv").exists()
        assert "compare kida/f1:" in res.stdout

    def test_zero_horizon(self, tmp_path):
        out = tmp_path / "cmp0"
        res = run_cli(
            "compare", "--preset", "kida", "--dt", "0.1", "--t-end", "0",
            "--out", str(out),
        )
        assert res.returncode == 0, res.stderr
        rep = json.loads((out / "comparison.json").read_text())
        assert rep["all_pass"] is True  # single sample: no drift either side


class TestConvergenceCommand:
    def test_orders_measured(self, tmp_path):
        out = tmp_path / "conv"
        res = run_cli(
            "convergence", "--preset", "kida",
            "--conv-dts", "0.2,0.1,0.05", "--conv-t-end", "1.0",
            "--out", str(out),
        )
        assert res.returncode == 0, res.stderr
        rep = json.loads((out / "convergence.json").read_text())
        assert rep["collective"]["midpoint"]["slope"] == pytest.approx(2.0, abs=0.5)
        assert rep["collective"]["gl4"]["slope"] == pytest.approx(4.0, abs=0.6)
        assert rep["direct"]["rk4"]["slope"] == pytest.approx(4.0, abs=0.6)


class TestRuntimeFailures:
    def test_unreachable_mu0_exits_3(self, tmp_path):
        # mu3 != 0 needs nonzero p1 or p2, but those are forced to zero by
        # mu1 = mu2 = 0 under the preset's pins: the solver must give up
        ini = tmp_path / "exp.ini"
        ini.write_text("[preset.rattleback]\nmu0 = 0, 0, 1\n")
        res = run_cli(
            "run", "--config", str(ini), "--preset", "rattleback",
            "--dt", "0.1", "--t-end", "1", "--out", str(tmp_path / "o"),
        )
        assert res.returncode == 3
        assert "pinning" in res.stderr.lower()

    def test_nonconverging_stages_exit_3(self, tmp_path):
        res = run_cli(
            "run", "--preset", "rattleback", "--dt", "5", "--t-end", "20",
            "--jacobian", "none", "--out", str(tmp_path / "o"),
        )
        assert res.returncode == 3
        assert "step" in res.stderr.lower()
