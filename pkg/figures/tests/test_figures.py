import json
import os
import subprocess
import sys

import numpy as np
import pytest

from lpfigures import FigureRequest, level_functions, read_table, render
from lpfigures.cli import main


def write_csv(path, header, rows):
    lines = [header] + [",".join(f"{v!r}" for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


class TestReadTable:
    def test_roundtrip(self, tmp_path):
        path = write_csv(tmp_path / "a.csv", "t,x", [(0.0, 1.5), (0.1, 2.5)])
        names, data = read_table(path)
        assert names == ["t", "x"]
        np.testing.assert_array_equal(data, [[0.0, 1.5], [0.1, 2.5]])

    def test_header_only_rejected(self, tmp_path):
        path = (tmp_path / "empty.csv")
        path.write_text("t,mu1,mu2,mu3\n")
        with pytest.raises(ValueError, match="no data rows"):
            read_table(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "none.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="empty"):
            read_table(path)


class TestLevelFunctions:
    def test_kida_matches_samples(self):
        fields = level_functions(
            "kida",
            {"eps": 0.5, "omega": -1.0, "mu1": 1.0,
             "casimir_level": -0.25, "energy_level": 1.0},
        )
        mu = np.array([1.0, 0.08338560480365563, -1.1211392237757412])
        # the preset's initial point sits on h=1, f1=-0.25 by construction
        assert float(fields["h"](*mu)) == pytest.approx(1.0, abs=1e-12)
        assert float(fields["f1"](*mu)) == pytest.approx(-0.25, abs=1e-12)

    def test_kida_wall_is_nan(self):
        fields = level_functions("kida", {"eps": 0.5, "omega": -1.0})
        assert np.isnan(fields["h"](0.0, 0.0, 1.0))  # mu3 beyond pi/8

    def test_rattleback(self):
        fields = level_functions("rattleback", {"lam": 4.0})
        assert float(fields["f1"](0.01, 0.01, 0.5)) == pytest.approx(0.01 * 0.01**4)
        assert float(fields["h"](3.0, 0.0, 4.0)) == pytest.approx(12.5)

    def test_unknown_preset(self):
        with pytest.raises(ValueError, match="heavy_top"):
            level_functions("heavy_top", {})


class TestTimeseries:
    def test_renders_and_rerenders_identically(self, kida_outputs, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        for out in (a, b):
            req = FigureRequest(
                kind="timeseries", inputs=(str(kida_outputs["mu"]),), out=str(out)
            )
            assert render(req) == out
        assert a.stat().st_size > 0
        assert a.read_bytes() == b.read_bytes()

    def test_column_subset(self, kida_outputs, tmp_path):
        out = tmp_path / "one.png"
        render(
            FigureRequest(
                kind="timeseries", inputs=(str(kida_outputs["mu"]),),
                out=str(out), columns=("mu3",),
            )
        )
        assert out.exists()

    def test_missing_column_no_file(self, kida_outputs, tmp_path):
        out = tmp_path / "x.png"
        with pytest.raises(ValueError, match="mu9"):
            render(
                FigureRequest(
                    kind="timeseries", inputs=(str(kida_outputs["mu"]),),
                    out=str(out), columns=("mu9",),
                )
            )
        assert not out.exists()

    def test_empty_trajectory_no_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("t,mu1,mu2,mu3\n")
        out = tmp_path / "x.png"
        with pytest.raises(ValueError, match="no data rows"):
            render(FigureRequest(kind="timeseries", inputs=(str(path),), out=str(out)))
        assert not out.exists()


class TestLeaf3d:
    def test_renders_and_rerenders_identically(self, kida_outputs, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        for out in (a, b):
            render(
                FigureRequest(
                    kind="leaf3d", inputs=(str(kida_outputs["mu"]),),
                    summary=str(kida_outputs["summary"]), out=str(out),
                )
            )
        assert a.stat().st_size > 0
        assert a.read_bytes() == b.read_bytes()

    def test_needs_summary(self, kida_outputs, tmp_path):
        with pytest.raises(ValueError, match="summary"):
            render(
                FigureRequest(
                    kind="leaf3d", inputs=(str(kida_outputs["mu"]),),
                    out=str(tmp_path / "x.png"),
                )
            )

    def test_rejects_wrong_width(self, kida_outputs, tmp_path):
        path = write_csv(tmp_path / "flat.csv", "t,a,b", [(0.0, 1.0, 2.0)])
        with pytest.raises(ValueError, match="3-component"):
            render(
                FigureRequest(
                    kind="leaf3d", inputs=(str(path),),
                    summary=str(kida_outputs["summary"]), out=str(tmp_path / "x.png"),
                )
            )

    def test_rejects_unsupported_preset(self, kida_outputs, tmp_path):
        summary = tmp_path / "summary.json"
        summary.write_text(json.dumps({"preset": "mystery", "params": {}}))
        with pytest.raises(ValueError, match="mystery"):
            render(
                FigureRequest(
                    kind="leaf3d", inputs=(str(kida_outputs["mu"]),),
                    summary=str(summary), out=str(tmp_path / "x.png"),
                )
            )


class TestErrorCompare:
    def test_renders_and_rerenders_identically(self, kida_outputs, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        for out in (a, b):
            render(
                FigureRequest(
                    kind="error_compare",
                    inputs=(
                        str(kida_outputs["cmp_collective"]),
                        str(kida_outputs["cmp_baseline"]),
                    ),
                    out=str(out),
                )
            )
        assert a.stat().st_size > 0
        assert a.read_bytes() == b.read_bytes()

    def test_column_restriction(self, kida_outputs, tmp_path):
        out = tmp_path / "f1.png"
        render(
            FigureRequest(
                kind="error_compare",
                inputs=(
                    str(kida_outputs["cmp_collective"]),
                    str(kida_outputs["cmp_baseline"]),
                ),
                out=str(out), columns=("f1",),
            )
        )
        assert out.exists()

    def test_unshared_column_rejected(self, kida_outputs, tmp_path):
        # killing_q only exists on the collective side
        with pytest.raises(ValueError, match="killing_q"):
            render(
                FigureRequest(
                    kind="error_compare",
                    inputs=(
                        str(kida_outputs["cmp_collective"]),
                        str(kida_outputs["cmp_baseline"]),
                    ),
                    out=str(tmp_path / "x.png"), columns=("killing_q",),
                )
            )

    def test_needs_two_inputs(self, kida_outputs, tmp_path):
        with pytest.raises(ValueError, match="two|baseline"):
            render(
                FigureRequest(
                    kind="error_compare",
                    inputs=(str(kida_outputs["cmp_collective"]),),
                    out=str(tmp_path / "x.png"),
                )
            )


class TestDispatchAndCli:
    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="kind"):
            render(FigureRequest(kind="sparkline", inputs=("x.csv",), out="y.png"))

    def test_cli_ok(self, kida_outputs, tmp_path):
        out = tmp_path / "cli.png"
        rc = main([
            "--kind", "timeseries", "--input", str(kida_outputs["mu"]),
            "--out", str(out),
        ])
        assert rc == 0
        assert out.exists()

    def test_cli_input_error(self, tmp_path, capsys):
        rc = main([
            "--kind", "timeseries", "--input", str(tmp_path / "missing.csv"),
            "--out", str(tmp_path / "x.png"),
        ])
        assert rc == 2
        assert "missing.csv" in capsys.readouterr().err

    def test_cli_bad_kind_exits_2(self):
        with pytest.raises(SystemExit) as err:
            main(["--kind", "pie", "--input", "a.csv", "--out", "b.png"])
        assert err.value.code == 2

    def test_console_script_subprocess(self, kida_outputs, tmp_path):
        out = tmp_path / "sub.png"
        res = subprocess.run(
            [
                sys.executable, "-m", "lpfigures.cli",
                "--kind", "error_compare",
                "--input", str(kida_outputs["cmp_collective"]),
                str(kida_outputs["cmp_baseline"]),
                "--out", str(out),
            ],
            capture_output=True, text=True, env=dict(os.environ),
        )
        assert res.returncode == 0, res.stderr
        assert out.exists()
