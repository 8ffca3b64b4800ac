import os
import subprocess
import sys

import pytest

PRIMARY = [sys.executable, "-m", "liepoisson.cli"]


def run_primary(*args):
    env = dict(os.environ)
    env["LIEPOISSON_NUMBA"] = "0"  # tiny runs; skip compilation
    return subprocess.run(
        PRIMARY + list(args), capture_output=True, text=True, env=env
    )


@pytest.fixture(scope="session")
def kida_outputs(tmp_path_factory):
    """Real CLI outputs: one kida run and one kida comparison."""
    root = tmp_path_factory.mktemp("kida_cli")
    run_dir, cmp_dir = root / "run", root / "cmp"
    res = run_primary(
        "run", "--preset", "kida", "--dt", "0.1", "--t-end", "50",
        "--out", str(run_dir),
    )
    assert res.returncode == 0, res.stderr
    res = run_primary(
        "compare", "--preset", "kida", "--dt", "0.1", "--t-end", "50",
        "--baseline-dt", "0.1", "--out", str(cmp_dir),
    )
    assert res.returncode == 0, res.stderr
    return {
        "mu": run_dir / "mu_trajectory.csv",
        "qp": run_dir / "qp_trajectory.csv",
        "invariants": run_dir / "invariants.csv",
        "summary": run_dir / "summary.json",
        "cmp_collective": cmp_dir / "invariants.csv",
        "cmp_baseline": cmp_dir / "baseline_invariants.csv",
    }
