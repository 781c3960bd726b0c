"""Command-line interface: exit codes, CSV outputs, manifest round-trips."""
import json
import shutil
import subprocess

import numpy as np
import pytest

from cellroll.cli import main
from cellroll.oracles import gamma_abs


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_config(path, cfg):
    path.write_text(json.dumps(cfg))
    return str(path)


def quad_config(**solver):
    """Quadratic model arriving at z=1 with unit incoming velocity.

    Under zero drive the limit trajectory holds at 1 while the delayed
    solve relaxes toward the finite final position 0.5.
    """
    solver = {"eps": 1.0, "T": 1.0, "dt": 2e-3, **solver}
    return {"model": {"potential": {"kind": "quadratic"},
                      "kernel": {"kind": "exponential",
                                 "beta": 1.0, "zeta": 1.0},
                      "past": {"kind": "linear",
                               "slope": 1.0, "intercept": 1.0},
                      "v": {"kind": "constant", "value": 0.0}},
            "solver": solver}


def creep_config():
    """Plastic-regime setup: |v| below the total bond mass."""
    return {"model": {"potential": {"kind": "abs"},
                      "kernel": {"kind": "truncated_exponential",
                                 "beta": 1.0, "zeta": 1.0},
                      "past": {"kind": "constant", "value": -0.001},
                      "v": {"kind": "constant", "value": 0.1}},
            "solver": {"eps": 1.0, "T": 0.3, "dt": 1e-3}}


class TestGamma:
    def test_prints_sliding_velocity(self, capsys):
        code, out, _ = run(capsys, "gamma", "--psi", "abs",
                           "--mu", "1", "--v", "1.5")
        assert code == 0
        assert out.strip() == "0.5"

    def test_pinned_band_prints_zero(self, capsys):
        code, out, _ = run(capsys, "gamma", "--psi", "abs",
                           "--mu", "1", "--v", "0.7")
        assert code == 0
        assert out.strip() == "0"

    def test_explicit_kernel_parameters(self, capsys):
        # beta=2, zeta=1 gives total mass 2: v=2.5 slides at 0.5
        code, out, _ = run(capsys, "gamma", "--beta", "2", "--zeta", "1",
                           "--v", "2.5")
        assert code == 0
        assert out.strip() == "0.5"

    def test_sweep_writes_csv_and_passes(self, capsys, tmp_path):
        out_csv = tmp_path / "sweep.csv"
        code, out, _ = run(capsys, "gamma", "--sweep", "-3", "3", "25",
                           "--out", str(out_csv))
        assert code == 0
        assert out.startswith("PASS velocity_force:")
        lines = out_csv.read_text().splitlines()
        assert lines[0] == "param,gamma,gamma_abs,diff"
        table = np.genfromtxt(out_csv, delimiter=",", skip_header=1)
        assert table.shape == (25, 4)
        assert table[0, 0] == -3.0 and table[-1, 0] == 3.0
        assert np.max(table[:, 3]) <= 1e-6
        for v, g in zip(table[:, 0], table[:, 1]):
            assert g == pytest.approx(gamma_abs(v, 1.0), abs=1e-6)

    def test_missing_drive_is_config_error(self, capsys):
        code, _, err = run(capsys, "gamma")
        assert code == 2
        assert err.startswith("config error: --v")

    def test_sweep_needs_two_points(self, capsys):
        code, _, err = run(capsys, "gamma", "--sweep", "0", "1", "1")
        assert code == 2
        assert "--sweep" in err

    def test_tether_requires_radius(self, capsys):
        code, _, err = run(capsys, "gamma", "--psi", "tether", "--v", "1")
        assert code == 2
        assert "--r" in err

    def test_partial_kernel_flags_rejected(self, capsys):
        code, _, err = run(capsys, "gamma", "--beta", "2", "--v", "1")
        assert code == 2
        assert "--beta" in err


class TestTrajectoryCommands:
    def test_simulate_writes_csv_and_manifest(self, capsys, tmp_path):
        cfg = write_config(tmp_path / "run.json", quad_config())
        out_csv = tmp_path / "run.csv"
        code, out, _ = run(capsys, "simulate", "--config", cfg,
                           "--out", str(out_csv))
        assert code == 0
        assert f"wrote {out_csv}" in out
        lines = out_csv.read_text().splitlines()
        assert lines[0] == "t,z,zdot"
        table = np.genfromtxt(out_csv, delimiter=",", skip_header=1)
        assert table.shape[0] == 501
        # stretched incoming bonds pull the position down from 1 toward 0.5
        assert table[0, 1] == 1.0
        assert np.all(np.diff(table[:, 1]) <= 0.0)
        assert 0.5 < table[-1, 1] < 1.0

        manifest = json.loads((tmp_path / "run.manifest.json").read_text())
        assert manifest["command"] == "simulate"
        assert manifest["model"]["kernel"] == {"kind": "exponential",
                                               "beta": 1.0, "zeta": 1.0,
                                               "a_max": 40.0}
        assert manifest["solver"]["dt"] == 2e-3
        assert manifest["output"]["path"] == str(out_csv)

    def test_manifest_reruns_bit_identical(self, capsys, tmp_path):
        cfg = write_config(tmp_path / "run.json",
                           quad_config(T=0.5, scheme="heun"))
        first = tmp_path / "first.csv"
        run(capsys, "simulate", "--config", cfg, "--out", str(first))
        manifest = str(tmp_path / "first.manifest.json")
        second = tmp_path / "second.csv"
        code, _, _ = run(capsys, "simulate", "--config", manifest,
                         "--out", str(second))
        assert code == 0
        assert first.read_bytes() == second.read_bytes()

    def test_mm_matches_oracle_final_position(self, capsys, tmp_path):
        cfg = write_config(tmp_path / "creep.json", creep_config())
        mm_csv = tmp_path / "mm.csv"
        oracle_csv = tmp_path / "oracle.csv"
        assert run(capsys, "mm", "--config", cfg,
                   "--out", str(mm_csv))[0] == 0
        assert run(capsys, "oracle", "--config", cfg,
                   "--out", str(oracle_csv))[0] == 0
        z_mm = np.genfromtxt(mm_csv, delimiter=",", skip_header=1)[:, 1]
        z_ref = np.genfromtxt(oracle_csv, delimiter=",", skip_header=1)[:, 1]
        assert z_mm.shape == z_ref.shape
        assert abs(z_mm[-1] - z_ref[-1]) < 5e-4

    def test_limit_command_holds_equilibrium(self, capsys, tmp_path):
        cfg = write_config(tmp_path / "run.json", quad_config())
        out_csv = tmp_path / "limit.csv"
        code, _, _ = run(capsys, "limit", "--config", cfg,
                         "--out", str(out_csv))
        assert code == 0
        table = np.genfromtxt(out_csv, delimiter=",", skip_header=1)
        assert np.max(np.abs(table[:, 1] - 1.0)) < 1e-12

    def test_output_precision_is_honored(self, capsys, tmp_path):
        cfg_dict = quad_config(T=0.1, dt=0.05)
        cfg_dict["output"] = {"precision": 3}
        cfg = write_config(tmp_path / "run.json", cfg_dict)
        out_csv = tmp_path / "coarse.csv"
        run(capsys, "simulate", "--config", cfg, "--out", str(out_csv))
        assert out_csv.read_text().splitlines()[1] == "0,1,-1"

    def test_oracle_rejects_varying_drive(self, capsys, tmp_path):
        cfg_dict = creep_config()
        cfg_dict["model"]["v"] = {"kind": "table", "t": [0.0, 1.0],
                                  "values": [0.1, 0.2]}
        cfg = write_config(tmp_path / "run.json", cfg_dict)
        code, _, err = run(capsys, "oracle", "--config", cfg)
        assert code == 2
        assert "model.v.kind" in err


class TestFailureExits:
    def test_bad_field_reports_dotted_path(self, capsys, tmp_path):
        cfg_dict = quad_config()
        cfg_dict["model"]["kernel"]["beta"] = -1.0
        cfg = write_config(tmp_path / "run.json", cfg_dict)
        code, _, err = run(capsys, "simulate", "--config", cfg)
        assert code == 2
        assert err.startswith("config error: model.kernel.beta")

    def test_unknown_field_is_rejected(self, capsys, tmp_path):
        cfg_dict = quad_config()
        cfg_dict["extra"] = 1
        cfg = write_config(tmp_path / "run.json", cfg_dict)
        code, _, err = run(capsys, "simulate", "--config", cfg)
        assert code == 2
        assert "<config>.extra" in err and "unknown field" in err

    def test_missing_config_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "simulate", "--config",
                           str(tmp_path / "absent.json"))
        assert code == 2
        assert err.startswith("config error: <config>")

    def test_unstable_run_exits_one(self, capsys, tmp_path):
        cfg_dict = quad_config(T=200.0, dt=0.5)
        cfg_dict["model"]["kernel"]["beta"] = 200.0
        cfg_dict["model"]["past"] = {"kind": "constant", "value": 0.0}
        cfg_dict["model"]["v"] = {"kind": "constant", "value": 1.0}
        cfg = write_config(tmp_path / "stiff.json", cfg_dict)
        code, _, err = run(capsys, "simulate", "--config", cfg)
        assert code == 1
        assert err.startswith("numerical failure:")
        assert "blew up" in err


class TestStudyCommands:
    def test_converge_passes_and_echoes_study(self, capsys, tmp_path):
        cfg_dict = quad_config()
        del cfg_dict["solver"]
        cfg_dict["model"]["past"] = {"kind": "constant", "value": 0.0}
        cfg_dict["model"]["v"] = {"kind": "constant", "value": 1.0}
        cfg_dict["study"] = {"eps_list": [0.4, 0.2, 0.1], "T": 1.0,
                             "dt": 2e-3, "final_bound": 0.05}
        cfg = write_config(tmp_path / "conv.json", cfg_dict)
        out_csv = tmp_path / "conv.csv"
        code, out, _ = run(capsys, "converge", "--config", cfg,
                           "--out", str(out_csv))
        assert code == 0
        assert out.startswith("PASS convergence:")
        assert "final error <= 0.05" in out
        table = np.genfromtxt(out_csv, delimiter=",", skip_header=1)
        assert list(table[:, 0]) == [0.4, 0.2, 0.1]
        manifest = json.loads((tmp_path / "conv.manifest.json").read_text())
        assert manifest["study"] == {"eps_list": [0.4, 0.2, 0.1], "T": 1.0,
                                     "dt": 2e-3, "final_bound": 0.05}

    def test_converge_rejects_increasing_eps(self, capsys, tmp_path):
        cfg_dict = quad_config()
        del cfg_dict["solver"]
        cfg_dict["study"] = {"eps_list": [0.1, 0.2], "T": 1.0, "dt": 2e-3}
        cfg = write_config(tmp_path / "conv.json", cfg_dict)
        code, _, err = run(capsys, "converge", "--config", cfg)
        assert code == 2
        assert "study.eps_list" in err

    def test_longtime_passes(self, capsys, tmp_path):
        cfg_dict = quad_config()
        del cfg_dict["solver"]
        cfg_dict["model"]["past"] = {"kind": "constant", "value": 0.0}
        cfg_dict["model"]["v"] = {"kind": "constant", "value": 1.0}
        cfg_dict["study"] = {"T_list": [10.0, 20.0], "dt": 5e-3}
        cfg = write_config(tmp_path / "lt.json", cfg_dict)
        out_csv = tmp_path / "lt.csv"
        code, out, _ = run(capsys, "longtime", "--config", cfg,
                           "--out", str(out_csv))
        assert code == 0
        assert out.startswith("PASS longtime:")
        table = np.genfromtxt(out_csv, delimiter=",", skip_header=1)
        assert table[1, 1] < table[0, 1]

    def test_longtime_rejects_empty_horizons(self, capsys, tmp_path):
        cfg_dict = quad_config()
        del cfg_dict["solver"]
        cfg_dict["study"] = {"T_list": [], "dt": 5e-3}
        cfg = write_config(tmp_path / "lt.json", cfg_dict)
        code, _, err = run(capsys, "longtime", "--config", cfg)
        assert code == 2
        assert "study.T_list" in err

    def test_unknown_study_key_rejected(self, capsys, tmp_path):
        cfg_dict = quad_config()
        del cfg_dict["solver"]
        cfg_dict["study"] = {"T_list": [1.0], "dt": 5e-3, "slack": 0.1}
        cfg = write_config(tmp_path / "lt.json", cfg_dict)
        code, _, err = run(capsys, "longtime", "--config", cfg)
        assert code == 2
        assert "study.slack" in err and "unknown field" in err


def test_console_script_is_installed():
    exe = shutil.which("cellroll")
    assert exe is not None
    proc = subprocess.run([exe, "gamma", "--psi", "abs", "--mu", "1",
                           "--v", "1.5"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "0.5"
