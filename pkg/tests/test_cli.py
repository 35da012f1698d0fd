import csv

import pytest

from mecsched.cli import main


def test_custom_sweep_writes_outputs(tmp_path, capsys):
    out = tmp_path / "res"
    code = main([
        "--sweep", "num_users", "--values", "2,3",
        "--policies", "local_only,joint",
        "--trials", "2", "--seed", "5", "--out", str(out),
    ])
    assert code == 0
    assert (out / "sweep_num_users.csv").exists()
    assert (out / "sweep_num_users_summary.csv").exists()
    for suffix in ("energy", "saving", "offload"):
        assert (out / f"sweep_num_users_{suffix}.png").exists()
    with open(out / "sweep_num_users.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 8  # 2 values x 2 trials x 2 policies


def test_no_figures_flag(tmp_path):
    out = tmp_path / "res"
    code = main([
        "--sweep", "num_users", "--values", "2",
        "--policies", "local_only",
        "--trials", "1", "--out", str(out), "--no-figures",
    ])
    assert code == 0
    assert (out / "sweep_num_users.csv").exists()
    assert not list(out.glob("*.png"))


def test_no_timing_makes_runs_byte_identical(tmp_path):
    args = ["--sweep", "num_users", "--values", "2,3",
            "--policies", "min_group,joint", "--trials", "2",
            "--seed", "11", "--no-figures", "--no-timing"]
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert (out1 / "sweep_num_users.csv").read_bytes() == \
        (out2 / "sweep_num_users.csv").read_bytes()
    assert (out1 / "sweep_num_users_summary.csv").read_bytes() == \
        (out2 / "sweep_num_users_summary.csv").read_bytes()


def test_exhaustive_cap_refused_with_diagnostic(tmp_path, capsys):
    code = main([
        "--sweep", "num_users", "--values", "8",
        "--policies", "opt_constrained",
        "--trials", "1", "--out", str(tmp_path),
    ])
    assert code != 0
    err = capsys.readouterr().err
    assert "exhaustive" in err


def test_cap_override_allows_larger_search(tmp_path):
    code = main([
        "--sweep", "num_users", "--values", "5",
        "--policies", "opt_constrained",
        "--trials", "1", "--out", str(tmp_path),
        "--max-exhaustive-users", "5", "--no-figures",
    ])
    assert code == 0


def test_preset_and_sweep_conflict(tmp_path, capsys):
    code = main(["--preset", "fig4", "--sweep", "num_users",
                 "--values", "2", "--out", str(tmp_path)])
    assert code != 0


def test_missing_sweep_arguments(tmp_path):
    assert main(["--out", str(tmp_path)]) != 0
    assert main(["--sweep", "num_users", "--out", str(tmp_path)]) != 0


def test_config_file_feeds_custom_sweep(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("num_users = 2\nnum_subcarriers = 2\n"
                   "noise_psd_dbm_hz = -108\nrng_seed = 3\n")
    out = tmp_path / "res"
    code = main([
        "--config", str(cfg), "--sweep", "cell_radius_km",
        "--values", "0.1,0.2", "--policies", "joint",
        "--trials", "2", "--out", str(out), "--no-figures",
    ])
    assert code == 0
    with open(out / "sweep_cell_radius_km.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["sweep_value"] for r in rows} == {"0.1", "0.2"}


def test_preset_run_small(tmp_path):
    out = tmp_path / "res"
    code = main(["--preset", "fig4", "--trials", "1", "--out", str(out),
                 "--no-figures"])
    assert code == 0
    assert (out / "fig4.csv").exists()
    assert (out / "fig4_summary.csv").exists()


def test_preset_fig5_writes_both_variants(tmp_path):
    out = tmp_path / "res"
    code = main(["--preset", "fig5", "--trials", "1", "--out", str(out),
                 "--no-figures"])
    assert code == 0
    assert (out / "fig5_m3.csv").exists()
    assert (out / "fig5_m7.csv").exists()
