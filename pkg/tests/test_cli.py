import json

import pytest

from falqon_factor.cli import EXIT_CLAIM, EXIT_OK, EXIT_USAGE, main


def read(path):
    return json.loads(path.read_text())


def test_encode_catalog_and_generic(tmp_path, capsys):
    assert main(["encode", "--n", "9167", "--variant", "truncated", "--out", str(tmp_path)]) == EXIT_OK
    doc = read(tmp_path / "hamiltonian_9167_truncated.json")
    assert doc["n_qubits"] == 5 and len(doc["terms"]) == 4
    assert (tmp_path / "hamiltonian_9167_truncated.txt").read_text().startswith("# n = 9167")
    assert main(["encode", "--n", "143", "--generic", "--out", str(tmp_path)]) == EXIT_OK
    doc = read(tmp_path / "hamiltonian_143_generic_4x4.json")
    assert doc["l_p"] == 4 and doc["variables"][:2] == ["p1", "p2"]


@pytest.mark.parametrize("argv,msg", [
    (["encode", "--n", "10"], "n must be odd"),
    (["encode", "--n", "7"], "at least 9"),
    (["encode", "--n", "15"], "not in the catalog"),
    (["encode", "--n", "551", "--variant", "truncated"], "truncated"),
    (["encode", "--n", "15", "--generic", "--l-p", "2", "--l-q", "2"], "carry bound"),
    (["factor", "--n", "552"], "n must be odd"),
    (["factor", "--c", "-1"], "falqon/c"),
    (["factor", "--algorithm", "qaoa", "--realization", "daqc"], "exact problem realization"),
    (["factor", "--init", "thermal"], "thermal start"),
    (["verify", "--catalog", "/nonexistent.json"], "no such catalog"),
])
def test_usage_errors_exit_2(argv, msg, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("FALQON_FACTOR_OUT", str(tmp_path))
    assert main(argv) == EXIT_USAGE
    assert msg in capsys.readouterr().err


def test_factor_551_writes_outputs(tmp_path, capsys):
    assert main(["factor", "--n", "551", "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "19 x 29" in out
    report = read(tmp_path / "report.json")
    assert report["success"] and report["factors"] == [19, 29] and report["iterations"] == 22
    man = read(tmp_path / "factor_manifest.json")
    assert set(man["data_files"]) == {"trajectory.csv", "report.json"}
    assert man["run"]["hamiltonian_sha256_16"]
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header.startswith("iter,beta,energy,p_sol,beta_deg,prob_000")


def test_failed_claim_exits_1(tmp_path):
    assert main(["factor", "--iters", "0", "--out", str(tmp_path)]) == EXIT_CLAIM


def test_manifest_replay_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["factor", "--n", "9167", "--variant", "truncated", "--c", "0.1", "--dt", "0.02",
                 "--iters", "300", "--out", str(a)]) == EXIT_OK
    assert main(["factor", "--config", str(a / "factor_manifest.json"), "--out", str(b)]) == EXIT_OK
    for name in ("trajectory.csv", "report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert read(a / "factor_manifest.json")["config"] == read(b / "factor_manifest.json")["config"]


def test_env_var_sets_the_output_directory(tmp_path, monkeypatch):
    monkeypatch.setenv("FALQON_FACTOR_OUT", str(tmp_path / "env"))
    assert main(["factor", "--iters", "3", "--algorithm", "adiabatic"]) in (EXIT_OK, EXIT_CLAIM)
    assert (tmp_path / "env" / "trajectory.csv").exists()


def test_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"falqon": {"gain": 2}}))
    assert main(["factor", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_USAGE
    assert "gain" in capsys.readouterr().err
    cfg.write_text("not json")
    assert main(["factor", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_USAGE


def test_sweep_noise_cli(tmp_path):
    argv = ["sweep-noise", "--seeds", "0", "1", "--sweep-iters", "3", "--workers", "1", "--out", str(tmp_path)]
    assert main(argv) == EXIT_OK
    lines = (tmp_path / "sweep_noise.csv").read_text().splitlines()
    assert lines[0] == "algorithm,dtheta,dphi,seed,j,beta,energy,p_sol"
    # 3 algorithms x 5 noise cells x 2 seeds x 4 rows each
    assert len(lines) - 1 == 3 * 5 * 2 * 4
    man = read(tmp_path / "sweep_noise_manifest.json")
    assert man["config"]["seeds"] == [0, 1] and man["rows"] == 120


def test_sweep_rfi_and_stepsize_cli(tmp_path):
    cfg = tmp_path / "small.json"
    cfg.write_text(json.dumps({"sweep": {"nu1": [1000.0, None], "rfi": [0.0, 0.1], "c": [0.25]}}))
    assert main(["sweep-rfi", "--config", str(cfg), "--sweep-iters", "5", "--workers", "1", "--out", str(tmp_path)]) == EXIT_OK
    lines = (tmp_path / "sweep_rfi.csv").read_text().splitlines()
    assert lines[0] == "nu1,rfi,realization,seed,min_energy,final_energy,final_p_sol" and len(lines) == 5
    assert lines[-1].startswith("inf,0.1,daqc,0,")
    assert main(["sweep-stepsize", "--config", str(cfg), "--seeds", "0", "--sweep-iters", "2",
                 "--workers", "1", "--out", str(tmp_path)]) == EXIT_OK
    lines = (tmp_path / "sweep_stepsize.csv").read_text().splitlines()
    assert lines[0] == "c,dtheta,seed,j,beta,energy,p_sol" and len(lines) == 1 + 2 * 3


def test_verify_cli(tmp_path, capsys):
    assert main(["verify"]) == EXIT_OK
    assert "checks passed" in capsys.readouterr().out
    empty = tmp_path / "empty.json"
    empty.write_text("{}")
    assert main(["verify", "--catalog", str(empty)]) == EXIT_USAGE
