import json
import subprocess
import sys

import pytest

from fibrot.cli import main, _resolve_config, ConfigError, _DEFAULTS


def read(path):
    with open(path) as fh:
        return fh.read()


# ---------------------------------------------------------------------------
# config resolution

def test_defaults_cover_every_experiment():
    for exp, cfg in _DEFAULTS.items():
        assert "seed" in cfg, exp


def test_resolve_precedence_flags_over_file_over_defaults(tmp_path):
    cfgfile = tmp_path / "c.json"
    cfgfile.write_text(json.dumps({"N": 200, "Q": 512}))
    cfg = _resolve_config("weyl", str(cfgfile), ["N=100"], 42)
    assert cfg["N"] == 100          # flag beats file
    assert cfg["Q"] == 512          # file beats default
    assert cfg["m"] == [1]          # default survives
    assert cfg["seed"] == 42        # --seed beats everything


def test_resolve_rejects_unknown_keys(tmp_path):
    with pytest.raises(ConfigError):
        _resolve_config("weyl", None, ["nope=1"], None)
    cfgfile = tmp_path / "c.json"
    cfgfile.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ConfigError):
        _resolve_config("weyl", str(cfgfile), [], None)
    with pytest.raises(ConfigError):
        _resolve_config("weyl", None, ["N"], None)       # not key=value


def test_resolve_parses_json_values():
    cfg = _resolve_config("weyl", None, ["m=[1]", "s_max=0.5"], None)
    assert cfg["m"] == [1] and cfg["s_max"] == 0.5
    cfg = _resolve_config("orbit", None,
                          ['map={"family":"smooth_circle","params":{"eps":0.5}}'],
                          None)
    assert cfg["map"]["family"] == "smooth_circle"


# ---------------------------------------------------------------------------
# exit codes

def test_exit_zero_on_pass(tmp_path, capsys):
    rc = main(["monoid-selftest", "--out", str(tmp_path / "o"),
               "n_triples=3", "Q=64"])
    assert rc == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["verdict"] is True
    assert summary["experiment"] == "monoid-selftest"


def test_exit_two_on_bad_config(tmp_path):
    assert main(["weyl", "--out", str(tmp_path / "o"), "nope=3"]) == 2
    assert main(["weyl", "--out", str(tmp_path / "o"), "justakey"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["weyl", "--config", str(bad),
                 "--out", str(tmp_path / "o")]) == 2


def test_exit_one_on_fault(tmp_path):
    rc = main(["weyl", "--out", str(tmp_path / "o"), "m=[0]"])
    assert rc == 1


def test_exit_one_on_failed_verdict(tmp_path, capsys):
    rc = main(["weyl", "--out", str(tmp_path / "o"), "N=100",
               "s_max=1e-9"])    # identity map has S_100 = 0.01 > 1e-9
    assert rc == 1
    summary = json.loads(capsys.readouterr().out)
    assert summary["verdict"] is False


# ---------------------------------------------------------------------------
# outputs and manifest

def test_weyl_outputs_and_headers(tmp_path, capsys):
    out = tmp_path / "w"
    assert main(["weyl", "--out", str(out), "N=64", "Q=256",
                 "mc_pairs=2000"]) == 0
    capsys.readouterr()
    csv_text = read(out / "weyl_m1.csv")
    assert csv_text.splitlines()[0] == "N,S_N"
    man = json.loads(read(out / "run_manifest.json"))
    assert man["experiment"] == "weyl"
    assert man["config"]["N"] == 64
    assert "weyl_m1.csv" in man["outputs"]
    assert man["verdicts"]["mc_within_3sigma"] is True
    assert man["all_pass"] is True
    assert man["wall_time_s"] >= 0
    for name in man["outputs"]:
        assert (out / name).exists()


def test_orbit_header_and_density(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["orbit", "--out", str(out), "N=20", "Q=512"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert read(out / "orbit.csv").splitlines()[0] == "n,distance"
    assert 0.0 <= summary["key_values"]["density"] <= 1.0


def test_cantor_header_and_verdict(tmp_path, capsys):
    out = tmp_path / "c"
    assert main(["cantor", "--out", str(out), "Q=4096", "B=16",
                 "k_max=4"]) == 0
    capsys.readouterr()
    lines = read(out / "cantor.csv").splitlines()
    assert lines[0] == "k,modulus"
    assert len(lines) == 6
    man = json.loads(read(out / "run_manifest.json"))
    assert man["verdicts"]["constant_modulus"] is True


def test_trajectory_header(tmp_path, capsys):
    out = tmp_path / "t"
    assert main(["homog-birkhoff", "--out", str(out), "T=50", "n_orbits=2",
                 "dump_steps=10", "median_max=1.1"]) == 0
    capsys.readouterr()
    lines = read(out / "trajectory.csv").splitlines()
    assert lines[0] == "step,u,v,theta,vbar1,vbar2"
    assert len(lines) == 12
    assert read(out / "birkhoff.csv").splitlines()[0] == \
        "orbit,avg_re,avg_im,avg_abs"


def test_atoms_and_mixing_manifests(tmp_path, capsys):
    out1 = tmp_path / "a"
    assert main(["atoms", "--out", str(out1), "Q=4096"]) == 0
    out2 = tmp_path / "m"
    assert main(["homog-mixing", "--out", str(out2), "M=2000", "k=5",
                 "corr_max=0.2"]) == 0
    capsys.readouterr()
    man1 = json.loads(read(out1 / "run_manifest.json"))
    assert man1["verdicts"]["no_heavy_window"] is True
    man2 = json.loads(read(out2 / "run_manifest.json"))
    assert read(out2 / "mixing.csv").splitlines()[0] == \
        "k,corr_re,corr_im,corr_abs"
    assert abs(man2["key_values"]["corr_abs_lag0"] - 1.0) <= 1e-12


def test_homog_asynch_small(tmp_path, capsys):
    out = tmp_path / "ha"
    assert main(["homog-asynch", "--out", str(out), "Q=2000", "N=200",
                 "s_max=0.05"]) == 0
    capsys.readouterr()
    man = json.loads(read(out / "run_manifest.json"))
    assert set(man["verdicts"]) == {
        "atoms_m1_0", "atoms_m0_1", "atoms_m1_1",
        "weyl_m1_0", "weyl_m0_1", "weyl_m1_1"}
    assert all(man["verdicts"].values())


# ---------------------------------------------------------------------------
# determinism

@pytest.mark.parametrize("args", [
    ["weyl", "N=128", "Q=512", "mc_pairs=1000"],
    ["monoid-selftest", "n_triples=3", "Q=64"],
    ["homog-birkhoff", "T=100", "n_orbits=3", "dump_steps=20",
     "median_max=1.1"],
    ["homog-mixing", "M=1000", "k=4", "corr_max=0.5"],
])
def test_two_runs_identical(tmp_path, capsys, args):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main([args[0], "--seed", "99", "--out", str(out1), *args[1:]]) == 0
    assert main([args[0], "--seed", "99", "--out", str(out2), *args[1:]]) == 0
    capsys.readouterr()
    man = json.loads(read(out1 / "run_manifest.json"))
    for name in man["outputs"]:
        assert read(out1 / name) == read(out2 / name), name


# ---------------------------------------------------------------------------
# installed entry point

def test_console_script_help():
    proc = subprocess.run([sys.executable, "-m", "fibrot.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "experiment" in proc.stdout
