"""End-to-end CLI behavior: exit codes, manifests, reproducibility."""

import hashlib
import json

import numpy as np
import pytest

from gsescatter.cli import main

SMALL_CFG = """\
ensemble gse
n 30
lam 10
t_open 1.0
tau_abs 8.0
n_realizations 10
n_energies 8
seed 41
label cli-small
"""


def _write_cfg(tmp_path, text=SMALL_CFG, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def _manifest(out):
    with open(out / "manifest.json", encoding="utf-8") as fh:
        return json.load(fh)


def test_analytic_success_and_checksums(tmp_path, capsys):
    out = tmp_path / "an"
    rc = main(["analytic", "--variable", "R", "--gamma", "5.7,12.8",
               "--sym", "gse", "--out", str(out)])
    assert rc == 0
    man = _manifest(out)
    assert man["experiment"] == "analytic"
    assert len(man["outputs"]) == 2
    for name, digest in man["outputs"].items():
        actual = hashlib.sha256((out / name).read_bytes()).hexdigest()
        assert actual == digest
    assert man["derived"]["worst_normalization_error"] < 1e-3
    assert "gsescatter" in man["versions"]


def test_analytic_two_classes_reports_separation(tmp_path):
    out = tmp_path / "an2"
    rc = main(["analytic", "--variable", "u", "--gamma", "5.7",
               "--sym", "gse,gue", "--out", str(out)])
    assert rc == 0
    man = _manifest(out)
    sup = man["derived"]["class_sup_distance"]["gamma=5.7"]
    assert sup > 0.05  # visibly distinct curves


def test_analytic_rejects_bad_gamma(tmp_path, capsys):
    rc = main(["analytic", "--variable", "u", "--gamma", "-1",
               "--out", str(tmp_path / "x")])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_analytic_ericson_variable_guard(tmp_path, capsys):
    rc = main(["analytic", "--variable", "v", "--ericson",
               "--out", str(tmp_path / "x")])
    assert rc == 2
    out = tmp_path / "er"
    rc = main(["analytic", "--variable", "R", "--ericson", "--out", str(out)])
    assert rc == 0
    assert (out / "analytic_R_ericson.txt").exists()


def test_graph_spectrum_run(tmp_path):
    out = tmp_path / "gr"
    rc = main(["graph-spectrum", "--kmax", "60", "--out", str(out)])
    assert rc == 0
    man = _manifest(out)
    assert man["derived"]["n_doublets"] > 30
    assert man["derived"]["max_doublet_splitting"] <= 1e-8
    assert (out / "levels.txt").exists()
    assert (out / "levels_collapsed.txt").exists()
    assert (out / "nnsd.txt").exists()
    assert (out / "number_variance.txt").exists()
    assert (out / "example.graph").exists()  # shipped spec dumped for reuse
    # self-describing header on every columnar file
    head = (out / "nnsd.txt").read_text().splitlines()[0]
    assert head.startswith("# ")


def test_graph_spectrum_bad_spec(tmp_path, capsys):
    bad = tmp_path / "bad.graph"
    bad.write_text("vertices 2\nbond 0 1 -4\n")
    rc = main(["graph-spectrum", "--spec", str(bad), "--out", str(tmp_path / "g")])
    assert rc == 2


def test_scattering_run_and_determinism(tmp_path):
    cfg = _write_cfg(tmp_path)
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert main(["scattering", "--config", str(cfg), "--out", str(out_a)]) == 0
    assert main(["scattering", "--config", str(cfg), "--out", str(out_b)]) == 0
    man_a, man_b = _manifest(out_a), _manifest(out_b)
    assert man_a["outputs"] == man_b["outputs"]  # byte-identical numeric outputs
    assert man_a["derived"]["mean_reflection"] == man_b["derived"]["mean_reflection"]
    for name in ("records.txt", "hist_reflection_scaled.txt", "hist_u.txt",
                 "hist_v.txt", "autocorrelation.txt"):
        assert (out_a / name).exists()
    data = np.loadtxt(out_a / "records.txt")
    assert data.shape == (80, 8)
    r = data[:, 4]
    assert np.all((r >= 0) & (r < 1))


def test_scattering_seed_override_changes_output(tmp_path):
    cfg = _write_cfg(tmp_path)
    out_a = tmp_path / "a"
    out_c = tmp_path / "c"
    assert main(["scattering", "--config", str(cfg), "--out", str(out_a)]) == 0
    assert main(["scattering", "--config", str(cfg), "--seed", "999",
                 "--out", str(out_c)]) == 0
    assert _manifest(out_a)["outputs"]["records.txt"] != \
        _manifest(out_c)["outputs"]["records.txt"]


def test_scattering_requires_absorption_setting(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, SMALL_CFG.replace("tau_abs 8.0\n", ""))
    rc = main(["scattering", "--config", str(cfg), "--out", str(tmp_path / "x")])
    assert rc == 2
    assert "gamma or tau_abs" in capsys.readouterr().err


def test_scattering_unreachable_gamma_is_numerical_failure(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, SMALL_CFG.replace("tau_abs 8.0", "gamma 12.8")
                     .replace("n_realizations 10", "n_realizations 8"))
    rc = main(["scattering", "--config", str(cfg), "--out", str(tmp_path / "x")])
    assert rc == 3
    assert "numerical failure" in capsys.readouterr().err


def test_scattering_missing_config(tmp_path, capsys):
    rc = main(["scattering", "--config", str(tmp_path / "none.cfg"),
               "--out", str(tmp_path / "x")])
    assert rc == 2


def test_fit_gamma_command(tmp_path, capsys):
    from gsescatter import AbsorptionParams, rng_stream, sample_reflection

    draws = sample_reflection(20000, AbsorptionParams(5.7), rng_stream(60, 0))
    samples = tmp_path / "r.txt"
    np.savetxt(samples, draws)
    rc = main(["fit-gamma", "--samples", str(samples), "--boot", "20",
               "--out", str(tmp_path / "fit")])
    assert rc == 0
    printed = capsys.readouterr().out
    assert "gamma = " in printed
    man = _manifest(tmp_path / "fit")
    assert abs(man["derived"]["gamma"] - 5.7) < 0.3


def test_fit_gamma_missing_file(tmp_path, capsys):
    rc = main(["fit-gamma", "--samples", str(tmp_path / "none.txt")])
    assert rc == 2


def test_compare_pass_and_fail_limits(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, SMALL_CFG.replace("tau_abs 8.0", "tau_abs 14.0")
                     .replace("n_realizations 10", "n_realizations 60"))
    out = tmp_path / "sc"
    assert main(["scattering", "--config", str(cfg), "--out", str(out)]) == 0
    records = out / "records.txt"
    cmp_out = tmp_path / "cmp"
    # an absurd gamma must fail a strict KS limit with exit 4
    rc = main(["compare", "--records", str(records), "--gamma", "0.5",
               "--ks-limit", "0.05", "--out", str(cmp_out)])
    assert rc == 4
    # without a limit the same comparison merely reports
    rc = main(["compare", "--records", str(records), "--gamma", "0.5",
               "--out", str(cmp_out)])
    assert rc == 0
    man = _manifest(cmp_out)
    assert set(man["derived"]["ks"]) == {
        "reflection", "amplitude", "u", "v", "reflection_scaled_vs_ericson",
    }


def test_compare_missing_records(tmp_path):
    rc = main(["compare", "--records", str(tmp_path / "none.txt"),
               "--gamma", "5.7", "--out", str(tmp_path / "x")])
    assert rc == 2


def test_workers_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("GSESCATTER_WORKERS", "3")
    out = tmp_path / "an"
    rc = main(["analytic", "--variable", "R", "--gamma", "1.0", "--out", str(out)])
    assert rc == 0
    assert _manifest(out)["config"]["workers"] == 3
    rc = main(["--workers", "0", "analytic", "--variable", "R",
               "--gamma", "1.0", "--out", str(tmp_path / "x")])
    assert rc == 2
