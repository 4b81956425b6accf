import json
import subprocess
import sys

import numpy as np
import pytest

from maxent_reweight.cli import main
from maxent_reweight.config import ConfigError, demo_config, parse_config

CSVS = ["weighted_samples.csv", "density_table.csv", "marginals.csv"]


def small_triangular(**changes):
    cfg = demo_config("triangular")
    cfg["n_samples"] = 20000
    cfg.update(changes)
    return cfg


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_transform_passes(tmp_path):
    out = tmp_path / "out"
    assert main(["transform", "--config", write(tmp_path, small_triangular()),
                 "--out-dir", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    for key in ["n", "ess", "entropy", "normalization_mc", "clipped_fraction", "ks_statistic",
                "ks_threshold", "passed", "resolved_config", "rng_algorithm"]:
        assert key in rep
    assert rep["passed"] is True
    assert abs(rep["normalization_mc"] - 1) < 0.01
    header = (out / "weighted_samples.csv").read_text().splitlines()[0]
    assert header == "x1,x2,f,w_raw,w_norm"
    table = (out / "density_table.csv").read_text().splitlines()
    assert table[0] == "f,induced_pdf,target_pdf,reweighted_pdf"
    assert len(table) == 41


def test_diagnostics_failure_exit_code(tmp_path, capsys):
    # two bins cannot resolve the triangle, so the weighted f-distribution misses the target
    cfg = small_triangular(estimator={"kind": "histogram", "bins": 2})
    assert main(["transform", "--config", write(tmp_path, cfg), "--out-dir", str(tmp_path)]) == 2
    assert "FAIL" in capsys.readouterr().out


def test_disjoint_target_exit_code(tmp_path, capsys):
    cfg = small_triangular(target={"family": "UniformInterval", "lo": 5.0, "hi": 6.0})
    assert main(["transform", "--config", write(tmp_path, cfg), "--out-dir", str(tmp_path)]) == 1
    assert "target support disjoint" in capsys.readouterr().err


@pytest.mark.parametrize("mutate,path", [
    (lambda c: c.update(colour="red"), "colour"),
    (lambda c: c["base"].update(sigma=1), "base.sigma"),
    (lambda c: c["diagnostics"].update(foo=1), "diagnostics.foo"),
    (lambda c: c.update(n_samples=10), "n_samples"),
    (lambda c: c.update(derived="x1+x3"), "derived"),
    (lambda c: c["diagnostics"].update(marginals=[3]), "diagnostics.marginals"),
])
def test_config_errors_name_the_field(tmp_path, capsys, mutate, path):
    cfg = small_triangular()
    mutate(cfg)
    with pytest.raises(ConfigError) as info:
        parse_config(cfg)
    assert info.value.path.startswith(path)
    assert main(["transform", "--config", write(tmp_path, cfg)]) == 1
    assert path in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(["transform", "--config", str(tmp_path / "nope.json")]) == 1
    assert "error: config" in capsys.readouterr().err


def test_resolved_config_reproduces_artifacts(tmp_path):
    first = tmp_path / "first"
    assert main(["demo", "triangular", "--n-samples", "20000", "--out-dir", str(first)]) == 0
    resolved = json.loads((first / "report.json").read_text())["resolved_config"]
    second = tmp_path / "second"
    assert main(["transform", "--config", write(tmp_path, resolved, "resolved.json"),
                 "--out-dir", str(second)]) == 0
    for name in CSVS:
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_threads_do_not_change_artifacts(tmp_path):
    runs = []
    for threads in ("1", "4"):
        out = tmp_path / threads
        assert main(["demo", "neutrino", "--n-samples", "200000", "--threads", threads,
                     "--out-dir", str(out)]) in (0, 2)
        runs.append(out)
    for name in CSVS:
        assert (runs[0] / name).read_bytes() == (runs[1] / name).read_bytes()


def test_seed_override(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["demo", "triangular", "--n-samples", "5000", "--seed", "1", "--out-dir", str(a)])
    main(["demo", "triangular", "--n-samples", "5000", "--seed", "2", "--out-dir", str(b)])
    assert (a / "weighted_samples.csv").read_bytes() != (b / "weighted_samples.csv").read_bytes()
    assert json.loads((a / "report.json").read_text())["resolved_config"]["seed"] == 1


def test_csv_floats_round_trip(tmp_path):
    out = tmp_path / "out"
    main(["demo", "triangular", "--n-samples", "5000", "--out-dir", str(out)])
    data = np.loadtxt(out / "weighted_samples.csv", delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data[:, 2], data[:, 0] + data[:, 1])
    assert np.sum(data[:, 4]) == pytest.approx(1.0, abs=1e-12)


def test_oracle_triangular(tmp_path):
    assert main(["oracle", "--demo", "triangular", "--out-dir", str(tmp_path)]) == 0
    data = np.loadtxt(tmp_path / "density_table.csv", delimiter=",", skiprows=1)
    assert data.shape == (64, 4)
    exact = np.where(data[:, 0] <= 1, data[:, 0], 2 - data[:, 0])
    assert np.max(np.abs(data[:, 1] - exact)) <= 0.01
    np.testing.assert_allclose(data[:, 3], 0.5, rtol=1e-9)


def test_oracle_identity_1d(tmp_path):
    cfg = {"base": {"family": "UniformBox", "dimension": 1, "lo": [0.0], "hi": [1.0]},
           "derived": "x1", "oracle": {"points": 1024, "f_bins": 32, "f_range": [0.0, 1.0]}}
    assert main(["oracle", "--config", write(tmp_path, cfg), "--out-dir", str(tmp_path)]) == 0
    data = np.loadtxt(tmp_path / "density_table.csv", delimiter=",", skiprows=1)
    np.testing.assert_allclose(data[:, 1], 1.0, rtol=0.01)


def test_oracle_rejects_four_dimensions(tmp_path, capsys):
    cfg = {"base": {"family": "UniformBox", "dimension": 4, "lo": [0.0] * 4, "hi": [1.0] * 4},
           "derived": "sum(x)", "oracle": {"points": 16}}
    assert main(["oracle", "--config", write(tmp_path, cfg), "--out-dir", str(tmp_path)]) == 1
    assert "dimension" in capsys.readouterr().err


def test_unknown_demo_rejected():
    with pytest.raises(SystemExit):
        main(["demo", "spherical"])


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "maxent_reweight", "demo", "triangular",
                           "--n-samples", "5000", "--out-dir", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "diagnostics: PASS" in proc.stdout


@pytest.mark.parametrize("name", ["triangular", "neutrino"])
def test_shipped_configs_match_demos(name):
    from pathlib import Path
    path = Path(__file__).resolve().parents[1] / "configs" / f"{name}.json"
    assert json.loads(path.read_text()) == demo_config(name)
