import csv
import json

import numpy as np
import pytest

from sodp_chf.cli import RunConfig, load_config, main, parse_config_text
from sodp_chf.errors import ConfigError
from sodp_chf.record_io import EcgRecord, Label, read_features, write_manifest, write_record
from sodp_chf.record_io import CohortManifest, ManifestEntry
from sodp_chf.sodp import extract_features
from sodp_chf.pipeline import record_windows
from sodp_chf.record_io import load_manifest, load_record
from sodp_chf.preprocess import FilterConfig


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def _base_args(manifest, out):
    return ["--manifest_path", str(manifest), "--output_dir", str(out),
            "--window_s", "10", "--windows_per_record", "10"]


def test_parse_config_text():
    vals = parse_config_text("# comment\nwindow_s = 5  # trailing\n\nclassifier=nb\nk = 4\n")
    assert vals == {"window_s": 5.0, "classifier": "nb", "k": 4}


@pytest.mark.parametrize("text", ["bogus = 1\n", "window_s\n", "k = ten\n"])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_config_rejects_bad_values():
    for kwargs in (dict(classifier="svm"), dict(partition_mode="odd"), dict(mlp_neurons="x"),
                   dict(window_s=0)):
        with pytest.raises(ConfigError):
            RunConfig(**kwargs)


def test_config_paths_relative_to_file(tmp_path):
    (tmp_path / "sub").mkdir()
    cfg_path = tmp_path / "sub" / "run.cfg"
    cfg_path.write_text("manifest_path = data/m.csv\nwindow_s = 7\n")
    cfg = load_config(cfg_path, {"k": "5"})
    assert cfg.manifest_path == str(tmp_path / "sub" / "data" / "m.csv")
    assert cfg.window_s == 7.0 and cfg.k == 5


def test_synth_command(tmp_path):
    assert main(["synth", "--out", str(tmp_path), "--n_normal", "2", "--n-chf", "1",
                 "--duration_s", "12"]) == 0
    rows = _read_csv(tmp_path / "manifest.csv")
    assert len(rows) == 4


def test_features_command(small_cohort, tmp_path):
    out_dir, manifest = small_cohort
    assert main(["features", *_base_args(out_dir / "manifest.csv", tmp_path)]) == 0
    rows = read_features(tmp_path / "features.csv")
    assert len(rows) == 6 * 10
    assert all(sum(r.features) == 2558 for r in rows)
    prov = json.loads((tmp_path / "features.csv.provenance.json").read_text())
    assert prov["rows"] == 60 and prov["config"]["window_s"] == 10.0


def test_eval_kfold_all_neurons(small_cohort, tmp_path, capsys):
    out_dir, _ = small_cohort
    args = _base_args(out_dir / "manifest.csv", tmp_path)
    rc = main(["eval-kfold", *args, "--classifier", "mlp", "--mlp_neurons", "all",
               "--mlp_epochs", "200", "--k", "3"])
    assert rc == 0
    rows = _read_csv(tmp_path / "kfold_metrics.csv")
    assert rows[0] == ["classifier", "window_s", "neurons", "sen", "sel", "spe", "acc"]
    assert [r[2] for r in rows[1:]] == ["3", "5", "7", "9", "average"]
    assert capsys.readouterr().out.splitlines()[0].startswith("classifier,")
    folds = _read_csv(tmp_path / "kfold_folds.csv")
    assert len(folds) == 1 + 4 * 3
    assert sum(int(r[3]) + int(r[4]) + int(r[5]) + int(r[6]) for r in folds[1:]) == 4 * 60


def test_eval_kfold_bad_k(small_cohort, tmp_path, capsys):
    out_dir, _ = small_cohort
    rc = main(["eval-kfold", *_base_args(out_dir / "manifest.csv", tmp_path), "--k", "1"])
    assert rc == 1
    assert "k must" in capsys.readouterr().err
    assert not (tmp_path / "kfold_metrics.csv").exists()


def test_eval_loso_outputs(small_cohort, tmp_path, capsys):
    out_dir, _ = small_cohort
    rc = main(["eval-loso", *_base_args(out_dir / "manifest.csv", tmp_path), "--classifier", "lda"])
    assert rc == 0
    rows = _read_csv(tmp_path / "loso_subjects.csv")
    assert rows[0] == ["subject_id", "n", "n_chf", "rate", "decision", "correct"]
    assert len(rows) == 7
    for r in rows[1:]:
        assert r[1] == "10" and r[4] in ("Positive", "Negative") and r[5] in ("T", "F")
        assert float(r[3]) == pytest.approx(int(r[2]) / 10)
    err = capsys.readouterr().err
    assert "subjects misclassified" in err
    summary = _read_csv(tmp_path / "loso_summary.csv")
    assert summary[1][3] == "6"


def test_eval_loso_from_features_file(small_cohort, tmp_path):
    out_dir, _ = small_cohort
    args = _base_args(out_dir / "manifest.csv", tmp_path / "a")
    assert main(["features", *args]) == 0
    assert main(["eval-loso", *args, "--classifier", "nb"]) == 0
    direct = (tmp_path / "a" / "loso_subjects.csv").read_text()
    assert main(["eval-loso", "--features_path", str(tmp_path / "a" / "features.csv"),
                 "--output_dir", str(tmp_path / "b"), "--classifier", "nb"]) == 0
    assert (tmp_path / "b" / "loso_subjects.csv").read_text() == direct


def test_eval_loso_rejects_all_neurons(small_cohort, tmp_path):
    out_dir, _ = small_cohort
    args = _base_args(out_dir / "manifest.csv", tmp_path)
    assert main(["eval-loso", *args, "--classifier", "mlp", "--mlp_neurons", "all"]) == 1


def test_sodp_plot_matches_features(small_cohort, tmp_path):
    out_dir, _ = small_cohort
    svg = tmp_path / "p.svg"
    args = _base_args(out_dir / "manifest.csv", tmp_path)
    assert main(["sodp-plot", *args, "--subject", "synC-02", "--window", "3", "--svg", str(svg)]) == 0
    points = _read_csv(tmp_path / "sodp_synC-02_w3_points.csv")
    assert len(points) - 1 == 2560 - 2
    regions = _read_csv(tmp_path / "sodp_synC-02_w3_regions.csv")
    counts = [int(r[5]) for r in regions[1:]]
    entry = next(e for e in load_manifest(out_dir / "manifest.csv") if e.subject_id == "synC-02")
    window = record_windows(load_record(entry), FilterConfig(), 10.0, 4)[3]
    assert counts == extract_features(window).tolist()
    assert "<svg" in svg.read_text()


def test_sodp_plot_constant_record(tmp_path):
    rec = EcgRecord("flat", Label.NORMAL, 256.0, np.full(1000, 0.7))
    write_record(rec, tmp_path / "flat.txt")
    write_manifest(CohortManifest([ManifestEntry("flat", Label.NORMAL, tmp_path / "flat.txt", 256.0)]),
                   tmp_path / "m.csv")
    rc = main(["sodp-plot", "--manifest_path", str(tmp_path / "m.csv"), "--output_dir", str(tmp_path),
               "--window_s", "2", "--windows_per_record", "1", "--subject", "flat"])
    assert rc == 0
    points = _read_csv(tmp_path / "sodp_flat_w0_points.csv")
    assert len(points) == 1 + 510
    assert all([float(p[0]), float(p[1]), int(p[2]), int(p[3])] == [0.0, 0.0, 1, 1] for p in points[1:])


@pytest.mark.parametrize("extra", [["--subject", "nobody"], ["--subject", "synN-01", "--window", "10"]])
def test_sodp_plot_errors(small_cohort, tmp_path, extra, capsys):
    out_dir, _ = small_cohort
    assert main(["sodp-plot", *_base_args(out_dir / "manifest.csv", tmp_path), *extra]) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_short_record_names_subject(small_cohort, tmp_path, capsys):
    out_dir, _ = small_cohort
    args = _base_args(out_dir / "manifest.csv", tmp_path)
    assert main(["features", *args, "--windows_per_record", "13"]) == 1
    err = capsys.readouterr().err
    assert "synN-01" in err


def test_missing_manifest(tmp_path, capsys):
    assert main(["features", "--manifest_path", str(tmp_path / "nope.csv")]) == 1
    assert "error:" in capsys.readouterr().err


def test_reruns_byte_identical(small_cohort, tmp_path):
    out_dir, _ = small_cohort
    outputs = []
    args = _base_args(out_dir / "manifest.csv", tmp_path)
    for _ in range(2):
        assert main(["features", *args]) == 0
        assert main(["eval-loso", *args, "--classifier", "mlp", "--mlp_epochs", "100"]) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted(tmp_path.iterdir())})
    assert outputs[0] == outputs[1]
