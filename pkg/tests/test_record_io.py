import math

import numpy as np
import pytest

from sodp_chf.errors import (
    BadLabelError,
    DuplicateSubjectError,
    MissingFileError,
    NonFiniteSampleError,
    ParseError,
    TooShortError,
)
from sodp_chf.record_io import (
    FEATURE_HEADER,
    CohortManifest,
    EcgRecord,
    FeatureRow,
    Label,
    ManifestEntry,
    load_manifest,
    load_record,
    read_features,
    write_features,
    write_manifest,
    write_record,
)


def _write_manifest(path, rows):
    path.write_text("subject_id,label,path,fs_hz\n" + "".join(f"{r}\n" for r in rows))
    return path


def test_manifest_default_cohort_shape(tmp_path):
    rows = [f"c{i},CHF,c{i}.txt,256" for i in range(15)]
    rows += [f"n{i},normal,n{i}.txt,256" for i in range(18)]
    m = load_manifest(_write_manifest(tmp_path / "m.csv", rows))
    assert len(m) == 33
    assert m.count(Label.CHF) == 15 and m.count(Label.NORMAL) == 18
    # order preserved, relative paths resolved against the manifest directory
    assert [e.subject_id for e in m][:2] == ["c0", "c1"]
    assert m.entries[0].path == tmp_path / "c0.txt"


def test_manifest_header_only(tmp_path):
    assert len(load_manifest(_write_manifest(tmp_path / "m.csv", []))) == 0


def test_manifest_duplicate_subject(tmp_path):
    p = _write_manifest(tmp_path / "m.csv", ["p1,CHF,a.txt,256", "p1,Normal,b.txt,256"])
    with pytest.raises(DuplicateSubjectError) as exc:
        load_manifest(p)
    assert exc.value.subject_id == "p1"


def test_manifest_errors(tmp_path):
    with pytest.raises(MissingFileError):
        load_manifest(tmp_path / "nope.csv")
    with pytest.raises(BadLabelError) as exc:
        load_manifest(_write_manifest(tmp_path / "a.csv", ["p1,AF,a.txt,256"]))
    assert exc.value.value == "AF"
    with pytest.raises(ParseError) as exc:
        load_manifest(_write_manifest(tmp_path / "b.csv", ["p1,CHF,a.txt,256", "p2,CHF,a.txt"]))
    assert exc.value.line == 3
    (tmp_path / "c.csv").write_text("id,label,path,fs\n")
    with pytest.raises(ParseError):
        load_manifest(tmp_path / "c.csv")


@pytest.mark.parametrize("text", ["chf", "CHF", " Chf ", "NORMAL", "normal"])
def test_label_case_insensitive(text):
    assert Label.parse(text) in (Label.CHF, Label.NORMAL)


def test_load_record_line_count(tmp_path):
    path = tmp_path / "r.txt"
    values = np.sin(np.arange(2560) / 10.0)
    path.write_text("\n".join(repr(float(v)) for v in values) + "\n")
    expected = sum(1 for line in path.read_text().splitlines() if line.strip())
    rec = load_record(ManifestEntry("s", Label.CHF, path, 256.0))
    assert len(rec) == expected == 2560
    assert rec.sampling_rate_hz == 256.0


def test_load_record_value_column(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("t,value\n0,1.5\n1,2.5\n2,-1\n")
    rec = load_record(ManifestEntry("s", Label.NORMAL, path, 100.0))
    np.testing.assert_array_equal(rec.samples, [1.5, 2.5, -1.0])


def test_load_record_nan_reports_index(tmp_path):
    path = tmp_path / "r.txt"
    lines = ["0.1"] * 10
    lines[6] = "NaN"
    path.write_text("\n".join(lines))
    with pytest.raises(NonFiniteSampleError) as exc:
        load_record(ManifestEntry("s", Label.CHF, path, 256.0))
    assert exc.value.index == 6


def test_load_record_too_short_and_missing(tmp_path):
    path = tmp_path / "r.txt"
    path.write_text("1\n2\n")
    with pytest.raises(TooShortError) as exc:
        load_record(ManifestEntry("s", Label.CHF, path, 256.0))
    assert exc.value.length == 2
    with pytest.raises(MissingFileError):
        load_record(ManifestEntry("s", Label.CHF, tmp_path / "missing.txt", 256.0))


def test_record_invariants():
    with pytest.raises(ValueError):
        EcgRecord("s", Label.CHF, 0.0, [1, 2, 3])
    with pytest.raises(NonFiniteSampleError):
        EcgRecord("s", Label.CHF, 1.0, [1, math.inf, 3])


def test_record_round_trip_exact(tmp_path):
    rng = np.random.default_rng(3)
    x = rng.standard_normal(1000) * 10 ** rng.uniform(-6, 6, 1000)
    rec = EcgRecord("s", Label.CHF, 256.0, x)
    path = tmp_path / "r.txt"
    write_record(rec, path)
    back = load_record(ManifestEntry("s", Label.CHF, path, 256.0))
    np.testing.assert_array_equal(back.samples, x)


def test_manifest_round_trip(tmp_path):
    entries = (
        ManifestEntry("a", Label.CHF, tmp_path / "rec" / "a.txt", 256.0),
        ManifestEntry("b", Label.NORMAL, tmp_path / "rec" / "b.txt", 250.0),
    )
    write_manifest(CohortManifest(entries), tmp_path / "m.csv")
    assert load_manifest(tmp_path / "m.csv").entries == entries


def _rows(n, seed=0):
    rng = np.random.default_rng(seed)
    return [
        FeatureRow(f"s{i % 33}", i // 33, tuple(rng.integers(0, 2000, 16)), "CHF" if i % 2 else "Normal")
        for i in range(n)
    ]


def test_write_features_line_count(tmp_path):
    path = tmp_path / "f.csv"
    write_features(_rows(4950), path)
    lines = path.read_text().splitlines()
    assert len(lines) == 4951
    assert lines[0] == ",".join(FEATURE_HEADER)
    assert lines[0] == "subject_id,window_idx," + ",".join(f"f{i:02d}" for i in range(1, 17)) + ",label"


def test_write_features_empty(tmp_path):
    path = tmp_path / "f.csv"
    write_features([], path)
    assert path.read_text() == ",".join(FEATURE_HEADER) + "\n"
    assert read_features(path) == []


def test_features_round_trip(tmp_path):
    rows = _rows(200, seed=5)
    write_features(rows, tmp_path / "f.csv")
    assert read_features(tmp_path / "f.csv") == rows


def test_feature_row_rejects_negative():
    with pytest.raises(ValueError):
        FeatureRow("s", 0, (-1,) + (0,) * 15, "CHF")
