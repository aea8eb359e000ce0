"""Record-to-feature-table glue used by the CLI and the end-to-end tests."""
from __future__ import annotations

from typing import Iterable

import numpy as np

from .classifiers import Dataset
from .errors import SodpChfError
from .preprocess import FilterConfig, Window, denoise, segment_windows
from .record_io import CohortManifest, EcgRecord, FeatureRow, load_record
from .sodp import PartitionMode, extract_features


def record_windows(
    record: EcgRecord,
    cfg: FilterConfig,
    window_s: float,
    count: int,
) -> list[Window]:
    return segment_windows(denoise(record, cfg), window_s, count)


def record_feature_rows(
    record: EcgRecord,
    cfg: FilterConfig,
    window_s: float,
    count: int,
    partition: PartitionMode = None,
) -> list[FeatureRow]:
    rows = []
    for w in record_windows(record, cfg, window_s, count):
        try:
            feats = extract_features(w, partition)
        except SodpChfError as exc:
            raise SodpChfError(f"subject {w.subject_id} window {w.window_index}: {exc}") from exc
        rows.append(FeatureRow(w.subject_id, w.window_index, tuple(feats.tolist()), w.label))
    return rows


def cohort_feature_rows(
    records: Iterable[EcgRecord],
    cfg: FilterConfig,
    window_s: float,
    count: int,
    partition: PartitionMode = None,
) -> list[FeatureRow]:
    rows: list[FeatureRow] = []
    for rec in records:
        rows.extend(record_feature_rows(rec, cfg, window_s, count, partition))
    return rows


def iter_records(manifest: CohortManifest):
    for entry in manifest:
        yield load_record(entry)


def dataset_from_rows(rows) -> Dataset:
    return Dataset.from_rows(rows)


def feature_matrix(rows) -> np.ndarray:
    return np.array([r.features for r in rows], dtype=np.int64).reshape(len(rows), -1)
