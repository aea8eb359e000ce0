"""Reading and writing ECG records, cohort manifests and feature tables.

All files are plain text. A manifest is a CSV with the header
``subject_id,label,path,fs_hz``; a sample file holds one decimal value per
line (or a CSV with a ``value`` column); a feature table has the header
``subject_id,window_idx,f01..f16,label``.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadLabelError,
    DuplicateSubjectError,
    MissingFileError,
    NonFiniteSampleError,
    ParseError,
    TooShortError,
)

MANIFEST_HEADER = ("subject_id", "label", "path", "fs_hz")
N_FEATURES = 16
FEATURE_COLUMNS = tuple(f"f{i:02d}" for i in range(1, N_FEATURES + 1))
FEATURE_HEADER = ("subject_id", "window_idx", *FEATURE_COLUMNS, "label")

# 17 significant digits round-trip any IEEE double exactly.
_SAMPLE_FORMAT = ".17g"


class Label(str, enum.Enum):
    CHF = "CHF"
    NORMAL = "Normal"

    @classmethod
    def parse(cls, value) -> "Label":
        if isinstance(value, Label):
            return value
        text = str(value).strip().lower()
        for member in cls:
            if member.value.lower() == text:
                return member
        raise BadLabelError(value)

    @property
    def is_positive(self) -> bool:
        return self is Label.CHF

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class EcgRecord:
    """One subject's single-lead raw ECG."""

    subject_id: str
    label: Label
    sampling_rate_hz: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        label = Label.parse(self.label)
        object.__setattr__(self, "label", label)
        if not self.sampling_rate_hz > 0:
            raise ValueError(f"sampling rate must be positive, got {self.sampling_rate_hz}")
        samples = np.array(self.samples, dtype=float).ravel()
        bad = np.flatnonzero(~np.isfinite(samples))
        if bad.size:
            raise NonFiniteSampleError(int(bad[0]))
        if samples.size < 3:
            raise TooShortError(samples.size)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sampling_rate_hz

    def with_samples(self, samples) -> "EcgRecord":
        return EcgRecord(self.subject_id, self.label, self.sampling_rate_hz, samples)


@dataclass(frozen=True)
class ManifestEntry:
    subject_id: str
    label: Label
    path: Path
    fs_hz: float


@dataclass(frozen=True)
class CohortManifest:
    entries: tuple[ManifestEntry, ...] = ()

    def __post_init__(self):
        entries = tuple(self.entries)
        seen = set()
        for entry in entries:
            if entry.subject_id in seen:
                raise DuplicateSubjectError(entry.subject_id)
            seen.add(entry.subject_id)
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def count(self, label: Label) -> int:
        return sum(1 for e in self.entries if e.label is label)


def load_manifest(path) -> CohortManifest:
    """Parse a cohort manifest; relative sample paths resolve against its directory."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(path)
    base = path.parent
    entries = []
    seen = set()
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != MANIFEST_HEADER:
            raise ParseError(path, 1, f"expected header {','.join(MANIFEST_HEADER)}")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(MANIFEST_HEADER):
                raise ParseError(path, line_no, f"expected 4 fields, got {len(row)}")
            subject_id, label, rel, fs = (cell.strip() for cell in row)
            if not subject_id:
                raise ParseError(path, line_no, "empty subject_id")
            if subject_id in seen:
                raise DuplicateSubjectError(subject_id)
            seen.add(subject_id)
            try:
                fs_hz = float(fs)
            except ValueError:
                raise ParseError(path, line_no, f"bad fs_hz {fs!r}") from None
            if not (math.isfinite(fs_hz) and fs_hz > 0):
                raise ParseError(path, line_no, f"fs_hz must be positive, got {fs!r}")
            sample_path = Path(rel)
            if not sample_path.is_absolute():
                sample_path = base / sample_path
            entries.append(ManifestEntry(subject_id, Label.parse(label), sample_path, fs_hz))
    return CohortManifest(tuple(entries))


def write_manifest(manifest: CohortManifest, path, relative_to=None) -> None:
    path = Path(path)
    root = Path(relative_to) if relative_to is not None else path.parent
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for e in manifest:
            try:
                rel = Path(e.path).relative_to(root).as_posix()
            except ValueError:
                rel = str(e.path)
            writer.writerow([e.subject_id, e.label.value, rel, repr(float(e.fs_hz))])


def read_samples(path) -> np.ndarray:
    """Read a sample file: one number per line, or a CSV with a ``value`` column."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(path)
    with path.open() as fh:
        lines = fh.read().splitlines()
    value_col = None
    start = 0
    if lines and not _looks_numeric(lines[0].split(",")[0]):
        header = [h.strip() for h in lines[0].split(",")]
        if "value" not in header:
            raise ParseError(path, 1, "header present but no 'value' column")
        value_col = header.index("value")
        start = 1
    values = []
    for line_no, line in enumerate(lines[start:], start=start + 1):
        text = line.strip()
        if not text:
            continue
        if value_col is not None:
            cells = text.split(",")
            if value_col >= len(cells):
                raise ParseError(path, line_no, "missing value column")
            text = cells[value_col].strip()
        try:
            values.append(float(text))
        except ValueError:
            raise ParseError(path, line_no, f"not a number: {text!r}") from None
    return np.asarray(values, dtype=float)


def _looks_numeric(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_record(entry: ManifestEntry) -> EcgRecord:
    samples = read_samples(entry.path)
    return EcgRecord(entry.subject_id, entry.label, entry.fs_hz, samples)


def write_record(record: EcgRecord, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        fh.write("\n".join(format(v, _SAMPLE_FORMAT) for v in record.samples.tolist()))
        fh.write("\n")


@dataclass(frozen=True)
class FeatureRow:
    subject_id: str
    window_idx: int
    features: tuple[int, ...]
    label: Label

    def __post_init__(self):
        feats = tuple(int(v) for v in self.features)
        if len(feats) != N_FEATURES:
            raise ValueError(f"expected {N_FEATURES} features, got {len(feats)}")
        if min(feats) < 0:
            raise ValueError("feature counts must be non-negative")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "label", Label.parse(self.label))


def write_features(rows: Iterable[FeatureRow], path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FEATURE_HEADER)
        for r in rows:
            writer.writerow([r.subject_id, r.window_idx, *r.features, r.label.value])


def read_features(path) -> list[FeatureRow]:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(path)
    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != FEATURE_HEADER:
            raise ParseError(path, 1, "unexpected feature header")
        for line_no, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != len(FEATURE_HEADER):
                raise ParseError(path, line_no, f"expected {len(FEATURE_HEADER)} fields")
            try:
                rows.append(
                    FeatureRow(cells[0], int(cells[1]), tuple(int(c) for c in cells[2:-1]), cells[-1])
                )
            except ValueError as exc:
                raise ParseError(path, line_no, str(exc)) from None
    return rows


def rows_from_arrays(subject_ids: Sequence[str], window_idx: Sequence[int], features, labels):
    """Zip parallel arrays into :class:`FeatureRow` objects."""
    return [
        FeatureRow(s, int(w), tuple(f), lab)
        for s, w, f, lab in zip(subject_ids, window_idx, np.asarray(features), labels)
    ]
