"""Synthetic labeled ECG cohorts.

Each beat is a sum of five Gaussian bumps (P, Q, R, S, T) placed at
jittered R-R intervals. White noise, a sinusoidal baseline drift and a
mains sinusoid are added on top. The irregular (CHF) class differs from the
normal class by larger R-R jitter and a faster mean rate; R-R jitter alone
barely moves region counts, since they do not depend on beat order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import BadSpecError
from .record_io import CohortManifest, EcgRecord, Label, ManifestEntry, write_manifest, write_record

# (offset from R peak [s], width [s], amplitude [mV])
BEAT_WAVES = (
    (-0.20, 0.025, 0.15),  # P
    (-0.03, 0.010, -0.10),  # Q
    (0.00, 0.012, 1.00),  # R
    (0.03, 0.010, -0.25),  # S
    (0.25, 0.040, 0.30),  # T
)
_BUMP_SUPPORT = 5.0  # bump evaluated within +/- 5 widths
_MIN_RR_FRAC = 0.05


@dataclass(frozen=True)
class SynthSpec:
    n_subjects_per_class: int = 0  # overrides both counts when > 0
    n_normal: int = 18
    n_chf: int = 15
    fs_hz: float = 256.0
    duration_s: float = 600.0
    heart_rate_bpm: float = 65.0
    chf_heart_rate_bpm: float = 90.0
    hr_spread_frac: float = 0.05
    rr_jitter_frac: float = 0.02
    chf_rr_jitter_frac: float = 0.25
    beat_amp_jitter_frac: float = 0.05
    noise_std: float = 0.003
    drift_amp: float = 0.2
    drift_hz: float = 0.3
    mains_amp: float = 0.05
    mains_hz: float = 60.0
    seed: int = 1

    def __post_init__(self):
        for name in ("fs_hz", "duration_s", "heart_rate_bpm", "chf_heart_rate_bpm"):
            if not getattr(self, name) > 0:
                raise BadSpecError(f"{name} must be positive")
        for name in ("hr_spread_frac", "rr_jitter_frac", "chf_rr_jitter_frac", "beat_amp_jitter_frac"):
            if not 0 <= getattr(self, name) <= 1:
                raise BadSpecError(f"{name} must lie in [0, 1]")
        for name in ("noise_std", "drift_amp", "mains_amp", "drift_hz", "mains_hz"):
            if not getattr(self, name) >= 0:
                raise BadSpecError(f"{name} must be non-negative")
        for name in ("n_subjects_per_class", "n_normal", "n_chf"):
            if getattr(self, name) < 0:
                raise BadSpecError(f"{name} must be non-negative")

    @property
    def counts(self) -> tuple[int, int]:
        if self.n_subjects_per_class > 0:
            return self.n_subjects_per_class, self.n_subjects_per_class
        return self.n_normal, self.n_chf

    def class_params(self, label: Label) -> tuple[float, float]:
        """(mean heart rate, R-R jitter fraction) for a class."""
        if label is Label.CHF:
            return self.chf_heart_rate_bpm, self.chf_rr_jitter_frac
        return self.heart_rate_bpm, self.rr_jitter_frac

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def subject_id(label: Label, index: int) -> str:
    prefix = "synC" if label is Label.CHF else "synN"
    return f"{prefix}-{index + 1:02d}"


def _rng(spec: SynthSpec, subject_index: int, label: Label) -> np.random.Generator:
    code = 1 if label is Label.CHF else 0
    return np.random.default_rng(np.random.SeedSequence([spec.seed, subject_index, code]))


def subject_heart_rate(spec: SynthSpec, subject_index: int, label: Label) -> float:
    """Mean heart rate of one subject (class rate with per-subject spread)."""
    base, _ = spec.class_params(label)
    u = _rng(spec, subject_index, label).uniform(-1.0, 1.0)
    return base * (1.0 + spec.hr_spread_frac * u)


def beat_times(spec: SynthSpec, subject_index: int, label: Label) -> np.ndarray:
    hr = subject_heart_rate(spec, subject_index, label)
    _, jitter = spec.class_params(label)
    rng = _rng(spec, subject_index, label)
    rng.uniform()  # consumed by subject_heart_rate
    rr = 60.0 / hr
    shortest = max(1.0 - jitter, _MIN_RR_FRAC)
    n_max = int(math.ceil(spec.duration_s / (rr * shortest))) + 2
    factors = np.maximum(1.0 + jitter * rng.uniform(-1.0, 1.0, size=n_max), _MIN_RR_FRAC)
    intervals = rr * factors
    t0 = rr * rng.uniform(0.0, 1.0)
    times = t0 + np.concatenate(([0.0], np.cumsum(intervals[:-1])))
    return times[times < spec.duration_s]


def generate_record(spec: SynthSpec, subject_index: int, label) -> EcgRecord:
    label = Label.parse(label)
    n = int(round(spec.duration_s * spec.fs_hz))
    if n < 3:
        raise BadSpecError("record would be shorter than three samples")
    t = np.arange(n) / spec.fs_hz
    x = np.zeros(n)
    beats = beat_times(spec, subject_index, label)
    # separate stream so beat timing does not depend on the noise draw
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, subject_index, 1 if label is Label.CHF else 0, 1]))
    amps = 1.0 + spec.beat_amp_jitter_frac * rng.uniform(-1.0, 1.0, size=beats.size)
    for tb, a in zip(beats, amps):
        for offset, width, amp in BEAT_WAVES:
            c = tb + offset
            lo = max(0, int(math.floor((c - _BUMP_SUPPORT * width) * spec.fs_hz)))
            hi = min(n, int(math.ceil((c + _BUMP_SUPPORT * width) * spec.fs_hz)) + 1)
            if lo >= hi:
                continue
            seg = t[lo:hi]
            x[lo:hi] += a * amp * np.exp(-0.5 * ((seg - c) / width) ** 2)
    if spec.noise_std:
        x += spec.noise_std * rng.standard_normal(n)
    if spec.drift_amp:
        x += spec.drift_amp * np.sin(2 * np.pi * spec.drift_hz * t + rng.uniform(0, 2 * np.pi))
    if spec.mains_amp:
        x += spec.mains_amp * np.sin(2 * np.pi * spec.mains_hz * t + rng.uniform(0, 2 * np.pi))
    return EcgRecord(subject_id(label, subject_index), label, spec.fs_hz, x)


def generate_cohort(spec: SynthSpec, out_dir) -> CohortManifest:
    """Write ``records/<id>.txt`` files and ``manifest.csv`` under ``out_dir``."""
    out_dir = Path(out_dir)
    rec_dir = out_dir / "records"
    rec_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    n_normal, n_chf = spec.counts
    for label, count in ((Label.NORMAL, n_normal), (Label.CHF, n_chf)):
        for i in range(count):
            rec = generate_record(spec, i, label)
            path = rec_dir / f"{rec.subject_id}.txt"
            write_record(rec, path)
            entries.append(ManifestEntry(rec.subject_id, label, path, spec.fs_hz))
    manifest = CohortManifest(tuple(entries))
    write_manifest(manifest, out_dir / "manifest.csv")
    return manifest
