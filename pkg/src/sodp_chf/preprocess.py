"""Denoising, windowing and amplitude normalization of raw ECG."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy import signal as sps

from .errors import (
    FrequencyOutOfRangeError,
    RecordTooShortError,
    WidthEvenError,
    WidthTooLargeError,
)
from .record_io import EcgRecord, Label

DEFAULT_WINDOW_TIMES_S = (3.0, 5.0, 7.0, 10.0)
_ROUNDING_ULPS = 64


@dataclass(frozen=True)
class FilterConfig:
    """Baseline (two cascaded medians) and mains (notch) filter settings."""

    median1_ms: float = 200.0
    median2_ms: float = 600.0
    notch_hz: float = 60.0
    notch_q: float = 30.0

    def __post_init__(self):
        for name in ("median1_ms", "median2_ms", "notch_hz", "notch_q"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.median1_ms < self.median2_ms:
            raise ValueError("median1_ms must be smaller than median2_ms")

    def widths(self, fs_hz: float) -> tuple[int, int]:
        return ms_to_odd_width(self.median1_ms, fs_hz), ms_to_odd_width(self.median2_ms, fs_hz)


@dataclass(frozen=True)
class Window:
    subject_id: str
    label: Label
    window_index: int
    duration_s: float
    samples: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.samples.size


def ms_to_odd_width(ms: float, fs_hz: float) -> int:
    """Nearest odd sample count to a duration in milliseconds."""
    n = ms * fs_hz / 1000.0
    return max(1, 2 * int(math.floor(n / 2.0)) + 1)


def median_filter(signal, width_samples: int) -> np.ndarray:
    """Running median of odd width, boundary samples replicated."""
    x = np.asarray(signal, dtype=float)
    if width_samples < 1 or width_samples % 2 == 0:
        raise WidthEvenError(f"median width must be odd and positive, got {width_samples}")
    if width_samples > x.size:
        raise WidthTooLargeError(f"median width {width_samples} exceeds signal length {x.size}")
    # mode="nearest" replicates edge samples
    return ndimage.median_filter(x, size=width_samples, mode="nearest")


def estimate_baseline(signal, w1: int, w2: int) -> np.ndarray:
    return median_filter(median_filter(signal, w1), w2)


def remove_baseline(record: EcgRecord, cfg: FilterConfig = FilterConfig()) -> EcgRecord:
    w1, w2 = cfg.widths(record.sampling_rate_hz)
    x = record.samples
    return record.with_samples(x - estimate_baseline(x, w1, w2))


def notch_filter(signal, fs_hz: float, notch_hz: float, q: float) -> np.ndarray:
    """Zero-phase second-order notch.

    The biquad has zeros on the unit circle at ``notch_hz`` and a -3 dB
    bandwidth of ``notch_hz / q``; it is run forward then backward.
    """
    x = np.asarray(signal, dtype=float)
    if not 0 < notch_hz < fs_hz / 2:
        raise FrequencyOutOfRangeError(
            f"notch frequency {notch_hz} Hz must lie in (0, {fs_hz / 2}) Hz"
        )
    if not q > 0:
        raise ValueError("notch quality factor must be positive")
    b, a = sps.iirnotch(notch_hz, q, fs=fs_hz)
    # pad by ~6 envelope time constants so edge transients settle outside the data
    tau = q * fs_hz / (math.pi * notch_hz)
    padlen = min(x.size - 1, int(math.ceil(6 * tau)))
    if padlen < 1:
        return x.copy()
    return sps.filtfilt(b, a, x, padlen=padlen)


def denoise(record: EcgRecord, cfg: FilterConfig = FilterConfig()) -> EcgRecord:
    """Mains notch followed by baseline removal.

    The notch runs first: the median cascade is nonlinear, so a mains tone
    left in its input distorts the baseline estimate whatever happens after.
    The notch still rings for roughly ``6 * q / (pi * notch_hz)`` seconds at
    each record edge when the tone starts mid-cycle.
    """
    x = record.samples
    out = notch_filter(x, record.sampling_rate_hz, cfg.notch_hz, cfg.notch_q)
    out = remove_baseline(record.with_samples(out), cfg).samples.copy()
    # filter rounding on a flat stretch would otherwise be blown up to +-1 by normalization
    floor = _ROUNDING_ULPS * np.finfo(float).eps * float(np.max(np.abs(x)))
    out[np.abs(out) <= floor] = 0.0
    return record.with_samples(out)


def normalize_window(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    peak = np.max(np.abs(x)) if x.size else 0.0
    if peak == 0:
        return x.copy()
    return x / peak


def window_length(duration_s: float, fs_hz: float) -> int:
    return int(round(duration_s * fs_hz))


def segment_windows(record: EcgRecord, duration_s: float, count: int) -> list[Window]:
    """First ``count`` back-to-back windows from the start of the record, each normalized."""
    if count < 1:
        raise ValueError("window count must be positive")
    n = window_length(duration_s, record.sampling_rate_hz)
    if n < 1:
        raise ValueError("window duration shorter than one sample")
    needed = n * count
    if len(record) < needed:
        raise RecordTooShortError(needed, len(record), record.subject_id)
    x = record.samples
    return [
        Window(
            record.subject_id,
            record.label,
            i,
            float(duration_s),
            normalize_window(x[i * n:(i + 1) * n]),
        )
        for i in range(count)
    ]
