"""Second-order difference plot and its 16 quadrant-by-band region counts.

Every pair of consecutive first differences ``(x[k+1]-x[k], x[k+2]-x[k+1])``
is a point in the plane. The plane is split into four sign quadrants
(I ``(+,+)``, II ``(-,+)``, III ``(-,-)``, IV ``(+,-)``) and four radial bands
bounded by three origin-centred circles. Feature ``(q-1)*4 + (b-1)`` counts
the points in quadrant ``q`` and band ``b``.

Boundary conventions, fixed so counts are bit-reproducible:

* a coordinate equal to zero counts as positive, so ``(0, 0)`` is quadrant I;
* a point exactly on a circle belongs to the inner band.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EmptyPointSetError, TooShortError

N_QUADRANTS = 4
N_BANDS = 4
N_REGIONS = N_QUADRANTS * N_BANDS
DEGENERATE_RADIUS = 1e-12


@dataclass(frozen=True)
class RegionPartition:
    """Radii of the three circles; the outermost band is unbounded."""

    r1: float
    r2: float
    r3: float

    def __post_init__(self):
        if not 0 < self.r1 < self.r2 < self.r3:
            raise ValueError(f"radii must satisfy 0 < r1 < r2 < r3, got {self.radii}")

    @property
    def radii(self) -> tuple[float, float, float]:
        return (self.r1, self.r2, self.r3)

    @classmethod
    def scaled(cls, d: float) -> "RegionPartition":
        return cls(d, 2.0 * d, 3.0 * d)


Adaptive = None
PartitionMode = Union[None, RegionPartition]


def _samples_of(window) -> np.ndarray:
    samples = getattr(window, "samples", window)
    return np.asarray(samples, dtype=float).ravel()


def compute_sodp(window) -> np.ndarray:
    """Return the ``(n-2, 2)`` array of SODP points in temporal order.

    ``window`` may be a :class:`~sodp_chf.preprocess.Window` or any 1-D
    sequence of samples.
    """
    x = _samples_of(window)
    if x.size < 3:
        raise TooShortError(x.size)
    d = np.diff(x)
    return np.column_stack((d[:-1], d[1:]))


def quadrant_of(point) -> int:
    d1, d2 = point
    if d1 >= 0:
        return 1 if d2 >= 0 else 4
    return 2 if d2 >= 0 else 3


def band_of(point, partition: RegionPartition) -> int:
    r = float(np.hypot(point[0], point[1]))
    for band, edge in enumerate(partition.radii, start=1):
        if r <= edge:
            return band
    return N_BANDS


def quadrants(points: np.ndarray) -> np.ndarray:
    """Vectorized :func:`quadrant_of`, values in 1..4."""
    pos1 = points[:, 0] >= 0
    pos2 = points[:, 1] >= 0
    return np.where(pos1, np.where(pos2, 1, 4), np.where(pos2, 2, 3))


def bands(points: np.ndarray, partition: RegionPartition) -> np.ndarray:
    """Vectorized :func:`band_of`, values in 1..4."""
    r = np.hypot(points[:, 0], points[:, 1])
    # side="left": r == edge maps to the inner band
    return np.searchsorted(np.asarray(partition.radii), r, side="left") + 1


def adaptive_radii(points: np.ndarray) -> RegionPartition:
    """Circles at 1, 2 and 3 times the RMS radial distance of the points."""
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        raise EmptyPointSetError("cannot derive radii from an empty point set")
    r = np.hypot(points[:, 0], points[:, 1])
    # RMS lies in [min r, max r]; clamping absorbs rounding for equal radii
    d = float(np.clip(np.sqrt(np.mean(r * r)), r.min(), r.max()))
    if d == 0:
        d = DEGENERATE_RADIUS
    return RegionPartition.scaled(d)


def resolve_partition(points: np.ndarray, mode: PartitionMode = Adaptive) -> RegionPartition:
    return adaptive_radii(points) if mode is None else mode


def region_index(quadrant, band):
    return (np.asarray(quadrant) - 1) * N_BANDS + (np.asarray(band) - 1)


def count_regions(points: np.ndarray, partition: RegionPartition) -> np.ndarray:
    idx = region_index(quadrants(points), bands(points, partition))
    return np.bincount(idx, minlength=N_REGIONS).astype(np.int64)


def extract_features(window, partition_mode: PartitionMode = Adaptive) -> np.ndarray:
    """16 region counts of a window's SODP (quadrant-major, band-minor).

    ``partition_mode`` is ``None`` for per-window adaptive radii or a
    :class:`RegionPartition` for fixed radii.
    """
    points = compute_sodp(window)
    return count_regions(points, resolve_partition(points, partition_mode))


def parse_partition_mode(text: str) -> PartitionMode:
    """Parse ``adaptive`` or ``fixed:r1,r2,r3``."""
    text = text.strip().lower()
    if text == "adaptive":
        return None
    if text.startswith("fixed:"):
        parts = text[len("fixed:"):].split(",")
        if len(parts) != 3:
            raise ValueError(f"fixed partition needs three radii, got {text!r}")
        return RegionPartition(*(float(p) for p in parts))
    raise ValueError(f"partition mode must be 'adaptive' or 'fixed:r1,r2,r3', got {text!r}")


def format_partition_mode(mode: PartitionMode) -> str:
    if mode is None:
        return "adaptive"
    return "fixed:" + ",".join(repr(r) for r in mode.radii)


def region_labels() -> list[tuple[int, int]]:
    """(quadrant, band) for each feature position."""
    return [(q, b) for q in range(1, N_QUADRANTS + 1) for b in range(1, N_BANDS + 1)]
