"""Core raster containers: probability maps, masks, instance sets, features.

All containers are immutable after construction (arrays are copied and marked
read-only), so they are safe to share across worker threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimMismatch, NonFiniteInput, RangeError, ShapeMismatch

IGNORE = 255

NORMALIZED_TOL = 1e-5


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ProbMap:
    """Per-class probability raster, shape (C, H, W), values in [0, 1].

    Planes are ordered like ``classes``. Per-pixel sums are not required to
    equal 1: instance-capable models emit independent per-query scores. The
    ``normalized`` attribute records whether every pixel sums to 1 within
    ``NORMALIZED_TOL``; it is derived from the data, never trusted from disk.
    """

    classes: tuple[str, ...]
    data: np.ndarray
    normalized: bool = field(init=False)

    def __post_init__(self):
        classes = tuple(str(c) for c in self.classes)
        object.__setattr__(self, "classes", classes)
        data = np.asarray(self.data)
        if data.dtype not in (np.float32, np.float64):
            data = data.astype(np.float64)
        if data.ndim != 3:
            raise ShapeMismatch(f"probability map must be (C, H, W), got shape {data.shape}")
        c, h, w = data.shape
        if len(classes) != c or c < 1 or h < 1 or w < 1:
            raise ShapeMismatch(
                f"class list of length {len(classes)} does not match {c} planes of {h}x{w}"
            )
        if len(set(classes)) != len(classes):
            raise ValueError(f"duplicate class names: {classes}")
        if not np.isfinite(data).all():
            raise RangeError("probability map contains non-finite values")
        if data.min() < 0.0 or data.max() > 1.0:
            bad = float(data.min()) if data.min() < 0.0 else float(data.max())
            raise RangeError(f"probability value {bad} outside [0, 1]")
        sums = data.sum(axis=0)
        normalized = bool(np.abs(sums - 1.0).max() <= NORMALIZED_TOL)
        object.__setattr__(self, "data", _freeze(data))
        object.__setattr__(self, "normalized", normalized)

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def num_classes(self) -> int:
        return self.data.shape[0]

    def plane(self, name: str) -> np.ndarray:
        """Return the (H, W) plane for a class name."""
        try:
            return self.data[self.classes.index(name)]
        except ValueError:
            raise KeyError(f"class {name!r} not in {self.classes}") from None

    def semantic_equal(self, other: "ProbMap", tol: float = 0.0) -> bool:
        """True when both maps assign the same values per class name,
        regardless of plane order."""
        if set(self.classes) != set(other.classes):
            return False
        if self.data.shape[1:] != other.data.shape[1:]:
            return False
        for name in self.classes:
            a, b = self.plane(name), other.plane(name)
            if tol == 0.0:
                if not np.array_equal(a, b):
                    return False
            elif np.abs(a.astype(np.float64) - b.astype(np.float64)).max() > tol:
                return False
        return True


def _validate_mask(data, allowed: frozenset, kind: str) -> np.ndarray:
    arr = np.asarray(data)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeMismatch(f"{kind} must be a non-empty 2-D raster, got shape {arr.shape}")
    bad = ~np.isin(arr, list(allowed))
    if bad.any():
        offset = int(np.flatnonzero(bad.ravel())[0])
        raise IllegalPixelValue(int(arr.ravel()[offset]), offset)
    return arr.astype(np.uint8)


@dataclass(frozen=True)
class BinaryMask:
    """H x W raster over {0, 1}."""

    data: np.ndarray

    def __post_init__(self):
        arr = _validate_mask(self.data, frozenset((0, 1)), "binary mask")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def count(self) -> int:
        """Number of foreground (value 1) pixels."""
        return int(self.data.sum())


@dataclass(frozen=True)
class TriMask:
    """H x W raster over {0, 1, 255}; 255 is excluded from losses and metrics."""

    data: np.ndarray

    def __post_init__(self):
        arr = _validate_mask(self.data, frozenset((0, 1, IGNORE)), "trimask")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def ignored(self) -> int:
        """Number of 255 pixels."""
        return int((self.data == IGNORE).sum())


@dataclass(frozen=True)
class Taxonomy:
    """Ordered concepts, each grouping a disjoint set of class names.

    For binary change detection the convention is two concepts with index 1
    acting as the foreground, e.g. ``("Background", "Foreground")``.
    """

    concepts: tuple[str, ...]
    groups: dict[str, tuple[str, ...]]

    def __post_init__(self):
        concepts = tuple(str(c) for c in self.concepts)
        groups = {str(k): tuple(str(x) for x in v) for k, v in self.groups.items()}
        if len(concepts) < 1 or len(set(concepts)) != len(concepts):
            raise ValueError(f"concepts must be unique and non-empty: {concepts}")
        if set(groups) != set(concepts):
            raise ValueError("groups must define exactly one entry per concept")
        seen: set[str] = set()
        for name in concepts:
            members = groups[name]
            if not members:
                raise ValueError(f"concept {name!r} has no member classes")
            overlap = seen.intersection(members)
            if overlap:
                raise ValueError(f"classes {sorted(overlap)} appear in multiple concepts")
            seen.update(members)
        object.__setattr__(self, "concepts", concepts)
        object.__setattr__(self, "groups", groups)

    @property
    def all_classes(self) -> frozenset:
        return frozenset(c for members in self.groups.values() for c in members)

    def members(self, concept: str) -> tuple[str, ...]:
        return self.groups[concept]


def default_taxonomy() -> Taxonomy:
    """Building-change taxonomy: houses/buildings vs common land-cover classes."""
    return Taxonomy(
        concepts=("Background", "Foreground"),
        groups={
            "Background": ("road", "grass", "tree", "water"),
            "Foreground": ("house", "building"),
        },
    )


@dataclass(frozen=True)
class InstanceSet:
    """Disjoint binary instances over one grid, stored as a label map.

    Label 0 is background; instance ``i`` occupies label ``i + 1``. The label
    map and the mask-list views are interconvertible without loss: masks are
    emitted in label order and re-encoding preserves indices.
    """

    labels: np.ndarray
    n_instances: int = field(init=False)

    def __post_init__(self):
        arr = np.asarray(self.labels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeMismatch(f"label map must be 2-D, got shape {arr.shape}")
        if arr.min() < 0:
            raise ValueError("label map cannot hold negative labels")
        arr = arr.astype(np.int32)
        n = int(arr.max())
        # canonical form: every label 1..n owns at least one pixel
        present = set(int(v) for v in np.unique(arr))
        missing = sorted(set(range(1, n + 1)) - present)
        if missing:
            raise ValueError(f"label map skips labels {missing}; use from_labelmap()")
        object.__setattr__(self, "labels", _freeze(arr))
        object.__setattr__(self, "n_instances", n)

    @classmethod
    def from_labelmap(cls, labelmap: np.ndarray) -> "InstanceSet":
        """Build from any non-negative label map, one instance per distinct
        nonzero label (ascending label order)."""
        arr = np.asarray(labelmap)
        if arr.ndim != 2:
            raise ShapeMismatch(f"label map must be 2-D, got shape {arr.shape}")
        if arr.size and arr.min() < 0:
            raise ValueError("label map cannot hold negative labels")
        values = np.unique(arr)
        values = values[values != 0]
        canonical = np.zeros(arr.shape, dtype=np.int32)
        for i, v in enumerate(values):
            canonical[arr == v] = i + 1
        return cls(canonical)

    @classmethod
    def from_masks(cls, masks: Sequence, shape: tuple[int, int] | None = None) -> "InstanceSet":
        """Build from per-instance binary masks; masks must be pairwise
        disjoint and individually non-empty."""
        masks = [np.asarray(m.data if isinstance(m, BinaryMask) else m) for m in masks]
        if not masks:
            if shape is None:
                raise ShapeMismatch("empty instance list needs an explicit shape")
            return cls(np.zeros(shape, dtype=np.int32))
        h, w = masks[0].shape
        labels = np.zeros((h, w), dtype=np.int32)
        cover = np.zeros((h, w), dtype=bool)
        for i, m in enumerate(masks):
            if m.shape != (h, w):
                raise ShapeMismatch(f"instance {i} has shape {m.shape}, expected {(h, w)}")
            on = m != 0
            if not on.any():
                raise ValueError(f"instance {i} is empty")
            if (cover & on).any():
                raise ValueError(f"instance {i} overlaps an earlier instance")
            cover |= on
            labels[on] = i + 1
        return cls(labels)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def __len__(self) -> int:
        return self.n_instances

    def masks(self) -> list[np.ndarray]:
        """Boolean (H, W) mask per instance, in label order."""
        return [self.labels == i + 1 for i in range(self.n_instances)]

    def sizes(self) -> np.ndarray:
        counts = np.bincount(self.labels.ravel(), minlength=self.n_instances + 1)
        return counts[1:].astype(np.int64)

    def union_mask(self) -> BinaryMask:
        return BinaryMask((self.labels > 0).astype(np.uint8))


@dataclass(frozen=True)
class FeatureMap:
    """Per-pixel feature vectors, shape (H, W, D), finite values only."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or min(arr.shape) < 1:
            raise ShapeMismatch(f"feature map must be (H, W, D), got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise NonFiniteInput("feature map contains NaN or Inf")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class ClassifierWeights:
    """Linear head: (K, D) weights plus optional length-K bias, K >= 2."""

    weight: np.ndarray
    bias: np.ndarray | None = None

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] < 2 or w.shape[1] < 1:
            raise DimMismatch(f"weight must be (K>=2, D>=1), got shape {w.shape}")
        if not np.isfinite(w).all():
            raise NonFiniteInput("classifier weights contain NaN or Inf")
        b = self.bias
        if b is not None:
            b = np.asarray(b, dtype=np.float64)
            if b.shape != (w.shape[0],):
                raise DimMismatch(f"bias shape {b.shape} does not match K={w.shape[0]}")
            if not np.isfinite(b).all():
                raise NonFiniteInput("classifier bias contains NaN or Inf")
            b = _freeze(b)
        object.__setattr__(self, "weight", _freeze(w))
        object.__setattr__(self, "bias", b)

    @property
    def num_classes(self) -> int:
        return self.weight.shape[0]

    @property
    def dim(self) -> int:
        return self.weight.shape[1]


def require_same_shape(*rasters, what: str = "rasters") -> tuple[int, int]:
    """Raise ShapeMismatch unless all rasters share one (H, W) grid."""
    shapes = [(r.height, r.width) for r in rasters]
    first = shapes[0]
    for s in shapes[1:]:
        if s != first:
            raise ShapeMismatch(f"{what} disagree on grid size: {shapes}")
    return first
