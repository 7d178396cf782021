"""Finite metric spaces, subsets and sampled functions.

Every subset of a finite metric space is clopen, so the Borel/Baire class of a
set is carried only as a :class:`ClassLabel` tag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

METRICS = ("euclidean", "manhattan", "chebyshev")
CLASS_KINDS = ("ambiguous", "multiplicative", "additive")


class ValidationError(ValueError):
    """Raised when an input object breaks its structural invariants."""


def to_exact(value) -> Fraction:
    """Convert an int, float, decimal string or ``"p/q"`` string to a Fraction.

    Floats go through ``repr`` so that ``0.1`` becomes ``1/10`` rather than the
    binary expansion.
    """
    if isinstance(value, bool):
        raise ValidationError(f"boolean is not a number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValidationError(f"non-finite number: {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse number {value!r}") from exc
    raise ValidationError(f"unsupported number type {type(value).__name__}")


@dataclass(frozen=True)
class ClassLabel:
    alpha: int = 1
    kind: str = "ambiguous"

    def __post_init__(self):
        if isinstance(self.alpha, bool) or not isinstance(self.alpha, int) or self.alpha < 0:
            raise ValidationError(f"alpha must be a non-negative integer, got {self.alpha!r}")
        if self.kind not in CLASS_KINDS:
            raise ValidationError(f"unknown class kind {self.kind!r}")


@dataclass(frozen=True)
class SubsetMask:
    members: frozenset
    space_size: int

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        bad = sorted(i for i in self.members if not (isinstance(i, int) and 0 <= i < self.space_size))
        if bad:
            raise ValidationError(f"ids {bad} out of range for a space of size {self.space_size}")

    def __contains__(self, x) -> bool:
        return x in self.members

    def __iter__(self):
        return iter(sorted(self.members))

    def __len__(self) -> int:
        return len(self.members)

    def sorted_ids(self) -> list[int]:
        return sorted(self.members)


@dataclass(frozen=True)
class SampledFunction:
    """A real function known on the points of ``domain``."""

    domain: SubsetMask
    values: Mapping[int, object]

    def __post_init__(self):
        if len(self.domain) == 0:
            raise ValidationError("function domain is empty")
        keys = set(self.values)
        missing = sorted(self.domain.members - keys)
        extra = sorted(keys - self.domain.members, key=repr)
        if missing:
            raise ValidationError(f"no value given for domain ids {missing}")
        if extra:
            raise ValidationError(f"values given off the domain at ids {extra}")
        for i, v in self.values.items():
            if isinstance(v, float) and not math.isfinite(v):
                raise ValidationError(f"value at id {i} is not finite")
        object.__setattr__(self, "values", dict(sorted(self.values.items())))

    def __getitem__(self, x):
        return self.values[x]

    def scaled(self, factor) -> "SampledFunction":
        return SampledFunction(self.domain, {a: v * factor for a, v in self.values.items()})


@dataclass(frozen=True)
class AmbientSpace:
    """Finite metric space on the dense ids ``0..size-1``.

    Exactly one of ``coords`` (with ``metric``) or ``matrix`` is set. Coordinates
    and matrix entries are stored as Fractions; ``_keys`` holds an exact
    order-preserving transform of the distance (squared for euclidean) used
    for comparisons.
    """

    coords: tuple | None = None
    metric: str | None = None
    matrix: tuple | None = None
    _keys: tuple = field(default=(), repr=False, compare=False)

    @property
    def size(self) -> int:
        return len(self._keys)

    @property
    def points(self) -> range:
        return range(self.size)

    @property
    def dimension(self) -> int | None:
        return None if self.coords is None else len(self.coords[0])

    def full(self) -> SubsetMask:
        return SubsetMask(frozenset(self.points), self.size)

    def empty(self) -> SubsetMask:
        return SubsetMask(frozenset(), self.size)

    def subset(self, ids: Iterable[int]) -> SubsetMask:
        return SubsetMask(frozenset(ids), self.size)

    def check_id(self, x) -> None:
        if not (isinstance(x, int) and 0 <= x < self.size):
            raise ValidationError(f"point id {x!r} out of range 0..{self.size - 1}")

    def distance_key(self, x: int, y: int) -> Fraction:
        return self._keys[x][y]

    def distance(self, x: int, y: int) -> float:
        key = self._keys[x][y]
        if self.metric == "euclidean":
            return math.sqrt(key)
        return float(key)

    @cached_property
    def neighbour_shells(self) -> tuple:
        """For every x, the other points grouped by equal distance, nearest first."""
        shells = []
        for x in self.points:
            row = self._keys[x]
            groups: dict = {}
            for y in self.points:
                groups.setdefault(row[y], []).append(y)
            shells.append(tuple(frozenset(groups[k]) for k in sorted(groups)))
        return tuple(shells)


def _coord_key(metric: str, p: Sequence[Fraction], q: Sequence[Fraction]) -> Fraction:
    diffs = [abs(a - b) for a, b in zip(p, q)]
    if metric == "euclidean":
        return sum((d * d for d in diffs), Fraction(0))
    if metric == "manhattan":
        return sum(diffs, Fraction(0))
    return max(diffs, default=Fraction(0))


def build_space(coords=None, metric: str = "euclidean", matrix=None) -> AmbientSpace:
    """Validate a geometry and return the corresponding :class:`AmbientSpace`.

    ``coords`` is a list of points, each a number (1-D) or a list of numbers;
    ``matrix`` is a full symmetric distance matrix. The triangle inequality is
    not checked for matrices.
    """
    if (coords is None) == (matrix is None):
        raise ValidationError("give exactly one of coordinates or a distance matrix")

    if coords is not None:
        if metric not in METRICS:
            raise ValidationError(f"unknown metric {metric!r}; expected one of {METRICS}")
        rows = [list(p) if isinstance(p, (list, tuple)) else [p] for p in coords]
        if not rows:
            raise ValidationError("point list is empty")
        dim = len(rows[0])
        if dim == 0:
            raise ValidationError("points must have at least one coordinate")
        for i, r in enumerate(rows):
            if len(r) != dim:
                raise ValidationError(f"point {i} has {len(r)} coordinates, expected {dim}")
        pts = tuple(tuple(to_exact(v) for v in r) for r in rows)
        seen: dict = {}
        for i, p in enumerate(pts):
            if p in seen:
                raise ValidationError(f"duplicate points: ids {seen[p]} and {i} share coordinates")
            seen[p] = i
        keys = tuple(tuple(_coord_key(metric, p, q) for q in pts) for p in pts)
        return AmbientSpace(coords=pts, metric=metric, _keys=keys)

    rows = [list(r) for r in matrix]
    n = len(rows)
    if n == 0:
        raise ValidationError("distance matrix is empty")
    for i, r in enumerate(rows):
        if len(r) != n:
            raise ValidationError(f"distance matrix row {i} has length {len(r)}, expected {n}")
    m = tuple(tuple(to_exact(v) for v in r) for r in rows)
    for i in range(n):
        if m[i][i] != 0:
            raise ValidationError(f"nonzero diagonal entry at ({i},{i})")
        for j in range(n):
            if m[i][j] < 0:
                raise ValidationError(f"negative distance at ({i},{j})")
            if m[i][j] != m[j][i]:
                raise ValidationError(f"asymmetric matrix: d({i},{j}) != d({j},{i})")
            if i != j and m[i][j] == 0:
                raise ValidationError(f"duplicate points: zero distance at ({i},{j})")
    return AmbientSpace(matrix=m, _keys=m)


def dist_to_set(space: AmbientSpace, x: int, S: SubsetMask) -> float:
    """Distance from ``x`` to ``S``; ``math.inf`` for an empty set."""
    space.check_id(x)
    if not S.members:
        return math.inf
    return space.distance(x, min(S.members, key=lambda s: space.distance_key(x, s)))


def sup_norm(f: SampledFunction):
    return max(abs(v) for v in f.values.values())
