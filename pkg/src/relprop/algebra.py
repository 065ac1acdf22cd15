"""Arithmetic of reliabilities.

A scalar reliability is a float in [-1, 1]: 1 is maximal reliability,
-1 maximal uncertainty.  A dimensioned reliability maps dimension names to
such scalars; the scalar case is the single dimension ``"default"``.

Every function here is pure and every output is clamped back into range.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Mapping
from typing import Union

from .errors import EmptyDimensions, EmptyInput, InvalidNumeric, InvalidParameter, InvalidWeights

TOL = 1e-9
DEFAULT_DIM = "default"


_INF = math.inf


def clamp(x: float) -> float:
    """Clamp a finite real into [-1, 1]."""
    try:
        finite = -_INF < x < _INF  # false for nan
    except TypeError:
        finite = False
    if not finite or isinstance(x, bool):
        raise InvalidNumeric(f"not a finite real: {x!r}")
    if x > 1.0:
        return 1.0
    if x < -1.0:
        return -1.0
    return float(x)


class Reliability(Mapping):
    """Immutable map from dimension name to a clamped scalar.

    Entries are kept sorted by dimension name so iteration order (and
    therefore any printed output) is deterministic.
    """

    __slots__ = ("_entries", "_hash")

    def __init__(self, entries: Union[Mapping, Iterable, None] = None):
        if isinstance(entries, Reliability):
            self._entries = entries._entries
            self._hash = entries._hash
            return
        items = dict(entries or {})
        for name in items:
            if not isinstance(name, str) or not name:
                raise InvalidParameter(f"bad dimension name {name!r}")
        self._entries = {name: clamp(items[name]) for name in sorted(items)}
        self._hash = None

    @classmethod
    def _trusted(cls, entries: dict) -> "Reliability":
        # entries already clamped, names valid and sorted
        self = cls.__new__(cls)
        self._entries = entries
        self._hash = None
        return self

    @classmethod
    def scalar(cls, value: float, dimension: str = DEFAULT_DIM) -> "Reliability":
        return cls({dimension: value})

    def __getitem__(self, name):
        return self._entries[name]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._entries.items()))
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{k}: {v:g}" for k, v in self._entries.items())
        return f"Reliability({{{body}}})"

    def av(self) -> float:
        return average(self)

    def get_or(self, name: str, default: float) -> float:
        return self._entries.get(name, default)


def and_combine(r1: float, r2: float, alpha: float = 1.0) -> float:
    """AND of two reliabilities: ``alpha * min(r1, r2)``."""
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParameter(f"alpha must lie in [0, 1], got {alpha!r}")
    return clamp(alpha * min(r1, r2))


def or_combine(r1: float, r2: float) -> float:
    # Lower bound only; confirmation above max happens in reconciliation.
    return clamp(max(r1, r2))


def weighted_mean(pairs: list[tuple[float, float]]) -> float:
    """Weighted mean of ``(weight, value)`` pairs; weights must sum to 1."""
    if not pairs:
        raise EmptyInput("weighted_mean needs at least one pair")
    total = 0.0
    acc = 0.0
    for weight, value in pairs:
        if not math.isfinite(weight) or weight < 0:
            raise InvalidWeights(f"negative or non-finite weight {weight!r}")
        total += weight
        acc += weight * value
    if abs(total - 1.0) > TOL:
        raise InvalidWeights(f"weights sum to {total!r}, not 1")
    return clamp(acc)


def average(rho: Mapping) -> float:
    """Arithmetic mean over all dimensions of ``rho``."""
    if len(rho) == 0:
        raise EmptyDimensions("average of an empty reliability is undefined")
    return clamp(math.fsum(rho.values()) / len(rho))


def dominance_weights(rho: Mapping, rho2: Mapping) -> tuple[float, float]:
    """Weights for a two-way mean that favour the more reliable side.

    Returns ``(weight of rho, weight of rho2)``.  The larger of the two is
    ``d = 1/2 + 1/4 * |av(rho) - av(rho2)|``, which lies in [0.5, 1].
    """
    a1 = average(rho)
    a2 = average(rho2)
    if a1 >= a2:
        d = 0.5 + 0.25 * (a1 - a2)
        return d, 1.0 - d
    d = 0.5 + 0.25 * (a2 - a1)
    return 1.0 - d, d


def align_dimensions(rho: Mapping, rho2: Mapping, default: float = 0.0) -> tuple[Reliability, Reliability]:
    """Extend both reliabilities to the union of their dimensions."""
    if isinstance(rho, Reliability) and isinstance(rho2, Reliability) and rho._entries.keys() == rho2._entries.keys():
        return rho, rho2
    default = clamp(default)
    names = set(rho) | set(rho2)
    left = Reliability({n: rho[n] if n in rho else default for n in names})
    right = Reliability({n: rho2[n] if n in rho2 else default for n in names})
    return left, right


def align_all(parts: Iterable[Mapping], default: float = 0.0) -> list[Reliability]:
    """``align_dimensions`` generalised to any number of reliabilities."""
    parts = list(parts)
    if parts and all(isinstance(p, Reliability) for p in parts):
        first = parts[0]._entries.keys()
        if all(p._entries.keys() == first for p in parts):
            return parts
    default = clamp(default)
    names = set()
    for p in parts:
        names.update(p)
    return [Reliability({n: p[n] if n in p else default for n in names}) for p in parts]


def lift_elementwise(
    op: Callable[[float, float], float],
    rho: Mapping,
    rho2: Mapping,
    default: float = 0.0,
) -> Reliability:
    """Apply a binary scalar operation dimension by dimension."""
    left, right = align_dimensions(rho, rho2, default)
    return Reliability({n: op(left[n], right[n]) for n in left})
