"""Multi-resource vectors: arithmetic, shares and dominant-resource lookup.

A cluster scenario fixes the resource-type count k once; every vector in
that scenario must have length k. Quantities are real-valued so core
counts and megabyte amounts share one representation.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence


class DimensionMismatchError(ValueError):
    """Two vectors of different lengths were combined."""


class InsufficientCapacityError(ValueError):
    """Subtraction would drive some component negative."""


class DegenerateClusterError(ValueError):
    """Cluster capacity has a zero component; shares are undefined."""


class ResourceVector:
    """Immutable fixed-length vector of non-negative resource amounts."""

    __slots__ = ("quantities",)

    def __init__(self, quantities: Iterable[float]) -> None:
        qs = tuple(float(q) for q in quantities)
        if not qs:
            raise ValueError("a resource vector needs at least one component")
        for q in qs:
            if q < 0:
                raise ValueError(f"negative resource amount in {qs}")
        object.__setattr__(self, "quantities", qs)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("ResourceVector is immutable")

    def __len__(self) -> int:
        return len(self.quantities)

    def __iter__(self) -> Iterator[float]:
        return iter(self.quantities)

    def __getitem__(self, index: int) -> float:
        return self.quantities[index]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ResourceVector):
            return NotImplemented
        return self.quantities == other.quantities

    def __hash__(self) -> int:
        return hash(self.quantities)

    def __repr__(self) -> str:
        return f"ResourceVector({list(self.quantities)!r})"

    def __reduce__(self):
        return (ResourceVector, (self.quantities,))

    def _check_len(self, other: "ResourceVector") -> None:
        if len(self) != len(other):
            raise DimensionMismatchError(
                f"length mismatch: {len(self)} vs {len(other)}"
            )

    @classmethod
    def zeros(cls, k: int) -> "ResourceVector":
        return cls([0.0] * k)


class ResourceWeights:
    """Per-resource positive weights; all ones unless configured."""

    __slots__ = ("weights",)

    def __init__(self, weights: Iterable[float]) -> None:
        ws = tuple(float(w) for w in weights)
        if not ws:
            raise ValueError("weights need at least one component")
        for w in ws:
            if w <= 0:
                raise ValueError(f"weights must be positive, got {ws}")
        object.__setattr__(self, "weights", ws)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("ResourceWeights is immutable")

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, index: int) -> float:
        return self.weights[index]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ResourceWeights):
            return NotImplemented
        return self.weights == other.weights

    def __repr__(self) -> str:
        return f"ResourceWeights({list(self.weights)!r})"

    def __reduce__(self):
        return (ResourceWeights, (self.weights,))

    @classmethod
    def ones(cls, k: int) -> "ResourceWeights":
        return cls([1.0] * k)


def add(a: ResourceVector, b: ResourceVector) -> ResourceVector:
    """Component-wise sum."""
    a._check_len(b)
    return ResourceVector(x + y for x, y in zip(a, b))


def checked_sub(a: ResourceVector, b: ResourceVector) -> ResourceVector:
    """Component-wise a - b; rejects any negative residual."""
    a._check_len(b)
    out = []
    for x, y in zip(a, b):
        if y > x:
            raise InsufficientCapacityError(
                f"cannot subtract {b.quantities} from {a.quantities}"
            )
        out.append(x - y)
    return ResourceVector(out)


def fits_within(req: ResourceVector, cap: ResourceVector) -> bool:
    """True iff req <= cap in every component."""
    req._check_len(cap)
    return all(r <= c for r, c in zip(req, cap))


def shares(usage: ResourceVector, cluster: ResourceVector) -> tuple[float, ...]:
    """Per-resource fraction of cluster capacity held by `usage`."""
    usage._check_len(cluster)
    for c in cluster:
        if c == 0:
            raise DegenerateClusterError(
                f"cluster capacity has a zero component: {cluster.quantities}"
            )
    return tuple(u / c for u, c in zip(usage, cluster))


def dominant(
    share_values: Sequence[float], weights: ResourceWeights
) -> tuple[int, float]:
    """Index and value of the largest weight-adjusted share.

    The value returned is share/weight at the winning index; ties break
    to the lowest index.
    """
    if not share_values:
        raise ValueError("shares must be non-empty")
    if len(share_values) != len(weights):
        raise DimensionMismatchError(
            f"length mismatch: {len(share_values)} vs {len(weights)}"
        )
    best_index = 0
    best_ratio = share_values[0] / weights[0]
    for q in range(1, len(share_values)):
        ratio = share_values[q] / weights[q]
        if ratio > best_ratio:
            best_index, best_ratio = q, ratio
    return best_index, best_ratio
