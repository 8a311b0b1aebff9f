"""Set partitions and joint cumulants.

The joint cumulant of ``X_1, ..., X_r`` is the partition sum

    cum(X_1, ..., X_r) = sum over partitions P of {1..r} of
                         (-1)^{|P|-1} (|P|-1)! prod_{I in P} E[prod_{i in I} X_i]

It vanishes whenever the variables split into two mutually independent
groups, and for r >= 3 on jointly Gaussian variables.
"""

import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
import numpy.typing as npt

MAX_PARTITION_ORDER = 12
MAX_EMPIRICAL_ORDER = 6


class PartitionLimitError(ValueError):
    """Raised when enumerating partitions of a set that is too large."""

    pass


class EmptySampleError(ValueError):
    """Raised when a statistic needs more samples than were given."""

    pass


@dataclass(frozen=True)
class SetPartition:
    """A partition of ``{1, ..., r}``, blocks sorted by their smallest element."""

    blocks: tuple[frozenset[int], ...]

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def order(self) -> int:
        return sum(len(block) for block in self.blocks)


def _restricted_growth_strings(r: int) -> Iterable[list[int]]:
    """Yield restricted growth strings of length r in lexicographic order."""
    labels = [0] * r
    maxima = [0] * r
    while True:
        yield list(labels)
        i = r - 1
        while i > 0 and labels[i] == maxima[i - 1] + 1:
            i -= 1
        if i == 0:
            return
        labels[i] += 1
        maxima[i] = max(maxima[i - 1], labels[i])
        for j in range(i + 1, r):
            labels[j] = 0
            maxima[j] = maxima[i]


@lru_cache(maxsize=MAX_PARTITION_ORDER)
def _partitions(r: int) -> tuple[SetPartition, ...]:
    result = []
    for labels in _restricted_growth_strings(r):
        groups: dict[int, set[int]] = {}
        for element, label in enumerate(labels, start=1):
            groups.setdefault(label, set()).add(element)
        result.append(SetPartition(tuple(frozenset(groups[k]) for k in sorted(groups))))
    return tuple(result)


def set_partitions(r: int) -> list[SetPartition]:
    """All partitions of ``{1, ..., r}``, each once, in canonical order.

    Args:
        r: Set size, 1 <= r <= 12.

    Returns:
        The Bell number B_r of partitions.

    Raises:
        PartitionLimitError: If r exceeds 12.
        ValueError: If r < 1.
    """
    if r < 1:
        raise ValueError(f"Partition order must be at least 1, got {r}")
    if r > MAX_PARTITION_ORDER:
        raise PartitionLimitError(f"Partition order {r} exceeds {MAX_PARTITION_ORDER}")
    return list(_partitions(r))


def bell_number(r: int) -> int:
    """Bell number via the Bell triangle."""
    row = [1]
    for _ in range(r - 1):
        next_row = [row[-1]]
        for value in row:
            next_row.append(next_row[-1] + value)
        row = next_row
    return row[-1]


@dataclass(frozen=True)
class MomentTable:
    """Joint moments ``E[prod_{i in I} X_i]`` for every nonempty ``I`` of ``{1..r}``.

    Attributes:
        r: Number of variables.
        values: Moment per subset.
    """

    r: int
    values: Mapping[frozenset[int], float]

    def __post_init__(self) -> None:
        if self.r < 1:
            raise ValueError(f"Moment table order must be at least 1, got {self.r}")
        for subset in _subsets(self.r):
            if subset not in self.values:
                raise ValueError(f"Moment table is missing subset {sorted(subset)}")
            if not math.isfinite(self.values[subset]):
                raise ValueError(f"Moment for subset {sorted(subset)} is not finite")

    def __getitem__(self, subset: Iterable[int]) -> float:
        return self.values[frozenset(subset)]

    @classmethod
    def from_function(cls, r: int, moment: Callable[[frozenset[int]], float]) -> "MomentTable":
        """Build a table by evaluating ``moment`` on every nonempty subset."""
        return cls(r, {subset: float(moment(subset)) for subset in _subsets(r)})

    @classmethod
    def from_samples(cls, columns: npt.ArrayLike) -> "MomentTable":
        """Plug-in joint moments of sampled variables.

        Args:
            columns: Array of shape (M, r), one variable per column.
        """
        data = np.asarray(columns, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] == 0:
            raise EmptySampleError(f"Expected a nonempty (M, r) array, got shape {data.shape}")
        return cls.from_function(
            data.shape[1],
            lambda subset: float(np.mean(np.prod(data[:, [i - 1 for i in sorted(subset)]], axis=1))),
        )


def _subsets(r: int) -> list[frozenset[int]]:
    elements = range(1, r + 1)
    return [frozenset(c) for size in range(1, r + 1) for c in combinations(elements, size)]


def joint_cumulant(table: MomentTable) -> float:
    """Partition-sum joint cumulant of the variables behind ``table``."""
    terms = []
    for partition in set_partitions(table.r):
        size = len(partition)
        coefficient = (-1) ** (size - 1) * math.factorial(size - 1)
        terms.append(coefficient * math.prod(table.values[block] for block in partition.blocks))
    return math.fsum(terms)


def empirical_cumulant(samples: Sequence[float] | npt.ArrayLike, r: int) -> float:
    """Order-r cumulant of a sample from its plug-in moments.

    Samples are centered before the moments are taken when r >= 2; the cumulant
    is shift invariant there.

    Args:
        samples: At least two values.
        r: Order, 1 <= r <= 6.

    Raises:
        EmptySampleError: If fewer than two samples are given.
    """
    values = np.asarray(samples, dtype=np.float64).reshape(-1)
    if values.size < 2:
        raise EmptySampleError(f"Need at least 2 samples, got {values.size}")
    if not 1 <= r <= MAX_EMPIRICAL_ORDER:
        raise ValueError(f"Cumulant order must lie in [1, {MAX_EMPIRICAL_ORDER}], got {r}")
    if r == 1:
        return float(np.mean(values))
    centered = values - np.mean(values)
    raw = [float(np.mean(centered**j)) for j in range(r + 1)]
    return joint_cumulant(MomentTable.from_function(r, lambda subset: raw[len(subset)]))
