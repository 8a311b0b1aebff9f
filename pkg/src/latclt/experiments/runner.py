"""Trial execution: per-trial records and the serial or process-pool map."""

import logging
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import TypeVar

from tqdm import tqdm

logger = logging.getLogger(__name__)

R = TypeVar("R")

# Trials handed to a worker per round trip.
DEFAULT_CHUNKSIZE = 16


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one trial at one size parameter.

    Attributes:
        trial: Trial index.
        T: Size parameter.
        raw_count: The integer count.
        normalized: Normalized discrepancy.
        reference_count: Unfiltered domain count of a spiraling trial.
        audited: Whether the count was re-verified by the direct counter.
    """

    trial: int
    T: float
    raw_count: int
    normalized: float
    reference_count: int | None = None
    audited: bool = False


def run_trials(
    trial: Callable[[int], R],
    M: int,
    workers: int = 1,
    progress: bool = False,
    desc: str = "Trials",
) -> list[R]:
    """Evaluate ``trial(i)`` for ``i = 0..M-1`` and return the results in index order.

    Each trial derives its randomness from its index alone, so the result
    does not depend on ``workers``.

    Args:
        trial: Picklable function of the trial index.
        M: Number of trials.
        workers: Worker processes; 1 runs in the current process.
        progress: Show a progress bar.
        desc: Progress bar label.

    Returns:
        One result per trial.
    """
    if M < 1:
        raise ValueError(f"Number of trials must be positive, got {M}")
    logger.info(f"Running {M} trials of {desc} on {workers} worker(s)")
    results: list[R] = []
    with tqdm(total=M, desc=desc, unit=" trial", disable=not progress) as progress_bar:
        if workers > 1:
            chunksize = max(1, min(DEFAULT_CHUNKSIZE, M // (4 * workers)))
            with ProcessPoolExecutor(max_workers=workers) as executor:
                for result in executor.map(trial, range(M), chunksize=chunksize):
                    results.append(result)
                    progress_bar.update(1)
        else:
            for index in range(M):
                results.append(trial(index))
                progress_bar.update(1)
    return results


def flatten(results: list[list[TrialRecord]]) -> list[TrialRecord]:
    """Records of all trials in (trial, T) order."""
    return [record for records in results for record in records]
