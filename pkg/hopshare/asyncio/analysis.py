"""
Concurrent Monte Carlo.

Trial index ranges are sliced into batches and each batch runs in a worker thread; batch
tallies fold commutatively, so the result equals :func:`hopshare.analysis.monte_carlo` for the
same seed.
"""
import logging
from typing import List, Optional

import anyio
import anyio.to_thread
from more_itertools import sliced

from hopshare.analysis import CaptureScenario, CaptureStats, CaptureTally, fold, run_trials, stats_from_tally
from hopshare.exceptions import AnalysisError
from hopshare.settings import get_settings_value

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())


async def monte_carlo(
    scenario: CaptureScenario,
    trials: int,
    seed: int,
    chunk_size: Optional[int] = None,
    max_workers: Optional[int] = None,
) -> CaptureStats:
    if trials < 1:
        raise AnalysisError("trials must be at least 1")
    chunk_size = chunk_size or get_settings_value('mc_chunk_size')
    limiter = anyio.CapacityLimiter(max_workers or get_settings_value('mc_max_workers'))
    tallies: List[CaptureTally] = []

    async def _run(indices: range) -> None:
        tally = await anyio.to_thread.run_sync(run_trials, scenario, seed, indices, limiter=limiter)
        tallies.append(tally)
        log.debug("Batch %d..%d done", indices.start, indices.stop)

    async with anyio.create_task_group() as tg:
        for indices in sliced(range(trials), chunk_size):
            tg.start_soon(_run, indices)

    return stats_from_tally(scenario, fold(tallies))
