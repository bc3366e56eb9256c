"""Deterministic fan-out of trial-index ranges over worker processes."""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence, TypeVar

from core.errors import DomainError
from data.models import UINT64_MAX, EstimatorConfig, PassageResult, PathSpec, StreamRole, TrialOutcome, WalkParams
from engine.paths import first_passage, sample_trial
from engine.streams import make_stream
from utils.progress import DONE, ERROR, progress

T = TypeVar("T")

# Chunks per worker; more chunks smooth out uneven passage times
_CHUNKS_PER_WORKER = 8


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        return os.cpu_count() or 1
    return max(int(threads), 1)


def check_seed(master_seed: int) -> None:
    """Reject seeds outside uint64 before any work is handed to a worker."""
    if isinstance(master_seed, bool) or not isinstance(master_seed, int) or not 0 <= master_seed <= UINT64_MAX:
        raise DomainError(f"master_seed must be an integer in [0, 2^64 - 1], got {master_seed!r}")


def chunk_ranges(n_items: int, threads: int) -> list[tuple[int, int]]:
    """Contiguous [start, stop) ranges covering 0..n_items-1, in order."""
    if n_items <= 0:
        return []
    size = max(1, math.ceil(n_items / (threads * _CHUNKS_PER_WORKER)))
    return [(start, min(start + size, n_items)) for start in range(0, n_items, size)]


def map_chunks(worker: Callable[..., list[T]], jobs: Sequence[tuple], threads: int | None = None, task_name: str = "simulation", tag: str | None = None) -> list[T]:
    """
    Run worker(*job) for every job and concatenate the results in job order.

    With one thread the jobs run inline; otherwise they go to a process
    pool. Results never depend on the thread count because every job is a
    pure function of its arguments.
    """
    threads = resolve_threads(threads)
    total = len(jobs)
    results: list[list[T]] = []

    progress.begin(task_name, tag, total)
    try:
        if threads == 1 or total <= 1:
            for i, job in enumerate(jobs):
                results.append(worker(*job))
                progress.advance(task_name, i + 1)
        else:
            with ProcessPoolExecutor(max_workers=threads) as executor:
                futures = [executor.submit(worker, *job) for job in jobs]
                # Collect in submission order so the reduction stays deterministic
                for i, future in enumerate(futures):
                    results.append(future.result())
                    progress.advance(task_name, i + 1)
    except Exception:
        progress.update_status(task_name, status=ERROR)
        raise

    progress.update_status(task_name, status=DONE)
    return [item for block in results for item in block]


##### Chunk workers (top level so they pickle) #####
def trial_chunk(params: WalkParams, est: EstimatorConfig, master_seed: int, start: int, stop: int) -> list[TrialOutcome]:
    return [sample_trial(params, est, master_seed, i) for i in range(start, stop)]


def passage_chunk(spec: PathSpec, master_seed: int, start: int, stop: int, horizon: int | None, dt: float | None, bridge: bool = True) -> list[PassageResult]:
    return [first_passage(spec, make_stream(master_seed, i, StreamRole.V), horizon=horizon, dt=dt, bridge=bridge) for i in range(start, stop)]


def run_trials(params: WalkParams, est: EstimatorConfig, n_trials: int, master_seed: int, threads: int | None = None, task_name: str = "run_experiment") -> list[TrialOutcome]:
    """Outcomes of trials 0..n_trials-1, in trial-index order."""
    check_seed(master_seed)
    jobs = [(params, est, master_seed, start, stop) for start, stop in chunk_ranges(n_trials, resolve_threads(threads))]
    tag = f"l={params.l:g} s={params.s:g} eps={params.eps:g} c={est.c:.4g}"
    return map_chunks(trial_chunk, jobs, threads, task_name, tag)


def run_passages(spec: PathSpec, n_trials: int, master_seed: int, horizon: int | None = None, dt: float | None = None, threads: int | None = None, task_name: str = "first_passage", bridge: bool = True) -> list[PassageResult]:
    check_seed(master_seed)
    jobs = [(spec, master_seed, start, stop, horizon, dt, bridge) for start, stop in chunk_ranges(n_trials, resolve_threads(threads))]
    tag = f"l={spec.level:g} s={spec.step_mean:g} sigma={spec.step_std:g}"
    return map_chunks(passage_chunk, jobs, threads, task_name, tag)
