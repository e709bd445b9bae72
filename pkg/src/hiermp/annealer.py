"""Sequence-pair evaluation and the multi-start annealing driver.

`evaluate_sequence_pair` is the reference (pure Python) packing evaluator.
`anneal`/`multi_start` run either a duck-typed SaProblem (snapshot/restore/
perturb/cost) through a Python loop, or an array-packed problem through the
compiled kernels — same schedule semantics either way: temperature
calibrated so the mean uphill move from a 100-step random walk is accepted
with the target probability, then geometric cooling to t_min.
"""

from __future__ import annotations

import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable

from . import kernels
from .model import Rect


@dataclass
class SequencePair:
    pos_seq: list
    neg_seq: list

    def __post_init__(self) -> None:
        if sorted(map(repr, self.pos_seq)) != sorted(map(repr, self.neg_seq)):
            raise ValueError("sequence pair must be two permutations of one id set")


def evaluate_sequence_pair(
    sp: SequencePair, shapes: dict[Hashable, tuple[float, float]]
) -> tuple[dict[Hashable, Rect], tuple[float, float]]:
    """Pack blocks at their sequence-pair positions.

    x(b) maximizes x(a) + w(a) over blocks a before b in both sequences;
    y(b) does the same over (reversed pos_seq, neg_seq) with heights.
    """
    neg_index = {b: k for k, b in enumerate(sp.neg_seq)}
    x: dict[Hashable, float] = {}
    bw = 0.0
    for k, b in enumerate(sp.pos_seq):
        mb = neg_index[b]
        best = 0.0
        for a in sp.pos_seq[:k]:
            if neg_index[a] < mb:
                best = max(best, x[a] + shapes[a][0])
        x[b] = best
        bw = max(bw, best + shapes[b][0])
    y: dict[Hashable, float] = {}
    bh = 0.0
    for k in range(len(sp.pos_seq) - 1, -1, -1):
        b = sp.pos_seq[k]
        mb = neg_index[b]
        best = 0.0
        for a in sp.pos_seq[k + 1 :]:
            if neg_index[a] < mb:
                best = max(best, y[a] + shapes[a][1])
        y[b] = best
        bh = max(bh, best + shapes[b][1])
    rects = {
        b: Rect(x[b], y[b], x[b] + shapes[b][0], y[b] + shapes[b][1])
        for b in sp.pos_seq
    }
    return rects, (bw, bh)


@dataclass
class SaSchedule:
    moves_per_iter: int = 500
    num_iters: int = 200
    init_accept_prob: float = 0.9
    t_min: float = 1e-10
    num_workers: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.init_accept_prob < 1.0:
            raise ValueError("init_accept_prob must be in (0, 1)")
        if self.t_min <= 0.0:
            raise ValueError("t_min must be positive")

    def with_seed(self, seed: int) -> "SaSchedule":
        return SaSchedule(
            self.moves_per_iter,
            self.num_iters,
            self.init_accept_prob,
            self.t_min,
            self.num_workers,
            seed,
        )


@dataclass
class AnnealResult:
    best: Any
    best_cost: float
    initial_cost: float
    t_init: float
    accepted: int = 0
    worker: int = 0


CALIBRATION_STEPS = 100


def _anneal_python(problem, schedule: SaSchedule, seed: int, worker: int = 0) -> AnnealResult:
    rng = random.Random(seed)
    initial = problem.snapshot()
    costs = [problem.cost()]
    for _ in range(CALIBRATION_STEPS):
        problem.perturb(rng)
        costs.append(problem.cost())
    uphill = [b - a for a, b in zip(costs, costs[1:]) if b - a > 0.0]
    if uphill:
        t_init = (sum(uphill) / len(uphill)) / (-math.log(schedule.init_accept_prob))
    else:
        t_init = schedule.t_min
    problem.restore(initial)

    rng = random.Random(seed)
    cur = costs[0]
    best_cost = cur
    best = problem.snapshot()
    prev = problem.snapshot()
    temp = max(t_init, schedule.t_min)
    cool = 1.0
    if t_init > schedule.t_min and schedule.num_iters > 0:
        cool = (schedule.t_min / t_init) ** (1.0 / schedule.num_iters)
    accepted = 0
    for _ in range(schedule.num_iters):
        for _ in range(schedule.moves_per_iter):
            problem.perturb(rng)
            cand = problem.cost()
            delta = cand - cur
            if delta <= 0.0 or rng.random() < math.exp(-delta / temp):
                cur = cand
                accepted += 1
                prev = problem.snapshot()
                if cand < best_cost:
                    best_cost = cand
                    best = problem.snapshot()
            else:
                problem.restore(prev)
        temp = max(temp * cool, schedule.t_min)
    problem.restore(best)
    return AnnealResult(
        best=best,
        best_cost=best_cost,
        initial_cost=costs[0],
        t_init=t_init,
        accepted=accepted,
        worker=worker,
    )


def _run_packed_workers(
    problem: kernels.PackedProblem, schedule: SaSchedule, num_workers: int
) -> list[kernels.KernelResult]:
    norms, samples = problem.calibrate(schedule.seed, CALIBRATION_STEPS)
    t_init = kernels.derive_t_init(
        samples, problem.weights, norms, schedule.init_accept_prob, schedule.t_min
    )

    def one(i: int) -> kernels.KernelResult:
        return kernels.run_packed(
            problem,
            norms,
            t_init,
            schedule.num_iters,
            schedule.moves_per_iter,
            schedule.t_min,
            schedule.seed + i,
            worker=i,
        )

    if num_workers == 1:
        return [one(0)]
    pool_size = min(num_workers, os.cpu_count() or 1)
    if pool_size <= 1:
        return [one(i) for i in range(num_workers)]
    with ThreadPoolExecutor(max_workers=pool_size) as pool:
        return list(pool.map(one, range(num_workers)))


def anneal(problem, schedule: SaSchedule):
    """Single annealing run; dispatches on the problem representation."""
    if isinstance(problem, kernels.PackedProblem):
        return _run_packed_workers(problem, schedule, 1)[0]
    return _anneal_python(problem, schedule, schedule.seed)


def multi_start(problem_or_factory, schedule: SaSchedule, num_workers: int | None = None):
    """Best result over independently seeded workers (seed + index).

    Accepts a packed problem, a duck-typed problem, or a zero-argument
    factory producing fresh duck-typed problems per worker.
    """
    workers = schedule.num_workers if num_workers is None else num_workers
    if workers < 1:
        raise ValueError("num_workers must be >= 1")
    results = multi_start_all(problem_or_factory, schedule, workers)
    return min(results, key=lambda r: (r.best_cost, r.worker))


def multi_start_all(problem_or_factory, schedule: SaSchedule, num_workers: int):
    if isinstance(problem_or_factory, kernels.PackedProblem):
        return _run_packed_workers(problem_or_factory, schedule, num_workers)
    factory: Callable
    if callable(problem_or_factory):
        factory = problem_or_factory
    else:
        base = problem_or_factory
        initial = base.snapshot()

        def factory() -> Any:
            # every worker starts from the same initial state
            base.restore(initial)
            return base

    out = []
    for i in range(num_workers):
        prob = factory()
        out.append(_anneal_python(prob, schedule, schedule.seed + i, worker=i))
    return out
