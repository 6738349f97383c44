"""Noise-sweep experiments over cases, pre-filters and step estimators.

Every trial is keyed by a deterministic seed derived from the plan's base
seed and the trial coordinates, so the same noise realization is shared by
all estimator/pre-filter combinations of a case. Estimator errors and
arcsin arguments outside [-1, 1] ("no real solution") are recorded as
failed trials rather than raised.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats

from .field import median, percentile
from .gs import Aggregator, Estimator, estimate_step
from .prefilter import Prefilter, prefilter_pair
from .synth import (
    DEFAULT_FRINGE_SCALE,
    DEFAULT_SIZE,
    Case,
    SynthSpec,
    synthesize,
)

DEFAULT_SIGMAS = tuple(i / 9 for i in range(10))
DEFAULT_TRIALS = 50
DEFAULT_DELTA = math.pi / 3
DEFAULT_BASE_SEED = 20210
_MASK64 = 2**64 - 1

_CASE_ORDER = {c: n for n, c in enumerate(Case)}
_PREFILTER_ORDER = {p: n for n, p in enumerate(Prefilter)}
_ESTIMATOR_ORDER = {e: n for n, e in enumerate(Estimator)}


@dataclass(frozen=True, order=False)
class Combo:
    case: Case
    prefilter: Prefilter
    estimator: Estimator

    def __post_init__(self):
        object.__setattr__(self, "case", Case(self.case))
        object.__setattr__(self, "prefilter", Prefilter(self.prefilter))
        object.__setattr__(self, "estimator", Estimator(self.estimator))
        if (self.case is Case.III and self.estimator is Estimator.SIN
                and self.prefilter is Prefilter.NONE):
            raise ValueError("Case III with the sin estimator requires a pre-filter")

    def sort_key(self):
        return (_CASE_ORDER[self.case], _PREFILTER_ORDER[self.prefilter],
                _ESTIMATOR_ORDER[self.estimator])

    def __str__(self):
        return f"{self.case.value}/{self.prefilter.value}/{self.estimator.value}"


DEFAULT_COMBOS = (
    Combo(Case.I, Prefilter.NONE, Estimator.TAN),
    Combo(Case.I, Prefilter.NONE, Estimator.SIN),
    Combo(Case.II, Prefilter.NONE, Estimator.TAN),
    Combo(Case.II, Prefilter.NONE, Estimator.SIN),
    Combo(Case.III, Prefilter.ISOTROPIC, Estimator.SIN),
    Combo(Case.III, Prefilter.GFB, Estimator.SIN),
)


@dataclass(frozen=True)
class ExperimentPlan:
    combos: tuple = DEFAULT_COMBOS
    sigmas: tuple = DEFAULT_SIGMAS
    trials: int = DEFAULT_TRIALS
    delta_true: float = DEFAULT_DELTA
    base_seed: int = DEFAULT_BASE_SEED
    width: int = DEFAULT_SIZE
    height: int = DEFAULT_SIZE
    fringe_scale: float = DEFAULT_FRINGE_SCALE
    aggregator: Aggregator = Aggregator.MEDIAN

    def __post_init__(self):
        object.__setattr__(self, "combos", tuple(Combo(*c) if not isinstance(c, Combo) else c
                                                 for c in self.combos))
        object.__setattr__(self, "sigmas", tuple(float(s) for s in self.sigmas))
        object.__setattr__(self, "aggregator", Aggregator(self.aggregator))
        if not self.combos:
            raise ValueError("plan has no estimator/pre-filter combinations")
        if len(set(self.combos)) != len(self.combos):
            raise ValueError("plan lists a combination twice")
        if not self.sigmas:
            raise ValueError("plan has no noise levels")
        if any(s < 0 for s in self.sigmas) or list(self.sigmas) != sorted(set(self.sigmas)):
            raise ValueError("sigmas must be non-negative, distinct and ascending")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 < self.delta_true < math.pi:
            raise ValueError("delta_true must lie in (0, pi)")

    @property
    def cases(self) -> list[Case]:
        return sorted({c.case for c in self.combos}, key=_CASE_ORDER.get)

    def size(self) -> int:
        return len(self.combos) * len(self.sigmas) * self.trials


@dataclass(frozen=True)
class ExperimentRecord:
    case: Case
    prefilter: Prefilter
    estimator: Estimator
    sigma: float
    trial: int
    delta_true: float
    delta_hat: Optional[float]
    abs_err: Optional[float]
    status: str
    kappa_ratio: float
    mask_fraction: float
    seed: int

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def combo(self) -> Combo:
        return Combo(self.case, self.prefilter, self.estimator)

    def sort_key(self):
        return (*self.combo.sort_key(), self.sigma, self.trial)


def trial_seed(base_seed: int, case: Case | str, sigma_index: int, trial: int) -> int:
    """``base_seed`` XOR a stable 64-bit hash of the trial coordinates."""
    tag = f"{Case(case).value}|{sigma_index}|{trial}".encode()
    h = int.from_bytes(hashlib.blake2b(tag, digest_size=8).digest(), "little")
    return (int(base_seed) ^ h) & _MASK64


def _record(combo: Combo, sigma: float, trial: int, delta_true: float, seed: int,
            u1, u2, aggregator: Aggregator) -> ExperimentRecord:
    common = dict(case=combo.case, prefilter=combo.prefilter, estimator=combo.estimator,
                  sigma=sigma, trial=trial, delta_true=delta_true, seed=seed)
    try:
        est = estimate_step(u1, u2, combo.estimator, aggregator)
    except ValueError:
        return ExperimentRecord(delta_hat=None, abs_err=None, status="failed",
                                kappa_ratio=0.0, mask_fraction=0.0, **common)
    status = "failed" if est.saturated else "ok"
    delta_hat = None if est.saturated else est.delta_hat
    abs_err = None if est.saturated else abs(est.delta_hat - delta_true)
    return ExperimentRecord(delta_hat=delta_hat, abs_err=abs_err, status=status,
                            kappa_ratio=est.kappa_ratio, mask_fraction=est.mask_fraction,
                            **common)


def run_trial(case, prefilter, estimator, sigma: float, delta_true: float, seed: int,
              width: int = DEFAULT_SIZE, height: int = DEFAULT_SIZE,
              fringe_scale: float = DEFAULT_FRINGE_SCALE, trial: int = 0,
              aggregator=Aggregator.MEDIAN) -> ExperimentRecord:
    """Synthesize one pair, optionally pre-filter both frames, estimate the step."""
    combo = Combo(case, prefilter, estimator)
    pair = synthesize(SynthSpec(case=combo.case, delta=delta_true, sigma=sigma, seed=seed,
                                width=width, height=height, fringe_scale=fringe_scale))
    u1, u2 = prefilter_pair(combo.prefilter, pair.i1, pair.i2)
    return _record(combo, sigma, trial, delta_true, seed, u1, u2, Aggregator(aggregator))


def _run_job(args) -> list[ExperimentRecord]:
    plan, case, sigma_index, trial = args
    combos = [c for c in plan.combos if c.case is case]
    sigma = plan.sigmas[sigma_index]
    seed = trial_seed(plan.base_seed, case, sigma_index, trial)
    pair = synthesize(SynthSpec(case=case, delta=plan.delta_true, sigma=sigma, seed=seed,
                                width=plan.width, height=plan.height,
                                fringe_scale=plan.fringe_scale))
    filtered = {}
    out = []
    for combo in combos:
        if combo.prefilter not in filtered:
            filtered[combo.prefilter] = prefilter_pair(combo.prefilter, pair.i1, pair.i2)
        u1, u2 = filtered[combo.prefilter]
        out.append(_record(combo, sigma, trial, plan.delta_true, seed, u1, u2, plan.aggregator))
    return out


def run_plan(plan: ExperimentPlan, workers: int = 1, progress=None) -> list[ExperimentRecord]:
    """Run every combination x sigma x trial; records come back in canonical order.

    Each (case, sigma, trial) job synthesizes its pair once and pre-filters it
    once per pre-filter. ``progress`` is an optional callable invoked with the
    number of finished jobs.
    """
    jobs = [(plan, case, si, t)
            for case in plan.cases
            for si in range(len(plan.sigmas))
            for t in range(plan.trials)]
    records = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for n, chunk in enumerate(pool.map(_run_job, jobs, chunksize=4), 1):
                records.extend(chunk)
                if progress:
                    progress(n)
    else:
        for n, job in enumerate(jobs, 1):
            records.extend(_run_job(job))
            if progress:
                progress(n)
    return sorted(records, key=ExperimentRecord.sort_key)


@dataclass(frozen=True)
class MaeSummary:
    """Absolute-error statistics of one (case, prefilter, estimator, sigma) group.

    Statistics are NaN when every trial in the group failed.
    """

    case: Case
    prefilter: Prefilter
    estimator: Estimator
    sigma: float
    n: int
    n_failed: int
    mae_mean: float
    mae_median: float
    q25: float
    q75: float

    @property
    def all_failed(self) -> bool:
        return self.n_failed == self.n

    @property
    def combo(self) -> Combo:
        return Combo(self.case, self.prefilter, self.estimator)


def summarize_errors(errors: Sequence[float]) -> tuple[float, float, float, float]:
    """``(mean, median, q25, q75)`` of a non-empty error sample."""
    errors = list(errors)
    return (float(np.mean(errors)), median(errors),
            percentile(errors, 25), percentile(errors, 75))


def aggregate_mae(records: Iterable[ExperimentRecord]) -> list[MaeSummary]:
    groups: dict = {}
    for r in records:
        groups.setdefault((r.combo, r.sigma), []).append(r)
    if not groups:
        raise ValueError("no records to aggregate")
    out = []
    for (combo, sigma), rows in sorted(groups.items(), key=lambda kv: (kv[0][0].sort_key(), kv[0][1])):
        errors = [r.abs_err for r in rows if r.ok]
        n_failed = len(rows) - len(errors)
        stats_ = summarize_errors(errors) if errors else (math.nan,) * 4
        out.append(MaeSummary(combo.case, combo.prefilter, combo.estimator, sigma,
                              len(rows), n_failed, *stats_))
    return out


def summary_table(summaries: Iterable[MaeSummary]) -> dict:
    """``{combo: {sigma: summary}}`` view for comparisons across groups."""
    table: dict = {}
    for s in summaries:
        table.setdefault(s.combo, {})[s.sigma] = s
    return table


def noise_rank_correlation(summaries: Iterable[MaeSummary]) -> float:
    """Spearman correlation between sigma and median MAE over non-failed groups."""
    pts = [(s.sigma, s.mae_median) for s in summaries if not s.all_failed]
    if len(pts) < 2:
        raise ValueError("need at least two noise levels with successful trials")
    sig, mae = zip(*pts)
    return float(stats.spearmanr(sig, mae).statistic)
