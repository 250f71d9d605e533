"""Round-by-round simulation of signal-assisted deliveries.

Each round draws the vehicle types from the prior, then the tollways from
the behavior row for those types, and pays the table entry.  Rounds are
split into fixed-size chunks; chunk ``c`` draws from the ``c``-th child of
``SeedSequence(seed)``, so results do not depend on the worker count.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from ._workers import max_workers
from .bell import PAIRS, Behavior
from .errors import DomainError
from .game import PayoffTable, TypePrior, earnings

CHUNK = 1 << 16


@dataclass(frozen=True)
class SimulationReport:
    rounds: int
    empirical_mean: float
    analytic_mean: float
    std_error: float
    z_score: float
    seed: int
    chi_square: float
    chi_square_dof: int
    counts: list

    def to_json(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class RoundLog:
    t: np.ndarray  # row index 0..3 per round
    l: np.ndarray  # column index 0..3 per round
    payoff: np.ndarray


def _cdf(p: np.ndarray) -> np.ndarray:
    c = np.cumsum(p, axis=-1)
    c[..., -1] = 1.0
    return c


def _sample_chunk(seed_seq: np.random.SeedSequence, n: int, prior_cdf, row_cdf):
    rng = np.random.default_rng(seed_seq)
    u = rng.random((n, 2))
    # Inverse CDF over a fixed cell order: index = number of cdf entries <= u.
    t = np.minimum((u[:, :1] >= prior_cdf[None, :]).sum(axis=1), 3)
    l = np.minimum((u[:, 1:] >= row_cdf[t]).sum(axis=1), 3)
    return t, l


def simulate_rounds(
    table: PayoffTable,
    prior: TypePrior | None,
    b: Behavior,
    rounds: int,
    seed: int,
    workers: int | None = None,
    keep_log: bool = False,
) -> SimulationReport | tuple[SimulationReport, RoundLog]:
    """Simulate ``rounds`` deliveries and compare the mean payoff with the analytic earnings."""
    if rounds < 1:
        raise DomainError(f"rounds must be >= 1, got {rounds}")
    prior = TypePrior.uniform() if prior is None else prior
    prior_cdf = _cdf(prior.flat.copy())
    row_cdf = _cdf(np.array(b.table))

    sizes = [CHUNK] * (rounds // CHUNK) + ([rounds % CHUNK] if rounds % CHUNK else [])
    children = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(i):
        return _sample_chunk(children[i], sizes[i], prior_cdf, row_cdf)

    with ThreadPoolExecutor(max_workers=max_workers(workers)) as pool:
        chunks = list(pool.map(run, range(len(sizes))))

    counts = np.zeros((4, 4), dtype=np.int64)
    for t, l in chunks:
        counts += np.bincount(t * 4 + l, minlength=16).reshape(4, 4)

    values = table.totals
    mean = math.fsum((counts * values).ravel().tolist()) / rounds
    if rounds >= 2:
        var = math.fsum((counts * (values - mean) ** 2).ravel().tolist()) / (rounds - 1)
        std_error = math.sqrt(var / rounds)
    else:
        std_error = 0.0
    analytic = earnings(table, prior, b)
    if std_error > 0:
        z = abs(mean - analytic) / std_error
    else:
        z = 0.0 if math.isclose(mean, analytic, rel_tol=1e-12, abs_tol=1e-12) else math.inf

    chi2, dof = conditional_chi_square(counts, b)
    report = SimulationReport(
        rounds=rounds,
        empirical_mean=mean,
        analytic_mean=analytic,
        std_error=std_error,
        z_score=z,
        seed=seed,
        chi_square=chi2,
        chi_square_dof=dof,
        counts=counts.tolist(),
    )
    if not keep_log:
        return report
    t = np.concatenate([c[0] for c in chunks])
    l = np.concatenate([c[1] for c in chunks])
    return report, RoundLog(t, l, values[t, l])


def conditional_chi_square(counts: np.ndarray, b: Behavior) -> tuple[float, int]:
    """Pearson statistic of tollway counts against each visited behavior row.

    Cells with zero expected probability are excluded; observing one makes
    the statistic infinite.
    """
    counts = np.asarray(counts, dtype=float)
    stat, dof = 0.0, 0
    for r in range(4):
        n = counts[r].sum()
        if n == 0:
            continue
        probs = b.table[r]
        support = probs > 0
        if np.any(counts[r][~support] > 0):
            return math.inf, dof
        expected = n * probs[support]
        stat += float(np.sum((counts[r][support] - expected) ** 2 / expected))
        dof += int(support.sum()) - 1
    return stat, dof


def write_round_log(log: RoundLog, out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("round", "t1", "t2", "l1", "l2", "payoff"))
    for i, (t, l, v) in enumerate(zip(log.t.tolist(), log.l.tolist(), log.payoff.tolist()), start=1):
        writer.writerow((i, *PAIRS[t], *PAIRS[l], repr(v)))
