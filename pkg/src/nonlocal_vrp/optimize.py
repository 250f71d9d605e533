"""Optimal earnings over classical, quantum and no-signaling strategies.

Earnings are affine in the behavior, so the classical and no-signaling
optima are exact maxima over the 16 deterministic and 24 extremal
no-signaling vertices.  The quantum optimum is a search over
``(theta, a0, a1, b0, b1)``: a deterministic grid followed by compass
refinement from the best grid points.  It is reported as a lower bound,
paired with the analytic 2*sqrt(2) cap where the objective depends on CHSH
alone.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import bell
from ._workers import max_workers
from .bell import SIGN_A, SIGN_AB, SIGN_B, STANDARD_CHSH, Behavior, chsh_value, pair_index
from .errors import DomainError, EmptyRegion, SolverError
from .game import (
    PARAM_NAMES,
    PayoffTable,
    TiltedVrpParams,
    TypePrior,
    VrpParams,
    base_constant,
    bell_coefficient,
    build_payoff_table,
    build_tilted_payoff_table,
    validate_params,
)
from .quantum import (
    THETA_MAX,
    QuantumStrategy,
    behavior_from_quantum,
    canonical_chsh_strategy,
    theta_for_tilt,
    tilted_optimal_strategy,
)

TSIRELSON = 2.0 * math.sqrt(2.0)
ORDER_TOL = 1e-6


class StrategyClass(str, Enum):
    CLASSICAL = "classical"
    QUANTUM = "quantum"
    NO_SIGNALING = "ns"


@dataclass(frozen=True)
class SearchSettings:
    grid_step: float = math.pi / 24
    refine_tol: float = 1e-6
    n_starts: int = 8
    max_sweeps: int = 10_000

    def __post_init__(self):
        if not 0 < self.grid_step <= math.pi / 4:
            raise DomainError(f"grid_step must be in (0, pi/4], got {self.grid_step}")
        if not 0 < self.refine_tol < self.grid_step:
            raise DomainError("refine_tol must be positive and below grid_step")
        if self.n_starts < 1:
            raise DomainError("n_starts must be >= 1")


@dataclass(frozen=True, eq=False)
class OptimizationOutcome:
    strategy_class: StrategyClass
    value: float
    witness: Any
    behavior: Behavior
    bell_value: float
    iterations: int
    diagnostics: dict = field(default_factory=dict)

    def witness_json(self) -> Any:
        if isinstance(self.witness, bell.DeterministicStrategy):
            return {"deterministic": self.witness.code}
        return self.witness.to_json()

    def to_json(self) -> dict:
        return {
            "class": self.strategy_class.value,
            "value": self.value,
            "witness": self.witness_json(),
            "behavior": self.behavior.to_json(),
            "chsh": self.bell_value,
            "iterations": self.iterations,
            "diagnostics": self.diagnostics,
        }


# --- objectives as linear functionals of the behavior table -------------------


def objective_weights(table: PayoffTable, prior: TypePrior | None = None) -> np.ndarray:
    """W with earnings(b) == sum(W * b.table)."""
    prior = TypePrior.uniform() if prior is None else prior
    return prior.flat[:, None] * table.totals


def chsh_weights(signs: Sequence[int] = STANDARD_CHSH) -> np.ndarray:
    return np.asarray(signs, dtype=float)[:, None] * SIGN_AB[None, :]


def tilted_weights(zeta: float) -> np.ndarray:
    """CHSH + 2 zeta m0, with m0 read from the t1t2 = 11 row."""
    w = chsh_weights()
    row = pair_index(1, 1)
    w[row, pair_index(1, 1)] += 2 * zeta
    w[row, pair_index(1, 2)] += 2 * zeta
    return w


def _functional(weights: np.ndarray) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Rewrite sum(W * p) as K + alpha.<A_i> + beta.<B_j> + sum gamma_ij <A_i B_j>.

    Uses p(l1 l2|ij) = (1 + sA <A_i> + sB <B_j> + sA sB <A_i B_j>) / 4.
    """
    w = np.asarray(weights, dtype=float)
    const = float(w.sum() / 4)
    alpha = np.zeros(2)
    beta = np.zeros(2)
    gamma = np.zeros((2, 2))
    for i, j in itertools.product((0, 1), repeat=2):
        row = w[2 * i + j]
        alpha[i] += row @ SIGN_A / 4
        beta[j] += row @ SIGN_B / 4
        gamma[i, j] = row @ SIGN_AB / 4
    return const, alpha, beta, gamma


def _quantum_value(coeffs, x: Sequence[float]) -> float:
    const, alpha, beta, gamma = coeffs
    theta, a0, a1, b0, b1 = x
    c2, s2 = math.cos(2 * theta), math.sin(2 * theta)
    ca, sa = (math.cos(a0), math.cos(a1)), (math.sin(a0), math.sin(a1))
    cb, sb = (math.cos(b0), math.cos(b1)), (math.sin(b0), math.sin(b1))
    value = const
    for i in (0, 1):
        value += alpha[i] * c2 * ca[i] + beta[i] * c2 * cb[i]
        for j in (0, 1):
            value += gamma[i, j] * (ca[i] * cb[j] + s2 * sa[i] * sb[j])
    return value


def _vertex_values(weights: np.ndarray, vertices: Sequence[Behavior]) -> np.ndarray:
    return np.array([float(np.sum(weights * v.table)) for v in vertices])


def _first_max(values: np.ndarray, rel_tol: float = 1e-12) -> int:
    best = values.max()
    return int(np.flatnonzero(values >= best - rel_tol * max(1.0, abs(best)))[0])


# --- classical and no-signaling -------------------------------------------------


def maximize_classical(weights: np.ndarray) -> tuple[int, float]:
    """Index into :func:`bell.deterministic_strategies` and the maximal value."""
    values = _vertex_values(weights, bell.local_deterministic_vertices())
    k = _first_max(values)
    return k, float(values[k])


def maximize_no_signaling(weights: np.ndarray) -> tuple[int, float]:
    values = _vertex_values(weights, bell.ns_extremal_vertices())
    k = _first_max(values)
    return k, float(values[k])


def classical_optimum(table: PayoffTable, prior: TypePrior | None = None) -> OptimizationOutcome:
    k, value = maximize_classical(objective_weights(table, prior))
    strategy = bell.deterministic_strategies()[k]
    behavior = strategy.behavior()
    return OptimizationOutcome(
        StrategyClass.CLASSICAL, value, strategy, behavior, chsh_value(behavior), 16
    )


def _vertex_label(k: int) -> str:
    if k < 16:
        return "deterministic " + bell.deterministic_strategies()[k].code
    alpha, beta, gamma = bell.PR_BOX_LABELS[k - 16]
    return f"pr-box alpha={alpha} beta={beta} gamma={gamma}"


def ns_optimum(table: PayoffTable, prior: TypePrior | None = None) -> OptimizationOutcome:
    k, value = maximize_no_signaling(objective_weights(table, prior))
    behavior = bell.ns_extremal_vertices()[k]
    return OptimizationOutcome(
        StrategyClass.NO_SIGNALING,
        value,
        behavior,
        behavior,
        chsh_value(behavior),
        24,
        {"vertex": _vertex_label(k)},
    )


# --- quantum --------------------------------------------------------------------


def _theta_grid(step: float) -> np.ndarray:
    n = int(math.floor(THETA_MAX / step + 1e-9))
    grid = step * np.arange(n + 1)
    if THETA_MAX - grid[-1] > 1e-12:
        grid = np.append(grid, THETA_MAX)
    return np.minimum(grid, THETA_MAX)


def _angle_grid(step: float) -> np.ndarray:
    n = int(math.ceil(2 * math.pi / step - 1e-9))
    return -math.pi + step * np.arange(n)


@dataclass(frozen=True)
class _GridResult:
    values: np.ndarray  # (T, A, A): best over (b0, b1) for each (theta, a0, a1)
    b_index: np.ndarray  # (T, A, A, 2)
    thetas: np.ndarray
    angles: np.ndarray


def _grid_search(coeffs, step: float) -> _GridResult:
    """Exact maximum over the product grid theta x a0 x a1 x b0 x b1.

    For fixed (theta, a0, a1) the objective splits into a b0 part plus a b1
    part, so the max over the (b0, b1) grid is the sum of two 1-D maxima.
    """
    const, alpha, beta, gamma = coeffs
    thetas, angles = _theta_grid(step), _angle_grid(step)
    ca, sa = np.cos(angles), np.sin(angles)
    n_a = angles.size
    values = np.empty((thetas.size, n_a, n_a))
    b_index = np.empty((thetas.size, n_a, n_a, 2), dtype=np.int64)
    for k, theta in enumerate(thetas):
        c2, s2 = math.cos(2 * theta), math.sin(2 * theta)
        total = const + c2 * (alpha[0] * ca[:, None] + alpha[1] * ca[None, :])
        for j in (0, 1):
            p = gamma[0, j] * ca[:, None] + gamma[1, j] * ca[None, :] + beta[j] * c2
            q = s2 * (gamma[0, j] * sa[:, None] + gamma[1, j] * sa[None, :])
            g = p[..., None] * ca[None, None, :] + q[..., None] * sa[None, None, :]
            idx = g.argmax(axis=-1)
            b_index[k, :, :, j] = idx
            total = total + np.take_along_axis(g, idx[..., None], axis=-1)[..., 0]
        values[k] = total
    return _GridResult(values, b_index, thetas, angles)


def _grid_point(grid: _GridResult, flat: int) -> tuple[float, ...]:
    k, i0, i1 = np.unravel_index(flat, grid.values.shape)
    j0, j1 = grid.b_index[k, i0, i1]
    a = grid.angles
    return (float(grid.thetas[k]), float(a[i0]), float(a[i1]), float(a[j0]), float(a[j1]))


def _refine(coeffs, x0: Sequence[float], step: float, tol: float, max_sweeps: int):
    """Compass search: try +-h on each coordinate, halve h when stuck, stop below tol."""
    x = list(x0)
    fx = _quantum_value(coeffs, x)
    evals, sweeps = 1, 0
    h = step
    while h >= tol:
        improved = True
        while improved and sweeps < max_sweeps:
            improved = False
            sweeps += 1
            for d in range(5):
                for sign in (1.0, -1.0):
                    y = list(x)
                    y[d] += sign * h
                    if d == 0:
                        y[0] = min(max(y[0], 0.0), THETA_MAX)
                    fy = _quantum_value(coeffs, y)
                    evals += 1
                    if fy > fx:
                        x, fx, improved = y, fy, True
        h /= 2
    return x, fx, evals


def _tilt_seeds(table: PayoffTable | None) -> list[tuple[float, ...]]:
    seeds = [canonical_chsh_strategy().as_tuple()]
    if table is None or not table.zeta:
        return seeds
    base = table.base_params
    tilts = [table.zeta]
    coeff = bell_coefficient(base)
    if coeff > 0:
        tilts.append(2 * table.zeta / coeff)
    for z in tilts:
        if 0 < z < 2:
            seeds.append(tilted_optimal_strategy(theta_for_tilt(z))[0].as_tuple())
    return seeds


def maximize_quantum(
    weights: np.ndarray,
    settings: SearchSettings | None = None,
    seeds: Iterable[Sequence[float]] = (),
) -> tuple[QuantumStrategy, float, dict]:
    """Best quantum strategy for the functional ``sum(W * p)``.

    Returns the witness, its value (closed form), and search diagnostics.
    Deterministic for fixed inputs.
    """
    settings = settings or SearchSettings()
    coeffs = _functional(weights)
    grid = _grid_search(coeffs, settings.grid_step)
    flat_values = grid.values.reshape(-1)
    order = np.argsort(-flat_values, kind="stable")[: settings.n_starts]
    starts = [_grid_point(grid, int(f)) for f in order] + [tuple(s) for s in seeds]

    best_x, best_f, total_evals = None, -math.inf, 0
    for x0 in starts:
        x, fx, evals = _refine(coeffs, x0, settings.grid_step / 2, settings.refine_tol, settings.max_sweeps)
        total_evals += evals
        if fx > best_f:
            best_x, best_f = x, fx
    strategy = QuantumStrategy.normalized(*best_x)
    n_theta, n_angle = grid.thetas.size, grid.angles.size
    diagnostics = {
        "grid_points": int(n_theta * n_angle**4),
        "grid_best": float(flat_values[order[0]]),
        "starts": len(starts),
        "evaluations": total_evals,
        "lower_bound": True,
    }
    return strategy, _quantum_value(coeffs, strategy.as_tuple()), diagnostics


def quantum_optimum(
    table: PayoffTable,
    prior: TypePrior | None = None,
    settings: SearchSettings | None = None,
) -> OptimizationOutcome:
    prior = TypePrior.uniform() if prior is None else prior
    weights = objective_weights(table, prior)
    strategy, _, diagnostics = maximize_quantum(weights, settings, _tilt_seeds(table))
    behavior = behavior_from_quantum(strategy)
    value = float(np.sum(weights * behavior.table))

    base = table.base_params
    if base is not None and prior.is_uniform:
        if not table.zeta:
            diagnostics["tsirelson_cap"] = base_constant(base) + bell_coefficient(base) * TSIRELSON / 8
        elif table.zeta < 2:
            matched, _ = tilted_optimal_strategy(theta_for_tilt(table.zeta))
            diagnostics["matched_state_value"] = float(
                np.sum(weights * behavior_from_quantum(matched).table)
            )
    return OptimizationOutcome(
        StrategyClass.QUANTUM,
        value,
        strategy,
        behavior,
        chsh_value(behavior),
        diagnostics["evaluations"],
        diagnostics,
    )


def optimize_all(
    table: PayoffTable,
    prior: TypePrior | None = None,
    classes: Iterable[StrategyClass] = tuple(StrategyClass),
    settings: SearchSettings | None = None,
) -> dict[StrategyClass, OptimizationOutcome]:
    out = {}
    for cls in classes:
        cls = StrategyClass(cls)
        if cls is StrategyClass.CLASSICAL:
            out[cls] = classical_optimum(table, prior)
        elif cls is StrategyClass.QUANTUM:
            out[cls] = quantum_optimum(table, prior, settings)
        else:
            out[cls] = ns_optimum(table, prior)
    return out


# --- parameter scan -------------------------------------------------------------


def analytic_advantage(p: VrpParams) -> float:
    """Quantum minus classical optimum of the untilted game, uniform prior."""
    return bell_coefficient(p) * (TSIRELSON - 2.0) / 8


@dataclass(frozen=True)
class ScanRow:
    params: VrpParams
    zeta: float
    classical: float
    quantum: float
    ns: float

    @property
    def advantage(self) -> float:
        return self.quantum - self.classical

    @property
    def analytic_advantage(self) -> float | None:
        return analytic_advantage(self.params) if self.zeta == 0 else None


@dataclass(frozen=True)
class ScanResult:
    rows: list[ScanRow]
    skipped: int


def _axis(spec) -> list[float]:
    if isinstance(spec, Mapping):
        try:
            return [float(v) for v in np.linspace(spec["start"], spec["stop"], int(spec["num"]))]
        except KeyError as exc:
            raise DomainError(f"range spec needs start, stop, num: missing {exc}") from exc
    if isinstance(spec, (list, tuple)):
        return [float(v) for v in spec]
    return [float(spec)]


def parse_region(data: Mapping) -> tuple[dict[str, list[float]], list[float]]:
    """Read a region JSON object: one axis per parameter plus an optional ``zeta`` list.

    Each axis is a number, a list of numbers, or ``{"start", "stop", "num"}``.
    """
    missing = [k for k in PARAM_NAMES if k not in data]
    if missing:
        raise DomainError(f"region is missing axes: {', '.join(missing)}")
    unknown = set(data) - set(PARAM_NAMES) - {"zeta"}
    if unknown:
        raise DomainError(f"unknown region keys: {', '.join(sorted(unknown))}")
    axes = {k: _axis(data[k]) for k in PARAM_NAMES}
    zetas = _axis(data.get("zeta", 0.0))
    if any(z < 0 for z in zetas):
        raise DomainError("zeta values must be nonnegative")
    return axes, zetas


def _scan_row(task) -> ScanRow:
    params, zeta, settings = task
    table = build_tilted_payoff_table(TiltedVrpParams(params, zeta)) if zeta else build_payoff_table(params)
    results = optimize_all(table, None, settings=settings)
    return ScanRow(
        params,
        zeta,
        results[StrategyClass.CLASSICAL].value,
        results[StrategyClass.QUANTUM].value,
        results[StrategyClass.NO_SIGNALING].value,
    )


def advantage_scan(
    axes: Mapping[str, Sequence[float]],
    zetas: Sequence[float] = (0.0,),
    settings: SearchSettings | None = None,
    workers: int | None = None,
    check_tol: float = ORDER_TOL,
) -> ScanResult:
    """One row per valid grid point and zeta, in ``itertools.product`` order.

    Invalid points are skipped and counted.  Untilted rows are checked
    against the analytic advantage; a mismatch beyond ``check_tol`` raises
    :class:`SolverError`.
    """
    if any(z < 0 for z in zetas):
        raise DomainError("zeta values must be nonnegative")
    points = [VrpParams(*vals) for vals in itertools.product(*(axes[k] for k in PARAM_NAMES))]
    valid = [p for p in points if validate_params(p).valid]
    if not valid:
        raise EmptyRegion(f"none of the {len(points)} grid points satisfies the feasible region")
    tasks = [(p, float(z), settings) for p in valid for z in zetas]
    with ThreadPoolExecutor(max_workers=max_workers(workers)) as pool:
        rows = list(pool.map(_scan_row, tasks))
    for row in rows:
        expected = row.analytic_advantage
        if expected is not None and abs(row.advantage - expected) > check_tol:
            raise SolverError(
                f"quantum advantage {row.advantage!r} deviates from analytic {expected!r} at {row.params}"
            )
    return ScanResult(rows, len(points) - len(valid))


SCAN_HEADER = (*PARAM_NAMES, "zeta", "classical", "quantum", "ns", "advantage")


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def write_scan_csv(result: ScanResult, out: io.TextIOBase) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SCAN_HEADER)
    for r in result.rows:
        writer.writerow(
            [_fmt(v) for v in (*r.params.as_tuple(), r.zeta, r.classical, r.quantum, r.ns, r.advantage)]
        )
