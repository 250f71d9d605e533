"""Behaviors of the two-party, two-input, two-output Bell scenario.

A behavior is the conditional table ``p(l1 l2 | t1 t2)`` stored as a 4x4
array.  Rows are the input pairs ``t1 t2 = 11, 12, 21, 22`` and columns the
output pairs ``l1 l2 = 11, 12, 21, 22``.  Labels are 1-based throughout the
public API; output label 1 carries sign +1 in correlators.

The module covers construction from the eight correlation parameters
``(c00, c01, c10, c11, m0, m1, n0, n1)``, no-signaling checks, the CHSH and
tilted-CHSH functionals, locality certification by the eight relabeled CHSH
inequalities, and explicit local hidden variable models found by linear
programming over the 16 deterministic strategies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog

from .errors import (
    DomainError,
    InvalidParams,
    NotAProbabilityTable,
    NotLocal,
    SignalingInput,
    SolverError,
)

# Tolerances: algebraic identities / feasibility checks / reconstructions.
ALGEBRA_TOL = 1e-12
FEASIBILITY_TOL = 1e-9
RECONSTRUCTION_TOL = 1e-7

PAIRS: tuple[tuple[int, int], ...] = ((1, 1), (1, 2), (2, 1), (2, 2))

# Sign of each output column for party A, party B and their product.
SIGN_A = np.array([1.0, 1.0, -1.0, -1.0])
SIGN_B = np.array([1.0, -1.0, 1.0, -1.0])
SIGN_AB = SIGN_A * SIGN_B

# Sign patterns over (<11>, <12>, <21>, <22>) with an odd number of minus signs.
CHSH_RELABELINGS: tuple[tuple[int, int, int, int], ...] = tuple(
    signs
    for signs in itertools.product((1, -1), repeat=4)
    if signs.count(-1) % 2 == 1
)
STANDARD_CHSH = (1, 1, 1, -1)


def pair_index(first: int, second: int) -> int:
    """Row/column index of a 1-based label pair."""
    if first not in (1, 2) or second not in (1, 2):
        raise DomainError(f"labels must be 1 or 2, got ({first}, {second})")
    return 2 * (first - 1) + (second - 1)


def _as_table(table) -> np.ndarray:
    arr = np.array(table, dtype=float)
    if arr.shape != (4, 4):
        raise NotAProbabilityTable(f"expected a 4x4 table, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NotAProbabilityTable("table contains non-finite entries")
    return arr


def _check_probability_table(arr: np.ndarray) -> None:
    if arr.min() < -ALGEBRA_TOL or arr.max() > 1 + ALGEBRA_TOL:
        raise NotAProbabilityTable(
            f"entries must lie in [0, 1]; range is [{arr.min():.3g}, {arr.max():.3g}]"
        )
    row_err = np.abs(arr.sum(axis=1) - 1.0)
    if row_err.max() > ALGEBRA_TOL:
        bad = int(row_err.argmax())
        raise NotAProbabilityTable(
            f"row t1t2={PAIRS[bad][0]}{PAIRS[bad][1]} sums to {arr[bad].sum()!r}"
        )


@dataclass(frozen=True)
class SignalingViolation:
    """One broken marginal equality, e.g. party A's marginal for t1=1 shifting with t2."""

    party: str
    own_input: int
    magnitude: float

    def __str__(self) -> str:
        other = "t2" if self.party == "A" else "t1"
        own = "t1" if self.party == "A" else "t2"
        return (
            f"party {self.party}: outcome-1 marginal at {own}={self.own_input} "
            f"depends on {other} (|diff| = {self.magnitude:.3e})"
        )


@dataclass(frozen=True)
class NoSignalingReport:
    ok: bool
    violations: tuple[SignalingViolation, ...] = ()


def check_no_signaling(table, tol: float = FEASIBILITY_TOL) -> NoSignalingReport:
    """Check the four marginal equalities of a 4x4 conditional table.

    Party A's outcome-1 marginal must not depend on ``t2`` (two equalities,
    one per ``t1``) and party B's must not depend on ``t1``.
    """
    arr = _as_table(table)
    _check_probability_table(arr)
    a_marg = arr @ (SIGN_A > 0)  # p(l1=1 | row)
    b_marg = arr @ (SIGN_B > 0)  # p(l2=1 | row)
    violations = []
    for t1 in (1, 2):
        diff = abs(a_marg[pair_index(t1, 1)] - a_marg[pair_index(t1, 2)])
        if diff > tol:
            violations.append(SignalingViolation("A", t1, float(diff)))
    for t2 in (1, 2):
        diff = abs(b_marg[pair_index(1, t2)] - b_marg[pair_index(2, t2)])
        if diff > tol:
            violations.append(SignalingViolation("B", t2, float(diff)))
    return NoSignalingReport(ok=not violations, violations=tuple(violations))


@dataclass(frozen=True, eq=False)
class Behavior:
    """Immutable no-signaling conditional probability table.

    Construction validates the table and raises :class:`NotAProbabilityTable`
    or :class:`SignalingInput`.
    """

    table: np.ndarray

    def __post_init__(self):
        arr = _as_table(self.table)
        report = check_no_signaling(arr)
        if not report.ok:
            raise SignalingInput("; ".join(str(v) for v in report.violations))
        arr.setflags(write=False)
        object.__setattr__(self, "table", arr)

    def prob(self, l1: int, l2: int, t1: int, t2: int) -> float:
        return float(self.table[pair_index(t1, t2), pair_index(l1, l2)])

    def correlators(self) -> np.ndarray:
        """<t1 t2> for the rows 11, 12, 21, 22."""
        return self.table @ SIGN_AB

    def marginals_a(self) -> np.ndarray:
        """(m0, m1): party A's outcome-1 probability for t1 = 1, 2."""
        rows = [pair_index(1, 1), pair_index(2, 1)]
        return self.table[rows] @ (SIGN_A > 0)

    def marginals_b(self) -> np.ndarray:
        """(n0, n1): party B's outcome-1 probability for t2 = 1, 2."""
        rows = [pair_index(1, 1), pair_index(1, 2)]
        return self.table[rows] @ (SIGN_B > 0)

    def mix(self, other: Behavior, weight: float) -> Behavior:
        """``weight * self + (1 - weight) * other``."""
        if not 0.0 <= weight <= 1.0:
            raise DomainError(f"mixing weight must be in [0, 1], got {weight}")
        return Behavior(weight * self.table + (1.0 - weight) * other.table)

    def allclose(self, other: Behavior, atol: float = ALGEBRA_TOL) -> bool:
        return bool(np.allclose(self.table, other.table, rtol=0.0, atol=atol))

    def to_json(self) -> dict:
        return {"table": self.table.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> Behavior:
        if not isinstance(data, dict) or "table" not in data:
            raise NotAProbabilityTable('behavior JSON needs a "table" key')
        return cls(data["table"])


@dataclass(frozen=True)
class CorrelationParams:
    """Joint and marginal outcome-1 probabilities; index 0 is input 1."""

    c00: float
    c01: float
    c10: float
    c11: float
    m0: float
    m1: float
    n0: float
    n1: float

    def joint(self, i: int, j: int) -> float:
        return (self.c00, self.c01, self.c10, self.c11)[2 * i + j]

    @property
    def m(self) -> tuple[float, float]:
        return (self.m0, self.m1)

    @property
    def n(self) -> tuple[float, float]:
        return (self.n0, self.n1)

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.c00, self.c01, self.c10, self.c11, self.m0, self.m1, self.n0, self.n1]
        )

    def validate(self, tol: float = ALGEBRA_TOL) -> None:
        for name, value in zip(("m0", "m1", "n0", "n1"), (*self.m, *self.n)):
            if not -tol <= value <= 1 + tol:
                raise InvalidParams(f"{name}={value} outside [0, 1]")
        for i, j in itertools.product((0, 1), repeat=2):
            c, mi, nj = self.joint(i, j), self.m[i], self.n[j]
            lo, hi = max(0.0, mi + nj - 1.0), min(mi, nj)
            if not lo - tol <= c <= hi + tol:
                raise InvalidParams(
                    f"c{i}{j}={c} outside its feasible interval [{lo}, {hi}]"
                )


def behavior_from_params(p: CorrelationParams) -> Behavior:
    """Fill the table row by row as ``(c, m - c, n - c, 1 - m - n + c)``."""
    p.validate()
    table = np.empty((4, 4))
    for i, j in itertools.product((0, 1), repeat=2):
        c, mi, nj = p.joint(i, j), p.m[i], p.n[j]
        table[2 * i + j] = (c, mi - c, nj - c, 1.0 - mi - nj + c)
    return Behavior(table)


def params_from_behavior(b: Behavior | np.ndarray) -> CorrelationParams:
    if not isinstance(b, Behavior):
        b = Behavior(b)
    t = b.table
    m0, m1 = b.marginals_a()
    n0, n1 = b.marginals_b()
    return CorrelationParams(
        c00=float(t[0, 0]),
        c01=float(t[1, 0]),
        c10=float(t[2, 0]),
        c11=float(t[3, 0]),
        m0=float(m0),
        m1=float(m1),
        n0=float(n0),
        n1=float(n1),
    )


def relabeled_chsh(b: Behavior, signs: tuple[int, int, int, int]) -> float:
    return float(np.dot(signs, b.correlators()))


def chsh_value(b: Behavior) -> float:
    """<11> + <12> + <21> - <22>, each correlator summing (-1)^(l1+l2) p."""
    return relabeled_chsh(b, STANDARD_CHSH)


def chsh_from_params(p: CorrelationParams) -> float:
    """The same functional written in the correlation parameters."""
    return 2.0 + 4.0 * (p.c00 + p.c01 + p.c10 - p.c11) - 4.0 * (p.m0 + p.n0)


def tilted_value(b: Behavior, zeta: float) -> float:
    """CHSH plus ``2 * zeta * m0``, with m0 party A's outcome-1 marginal at t1=1."""
    if zeta < 0:
        raise DomainError(f"zeta must be nonnegative, got {zeta}")
    return chsh_value(b) + 2.0 * zeta * float(b.marginals_a()[0])


@dataclass(frozen=True, order=True)
class DeterministicStrategy:
    """Tollway choice of each postman as a function of their own vehicle type.

    ``f1[t - 1]`` is the first postman's tollway for vehicle type ``t``.
    Ordering is lexicographic in ``(f1, f2)``.
    """

    f1: tuple[int, int]
    f2: tuple[int, int]

    def __post_init__(self):
        for f in (self.f1, self.f2):
            if len(f) != 2 or any(v not in (1, 2) for v in f):
                raise DomainError(f"strategy maps {{1,2}} -> {{1,2}}, got {f}")
        object.__setattr__(self, "f1", tuple(int(v) for v in self.f1))
        object.__setattr__(self, "f2", tuple(int(v) for v in self.f2))

    @property
    def code(self) -> str:
        return "".join(str(v) for v in (*self.f1, *self.f2))

    @classmethod
    def from_code(cls, code: str) -> DeterministicStrategy:
        if len(code) != 4 or any(ch not in "12" for ch in code):
            raise DomainError(f"strategy code must be four digits from {{1,2}}, got {code!r}")
        d = [int(ch) for ch in code]
        return cls((d[0], d[1]), (d[2], d[3]))

    def table(self) -> np.ndarray:
        out = np.zeros((4, 4))
        for t1, t2 in PAIRS:
            out[pair_index(t1, t2), pair_index(self.f1[t1 - 1], self.f2[t2 - 1])] = 1.0
        return out

    def behavior(self) -> Behavior:
        return Behavior(self.table())


def deterministic_strategies() -> tuple[DeterministicStrategy, ...]:
    """All 16 strategies in lexicographic order (``1111`` first)."""
    return tuple(
        DeterministicStrategy((a, b), (c, d))
        for a, b, c, d in itertools.product((1, 2), repeat=4)
    )


@lru_cache(maxsize=None)
def _local_vertices() -> tuple[Behavior, ...]:
    return tuple(s.behavior() for s in deterministic_strategies())


def local_deterministic_vertices() -> list[Behavior]:
    return list(_local_vertices())


def pr_box(alpha: int = 0, beta: int = 0, gamma: int = 0) -> Behavior:
    """PR box relabeling: outputs agree iff ``xy + alpha x + beta y + gamma`` is even.

    ``x, y`` are the 0-based inputs.  ``pr_box()`` is the canonical box: matching
    outputs for t1t2 = 11, 12, 21 and mismatching outputs for 22.
    """
    table = np.zeros((4, 4))
    for t1, t2 in PAIRS:
        x, y = t1 - 1, t2 - 1
        parity = (x * y + alpha * x + beta * y + gamma) % 2
        for l1, l2 in PAIRS:
            if ((l1 - 1) ^ (l2 - 1)) == parity:
                table[pair_index(t1, t2), pair_index(l1, l2)] = 0.5
    return Behavior(table)


PR_BOX_LABELS: tuple[tuple[int, int, int], ...] = tuple(itertools.product((0, 1), repeat=3))


@lru_cache(maxsize=None)
def _ns_vertices() -> tuple[Behavior, ...]:
    return _local_vertices() + tuple(pr_box(*lab) for lab in PR_BOX_LABELS)


def ns_extremal_vertices() -> list[Behavior]:
    """16 deterministic behaviors followed by the 8 PR-box relabelings."""
    return list(_ns_vertices())


def random_behavior(rng: np.random.Generator, concentration: float = 1.0) -> Behavior:
    """Dirichlet-weighted mixture of the 24 extremal no-signaling behaviors."""
    weights = rng.dirichlet(np.full(24, concentration))
    stacked = np.stack([v.table for v in _ns_vertices()])
    table = np.tensordot(weights, stacked, axes=1)
    # Renormalize rows; Dirichlet weights sum to one only up to rounding.
    table /= table.sum(axis=1, keepdims=True)
    return Behavior(table)


class Locality(str, Enum):
    LOCAL = "Local"
    NONLOCAL = "Nonlocal"


@dataclass(frozen=True)
class LocalityVerdict:
    """Outcome of the eight-inequality locality test.

    ``relabeling`` and ``value`` always hold the largest relabeled CHSH value;
    they act as the nonlocality witness when ``verdict`` is NONLOCAL.
    """

    verdict: Locality
    relabeling: tuple[int, int, int, int]
    value: float
    values: tuple[float, ...] = field(repr=False, default=())

    @property
    def is_local(self) -> bool:
        return self.verdict is Locality.LOCAL

    @property
    def witness(self) -> tuple[tuple[int, int, int, int], float] | None:
        if self.is_local:
            return None
        return self.relabeling, self.value


def certify_local(b: Behavior | np.ndarray, tol: float = FEASIBILITY_TOL) -> LocalityVerdict:
    """Local iff every relabeled CHSH value is at most 2 in absolute value."""
    if not isinstance(b, Behavior):
        b = Behavior(b)
    values = tuple(relabeled_chsh(b, s) for s in CHSH_RELABELINGS)
    best = int(np.argmax(values))
    # Relabelings come in sign-flipped pairs, so max(values) == max |values|.
    verdict = Locality.LOCAL if values[best] <= 2.0 + tol else Locality.NONLOCAL
    return LocalityVerdict(verdict, CHSH_RELABELINGS[best], values[best], values)


@dataclass(frozen=True, eq=False)
class LocalModel:
    """Convex weights over :func:`deterministic_strategies` (same order)."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (16,):
            raise DomainError(f"need 16 weights, got shape {w.shape}")
        if w.min() < 0 or abs(w.sum() - 1.0) > FEASIBILITY_TOL:
            raise DomainError("weights must be nonnegative and sum to 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def strategies(self) -> tuple[DeterministicStrategy, ...]:
        return deterministic_strategies()

    def support(self, tol: float = 1e-12) -> dict[str, float]:
        return {
            s.code: float(w) for s, w in zip(self.strategies, self.weights) if w > tol
        }

    def table(self) -> np.ndarray:
        stacked = np.stack([v.table for v in _local_vertices()])
        return np.tensordot(self.weights, stacked, axes=1)


def _vertex_param_matrix() -> np.ndarray:
    # Columns: the eight correlation parameters of each deterministic vertex, plus normalization.
    cols = [params_from_behavior(v).as_array() for v in _local_vertices()]
    return np.vstack([np.array(cols).T, np.ones(16)])


def lhv_decomposition(b: Behavior | np.ndarray) -> LocalModel:
    """Find mixture weights over the 16 deterministic strategies reproducing ``b``.

    Solved as an LP feasibility problem (HiGHS) on the eight correlation
    parameters plus normalization.  Raises :class:`NotLocal` if none exists.
    """
    if not isinstance(b, Behavior):
        b = Behavior(b)
    target = np.append(params_from_behavior(b).as_array(), 1.0)
    res = linprog(
        np.zeros(16),
        A_eq=_vertex_param_matrix(),
        b_eq=target,
        bounds=(0, None),
        method="highs",
    )
    if res.status == 2:
        raise NotLocal("no local hidden variable model reproduces the behavior")
    if res.status != 0:
        raise SolverError(f"LP solver failed: {res.message}")
    w = np.clip(res.x, 0.0, None)
    model = LocalModel(w / w.sum())
    err = float(np.abs(model.table() - b.table).max())
    if err > RECONSTRUCTION_TOL:
        raise NotLocal(f"best local mixture misses the behavior by {err:.3e}")
    return model
