"""Payoff tables of the two-postman routing game and expected earnings.

The six-parameter family has salaries ``s < l``, incentives ``u_s < u_l``
and reward scales ``x < y``.  Every table is 4x4 with rows indexed by the
vehicle-type pair ``t1 t2`` and columns by the tollway pair ``l1 l2`` (both
in the order 11, 12, 21, 22).  Each cell totals salary + incentive + reward.

Earnings under a behavior are the prior-weighted trace
``sum_t prior(t) sum_l p(l|t) totals(t, l)``; for the uniform prior the
base family collapses to ``base + coeff * CHSH / 8`` with
``base = l + s + (u_l + u_s + x + y) / 2`` and ``coeff = u_l + u_s + x - y``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bell import ALGEBRA_TOL, PAIRS, Behavior, chsh_value, pair_index
from .errors import CapExceeded, DimensionMismatch, DomainError, InvalidParams

PARAM_NAMES = ("s", "l", "u_s", "u_l", "x", "y")
DEFAULT_CAP = 10**6


@dataclass(frozen=True)
class VrpParams:
    s: float
    l: float
    u_s: float
    u_l: float
    x: float
    y: float

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, k) for k in PARAM_NAMES)

    def to_json(self) -> dict:
        return dict(zip(PARAM_NAMES, self.as_tuple()))


@dataclass(frozen=True)
class TiltedVrpParams:
    """Base game plus a bonus ``2 * zeta`` when both drive small vehicles and l1 = 1."""

    base: VrpParams
    zeta: float = 0.0

    def to_json(self) -> dict:
        return {**self.base.to_json(), "zeta": self.zeta}


@dataclass(frozen=True)
class TablePayoffs:
    """The 18 entries that parameterize the general table (salaries s, l plus u, z, x, y)."""

    s: float
    l: float
    u: tuple[float, float, float, float]
    z: tuple[float, float, float, float]
    xr: tuple[float, float, float, float]
    yr: tuple[float, float, float, float]


def table_entries(p: VrpParams) -> TablePayoffs:
    """Specialize the 18-entry table to the six-parameter family."""
    s, l, us, ul, x, y = p.as_tuple()
    return TablePayoffs(
        s=s,
        l=l,
        u=(2 * us, us + ul, us + ul, 2 * ul),
        z=(0.0, 0.0, 0.0, 0.0),
        xr=(x + (l - s) + (ul - us), x, x, y - (l - s) - 2 * ul),
        yr=(y + (l - s), y, y, x - (l - s) + (us + ul)),
    )


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    violations: tuple[str, ...] = ()
    audit: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.valid


def _requirement_audit(p: VrpParams) -> list[str]:
    e = table_entries(p)
    issues = []
    if not e.s < e.l:
        issues.append(f"salary: s={e.s} is not below l={e.l}")
    for j in range(3):
        if e.u[j] > e.u[j + 1]:
            issues.append(f"incentive: u{j + 1}={e.u[j]} > u{j + 2}={e.u[j + 1]}")
        if e.z[j + 1] > e.z[j]:
            issues.append(f"incentive: z{j + 2}={e.z[j + 1]} > z{j + 1}={e.z[j]}")
        if e.xr[j + 1] > e.xr[j]:
            issues.append(f"reward: x{j + 2}={e.xr[j + 1]} > x{j + 1}={e.xr[j]}")
        if e.yr[j + 1] > e.yr[j]:
            issues.append(f"reward: y{j + 2}={e.yr[j + 1]} > y{j + 1}={e.yr[j]}")
    if e.z[0] > e.u[0]:
        issues.append(f"incentive: z1={e.z[0]} > u1={e.u[0]}")
    if e.xr[1] != e.xr[2]:
        issues.append("reward: x2 != x3")
    if e.yr[1] != e.yr[2]:
        issues.append("reward: y2 != y3")
    if e.xr[0] > e.yr[3]:
        issues.append(f"reward: x1={e.xr[0]} > y4={e.yr[3]} (different paths must not be congested)")
    return issues


def validate_params(p: VrpParams, strict: bool = False) -> ValidationReport:
    """Check the feasible region ``0<s<l, l-s<=u_s<u_l, 0<x<y<u_l+u_s+x``.

    ``strict`` additionally audits the monotonicity requirements on the 18
    derived table entries.  The audit is advisory and never changes ``valid``.
    """
    s, l, us, ul, x, y = p.as_tuple()
    finite = all(math.isfinite(v) for v in p.as_tuple())
    violations = []
    if not finite:
        violations.append("parameters must be finite")
    else:
        if not 0 < s:
            violations.append(f"need 0 < s (s={s})")
        if not s < l:
            violations.append(f"need s < l (s={s}, l={l})")
        if not l - s <= us:
            violations.append(f"need l - s <= u_s (l-s={l - s}, u_s={us})")
        if not us < ul:
            violations.append(f"need u_s < u_l (u_s={us}, u_l={ul})")
        if not 0 < x:
            violations.append(f"need 0 < x (x={x})")
        if not x < y:
            violations.append(f"need x < y (x={x}, y={y})")
        if not y < ul + us + x:
            violations.append(f"need y < u_l + u_s + x (y={y}, u_l+u_s+x={ul + us + x})")
    audit = tuple(_requirement_audit(p)) if strict and finite else ()
    return ValidationReport(not violations, tuple(violations), audit)


def _require_valid(p: VrpParams) -> None:
    report = validate_params(p)
    if not report.valid:
        raise InvalidParams("; ".join(report.violations))


def base_constant(p: VrpParams) -> float:
    return p.l + p.s + (p.u_l + p.u_s + p.x + p.y) / 2


def bell_coefficient(p: VrpParams) -> float:
    return p.u_l + p.u_s + p.x - p.y


@dataclass(frozen=True, eq=False)
class PayoffTable:
    """4x4 total payoffs, optional (salary, incentive, reward) components of shape (4, 4, 3).

    ``params`` records the family member a table was built from, if any.
    """

    totals: np.ndarray
    components: np.ndarray | None = None
    params: VrpParams | TiltedVrpParams | None = None

    def __post_init__(self):
        totals = np.array(self.totals, dtype=float)
        if totals.shape != (4, 4):
            raise DimensionMismatch(f"payoff totals must be 4x4, got {totals.shape}")
        if not np.all(np.isfinite(totals)):
            raise DomainError("payoff totals must be finite")
        totals.setflags(write=False)
        object.__setattr__(self, "totals", totals)
        if self.components is not None:
            comps = np.array(self.components, dtype=float)
            if comps.shape != (4, 4, 3):
                raise DimensionMismatch(f"components must be 4x4x3, got {comps.shape}")
            if not np.allclose(comps.sum(axis=2), totals, rtol=0, atol=ALGEBRA_TOL * (1 + np.abs(totals).max())):
                raise DomainError("totals differ from the component sums")
            comps.setflags(write=False)
            object.__setattr__(self, "components", comps)

    @property
    def zeta(self) -> float:
        return self.params.zeta if isinstance(self.params, TiltedVrpParams) else 0.0

    @property
    def base_params(self) -> VrpParams | None:
        if isinstance(self.params, TiltedVrpParams):
            return self.params.base
        return self.params

    def total(self, t1: int, t2: int, l1: int, l2: int) -> float:
        return float(self.totals[pair_index(t1, t2), pair_index(l1, l2)])

    def column_symmetry_violations(self, tol: float = ALGEBRA_TOL) -> list[tuple[int, int]]:
        """Cells (row, col) breaking ``col 11 == col 22`` and ``col 12 == col 21``.

        The two bonus cells of a tilted table are exempt.
        """
        bad = []
        exempt = {(0, 0), (0, 1)} if self.zeta else set()
        for r in range(4):
            for c, mirror in ((0, 3), (1, 2)):
                if abs(self.totals[r, c] - self.totals[r, mirror]) > tol:
                    if (r, c) not in exempt:
                        bad.append((r, c))
        return bad

    def to_json(self) -> dict:
        out = {"totals": self.totals.tolist()}
        if self.components is not None:
            out["components"] = self.components.tolist()
        if self.params is not None:
            out["params"] = self.params.to_json()
        return out


def build_payoff_table(p: VrpParams) -> PayoffTable:
    _require_valid(p)
    e = table_entries(p)
    salary = (2 * e.s, e.s + e.l, e.s + e.l, 2 * e.l)
    comps = np.empty((4, 4, 3))
    for r in range(4):
        same = (salary[r], e.u[r], e.xr[r])
        diff = (salary[r], e.z[r], e.yr[r])
        # Columns 11 and 22 put both postmen on one tollway; 12 and 21 split them.
        comps[r, 0] = comps[r, 3] = same
        comps[r, 1] = comps[r, 2] = diff
    return PayoffTable(comps.sum(axis=2), comps, p)


def build_tilted_payoff_table(p: TiltedVrpParams) -> PayoffTable:
    if not p.zeta >= 0:
        raise InvalidParams(f"zeta must be nonnegative, got {p.zeta}")
    comps = np.array(build_payoff_table(p.base).components)
    row = pair_index(1, 1)
    for col in (pair_index(1, 1), pair_index(1, 2)):
        comps[row, col, 1] += 2 * p.zeta
    return PayoffTable(comps.sum(axis=2), comps, p)


@dataclass(frozen=True, eq=False)
class TypePrior:
    """Distribution over vehicle-type pairs; ``probs[t1 - 1, t2 - 1]``."""

    probs: np.ndarray = field(default_factory=lambda: np.full((2, 2), 0.25))

    def __post_init__(self):
        arr = np.array(self.probs, dtype=float)
        if arr.shape != (2, 2):
            raise DimensionMismatch(f"prior must be 2x2, got {arr.shape}")
        if arr.min() < 0 or abs(arr.sum() - 1.0) > ALGEBRA_TOL:
            raise DomainError("prior must be nonnegative and sum to 1")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @classmethod
    def uniform(cls) -> TypePrior:
        return cls()

    @property
    def flat(self) -> np.ndarray:
        """Row-ordered weights for t1t2 = 11, 12, 21, 22."""
        return self.probs.reshape(4)

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.probs == 0.25))

    def to_json(self) -> list:
        return self.probs.tolist()


def _prior(prior: TypePrior | None) -> TypePrior:
    return TypePrior.uniform() if prior is None else prior


def earnings(table: PayoffTable, prior: TypePrior | None, b: Behavior) -> float:
    """Expected total payoff ``sum_t prior(t) sum_l p(l|t) totals(t, l)``."""
    prior = _prior(prior)
    probs = np.asarray(b.table if isinstance(b, Behavior) else b)
    if probs.shape != table.totals.shape:
        raise DimensionMismatch(f"behavior shape {probs.shape} != payoff shape {table.totals.shape}")
    return float(np.sum(prior.flat[:, None] * probs * table.totals))


def earnings_closed_form(p: VrpParams, b: Behavior, prior: TypePrior | None = None) -> float:
    """Uniform-prior earnings as an increasing affine function of CHSH."""
    _require_valid(p)
    if prior is not None and not prior.is_uniform:
        raise DomainError("the closed form holds for the uniform type prior only")
    return base_constant(p) + bell_coefficient(p) * chsh_value(b) / 8


def tilted_earnings(p: TiltedVrpParams, b: Behavior) -> float:
    """Trace-form earnings on the tilted table, uniform prior."""
    return earnings(build_tilted_payoff_table(p), None, b)


def tilted_earnings_oracle(p: TiltedVrpParams, b: Behavior) -> float:
    """Base closed form plus the bonus mass ``2 zeta * 1/4 * m0``."""
    return earnings_closed_form(p.base, b) + p.zeta * float(b.marginals_a()[0]) / 2


def tilted_earnings_scaled_form(p: TiltedVrpParams, b: Behavior) -> float:
    """``base + coeff * (CHSH + 2 zeta m0) / 8``.

    This scales the bonus by the CHSH coefficient and so agrees with
    :func:`tilted_earnings` only when ``coeff == 2``.
    """
    _require_valid(p.base)
    m0 = float(b.marginals_a()[0])
    return base_constant(p.base) + bell_coefficient(p.base) * (chsh_value(b) + 2 * p.zeta * m0) / 8


@dataclass(frozen=True)
class TiltedDiscrepancy:
    trace_form: float
    scaled_form: float
    difference: float
    coefficient: float

    @property
    def agrees(self) -> bool:
        return abs(self.difference) <= 1e-10 * (1 + abs(self.trace_form))


def tilted_discrepancy(p: TiltedVrpParams, b: Behavior) -> TiltedDiscrepancy:
    trace = tilted_earnings(p, b)
    scaled = tilted_earnings_scaled_form(p, b)
    return TiltedDiscrepancy(trace, scaled, scaled - trace, bell_coefficient(p.base))


# --- general m-postman setting -------------------------------------------------

TypeVector = tuple[int, ...]
PathVector = tuple[int, ...]


def _check_size(m: int, n: int, k: int, cap: int) -> None:
    if m < 1 or n < 1 or k < 1:
        raise DomainError(f"need m, n, k >= 1, got ({m}, {n}, {k})")
    size = m * k**m * n**m
    if size > cap:
        raise CapExceeded(f"m * k^m * n^m = {size} exceeds cap {cap}")


@dataclass(frozen=True, eq=False)
class GeneralVrp:
    """Total-payoff tensor ``payoff[t_1-1, ..., t_m-1, l_1-1, ..., l_m-1]``.

    m postmen, n tollways, k vehicle types.  Labels are 1-based in every
    method argument and return value.
    """

    m: int
    n: int
    k: int
    payoff: np.ndarray
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        _check_size(self.m, self.n, self.k, self.cap)
        arr = np.array(self.payoff, dtype=float)
        expected = (self.k,) * self.m + (self.n,) * self.m
        if arr.shape != expected:
            raise DimensionMismatch(f"payoff tensor shape {arr.shape} != {expected}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("payoff tensor must be fully populated with finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "payoff", arr)

    @classmethod
    def from_components(
        cls,
        m: int,
        n: int,
        k: int,
        salary: Callable[[int, int], float],
        incentive: Callable[[int, int, tuple[int, ...]], float],
        reward: Callable[[int, int, tuple[int, ...]], float],
        cap: int = DEFAULT_CAP,
    ) -> GeneralVrp:
        """Fold per-postman components into the total tensor.

        ``salary(i, t_i)``, ``incentive(i, l, N_l)`` and ``reward(i, l, N_l)``
        take the 1-based postman index; ``N_l`` is the k-tuple counting the
        vehicles of each type on tollway ``l`` in the configuration.
        """
        _check_size(m, n, k, cap)
        payoff = np.empty((k,) * m + (n,) * m)
        for t in itertools.product(range(1, k + 1), repeat=m):
            for lv in itertools.product(range(1, n + 1), repeat=m):
                flows = {
                    road: tuple(
                        sum(1 for ti, li in zip(t, lv) if li == road and ti == typ)
                        for typ in range(1, k + 1)
                    )
                    for road in set(lv)
                }
                total = 0.0
                for i, (ti, li) in enumerate(zip(t, lv), start=1):
                    total += salary(i, ti) + incentive(i, li, flows[li]) + reward(i, li, flows[li])
                payoff[tuple(x - 1 for x in t) + tuple(x - 1 for x in lv)] = total
        return cls(m, n, k, payoff, cap)

    @classmethod
    def from_payoff_table(cls, table: PayoffTable) -> GeneralVrp:
        payoff = np.empty((2, 2, 2, 2))
        for t1, t2 in PAIRS:
            for l1, l2 in PAIRS:
                payoff[t1 - 1, t2 - 1, l1 - 1, l2 - 1] = table.total(t1, t2, l1, l2)
        return cls(2, 2, 2, payoff)


def optimal_path_configuration(
    g: GeneralVrp, t: Sequence[int], rel_tol: float = ALGEBRA_TOL
) -> tuple[list[PathVector], float]:
    """Exhaustive maximum over all ``n^m`` path configurations for type vector ``t``.

    Returns every maximizing path vector in lexicographic order and the value.
    """
    t = tuple(int(v) for v in t)
    if len(t) != g.m or any(not 1 <= v <= g.k for v in t):
        raise DomainError(f"type vector {t} not in [{g.k}]^{g.m}")
    _check_size(g.m, g.n, g.k, g.cap)
    row = g.payoff[tuple(v - 1 for v in t)]
    best = float(row.max())
    thresh = best - rel_tol * max(1.0, abs(best))
    argmax = [
        tuple(v + 1 for v in idx)
        for idx in itertools.product(range(g.n), repeat=g.m)
        if row[idx] >= thresh
    ]
    return argmax, best


def full_information_value(g: GeneralVrp, prior: np.ndarray | TypePrior | None = None) -> float:
    """Prior-weighted sum of per-type-vector path optima.

    This is what postmen who knew every vehicle type could earn; it upper
    bounds the earnings of any no-signaling strategy.
    """
    if prior is None:
        weights = np.full((g.k,) * g.m, 1.0 / g.k**g.m)
    else:
        weights = np.asarray(prior.probs if isinstance(prior, TypePrior) else prior, dtype=float)
    total = 0.0
    for t in itertools.product(range(1, g.k + 1), repeat=g.m):
        _, value = optimal_path_configuration(g, t)
        total += float(weights[tuple(v - 1 for v in t)]) * value
    return total
