"""Two-qubit strategies compiled into behaviors.

The shared state is ``cos(theta)|00> + sin(theta)|11>`` and each party
measures a planar observable ``cos(a) Z + sin(a) X``; the +1 eigenvalue is
output label 1.  Probabilities come from an explicit 4-dimensional state
vector computation; :func:`closed_form_table` gives the same numbers from
the correlator and marginal formulas and is used by the optimizers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bell import Behavior, SIGN_A, SIGN_AB, SIGN_B
from .errors import DomainError

THETA_MAX = math.pi / 4
_ANGLE_TOL = 1e-12

_I2 = np.eye(2)
_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
_X = np.array([[0.0, 1.0], [1.0, 0.0]])


def wrap_angle(angle: float) -> float:
    """Map an angle into [-pi, pi)."""
    wrapped = (angle + math.pi) % (2 * math.pi) - math.pi
    # Float modulo can land exactly on +pi for inputs just below -pi.
    return -math.pi if wrapped >= math.pi else wrapped


@dataclass(frozen=True)
class QuantumStrategy:
    theta: float
    a0: float
    a1: float
    b0: float
    b1: float

    def __post_init__(self):
        if not -_ANGLE_TOL <= self.theta <= THETA_MAX + _ANGLE_TOL:
            raise DomainError(f"theta={self.theta} outside [0, pi/4]")
        for name in ("a0", "a1", "b0", "b1"):
            value = getattr(self, name)
            if not -math.pi <= value < math.pi:
                raise DomainError(f"{name}={value} outside [-pi, pi)")

    @classmethod
    def normalized(cls, theta, a0, a1, b0, b1) -> QuantumStrategy:
        """Clamp theta into [0, pi/4] and wrap the measurement angles."""
        theta = min(max(float(theta), 0.0), THETA_MAX)
        return cls(theta, *(wrap_angle(float(v)) for v in (a0, a1, b0, b1)))

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.theta, self.a0, self.a1, self.b0, self.b1)

    def to_json(self) -> dict:
        return {"theta": self.theta, "a0": self.a0, "a1": self.a1, "b0": self.b0, "b1": self.b1}

    @classmethod
    def from_json(cls, data: dict) -> QuantumStrategy:
        try:
            return cls(*(float(data[k]) for k in ("theta", "a0", "a1", "b0", "b1")))
        except (KeyError, TypeError) as exc:
            raise DomainError(f"quantum strategy JSON needs theta, a0, a1, b0, b1: {exc}") from exc


def _observable(angle: float) -> np.ndarray:
    return math.cos(angle) * _Z + math.sin(angle) * _X


def _projectors(angle: float) -> tuple[np.ndarray, np.ndarray]:
    m = _observable(angle)
    return (_I2 + m) / 2, (_I2 - m) / 2


def state_vector(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), 0.0, 0.0, math.sin(theta)])


def tensor_table(q: QuantumStrategy) -> np.ndarray:
    """All 16 probabilities as <psi| P_l1 (x) P_l2 |psi>."""
    psi = state_vector(q.theta)
    table = np.empty((4, 4))
    for r, (a, b) in enumerate(
        ((q.a0, q.b0), (q.a0, q.b1), (q.a1, q.b0), (q.a1, q.b1))
    ):
        pa, pb = _projectors(a), _projectors(b)
        for c, (la, lb) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
            table[r, c] = psi @ np.kron(pa[la], pb[lb]) @ psi
    return table


def closed_form_table(q: QuantumStrategy) -> np.ndarray:
    """Same table from <A(a)B(b)> = cos a cos b + sin 2t sin a sin b and
    <A(a)> = cos a cos 2t, <B(b)> = cos b cos 2t."""
    c2, s2 = math.cos(2 * q.theta), math.sin(2 * q.theta)
    table = np.empty((4, 4))
    for r, (a, b) in enumerate(
        ((q.a0, q.b0), (q.a0, q.b1), (q.a1, q.b0), (q.a1, q.b1))
    ):
        ea = math.cos(a) * c2
        eb = math.cos(b) * c2
        eab = math.cos(a) * math.cos(b) + s2 * math.sin(a) * math.sin(b)
        table[r] = (1.0 + SIGN_A * ea + SIGN_B * eb + SIGN_AB * eab) / 4.0
    return table


def behavior_from_quantum(q: QuantumStrategy) -> Behavior:
    table = tensor_table(q)
    # Projector expectations are PSD; only rounding can push them below zero.
    return Behavior(np.clip(table, 0.0, 1.0))


def canonical_chsh_strategy() -> QuantumStrategy:
    """Maximally entangled state with Z, X for the first party and (Z +- X)/sqrt2 for the second."""
    return QuantumStrategy(THETA_MAX, 0.0, math.pi / 2, math.pi / 4, -math.pi / 4)


def tilt_for_theta(theta: float) -> float:
    """zeta = 2 / sqrt(1 + 2 tan^2(2 theta)), written to stay finite at pi/4."""
    c2, s2 = math.cos(2 * theta), math.sin(2 * theta)
    return 2.0 * c2 / math.sqrt(c2 * c2 + 2.0 * s2 * s2)


def theta_for_tilt(zeta: float) -> float:
    """Inverse of :func:`tilt_for_theta` on zeta in [0, 2)."""
    if not 0.0 <= zeta < 2.0:
        raise DomainError(f"no entangled tilted optimum for zeta={zeta}; need 0 <= zeta < 2")
    if zeta == 0.0:
        return THETA_MAX
    return 0.5 * math.atan(math.sqrt((4.0 / zeta**2 - 1.0) / 2.0))


def tilted_optimal_strategy(theta: float) -> tuple[QuantumStrategy, float]:
    """Measurements with tan(beta) = sin(2 theta) and the tilt they are optimal for."""
    if not 0.0 < theta <= THETA_MAX:
        raise DomainError(f"theta={theta} outside (0, pi/4]")
    beta = math.atan(math.sin(2 * theta))
    return QuantumStrategy(theta, 0.0, math.pi / 2, beta, -beta), tilt_for_theta(theta)
