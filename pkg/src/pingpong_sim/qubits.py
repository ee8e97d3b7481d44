"""One- and two-qubit state algebra for the protocol simulator.

Two-qubit amplitudes are ordered over the computational basis
|00>, |01>, |10>, |11>, where the first bit belongs to Bob's home qubit
and the second to the travel-slot qubit.  The ordering matters: the
psi Bell states are symmetric but |01> and |10> are not.

All states are unit vectors.  Amplitudes are stored as complex doubles
even though every protocol-reachable state is real; the extra
generality is deliberate.  Measurements are split into a pure
distribution query and a pure collapse so that exhaustive enumeration
and Monte Carlo sampling can share one code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

NORM_TOL = 1e-12
_PROB_FLOOR = 1e-12

_R = math.sqrt(0.5)  # 1/sqrt(2)


class StateError(ValueError):
    """Raised for amplitude vectors that are not normalized."""


class ZeroProbabilityError(ValueError):
    """Raised when collapsing onto an outcome of probability zero."""


class BellOutcome(Enum):
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"


#: Index order used by bell_coefficients / bell_distribution.
BELL_ORDER = (
    BellOutcome.PSI_PLUS,
    BellOutcome.PSI_MINUS,
    BellOutcome.PHI_PLUS,
    BellOutcome.PHI_MINUS,
)


class QubitSlot(Enum):
    HOME_B = "home"
    TRAVEL = "travel"


class SingleKind(Enum):
    ZERO = "0"
    ONE = "1"
    PLUS = "+"
    MINUS = "-"


def _check_norm(amps: tuple[complex, ...]) -> None:
    total = 0.0
    for a in amps:
        total += a.real * a.real + a.imag * a.imag
    if abs(total - 1.0) > NORM_TOL:
        raise StateError(f"state norm^2 is {total!r}, not 1 within {NORM_TOL}")


@dataclass(frozen=True, slots=True)
class PairState:
    """Normalized state of (home qubit, travel qubit)."""

    amps: tuple[complex, complex, complex, complex]

    def __post_init__(self) -> None:
        object.__setattr__(self, "amps", tuple(complex(a) for a in self.amps))
        if len(self.amps) != 4:
            raise StateError("a pair state needs exactly 4 amplitudes")
        _check_norm(self.amps)


@dataclass(frozen=True, slots=True)
class SingleState:
    """Normalized state of one lone qubit (e.g. an injected fresh one)."""

    amps: tuple[complex, complex]

    def __post_init__(self) -> None:
        object.__setattr__(self, "amps", tuple(complex(a) for a in self.amps))
        if len(self.amps) != 2:
            raise StateError("a single-qubit state needs exactly 2 amplitudes")
        _check_norm(self.amps)


def _pair(amps: tuple[complex, complex, complex, complex]) -> PairState:
    # Internal fast path for amplitudes produced by norm-preserving ops.
    state = object.__new__(PairState)
    object.__setattr__(state, "amps", amps)
    return state


def _single(amps: tuple[complex, complex]) -> SingleState:
    state = object.__new__(SingleState)
    object.__setattr__(state, "amps", amps)
    return state


_BELL_STATES = {
    BellOutcome.PSI_PLUS: PairState((0.0, _R, _R, 0.0)),
    BellOutcome.PSI_MINUS: PairState((0.0, _R, -_R, 0.0)),
    BellOutcome.PHI_PLUS: PairState((_R, 0.0, 0.0, _R)),
    BellOutcome.PHI_MINUS: PairState((_R, 0.0, 0.0, -_R)),
}

_SINGLE_STATES = {
    SingleKind.ZERO: SingleState((1.0, 0.0)),
    SingleKind.ONE: SingleState((0.0, 1.0)),
    SingleKind.PLUS: SingleState((_R, _R)),
    SingleKind.MINUS: SingleState((_R, -_R)),
}


def make_bell(label: BellOutcome) -> PairState:
    """Return the named Bell state, sign convention psi/phi = (|01>±|10>)/√2, (|00>±|11>)/√2."""
    return _BELL_STATES[label]


def make_product(bit_home: int, bit_travel: int) -> PairState:
    """Return the computational product state |bit_home bit_travel>."""
    _check_bit(bit_home)
    _check_bit(bit_travel)
    amps = [0.0, 0.0, 0.0, 0.0]
    amps[(bit_home << 1) | bit_travel] = 1.0
    return PairState(tuple(amps))


def make_single(kind: SingleKind) -> SingleState:
    """Return |0>, |1>, |+> or |->."""
    return _SINGLE_STATES[kind]


def _check_bit(bit: int) -> None:
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")


def apply_z(state: PairState, slot: QubitSlot) -> PairState:
    """Apply sigma_z to one tensor factor: negates amplitudes whose slot bit is 1."""
    a = state.amps
    if slot is QubitSlot.TRAVEL:
        return _pair((a[0], -a[1], a[2], -a[3]))
    return _pair((a[0], a[1], -a[2], -a[3]))


def apply_z_single(state: SingleState) -> SingleState:
    """Apply sigma_z to a lone qubit."""
    a = state.amps
    return _single((a[0], -a[1]))


def z_distribution(state: PairState, slot: QubitSlot) -> tuple[float, float]:
    """Outcome probabilities (p0, p1) for a Z measurement of one slot."""
    a0, a1, a2, a3 = state.amps
    if slot is QubitSlot.TRAVEL:
        p1 = a1.real * a1.real + a1.imag * a1.imag + a3.real * a3.real + a3.imag * a3.imag
        p0 = a0.real * a0.real + a0.imag * a0.imag + a2.real * a2.real + a2.imag * a2.imag
    else:
        p1 = a2.real * a2.real + a2.imag * a2.imag + a3.real * a3.real + a3.imag * a3.imag
        p0 = a0.real * a0.real + a0.imag * a0.imag + a1.real * a1.real + a1.imag * a1.imag
    return p0, p1


def collapse_z(state: PairState, slot: QubitSlot, outcome: int) -> PairState:
    """Renormalized projection of one slot onto Z outcome 0 or 1."""
    _check_bit(outcome)
    prob = z_distribution(state, slot)[outcome]
    return _collapse_z_known(state, slot, outcome, prob)


def _collapse_z_known(
    state: PairState, slot: QubitSlot, outcome: int, prob: float
) -> PairState:
    # Shared with callers that already queried the distribution.
    if prob < _PROB_FLOOR:
        raise ZeroProbabilityError(f"Z outcome {outcome} has probability {prob!r}")
    scale = 1.0 / math.sqrt(prob)
    a = state.amps
    if slot is QubitSlot.TRAVEL:
        if outcome:
            return _pair((0j, a[1] * scale, 0j, a[3] * scale))
        return _pair((a[0] * scale, 0j, a[2] * scale, 0j))
    if outcome:
        return _pair((0j, 0j, a[2] * scale, a[3] * scale))
    return _pair((a[0] * scale, a[1] * scale, 0j, 0j))


def z_distribution_single(state: SingleState) -> tuple[float, float]:
    """Outcome probabilities (p0, p1) for a Z measurement of a lone qubit."""
    a0, a1 = state.amps
    return (
        a0.real * a0.real + a0.imag * a0.imag,
        a1.real * a1.real + a1.imag * a1.imag,
    )


def collapse_z_single(state: SingleState, outcome: int) -> SingleState:
    _check_bit(outcome)
    prob = z_distribution_single(state)[outcome]
    if prob < _PROB_FLOOR:
        raise ZeroProbabilityError(f"Z outcome {outcome} has probability {prob!r}")
    return make_single(SingleKind.ONE if outcome else SingleKind.ZERO)


def bell_coefficients(state: PairState) -> tuple[complex, complex, complex, complex]:
    """Coefficients of the state in the Bell basis, in BELL_ORDER."""
    a0, a1, a2, a3 = state.amps
    return (
        (a1 + a2) * _R,
        (a1 - a2) * _R,
        (a0 + a3) * _R,
        (a0 - a3) * _R,
    )


def bell_distribution(state: PairState) -> tuple[float, float, float, float]:
    """Bell-measurement probabilities, indexed by BELL_ORDER."""
    a0, a1, a2, a3 = state.amps
    c0 = (a1 + a2) * _R
    c1 = (a1 - a2) * _R
    c2 = (a0 + a3) * _R
    c3 = (a0 - a3) * _R
    return (
        c0.real * c0.real + c0.imag * c0.imag,
        c1.real * c1.real + c1.imag * c1.imag,
        c2.real * c2.real + c2.imag * c2.imag,
        c3.real * c3.real + c3.imag * c3.imag,
    )


def collapse_bell(state: PairState, outcome: BellOutcome) -> PairState:
    """Collapse onto one Bell state; the result is exactly make_bell(outcome)."""
    prob = bell_distribution(state)[BELL_ORDER.index(outcome)]
    if prob < _PROB_FLOOR:
        raise ZeroProbabilityError(f"Bell outcome {outcome.value} has probability {prob!r}")
    return make_bell(outcome)


def x_distribution(state: SingleState) -> tuple[float, float]:
    """Outcome probabilities (p_plus, p_minus) for an X measurement."""
    a0, a1 = state.amps
    plus = (a0 + a1) * _R
    minus = (a0 - a1) * _R
    return (
        plus.real * plus.real + plus.imag * plus.imag,
        minus.real * minus.real + minus.imag * minus.imag,
    )


def collapse_x(state: SingleState, outcome: int) -> SingleState:
    """Collapse onto |+> (outcome 0) or |-> (outcome 1)."""
    _check_bit(outcome)
    prob = x_distribution(state)[outcome]
    if prob < _PROB_FLOOR:
        raise ZeroProbabilityError(f"X outcome {outcome} has probability {prob!r}")
    return make_single(SingleKind.MINUS if outcome else SingleKind.PLUS)


def equal_up_to_global_phase(
    a: PairState | SingleState, b: PairState | SingleState, tol: float = 1e-9
) -> bool:
    """True iff a = lambda*b for some unit complex lambda, within tol in 2-norm."""
    if len(a.amps) != len(b.amps):
        raise ValueError("states live in different Hilbert spaces")
    overlap = sum(y.conjugate() * x for x, y in zip(a.amps, b.amps))
    # For unit vectors, min over phases of ||a - lambda*b||^2 is 2 - 2|<b|a>|.
    dist_sq = max(0.0, 2.0 - 2.0 * abs(overlap))
    return math.sqrt(dist_sq) <= tol
