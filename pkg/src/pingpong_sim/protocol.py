"""Round-level types and pure operations for both protocol variants.

In the original variant Alice either encodes a bit on the travel qubit
(message mode) or measures it in the computational basis and announces
the result (control mode).  The modified variant splits control mode:
with probability ``sendback_split`` Alice measures as before, otherwise
she returns the qubit untouched and Bob's Bell measurement acts as the
check (a psi-minus outcome flags tampering).  The modified variant can
additionally require Bob to acknowledge receipt of the returning qubit
before Alice reveals which operation she performed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple, Protocol, Sequence, Union

from .qubits import BellOutcome, PairState, SingleState, apply_z, apply_z_single, QubitSlot

#: Decode result for Bell outcomes outside the psi pair; unreachable honestly.
ANOMALY = "anomaly"

Decoded = Union[int, str]


class InvariantViolation(RuntimeError):
    """An internal engine invariant (e.g. norm preservation) was broken."""


class Variant(Enum):
    ORIGINAL = "original"
    MODIFIED = "modified"


class RoundMode(Enum):
    MESSAGE = "message"
    CONTROL_MEASURE = "control-measure"
    CONTROL_SENDBACK = "control-sendback"


class Operation(Enum):
    ENCODED = "encoded"
    SENT_BACK_UNENCODED = "sent-back-unencoded"


class BobReceipt(NamedTuple):
    """Bob's public confirmation that the returning qubit arrived."""


class AliceControlAnnounce(NamedTuple):
    """Alice's public Z-measurement result in a control-measure round."""

    result: int


class AliceOperationAnnounce(NamedTuple):
    """Alice's public statement of what she did to the returned qubit."""

    operation: Operation


Announcement = Union[BobReceipt, AliceControlAnnounce, AliceOperationAnnounce]


def _as_probability(value, name: str) -> Fraction:
    prob = Fraction(value)
    if not 0 <= prob <= 1:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return prob


@dataclass(frozen=True)
class ProtocolConfig:
    """Static parameters of one protocol instance.

    ``control_prob`` is the per-round probability of control mode;
    ``sendback_split`` divides control mode between measure-and-announce
    (that fraction) and send-back-unencoded (the rest).  The original
    variant ignores ``sendback_split`` and ``receipt_enabled``.
    """

    variant: Variant
    control_prob: Fraction = Fraction(1, 2)
    sendback_split: Fraction = Fraction(1, 2)
    receipt_enabled: bool = True
    phi_counts_as_detection: bool = True
    timeout_enabled: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "control_prob", _as_probability(self.control_prob, "control_prob")
        )
        object.__setattr__(
            self, "sendback_split", _as_probability(self.sendback_split, "sendback_split")
        )
        if not isinstance(self.variant, Variant):
            raise ValueError(f"variant must be a Variant, got {self.variant!r}")
        if not self.timeout_enabled:
            raise ValueError("timeout_enabled=False is unsupported: a held qubit would deadlock")

    @cached_property
    def branch_probs(
        self,
    ) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
        """((p_control, p_message), (p_measure, p_sendback)), exact."""
        return (
            (self.control_prob, 1 - self.control_prob),
            (self.sendback_split, 1 - self.sendback_split),
        )

    @cached_property
    def branch_probs_float(
        self,
    ) -> tuple[tuple[float, float], tuple[float, float]]:
        """branch_probs rounded to doubles, for sampling decision sources."""
        mode, split = self.branch_probs
        return (
            (float(mode[0]), float(mode[1])),
            (float(split[0]), float(split[1])),
        )


class RoundRecord(NamedTuple):
    """Everything observable about one executed round."""

    round_index: int
    mode: RoundMode
    alice_bit: int | None
    bell_outcome: BellOutcome | None
    decoded: Decoded | None
    detected: bool
    stalled: bool
    eve_action: str
    eve_bit: int | None
    announcements: tuple[Announcement, ...] = ()


class DecisionSource(Protocol):
    """Source of every random decision inside a round.

    ``choose`` must return exactly one element of ``outcomes``; ``probs``
    aligns with ``outcomes`` and sums to 1.  A sampling implementation
    draws; an enumerating implementation forks on each call.
    ``wants_exact`` tells the engine whether to hand over exact rational
    branch probabilities (enumeration) or plain doubles (sampling).
    """

    wants_exact: bool

    def choose(self, label: str, outcomes: Sequence, probs: Sequence): ...


def choose_mode(config: ProtocolConfig, u1: float, u2: float) -> RoundMode:
    """Map two uniform draws in [0,1) to the round mode.

    u1 < control_prob selects control mode; within control mode the
    modified variant uses u2 < sendback_split for measure-and-announce.
    """
    for u in (u1, u2):
        if not 0.0 <= u < 1.0:
            raise ValueError(f"uniform draw outside [0, 1): {u!r}")
    if u1 >= float(config.control_prob):
        return RoundMode.MESSAGE
    if config.variant is Variant.ORIGINAL:
        return RoundMode.CONTROL_MEASURE
    if u2 < float(config.sendback_split):
        return RoundMode.CONTROL_MEASURE
    return RoundMode.CONTROL_SENDBACK


def encode(state: PairState | SingleState, bit: int):
    """Encode one bit on the qubit in Alice's custody: identity for 0, sigma_z for 1."""
    if bit not in (0, 1):
        raise ValueError(f"message bit must be 0 or 1, got {bit!r}")
    if bit == 0:
        return state
    if isinstance(state, SingleState):
        return apply_z_single(state)
    return apply_z(state, QubitSlot.TRAVEL)


def decode(outcome: BellOutcome) -> Decoded:
    """Bob's bit from his Bell outcome; phi outcomes are anomalies."""
    if outcome is BellOutcome.PSI_PLUS:
        return 0
    if outcome is BellOutcome.PSI_MINUS:
        return 1
    return ANOMALY


def coincidence_check(alice_result: int, bob_result: int) -> bool:
    """Control-measure check: honest psi-plus results always differ, so coincidence flags an intruder."""
    for b in (alice_result, bob_result):
        if b not in (0, 1):
            raise ValueError(f"measurement result must be 0 or 1, got {b!r}")
    return alice_result == bob_result


def sendback_check(outcome: BellOutcome, phi_counts: bool) -> bool:
    """Send-back check: psi-minus (and optionally any phi outcome) flags an intruder."""
    if outcome is BellOutcome.PSI_MINUS:
        return True
    return phi_counts and outcome in (BellOutcome.PHI_PLUS, BellOutcome.PHI_MINUS)
