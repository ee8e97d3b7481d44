"""Exhaustive single-round enumeration with exact rational probabilities.

Every random decision in a round is a discrete branch whose probability
is either a configured rational (mode coins) or a squared amplitude of a
protocol-reachable state, and the latter are all dyadic.  The
enumerator therefore snaps floating-point branch probabilities to exact
dyadic rationals (guarded to 1e-9) and walks the full decision tree of
``run_round`` itself, so the oracle and the sampler can never drift
apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .adversary import make_strategy
from .engine import run_round
from .protocol import (
    ANOMALY,
    Decoded,
    InvariantViolation,
    ProtocolConfig,
    RoundMode,
    RoundRecord,
)
from .qubits import BellOutcome

_SNAP_DENOMINATOR = 1 << 20
_SNAP_GUARD = Fraction(1, 10**9)


def exact_probability(value) -> Fraction:
    """Convert a branch probability to an exact rational.

    Fractions and ints pass through; floats are snapped to the nearest
    rational with denominator at most 2**20, which is exact for every
    probability the protocol can produce.  A snap that moves the value
    by more than 1e-9 raises, because it would mean a branch probability
    that is not actually dyadic.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    as_fraction = Fraction(value)
    snapped = as_fraction.limit_denominator(_SNAP_DENOMINATOR)
    if abs(snapped - as_fraction) > _SNAP_GUARD:
        raise InvariantViolation(f"branch probability {value!r} is not a dyadic rational")
    return snapped


class EnumSource:
    """DecisionSource that replays a prescribed branch path.

    Decisions beyond the prescribed prefix take the first branch of
    nonzero probability; the recorded trace lets the caller advance an
    odometer over all paths.
    """

    wants_exact = True

    def __init__(self, prescribed: tuple[int, ...] = ()):
        self._prescribed = prescribed
        self._position = 0
        self.trace: list[tuple[int, tuple[Fraction, ...]]] = []
        self.probability = Fraction(1)

    def choose(self, label: str, outcomes: Sequence, probs: Sequence):
        exact = tuple(exact_probability(p) for p in probs)
        if self._position < len(self._prescribed):
            index = self._prescribed[self._position]
        else:
            index = next(i for i, p in enumerate(exact) if p > 0)
        self._position += 1
        self.trace.append((index, exact))
        self.probability *= exact[index]
        return outcomes[index]

    def next_path(self) -> tuple[int, ...] | None:
        """Lexicographically next path with all-nonzero branches, or None."""
        for depth in range(len(self.trace) - 1, -1, -1):
            index, probs = self.trace[depth]
            for candidate in range(index + 1, len(probs)):
                if probs[candidate] > 0:
                    prefix = tuple(entry[0] for entry in self.trace[:depth])
                    return prefix + (candidate,)
        return None


def _iter_leaves(
    run_leaf: Callable[[EnumSource], RoundRecord],
) -> Iterator[tuple[RoundRecord, Fraction]]:
    path: tuple[int, ...] | None = ()
    while path is not None:
        source = EnumSource(path)
        record = run_leaf(source)
        yield record, source.probability
        path = source.next_path()


@dataclass(frozen=True)
class RoundOutcome:
    """Observable summary of one enumerated round, used as a merge key."""

    mode: RoundMode
    alice_bit: int | None
    decoded: Decoded | None
    bell_outcome: BellOutcome | None
    detected: bool
    stalled: bool
    eve_bit: int | None
    eve_action: str


def _summarize(record: RoundRecord) -> RoundOutcome:
    return RoundOutcome(
        mode=record.mode,
        alice_bit=record.alice_bit,
        decoded=record.decoded,
        bell_outcome=record.bell_outcome,
        detected=record.detected,
        stalled=record.stalled,
        eve_bit=record.eve_bit,
        eve_action=record.eve_action,
    )


def _outcome_sort_key(outcome: RoundOutcome):
    return (
        outcome.mode.value,
        -1 if outcome.alice_bit is None else outcome.alice_bit,
        str(outcome.decoded),
        "" if outcome.bell_outcome is None else outcome.bell_outcome.value,
        outcome.detected,
        outcome.stalled,
        -1 if outcome.eve_bit is None else outcome.eve_bit,
        outcome.eve_action,
    )


@dataclass(frozen=True)
class ExactDistribution:
    """Mutually exclusive round outcomes with probabilities summing to exactly 1."""

    entries: tuple[tuple[Fraction, RoundOutcome], ...]

    def __post_init__(self) -> None:
        total = sum((p for p, _ in self.entries), Fraction(0))
        if total != 1:
            raise InvariantViolation(f"outcome probabilities sum to {total}, not 1")

    def probability_where(self, predicate: Callable[[RoundOutcome], bool]) -> Fraction:
        return sum((p for p, o in self.entries if predicate(o)), Fraction(0))


def enumerate_round(
    config: ProtocolConfig,
    strategy_name: str,
    alice_bit: int | None = None,
) -> ExactDistribution:
    """Exact outcome distribution of a single round.

    ``alice_bit`` fixes the message bit; None draws it uniformly (the
    caller's marginal over both bits).
    """
    if alice_bit not in (None, 0, 1):
        raise ValueError(f"alice_bit must be 0, 1 or None, got {alice_bit!r}")

    def run_leaf(source: EnumSource) -> RoundRecord:
        return run_round(
            config,
            make_strategy(strategy_name),
            source,
            next_bit=lambda: alice_bit,
        )

    merged: dict[RoundOutcome, Fraction] = {}
    for record, probability in _iter_leaves(run_leaf):
        if probability == 0:
            continue
        key = _summarize(record)
        merged[key] = merged.get(key, Fraction(0)) + probability
    entries = tuple(
        (merged[key], key) for key in sorted(merged, key=_outcome_sort_key)
    )
    return ExactDistribution(entries)


def mutual_information(joint: Sequence[Sequence]) -> float:
    """Shannon mutual information, in bits, of a 2x2 joint distribution.

    Accepts exact rationals or floats; entries must be nonnegative and
    sum to 1 (exactly for rationals, to 1e-9 for floats).  The 0*log(0)
    convention is 0.  Rational inputs keep the log argument an exact
    ratio, so independent and perfectly correlated joints come out as
    exactly 0.0 and 1.0.
    """
    if len(joint) != 2 or any(len(row) != 2 for row in joint):
        raise ValueError("joint distribution must be 2x2")
    cells = [joint[a][b] for a in (0, 1) for b in (0, 1)]
    if any(c < 0 for c in cells):
        raise ValueError("joint distribution has a negative entry")
    total = sum(cells)
    if isinstance(total, (Fraction, int)):
        if total != 1:
            raise ValueError(f"joint distribution sums to {total}, not 1")
    elif abs(total - 1.0) > 1e-9:
        raise ValueError(f"joint distribution sums to {total!r}, not 1")
    row = [joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]]
    col = [joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]]
    bits = 0.0
    for a in (0, 1):
        for b in (0, 1):
            p = joint[a][b]
            if p > 0:
                bits += float(p) * math.log2(float(p / (row[a] * col[b])))
    return bits


@dataclass(frozen=True)
class AttackReport:
    """Exact per-round statistics for one (variant, strategy) pairing."""

    config: ProtocolConfig
    strategy: str
    detection_probability: Fraction
    conditional_detection_control: Fraction | None
    conditional_detection_sendback: Fraction | None
    stall_probability: Fraction
    message_rate: Fraction
    control_measure_rate: Fraction
    control_sendback_rate: Fraction
    message_joint: tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]] | None
    eve_joint: tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]] | None
    mi_ab_bits: float | None
    mi_ae_bits: float
    expected_rounds_to_detection: Fraction | None
    bit_error_probability: Fraction | None
    anomaly_probability: Fraction


def attack_report(config: ProtocolConfig, strategy_name: str) -> AttackReport:
    """Aggregate one round's exact distribution (uniform message bits) into a report.

    Rate fields count completed rounds: a stalled round contributes to
    ``stall_probability`` only, mirroring the sampler's counters.
    """
    dist = enumerate_round(config, strategy_name, alice_bit=None)

    detection = dist.probability_where(lambda o: o.detected)
    stall = dist.probability_where(lambda o: o.stalled)
    p_control = dist.probability_where(
        lambda o: o.mode is RoundMode.CONTROL_MEASURE and not o.stalled
    )
    p_sendback_any = dist.probability_where(lambda o: o.mode is RoundMode.CONTROL_SENDBACK)
    p_sendback_done = dist.probability_where(
        lambda o: o.mode is RoundMode.CONTROL_SENDBACK and not o.stalled
    )
    p_message_done = dist.probability_where(
        lambda o: o.mode is RoundMode.MESSAGE and not o.stalled
    )

    det_control = dist.probability_where(
        lambda o: o.detected and o.mode is RoundMode.CONTROL_MEASURE
    )
    det_sendback = dist.probability_where(
        lambda o: o.detected and o.mode is RoundMode.CONTROL_SENDBACK
    )

    joint = [[Fraction(0), Fraction(0)], [Fraction(0), Fraction(0)]]
    joint_mass = Fraction(0)
    eve = [[Fraction(0), Fraction(0)], [Fraction(0), Fraction(0)]]
    eve_mass = Fraction(0)
    anomaly = Fraction(0)
    errors = Fraction(0)
    for probability, outcome in dist.entries:
        if outcome.mode is not RoundMode.MESSAGE or outcome.stalled:
            continue
        if outcome.decoded == ANOMALY:
            anomaly += probability
        elif outcome.decoded in (0, 1):
            assert outcome.alice_bit is not None
            joint[outcome.alice_bit][outcome.decoded] += probability
            joint_mass += probability
            if outcome.decoded != outcome.alice_bit:
                errors += probability
        if outcome.eve_bit is not None:
            assert outcome.alice_bit is not None
            eve[outcome.alice_bit][outcome.eve_bit] += probability
            eve_mass += probability

    message_joint = None
    mi_ab: float | None = None
    ber: Fraction | None = None
    if joint_mass > 0:
        message_joint = tuple(
            tuple(cell / joint_mass for cell in row) for row in joint
        )
        mi_ab = mutual_information(message_joint)
        ber = errors / joint_mass

    eve_joint = None
    mi_ae = 0.0
    if eve_mass > 0:
        eve_joint = tuple(tuple(cell / eve_mass for cell in row) for row in eve)
        mi_ae = mutual_information(eve_joint)

    return AttackReport(
        config=config,
        strategy=strategy_name,
        detection_probability=detection,
        conditional_detection_control=(det_control / p_control) if p_control > 0 else None,
        conditional_detection_sendback=(
            det_sendback / p_sendback_any
        ) if p_sendback_any > 0 else None,
        stall_probability=stall,
        message_rate=p_message_done,
        control_measure_rate=p_control,
        control_sendback_rate=p_sendback_done,
        message_joint=message_joint,
        eve_joint=eve_joint,
        mi_ab_bits=mi_ab,
        mi_ae_bits=mi_ae,
        expected_rounds_to_detection=(1 / detection) if detection > 0 else None,
        bit_error_probability=ber,
        anomaly_probability=anomaly,
    )
