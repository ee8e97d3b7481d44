"""Reproducible Monte Carlo runner.

Each round draws from its own counter-based substream keyed by
(seed, round index) -- a splitmix64 mix-and-increment stream -- so a
run's transcript is a pure function of its configuration, independent
of whatever else executes concurrently.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .adversary import make_strategy
from .engine import run_round
from .oracle import mutual_information
from .protocol import ANOMALY, ProtocolConfig, RoundMode, RoundRecord

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix64(x: int) -> int:
    """splitmix64 finalizer (Stafford mix13): a strong 64-bit avalanche."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


class Substream:
    """Deterministic uniform [0,1) stream for one (seed, round) cell."""

    __slots__ = ("_state",)

    def __init__(self, seed: int, round_index: int):
        if not 0 <= seed <= _MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
        if round_index < 0:
            raise ValueError(f"round_index must be nonnegative, got {round_index!r}")
        self._state = _substream_state(_mix64(seed), round_index)

    def random(self) -> float:
        self._state = (self._state + _GAMMA) & _MASK64
        return (_mix64(self._state) >> 11) * 1.1102230246251565e-16  # 2**-53


def _substream_state(mixed_seed: int, round_index: int) -> int:
    return _mix64((mixed_seed + round_index * _GAMMA) & _MASK64)


def substream(seed: int, round_index: int) -> Substream:
    """The substream assigned to one round of one seeded run."""
    return Substream(seed, round_index)


class SampleSource:
    """DecisionSource that samples each choice from a uniform stream."""

    __slots__ = ("stream",)
    wants_exact = False

    def __init__(self, stream: Substream):
        self.stream = stream

    def choose(self, label: str, outcomes: Sequence, probs: Sequence):
        # Inlined Substream.random() incl. the splitmix64 finalizer:
        # this is the innermost hot path.
        stream = self.stream
        x = state = (stream._state + _GAMMA) & _MASK64
        stream._state = state
        x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
        u = ((x ^ (x >> 31)) >> 11) * 1.1102230246251565e-16
        if len(outcomes) == 2:
            p0 = probs[0]
            return outcomes[0] if u < (p0 if type(p0) is float else float(p0)) else outcomes[1]
        acc = 0.0
        for outcome, p in zip(outcomes, probs):
            acc += float(p)
            if u < acc:
                return outcome
        return outcomes[-1]


@dataclass(frozen=True)
class RunConfig:
    """One reproducible simulation run."""

    protocol: ProtocolConfig
    strategy: str
    rounds: int
    seed: int = 0
    bit_pattern: tuple[int, ...] | None = None  # None = uniform random bits
    stop_on_detection: bool = False

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds!r}")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.bit_pattern is not None:
            if len(self.bit_pattern) == 0:
                raise ValueError("bit_pattern must be nonempty (it is cycled)")
            if any(b not in (0, 1) for b in self.bit_pattern):
                raise ValueError("bit_pattern may contain only 0s and 1s")
        make_strategy(self.strategy)  # validate the name early


def iter_rounds(config: RunConfig) -> Iterator[RoundRecord]:
    """Yield round records in order; honors stop_on_detection.

    Pattern bits are consumed only by message rounds, cycling through
    the pattern.
    """
    strategy = make_strategy(config.strategy)
    if config.bit_pattern is None:
        def next_bit():
            return None
    else:
        pattern = itertools.cycle(config.bit_pattern)

        def next_bit():
            return next(pattern)

    protocol = config.protocol
    stop = config.stop_on_detection
    mixed_seed = _mix64(config.seed)
    # One stream object, re-based per round: identical states to
    # substream(seed, index) without per-round allocations.
    stream = object.__new__(Substream)
    source = SampleSource(stream)
    for index in range(config.rounds):
        stream._state = _substream_state(mixed_seed, index)
        record = run_round(protocol, strategy, source, round_index=index, next_bit=next_bit)
        yield record
        if stop and (record.detected or record.stalled):
            return


@dataclass(slots=True)
class RunStats:
    """Aggregate counters and derived rates for one run.

    Mode counters count completed rounds; a stalled round increments
    ``stalls`` only (its mode remains visible in the transcript), which
    keeps ``message_rounds == sum(joint_ab) + anomalies`` an identity.
    """

    rounds_executed: int = 0
    message_rounds: int = 0
    control_measure_rounds: int = 0
    control_sendback_rounds: int = 0
    bit_errors: int = 0
    anomalies: int = 0
    detections: int = 0
    stalls: int = 0
    first_detection_round: int | None = None
    joint_ab: list[list[int]] = field(default_factory=lambda: [[0, 0], [0, 0]])
    joint_ae: list[list[int]] = field(default_factory=lambda: [[0, 0], [0, 0]])

    def observe(self, record: RoundRecord) -> None:
        self.rounds_executed += 1
        if record.detected:
            self.detections += 1
            if self.first_detection_round is None:
                self.first_detection_round = record.round_index + 1
        if record.stalled:
            self.stalls += 1
        elif record.mode is RoundMode.CONTROL_MEASURE:
            self.control_measure_rounds += 1
        elif record.mode is RoundMode.CONTROL_SENDBACK:
            self.control_sendback_rounds += 1
        else:
            self.message_rounds += 1
            assert record.alice_bit is not None
            if record.decoded == ANOMALY:
                self.anomalies += 1
            else:
                assert record.decoded in (0, 1)
                self.joint_ab[record.alice_bit][record.decoded] += 1
                if record.decoded != record.alice_bit:
                    self.bit_errors += 1
        if (
            record.mode is RoundMode.MESSAGE
            and not record.stalled
            and record.eve_bit is not None
        ):
            assert record.alice_bit is not None
            self.joint_ae[record.alice_bit][record.eve_bit] += 1

    # -- derived rates -------------------------------------------------

    @property
    def ber(self) -> float | None:
        if self.message_rounds == 0:
            return None
        return self.bit_errors / self.message_rounds

    @property
    def detection_rate(self) -> float:
        return self.detections / self.rounds_executed

    @property
    def stall_rate(self) -> float:
        return self.stalls / self.rounds_executed

    @property
    def message_rate(self) -> float:
        return self.message_rounds / self.rounds_executed

    @property
    def control_measure_rate(self) -> float:
        return self.control_measure_rounds / self.rounds_executed

    @property
    def control_sendback_rate(self) -> float:
        return self.control_sendback_rounds / self.rounds_executed

    @property
    def mi_ab_bits(self) -> float | None:
        counts_total = sum(sum(row) for row in self.joint_ab)
        if counts_total == 0:
            return None
        return empirical_mutual_information(self.joint_ab)

    @property
    def mi_ae_bits(self) -> float | None:
        counts_total = sum(sum(row) for row in self.joint_ae)
        if counts_total == 0:
            return None
        return empirical_mutual_information(self.joint_ae)

    def ber_interval(self, z: float = 1.96) -> tuple[float, float] | None:
        if self.message_rounds == 0 or self.ber is None:
            return None
        return confidence_interval(self.ber, self.message_rounds, z)

    def detection_rate_interval(self, z: float = 1.96) -> tuple[float, float]:
        return confidence_interval(self.detection_rate, self.rounds_executed, z)


def aggregate(records: Iterable[RoundRecord]) -> RunStats:
    """Fold records into RunStats; equivalent to observe() per record.

    Local counters instead of attribute increments: this sits on the
    100k-rounds-per-second budget.
    """
    rounds = message = cm = sb = errors = anomalies = detections = stalls = 0
    first_detection = None
    ab = [0, 0, 0, 0]
    ae = [0, 0, 0, 0]
    mode_message = RoundMode.MESSAGE
    mode_cm = RoundMode.CONTROL_MEASURE
    for record in records:
        rounds += 1
        if record.detected:
            detections += 1
            if first_detection is None:
                first_detection = record.round_index + 1
        if record.stalled:
            stalls += 1
            continue
        mode = record.mode
        if mode is mode_message:
            message += 1
            bit = record.alice_bit
            decoded = record.decoded
            if decoded == 0 or decoded == 1:
                ab[(bit << 1) | decoded] += 1
                if decoded != bit:
                    errors += 1
            else:
                anomalies += 1
            eve = record.eve_bit
            if eve is not None:
                ae[(bit << 1) | eve] += 1
        elif mode is mode_cm:
            cm += 1
        else:
            sb += 1
    return RunStats(
        rounds_executed=rounds,
        message_rounds=message,
        control_measure_rounds=cm,
        control_sendback_rounds=sb,
        bit_errors=errors,
        anomalies=anomalies,
        detections=detections,
        stalls=stalls,
        first_detection_round=first_detection,
        joint_ab=[[ab[0], ab[1]], [ab[2], ab[3]]],
        joint_ae=[[ae[0], ae[1]], [ae[2], ae[3]]],
    )


def run_simulation(config: RunConfig) -> RunStats:
    """Execute the run and return its aggregate statistics."""
    return aggregate(iter_rounds(config))


def empirical_mutual_information(counts: Sequence[Sequence[int]]) -> float:
    """Plug-in mutual information (bits) from a 2x2 contingency table."""
    total = sum(sum(row) for row in counts)
    if total <= 0:
        raise ValueError("contingency table is empty")
    if any(c < 0 for row in counts for c in row):
        raise ValueError("contingency table has a negative count")
    joint = [[Fraction(counts[a][b], total) for b in (0, 1)] for a in (0, 1)]
    return mutual_information(joint)


def confidence_interval(p_hat: float, n: int, z: float) -> tuple[float, float]:
    """Normal-approximation interval for a proportion, clamped to [0, 1]."""
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n!r}")
    if not 0.0 <= p_hat <= 1.0:
        raise ValueError(f"p_hat must lie in [0, 1], got {p_hat!r}")
    half_width = z * math.sqrt(p_hat * (1.0 - p_hat) / n)
    return max(0.0, p_hat - half_width), min(1.0, p_hat + half_width)
