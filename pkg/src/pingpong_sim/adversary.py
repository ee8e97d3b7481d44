"""Channel adversaries with hooks at the two transit points.

A strategy sees a read-only view of the channel (the qubits in transit
plus the public transcript so far, never Alice's or Bob's private state)
and answers with a :class:`ChannelAction`.  ``apply_action`` executes
the action against the custody registers, which track whether the
original travel qubit or an injected fresh qubit occupies the channel.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .protocol import AliceOperationAnnounce, Announcement, DecisionSource, Operation
from .qubits import (
    PairState,
    QubitSlot,
    SingleKind,
    SingleState,
    _collapse_z_known,
    apply_z,
    collapse_z_single,
    make_single,
    x_distribution,
    z_distribution,
    z_distribution_single,
)


class ProtocolIntegrityError(RuntimeError):
    """A channel action was applied to a custody state where it is illegal."""


class Transit(Enum):
    FORWARD = "forward"
    RETURN = "return"


class Occupant(Enum):
    ORIGINAL = "original"
    FRESH = "fresh"


class ActionKind(Enum):
    PASS = "pass"
    MEASURE_Z_THEN_FORWARD = "measure-z-forward"
    SUBSTITUTE_FRESH = "substitute-fresh"
    CAPTURE_AND_INJECT = "capture-inject"
    RE_ENCODE_AND_FORWARD = "reencode-forward"
    HOLD = "hold"
    FORWARD_HELD = "forward-held"


class ChannelAction(NamedTuple):
    kind: ActionKind
    fresh_kind: SingleKind | None = None
    bit: int | None = None


PASS = ChannelAction(ActionKind.PASS)
MEASURE_Z_THEN_FORWARD = ChannelAction(ActionKind.MEASURE_Z_THEN_FORWARD)
HOLD = ChannelAction(ActionKind.HOLD)
FORWARD_HELD = ChannelAction(ActionKind.FORWARD_HELD)


def capture_and_inject(kind: SingleKind) -> ChannelAction:
    return ChannelAction(ActionKind.CAPTURE_AND_INJECT, fresh_kind=kind)


def substitute_fresh(kind: SingleKind) -> ChannelAction:
    return ChannelAction(ActionKind.SUBSTITUTE_FRESH, fresh_kind=kind)


def re_encode_and_forward(bit: int) -> ChannelAction:
    return ChannelAction(ActionKind.RE_ENCODE_AND_FORWARD, bit=bit)


@dataclass(slots=True)
class Registers:
    """Custody state of the physical qubits during one round."""

    pair: PairState
    fresh: SingleState | None = None
    occupant: Occupant = Occupant.ORIGINAL
    held: bool = False


class ChannelView(NamedTuple):
    """What the adversary may inspect when her hook runs."""

    transit: Transit
    pair: PairState
    fresh: SingleState | None
    occupant: Occupant
    held: bool
    announcements: tuple[Announcement, ...]


class AttackStrategy:
    """Base adversary: touches nothing on either transit.

    Strategies whose behavior at a transit is a fixed action can declare
    it via ``forward_action`` / ``return_action`` instead of overriding
    the hook; the engine then skips building the channel view.
    """

    name = "none"
    forward_action: ChannelAction | None = None
    return_action: ChannelAction | None = None

    def on_forward(self, view: ChannelView, decisions: DecisionSource) -> ChannelAction:
        return self.forward_action or PASS

    def on_return(self, view: ChannelView, decisions: DecisionSource) -> ChannelAction:
        return self.return_action or PASS

    def reset(self) -> None:
        """Clear per-round state; called before every round."""


class HonestChannel(AttackStrategy):
    name = "none"


class ForwardMeasure(AttackStrategy):
    """Z-measure every qubit on its way from Bob to Alice, then forward it."""

    name = "forward-measure"
    forward_action = MEASURE_Z_THEN_FORWARD


class ReturnMeasure(AttackStrategy):
    """Z-measure every qubit on its way back from Alice to Bob, then forward it.

    Control-measure rounds have no return transit (Alice consumed the
    qubit), so this strategy never acts in them.
    """

    name = "return-measure"
    return_action = MEASURE_Z_THEN_FORWARD


class InterceptSubstitute(AttackStrategy):
    """Full man-in-the-middle: swap in a fresh |+>, read Alice's operation off it.

    The |+> injection is the unique computational-basis-unbiased choice
    that makes the later X readout of Alice's sigma_z deterministic.  On
    the way back Eve X-measures the fresh qubit and re-applies the
    learned operation to the captured original, which Bob then receives.
    """

    name = "intercept-substitute"

    def on_forward(self, view, decisions):
        return capture_and_inject(SingleKind.PLUS)

    def on_return(self, view, decisions):
        if view.occupant is not Occupant.FRESH or view.fresh is None:
            raise ProtocolIntegrityError("no injected qubit to read back")
        probs = x_distribution(view.fresh)
        readout = decisions.choose("eve_x", (0, 1), probs)
        return re_encode_and_forward(readout)


class HoldUntilAnnounce(AttackStrategy):
    """Delay the returning qubit until Alice's operation announcement is public.

    Once the announcement is out, forward the qubit directly if it was
    sent back unencoded, otherwise Z-measure it first.  If the protocol
    refuses to announce before Bob's receipt, the hold stalls the round.
    """

    name = "hold-until-announce"

    def on_return(self, view, decisions):
        for ann in view.announcements:
            if isinstance(ann, AliceOperationAnnounce):
                if ann.operation is Operation.SENT_BACK_UNENCODED:
                    return PASS
                return MEASURE_Z_THEN_FORWARD
        return HOLD


_STRATEGY_TYPES = (
    HonestChannel,
    ForwardMeasure,
    ReturnMeasure,
    InterceptSubstitute,
    HoldUntilAnnounce,
)

STRATEGY_NAMES = tuple(cls.name for cls in _STRATEGY_TYPES)

_REGISTRY = {cls.name: cls for cls in _STRATEGY_TYPES}


def make_strategy(name: str) -> AttackStrategy:
    """Instantiate a strategy by its stable CLI name."""
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise ValueError(
            f"unknown attack strategy {name!r}; expected one of {', '.join(STRATEGY_NAMES)}"
        ) from None


def apply_action(
    action: ChannelAction,
    transit: Transit,
    regs: Registers,
    decisions: DecisionSource,
) -> int | None:
    """Execute a channel action against the custody registers.

    Mutates ``regs`` in place and returns the bit Eve observed, if any.
    A PASS while a qubit is held releases it (same as FORWARD_HELD).
    """
    kind = action.kind

    if kind is ActionKind.PASS or kind is ActionKind.FORWARD_HELD:
        if kind is ActionKind.FORWARD_HELD and not regs.held:
            raise ProtocolIntegrityError("FORWARD_HELD without a held qubit")
        regs.held = False
        return None

    if kind is ActionKind.MEASURE_Z_THEN_FORWARD:
        if regs.occupant is Occupant.FRESH:
            assert regs.fresh is not None
            probs = z_distribution_single(regs.fresh)
            outcome = decisions.choose("eve_z", (0, 1), probs)
            regs.fresh = collapse_z_single(regs.fresh, outcome)
        else:
            probs = z_distribution(regs.pair, QubitSlot.TRAVEL)
            outcome = decisions.choose("eve_z", (0, 1), probs)
            regs.pair = _collapse_z_known(regs.pair, QubitSlot.TRAVEL, outcome, probs[outcome])
        regs.held = False
        return outcome

    if kind in (ActionKind.CAPTURE_AND_INJECT, ActionKind.SUBSTITUTE_FRESH):
        if regs.occupant is not Occupant.ORIGINAL:
            raise ProtocolIntegrityError("channel already holds a substituted qubit")
        if action.fresh_kind is None:
            raise ProtocolIntegrityError("substitution action carries no fresh state")
        regs.fresh = make_single(action.fresh_kind)
        regs.occupant = Occupant.FRESH
        return None

    if kind is ActionKind.RE_ENCODE_AND_FORWARD:
        if regs.occupant is not Occupant.FRESH:
            raise ProtocolIntegrityError("no captured qubit to re-encode")
        if action.bit not in (0, 1):
            raise ProtocolIntegrityError(f"re-encode bit must be 0 or 1, got {action.bit!r}")
        if action.bit == 1:
            regs.pair = apply_z(regs.pair, QubitSlot.TRAVEL)
        regs.fresh = None
        regs.occupant = Occupant.ORIGINAL
        regs.held = False
        # The carried bit is Eve's readout of the injected qubit.
        return action.bit

    if kind is ActionKind.HOLD:
        if transit is not Transit.RETURN:
            raise ProtocolIntegrityError("HOLD is only legal on the return transit")
        regs.held = True
        return None

    raise ProtocolIntegrityError(f"unhandled action kind {kind!r}")
