"""The round state machine shared by the Monte Carlo harness and the exact oracle.

``run_round`` drives one full round against a pluggable
:class:`~pingpong_sim.protocol.DecisionSource`, so sampling and
exhaustive enumeration execute the identical event ladder.
"""

from __future__ import annotations

from typing import Callable

from .adversary import (
    ActionKind,
    AttackStrategy,
    ChannelAction,
    ChannelView,
    Occupant,
    ProtocolIntegrityError,
    Registers,
    Transit,
    apply_action,
)
from .protocol import (
    AliceControlAnnounce,
    AliceOperationAnnounce,
    Announcement,
    BobReceipt,
    DecisionSource,
    InvariantViolation,
    Operation,
    ProtocolConfig,
    RoundMode,
    RoundRecord,
    Variant,
    decode,
    encode,
    coincidence_check,
    sendback_check,
)
from .qubits import (
    BELL_ORDER,
    BellOutcome,
    QubitSlot,
    _collapse_z_known,
    bell_distribution,
    collapse_z_single,
    make_bell,
    z_distribution,
    z_distribution_single,
)

_HALF = (0.5, 0.5)
_NORM_GUARD = 1e-9

# Hot-path aliases: module-global loads beat repeated enum attribute lookups.
_MESSAGE = RoundMode.MESSAGE
_CONTROL_MEASURE = RoundMode.CONTROL_MEASURE
_CONTROL_SENDBACK = RoundMode.CONTROL_SENDBACK
_MODIFIED = Variant.MODIFIED
_FORWARD = Transit.FORWARD
_RETURN = Transit.RETURN
_FRESH = Occupant.FRESH
_PASS_KIND = ActionKind.PASS
_FORWARD_HELD_KIND = ActionKind.FORWARD_HELD
_PSI_PLUS_STATE = make_bell(BellOutcome.PSI_PLUS)

BitSupplier = Callable[[], "int | None"]


def _uniform_bit() -> int | None:
    return None


def _consult(
    strategy: AttackStrategy,
    action: "ChannelAction | None",
    transit: Transit,
    regs: Registers,
    decisions: DecisionSource,
    announcements: list[Announcement],
    action_labels: list[str],
) -> int | None:
    """Run one adversary hook and apply its action; returns Eve's observed bit.

    ``action`` short-circuits the hook when the strategy declared a
    constant action for this transit.
    """
    if action is None:
        view = ChannelView(
            transit,
            regs.pair,
            regs.fresh,
            regs.occupant,
            regs.held,
            tuple(announcements) if announcements else (),
        )
        if transit is _FORWARD:
            action = strategy.on_forward(view, decisions)
        else:
            action = strategy.on_return(view, decisions)
    kind = action.kind
    if kind is _PASS_KIND and not regs.held:
        return None  # nothing to apply, nothing to record
    was_held = regs.held
    observed = apply_action(action, transit, regs, decisions)
    if kind is _PASS_KIND and was_held:
        kind = _FORWARD_HELD_KIND
    if kind is not _PASS_KIND:
        action_labels.append(kind.value)
    return observed


def run_round(
    config: ProtocolConfig,
    strategy: AttackStrategy,
    decisions: DecisionSource,
    round_index: int = 0,
    next_bit: BitSupplier = _uniform_bit,
) -> RoundRecord:
    """Execute one protocol round and return its record.

    Event order (decisions are consumed strictly in this order, which
    fixes the per-round draw order of a sampling source):

    1. mode selection: control-vs-message, then (modified variant,
       control branch only) measure-vs-sendback;
    2. message bit, only in message mode and only when ``next_bit``
       returns None (a fixed pattern consumes no draw);
    3. adversary forward-transit decisions;
    4. control-measure rounds: Alice's Z measurement (announced), then
       Bob's home-qubit Z measurement, then the coincidence check -- the
       round ends here, there is no return transit;
    5. other rounds: Alice encodes (message) or leaves the qubit
       untouched (send-back), then adversary return-transit decisions,
       possibly twice when a held qubit is released by a public
       operation announcement;
    6. Bob's Bell measurement and decode / send-back check.

    A held qubit that can never be released stalls the round (timeout):
    under the modified variant with receipts enabled Alice will not
    announce her operation before Bob's receipt, and under the original
    variant there is no operation announcement at all.

    Raises :class:`InvariantViolation` if the tracked state norm drifts
    beyond 1e-9.
    """
    strategy_type = type(strategy)
    if strategy_type.reset is not AttackStrategy.reset:
        strategy.reset()
    regs = Registers(pair=_PSI_PLUS_STATE)
    announcements: list[Announcement] = []
    action_labels: list[str] = []
    eve_bit: int | None = None
    modified = config.variant is _MODIFIED
    # A transit is consulted when the strategy overrides its hook or
    # declares a constant action for it.
    forward_dynamic = strategy_type.on_forward is not AttackStrategy.on_forward
    forward_const = strategy.forward_action
    return_dynamic = strategy_type.on_return is not AttackStrategy.on_return
    return_const = strategy.return_action

    # 1. Alice's mode coin(s).
    if decisions.wants_exact:
        mode_probs, split_probs = config.branch_probs
    else:
        mode_probs, split_probs = config.branch_probs_float
    control = decisions.choose("mode", (True, False), mode_probs)
    if control and modified:
        measure_branch = decisions.choose("control_branch", (True, False), split_probs)
    else:
        measure_branch = True
    if control:
        mode = _CONTROL_MEASURE if measure_branch else _CONTROL_SENDBACK
    else:
        mode = _MESSAGE

    # 2. Message bit.
    alice_bit: int | None = None
    if mode is _MESSAGE:
        supplied = next_bit()
        if supplied is None:
            alice_bit = decisions.choose("alice_bit", (0, 1), _HALF)
        elif supplied in (0, 1):
            alice_bit = supplied
        else:
            raise ValueError(f"bit source produced {supplied!r}, expected 0, 1 or None")

    # 3. Forward transit.  An unhooked strategy passes by definition.
    if forward_dynamic or forward_const is not None:
        observed = _consult(
            strategy, None if forward_dynamic else forward_const,
            _FORWARD, regs, decisions, announcements, action_labels,
        )
        if observed is not None:
            eve_bit = observed

    # 4. Control-measure: Alice consumes the qubit; no return transit.
    if mode is _CONTROL_MEASURE:
        if regs.occupant is _FRESH:
            assert regs.fresh is not None
            alice_result = decisions.choose(
                "alice_z", (0, 1), z_distribution_single(regs.fresh)
            )
            regs.fresh = collapse_z_single(regs.fresh, alice_result)
        else:
            probs = z_distribution(regs.pair, QubitSlot.TRAVEL)
            alice_result = decisions.choose("alice_z", (0, 1), probs)
            regs.pair = _collapse_z_known(
                regs.pair, QubitSlot.TRAVEL, alice_result, probs[alice_result]
            )
        announcements.append(AliceControlAnnounce(alice_result))
        probs = z_distribution(regs.pair, QubitSlot.HOME_B)
        bob_result = decisions.choose("bob_z", (0, 1), probs)
        regs.pair = _collapse_z_known(
            regs.pair, QubitSlot.HOME_B, bob_result, probs[bob_result]
        )
        return _finish(
            regs, round_index, mode, alice_bit, None, None,
            coincidence_check(alice_result, bob_result), False,
            action_labels, eve_bit, announcements,
        )

    # 5. Alice's operation, then the return transit.
    if mode is _MESSAGE:
        assert alice_bit is not None
        operation = Operation.ENCODED
        if regs.occupant is _FRESH:
            assert regs.fresh is not None
            regs.fresh = encode(regs.fresh, alice_bit)
        else:
            regs.pair = encode(regs.pair, alice_bit)
    else:
        operation = Operation.SENT_BACK_UNENCODED

    operation_announced = False
    stalled = False
    if return_dynamic or return_const is not None:
        while True:
            observed = _consult(
                strategy, None if return_dynamic else return_const,
                _RETURN, regs, decisions, announcements, action_labels,
            )
            if observed is not None:
                eve_bit = observed
            if not regs.held:
                break
            if modified and not config.receipt_enabled and not operation_announced:
                # Without a receipt requirement Alice reveals her operation
                # while Eve still holds the qubit; Eve gets to reconsider.
                announcements.append(AliceOperationAnnounce(operation))
                operation_announced = True
                continue
            stalled = True
            break

    if stalled:
        return _finish(
            regs, round_index, mode, alice_bit, None, None, False, True,
            action_labels, eve_bit, announcements,
        )

    if modified:
        if config.receipt_enabled:
            announcements.append(BobReceipt())
        if not operation_announced:
            announcements.append(AliceOperationAnnounce(operation))
            operation_announced = True

    # 6. Bob's Bell measurement.
    if regs.occupant is _FRESH:
        raise ProtocolIntegrityError(
            "a substituted qubit reached Bob's Bell measurement; "
            "the pair no longer describes the two qubits he holds"
        )
    outcome = decisions.choose("bob_bell", BELL_ORDER, bell_distribution(regs.pair))
    # A chosen outcome always has nonzero probability; collapse is its Bell state.
    regs.pair = make_bell(outcome)

    if mode is _MESSAGE:
        return _finish(
            regs, round_index, mode, alice_bit, outcome, decode(outcome), False, False,
            action_labels, eve_bit, announcements,
        )
    return _finish(
        regs, round_index, mode, alice_bit, outcome, None,
        sendback_check(outcome, config.phi_counts_as_detection), False,
        action_labels, eve_bit, announcements,
    )


def _finish(
    regs: Registers,
    round_index: int,
    mode: RoundMode,
    alice_bit: int | None,
    bell_outcome: BellOutcome | None,
    decoded,
    detected: bool,
    stalled: bool,
    action_labels: list[str],
    eve_bit: int | None,
    announcements: list[Announcement],
) -> RoundRecord:
    _guard_norm(regs)
    return RoundRecord(
        round_index,
        mode,
        alice_bit,
        bell_outcome,
        decoded,
        detected,
        stalled,
        "+".join(action_labels) if action_labels else "pass",
        eve_bit,
        tuple(announcements),
    )


def _guard_norm(regs: Registers) -> None:
    a0, a1, a2, a3 = regs.pair.amps
    total = (
        a0.real * a0.real + a0.imag * a0.imag
        + a1.real * a1.real + a1.imag * a1.imag
        + a2.real * a2.real + a2.imag * a2.imag
        + a3.real * a3.real + a3.imag * a3.imag
    )
    if abs(total - 1.0) > _NORM_GUARD:
        raise InvariantViolation(f"pair-state norm^2 drifted to {total!r}")
    if regs.fresh is not None:
        b0, b1 = regs.fresh.amps
        total = b0.real * b0.real + b0.imag * b0.imag + b1.real * b1.real + b1.imag * b1.imag
        if abs(total - 1.0) > _NORM_GUARD:
            raise InvariantViolation(f"fresh-qubit norm^2 drifted to {total!r}")
