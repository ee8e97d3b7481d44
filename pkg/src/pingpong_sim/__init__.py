"""Simulator and exact analyzer for the entanglement ping-pong protocol.

Core pieces: a small exact qubit algebra (:mod:`.qubits`), the round
state machine (:mod:`.engine`), pluggable channel adversaries
(:mod:`.adversary`), an exhaustive rational-probability oracle
(:mod:`.oracle`), a reproducible Monte Carlo harness (:mod:`.harness`),
plus a CLI (:mod:`.cli`) and a FastAPI service (:mod:`.service`).
"""

from .adversary import STRATEGY_NAMES, AttackStrategy, make_strategy
from .engine import run_round
from .harness import (
    RunConfig,
    RunStats,
    confidence_interval,
    empirical_mutual_information,
    iter_rounds,
    run_simulation,
    substream,
)
from .oracle import AttackReport, ExactDistribution, attack_report, enumerate_round, mutual_information
from .protocol import ProtocolConfig, RoundMode, RoundRecord, Variant
from .qubits import (
    BellOutcome,
    PairState,
    QubitSlot,
    SingleKind,
    SingleState,
    make_bell,
    make_product,
    make_single,
)

__version__ = "0.1.0"

__all__ = [
    "AttackReport",
    "AttackStrategy",
    "BellOutcome",
    "ExactDistribution",
    "PairState",
    "ProtocolConfig",
    "QubitSlot",
    "RoundMode",
    "RoundRecord",
    "RunConfig",
    "RunStats",
    "SingleKind",
    "SingleState",
    "STRATEGY_NAMES",
    "Variant",
    "attack_report",
    "confidence_interval",
    "empirical_mutual_information",
    "enumerate_round",
    "iter_rounds",
    "make_bell",
    "make_product",
    "make_single",
    "make_strategy",
    "mutual_information",
    "run_round",
    "run_simulation",
    "substream",
]
