"""Shared parsing of user-facing parameter strings (CLI flags, API fields)."""

from __future__ import annotations

import re
from fractions import Fraction

from .adversary import STRATEGY_NAMES
from .harness import RunConfig
from .protocol import ProtocolConfig, Variant

_PATTERN_RE = re.compile(r"^pattern:([01]+)$")
MAX_SEED = (1 << 64) - 1


def parse_probability(text: str, name: str = "probability") -> Fraction:
    """Parse "1/2"-style rationals or terminating decimals, exactly."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"{name} must be a rational like 1/2 or a decimal like 0.5, got {text!r}")
    if not 0 <= value <= 1:
        raise ValueError(f"{name} must lie in [0, 1], got {text!r}")
    return value


def parse_variant(text: str) -> Variant:
    try:
        return Variant(text)
    except ValueError:
        raise ValueError(f"variant must be 'original' or 'modified', got {text!r}") from None


def parse_receipt(text: str) -> bool:
    if text == "on":
        return True
    if text == "off":
        return False
    raise ValueError(f"receipt must be 'on' or 'off', got {text!r}")


def parse_attack(text: str) -> str:
    if text not in STRATEGY_NAMES:
        raise ValueError(
            f"unknown attack {text!r}; expected one of {', '.join(STRATEGY_NAMES)}"
        )
    return text


def parse_bits(text: str) -> tuple[int, ...] | None:
    """"random" -> None (uniform bits); "pattern:0110" -> cycled fixed bits."""
    if text == "random":
        return None
    match = _PATTERN_RE.match(text)
    if not match:
        raise ValueError(f"bits must be 'random' or 'pattern:<01-string>', got {text!r}")
    return tuple(int(ch) for ch in match.group(1))


def parse_seed(value: int) -> int:
    if not 0 <= value <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {value!r}")
    return value


def build_protocol_config(
    variant: str, control_prob: str, c0: str, receipt: str
) -> ProtocolConfig:
    return ProtocolConfig(
        variant=parse_variant(variant),
        control_prob=parse_probability(control_prob, "control-prob"),
        sendback_split=parse_probability(c0, "c0"),
        receipt_enabled=parse_receipt(receipt),
    )


def build_run_config(
    variant: str,
    attack: str,
    rounds: int,
    control_prob: str,
    c0: str,
    receipt: str,
    seed: int,
    bits: str,
    stop_on_detection: bool,
) -> RunConfig:
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds!r}")
    return RunConfig(
        protocol=build_protocol_config(variant, control_prob, c0, receipt),
        strategy=parse_attack(attack),
        rounds=rounds,
        seed=parse_seed(seed),
        bit_pattern=parse_bits(bits),
        stop_on_detection=stop_on_detection,
    )
