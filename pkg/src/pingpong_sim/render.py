"""Machine-readable output: JSON payloads and CSV layouts.

The JSON object always carries the key set {config, counts, rates,
mutual_information, oracle}; blocks that do not apply to a subcommand
are null.  Exact rationals are rendered as "num/den" strings next to a
``*_decimal`` float; key order is fixed so identical inputs produce
byte-identical output.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from typing import IO, Iterable, Sequence

from .harness import RunConfig, RunStats
from .oracle import AttackReport
from .protocol import ProtocolConfig, RoundRecord

TRANSCRIPT_HEADER = (
    "round_index",
    "mode",
    "alice_bit",
    "eve_action",
    "eve_bit",
    "bell_outcome",
    "decoded",
    "detected",
    "stalled",
)

SWEEP_HEADER = (
    "param",
    "value",
    "value_decimal",
    "detection_probability",
    "detection_probability_decimal",
    "conditional_detection_control",
    "conditional_detection_control_decimal",
    "conditional_detection_sendback",
    "conditional_detection_sendback_decimal",
    "stall_probability",
    "stall_probability_decimal",
    "mi_ab_bits",
    "mi_ae_bits",
    "expected_rounds_to_detection",
    "expected_rounds_to_detection_decimal",
    "mc_detection_rate",
    "mc_stall_rate",
    "mc_ber",
    "mc_mi_ab_bits",
)


def fraction_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _rational_pair(block: dict, name: str, value: Fraction | None) -> None:
    block[name] = None if value is None else fraction_str(value)
    block[f"{name}_decimal"] = None if value is None else float(value)


def _joint_object(joint) -> dict | None:
    if joint is None:
        return None
    return {
        f"{a}{b}": fraction_str(joint[a][b]) for a in (0, 1) for b in (0, 1)
    }


def protocol_config_block(config: ProtocolConfig, attack: str) -> dict:
    return {
        "variant": config.variant.value,
        "attack": attack,
        "control_prob": fraction_str(config.control_prob),
        "c0": fraction_str(config.sendback_split),
        "receipt": "on" if config.receipt_enabled else "off",
    }


def run_config_block(config: RunConfig) -> dict:
    block = protocol_config_block(config.protocol, config.strategy)
    block["rounds"] = config.rounds
    block["seed"] = config.seed
    if config.bit_pattern is None:
        block["bits"] = "random"
    else:
        block["bits"] = "pattern:" + "".join(str(b) for b in config.bit_pattern)
    block["stop_on_detection"] = config.stop_on_detection
    return block


def oracle_block(report: AttackReport) -> dict:
    block: dict = {}
    _rational_pair(block, "detection_probability", report.detection_probability)
    _rational_pair(block, "conditional_detection_control", report.conditional_detection_control)
    _rational_pair(block, "conditional_detection_sendback", report.conditional_detection_sendback)
    _rational_pair(block, "stall_probability", report.stall_probability)
    _rational_pair(block, "message_rate", report.message_rate)
    _rational_pair(block, "control_measure_rate", report.control_measure_rate)
    _rational_pair(block, "control_sendback_rate", report.control_sendback_rate)
    _rational_pair(block, "bit_error_probability", report.bit_error_probability)
    _rational_pair(block, "anomaly_probability", report.anomaly_probability)
    block["message_joint"] = _joint_object(report.message_joint)
    block["eve_joint"] = _joint_object(report.eve_joint)
    block["mi_ab_bits"] = report.mi_ab_bits
    block["mi_ae_bits"] = report.mi_ae_bits
    _rational_pair(block, "expected_rounds_to_detection", report.expected_rounds_to_detection)
    return block


def counts_block(stats: RunStats) -> dict:
    return {
        "rounds_executed": stats.rounds_executed,
        "message_rounds": stats.message_rounds,
        "control_measure_rounds": stats.control_measure_rounds,
        "control_sendback_rounds": stats.control_sendback_rounds,
        "bit_errors": stats.bit_errors,
        "anomalies": stats.anomalies,
        "detections": stats.detections,
        "stalls": stats.stalls,
        "first_detection_round": stats.first_detection_round,
        "joint_ab": [list(row) for row in stats.joint_ab],
        "joint_ae": [list(row) for row in stats.joint_ae],
    }


def rates_block(stats: RunStats) -> dict:
    ber_ci = stats.ber_interval()
    det_ci = stats.detection_rate_interval()
    return {
        "ber": stats.ber,
        "ber_ci95": list(ber_ci) if ber_ci is not None else None,
        "detection_rate": stats.detection_rate,
        "detection_rate_ci95": list(det_ci),
        "stall_rate": stats.stall_rate,
        "message_rate": stats.message_rate,
        "control_measure_rate": stats.control_measure_rate,
        "control_sendback_rate": stats.control_sendback_rate,
    }


def oracle_payload(report: AttackReport) -> dict:
    return {
        "config": protocol_config_block(report.config, report.strategy),
        "counts": None,
        "rates": None,
        "mutual_information": {
            "mi_ab_bits": report.mi_ab_bits,
            "mi_ae_bits": report.mi_ae_bits,
        },
        "oracle": oracle_block(report),
    }


def run_payload(config: RunConfig, stats: RunStats, report: AttackReport) -> dict:
    return {
        "config": run_config_block(config),
        "counts": counts_block(stats),
        "rates": rates_block(stats),
        "mutual_information": {
            "mi_ab_bits": stats.mi_ab_bits,
            "mi_ae_bits": stats.mi_ae_bits,
        },
        "oracle": oracle_block(report),
    }


def render_json(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def transcript_row(record: RoundRecord) -> list[str]:
    return [
        _csv_cell(record.round_index),
        record.mode.value,
        _csv_cell(record.alice_bit),
        record.eve_action,
        _csv_cell(record.eve_bit),
        "" if record.bell_outcome is None else record.bell_outcome.value,
        _csv_cell(record.decoded),
        _csv_cell(record.detected),
        _csv_cell(record.stalled),
    ]


def write_transcript(stream: IO[str], records: Iterable[RoundRecord]) -> int:
    """Write the per-round CSV transcript; returns the number of data rows."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(TRANSCRIPT_HEADER)
    rows = 0
    for record in records:
        writer.writerow(transcript_row(record))
        rows += 1
    return rows


def sweep_row(
    param: str,
    value: Fraction,
    report: AttackReport,
    stats: RunStats | None = None,
) -> list[str]:
    def pair(fraction: Fraction | None) -> list[str]:
        if fraction is None:
            return ["", ""]
        return [fraction_str(fraction), _csv_cell(float(fraction))]

    row = [param, *pair(value)]
    row += pair(report.detection_probability)
    row += pair(report.conditional_detection_control)
    row += pair(report.conditional_detection_sendback)
    row += pair(report.stall_probability)
    row.append(_csv_cell(report.mi_ab_bits))
    row.append(_csv_cell(report.mi_ae_bits))
    row += pair(report.expected_rounds_to_detection)
    if stats is None:
        row += ["", "", "", ""]
    else:
        row.append(_csv_cell(stats.detection_rate))
        row.append(_csv_cell(stats.stall_rate))
        row.append(_csv_cell(stats.ber))
        row.append(_csv_cell(stats.mi_ab_bits))
    return row


def write_sweep(stream: IO[str], rows: Iterable[Sequence[str]]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow(row)
