"""Run outputs: per-round CSV, key=value summary line and JSON sidecar.

CSV columns (fixed):

    round          1-based round index
    skipped        1 if no action was awake, else 0
    chosen_action  played labels joined by ';' in label order (empty if skipped)
    sleeping       sleeping labels joined by ';' in label order
    algo_loss      loss of the played action as repr(float), empty if skipped

The sidecar is ``<csv stem>.summary.json`` and carries ``"schema": 1``.
"""

import csv
import json
import os
from fractions import Fraction
from numbers import Real
from typing import Any, Dict, Mapping, Optional

from sleepcomb.core import GameHistory
from sleepcomb.labels import format_action, format_labels
from sleepcomb.logging import get_logger

logger = get_logger(__name__)

CSV_COLUMNS = ("round", "skipped", "chosen_action", "sleeping", "algo_loss")
SUMMARY_SCHEMA = 1


def format_loss(value: Optional[Real]) -> str:
    return "" if value is None else repr(float(value))


def write_history_csv(history: GameHistory, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for record in history:
            writer.writerow(
                [
                    record.index,
                    int(record.skipped),
                    "" if record.action is None else format_action(record.action),
                    format_labels(record.sleeping),
                    format_loss(record.algo_loss),
                ]
            )
    logger.info("Wrote %d rounds to %s", len(history), path)


def _plain(value: Any) -> Any:
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, (Fraction, float)):
        return float(value)
    if isinstance(value, (int, str)):
        return value
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return str(value)


def format_summary(summary: Mapping[str, Any]) -> str:
    """One line of ``key=value`` pairs; whitespace inside values becomes ``_``."""
    parts = []
    for key, value in summary.items():
        plain = _plain(value)
        if isinstance(plain, float):
            text = repr(plain)
        elif isinstance(plain, bool):
            text = str(int(plain))
        elif plain is None:
            text = "-"
        else:
            text = str(plain)
        parts.append(f"{key}={'_'.join(text.split())}")
    return " ".join(parts)


def sidecar_path(csv_path: str) -> str:
    stem, _ = os.path.splitext(csv_path)
    return f"{stem}.summary.json"


def write_summary_json(summary: Mapping[str, Any], path: str) -> None:
    document: Dict[str, Any] = {"schema": SUMMARY_SCHEMA}
    document.update(_plain(dict(summary)))
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write("\n")


def seed_suffixed(path: str, seed: int) -> str:
    """``out.csv`` -> ``out.seed7.csv``."""
    stem, ext = os.path.splitext(path)
    return f"{stem}.seed{seed}{ext}"
