"""Results CSV: writer, reader, and write-time invariant re-check."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import fields
from pathlib import Path

from ..errors import InvariantViolated, SchemaError
from .sweep import SweepConfig, SweepRecord

FORMAT_VERSION = 1
COLUMNS = (
    "n", "m", "w", "seed", "k", "lambda2", "lambda_k", "lambda_k1", "epsilon",
    "err_exact", "err_gdo", "trunc_bound", "est_bound", "total_bound", "runtime_ms",
)
INT_COLUMNS = {"n", "m", "w", "seed", "k"}
BOUND_COLUMNS = {"est_bound", "total_bound"}
SLACK = 1e-9


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".12g")


def _bound(value) -> str:
    return "inf" if value is None else _fmt(value)


def check_record(rec: SweepRecord) -> None:
    if rec.error is not None:
        return
    if rec.err_exact > rec.trunc_bound + SLACK:
        raise InvariantViolated(f"w={rec.w} seed={rec.seed} k={rec.k}: err_exact above truncation bound")
    if rec.total_bound is not None and rec.err_gdo > rec.total_bound + SLACK:
        raise InvariantViolated(f"w={rec.w} seed={rec.seed} k={rec.k}: err_gdo above total bound")


def render_csv(records, config: SweepConfig | None = None) -> str:
    if not records:
        raise ValueError("no records to write")
    records = sorted(records, key=lambda r: r.sort_key)
    for rec in records:
        check_record(rec)
    with_error = any(r.error is not None for r in records)
    buf = io.StringIO()
    buf.write(f"# format_version={FORMAT_VERSION}\n")
    if config is not None:
        g = config.gdo
        buf.write(
            f"# gdo beta={g.beta} step_size={g.step_size} iterations={g.iterations} "
            f"mode={g.mode} batch={g.batch}\n"
        )
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS + (("error",) if with_error else ()))
    for rec in records:
        row = []
        for col in COLUMNS:
            value = getattr(rec, col)
            row.append(_bound(value) if col in BOUND_COLUMNS else _fmt(value))
        if with_error:
            row.append(rec.error or "")
        writer.writerow(row)
    return buf.getvalue()


def write_csv(records, path, config: SweepConfig | None = None) -> None:
    Path(path).write_text(render_csv(records, config))


def _parse(col: str, text: str):
    if col in INT_COLUMNS:
        return int(text)
    if text == "":
        return None if col in BOUND_COLUMNS | {"runtime_ms"} else math.nan
    if text == "inf" and col in BOUND_COLUMNS:
        return None
    return float(text)


def read_csv(path) -> list[SweepRecord]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: no header")
    reader = csv.reader(lines)
    header = tuple(next(reader))
    if header[: len(COLUMNS)] != COLUMNS or len(header) - len(COLUMNS) not in (0, 1):
        raise SchemaError(f"{path}: unexpected header {header}")
    if len(header) > len(COLUMNS) and header[-1] != "error":
        raise SchemaError(f"{path}: unexpected extra column {header[-1]!r}")
    names = {f.name for f in fields(SweepRecord)}
    records = []
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(header):
            raise SchemaError(f"{path}: row {lineno} has {len(row)} fields")
        try:
            values = {col: _parse(col, text) for col, text in zip(COLUMNS, row)}
        except ValueError as exc:
            raise SchemaError(f"{path}: row {lineno}: {exc}") from exc
        if len(header) > len(COLUMNS):
            values["error"] = row[-1] or None
        records.append(SweepRecord(**{k: v for k, v in values.items() if k in names}))
    return records
