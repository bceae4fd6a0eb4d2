"""Chain CSV ingestion and report serialization.

Chain files are comma-separated with ``\\n`` or ``\\r\\n`` line endings, in
one of two layouts:

* long: ``chain,iteration,value`` rows, iterations ``1..n_i`` per chain in
  any order, chains may differ in length;
* wide: one column per chain, all columns the same length.

Values that all look like ASCII integers are read as integers, anything else
as text labels.  Reports are CSV (preceded by one ``#`` metadata line holding
JSON) or JSON lines; floats are written with 17 significant digits so a
report re-parses to exactly the values that were written.
"""

from __future__ import annotations

import csv
import io
import json
import re
from pathlib import Path

import numpy as np

from .bootstrap import BootstrapConfig
from .chain import SegmentSet, encode
from .diagnose import DiagnosticReport, DiagnosticRequest, Evaluation
from .errors import ParseError
from .stats import TestOutcome

__all__ = [
    "parse_chain_csv",
    "parse_chain_text",
    "write_wide_csv",
    "write_report",
    "format_report",
    "read_report",
    "parse_report",
    "write_rows",
]

_INT = re.compile(r"[+-]?[0-9]+\Z", re.ASCII)
REPORT_TAG = "catconv-report"
REPORT_VERSION = 1
REPORT_FIELDS = ("method", "mode", "unit", "checkpoint", "statistic", "df", "p", "warnings", "replicates", "reject")


def _rows(text: str):
    reader = csv.reader(io.StringIO(text, newline=""), strict=True)
    try:
        for row in reader:
            if row:
                yield reader.line_num, row
    except csv.Error as exc:
        raise ParseError(str(exc), reader.line_num) from None


def _coerce(values: list) -> list:
    if all(_INT.match(v) for v in values):
        return [int(v) for v in values]
    return values


def _looks_long(header: list) -> bool:
    if len(header) != 3:
        return False
    first, second = header[0].strip().lower(), header[1].strip().lower()
    return first.startswith("chain") and second in ("iter", "iteration", "t")


def parse_chain_text(text: str, layout: str = "auto", header: bool = True) -> SegmentSet:
    """Parse chain data from a string; see :func:`parse_chain_csv`."""
    rows = list(_rows(text))
    if not rows:
        raise ParseError("empty file")
    head = None
    if header:
        head = rows[0][1]
        rows = rows[1:]
        if not rows:
            raise ParseError("file has a header but no data")
    if layout == "auto":
        layout = "long" if head is not None and _looks_long(head) else "wide"
    if layout == "long":
        return _parse_long(rows)
    if layout == "wide":
        return _parse_wide(rows, head)
    raise ValueError(f"unknown layout {layout!r}")


def _parse_long(rows) -> SegmentSet:
    chains = {}
    for line, row in rows:
        if len(row) != 3:
            raise ParseError(f"expected 3 fields (chain,iteration,value), got {len(row)}", line)
        chain, iteration, value = row
        if not chain or not value:
            raise ParseError("empty chain or value field", line)
        if not _INT.match(iteration):
            raise ParseError(f"iteration {iteration!r} is not an integer", line)
        entries = chains.setdefault(chain, {})
        it = int(iteration)
        if it in entries:
            raise ParseError(f"duplicate iteration {it} for chain {chain}", line)
        entries[it] = value
    values, names = [], []
    for chain, entries in chains.items():
        its = sorted(entries)
        if its != list(range(1, len(its) + 1)):
            raise ParseError(f"chain {chain}: iterations must be contiguous 1..n")
        names.append(chain)
        values.append([entries[i] for i in its])
    flat = _coerce([v for seq in values for v in seq])
    out, pos = [], 0
    for seq in values:
        out.append(flat[pos:pos + len(seq)])
        pos += len(seq)
    return encode(out, names)


def _parse_wide(rows, head) -> SegmentSet:
    k = len(head) if head is not None else len(rows[0][1])
    names = head if head is not None else [str(i + 1) for i in range(k)]
    columns = [[] for _ in range(k)]
    for line, row in rows:
        if len(row) != k:
            raise ParseError(f"expected {k} fields, got {len(row)}", line)
        for col, value in zip(columns, row):
            if not value:
                raise ParseError("empty value; wide layout needs equal-length columns", line)
            col.append(value)
    flat = _coerce([v for col in columns for v in col])
    n = len(rows)
    return encode([flat[i * n:(i + 1) * n] for i in range(k)], names)


def parse_chain_csv(path, layout: str = "auto", header: bool = True) -> SegmentSet:
    """Read a chain file into a :class:`SegmentSet`.

    ``layout`` is ``"long"``, ``"wide"`` or ``"auto"``; auto picks long when
    the header reads ``chain,iteration,value`` and wide otherwise.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_chain_text(fh.read(), layout, header)


def write_wide_csv(columns, names, out) -> None:
    """Equal-length chains as a wide CSV with a header row."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(names)
    writer.writerows(zip(*columns))


def _num(x) -> str:
    return format(float(x), ".17g")


def _meta(report: DiagnosticReport) -> dict:
    req = report.request
    cp = req.checkpoints
    return {
        "format": REPORT_TAG,
        "version": REPORT_VERSION,
        "method": req.method.value,
        "mode": req.mode.value,
        "window_fraction": req.window_fraction,
        "checkpoints": list(cp) if isinstance(cp, tuple) else cp,
        "alpha": req.alpha,
        "B": req.bootstrap.B,
        "seed": req.bootstrap.seed,
        "null_model": req.bootstrap.null_model.value,
        "warnings": list(report.warnings),
    }


def _meta_json(meta: dict) -> str:
    parts = []
    for key, value in meta.items():
        text = _num(value) if isinstance(value, float) else json.dumps(value, separators=(",", ":"))
        parts.append(f"{json.dumps(key)}:{text}")
    return "{" + ",".join(parts) + "}"


def _record(report: DiagnosticReport, ev: Evaluation) -> list:
    o = ev.outcome
    return [
        o.method.value,
        report.request.mode.value,
        ev.unit,
        "" if ev.checkpoint is None else str(ev.checkpoint),
        _num(o.statistic),
        "" if o.df is None else str(o.df),
        _num(o.p_value),
        ";".join(o.warnings),
        "" if o.replicates is None else str(o.replicates),
        "1" if o.rejects(report.request.alpha) else "0",
    ]


def format_report(report: DiagnosticReport, fmt: str = "csv") -> str:
    out = io.StringIO()
    meta = _meta_json(_meta(report))
    if fmt == "csv":
        out.write(f"# {meta}\n")
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(REPORT_FIELDS)
        for ev in report.evaluations:
            writer.writerow(_record(report, ev))
    elif fmt == "jsonl":
        out.write(meta + "\n")
        for ev in report.evaluations:
            rec = dict(zip(REPORT_FIELDS, _record(report, ev)))
            parts = []
            for key in REPORT_FIELDS:
                value = rec[key]
                if key in ("statistic", "p"):
                    text = value
                elif key in ("checkpoint", "df", "replicates"):
                    text = value or "null"
                elif key == "reject":
                    text = "true" if value == "1" else "false"
                elif key == "warnings":
                    text = json.dumps(value.split(";") if value else [])
                else:
                    text = json.dumps(value)
                parts.append(f"{json.dumps(key)}:{text}")
            out.write("{" + ",".join(parts) + "}\n")
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return out.getvalue()


def write_report(report: DiagnosticReport, path, fmt: str = "csv") -> None:
    Path(path).write_text(format_report(report, fmt), encoding="utf-8", newline="")


def _request(meta: dict) -> DiagnosticRequest:
    cp = meta["checkpoints"]
    return DiagnosticRequest(
        method=meta["method"],
        mode=meta["mode"],
        window_fraction=meta["window_fraction"],
        checkpoints=tuple(cp) if isinstance(cp, list) else cp,
        alpha=meta["alpha"],
        bootstrap=BootstrapConfig(B=meta["B"], seed=meta["seed"], null_model=meta["null_model"]),
    )


def _evaluation(rec: dict) -> Evaluation:
    def opt_int(v):
        return None if v in ("", None) else int(v)

    warnings = rec["warnings"]
    if isinstance(warnings, str):
        warnings = warnings.split(";") if warnings else []
    outcome = TestOutcome(
        rec["method"],
        float(rec["statistic"]),
        float(rec["p"]),
        df=opt_int(rec["df"]),
        replicates=opt_int(rec["replicates"]),
        warnings=tuple(warnings),
    )
    return Evaluation(rec["unit"], outcome, opt_int(rec["checkpoint"]))


def parse_report(text: str) -> DiagnosticReport:
    """Inverse of :func:`format_report` for either format."""
    lines = text.split("\n")
    if text.startswith("# "):
        meta = json.loads(lines[0][2:])
        reader = csv.DictReader(io.StringIO("\n".join(lines[1:])))
        evaluations = [_evaluation(rec) for rec in reader]
    else:
        meta = json.loads(lines[0])
        evaluations = [_evaluation(json.loads(line)) for line in lines[1:] if line]
    if meta.get("format") != REPORT_TAG:
        raise ParseError("not a catconv report")
    return DiagnosticReport(_request(meta), tuple(evaluations), tuple(meta["warnings"]))


def read_report(path) -> DiagnosticReport:
    return parse_report(Path(path).read_text(encoding="utf-8"))


def write_rows(rows: list, out, fields=None) -> None:
    """Dict rows as CSV; floats use 17 significant digits."""
    if fields is None:
        fields = list(rows[0]) if rows else []
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_num(row[f]) if isinstance(row[f], (float, np.floating)) else row[f] for f in fields])
