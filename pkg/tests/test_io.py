import io
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from catconv.bootstrap import BootstrapConfig
from catconv.chain import SegmentSet
from catconv.diagnose import DiagnosticReport, DiagnosticRequest, Evaluation, run
from catconv.errors import DataError, ParseError
from catconv.io import (
    REPORT_FIELDS,
    format_report,
    parse_chain_csv,
    parse_chain_text,
    parse_report,
    read_report,
    write_report,
    write_rows,
    write_wide_csv,
)
from catconv.simulate import Dar1Params, derive_stream, simulate_dar1
from catconv.stats import Method, TestOutcome


def decoded(text, **kw):
    return parse_chain_text(text, **kw).decode()


class TestParseChains:
    def test_long(self):
        s = parse_chain_text("chain,iter,value\n1,1,a\n1,2,b\n2,1,a\n2,2,a\n")
        assert s.decode() == [["a", "b"], ["a", "a"]]
        assert s.unit_names() == ("1", "2")

    def test_long_any_order_and_unequal_lengths(self):
        text = "chain,iteration,value\nB,2,3\nA,1,1\nB,1,2\nA,3,1\nA,2,2\n"
        s = parse_chain_text(text)
        assert s.unit_names() == ("B", "A")
        assert s.decode() == [[2, 3], [1, 2, 1]]

    def test_wide(self):
        assert decoded("c1,c2\n1,2\n1,2\n") == [[1, 1], [2, 2]]

    def test_crlf(self):
        assert decoded("c1,c2\r\n1,2\r\n1,2\r\n") == [[1, 1], [2, 2]]

    def test_no_header(self):
        s = parse_chain_text("1,2\n1,2\n2,2\n", header=False)
        assert s.decode() == [[1, 1, 2], [2, 2, 2]]
        assert s.unit_names() == ("1", "2")

    def test_explicit_layout_overrides_auto(self):
        # a three-column wide file that happens to start with "chain"
        s = parse_chain_text("chain_a,iter,x\n1,1,1\n2,2,2\n", layout="wide")
        assert s.s == 3

    def test_integer_labels_sort_numerically(self):
        s = parse_chain_text("a,b\n10,9\n2,10\n")
        assert s.alphabet.labels == (2, 9, 10)

    def test_mixed_labels_stay_text(self):
        s = parse_chain_text("a,b\n1,x\n2,1\n")
        assert s.alphabet.labels == ("1", "2", "x")

    @pytest.mark.parametrize(
        "text, line",
        [
            ("chain,iter,value\n1,1,a\n1,1,,extra\n", 3),
            ("chain,iter,value\n1,1,a\n1,1,b\n", 3),
            ("chain,iter,value\n1,1,a\n1,x,b\n", 3),
            ("c1,c2\n1,2\n1\n", 3),
            ("c1,c2\n1,2\n1,\n", 3),
        ],
    )
    def test_errors_carry_line(self, text, line):
        with pytest.raises(ParseError) as exc:
            parse_chain_text(text)
        assert exc.value.line == line
        assert str(exc.value).startswith(f"line {line}:")

    @pytest.mark.parametrize("text", ["", "\n\n", "c1,c2\n", "chain,iter,value\n1,1,a\n1,3,b\n"])
    def test_parse_errors(self, text):
        with pytest.raises(ParseError):
            parse_chain_text(text)

    def test_too_short_chain(self):
        with pytest.raises(DataError, match="too short"):
            parse_chain_text("c1\n1\n")

    def test_file(self, tmp_path):
        path = tmp_path / "chains.csv"
        path.write_bytes(b"c1,c2\r\n1,2\r\n2,1\r\n")
        assert parse_chain_csv(path).decode() == [[1, 2], [2, 1]]

    @given(st.lists(st.lists(st.integers(-5, 5), min_size=2, max_size=15), min_size=1, max_size=4))
    def test_long_round_trip(self, raw):
        lines = ["chain,iter,value"]
        for c, seq in enumerate(raw):
            lines += [f"c{c},{t + 1},{v}" for t, v in enumerate(seq)]
        assert decoded("\n".join(lines) + "\n") == raw

    def test_wide_writer_round_trip(self):
        out = io.StringIO()
        write_wide_csv([[1, 2, 3], [3, 3, 1]], ["x", "y"], out)
        assert out.getvalue() == "x,y\n1,3\n2,3\n3,1\n"
        assert decoded(out.getvalue()) == [[1, 2, 3], [3, 3, 1]]


def sample_report():
    gen = derive_stream(0, 0).generator()
    p = Dar1Params(np.array([0.2, 0.3, 0.5]), 0.4)
    chains = SegmentSet.from_codes([simulate_dar1(p, 400, gen) for _ in range(3)], 3)
    return run(chains, DiagnosticRequest(method="darboot", checkpoints=(40, 80, 200, 400), bootstrap=BootstrapConfig(B=25, seed=3)))


class TestReports:
    def test_csv_layout(self):
        req = DiagnosticRequest()
        outcome = TestOutcome(Method.WEISS, 2.0, 0.36787944117144233, df=2)
        text = format_report(DiagnosticReport(req, (Evaluation("all", outcome),)), "csv")
        lines = text.splitlines()
        assert lines[0].startswith("# ")
        assert json.loads(lines[0][2:])["format"] == "catconv-report"
        assert lines[1] == ",".join(REPORT_FIELDS)
        assert lines[2] == "weiss,between,all,,2,2,0.36787944117144233,,,0"
        assert REPORT_FIELDS[:8] == ("method", "mode", "unit", "checkpoint", "statistic", "df", "p", "warnings")

    @pytest.mark.parametrize("fmt", ["csv", "jsonl"])
    def test_round_trip(self, fmt):
        report = sample_report()
        assert report.warnings
        again = parse_report(format_report(report, fmt))
        assert again == report

    @pytest.mark.parametrize("fmt", ["csv", "jsonl"])
    def test_file_round_trip(self, fmt, tmp_path):
        report = sample_report()
        write_report(report, tmp_path / "r", fmt)
        assert read_report(tmp_path / "r") == report

    def test_sequential_records_ordered(self):
        text = format_report(sample_report(), "jsonl")
        records = [json.loads(line) for line in text.splitlines()[1:]]
        assert [r["checkpoint"] for r in records] == [80, 200, 400]
        assert all(r["replicates"] == 25 for r in records)

    @given(st.floats(0, 1e6, allow_nan=False), st.floats(0, 1))
    def test_floats_exact(self, stat, p):
        report = DiagnosticReport(DiagnosticRequest(), (Evaluation("all", TestOutcome("weiss", stat, p, df=3)),))
        again = parse_report(format_report(report))
        assert again.evaluations[0].outcome.statistic == stat
        assert again.evaluations[0].outcome.p_value == p

    def test_not_a_report(self):
        with pytest.raises(ParseError):
            parse_report('{"format":"other"}\n')

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            format_report(sample_report(), "xml")


def test_write_rows():
    out = io.StringIO()
    write_rows([{"a": 1, "b": 0.1}, {"a": 2, "b": np.float64(1 / 3)}], out)
    assert out.getvalue() == "a,b\n1,0.10000000000000001\n2,0.33333333333333331\n"
