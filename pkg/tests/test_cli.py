import csv
import subprocess
import sys

import pytest

from catconv.cli import main
from catconv.io import parse_chain_csv, parse_report


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def chains_csv(tmp_path, capsys):
    path = tmp_path / "chains.csv"
    code, _, _ = invoke(
        capsys, "simulate", "--model", "dar1", "--p", "0.25,0.3,0.45", "--phi", "0.75",
        "--length", "1000", "--chains", "5", "--seed", "7", "--output", str(path),
    )
    assert code == 0
    return path


class TestSimulate:
    def test_wide_output(self, chains_csv):
        rows = list(csv.reader(chains_csv.open()))
        assert rows[0] == ["c1", "c2", "c3", "c4", "c5"]
        assert len(rows) == 1001
        assert {v for row in rows[1:] for v in row} <= {"1", "2", "3"}

    def test_deterministic(self, capsys):
        args = ("simulate", "--model", "dar1", "--p", "0.5,0.5", "--phi", "0.3", "--length", "50", "--chains", "2")
        assert invoke(capsys, *args)[1] == invoke(capsys, *args)[1]

    def test_ndarma_matches_dar1(self, capsys):
        common = ("--p", "0.25,0.3,0.45", "--length", "200", "--chains", "3", "--seed", "2")
        dar = invoke(capsys, "simulate", "--model", "dar1", "--phi", "0.4", *common)[1]
        nd = invoke(capsys, "simulate", "--model", "ndarma", "--phi-weights", "0.4", "--varphi-weights", "0.6", *common)[1]
        assert dar == nd

    def test_markov(self, capsys):
        code, out, _ = invoke(capsys, "simulate", "--model", "markov", "--transition", "0.9,0.1;0.1,0.9",
                              "--length", "20", "--chains", "2")
        assert code == 0 and len(out.splitlines()) == 21

    @pytest.mark.parametrize(
        "args",
        [
            ("--model", "dar1", "--p", "0.5,0.5", "--length", "10"),
            ("--model", "dar1", "--p", "0.5,0.6", "--phi", "0.2", "--length", "10"),
            ("--model", "dar1", "--p", "0.5,0.5", "--phi", "1.2", "--length", "10"),
            ("--model", "markov", "--transition", "0.9,0.2;0.1,0.9", "--length", "10"),
            ("--model", "dar1", "--p", "0.5,0.5", "--phi", "0.2", "--length", "0"),
            ("--model", "dar1", "--p", "a,b", "--phi", "0.2", "--length", "10"),
        ],
    )
    def test_usage_errors(self, capsys, args):
        code, _, err = invoke(capsys, "simulate", *args)
        assert code == 1
        assert err.strip().splitlines()[-1].startswith("catconv: error: usage:")


class TestDiagnose:
    def test_between_default_is_weiss(self, capsys, chains_csv):
        code, out, _ = invoke(capsys, "diagnose", "--input", str(chains_csv))
        assert code == 0
        report = parse_report(out)
        assert [e.outcome.method.value for e in report.evaluations] == ["weiss"]

    def test_transition_family_default(self, capsys, chains_csv):
        out = invoke(capsys, "diagnose", "--input", str(chains_csv), "--method-family", "transition")[1]
        assert parse_report(out).evaluations[0].outcome.method.value == "billingsley"

    def test_within(self, capsys, chains_csv):
        out = invoke(capsys, "diagnose", "--input", str(chains_csv), "--mode", "within", "--method", "hangartner")[1]
        assert [e.unit for e in parse_report(out).evaluations] == ["c1", "c2", "c3", "c4", "c5"]

    def test_sequential_jsonl(self, capsys, chains_csv, tmp_path):
        dest = tmp_path / "r.jsonl"
        code, out, _ = invoke(capsys, "diagnose", "--input", str(chains_csv), "--sequential", "20",
                              "--report-format", "jsonl", "--output", str(dest))
        assert code == 0 and out == ""
        report = parse_report(dest.read_text())
        assert [e.checkpoint for e in report.evaluations] == list(range(50, 1001, 50))

    def test_bootstrap_workers_do_not_change_output(self, capsys, chains_csv):
        args = ("diagnose", "--input", str(chains_csv), "--method", "mcboot", "--boot-B", "200", "--seed", "4")
        one = invoke(capsys, *args, "--workers", "1")[1]
        four = invoke(capsys, *args, "--workers", "4")[1]
        assert one == four

    def test_long_format_input(self, capsys, tmp_path):
        path = tmp_path / "long.csv"
        lines = ["chain,iter,value"] + [f"{c},{t},{'ab'[(t * c) % 2]}" for c in (1, 2) for t in range(1, 41)]
        path.write_text("\n".join(lines) + "\n")
        assert invoke(capsys, "diagnose", "--input", str(path), "--method", "billingsley")[0] == 0

    def test_missing_input_flag(self, capsys):
        code, _, err = invoke(capsys, "diagnose", "--method", "weiss")
        assert code == 1
        assert "usage:" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = invoke(capsys, "diagnose", "--input", str(tmp_path / "nope.csv"))
        assert code == 2
        assert err.startswith("catconv: error: data: cannot read")

    def test_malformed_file(self, capsys, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("chain,iter,value\n1,1,a\n1,1,,extra\n")
        code, _, err = invoke(capsys, "diagnose", "--input", str(path))
        assert code == 2
        assert err == "catconv: error: data: line 3: expected 3 fields (chain,iteration,value), got 4\n"

    def test_single_chain(self, capsys, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("c1\n1\n2\n1\n")
        assert invoke(capsys, "diagnose", "--input", str(path))[0] == 2

    def test_bad_window(self, capsys, chains_csv):
        code = invoke(capsys, "diagnose", "--input", str(chains_csv), "--mode", "within", "--window-fraction", "0.6")[0]
        assert code == 1

    def test_sequential_within_is_usage_error(self, capsys, chains_csv):
        assert invoke(capsys, "diagnose", "--input", str(chains_csv), "--mode", "within", "--sequential", "5")[0] == 1

    def test_unknown_flag(self, capsys):
        code, _, err = invoke(capsys, "diagnose", "--input", "x", "--bogus")
        assert code == 1 and "usage:" in err


class TestStudyCommands:
    def test_simstudy_outputs(self, capsys, tmp_path):
        code = invoke(capsys, "simstudy", "--lengths", "40", "--phis", "0.5", "--betas", "0,1",
                      "--replications", "5", "--boot-B", "10", "--output-dir", str(tmp_path))[0]
        assert code == 0
        rejection = list(csv.DictReader((tmp_path / "rejection.csv").open()))
        assert len(rejection) == 2 * 6
        assert len(list(csv.DictReader((tmp_path / "pvalues.csv").open()))) == 2 * 5 * 6
        assert (tmp_path / "concordance.csv").read_text().startswith("t,phi,family,method_a,method_b,rho")

    def test_bench(self, capsys):
        code, out, _ = invoke(capsys, "bench", "--chains", "2", "--categories", "2", "--lengths", "30",
                              "--reps", "2", "--boot-B", "5", "--methods", "weiss,mcboot")
        assert code == 0
        rows = list(csv.DictReader(out.splitlines()))
        assert [r["method"] for r in rows] == ["weiss", "mcboot"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "catconv", "simulate", "--model", "dar1", "--p", "0.5,0.5", "--phi", "0.5",
         "--length", "5", "--chains", "2", "--seed", "1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "c1,c2"
    bad = subprocess.run([sys.executable, "-m", "catconv", "diagnose"], capture_output=True, text=True, check=False)
    assert bad.returncode == 1


def test_round_trip_of_simulated_file(chains_csv):
    chains = parse_chain_csv(chains_csv)
    assert chains.s == 5 and chains.lengths == (1000,) * 5
