import json
import subprocess
import sys

import pytest

from schemata.cli import corpus_names, main


def cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def bad_file(tmp_path):
    f = tmp_path / "bad.sch"
    f.write_text("(function p (nat) bool)\n(assert (p 0))\n")
    return str(f)


def test_corpus_listing():
    assert {"intro_chain", "trace_tree", "depth_example", "dag_alt_all", "dag_all_probe"} <= set(corpus_names())


def test_prove_exit_codes(capsys):
    code, out, _ = cli(capsys, "prove", "corpus:intro_chain")
    assert code == 1 and out.startswith("unsat")
    code, out, _ = cli(capsys, "prove", "corpus:depth_example")
    assert code == 0 and out.startswith("sat")


def test_resource_limits(capsys):
    code, out, _ = cli(capsys, "prove", "corpus:dag_alt_all", "--max-nodes", "50")
    assert code == 3 and "node limit" in out
    code, out, _ = cli(capsys, "prove", "corpus:dag_alt_all", "--time-limit", "0.1")
    assert code == 3 and "time limit" in out


def test_witness(capsys):
    code, out, _ = cli(capsys, "prove", "corpus:depth_example", "--witness")
    assert "witness: A = (s (s 0)), B = 0" in out


def test_check_measure(capsys):
    code, out, _ = cli(capsys, "prove", "corpus:trace_tree", "--check-measure")
    assert code == 1 and "measure violations: 0" in out


def test_validate_reports_hint(capsys, bad_file):
    code, out, _ = cli(capsys, "validate", bad_file)
    assert code == 2
    assert "[A2]" in out and "rule body" in out and "(2:1)" in out


def test_prove_rejects_inadmissible(capsys, bad_file):
    code, _, err = cli(capsys, "prove", bad_file)
    assert code == 2 and "not admissible" in err


def test_validate_ok(capsys):
    assert cli(capsys, "validate", "corpus:trace_tree")[:2] == (0, "ok\n")


def test_parse_error_location(capsys, tmp_path):
    f = tmp_path / "broken.sch"
    f.write_text("(sort t :inductive\n")
    code, _, err = cli(capsys, "validate", str(f))
    assert code == 2 and str(f) in err


@pytest.mark.parametrize(
    "argv",
    [
        ["prove", "corpus:nope"],
        ["prove", "/nonexistent/file.sch"],
        ["prove", "corpus:intro_chain", "--backend", "z3"],
        ["oracle", "corpus:intro_chain"],
        ["oracle", "corpus:intro_chain", "--depth", "-1"],
        ["frobnicate"],
    ],
)
def test_usage_errors(capsys, argv):
    assert cli(capsys, *argv)[0] == 2


def test_unsupported_bridge(capsys, tmp_path):
    script = tmp_path / "shrug.py"
    script.write_text("import sys\nsys.stdin.read()\nprint('unknown')\n")
    code, out, _ = cli(capsys, "prove", "corpus:depth_example", "--backend", f"bridge:{sys.executable} {script}")
    assert code == 4 and "backend cannot decide" in out


@pytest.mark.parametrize("fmt", ["dot", "json"])
def test_dump_tree(capsys, tmp_path, fmt):
    out_file = tmp_path / f"tree.{fmt}"
    code, _, _ = cli(capsys, "prove", "corpus:trace_tree", "--dump-tree", str(out_file), "--format", fmt)
    assert code == 1
    text = out_file.read_text()
    if fmt == "dot":
        assert text.startswith("digraph") and "dashed" in text
    else:
        assert any(n["rule"] == "Loop" for n in json.loads(text)["nodes"])


def test_oracle_command(capsys):
    code, out, _ = cli(capsys, "oracle", "corpus:depth_example", "--depth", "2")
    assert code == 0 and out.startswith("SatAtDepth(A=(s 0), B=0)")
    code, out, _ = cli(capsys, "oracle", "corpus:intro_chain", "--depth", "3")
    assert code == 1 and out.startswith("UnsatUpTo(3)")


@pytest.mark.parametrize("name", ["intro_chain", "depth_example"])
def test_diff_command(capsys, name):
    code, out, _ = cli(capsys, "diff", f"corpus:{name}", "--depth", "3")
    assert code == 0 and out.startswith("CONSISTENT")


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "schemata", "prove", "corpus:intro_chain"], capture_output=True, text=True)
    assert r.returncode == 1 and r.stdout.startswith("unsat")
