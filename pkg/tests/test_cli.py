"""End-to-end checks of the command line entry points via subprocess."""

import json
import subprocess
import sys

import numpy as np
import pytest

from zxwcalc.diagram import (
    Hadamard,
    ScalarBox,
    ZBox,
    compose_seq,
    identity_diagram,
    make_generator,
)
from zxwcalc.interpret import interpret, matrices_equal
from zxwcalc.io import parse_diagram, serialize_diagram


def _run(*args, stdin=None):
    return subprocess.run(
        [sys.executable, "-m", "zxwcalc.cli", *args],
        capture_output=True,
        text=True,
        input=stdin,
    )


def _write(tmp_path, name, diagram):
    path = tmp_path / name
    path.write_text(serialize_diagram(diagram))
    return str(path)


def test_interpret_prints_matrix(tmp_path):
    path = _write(tmp_path, "h.json", make_generator(Hadamard(), 2))
    proc = _run("interpret", path)
    assert proc.returncode == 0
    header, *rows = proc.stdout.strip().splitlines()
    assert "dimension=2" in header and "shape=2x2" in header
    assert len(rows) == 2
    assert "0.707106781187" in proc.stdout


def test_interpret_reads_stdin(tmp_path):
    text = serialize_diagram(identity_diagram(3, 1))
    proc = _run("interpret", "-", stdin=text)
    assert proc.returncode == 0
    assert "shape=3x3" in proc.stdout


def test_normalize_emits_parseable_diagram(tmp_path):
    h4 = make_generator(Hadamard(), 2)
    for _ in range(3):
        h4 = compose_seq(h4, make_generator(Hadamard(), 2))
    path = _write(tmp_path, "h4.json", h4)
    proc = _run("normalize", path, "--emit-diagram", "-")
    assert proc.returncode == 0
    summary, emitted = proc.stdout.split("\n", 1)[0], proc.stdout.splitlines()[-1]
    assert "dimension=2" in summary and "wires=2" in summary
    back = parse_diagram(emitted + "\n")
    # H^4 is the identity; its bent form is the 2-wire cup vector
    assert matrices_equal(interpret(back), np.array([[1.0], [0.0], [0.0], [1.0]]), 1e-9)


def test_equal_exit_codes(tmp_path):
    d = 3
    h2 = compose_seq(make_generator(Hadamard(), d), make_generator(Hadamard(), d))
    h4 = compose_seq(h2, h2)
    ident = identity_diagram(d, 1)
    a = _write(tmp_path, "a.json", h4)
    b = _write(tmp_path, "b.json", ident)
    c = _write(tmp_path, "c.json", h2)
    same = _run("equal", a, b)
    assert same.returncode == 0 and same.stdout.strip() == "equal"
    # H^2 swaps |1> and |2> at d=3, so it differs from the identity
    diff = _run("equal", c, b)
    assert diff.returncode == 1 and diff.stdout.strip() == "different"


def test_equal_across_dimensions_is_different(tmp_path):
    a = _write(tmp_path, "a.json", identity_diagram(2, 1))
    b = _write(tmp_path, "b.json", identity_diagram(3, 1))
    proc = _run("equal", a, b)
    assert proc.returncode == 1
    assert proc.stdout.strip() == "different"


def test_verify_rules_report(tmp_path):
    report = tmp_path / "report.jsonl"
    proc = _run(
        "verify-rules", "--dims", "2", "--samples", "2", "--seed", "5",
        "--report", str(report),
    )
    assert proc.returncode == 0
    lines = proc.stdout.strip().splitlines()
    assert lines[-1].startswith("all ")
    records = [json.loads(line) for line in report.read_text().splitlines()]
    assert len(records) == len(lines) - 1
    assert all(rec["pass"] for rec in records)
    assert {rec["d"] for rec in records} == {2}
    names = {rec["rule"] for rec in records}
    assert "S1" in names and "Lemma1" in names


def test_render_dot(tmp_path):
    path = _write(tmp_path, "z.json", make_generator(ZBox((0.5, 0.25), 1, 2), 3))
    proc = _run("render", path, "--format", "dot")
    assert proc.returncode == 0
    assert proc.stdout.startswith("digraph")


def test_missing_file_and_bad_json_exit_2(tmp_path):
    proc = _run("interpret", str(tmp_path / "nope.json"))
    assert proc.returncode == 2 and proc.stderr.strip()
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    proc = _run("interpret", str(bad))
    assert proc.returncode == 2 and proc.stderr.strip()


def test_unknown_subcommand_fails():
    proc = _run("frobnicate")
    assert proc.returncode == 2
