from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from burnside.cli import main

CORPUS = str(Path(__file__).resolve().parents[1] / "models" / "corpus.json")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "argv,code,expected",
    [
        (["validate", CORPUS], 0, "ok"),
        (["rho", CORPUS, "two"], 0, "+[D1] +[D2] -[D12]*A^1"),
        (["rho", CORPUS, "mult23", "--hat"], 0, "(-[D12]*A^1)*T^1 (+[D1])*T^2 (+[D2])*T^3"),
        (["rho", CORPUS, "mult23", "--d", "2"], 0, "+[D1]"),
        (["rho", CORPUS, "telescoping", "--normalize"], 0, "+[A^1]"),
        (["blowup-check", CORPUS, "two", "two-a"], 0, "rho invariant: yes"),
        (["blowup-check", CORPUS, "mult23", "mult23-b"], 1, "no (differs at d=1,5)"),
        (["fan", "2", "/", "1", "1", "--certify", "--euler"], 0, "euler: +1"),
        (["fan", "1,1/3,4", "--certify"], 0, "smooth: yes"),
        (["product", CORPUS, "two", "mult23", "--verify"], 0, "delta: 0"),
        (["boundary", CORPUS, "isolated", "--b-rational"], 0, "+[pt]@eta -[EZ]*A^1@z +[A^2]@z"),
        (["boundary", CORPUS, "node", "--b-rational"], 1, "B-rational: no"),
        (["specialize", CORPUS, "family"], 0, "+[A^2]"),
        (["specialize", CORPUS, "telescoping"], 0, "rational: yes"),
        (["specialize", CORPUS, "chain"], 1, "rational: no"),
        (["specialize", CORPUS, "smooth"], 0, "B-rational: yes"),
        (["rho-mu", CORPUS, "mult23", "--check"], 0, "yes"),
    ],
    ids=lambda v: " ".join(v[:3]) if isinstance(v, list) else str(v),
)
def test_commands(capsys, argv, code, expected):
    got, out, err = run(capsys, *argv)
    assert got == code, out + err
    assert expected in out


@pytest.mark.parametrize(
    "argv,fragment",
    [
        (["rho", CORPUS, "ghost"], "unknown id 'ghost'"),
        (["rho", "/nonexistent.json", "two"], "cannot read"),
        (["fan", "1", "2"], "error"),
        (["blowup-check", CORPUS, "two", "nope"], "unknown id"),
    ],
)
def test_input_errors(capsys, argv, fragment):
    code, out, err = run(capsys, *argv)
    assert code == 2 and fragment in err and not out


def test_syntax_error_position(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": "burnside-model/1",\n "models": [}\n')
    code, _, err = run(capsys, "validate", str(bad))
    assert code == 2 and "line 2, column" in err


def test_invalid_document_fails_validation(tmp_path, capsys):
    raw = json.loads(Path(CORPUS).read_text())
    two = next(m for m in raw["models"] if m["id"] == "two")
    two["strata"] = [s for s in two["strata"] if s["J"] != ["1"]]
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(raw))
    code, out, _ = run(capsys, "validate", str(path))
    assert code == 1 and "models.two:" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["rho", CORPUS, "triangle"],
        ["rho-mu", CORPUS, "mult23", "--check"],
        ["product", CORPUS, "two", "mult23", "--verify"],
        ["boundary", CORPUS, "odp", "--b-rational"],
        ["fan", "2/1,1", "--certify", "--euler"],
    ],
)
def test_json_mirrors_text(capsys, argv):
    c1, text, _ = run(capsys, *argv)
    c2, js, _ = run(capsys, "--json", *argv)
    assert c1 == c2
    data = json.loads(js)
    lines = text.splitlines()
    for key, value in data.items():
        shown = value if isinstance(value, str) else None
        if shown is not None:
            assert any(shown in line for line in lines), key


def test_corpus_command_matches_file(capsys):
    code, out, _ = run(capsys, "corpus")
    assert code == 0 and out == Path(CORPUS).read_text()


def test_byte_identical_across_processes():
    argv = [sys.executable, "-m", "burnside.cli", "product", CORPUS, "two", "mult23", "--verify"]
    outs = {subprocess.run(argv, capture_output=True, check=True).stdout for _ in range(3)}
    assert len(outs) == 1
