import json
import subprocess
import sys

import pytest

from marginrules.cli import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, EXIT_WITNESS, run
from marginrules.fixtures import fixture_text


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_rules_run(capsys):
    assert call(capsys, "rules", "run", "--rule", "minimax-margins", "fig1.toi") == (EXIT_OK, "winners: c\n", "")
    code, out, _ = call(capsys, "rules", "run", "--rule", "minimax-wv", "--format", "json", "fig1.toi")
    assert code == EXIT_OK and json.loads(out)["winners"] == ["a"]


def test_rules_list(capsys):
    code, out, _ = call(capsys, "rules", "list")
    names = [line.split("\t")[0] for line in out.splitlines()]
    assert code == EXIT_OK and "minimax-margins" in names and "even-odd" in names
    assert names == sorted(names)


def test_graph_dot(capsys):
    code, out, _ = call(capsys, "graph", "--kind", "wv", "govan.toi", "--dot")
    assert code == EXIT_OK and out.startswith("digraph winning_votes")
    for label in ("2992", "3654", "3578"):
        assert f'[label="{label}"]' in out


def test_margins_and_smith(capsys):
    code, out, _ = call(capsys, "margins", "fig1.toi")
    assert code == EXIT_OK and sorted(out.splitlines()) == ["a -> b: 3", "b -> c: 1", "c -> a: 2"]
    assert call(capsys, "smith", "fig1.toi")[1] == "smith: a, b, c\n"


def test_canonicalize_is_margin_determined(capsys, tmp_path):
    outs = []
    for name in ("ex211p.soi", "ex211q.soi"):
        target = tmp_path / f"{name}.canon"
        trace = tmp_path / f"{name}.trace"
        code, _, _ = call(capsys, "canonicalize", name, "-o", str(target), "--emit-trace",
                          "--trace-output", str(trace))
        assert code == EXIT_OK and trace.exists() and trace.read_text()
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_canonicalize_needs_linearize_for_ties(capsys):
    code, _, err = call(capsys, "canonicalize", "fig1.toi")
    assert code == EXIT_DOMAIN and "--linearize" in err
    assert call(capsys, "canonicalize", "--linearize", "fig1.toi")[0] == EXIT_OK


def test_axiom_check_exit_codes(capsys):
    code, out, _ = call(capsys, "axiom", "check", "--rule", "irv", "--axiom", "preferential-equality",
                        "--profile", "intro.soi", "--seed", "5")
    report = json.loads(out)
    assert code == EXIT_WITNESS and report["witness_count"] > 0 and report["seed"] == 5
    code, out, _ = call(capsys, "axiom", "check", "--rule", "minimax-margins", "--axiom", "neutral-reversal",
                        "--budget", "200")
    assert code == EXIT_OK and json.loads(out)["witness_count"] == 0


def test_same_invocation_same_output(capsys):
    argv = ["axiom", "check", "--rule", "plurality", "--axiom", "neutral-reversal", "--seed", "3", "--budget", "300"]
    assert call(capsys, *argv) == call(capsys, *argv)


def test_classify(capsys):
    code, out, _ = call(capsys, "classify", "--rule", "copeland", "--bases", "5", "--seed", "2")
    report = json.loads(out)
    assert code == EXIT_OK and report["seed"] == 2


def test_usage_errors(capsys):
    for argv in (["rules", "run", "--rule", "nope", "fig1.toi"], ["frobnicate"], [],
                 ["axiom", "check", "--rule", "irv"]):
        with pytest.raises(SystemExit) as info:
            run(argv)
        assert info.value.code == EXIT_USAGE
    capsys.readouterr()


def test_missing_and_bad_files(capsys, tmp_path):
    code, _, err = call(capsys, "smith", str(tmp_path / "absent.soi"))
    assert code == EXIT_DOMAIN and "no such election file" in err
    bad = tmp_path / "bad.soi"
    bad.write_text("# ALTERNATIVE NAME 1: a\n1: 1,1\n", encoding="utf-8")
    assert call(capsys, "smith", str(bad))[0] == EXIT_DOMAIN


def test_data_dir_env(capsys, tmp_path, monkeypatch):
    (tmp_path / "mine.toi").write_text(fixture_text("fig1"), encoding="utf-8")
    monkeypatch.setenv("MARGINRULES_DATA_DIR", str(tmp_path))
    assert call(capsys, "rules", "run", "--rule", "minimax-margins", "mine.toi")[1] == "winners: c\n"
    code, out, _ = call(capsys, "scan", "minimax", "--format", "json")
    assert code == EXIT_OK and json.loads(out)["hits"] == 1


def test_scans(capsys, tmp_path):
    for name in ("fig1", "govan", "intro"):
        (tmp_path / f"{name}.soi").write_text(fixture_text(name), encoding="utf-8")
    code, out, _ = call(capsys, "scan", "minimax", str(tmp_path), "--dataset", "mine")
    assert code == EXIT_OK and out.splitlines()[1].split()[0] == "mine"
    one = call(capsys, "scan", "irv", str(tmp_path), "--format", "json", "--workers", "1")
    two = call(capsys, "scan", "irv", str(tmp_path), "--format", "json", "--workers", "2")
    assert one == two and json.loads(one[1])["hits"] == 1


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "marginrules", "smith", "govan.toi"],
                          capture_output=True, text=True, check=False)
    assert done.returncode == 0 and done.stdout == "smith: Dornan, Flanagan, Hunter\n"
