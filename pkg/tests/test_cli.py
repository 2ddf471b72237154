import pytest

from mtalearn import cli
from mtalearn.automaton import parse_mta
from mtalearn.equivalence import check_equiv
from mtalearn.fixtures import size_automaton
from mtalearn.learner import TeacherInconsistency
from mtalearn.trees import DagPool, parse_dag


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path, capsys):
    paths = {}
    for kind, extra in [("size", ()), ("padded-size", ()), ("example", ("--n", 10)),
                        ("chain-dag", ("--n", 10)), ("layered-circuit", ("--n", 4))]:
        p = tmp_path / f"{kind}.txt"
        assert run(capsys, "fixture", kind, *extra, "-o", p)[0] == 0
        paths[kind] = p
    p = tmp_path / "zero.mta"
    assert run(capsys, "fixture", "zero", "--like", paths["example"], "-o", p)[0] == 0
    paths["zero"] = p
    return paths


def test_eval(files, capsys):
    assert run(capsys, "eval", files["example"], files["chain-dag"]) == (0, "1\n", "")


def test_equiv_writes_counterexample(files, tmp_path, capsys):
    code, out, err = run(capsys, "equiv", files["example"], files["zero"])
    assert code == 0 and "not equivalent: 1 vs 0" in err
    g = parse_dag(out, DagPool())
    assert g.size <= 10
    ce = tmp_path / "ce.dag"
    code, out, _ = run(capsys, "equiv", files["example"], files["zero"], "-o", ce)
    assert "10 nodes" in out
    assert run(capsys, "eval", files["example"], ce)[1] == "1\n"


def test_equiv_equivalent(files, capsys):
    code, out, err = run(capsys, "equiv", files["size"], files["padded-size"], "--max-height", 3)
    assert (code, out) == (0, "equivalent\n") and "no difference" in err


def test_equiv_rand(files, tmp_path, capsys):
    code, out, _ = run(capsys, "equiv-rand", files["size"], files["padded-size"])
    assert code == 0 and out.startswith("equivalent (error<=2^-20 trials=")
    ex, zero = tmp_path / "ex4.mta", tmp_path / "zero4.mta"
    run(capsys, "fixture", "example", "--n", 4, "-o", ex)
    run(capsys, "fixture", "zero", "--like", ex, "-o", zero)
    code, out, _ = run(capsys, "equiv-rand", ex, zero)
    assert code == 0 and out.startswith("not equivalent")


def test_learn_and_minimize(files, tmp_path, capsys):
    out_path = tmp_path / "h.mta"
    tr = tmp_path / "t.log"
    code, out, _ = run(capsys, "learn", "--teacher", files["size"], "-o", out_path, "--transcript", tr, "--check")
    assert code == 0 and out.strip().endswith("DIM=2")
    h = parse_mta(out_path.read_text())
    assert check_equiv(h, size_automaton()).equivalent
    assert tr.read_text().splitlines()[-1] == "EQ 2 -> YES"
    code, out, err = run(capsys, "minimize", files["padded-size"], "--stats")
    assert code == 0 and parse_mta(out).dim == 2 and "DIM=2" in err


def test_product(files, capsys):
    code, out, _ = run(capsys, "product", files["size"], files["size"])
    assert code == 0 and parse_mta(out).dim == 4


def test_circuit_round_trip(files, tmp_path, capsys):
    ac = tmp_path / "d.ac"
    assert run(capsys, "to-acit", files["size"], files["padded-size"], "-o", ac)[0] == 0
    code, out, _ = run(capsys, "acit-test", ac)
    assert code == 0 and out.startswith("ZeroLikely error<=2^-20")
    # (1+1)*(1+1) - (1+1+1+1), zero through a subtraction gate
    small = tmp_path / "s.ac"
    small.write_text("gate a one\ngate b add a a\ngate c mul b b\ngate d add b b\ngate e sub c d\noutput e\n")
    assert run(capsys, "acit-test", small)[1].startswith("ZeroLikely")
    pos = tmp_path / "pos.mta"
    code, out, _ = run(capsys, "from-acit", small, "-o", pos)
    assert code == 0 and (tmp_path / "pos.neg.mta").exists()
    code, out, _ = run(capsys, "equiv", pos, tmp_path / "pos.neg.mta")
    assert out == "equivalent\n"
    code, out, err = run(capsys, "from-acit", files["layered-circuit"], "--height", 6)
    assert code == 0 and err == "height 6\n" and parse_mta(out).dim >= 1


def test_acit_test_nonzero(tmp_path, capsys):
    c = tmp_path / "c.ac"
    c.write_text("gate 0 one\ngate 1 add 0 0\ngate 2 mul 1 1\noutput 2\n")
    code, out, _ = run(capsys, "acit-test", c)
    assert code == 0 and out.startswith("NonZero modulus=") and "residue=4" in out


def test_bench_adversary(capsys):
    code, out, _ = run(capsys, "bench-adversary", "--n", 2, "--heavy", "f:2")
    assert code == 0
    fields = dict(kv.split("=") for kv in out.split())
    assert fields["lower_bound"] == "8" and fields["correct"] == "yes"
    assert fields["entries"] == fields["revealed"] == "8"
    assert int(fields["queries"]) >= 8


def test_runs_are_deterministic(files, capsys):
    for argv in (("fixture", "random", "--n", 3, "--seed", 4), ("bench-adversary", "--seed", 3),
                 ("learn", "--teacher", files["padded-size"])):
        assert run(capsys, *argv) == run(capsys, *argv)


def test_exit_codes(files, tmp_path, capsys, monkeypatch):
    bad = tmp_path / "bad.mta"
    bad.write_text("q\n")
    code, _, err = run(capsys, "minimize", bad)
    assert code == 1 and "bad.mta" in err
    assert run(capsys, "equiv", files["size"], files["example"])[0] == 1
    assert run(capsys, "eval", tmp_path / "missing.mta", files["chain-dag"])[0] == 1
    with pytest.raises(SystemExit) as e:
        cli.main(["no-such-command"])
    assert e.value.code == 1

    def lie(*a, **k):
        raise TeacherInconsistency("returned tree is not a counterexample", "bad-subtree")

    monkeypatch.setattr(cli, "lmta", lie)
    assert run(capsys, "learn", "--teacher", files["size"])[0] == 2
