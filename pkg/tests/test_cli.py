from pathlib import Path

import pytest

from dgkit import cli
from dgkit.cli import ArchivedReport, ParseError, SchemaVersionError, main, parse, serialize
from dgkit.dgcore import DgCategory
from dgkit.instances import category_instances, fixture_matrix

FIX = Path(__file__).resolve().parent.parent / "fixtures"


def run(capsys, *args):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", sorted(fixture_matrix()))
def test_round_trip(name):
    text = (FIX / name).read_text(encoding="utf-8")
    x = parse(text)
    assert serialize(x) == text
    assert cli.kind_of(x) == text.splitlines()[1].split(" ")[1]


def test_categories_parse_back_equal():
    for name, c in category_instances().items():
        d = parse(serialize(c))
        assert isinstance(d, DgCategory)
        assert d == c


def test_report_round_trip():
    r = ArchivedReport("t", False, ("a b", "c"))
    assert parse(serialize(r)) == r


def test_parse_errors():
    good = (FIX / "point").read_text(encoding="utf-8")
    with pytest.raises(SchemaVersionError):
        parse(good.replace("dgkit-archive 1", "dgkit-archive 9", 1))
    with pytest.raises(ParseError) as ei:
        parse(good.replace("kind category", "kind widget"))
    assert ei.value.field == "kind" and ei.value.line == 2
    with pytest.raises(ParseError) as ei:
        parse(good + "bogus 1 2\n")
    assert ei.value.field == "bogus"
    with pytest.raises(ParseError):
        parse("not a header\n")


def test_validate_and_cohom(capsys):
    assert run(capsys, "validate", FIX / "sphere2")[:2] == (0, "sphere2: ok\n")
    code, out, _ = run(capsys, "cohom", FIX / "sphere2", "--src", "S", "--dst", "S[2]")
    assert code == 0 and out == "H*(S,S[2]) = {-2:1, 0:1}\n"


def test_glue_and_holim(capsys, tmp_path):
    f = FIX / "point-to-sphere2"
    o = tmp_path / "g"
    code, _, _ = run(capsys, "glue", FIX / "point", FIX / "point", "--f1", f, "--f2", f,
                     "--objects", "e,_,_;_,e,_;e,e,id", "-o", o)
    assert code == 0
    G = cli.load(o)
    assert G.h_row("(e,0)", "(0,e)") == {1: 1, 3: 1}
    code, out, _ = run(capsys, "holim", "fiber", "--f1", f, "--f2", f, "--objects", "e,e,id")
    assert code == 0 and parse(out).h_row("(e,e)", "(e,e)") == {0: 1, 3: 1}
    code, _, err = run(capsys, "holim", "equalizer", "--f1", f, "--f2", f, "--objects", "e,0")
    assert code == 1 and "not invertible" in err


def test_tw_commands(capsys, tmp_path):
    o = tmp_path / "c"
    assert run(capsys, "tw", "cone", FIX / "sphere2", "--morphism", "S->S[2]:eps", "-o", o)[0] == 0
    assert cli.load(o) == cli.load(FIX / "cone-eps")
    code, out, _ = run(capsys, "tw", "check", o)
    assert code == 0 and "mc_check: True" in out
    assert run(capsys, "tw", "cone", FIX / "sphere2", "--morphism", "S->S:eps")[0] == 1


def test_schober_commands(capsys):
    code, out, _ = run(capsys, "schober", "mutate", FIX / "k3-sphere", "--index", "1,2,1",
                       "--against", "2,1,2")
    assert code == 0 and out.startswith("braid mutation tables: PASS")
    assert run(capsys, "schober", "mutate", FIX / "k3-sphere", "--index", "5")[0] == 1
    code, out, _ = run(capsys, "schober", "boundary", FIX / "kp-point")
    assert out.startswith("boundary triviality: NONTRIVIAL")
    assert run(capsys, "schober", "monodromy", FIX / "kphi-sphere", "--cycle", "nope")[0] == 1
    assert run(capsys, "schober", "validate", FIX / "chain-sphere")[0] == 0


def test_oracles(capsys):
    code, out, _ = run(capsys, "oracle", "directed-vs-glued", FIX / "sphere2", "--objects", "S,S,S")
    assert code == 0 and "PASS" in out.splitlines()[0]
    assert run(capsys, "oracle", "glsect", FIX / "k2-sphere")[0] == 0


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "validate", tmp_path / "missing")[0] == 2
    bad = tmp_path / "bad"
    bad.write_text("dgkit-archive 2\nkind category\n", encoding="utf-8")
    code, _, err = run(capsys, "validate", bad)
    assert code == 2 and "version" in err
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "cohom", FIX / "sphere2", "--src", "Q")[0] == 2


def test_seed_is_global(capsys):
    from dgkit import holim
    run(capsys, "--seed", "7", "validate", FIX / "point")
    assert holim.SEARCH_SEED == 7
    run(capsys, "validate", FIX / "point")
    assert holim.SEARCH_SEED == 0
