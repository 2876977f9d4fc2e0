import io
import json

import pytest

from hsmc.cli import main, witness_from_json, witness_to_json
from hsmc.kripke import Lasso, dump_kripke, fig1

PSI = "<E>(p & len1) -> <E>(len1 & <Abar>(p & !len1))"
MAINT = "(<E> p_maint_end) -> <A><E> p_operative"


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_check_k2_fails():
    code, text = run("check", "--builtin", "k2", "--semantics", "st", "--bound", "6", "--formula", PSI)
    assert code == 1
    assert "verdict: fails" in text and "s0' s1'" in text


def test_check_true_holds():
    code, text = run("check", "--builtin", "fig1", "--semantics", "st", "--bound", "3", "--formula", "true")
    assert code == 0 and "holds_in_bound" in text


def test_check_vending_lin_lasso():
    code, text = run("check", "--builtin", "vending", "--semantics", "lin", "--bound", "8", "--formula", MAINT, "--format", "json")
    doc = json.loads(text)
    assert code == 1 and doc["verdict"] == "fails"
    assert set(doc["witness"]["loop"]) == {"s8", "s9"}


@pytest.mark.parametrize(
    "sem,builtin,formula",
    [
        ("st", "k2", PSI),
        ("ct", "vending", "(<E> p_water) -> <E>(p_water & (<Abar>(len2 & <B> p_credit_2)))"),
        ("lin", "vending", MAINT),
        ("ltl", "kn1", "F p"),
        ("ctlstar", "fig1", "A(G p)"),
        ("finitary", "fig1", "Af(G p)"),
    ],
)
def test_witness_round_trip(sem, builtin, formula):
    base = ("check", "--builtin", builtin, "--semantics", sem, "--bound", "6", "--formula", formula)
    code, text = run(*base, "--format", "json")
    doc = json.loads(text)
    assert code == 1 and doc["verdict"] == "fails"
    code, text = run(*base, "--witness", json.dumps(doc["witness"]), "--format", "json")
    assert code == 1 and json.loads(text)["value"] is False


def test_witness_json_codec():
    for w in [("s0", "s1"), Lasso(("s0",), ("s1",)), (Lasso((), ("s0", "s1")), (0, 3))]:
        assert witness_from_json(json.loads(json.dumps(witness_to_json(w)))) == w


def test_check_structure_file(tmp_path):
    path = tmp_path / "k.yaml"
    path.write_text(dump_kripke(fig1(), "yaml"))
    code, _ = run("check", "--structure", str(path), "--semantics", "ltl", "--bound", "4", "--formula", "G(p -> X q)")
    assert code == 0


def test_formula_file(tmp_path):
    path = tmp_path / "f.txt"
    path.write_text("<B> p\n")
    code, _ = run("check", "--builtin", "fig1", "--formula-file", str(path))
    assert code == 1


def test_parse_error_exit_two(capsys):
    code, _ = run("check", "--builtin", "fig1", "--formula", "<Z> p")
    assert code == 2
    assert "parse error" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "--builtin", "fig1"],
        ["check", "--builtin", "fig1", "--formula", "p", "--bound", "0"],
        ["check", "--builtin", "nope", "--formula", "p"],
        ["check", "--builtin", "fig1", "--semantics", "ltl", "--formula", "<B> p"],
        ["suite", "nope"],
        ["frobnicate"],
    ],
)
def test_usage_errors(argv):
    assert run(*argv)[0] == 2


def test_translate_ltl2ab():
    code, text = run("translate", "--map", "ltl2ab", "--formula", "X q")
    assert code == 0 and text.strip() == "<A> (len2 & <A> (len1 & q))"


def test_translate_hs2fo_sentence():
    code, text = run("translate", "--map", "hs2fo", "--formula", "<B> p", "--format", "json")
    doc = json.loads(text)
    assert code == 0 and doc["sentence"].startswith("exists x")


def test_translate_validate():
    code, text = run("translate", "--map", "ct2hybrid", "--formula", "p", "--validate", "4")
    assert code == 0 and "validation: pass" in text
    code, text = run("translate", "--map", "closure", "--kind", "bL", "--formula", "a", "--validate", "4")
    assert code == 0 and "validation: pass" in text


def test_translate_closure_rejects_separator_in_formula():
    assert run("translate", "--map", "closure", "--formula", "b")[0] == 2


def test_lang_member():
    assert run("lang-member", "--word", "b a a", "--formula", "<B> b & a | <E> a")[0] == 0
    assert run("lang-member", "--word", "a b", "--formula", "a")[0] == 1
    assert run("lang-member", "--word", "a x", "--alphabet", "a b", "--formula", "a")[0] == 2


def test_enumerate_outputs():
    code, text = run("enumerate", "traces", "--builtin", "fig1", "--max", "2", "--initial-only")
    assert code == 0 and text.splitlines() == ["s0", "s0 s1"]
    code, text = run("enumerate", "balanced", "--max", "1")
    assert text.splitlines() == ["p", "true"]
    code, text = run("enumerate", "words", "--formula", "<B> b & a", "--alphabet", "a b", "--max", "3")
    assert text.splitlines() == []
    code, text = run("enumerate", "lassos", "--builtin", "fig1", "--max", "2", "--format", "json")
    assert json.loads(text) == [{"stem": [], "loop": ["s0", "s1"]}, {"stem": ["s0"], "loop": ["s1"]}]


@pytest.mark.parametrize("argv", [["suite", "fig7"], ["suite", "fig9", "--n", "1"]])
def test_suites_exit_zero(argv):
    code, text = run(*argv)
    assert code == 0 and "overall: ok" in text
