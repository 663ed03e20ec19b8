# test/test_proof_script.py

import json

import pytest

from hcspdc import dc as D
from hcspdc.errors import FormatError
from hcspdc.hoare import check_proof, derive_semantics_triple
from hcspdc.parser import parse_process
from hcspdc.proof_script import dump_proof, dumps, load_proof, loads, node_to_json, triple_from_json

from conftest import corpus_path


def script(**triple) -> str:
    base = {"pre": "true", "proc": "x := 1", "post": "true", "vars": "(vars (real x) (bool))"}
    base.update(triple)
    return json.dumps({"rule": "N", "triple": base})


def corpus_path_text(name: str) -> str:
    with open(corpus_path(name)) as fh:
        return fh.read()


class TestCorpusScripts:
    """The two weakening scripts shipped with the corpus."""

    def test_valid_weakening(self, discharge_cfg):
        report = check_proof(load_proof(corpus_path("weaken.proof")), discharge_cfg)
        assert report.verdict == "valid"
        [(path, ob)] = report.obligations
        assert path == "root" and ob.status == "discharged-empirically" and ob.budget == 200

    def test_invalid_weakening(self, discharge_cfg):
        report = check_proof(load_proof(corpus_path("bad_weaken.proof")), discharge_cfg)
        assert report.verdict == "invalid" and report.failed_at == "root"
        assert report.counterexample is not None


class TestFormat:
    def test_defaults(self):
        t = triple_from_json(json.loads(script())["triple"])
        assert t.mode == "classic" and t.marker == "R" and t.N == "N"
        assert t.pre == D.TOP and t.vars.names == {"x"}

    def test_parallel_is_labelled_on_read(self):
        t = triple_from_json(json.loads(script(proc="x := 1 || y := 1",
                                               vars="(vars (real x y) (bool))"))["triple"])
        assert t.proc.tag == 1

    def test_derived_proof_reads_back(self, tmp_path):
        root = derive_semantics_triple(parse_process("x := 1; y := 2"))
        path = str(tmp_path / "seq.proof")
        dump_proof(root, path)
        again = load_proof(path)
        assert node_to_json(again) == node_to_json(root)
        assert [p.rule for p in again.premises] == ["AXIOM-PRIM", "AXIOM-PRIM"]

    def test_side_conditions_keep_strategy_and_budget(self):
        root = loads(corpus_path_text("weaken.proof"))
        [ob] = root.side_conditions
        assert ob.formula is None and ob.strategy == "falsify" and ob.budget == 200
        assert json.loads(dumps(root))["side_conditions"] == [{"formula": None, "strategy": "falsify", "budget": 200}]

    @pytest.mark.parametrize("text", [
        "not json",
        '{"rule": "N"}',
        '[1, 2]',
        '{"rule": "N", "triple": {"proc": "x := 1", "vars": "(vars (real x) (bool))"}}',
        '{"rule": "N", "triple": {"proc": "x := 1", "post": "(bogus)", "vars": "(vars (real x) (bool))"}}',
    ])
    def test_rejected_scripts(self, text):
        with pytest.raises(FormatError):
            loads(text)

    def test_uncovered_variables_are_a_format_error(self):
        with pytest.raises(FormatError):
            loads(script(vars="(vars (real) (bool))"))

    def test_unknown_side_condition_strategy(self):
        obj = json.loads(script())
        obj["side_conditions"] = [{"formula": None, "strategy": "prove"}]
        with pytest.raises(FormatError):
            loads(json.dumps(obj))
