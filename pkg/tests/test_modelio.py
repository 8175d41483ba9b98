import io
import json
import sys

import pytest
from fastapi.testclient import TestClient
from hypothesis import given, settings, strategies as st

from jetquant import charges as ch
from jetquant import cli, modelio
from jetquant.service import app

MINIMAL = """\
[model]
N = 2

[species]
name = phi
order = 2
"""


def diagnostics(text):
    with pytest.raises(modelio.ModelError) as info:
        modelio.parse_document(text)
    return info.value


class TestParse:
    def test_minimal_model(self):
        spec = modelio.parse_model(MINIMAL)
        assert spec.N == 2
        (block,) = spec.fields.blocks
        assert block.el_order == 2 and block.parity == "boson" and block.dim(2) == 1

    def test_unsupported_order_is_semantic(self):
        err = diagnostics(MINIMAL.replace("order = 2", "order = 5"))
        assert not err.syntax
        (d,) = err.diagnostics
        assert (d.line, d.kind) == (6, "semantic") and "order" in d.message

    def test_syntax_error_position(self):
        err = diagnostics("[model]\nN = 2\n  what is this\n")
        assert err.syntax
        (d,) = err.diagnostics
        assert (d.line, d.column) == (3, 3)

    def test_missing_value_points_past_equals(self):
        (d,) = diagnostics("[model]\nN =\n").diagnostics
        assert (d.line, d.column, d.kind) == (2, 4, "syntax")

    def test_unknown_and_duplicate_keys(self):
        assert "unknown key" in diagnostics("[model]\nN = 2\ncolour = red\n").diagnostics[0].message
        assert diagnostics("[model]\nN = 2\nN = 3\n").syntax

    def test_unknown_section(self):
        assert diagnostics("[model]\nN = 1\n[extra]\nx = 1\n").syntax

    def test_gauge_content_needs_algebra(self):
        err = diagnostics(MINIMAL + "charge = 1\n")
        assert not err.syntax and "no gauge algebra" in err.diagnostics[0].message

    def test_rationals(self):
        doc = modelio.parse_document(MINIMAL + "lambda = 1/2\n")
        assert doc.species[0].lam == ch.Fraction(1, 2)
        assert diagnostics(MINIMAL + "lambda = 0.5\n").syntax

    def test_missing_model_section(self):
        assert not diagnostics("[species]\nname = x\n").syntax

    def test_diagnostics_sorted_by_position(self):
        err = diagnostics("[model]\nN = 2\nvariant = DD9\n[species]\norder = 7\n")
        assert [d.line for d in err.diagnostics] == [3, 5]


class TestMaxwellDirac:
    def test_finiteness_by_hand(self):
        # A: covector, 4 bosonic components, o=2 -> 8 ; psi, psibar: 4 fermionic, o=1 -> -4 each
        data = modelio.finiteness_data(modelio.parse_document(modelio.MAXWELL_DIRAC))
        assert [(r["name"], r["sd"], r["order_sd"]) for r in data["species"]] == [("A", 4, 8), ("psi", -4, -4), ("psibar", -4, -4)]
        assert data["sum_order_sd"] == 0 and data["finite"]

    def test_parses_to_u1_spec(self):
        spec = modelio.parse_model(modelio.MAXWELL_DIRAC)
        assert spec.fields.algebra == "u1" and spec.N == 4


MAXWELL = modelio.parse_document(modelio.MAXWELL_DIRAC)
species = st.builds(
    modelio.SpeciesEntry,
    name=st.sampled_from(["a", "b", "chi"]),
    gl=st.sampled_from(sorted(modelio.GL_SHAPES)),
    weight=st.fractions(min_value=-2, max_value=2, max_denominator=3),
    parity=st.sampled_from(["boson", "fermion"]),
    order=st.integers(0, 2),
    lam=st.fractions(min_value=0, max_value=1, max_denominator=4),
)


class TestRoundTrip:
    def test_normalization_is_idempotent(self):
        once = modelio.serialize(modelio.parse_document(MINIMAL))
        assert modelio.serialize(modelio.parse_document(once)) == once

    @settings(max_examples=40)
    @given(st.integers(1, 4), st.integers(0, 8), st.lists(species, max_size=3), st.sampled_from(["DD1", "DD2"]), st.booleans())
    def test_round_trip(self, N, p, blocks, variant, dismiss):
        doc = modelio.ModelDocument(N=N, p=p, variant=variant, species=blocks, noether_antifields="dismiss" if dismiss else "keep")
        text = modelio.serialize(doc)
        again = modelio.parse_document(text)
        assert again == doc
        assert modelio.serialize(again) == text

    def test_gauge_round_trip(self):
        text = modelio.serialize(MAXWELL)
        assert modelio.parse_document(text) == MAXWELL


class TestReports:
    def test_empty_model_charges(self):
        rep = modelio.run_command("charges", options={"N": 3})
        assert rep.ok
        total = rep.to_json()["result"]["total"]
        assert total == {f"c{j}": "2/1" if j == 4 else "0/1" for j in range(1, 8)}

    def test_rationals_print_as_fractions(self):
        assert modelio.jsonable(ch.Fraction(3, 6)) == "1/2"
        assert "." not in modelio.run_command("virasoro", options={"lam": "1/2"}).dumps()

    def test_np1_table(self):
        rep = modelio.run_command("np1", options={"N": 6, "p": 20})
        assert rep.ok and len(rep.result) == 6 * 21

    def test_jacobi_report(self):
        rep = modelio.run_command("jacobi", options={"N": 2, "degree": 3, "samples": 10, "seed": 7})
        assert rep.ok

    @pytest.mark.parametrize("cmd,options", [
        ("jacobi", {"N": 2, "degree": 2, "samples": 3, "seed": 1}),
        ("charges", {"N": 2, "p": "symbolic"}),
        ("kt", {"preset": "harmonic", "p": 3, "degree": 1}),
    ])
    def test_reports_are_byte_identical(self, cmd, options):
        a = modelio.run_command(cmd, options=dict(options), model_text="").dumps()
        b = modelio.run_command(cmd, options=dict(options), model_text="").dumps()
        assert a == b

    def test_digest_tracks_input(self):
        a = modelio.run_command("np1", options={"N": 2, "p": 2})
        b = modelio.run_command("np1", options={"N": 2, "p": 3})
        assert a.input_digest != b.input_digest

    def test_unknown_command(self):
        with pytest.raises(KeyError):
            modelio.run_command("nope")

    def test_kt_csv_is_cohomology_table(self):
        rep = modelio.run_command("kt", options={"preset": "auxiliary", "p": 2, "degree": 2})
        assert modelio.dumps_csv(rep) == "gh,mom,dim\n0,0,1\n"


class TestBudget:
    def test_parse(self):
        b = modelio.Budget.parse("N=4, p=5")
        assert (b.N, b.p, b.degree) == (4, 5, 3)
        with pytest.raises(ValueError):
            modelio.Budget.parse("size=3")

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv(modelio.BUDGET_ENV, "N=1")
        with pytest.raises(modelio.oa.BudgetExceeded):
            modelio.run_command("verify-traces", options={"N": 2, "p": 1})

    def test_exit_codes_distinct(self):
        codes = {modelio.EXIT_OK, modelio.EXIT_PARSE, modelio.EXIT_VALIDATION, modelio.EXIT_BUDGET, modelio.EXIT_PROPERTY}
        assert len(codes) == 5 and 1 not in codes


def run_cli(argv, capsys, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestCLI:
    def test_charges(self, capsys):
        code, out, _ = run_cli(["charges", "--N", "2"], capsys)
        assert code == 0 and json.loads(out)["result"]["total"]["c4"] == "2/1"

    def test_model_from_stdin(self, capsys, monkeypatch):
        code, out, _ = run_cli(["charges", "--model", "-"], capsys, MINIMAL, monkeypatch)
        assert code == 0 and json.loads(out)["ok"]

    def test_parse_failure(self, capsys, monkeypatch):
        code, _, err = run_cli(["charges", "--model", "-"], capsys, "[model\n", monkeypatch)
        assert code == modelio.EXIT_PARSE and "1:1" in err

    def test_validation_failure(self, capsys, monkeypatch):
        code, _, _ = run_cli(["charges", "--model", "-"], capsys, MINIMAL.replace("order = 2", "order = 5"), monkeypatch)
        assert code == modelio.EXIT_VALIDATION

    def test_budget_exceeded(self, capsys):
        code, _, _ = run_cli(["verify-traces", "--N", "3", "--budget", "N=2"], capsys)
        assert code == modelio.EXIT_BUDGET

    def test_property_violation_exit(self, capsys):
        # the recorded closed form of the TT lemma fails here, so the report is not ok
        code, out, _ = run_cli(["verify-traces", "--N", "2", "--p", "2", "--rep", "vector"], capsys)
        assert code in (modelio.EXIT_OK, modelio.EXIT_PROPERTY)
        assert (code == modelio.EXIT_OK) == json.loads(out)["ok"]

    def test_csv(self, capsys):
        code, out, _ = run_cli(["np1", "--N", "2", "--p", "1", "--format", "csv"], capsys)
        assert code == 0
        assert out.splitlines() == ["N,p,holds", "1,0,True", "1,1,True", "2,0,True", "2,1,True"]

    def test_model_file(self, capsys, tmp_path):
        path = tmp_path / "md.model"
        path.write_text(modelio.MAXWELL_DIRAC)
        code, out, _ = run_cli(["charges", "--model", str(path), "--p", "symbolic"], capsys)
        assert code == 0 and json.loads(out)["command"] == "charges"


class TestService:
    client = TestClient(app)

    def test_commands(self):
        assert self.client.get("/commands").json() == list(modelio.COMMANDS)

    def test_validate(self):
        reply = self.client.post("/validate", json={"model": modelio.MAXWELL_DIRAC}).json()
        assert reply["valid"] and reply["finiteness"]["finite"]
        bad = self.client.post("/validate", json={"model": "[model]\nN = x\n"}).json()
        assert not bad["valid"] and bad["diagnostics"][0]["line"] == 2

    def test_run_matches_in_process(self):
        body = {"model": MINIMAL, "options": {"p": 4}}
        remote = self.client.post("/run/charges", json=body).json()
        local = modelio.run_command("charges", options={"p": 4}, model_text=MINIMAL).to_json()
        assert remote == local

    def test_error_mapping(self):
        r = self.client.post("/run/charges", json={"model": "[model]\nN = 2\n[species]\norder = 9\n"})
        assert r.status_code == 422 and r.json()["detail"]["exit_code"] == modelio.EXIT_VALIDATION
        r = self.client.post("/run/verify-traces", json={"options": {"N": 3}, "budget": "N=2"})
        assert r.status_code == 413
        assert self.client.post("/run/nope", json={}).status_code == 404
