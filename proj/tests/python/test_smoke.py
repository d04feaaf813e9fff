from pathlib import Path

import pytest

import eewiki

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"
AUTHORS = "some-name is an author , with email some-email , of some-title"


def source(name):
    return (FIXTURES / name).read_text()


def test_parse_counts_rules_and_tables():
    rb = eewiki.parse(source("rdf_authors.ee"))
    assert len(rb["rules"]) == 1
    assert len(rb["tables"]) == 1
    assert rb["diagnostics"] == []


def test_ask_returns_one_author():
    t = eewiki.ask(source("rdf_authors.ee"), AUTHORS)
    assert t["columns"] == ["name", "email", "title"]
    assert t["rows"] == [["Jeen Broekstra", "jbroeks@cs.vu.nl", "An Overview of RDF Query Languages"]]
    assert len(t["handles"]) == 1


def test_equals_constraint_filters_rows():
    t = eewiki.ask(source("rdf_authors.ee"), AUTHORS, [{"variable": "name", "equals": "Fred"}])
    assert t["rows"] == []


def test_unknown_variable_raises_with_code():
    with pytest.raises(eewiki.EEWikiError) as e:
        eewiki.ask(source("rdf_authors.ee"), AUTHORS, [{"variable": "nobody", "equals": "x"}])
    assert e.value.code == "unknown_variable"


def test_explain_proof_has_five_premises():
    goal = ("Jeen Broekstra is an author , with email jbroeks@cs.vu.nl , "
            "of An Overview of RDF Query Languages")
    ex = eewiki.explain(source("rdf_authors.ee"), goal)
    assert ex["status"] == "proof"
    assert len(ex["root"]["children"]) == 5
    assert ex["text"].splitlines()[-2] == "---"


def test_explain_failure_marks_missing():
    ex = eewiki.explain(source("rdf_authors.ee"),
                        "Adrian Walker is an author , with email some-email , of some-title")
    assert ex["status"] == "failure"
    assert ex["text"].count("[missing]") == 2
    assert ex["text"].rstrip().endswith("[not shown]")


def test_validate_reports_cycle():
    v = eewiki.validate(source("negation_cycle.ee"))
    assert not v["ok"]
    assert v["cycle"] == ["rule@1-4", "rule@6-9"]


def test_menu_and_search():
    layers = eewiki.menu(source("oil_supply.ee"))
    assert any("fraction of the order" in e["text"] for e in layers[0]["entries"])
    results = eewiki.search(source("rdf_authors.ee"), "authors email")
    assert results[0]["text"] == AUTHORS


def test_sql_preview_and_run():
    out = eewiki.sql(source("rdf_authors.ee"), AUTHORS, run=True)
    assert out["sql"].startswith("SELECT")
    assert out["in_engine"] == []
    assert out["answers"]["rows"] == eewiki.ask(source("rdf_authors.ee"), AUTHORS)["rows"]
