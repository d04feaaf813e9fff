"""Executable English rulebases: validate, query, explain and compile to SQL."""

import json

from . import _core

__all__ = ["EEWikiError", "parse", "validate", "ask", "explain", "menu", "search", "sql"]


class EEWikiError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _call(fn, *args):
    try:
        return json.loads(fn(*args))
    except _core.Error as e:
        raise EEWikiError(*e.args) from None


def _request(sentence, constraints):
    return json.dumps({"pattern": sentence, "constraints": list(constraints or [])})


def parse(text):
    return _call(_core.parse, text)


def validate(text):
    return _call(_core.validate, text)


def ask(text, sentence, constraints=None, limits=""):
    """Constraints are dicts such as {"variable": "name", "equals": "Fred"}."""
    return _call(_core.ask, text, _request(sentence, constraints), limits)


def explain(text, goal, limits=""):
    return _call(_core.explain, text, goal, limits)


def menu(text):
    return _call(_core.menu, text)["layers"]


def search(text, query):
    return _call(_core.search, text, query)["results"]


def sql(text, sentence, constraints=None, mappings="", run=False, limits=""):
    return _call(_core.sql, text, _request(sentence, constraints), mappings, run, limits)
