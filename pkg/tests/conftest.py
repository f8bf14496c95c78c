from __future__ import annotations

import json
import sys
from importlib import resources

import pytest

from orbitforge import build_root_system, make_levi


def catalog_entries():
    text = resources.files("orbitforge").joinpath("data/catalog.json").read_text()
    return json.loads(text)["entries"]


def entry_id(e) -> str:
    return f"{e['type']}{{{','.join(map(str, e['gamma']))}}}"


CATALOG = catalog_entries()


def levi_of(entry):
    return make_levi(build_root_system(entry["type"]), entry["gamma"])


@pytest.fixture(params=CATALOG, ids=entry_id)
def catalog_pair(request):
    return request.param, levi_of(request.param)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
