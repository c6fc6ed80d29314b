import csv
import io

import pytest

from driftheat import tables


@pytest.fixture(scope="module")
def entries():
    return tables.all_entries()


def test_all_entries_pass(entries):
    bad = [e.as_dict() for e in entries if not e.passed]
    assert not bad, bad[:3]


def test_covers_every_table_and_both_dimensions(entries):
    assert {e.table for e in entries} == set(tables.TABLES)
    assert {1, 2} <= {e.n for e in entries}
    dictionary_rows = {e.row for e in entries if e.table == "dictionary"}
    assert set(range(1, 8)) <= dictionary_rows


def test_both_paths_present(entries):
    norms = [e for e in entries if e.table == "norms"]
    assert {e.path for e in norms} == {"closed", "quadrature"}


def test_tolerances(entries):
    for e in entries:
        assert e.tolerance == (tables.CLOSED_TOL if e.path == "closed" else tables.QUAD_TOL)


def test_csv_roundtrip(entries):
    text = tables.to_csv(entries)
    assert "\r" not in text
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == len(entries)
    assert tuple(rows[0]) == tables.CSV_FIELDS


def test_deterministic():
    a = tables.to_csv(tables.sharpness_table())
    b = tables.to_csv(tables.sharpness_table())
    assert a == b
