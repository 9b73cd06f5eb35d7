import json
import math

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from normdens.report import CSV_COLUMNS, ExperimentReport, read_csv, round_sig

floats = st.floats(allow_nan=False, allow_infinity=False, width=64)


def sample_report():
    rep = ExperimentReport("bkk", 11, inputs={"ranges": np.array([1.01, 2.0]), "grid": 64, "note": (1, 2)})
    rep.add("mc_average", 39.47841760435743, 0.0321, 30000)
    rep.add("density_average", math.pi)
    rep.runtime_s = 1.23456789
    return rep


def test_json_round_trip():
    rep = sample_report()
    text = rep.to_json()
    back = ExperimentReport.from_json(text)
    assert back.to_json() == text
    assert back["mc_average"].value == round_sig(39.47841760435743)
    assert json.loads(text)["inputs"]["note"] == [1, 2]


def test_csv_matches_json_values():
    rep = sample_report()
    rows = read_csv(rep.to_csv())
    doc = json.loads(rep.to_json())
    assert list(rows[0]) == list(CSV_COLUMNS)
    for row, res in zip(rows, doc["results"]):
        assert row["name"] == res["name"]
        assert row["value"] == res["value"]
        assert row["std_error"] == res["std_error"]
        assert row["trials"] == res["trials"]
        assert row["seed"] == doc["seed"]


def test_twelve_significant_digits():
    assert round_sig(math.pi) == 3.14159265359
    assert round_sig(0.0) == 0.0
    line = sample_report().to_csv().splitlines()[2]
    assert "3.14159265359" in line


@given(floats)
def test_rounding_is_idempotent_and_exact_through_text(x):
    r = round_sig(x)
    assert round_sig(r) == r
    assert float(f"{r:.12g}") == r
