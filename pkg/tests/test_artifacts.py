import json
import math

import numpy as np
import pytest

from src.config import FORMAT_VERSION
from src.tools.artifacts import (
    dumps,
    envelope,
    flatten,
    merge_reports,
    read_artifact,
    write_artifact,
    write_csv,
    write_json,
)
from src.tools.operations import jsonable
from src.walk.lattice import Arm, LatticePoint

CONFIG = {"alpha": 4.0, "seed": 3}


def test_json_artifacts_are_canonical(output_dir):
    doc = envelope("constants", CONFIG, {"c1": 0.5, "b": [1, 2]})
    status = write_json(str(output_dir), "constants", doc)
    assert status["status"] == "success"
    text = (output_dir / "constants.json").read_text(encoding="utf-8")
    assert text == dumps(doc)
    assert text.endswith("}\n")
    assert list(json.loads(text)) == ["command", "config", "format_version", "result"]
    first = (output_dir / "constants.json").read_bytes()
    write_json(str(output_dir), "constants", doc)
    assert (output_dir / "constants.json").read_bytes() == first
    assert not list(output_dir.glob(".*_tmp_*"))


def test_csv_header_rows(output_dir):
    status = write_csv(str(output_dir), "table", ["a", "b"], [[1, "x,y"], [None, 2.5]], CONFIG)
    raw = (output_dir / "table.csv").read_bytes().decode("utf-8")
    lines = raw.split("\r\n")
    assert status["status"] == "success"
    assert lines[0] == f"format_version,{FORMAT_VERSION}"
    assert lines[1].startswith("config,")
    assert lines[2] == "a,b"
    assert lines[3] == '1,"x,y"'
    assert lines[4] == ",2.5"
    assert raw.endswith("\r\n")


def test_csv_artifact_writes_tables(output_dir):
    tables = {"estimates": {"header": ["estimator", "mean"], "rows": [["excursion_rate", 0.1]]}}
    status = write_artifact(str(output_dir), "simulate", "simulate", CONFIG, {"passed": True, "x": {"y": 1}},
                            "csv", tables)
    assert status["status"] == "success"
    assert [p.rsplit("/", 1)[-1] for p in status["paths"]] == ["simulate.csv", "simulate_estimates.csv"]
    body = (output_dir / "simulate.csv").read_text(encoding="utf-8")
    assert "x.y,1" in body


def test_unknown_format(output_dir):
    status = write_artifact(str(output_dir), "x", "simulate", CONFIG, {}, "xml")
    assert status["status"] == "error"


def test_write_into_a_file_fails_softly(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    status = write_json(str(blocker), "x", {"a": 1})
    assert status["status"] == "error"
    assert "failed to write" in status["message"]


def test_flatten():
    rows = flatten({"b": {"c": 1, "d": [1, 2]}, "a": [{"e": None}], "f": float("nan")})
    assert rows == [["a.0.e", None], ["b.c", 1], ["b.d", "[1, 2]"], ["f", None]]


def test_jsonable():
    assert jsonable(np.arange(3)) == [0, 1, 2]
    assert jsonable(np.float64(0.5)) == 0.5
    assert jsonable({1: math.inf}) == {"1": None}
    assert jsonable(LatticePoint(1, -2)) == [1, -2]
    assert jsonable((Arm.PLUS_X1,)) == [Arm.PLUS_X1.value]


def test_summary_merges_every_artifact(output_dir):
    checks = [{"id": "kernel", "value": 0.0, "target": 0.0, "passed": True}]
    write_artifact(str(output_dir), "verify", "verify", CONFIG, {"checks": checks, "passed": True})
    write_artifact(str(output_dir), "simulate", "simulate", CONFIG,
                   {"estimate_rows": [{"estimator": "excursion_rate", "mean": 0.1}]})
    write_artifact(str(output_dir), "constants", "constants", CONFIG, {"c1": 0.2, "c": 1.0})
    (output_dir / "broken.json").write_text("{")
    (output_dir / "foreign.json").write_text(json.dumps({"format_version": "other/9"}))

    status = merge_reports(str(output_dir), CONFIG)
    assert status["status"] == "success"
    assert status["artifacts"] == 3
    summary = json.loads((output_dir / "summary.json").read_text())
    kinds = sorted((r["kind"], r["name"]) for r in summary["result"]["rows"])
    assert kinds == [("constant", "c"), ("constant", "c1"), ("estimator", "excursion_rate"), ("verification", "kernel")]
    assert (output_dir / "summary.csv").exists()

    again = merge_reports(str(output_dir), CONFIG)
    assert again["artifacts"] == 3


def test_read_artifact(output_dir):
    write_json(str(output_dir), "one", {"a": 1})
    assert read_artifact(str(output_dir / "one.json"))["artifact"] == {"a": 1}
    assert read_artifact(str(output_dir / "missing.json"))["status"] == "error"


@pytest.mark.parametrize("name", ["a", "b"])
def test_artifact_names_are_files(output_dir, name):
    write_json(str(output_dir), name, {"name": name})
    assert (output_dir / f"{name}.json").is_file()
