"""Artifact persistence: atomic JSON and CSV writers plus the summary merge.

Every artifact carries `format_version` and the resolved config. Nothing time- or
host-dependent is written, so re-running a command reproduces its files byte for byte.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
import threading
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

from src.config import FORMAT_VERSION
from src.logs import get_logger
from src.tools.operations import jsonable

logger = get_logger(__name__)

_LOCK = threading.RLock()

SUMMARY_NAME = "summary"
SUMMARY_COLUMNS = ["artifact", "command", "kind", "name", "value", "target", "passed"]


def _atomic_write(path: Path, text: str) -> None:
    """Write text to path through a temp file in the same directory + os.replace."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=path.parent, prefix=f".{path.stem}_tmp_")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_path, path)
    except Exception:
        try:
            os.remove(tmp_path)
        except Exception:
            pass
        raise


def dumps(document: Mapping[str, Any]) -> str:
    return json.dumps(jsonable(document), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def envelope(command: str, config: Mapping[str, Any], result: Mapping[str, Any]) -> Dict[str, Any]:
    return {"format_version": FORMAT_VERSION, "command": command, "config": dict(config), "result": result}


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]], config: Mapping[str, Any]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writerow(["format_version", FORMAT_VERSION])
    writer.writerow(["config", json.dumps(jsonable(config), sort_keys=True, ensure_ascii=False)])
    writer.writerow(list(header))
    for row in rows:
        writer.writerow(["" if v is None else v for v in jsonable(list(row))])
    return buf.getvalue()


def flatten(document: Any, prefix: str = "") -> List[List[Any]]:
    """(dotted key, scalar) rows; lists of scalars are kept as one JSON cell."""
    rows: List[List[Any]] = []
    doc = jsonable(document)
    if isinstance(doc, dict):
        for key in sorted(doc):
            rows += flatten(doc[key], f"{prefix}.{key}" if prefix else str(key))
    elif isinstance(doc, list) and any(isinstance(v, (dict, list)) for v in doc):
        for i, v in enumerate(doc):
            rows += flatten(v, f"{prefix}.{i}")
    elif isinstance(doc, list):
        rows.append([prefix, json.dumps(doc)])
    else:
        rows.append([prefix, doc])
    return rows


def write_json(output_dir: str, name: str, document: Mapping[str, Any]) -> Dict[str, Any]:
    """Persist a JSON artifact as output_dir/name.json.

    Returns:
      { "status": "success", "path": "..." }
    or on error:
      { "status": "error", "message": "..." }
    """
    path = Path(output_dir) / f"{name}.json"
    try:
        text = dumps(document)
        with _LOCK:
            _atomic_write(path, text)
        logger.info("wrote %s", path)
        return {"status": "success", "path": str(path)}
    except Exception as exc:
        logger.exception("failed writing %s: %s", path, exc)
        return {"status": "error", "message": f"failed to write {path}: {exc}"}


def write_csv(
    output_dir: str,
    name: str,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    config: Mapping[str, Any],
) -> Dict[str, Any]:
    """Persist an RFC-4180 CSV artifact; the first two rows hold the format version and config."""
    path = Path(output_dir) / f"{name}.csv"
    try:
        text = _csv_text(header, rows, config)
        with _LOCK:
            _atomic_write(path, text)
        logger.info("wrote %s", path)
        return {"status": "success", "path": str(path)}
    except Exception as exc:
        logger.exception("failed writing %s: %s", path, exc)
        return {"status": "error", "message": f"failed to write {path}: {exc}"}


def write_artifact(
    output_dir: str,
    name: str,
    command: str,
    config: Mapping[str, Any],
    result: Mapping[str, Any],
    output_format: str = "json",
    tables: Optional[Mapping[str, Dict[str, Any]]] = None,
) -> Dict[str, Any]:
    """Write one command's result in the configured format.

    JSON writes the full envelope. CSV writes the flattened result as key,value rows and
    every entry of `tables` ({"header": [...], "rows": [...]}) as its own file.
    """
    if output_format == "json":
        return write_json(output_dir, name, envelope(command, config, result))
    if output_format != "csv":
        return {"status": "error", "message": f"unknown output format {output_format!r}"}
    paths = []
    status = write_csv(output_dir, name, ["key", "value"], flatten(result), config)
    if status["status"] != "success":
        return status
    paths.append(status["path"])
    for suffix, table in sorted((tables or {}).items()):
        status = write_csv(output_dir, f"{name}_{suffix}", table["header"], table["rows"], config)
        if status["status"] != "success":
            return status
        paths.append(status["path"])
    return {"status": "success", "path": paths[0], "paths": paths}


def _read_artifacts(output_dir: str) -> List[Dict[str, Any]]:
    """Every JSON artifact in output_dir except the summary; unreadable files are skipped."""
    out = []
    for path in sorted(Path(output_dir).glob("*.json")):
        if path.stem == SUMMARY_NAME:
            continue
        try:
            with path.open("r", encoding="utf-8") as f:
                data = json.load(f)
        except Exception as exc:
            logger.warning("skipping unreadable artifact %s: %s", path, exc)
            continue
        if not isinstance(data, dict) or data.get("format_version") != FORMAT_VERSION:
            logger.warning("skipping %s: not a %s artifact", path, FORMAT_VERSION)
            continue
        data["_file"] = path.name
        out.append(data)
    return out


def _summary_rows(artifact: Mapping[str, Any]) -> List[List[Any]]:
    name, command = artifact["_file"], artifact.get("command", "")
    result = artifact.get("result") or {}
    rows = []
    for check in result.get("checks", []):
        rows.append([name, command, "verification", check.get("id"), check.get("value"), check.get("target"),
                     check.get("passed")])
    for row in result.get("estimate_rows", []):
        rows.append([name, command, "estimator", row.get("estimator"), row.get("mean"), None, None])
    if command == "constants":
        for key in ("c0", "c1", "c2", "c", "c_prime"):
            if key in result:
                rows.append([name, command, "constant", key, result[key], None, None])
    if command == "exact":
        rows.append([name, command, "operation", result.get("operation"), None, None, None])
    return rows


def merge_reports(output_dir: str, config: Mapping[str, Any]) -> Dict[str, Any]:
    """Merge every artifact of output_dir into summary.json and summary.csv."""
    try:
        artifacts = _read_artifacts(output_dir)
    except Exception as exc:
        logger.exception("failed reading %s: %s", output_dir, exc)
        return {"status": "error", "message": f"failed to read artifacts: {exc}"}
    rows: List[List[Any]] = []
    for artifact in artifacts:
        rows += _summary_rows(artifact)
    summary = {
        "artifacts": [
            {"file": a["_file"], "command": a.get("command"), "passed": (a.get("result") or {}).get("passed")}
            for a in artifacts
        ],
        "rows": [dict(zip(SUMMARY_COLUMNS, r)) for r in rows],
    }
    status = write_json(output_dir, SUMMARY_NAME, envelope("report", config, summary))
    if status["status"] != "success":
        return status
    csv_status = write_csv(output_dir, SUMMARY_NAME, SUMMARY_COLUMNS, rows, config)
    if csv_status["status"] != "success":
        return csv_status
    logger.info("merged %d artifacts into %s", len(artifacts), status["path"])
    return {"status": "success", "path": status["path"], "paths": [status["path"], csv_status["path"]],
            "artifacts": len(artifacts), "rows": len(rows)}


def read_artifact(path: str) -> Dict[str, Any]:
    """Load one artifact back."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except Exception as exc:
        logger.exception("error reading %s: %s", path, exc)
        return {"status": "error", "message": f"failed to read {path}: {exc}"}
    return {"status": "success", "artifact": data}
