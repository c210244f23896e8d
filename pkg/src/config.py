from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.errors import PreconditionError

try:
    from dotenv import load_dotenv
    load_dotenv()
except Exception:
    pass

FORMAT_VERSION = "walklab/1"

_THIS_DIR = Path(__file__).resolve().parent
_PROJECT_ROOT = _THIS_DIR
for _ in range(4):
    if any((_PROJECT_ROOT / name).exists() for name in ("requirements.txt", "README.md")):
        break
    if _PROJECT_ROOT.parent == _PROJECT_ROOT:
        break
    _PROJECT_ROOT = _PROJECT_ROOT.parent

DEFAULT_OUTPUT_DIR = _PROJECT_ROOT / "data"


class Tolerances(BaseModel):
    model_config = ConfigDict(extra="forbid")

    power_tol: float = Field(1e-10, gt=0)
    power_max_iter: int = Field(100_000, ge=1)
    min_shell_count: int = Field(30, ge=1)
    band: float = Field(0.25, gt=0)
    per_excursion_band: float = Field(0.15, gt=0)
    residual: float = Field(1e-8, gt=0)


def _env_jobs() -> int:
    raw = os.getenv("WALKLAB_JOBS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


class Config(BaseModel):
    """Resolved configuration of one command invocation.

    Embedded verbatim in every artifact, so field order and names are part of the
    output format.
    """

    model_config = ConfigDict(extra="forbid")

    alpha: float = Field(4.0, ge=0)
    n: int = Field(1_000_000, ge=1)
    replicas: int = Field(20, ge=1)
    seed: Optional[int] = Field(None, ge=0, lt=2**64)
    R: int = Field(200, ge=2)
    T: int = Field(1_000_000, ge=1)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    output_dir: str = Field(default_factory=lambda: os.getenv("WALKLAB_OUTPUT_DIR", str(DEFAULT_OUTPUT_DIR)))
    output_format: Literal["json", "csv"] = "json"
    jobs: int = Field(default_factory=_env_jobs, ge=1)
    allow_subcritical: bool = False
    functionals: List[str] = Field(default_factory=lambda: ["axis_local_time", "origin_local_time"])

    @field_validator("functionals")
    @classmethod
    def _known_functionals(cls, value: List[str]) -> List[str]:
        from src.walk.functionals import BUILTIN_IDS

        unknown = [name for name in value if name not in BUILTIN_IDS]
        if unknown:
            raise ValueError(f"unknown functionals: {unknown}")
        return value

    def require_supercritical(self, command: str) -> None:
        if self.alpha <= 3 and not self.allow_subcritical:
            raise PreconditionError(
                f"{command} needs alpha > 3 (got {self.alpha}); pass --allow-subcritical to override"
            )

    def require_seed(self, command: str) -> int:
        if self.seed is None:
            raise PreconditionError(f"{command} is randomized and needs an explicit --seed")
        return self.seed

    def artifact_view(self) -> Dict[str, Any]:
        """Resolved config as embedded in artifacts, without `jobs`.

        Results are identical for every worker count, and artifacts must be byte-identical
        across `--jobs` values, so the worker count is the one setting not recorded.
        """
        data = self.model_dump(mode="json")
        data.pop("jobs", None)
        return data


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> Config:
    """Defaults, then the JSON file at `path`, then `overrides` (flags win)."""
    data: Dict[str, Any] = {}
    if path:
        try:
            with open(path, "r", encoding="utf-8") as f:
                loaded = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise PreconditionError(f"cannot read config file {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise PreconditionError(f"config file {path} must hold a JSON object")
        data.update(loaded)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "tolerances" and isinstance(value, dict):
            merged = dict(data.get("tolerances") or {})
            merged.update(value)
            data["tolerances"] = merged
        else:
            data[key] = value
    try:
        return Config(**data)
    except ValidationError as exc:
        raise PreconditionError(str(exc)) from exc
