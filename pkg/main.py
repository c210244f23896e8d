import os
import sys
import pathlib
import logging
from functools import lru_cache
from typing import Any, Dict

try:
    from dotenv import load_dotenv
    load_dotenv()
except Exception:
    pass


PROJECT_ROOT = pathlib.Path(__file__).resolve().parents[0]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

# FastAPI + Uvicorn
try:
    from fastapi import FastAPI, HTTPException
    from pydantic import BaseModel, Field
    import uvicorn
    from fastapi.middleware.cors import CORSMiddleware
except Exception:
    FastAPI = None

if FastAPI is None:
    raise RuntimeError("FastAPI not installed. Please `pip install fastapi uvicorn pydantic`")

from src.config import load_config
from src.errors import PreconditionError, WalkLabError
from src.tools.artifacts import envelope
from src.tools.operations import jsonable, list_operations, run_operation

logging.basicConfig(level=os.getenv("WALKLAB_LOG_LEVEL", "INFO").upper())
logger = logging.getLogger("main")


class ExactRequest(BaseModel):
    operation: str
    arguments: Dict[str, Any] = Field(default_factory=dict)


class ConstantsRequest(BaseModel):
    alpha: float = 4.0
    R: int = Field(200, ge=2)
    allow_subcritical: bool = False


app = FastAPI(title="Axis-Perturbed Walk Lab API", version="0.1")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@lru_cache(maxsize=32)
def _constants_cached(alpha: float, R: int, allow_subcritical: bool) -> Dict[str, Any]:
    from src.exact.constants import constants

    logger.info("solving constants for alpha=%s R=%d", alpha, R)
    return jsonable(constants(alpha, R, allow_subcritical=allow_subcritical))


@app.get("/health")
def health():
    return {"status": "ok", "operations": [op["name"] for op in list_operations()]}


@app.get("/operations")
def operations():
    return {"operations": list_operations()}


@app.post("/exact")
def exact(req: ExactRequest):
    """Same result document as the exact subcommand, returned instead of written."""
    outcome = run_operation(req.operation, req.arguments)
    if outcome["status"] != "success":
        code = 422 if outcome.get("kind") == "precondition" else 500
        raise HTTPException(status_code=code, detail=outcome["message"])
    result = {k: outcome[k] for k in ("operation", "arguments", "result")}
    return envelope("exact", load_config().artifact_view(), result)


@app.post("/constants")
def constants(req: ConstantsRequest):
    try:
        config = load_config(None, {"alpha": req.alpha, "R": req.R, "allow_subcritical": req.allow_subcritical})
        config.require_supercritical("constants")
        result = _constants_cached(float(config.alpha), int(config.R), config.allow_subcritical)
    except PreconditionError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except WalkLabError as exc:
        logger.exception("constants failed: %s", exc)
        raise HTTPException(status_code=500, detail=str(exc))
    return envelope("constants", config.artifact_view(), result)


if __name__ == "__main__":
    port = int(os.getenv("PORT", "8000"))
    logger.info("Starting server on 0.0.0.0:%d", port)
    uvicorn.run("main:app", host="0.0.0.0", port=port, reload=False)
