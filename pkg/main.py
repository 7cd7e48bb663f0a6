from typing import Any, Dict
from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException

# ========= Import Services =========
from services.config import VERSION, logger
from services.contract_service import validate_against_schema
from services.errors import InputError, RatunifError
from services.pipeline_service import RunConfig, solve
from services.render_service import render_json
from services.settings_service import load_settings

SETTINGS: Dict[str, Any] = {}


@asynccontextmanager
async def lifespan(app: FastAPI):
    # Startup: engine defaults
    SETTINGS.update(load_settings())
    yield


app = FastAPI(lifespan=lifespan)


@app.get("/api/version")
def api_version():
    """Return API version info."""
    return {"version": VERSION, "name": "Ratunif rational pattern unifier"}


@app.get("/api/settings")
def api_settings():
    return SETTINGS or load_settings()


@app.post("/api/unify")
def api_unify(payload: Dict[str, Any]):
    """Solve a problem given in the surface syntax; the result follows unify_result.schema.json."""
    ok, err = validate_against_schema(payload, "run_config")
    if not ok:
        raise HTTPException(400, err)
    cfg = RunConfig.from_settings(
        SETTINGS or load_settings(),
        mode=payload.get("mode"),
        trace=payload.get("trace", False),
        max_steps=payload.get("max_steps"),
        schedule=payload.get("schedule"),
        resolution_policy=payload.get("resolution_policy"),
        abstraction=payload.get("abstraction"),
    )
    if "check_depth" in payload:
        cfg.check_depth = payload["check_depth"] or None
    try:
        outcome = solve(payload["problem"], cfg)
    except InputError as e:
        raise HTTPException(400, str(e))
    except RatunifError as e:
        logger.error(f"Unification failed: {e}")
        raise HTTPException(500, str(e))
    return render_json(outcome, cfg.trace)


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(app, host="127.0.0.1", port=8000)
