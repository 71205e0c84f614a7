"""FastAPI service exposing code verification, bound tables and the run registry.

Endpoints:
  GET  /health  liveness check
  GET  /bounds  upper-bound table with achieved dimensions
  POST /verify  correction-condition report for a named code
  GET  /runs    latest registered CLI runs
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query
from sqlalchemy.exc import SQLAlchemyError

from jumpcodes import __version__
from jumpcodes.codes import code_from_spec
from jumpcodes.config import settings
from jumpcodes.errors import DomainError
from jumpcodes.repositories import runs as runs_repo
from jumpcodes.schemas import BoundsRowOut, RunOut, VerificationOut, VerifyRequest
from jumpcodes.services.bounds import emit_bounds_table
from jumpcodes.services.reports import verification_out

app = FastAPI(title="Jump Code Toolkit API", version=__version__)


@app.get("/health")
def health():
    return {"status": "ok"}


@app.get("/bounds", response_model=list[BoundsRowOut])
def bounds(n_max: int = Query(8, ge=1, le=24), d_max: int = Query(3, ge=0)):
    """Upper bounds for every (N, d, w) up to the given limits."""
    df = emit_bounds_table(n_max, d_max)
    df = df.astype(object).where(df.notna(), None)
    return df.to_dict(orient="records")


@app.post("/verify", response_model=VerificationOut)
def verify(req: VerifyRequest):
    """Check the d-jump correction condition for a built-in code."""
    if req.code.strip().endswith(".json"):
        raise HTTPException(422, "file-based codes are only available from the CLI")
    try:
        code = code_from_spec(req.code)
        return verification_out(code, req.d)
    except DomainError as exc:
        raise HTTPException(422, str(exc)) from exc


@app.get("/runs", response_model=list[RunOut])
def runs(limit: int = Query(20, ge=1, le=500)):
    """Latest runs from the registry."""
    if not settings.database_url:
        raise HTTPException(404, "Run registry disabled. Set JUMPCODE_DATABASE_URL.")
    try:
        return runs_repo.get_latest(limit)
    except SQLAlchemyError as exc:
        raise HTTPException(503, f"Run registry unavailable: {exc}") from exc
