"""HTTP front end: one POST endpoint per command, plus model validation."""
from __future__ import annotations

from typing import Any, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import modelio


class CommandRequest(BaseModel):
    """Options are the same keys the CLI flags map to (N, p, seed, ...)."""

    model: str = Field("", description="model file text; empty for commands that do not need one")
    options: dict[str, Any] = Field(default_factory=dict)
    budget: Optional[str] = Field(None, description="overrides such as 'N=4,p=5'")


class ReportModel(BaseModel):
    command: str
    input_digest: str
    ok: bool
    result: Any
    notes: list[str] = Field(default_factory=list)


class DiagnosticModel(BaseModel):
    line: int
    column: int
    kind: str
    message: str


class ValidationReply(BaseModel):
    valid: bool
    diagnostics: list[DiagnosticModel] = Field(default_factory=list)
    normalized: Optional[str] = None
    finiteness: Optional[dict[str, Any]] = None


class ErrorDetail(BaseModel):
    exit_code: int
    message: str
    diagnostics: list[DiagnosticModel] = Field(default_factory=list)


app = FastAPI(title="jetquant")

# HTTP status per CLI exit code
_STATUS = {
    modelio.EXIT_PARSE: 400,
    modelio.EXIT_VALIDATION: 422,
    modelio.EXIT_BUDGET: 413,
    modelio.EXIT_PROPERTY: 409,
}


def error_detail(exc: BaseException) -> ErrorDetail:
    diags = [DiagnosticModel(**vars(d)) for d in getattr(exc, "diagnostics", [])]
    return ErrorDetail(exit_code=modelio.exit_code(exc), message=str(exc), diagnostics=diags)


def execute(cmd: str, req: CommandRequest) -> modelio.Report:
    """Shared by the endpoint and the in-process CLI path."""
    budget = modelio.Budget.parse(req.budget) if req.budget else None
    return modelio.run_command(cmd, None, dict(req.options), req.model, budget)


@app.get("/commands")
def list_commands() -> list[str]:
    return list(modelio.COMMANDS)


@app.post("/validate", response_model=ValidationReply)
def validate(req: CommandRequest) -> ValidationReply:
    try:
        doc = modelio.parse_document(req.model)
    except modelio.ModelError as exc:
        return ValidationReply(valid=False, diagnostics=[DiagnosticModel(**vars(d)) for d in exc.diagnostics])
    return ValidationReply(valid=True, normalized=modelio.serialize(doc), finiteness=modelio.finiteness_data(doc))


@app.post("/run/{cmd}", response_model=ReportModel)
def run(cmd: str, req: CommandRequest) -> ReportModel:
    if cmd not in modelio.COMMANDS:
        raise HTTPException(404, f"unknown command {cmd!r}")
    try:
        report = execute(cmd, req)
    except Exception as exc:  # mapped onto the CLI exit codes
        code = modelio.exit_code(exc)
        if code == 1:
            raise
        raise HTTPException(_STATUS[code], error_detail(exc).model_dump()) from exc
    return ReportModel(**report.to_json())
