"""Pydantic models for the JSON file formats and API request/response validation."""

from __future__ import annotations

from datetime import datetime

from pydantic import BaseModel, Field, model_validator


# ---- file formats ----

class SeedFamilyModel(BaseModel):
    n_points: int = Field(ge=1, le=24)
    w: int = Field(ge=0)
    d: int = Field(ge=0)
    families: list[list[list[int]]]


class KetAmplitude(BaseModel):
    ket: str = Field(pattern=r"^[01]+$")
    re: float
    im: float


class JumpCodeModel(BaseModel):
    N: int = Field(ge=1, le=24)
    w: int = Field(ge=0)
    d: int = Field(ge=0)
    K: int = Field(ge=1)
    phase: float | None = None
    codewords: list[list[KetAmplitude]]

    @model_validator(mode="after")
    def _check_dimension(self) -> JumpCodeModel:
        if len(self.codewords) != self.K:
            raise ValueError(f"K={self.K} but {len(self.codewords)} codewords given")
        for word in self.codewords:
            if any(len(k.ket) != self.N for k in word):
                raise ValueError(f"every ket must have {self.N} qubits")
        return self


class ImperfectionConfig(BaseModel):
    q: float = Field(0.0, ge=0.0, lt=1.0, description="misdetection parameter")
    delta_kappa: float = Field(0.0, ge=0.0, description="std. deviation of the decay rates (units of Omega)")
    delay: float = Field(0.0, ge=0.0, description="detection-to-recovery delay")
    dead_time: float = Field(0.0, ge=0.0, description="detector blind window after a detection")
    kappa_mean: float = Field(1.0, ge=0.0, description="mean decay rate")


# ---- API payloads ----

class VerifyRequest(BaseModel):
    code: str = Field(description='"pairing(N[,phi])" or "builtin-833"')
    d: int = Field(ge=0)


class LambdaOut(BaseModel):
    E: list[int]
    fraction: str | None
    value: float


class ViolationOut(BaseModel):
    i: int
    j: int
    E: list[int]
    value: float


class VerificationOut(BaseModel):
    code: str
    N: int
    w: int
    K: int
    d: int
    passed: bool
    cross_terms_passed: bool | None
    lambda_table: list[LambdaOut]
    violations: list[ViolationOut]


class BoundsRowOut(BaseModel):
    N: int
    d: int
    w: int
    upper_bound: int
    achieved: int | None = None
    construction: str | None = None


class RunOut(BaseModel):
    command: str
    config_hash: str
    seed: int
    code_label: str | None
    n_points: int
    output_path: str | None
    mean_fidelity: float | None
    created_at: datetime | None = None
