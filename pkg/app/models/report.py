from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict

from app.models.process import Process
from app.models.types import Ctx, Idxs, PreCtx


class GeneratedProcess(BaseModel):
    """A random process together with contexts it is known to type under."""

    model_config = ConfigDict(frozen=True)

    seed: int
    budget: int
    pre: PreCtx
    idxs: Idxs
    ctx: Ctx
    process: Process


class PropertyFailure(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int
    budget: int
    process: str
    reason: str


class PropertyReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    seed: int
    samples: int
    budget: int
    passed: int
    failure: Optional[PropertyFailure] = None

    @property
    def ok(self) -> bool:
        return self.failure is None


class PropertyRun(BaseModel):
    model_config = ConfigDict(frozen=True)

    reports: Tuple[PropertyReport, ...]

    @property
    def ok(self) -> bool:
        return all(report.ok for report in self.reports)


class CheckSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    names: Tuple[str, ...]
    process: str
    derivation: str
    leftover: str


class ReduceSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    trace: Tuple[str, ...]
    roots: Tuple[str, ...]
    final: str
    normal_form: str


class RoundtripSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    names: Tuple[str, ...]
    source: str


class AlgebraInfo(BaseModel):
    model_config = ConfigDict(frozen=True)

    idx: str
    zero: str
    one: str
    finite: bool
