from enum import Enum
from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.process import Process
from app.models.types import Ctx


class Selector(str, Enum):
    RES_BODY = "ResBody"
    PAR_LEFT = "ParLeft"
    PAR_RIGHT = "ParRight"
    RECV_BODY = "RecvBody"
    SEND_BODY = "SendBody"


CongPath = Tuple[Selector, ...]


class CongRule(str, Enum):
    COMP_ASSOC = "CompAssoc"
    COMP_SYM = "CompSym"
    COMP_ID = "CompId"
    SCOPE_END = "ScopeEnd"
    SCOPE_EXT = "ScopeExt"
    SCOPE_COMM = "ScopeComm"


class Direction(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class CongStep(BaseModel):
    model_config = ConfigDict(frozen=True)

    rule: CongRule
    direction: Direction = Direction.FORWARD
    path: CongPath = ()


class Channel(BaseModel):
    """Channel a reduction communicates on: bound inside the process or free at `index`."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["internal", "external"]
    index: Optional[int] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def check_index(self):
        if (self.kind == "external") != (self.index is not None):
            raise ValueError("external channels carry an index, internal ones do not")
        return self


INTERNAL = Channel(kind="internal")


def external(index: int) -> Channel:
    return Channel(kind="external", index=index)


class ReductionStep(BaseModel):
    """One step P -c-> Q together with the rewrites that exposed its redex."""

    model_config = ConfigDict(frozen=True)

    channel: Channel
    process: Process
    rewrites: Tuple[CongStep, ...] = ()
    redex: CongPath = ()


class TraceEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    step: int
    channel: Channel
    process: Process


class TypedTraceEntry(BaseModel):
    """A trace entry with the root contexts its reduct was retyped under."""

    model_config = ConfigDict(frozen=True)

    entry: TraceEntry
    ctx_in: Ctx
    ctx_out: Ctx
