import re
from typing import Annotated, Literal, Optional, Union

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, model_validator

from app.models.types import NuAnnot

KEYWORDS = frozenset({"end", "new", "free", "unit", "chan", "lin", "gra", "sha"})
NAME_PATTERN = re.compile(r"[A-Za-z_][A-Za-z0-9_']*(\^[0-9]+)?")


def check_name(text: str) -> str:
    if not NAME_PATTERN.fullmatch(text):
        raise ValueError(f"'{text}' is not a valid name")
    if text in KEYWORDS:
        raise ValueError(f"'{text}' is a reserved word")
    return text


Name = Annotated[str, AfterValidator(check_name)]


# Named surface syntax

class RawEnd(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["end"] = "end"


class RawRes(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["res"] = "res"
    binder: Name
    annot: Optional[NuAnnot] = None
    body: "Raw"


class RawPar(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["par"] = "par"
    left: "Raw"
    right: "Raw"


class RawRecv(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["recv"] = "recv"
    chan: Name
    binder: Name
    body: "Raw"


class RawSend(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["send"] = "send"
    chan: Name
    payload: Name
    body: "Raw"


Raw = Annotated[Union[RawEnd, RawRes, RawPar, RawRecv, RawSend], Field(discriminator="kind")]

for _model in (RawRes, RawPar, RawRecv, RawSend):
    _model.model_rebuild()


# de Bruijn syntax

class Var(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=0)
    depth: int = Field(ge=0)

    @model_validator(mode="after")
    def check_bound(self):
        if self.index >= self.depth:
            raise ValueError(f"index {self.index} is not bound in a scope of depth {self.depth}")
        return self


class End(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["end"] = "end"
    depth: int = Field(ge=0)


class Res(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["res"] = "res"
    depth: int = Field(ge=0)
    hint: Name = "_"
    annot: Optional[NuAnnot] = None
    body: "Process"

    @model_validator(mode="after")
    def check_depth(self):
        if self.body.depth != self.depth + 1:
            raise ValueError("restriction body must live one binder deeper")
        return self


class Par(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["par"] = "par"
    depth: int = Field(ge=0)
    left: "Process"
    right: "Process"

    @model_validator(mode="after")
    def check_depth(self):
        if self.left.depth != self.depth or self.right.depth != self.depth:
            raise ValueError("parallel components must share the parent depth")
        return self


class Recv(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["recv"] = "recv"
    depth: int = Field(ge=0)
    chan: Var
    hint: Name = "_"
    body: "Process"

    @model_validator(mode="after")
    def check_depth(self):
        if self.chan.depth != self.depth:
            raise ValueError("channel variable must live at the node depth")
        if self.body.depth != self.depth + 1:
            raise ValueError("input body must live one binder deeper")
        return self


class Send(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["send"] = "send"
    depth: int = Field(ge=0)
    chan: Var
    payload: Var
    body: "Process"

    @model_validator(mode="after")
    def check_depth(self):
        if self.chan.depth != self.depth or self.payload.depth != self.depth:
            raise ValueError("output variables must live at the node depth")
        if self.body.depth != self.depth:
            raise ValueError("output continuation must share the parent depth")
        return self


Process = Annotated[Union[End, Res, Par, Recv, Send], Field(discriminator="kind")]

for _model in (Res, Par, Recv, Send):
    _model.model_rebuild()
