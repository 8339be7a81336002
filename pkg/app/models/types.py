from typing import Annotated, Literal, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

# A usage value: naturals for the linear and graded algebras, "w" for the shared one
Usage = Union[int, str]


class UsagePair(BaseModel):
    """Input and output multiplicities of one variable, tagged with their algebra."""

    model_config = ConfigDict(frozen=True)

    alg: str
    input: Usage
    output: Usage


class UnitType(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["unit"] = "unit"


class ChanType(BaseModel):
    """Channel carrying `payload` values, each sent with usage `usage`."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["chan"] = "chan"
    payload: "Type"
    usage: UsagePair

    @property
    def idx(self) -> str:
        return self.usage.alg


Type = Annotated[Union[UnitType, ChanType], Field(discriminator="kind")]

ChanType.model_rebuild()


class NuAnnot(BaseModel):
    """Annotation of a restriction: the channel's payload and its own multiplicity."""

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "payload_type": {"kind": "unit"},
                "payload_usage": {"alg": "lin", "input": 0, "output": 0},
                "chan_alg": "gra",
                "chan_mult": 2,
            }
        },
    )

    payload_type: Type
    payload_usage: UsagePair
    chan_alg: str
    chan_mult: Usage

    @property
    def channel_type(self) -> ChanType:
        return ChanType(payload=self.payload_type, usage=self.payload_usage)

    @property
    def slot_usage(self) -> UsagePair:
        return UsagePair(alg=self.chan_alg, input=self.chan_mult, output=self.chan_mult)


PreCtx = Tuple[Type, ...]
Idxs = Tuple[str, ...]
Ctx = Tuple[UsagePair, ...]


class Scope(BaseModel):
    """Typing, index and usage contexts kept in lockstep. Index 0 is the newest entry."""

    model_config = ConfigDict(frozen=True)

    pre: PreCtx = ()
    idxs: Idxs = ()
    ctx: Ctx = ()

    @model_validator(mode="after")
    def check_aligned(self):
        if not (len(self.pre) == len(self.idxs) == len(self.ctx)):
            raise ValueError("pre, idxs and ctx must have the same length")
        for k, (idx, pair) in enumerate(zip(self.idxs, self.ctx)):
            if pair.alg != idx:
                raise ValueError(f"usage at position {k} belongs to '{pair.alg}', expected '{idx}'")
        return self

    @property
    def depth(self) -> int:
        return len(self.pre)
