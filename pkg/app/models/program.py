from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from app.models.process import Name, Raw
from app.models.types import Type, UsagePair

COURIER_EXAMPLE = """\
new x : chan<chan<unit>[sha (w,w)]>[gra (0,0)] @ gra 1 . (
  new d : chan<unit>[sha (w,w)] @ gra 0 . x!d. end
| new y : chan<chan<unit>[sha (w,w)]>[gra (0,0)] @ gra 1 . (
    new e : chan<unit>[sha (w,w)] @ gra 0 . y!e. end
  | new z : chan<chan<unit>[sha (w,w)]>[gra (0,0)] @ gra 2 . (
      z?(p). z?(q). end
    | x?(a). y?(b). z!a. z!b. end)))
"""


class FreeDecl(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: Name
    type: Type
    usage: UsagePair


class SourceProgram(BaseModel):
    """Free-name declarations (oldest first) followed by a named process."""

    model_config = ConfigDict(frozen=True)

    decls: Tuple[FreeDecl, ...] = ()
    body: Raw

    @property
    def names(self) -> List[str]:
        return [decl.name for decl in self.decls]


class CheckRequest(BaseModel):
    source: str

    model_config = ConfigDict(
        json_schema_extra={"example": {"source": COURIER_EXAMPLE}}
    )


class ReduceRequest(BaseModel):
    source: str
    steps: Optional[int] = Field(default=None, ge=0)
    to_end: bool = False

    model_config = ConfigDict(
        json_schema_extra={"example": {"source": COURIER_EXAMPLE, "to_end": True}}
    )


class RoundtripRequest(BaseModel):
    source: str

    model_config = ConfigDict(
        json_schema_extra={"example": {"source": "free z : unit @ lin (0,0);\nz?(x). end"}}
    )
