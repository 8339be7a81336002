from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from app.models.process import Name
from app.models.types import Ctx, Idxs, NuAnnot, PreCtx, Type, UsagePair


class VarRefStep(BaseModel):
    """A variable reference inside a derivation: `demanded` taken at `index`, leaving `leftover`."""

    model_config = ConfigDict(frozen=True)

    index: int
    type: Type
    demanded: UsagePair
    leftover: Ctx


class VarRefArrow(BaseModel):
    """Stand-alone evidence ctx_in ∋index demanded ▷ ctx_out."""

    model_config = ConfigDict(frozen=True)

    index: int
    type: Type
    demanded: UsagePair
    ctx_in: Ctx
    ctx_out: Ctx


class Derivation(BaseModel):
    """Typing derivation node with the context snapshots the rule was applied under."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["end", "res", "recv", "send", "par"]
    pre: PreCtx
    idxs: Idxs
    ctx_in: Ctx
    ctx_out: Ctx
    hint: Optional[Name] = None
    annot: Optional[NuAnnot] = None
    chan_ref: Optional[VarRefStep] = None
    payload_ref: Optional[VarRefStep] = None
    children: Tuple["Derivation", ...] = ()

    @model_validator(mode="after")
    def check_arity(self):
        expected = {"end": 0, "res": 1, "recv": 1, "send": 1, "par": 2}[self.kind]
        if len(self.children) != expected:
            raise ValueError(f"'{self.kind}' node expects {expected} children")
        return self


class SplitEvidence(BaseModel):
    """Records split_ctx(gamma, delta) == xi for a derivation from gamma to xi."""

    model_config = ConfigDict(frozen=True)

    gamma: Ctx
    delta: Ctx
    xi: Ctx


class SubstEvidence(BaseModel):
    """Arrows needed to move the references of one variable onto another."""

    model_config = ConfigDict(frozen=True)

    gamma_i: VarRefArrow
    gamma_j: VarRefArrow
    psi_i: VarRefArrow
    psi_j: VarRefArrow
    delta: Ctx


class RecheckFailure(BaseModel):
    model_config = ConfigDict(frozen=True)

    path: Tuple[str, ...]
    reason: str


Derivation.model_rebuild()
