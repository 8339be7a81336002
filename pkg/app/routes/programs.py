from fastapi import APIRouter
from app.models.program import CheckRequest, ReduceRequest, RoundtripRequest
from app.models.report import CheckSummary, ReduceSummary, RoundtripSummary
from app.services.program_service import check_source, reduce_source, roundtrip_source, summarize_check
from app.schemas.response import StandardResponse

router = APIRouter(tags=["Programs"])

@router.post("/check", response_model=StandardResponse[CheckSummary])
async def check_program_source(request: CheckRequest):
    """Typecheck a program and return its derivation and leftover"""
    summary = summarize_check(check_source(request.source))
    return StandardResponse(
        success=True,
        message="Program checked successfully",
        data=summary
    )

@router.post("/reduce", response_model=StandardResponse[ReduceSummary])
async def reduce_program_source(request: ReduceRequest):
    """Run a program for a number of steps, or until no step is left"""
    summary = reduce_source(request.source, request.steps, request.to_end)
    return StandardResponse(
        success=True,
        message=f"Program reduced in {len(summary.trace)} steps",
        data=summary
    )

@router.post("/roundtrip", response_model=StandardResponse[RoundtripSummary])
async def roundtrip_program_source(request: RoundtripRequest):
    """Print a program after converting it to de Bruijn form and back"""
    summary = roundtrip_source(request.source)
    return StandardResponse(
        success=True,
        message="Program round trip printed",
        data=summary
    )
