from fastapi import APIRouter
from typing import List
from app.models.report import AlgebraInfo
from app.services.algebra_service import DEFAULT_ALGEBRAS
from app.schemas.response import StandardResponse

router = APIRouter(tags=["Algebras"])

@router.get("/", response_model=StandardResponse[List[AlgebraInfo]])
async def read_algebras():
    """List the registered usage algebras"""
    algebras = [
        AlgebraInfo(idx=idx, zero=alg.show(alg.zero), one=alg.show(alg.one), finite=alg.finite)
        for idx, alg in DEFAULT_ALGEBRAS.items()
    ]
    return StandardResponse(
        success=True,
        message="Algebras retrieved successfully",
        data=algebras
    )
