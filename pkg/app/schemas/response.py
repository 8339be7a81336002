from typing import Generic, TypeVar, Optional
from pydantic import BaseModel, ConfigDict

T = TypeVar('T')

class StandardResponse(BaseModel, Generic[T]):
    """Standard response format for the API and the CLI's --json output"""
    success: bool = True
    message: str
    data: Optional[T] = None

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "success": True,
                "message": "Program checked",
                "data": {"leftover": "[]"}
            }
        }
    )
