import logging
from enum import Enum
from typing import Any, Dict, List

from pydantic import BaseModel

logger = logging.getLogger(__name__)


def _process_dict(data: Dict) -> Dict:
    return {str(key): _process_value(value) for key, value in data.items()}


def _process_list(data: List) -> List:
    return [_process_value(item) for item in data]


def _process_value(value: Any) -> Any:
    if value is None or isinstance(value, (str, int, float, bool)):
        return value
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, dict):
        return _process_dict(value)
    if isinstance(value, (list, tuple)):
        return _process_list(list(value))
    return str(value)


def safe_serialize(data: Any) -> Any:
    """
    Convert results holding pydantic models, enums and tuples into plain JSON data.
    """
    try:
        return _process_value(data)
    except Exception as e:
        logger.error(f"Serialization error: {str(e)}")
        return [] if isinstance(data, (list, tuple)) else {}
