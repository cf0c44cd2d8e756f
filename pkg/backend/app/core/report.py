"""
보고서 직렬화
==============
CLI·API 가 공유하는 JSON 출력. orjson 키 정렬 + 2칸 들여쓰기로 바이트 안정.
유리수는 문자열("1/2", "-1"), 경로는 출력 순서 문자열로 내보낸다.
"""
from fractions import Fraction
from typing import Any

import orjson

from app.core.poly import Polynomial, VarKey, format_scalar
from app.core.quiver import PATH_ORDER_NOTE, Path

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_NON_STR_KEYS


def _default(obj: Any) -> Any:
    if isinstance(obj, Fraction):
        return format_scalar(obj)
    if isinstance(obj, (VarKey, Path, Polynomial)):
        return obj.render()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"직렬화할 수 없는 타입: {type(obj).__name__}")


def dumps(payload: Any) -> bytes:
    return orjson.dumps(payload, default=_default, option=JSON_OPTIONS)


def with_header(payload: dict, command: str) -> dict:
    return {"command": command, "path_order": PATH_ORDER_NOTE, **payload}


def report_json(payload: Any, command: str | None = None) -> str:
    """개행으로 끝나는 JSON 텍스트."""
    if command is not None and isinstance(payload, dict):
        payload = with_header(payload, command)
    return dumps(payload).decode("utf-8") + "\n"
