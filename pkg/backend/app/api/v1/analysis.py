"""
판정 API
=========
표현 텍스트를 받아 CLI 와 같은 JSON 보고서를 돌려준다.
계산은 CPU 작업이므로 동기 핸들러(스레드풀)로 둔다.
"""
import logging
from typing import Any

from fastapi import APIRouter
from fastapi.responses import ORJSONResponse
from pydantic import BaseModel, Field

from app.cli import load_point
from app.core.decide import decide_algebra
from app.core.fibers import iso_equivalent
from app.core.presentation import parse_presentation
from app.core.report import dumps, with_header
from app.core.variety import build_mast_context, mast_status, slack_report, variety_polynomials

router = APIRouter()
logger = logging.getLogger(__name__)


class ReportResponse(ORJSONResponse):
    """키 정렬 + 유리수 문자열화 (CLI 출력과 바이트 동일)."""

    def render(self, content: Any) -> bytes:
        return dumps(content)


class DecideRequest(BaseModel):
    presentation: str = Field(..., description="표현 파일 본문 (.alg 문법)")
    fastpath: bool = Field(True, description="빠른 경로 사용 여부")
    name: str = Field("", description="보고서에 표시할 대수 이름")


class VarietyRequest(BaseModel):
    presentation: str
    path: str = Field(..., description='마스트 (왼쪽 토큰이 마지막에 적용), 예: "g b1 a"')


class IsoRequest(BaseModel):
    presentation: str
    path: str
    base: list[str] = Field(..., description="기준점 k0 (정준 변수 순서의 유리수 문자열)")
    point: list[str] = Field(..., description="비교점 k")


@router.post("/decide", response_class=ReportResponse)
def decide(request: DecideRequest):
    P = parse_presentation(request.presentation, name=request.name)
    verdict = decide_algebra(P, fastpath=request.fastpath)
    logger.info(f"decide [{P.name or '-'}] → {verdict.status}")
    return ReportResponse(with_header(verdict.to_dict(), "decide"))


@router.post("/variety", response_class=ReportResponse)
def variety(request: VarietyRequest):
    P = parse_presentation(request.presentation)
    p = P.quiver.parse_path(request.path)
    vp = variety_polynomials(P, p)
    status = mast_status(P, p)
    out = {"path": p.render(), "mast": status.to_dict(), "variety": vp.to_dict()}
    if status.is_mast:
        out["slack"] = slack_report(P, p).summary()
    return ReportResponse(with_header(out, "variety"))


@router.post("/iso", response_class=ReportResponse)
def iso(request: IsoRequest):
    P = parse_presentation(request.presentation)
    p = P.quiver.parse_path(request.path)
    ctx = build_mast_context(P, p)
    k0, k = load_point(",".join(request.base), ctx), load_point(",".join(request.point), ctx)
    outcome = iso_equivalent(P, p, k0, k)
    return ReportResponse(with_header({"path": p.render(), **outcome.to_dict()}, "iso"))
