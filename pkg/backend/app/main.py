"""
Uniserial Type Analyzer FastAPI 앱
===================================
유한 uniserial 형 판정 파이프라인을 HTTP 로 노출.
도메인 예외(UniserialError)는 HTTP 400 으로 변환한다.
"""
from contextlib import asynccontextmanager
import logging

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.middleware.gzip import GZipMiddleware
from fastapi.responses import ORJSONResponse

from app.api.v1 import analysis
from app.config import settings
from app.core.errors import UniserialError
from app.middleware import LoggingMiddleware

logging.basicConfig(
    level=settings.LOG_LEVEL.upper(),
    format="%(asctime)s [%(levelname)s] %(message)s",
)
logger = logging.getLogger(__name__)

VERSION = "0.3.0"


@asynccontextmanager
async def lifespan(app: FastAPI):
    """앱 시작/종료 이벤트"""
    logger.info(
        f"Uniserial API 서버 시작 (환경: {settings.ENVIRONMENT}, "
        f"격자 {settings.GRID_VALUES}, 빠른 경로 {settings.FASTPATH_ENABLED})"
    )
    yield
    logger.info("Uniserial API 서버 종료")


app = FastAPI(
    title=settings.PROJECT_NAME,
    description=(
        "quiver with relations 로 주어진 대수의 유한 uniserial 형 판정\n\n"
        "## 엔드포인트\n"
        "- decide: 대수 전체 판정 (FiniteType / InfiniteType / Unknown)\n"
        "- variety: 마스트의 V_p 정의 다항식과 slack 보고서\n"
        "- iso: V_p 의 두 점이 같은 uniserial 가군을 주는지\n\n"
        "경로 표기: 왼쪽 토큰이 마지막에 적용\n"
    ),
    version=VERSION,
    lifespan=lifespan,
    default_response_class=ORJSONResponse,
    docs_url="/docs" if settings.ENVIRONMENT == "development" else None,
    redoc_url="/redoc" if settings.ENVIRONMENT == "development" else None,
)

# ── 미들웨어 등록 순서: 바깥쪽(먼저 실행)부터 안쪽 순 ──────────────
app.add_middleware(GZipMiddleware, minimum_size=1024)
app.add_middleware(LoggingMiddleware)
if settings.ENVIRONMENT == "development":
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )


@app.exception_handler(UniserialError)
async def uniserial_error_handler(request: Request, exc: UniserialError) -> ORJSONResponse:
    logger.warning(f"입력 오류 {request.url.path}: {exc}")
    return ORJSONResponse(status_code=400, content={"detail": str(exc), "type": type(exc).__name__})


app.include_router(
    analysis.router,
    prefix=f"{settings.API_V1_PREFIX}/analysis",
    tags=["판정"],
)


@app.get("/health", tags=["시스템"])
async def health():
    return {"status": "ok", "service": "uniserial-api", "version": VERSION}
