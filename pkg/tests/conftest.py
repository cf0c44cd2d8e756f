"""
pytest 공통 픽스처
==================
모든 테스트에서 공유하는 경로 설정, 픽스처 로더, 작은 헬퍼.

구조:
  - load_fixture(name): fixtures/<name>.alg 파싱 (캐시)
  - mast(P, text): 출력 순서 경로 파싱
  - point(ctx, *values): 정준 변수 순서의 좌표
  - rng: numpy default_rng(고정 시드)

실행: pytest tests/ -v
"""
from fractions import Fraction
from functools import lru_cache
import os
import sys

import numpy as np
import pytest

# 백엔드 모듈 경로 추가
BASE_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
BACKEND_DIR = os.path.join(BASE_DIR, "backend")
sys.path.insert(0, BACKEND_DIR)

FIXTURE_DIR = os.path.join(BASE_DIR, "fixtures")
FIXTURE_NAMES = ("ex23a", "ex23d", "ex23e", "ex36", "ex42c", "ex52", "ex56a", "ex56b", "ex59")


def fixture_path(name: str) -> str:
    suffix = "" if "." in name else ".alg"
    return os.path.join(FIXTURE_DIR, name + suffix)


@lru_cache(maxsize=None)
def load_fixture(name: str):
    from app.core.presentation import load_presentation

    return load_presentation(fixture_path(name))


def mast(P, text: str):
    return P.quiver.parse_path(text)


def point(ctx, *values) -> dict:
    assert len(values) == len(ctx.variables), f"좌표 개수 {len(values)} ≠ |D|={len(ctx.variables)}"
    return {v: Fraction(x) for v, x in zip(ctx.variables, values)}


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


@pytest.fixture(params=FIXTURE_NAMES)
def any_fixture(request):
    return load_fixture(request.param)
