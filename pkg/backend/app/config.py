"""
설정
=====
환경 변수 / .env 로 덮어쓸 수 있는 판정 파이프라인 파라미터.
"""
from fractions import Fraction
from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", extra="ignore")

    # App
    PROJECT_NAME: str = "Uniserial Type Analyzer"
    ENVIRONMENT: str = "development"
    API_V1_PREFIX: str = "/api/v1"
    LOG_LEVEL: str = "INFO"

    # ----------------------------------------------------------------
    # 격자 탐색 (증인 탐색 / 동형류 탐침)
    # ----------------------------------------------------------------

    # 기본 격자 (증인 탐색 선호 순서)
    GRID_VALUES: list[str] = ["0", "1", "-1", "2", "-2"]

    # 적응적 확장 2단계
    GRID_EXPANSIONS: list[list[str]] = [
        ["3", "-3", "1/2", "-1/2"],
        ["4", "-4", "1/3", "-1/3"],
    ]

    # 마스트당 열거할 탐침 점 상한 (초과 시 절단 기록)
    MAX_GRID_POINTS: int = 4096

    # ----------------------------------------------------------------
    # 표현 / 판정
    # ----------------------------------------------------------------

    # 단항 입력에서 L 을 유도할 때의 상한
    MAX_LOEWY_LENGTH: int = 32

    # 빠른 경로 사용 여부
    FASTPATH_ENABLED: bool = True

    # 카탈로그만으로 판정하는 최대 L (J^5 = 0)
    CATALOGUE_DECISIVE_MAX_L: int = 5

    # 마스트별 판정 스레드 수 (1 = 순차)
    MAX_WORKERS: int = 1

    def grid(self) -> list[Fraction]:
        return [Fraction(v) for v in self.GRID_VALUES]

    def grid_stages(self, base: list[Fraction] | None = None) -> list[list[Fraction]]:
        """누적 격자 [G0, G1, G2]. base 를 주면 G0 을 대체."""
        stages = [list(base) if base is not None else self.grid()]
        for extra in self.GRID_EXPANSIONS:
            stages.append(stages[-1] + [Fraction(v) for v in extra])
        return stages


@lru_cache
def get_settings() -> Settings:
    return Settings()


settings = get_settings()
