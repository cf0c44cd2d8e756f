"""
도메인 예외
============
표현(presentation) 파싱부터 판정 파이프라인까지 공용으로 쓰는 예외 계층.

CLI 는 UniserialError 를 종료 코드 1 로, API 는 HTTP 400 으로 변환한다.
Unknown 판정은 예외가 아니라 값으로 돌려준다.
"""


class UniserialError(Exception):
    """모든 도메인 예외의 루트."""


class PresentationSyntaxError(UniserialError):
    """입력 문법 오류 (줄/열 위치 포함)."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class PresentationError(UniserialError):
    """문법은 맞지만 의미가 잘못된 표현 (평행성, 항 길이, loewy 누락 등)."""


class CompositionError(UniserialError):
    """끝점이 맞지 않는 경로 합성."""


class EvaluationError(UniserialError):
    """다항식 평가 시 변수 값 누락."""


class PreconditionError(UniserialError):
    """연산의 사전조건 위반 (예: 마스트가 아닌 경로에 slack 분석 요청)."""


class UnsupportedOperationError(UniserialError):
    """현재 입력 종류에서 지원하지 않는 연산."""


class PointFormatError(UniserialError):
    """좌표 문자열의 차원 불일치 또는 잘못된 유리수."""


class GeneratorInputError(UniserialError):
    """생성기 입력(다중선형 시스템, 지수 행렬) 불변식 위반."""
