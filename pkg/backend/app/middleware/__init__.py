"""
Uniserial API 미들웨어
======================
요청 로깅 (Correlation ID)
"""
from .logging_middleware import LoggingMiddleware

__all__ = ["LoggingMiddleware"]
