"""
퀴버 코어
==========
정점·화살표·경로와, 판정 파이프라인 전체에서 쓰는 순수 조합적 경로 술어.

경로 표기 규약:
  저장 순서  : 적용 순서 (먼저 적용되는 화살표가 앞)
  출력 순서  : 합성 순서 (왼쪽 토큰이 마지막에 적용) → "g b1 a" = γβ₁α
  오른쪽 부분경로 : 적용 순서의 접두 (p = u′u 에서 u)
  왼쪽 부분경로   : 적용 순서의 접미
"""
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from app.core.errors import CompositionError, PresentationError

Vertex = str

PATH_ORDER_NOTE = "display: left token applied last"


@dataclass(frozen=True, order=True)
class Arrow:
    name: str
    source: Vertex
    target: Vertex

    @property
    def is_loop(self) -> bool:
        return self.source == self.target


@dataclass(frozen=True)
class Path:
    """적용 순서로 저장한 경로. 길이 0 이면 base 정점만 기록."""

    base: Vertex
    arrows: tuple[Arrow, ...] = ()

    def __post_init__(self) -> None:
        if self.arrows and self.arrows[0].source != self.base:
            raise CompositionError(
                f"경로 시작점 불일치: base={self.base}, 첫 화살표 {self.arrows[0].name}"
            )
        for a, b in zip(self.arrows, self.arrows[1:]):
            if a.target != b.source:
                raise CompositionError(f"합성 불가: {a.name} 다음에 {b.name}")

    @classmethod
    def trivial(cls, vertex: Vertex) -> "Path":
        return cls(vertex)

    @classmethod
    def of(cls, arrows: Sequence[Arrow]) -> "Path":
        if not arrows:
            raise CompositionError("빈 화살표 목록으로는 base 를 알 수 없음")
        return cls(arrows[0].source, tuple(arrows))

    # ── 접근자 ─────────────────────────────────────────────
    @property
    def length(self) -> int:
        return len(self.arrows)

    @property
    def source(self) -> Vertex:
        return self.base

    @property
    def target(self) -> Vertex:
        return self.arrows[-1].target if self.arrows else self.base

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.arrows)

    @property
    def first_arrow(self) -> Arrow | None:
        return self.arrows[0] if self.arrows else None

    @property
    def last_arrow(self) -> Arrow | None:
        return self.arrows[-1] if self.arrows else None

    def vertex_sequence(self) -> tuple[Vertex, ...]:
        """e(0), e(1), …, e(l)."""
        return (self.base,) + tuple(a.target for a in self.arrows)

    def prefix(self, n: int) -> "Path":
        """길이 n 의 오른쪽 부분경로."""
        return Path(self.base, self.arrows[:n])

    def sort_key(self) -> tuple:
        return (self.length, self.names, self.base)

    def render(self) -> str:
        if not self.arrows:
            return f"e{self.base}"
        return " ".join(reversed(self.names))

    def __str__(self) -> str:
        return self.render()


def compose(q: Path, p: Path) -> Path:
    """'q after p'."""
    if q.source != p.target:
        raise CompositionError(
            f"합성 불가: source({q.render()})={q.source} ≠ target({p.render()})={p.target}"
        )
    return Path(p.base, p.arrows + q.arrows)


def right_subpaths(p: Path) -> list[Path]:
    return [p.prefix(n) for n in range(p.length + 1)]


def is_right_subpath(u: Path, p: Path) -> bool:
    if u.length > p.length:
        return False
    return u.base == p.base and p.arrows[: u.length] == u.arrows


def is_left_subpath(u: Path, p: Path) -> bool:
    if u.length > p.length:
        return False
    if u.length == 0:
        return u.base == p.target
    return p.arrows[p.length - u.length:] == u.arrows


def is_subpath(u: Path, p: Path) -> bool:
    if u.length == 0:
        return u.base in p.vertex_sequence()
    n = u.length
    return any(p.arrows[i:i + n] == u.arrows for i in range(p.length - n + 1))


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 퀴버
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class Quiver:
    vertices: tuple[Vertex, ...]
    arrows: tuple[Arrow, ...]
    _by_name: dict[str, Arrow] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.vertices:
            raise PresentationError("정점 집합이 비어 있음")
        if len(set(self.vertices)) != len(self.vertices):
            raise PresentationError("정점 이름 중복")
        vset = set(self.vertices)
        for a in self.arrows:
            if a.name in self._by_name:
                raise PresentationError(f"화살표 이름 중복: {a.name}")
            if a.source not in vset or a.target not in vset:
                raise PresentationError(f"화살표 {a.name} 의 끝점이 정점 집합 밖에 있음")
            self._by_name[a.name] = a

    @classmethod
    def build(cls, vertices: Iterable[Vertex], arrows: Iterable[Arrow]) -> "Quiver":
        return cls(tuple(sorted(vertices)), tuple(sorted(arrows)))

    def arrow(self, name: str) -> Arrow:
        try:
            return self._by_name[name]
        except KeyError:
            raise PresentationError(f"알 수 없는 화살표: {name}") from None

    def arrows_from(self, v: Vertex) -> list[Arrow]:
        return [a for a in self.arrows if a.source == v]

    def arrows_between(self, s: Vertex, t: Vertex) -> list[Arrow]:
        return [a for a in self.arrows if a.source == s and a.target == t]

    def loops_at(self, v: Vertex) -> list[Arrow]:
        return self.arrows_between(v, v)

    def trivial(self, v: Vertex) -> Path:
        if v not in self.vertices:
            raise PresentationError(f"알 수 없는 정점: {v}")
        return Path(v)

    def path_from_tokens(self, tokens: Sequence[str]) -> Path:
        """출력 순서 토큰 → 경로. 'e<v>' 단일 토큰은 자명한 경로."""
        if not tokens:
            raise PresentationError("빈 경로")
        if len(tokens) == 1 and tokens[0] not in self._by_name and tokens[0].startswith("e"):
            return self.trivial(tokens[0][1:])
        return Path.of([self.arrow(t) for t in reversed(tokens)])

    def parse_path(self, text: str) -> Path:
        return self.path_from_tokens(text.split())

    def opposite(self) -> "Quiver":
        return Quiver.build(self.vertices, (Arrow(a.name, a.target, a.source) for a in self.arrows))


def double_arrow_pair(q: Quiver) -> tuple[Arrow, Arrow] | None:
    """같은 (source, target) 을 가지는 첫 화살표 쌍 (정렬된 화살표 순서)."""
    seen: dict[tuple[Vertex, Vertex], Arrow] = {}
    for a in q.arrows:
        key = (a.source, a.target)
        if key in seen:
            return seen[key], a
        seen[key] = a
    return None


def has_double_arrows(q: Quiver) -> bool:
    return double_arrow_pair(q) is not None


def is_acyclic(q: Quiver) -> bool:
    # 진입차수 제거(Kahn): 모든 정점이 제거되면 비순환
    indeg = {v: 0 for v in q.vertices}
    for a in q.arrows:
        indeg[a.target] += 1
    ready = [v for v, d in indeg.items() if d == 0]
    removed = 0
    while ready:
        v = ready.pop()
        removed += 1
        for a in q.arrows_from(v):
            indeg[a.target] -= 1
            if indeg[a.target] == 0:
                ready.append(a.target)
    return removed == len(q.vertices)


def extend_paths(q: Quiver, paths: Iterable[Path]) -> list[Path]:
    """각 경로 뒤에 화살표 하나를 더 적용한 경로들."""
    out = []
    for p in paths:
        for a in q.arrows_from(p.target):
            out.append(Path(p.base, p.arrows + (a,)))
    return out


def enumerate_paths(q: Quiver, source: Vertex, target: Vertex, lengths: range) -> list[Path]:
    if len(lengths) == 0:
        return []
    found: list[Path] = []
    frontier = [Path(source)]
    for n in range(max(lengths) + 1):
        if n in lengths:
            found.extend(p for p in frontier if p.target == target)
        frontier = extend_paths(q, frontier)
    return sorted(found, key=Path.sort_key)


def cycles_at(q: Quiver, e: Vertex, maxlen: int) -> list[Path]:
    return enumerate_paths(q, e, e, range(0, maxlen + 1))
