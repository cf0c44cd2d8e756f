"""
대수 표현 (quiver with relations)
==================================
Λ = KΓ/I 의 좌표화: 유리수 계수 관계식, 멱영 상한 L, 단항(monomial) 판별,
단항 아이디얼 소속 판정, 텍스트 파싱/직렬화, 반대 대수 변환.

입력 문법 (UTF-8, 줄 단위, '#' 주석):
  vertices: 1 2 3
  arrow a: 1 -> 2
  loewy: 5                 (단항 입력이면 생략 가능)
  relations:
  g g
  g b1 a - g b2 a          (왼쪽 토큰이 마지막에 적용, 계수 '1*' 생략 가능)
"""
from dataclasses import dataclass, field
from fractions import Fraction
import logging
from pathlib import Path as FilePath
import re

from app.config import settings
from app.core.errors import (
    CompositionError,
    PresentationError,
    PresentationSyntaxError,
    UnsupportedOperationError,
)
from app.core.poly import format_scalar
from app.core.quiver import (
    PATH_ORDER_NOTE,
    Arrow,
    Path,
    Quiver,
    extend_paths,
    is_left_subpath,
    is_subpath,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Relation:
    terms: tuple[tuple[Fraction, Path], ...]

    def __post_init__(self) -> None:
        if not self.terms:
            raise PresentationError("관계식에 항이 없음")
        first = self.terms[0][1]
        seen: set[Path] = set()
        for c, p in self.terms:
            if c == 0:
                raise PresentationError(f"0 계수 항: {p.render()}")
            if p.length < 2:
                raise PresentationError(f"관계식 항의 길이는 2 이상이어야 함: {p.render()}")
            if (p.source, p.target) != (first.source, first.target):
                raise PresentationError(
                    f"평행하지 않은 항: {first.render()} ({first.source}→{first.target}) vs "
                    f"{p.render()} ({p.source}→{p.target})"
                )
            if p in seen:
                raise PresentationError(f"중복 경로: {p.render()}")
            seen.add(p)

    @property
    def source(self) -> str:
        return self.terms[0][1].source

    @property
    def target(self) -> str:
        return self.terms[0][1].target

    @property
    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def render(self) -> str:
        parts: list[str] = []
        for c, p in self.terms:
            mag = abs(c)
            body = p.render() if mag == 1 else f"{format_scalar(mag)}*{p.render()}"
            if not parts:
                parts.append(f"-{body}" if c < 0 else body)
            else:
                parts.append(f"- {body}" if c < 0 else f"+ {body}")
        return " ".join(parts)


@dataclass(frozen=True)
class Presentation:
    quiver: Quiver
    relations: tuple[Relation, ...]
    loewy: int
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.loewy < 2:
            raise PresentationError(f"멱영 상한 L 은 2 이상이어야 함 (L={self.loewy})")
        for r in self.relations:
            for _, p in r.terms:
                if p.length >= self.loewy:
                    raise PresentationError(f"길이 ≥ L 인 관계식 항: {p.render()}")

    @property
    def monomial(self) -> bool:
        return all(r.is_monomial for r in self.relations)

    @property
    def generators(self) -> list[Path]:
        if not self.monomial:
            raise UnsupportedOperationError("단항 표현이 아님")
        return [r.terms[0][1] for r in self.relations]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "vertices": list(self.quiver.vertices),
            "arrows": [{"name": a.name, "source": a.source, "target": a.target} for a in self.quiver.arrows],
            "relations": [r.render() for r in self.relations],
            "loewy": self.loewy,
            "monomial": self.monomial,
        }


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 단항 아이디얼
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def is_monomial(P: Presentation) -> bool:
    return P.monomial


def monomial_contains(P: Presentation, q: Path) -> bool:
    if not P.monomial:
        raise UnsupportedOperationError("monomial_contains 는 단항 표현에서만 정의됨")
    return q.length >= P.loewy or any(is_subpath(g, q) for g in P.generators)


def _avoiding_layers(quiver: Quiver, generators: list[Path], maxlen: int) -> list[list[Path]]:
    """생성자를 부분경로로 포함하지 않는 경로를 길이별로 (0..maxlen).

    확장할 때 새로 생긴 접미(왼쪽 부분경로)만 검사하면 충분하다.
    """
    layers = [[Path(v) for v in quiver.vertices]]
    while len(layers) <= maxlen:
        nxt = [
            p for p in extend_paths(quiver, layers[-1])
            if not any(is_left_subpath(g, p) for g in generators)
        ]
        if not nxt:
            break
        layers.append(nxt)
    return layers


def monomial_loewy(quiver: Quiver, generators: list[Path]) -> int:
    """1 + (생성자를 피하는 가장 긴 경로의 길이)."""
    cap = settings.MAX_LOEWY_LENGTH
    layers = _avoiding_layers(quiver, generators, cap + 1)
    if len(layers) > cap:
        raise PresentationError(
            f"생성자를 피하는 경로가 길이 {cap} 을 넘음: 몫대수가 유한차원이 아니거나 MAX_LOEWY_LENGTH 초과"
        )
    return max(len(layers), 2)


def nonzero_paths(P: Presentation, maxlen: int) -> list[Path]:
    if not P.monomial:
        raise UnsupportedOperationError("일반 표현의 마스트 판정은 variety 모듈에서 수행")
    bound = min(maxlen, P.loewy - 1)
    if bound < 0:
        return []
    layers = _avoiding_layers(P.quiver, P.generators, bound)
    return sorted((p for layer in layers for p in layer), key=Path.sort_key)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 반대 대수
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def reverse_path(p: Path, opposite: Quiver) -> Path:
    if p.length == 0:
        return Path(p.base)
    return Path.of([opposite.arrow(a.name) for a in reversed(p.arrows)])


def opposite_presentation(P: Presentation) -> Presentation:
    opp = P.quiver.opposite()
    relations = tuple(
        Relation(tuple((c, reverse_path(p, opp)) for c, p in r.terms)) for r in P.relations
    )
    if P.name.endswith("^op"):
        name = P.name[: -len("^op")]
    else:
        name = f"{P.name}^op" if P.name else ""
    return Presentation(opp, relations, P.loewy, name)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 파싱 / 직렬화
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
_IDENT = r"[A-Za-z_][A-Za-z0-9_']*"
_ARROW_LINE = re.compile(rf"arrow\s+(?P<name>{_IDENT})\s*:\s*(?P<src>\S+)\s*->\s*(?P<tgt>\S+)\s*$")
_REL_TOKEN = re.compile(rf"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<ident>{_IDENT})|(?P<op>[-+*]))")


def _parse_relation_terms(text: str, lineno: int, offset: int, quiver: Quiver) -> list[tuple[Fraction, Path]]:
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _REL_TOKEN.match(text, pos)
        if not m:
            col = offset + pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
            raise PresentationSyntaxError(f"해석할 수 없는 토큰: {text[pos:].split()[0]!r}", lineno, col)
        kind = m.lastgroup or "op"
        tokens.append((kind, m[kind], offset + m.start(kind) + 1))
        pos = m.end()

    terms: list[tuple[Fraction, Path]] = []
    i = 0
    while i < len(tokens):
        sign = Fraction(1)
        kind, val, col = tokens[i]
        if kind == "op" and val in "+-":
            sign = Fraction(-1) if val == "-" else sign
            i += 1
        elif terms:
            raise PresentationSyntaxError("항 사이에 + 또는 - 가 필요함", lineno, col)
        coeff = Fraction(1)
        if i < len(tokens) and tokens[i][0] == "num":
            _, num, ncol = tokens[i]
            if i + 1 >= len(tokens) or tokens[i + 1][1] != "*":
                raise PresentationSyntaxError("계수 뒤에 '*' 가 필요함", lineno, ncol)
            try:
                coeff = Fraction(num)
            except ZeroDivisionError:
                raise PresentationSyntaxError(f"분모가 0 인 계수: {num}", lineno, ncol) from None
            i += 2
        names: list[str] = []
        while i < len(tokens) and tokens[i][0] == "ident":
            names.append(tokens[i][1])
            i += 1
        if not names:
            col = tokens[i][2] if i < len(tokens) else (tokens[-1][2] if tokens else offset + 1)
            raise PresentationSyntaxError("경로가 필요함", lineno, col)
        try:
            path = quiver.path_from_tokens(names)
        except PresentationError as e:
            raise PresentationSyntaxError(str(e), lineno, col) from None
        except CompositionError as e:
            raise PresentationSyntaxError(f"합성 불가 경로 {' '.join(names)}: {e}", lineno, col) from None
        terms.append((sign * coeff, path))
    return terms


def _merge_terms(terms: list[tuple[Fraction, Path]]) -> list[tuple[Fraction, Path]]:
    merged: dict[Path, Fraction] = {}
    for c, p in terms:
        merged[p] = merged.get(p, Fraction(0)) + c
    return [(c, p) for p, c in merged.items() if c != 0]


def parse_presentation(text: str, name: str = "") -> Presentation:
    vertices: list[str] | None = None
    arrows: list[Arrow] = []
    loewy: int | None = None
    raw_relations: list[tuple[int, int, str]] = []
    in_relations = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.strip()
        if not stripped:
            continue
        indent = len(line) - len(line.lstrip())
        if stripped.startswith("vertices:"):
            vertices = stripped[len("vertices:"):].split()
            in_relations = False
        elif stripped.startswith("arrow "):
            m = _ARROW_LINE.match(stripped)
            if not m:
                raise PresentationSyntaxError("형식: arrow <name>: <src> -> <tgt>", lineno, indent + 1)
            arrows.append(Arrow(m["name"], m["src"], m["tgt"]))
            in_relations = False
        elif stripped.startswith("loewy:"):
            value = stripped[len("loewy:"):].strip()
            if not value.isdigit():
                raise PresentationSyntaxError(f"loewy 값은 자연수여야 함: {value!r}", lineno, indent + 7)
            loewy = int(value)
            in_relations = False
        elif stripped.startswith("relations:"):
            in_relations = True
            rest = stripped[len("relations:"):]
            if rest.strip():
                raw_relations.append((lineno, indent + len("relations:"), rest))
        elif in_relations:
            raw_relations.append((lineno, indent, stripped))
        else:
            raise PresentationSyntaxError(f"알 수 없는 지시어: {stripped.split()[0]!r}", lineno, indent + 1)

    if vertices is None:
        raise PresentationSyntaxError("'vertices:' 지시어가 없음", 1, 1)
    quiver = Quiver.build(vertices, arrows)

    relations: list[list[tuple[Fraction, Path]]] = []
    for lineno, offset, body in raw_relations:
        terms = _merge_terms(_parse_relation_terms(body, lineno, offset, quiver))
        if not terms:
            logger.warning(f"{lineno}행: 항이 모두 상쇄된 관계식 무시")
            continue
        try:
            Relation(tuple(terms))
        except PresentationError as e:
            raise PresentationError(f"{lineno}행: {e}") from None
        relations.append(terms)

    monomial_input = all(len(t) == 1 for t in relations)
    if loewy is None:
        if not monomial_input:
            raise PresentationError("단항이 아닌 표현은 'loewy: L' 지시어가 필요함")
        loewy = monomial_loewy(quiver, [t[0][1] for t in relations])

    kept: list[Relation] = []
    for terms in relations:
        short = [(c, p) for c, p in terms if p.length < loewy]
        if len(short) < len(terms):
            dropped = ", ".join(p.render() for c, p in terms if p.length >= loewy)
            logger.warning(f"길이 ≥ L={loewy} 인 중복 항 제거: {dropped}")
        if short:
            kept.append(Relation(tuple(short)))
    return Presentation(quiver, tuple(kept), loewy, name)


def load_presentation(path: str | FilePath) -> Presentation:
    fp = FilePath(path)
    try:
        text = fp.read_text(encoding="utf-8")
    except OSError as e:
        raise PresentationError(f"파일을 읽을 수 없음: {fp} ({e})") from e
    return parse_presentation(text, name=fp.stem)


def serialize(P: Presentation) -> str:
    lines = [f"# path order: {PATH_ORDER_NOTE}"]
    if P.name:
        lines.append(f"# algebra: {P.name}")
    lines.append("vertices: " + " ".join(P.quiver.vertices))
    lines.extend(f"arrow {a.name}: {a.source} -> {a.target}" for a in P.quiver.arrows)
    lines.append(f"loewy: {P.loewy}")
    lines.append("relations:")
    lines.extend(r.render() for r in P.relations)
    return "\n".join(lines) + "\n"

