"""
정답이 알려진 표현 생성기
==========================
1) 다양체 실현: 다중선형 시스템 f₁..f_M 으로부터, 지정 마스트 p 의 V_p 가
   f 의 영점 집합과 같아지는 표현을 만든다.
2) 타일 차수(tiled order) 몫: 지수 행렬 λ 로부터 O/πO 의 표현을 만든다.
   항상 유한 uniserial 형이며 어떤 마스트에서도 같은 단순 가군이 두 번 나오지 않는다.

타일 차수의 화살표 규칙 (이 모듈의 선택):
  i → j 화살표 ⇔ λ_ij 가 기약 (모든 k ∉ {i,j} 에 대해 λ_ij < λ_ik + λ_kj), 루프 없음
  경로 가치 v(p) = Σ λ(화살표),  v(p) > λ_ij 이면 0, v(p) = λ_ij 인 평행 경로끼리는 같음
"""
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
import itertools
import logging

import numpy as np

from app.core.errors import GeneratorInputError, PresentationSyntaxError
from app.core.poly import NS_PLAIN, Polynomial, VarKey, parse_polynomial
from app.core.presentation import Presentation, Relation
from app.core.quiver import Arrow, Path, Quiver, extend_paths
from app.core.variety import Point, build_mast_context

logger = logging.getLogger(__name__)

# 무작위 지수 행렬 원소 범위 (닫힘 전)
RANDOM_ENTRY_MAX = 3


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 다중선형 시스템
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class MultilinearSystem:
    """변수 X1..Xm, 각 단항식에서 모든 변수의 차수 ≤ 1."""

    m: int
    polynomials: tuple[Polynomial, ...] = ()

    def __post_init__(self) -> None:
        if self.m < 1:
            raise GeneratorInputError(f"변수 개수 m 은 1 이상이어야 함 (m={self.m})")
        for f in self.polynomials:
            for v in f.variables():
                if v.namespace != NS_PLAIN or not 1 <= v.index <= self.m:
                    raise GeneratorInputError(f"X1..X{self.m} 밖의 변수: {v.render()}")
                if f.degree_in(v) > 1:
                    raise GeneratorInputError(f"다중선형이 아님: {v.render()} 의 차수 {f.degree_in(v)} ({f.render()})")

    @property
    def variables(self) -> list[VarKey]:
        return [VarKey.plain(j) for j in range(1, self.m + 1)]

    def coefficient_maps(self) -> list[dict[frozenset[int], Fraction]]:
        """f_i 마다 c_i(A), A ⊆ {1..m}."""
        maps = []
        for f in self.polynomials:
            maps.append({frozenset(v.index for v, _ in mono): c for mono, c in f.terms.items()})
        return maps

    def zeros_on(self, values: Sequence[Fraction]) -> list[tuple[Fraction, ...]]:
        """격자 values^m 에서 모든 f_i 가 0 인 점 (사전식 순서)."""
        out = []
        for coords in itertools.product(values, repeat=self.m):
            point = dict(zip(self.variables, coords))
            if all(f.evaluate(point) == 0 for f in self.polynomials):
                out.append(tuple(coords))
        return out

    def to_dict(self) -> dict:
        return {"m": self.m, "polys": [f.render() for f in self.polynomials]}


def parse_multilinear(text: str) -> MultilinearSystem:
    """한 줄에 다항식 하나. 'vars: m' 지시어가 없으면 가장 큰 변수 번호를 m 으로."""
    m: int | None = None
    polys: list[Polynomial] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("vars:"):
            value = line[len("vars:"):].strip()
            if not value.isdigit():
                raise PresentationSyntaxError(f"vars 값은 자연수여야 함: {value!r}", lineno, 6)
            m = int(value)
            continue
        polys.append(parse_polynomial(line, line=lineno))
    if m is None:
        m = max((v.index for f in polys for v in f.variables()), default=0)
    return MultilinearSystem(m, tuple(f for f in polys if not f.is_zero()))


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 다양체 실현
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass
class RealizedVariety:
    presentation: Presentation
    mast: Path
    # 평범한 변수 Xj → 마스트의 우회 변수 X[a_j, 3j-2, 1]
    correspondence: dict[VarKey, VarKey] = field(default_factory=dict)

    def translate(self, coords: Sequence[Fraction]) -> Point:
        """(x₁..x_m) → 마스트 좌표."""
        return {self.correspondence[VarKey.plain(j)]: Fraction(c) for j, c in enumerate(coords, start=1)}

    def to_dict(self) -> dict:
        return {
            "presentation": self.presentation.to_dict(),
            "mast": self.mast.render(),
            "correspondence": {k.render(): v.render() for k, v in sorted(self.correspondence.items())},
        }


def realize_variety(system: MultilinearSystem) -> RealizedVariety:
    """
    정점 0..2m, 화살표 g_{j-1}: 2j-2 → 2j-1, 루프 b_j (2j-1), a_j: 2j-1 → 2j.
    p_j = a_j b_j,  p = p_m g_{m-1} ⋯ p_1 g_0,  L = 3m + 1.
    관계식 r_i = Σ_A c_i(A) · s_m g_{m-1} ⋯ s_1 g_0  (j ∈ A 이면 s_j = a_j, 아니면 p_j)  및 b_j².
    """
    m = system.m
    g = [Arrow(f"g{j - 1}", str(2 * j - 2), str(2 * j - 1)) for j in range(1, m + 1)]
    b = [Arrow(f"b{j}", str(2 * j - 1), str(2 * j - 1)) for j in range(1, m + 1)]
    a = [Arrow(f"a{j}", str(2 * j - 1), str(2 * j)) for j in range(1, m + 1)]
    quiver = Quiver.build((str(v) for v in range(2 * m + 1)), g + b + a)

    def word(subset: frozenset[int]) -> Path:
        arrows: list[Arrow] = []
        for j in range(m):
            arrows.append(g[j])
            if j + 1 not in subset:
                arrows.append(b[j])
            arrows.append(a[j])
        return Path.of(arrows)

    relations: list[Relation] = []
    for coeffs in system.coefficient_maps():
        terms = sorted(((c, word(A)) for A, c in coeffs.items() if c != 0), key=lambda t: t[1].sort_key())
        if terms:
            relations.append(Relation(tuple(terms)))
    relations.extend(Relation(((Fraction(1), Path.of([bj, bj])),)) for bj in b)

    P = Presentation(quiver, tuple(relations), 3 * m + 1, name=f"realized-{m}")
    mast = word(frozenset())
    ctx = build_mast_context(P, mast)
    correspondence = {VarKey.plain(j): ctx.detour(f"a{j}", 3 * j - 2).varkey(1) for j in range(1, m + 1)}
    logger.info(f"다양체 실현: m={m}, 관계식 {len(relations)}개, 마스트 {mast.render()}")
    return RealizedVariety(P, mast, correspondence)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 타일 차수
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class ExponentMatrix:
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.entries)
        if n < 1:
            raise GeneratorInputError("빈 지수 행렬")
        for i, row in enumerate(self.entries):
            if len(row) != n:
                raise GeneratorInputError(f"{i}행의 길이 {len(row)} ≠ {n}")
            if row[i] != 0:
                raise GeneratorInputError(f"대각 원소 λ_{i}{i} = {row[i]} ≠ 0")
            if any(x < 0 for x in row):
                raise GeneratorInputError(f"{i}행에 음수 원소")
        for i, j, k in itertools.product(range(n), repeat=3):
            if self.entries[i][j] + self.entries[j][k] < self.entries[i][k]:
                raise GeneratorInputError(
                    f"차수 조건 위반: λ_{i}{j} + λ_{j}{k} < λ_{i}{k} "
                    f"({self.entries[i][j]} + {self.entries[j][k]} < {self.entries[i][k]})"
                )
        for i, j in itertools.combinations(range(n), 2):
            if self.entries[i][j] + self.entries[j][i] < 1:
                raise GeneratorInputError(f"기본(basic) 조건 위반: λ_{i}{j} + λ_{j}{i} = 0")

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        return self.entries[ij[0]][ij[1]]

    def irreducible(self, i: int, j: int) -> bool:
        return i != j and all(self[i, j] < self[i, k] + self[k, j] for k in range(self.n) if k not in (i, j))

    def to_dict(self) -> dict:
        return {"n": self.n, "entries": [list(r) for r in self.entries]}


def parse_exponent_matrix(text: str) -> ExponentMatrix:
    rows: list[tuple[int, ...]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append(tuple(int(tok) for tok in line.split()))
        except ValueError:
            raise PresentationSyntaxError(f"정수가 아닌 원소: {line!r}", lineno, 1) from None
    return ExponentMatrix(tuple(rows))


def min_plus_closure(weights: np.ndarray) -> np.ndarray:
    """Floyd–Warshall 로 λ_ik ≤ λ_ij + λ_jk 를 만족하도록 닫음."""
    lam = weights.copy()
    np.fill_diagonal(lam, 0)
    for k in range(lam.shape[0]):
        lam = np.minimum(lam, lam[:, [k]] + lam[[k], :])
    return lam


def random_exponent_matrix(rng: np.random.Generator, n: int = 3) -> ExponentMatrix:
    """
    위삼각은 0..MAX, 아래삼각은 1..MAX 에서 뽑고 min-plus 닫음.
    모든 순환은 아래삼각 원소를 하나 이상 지나므로 닫힌 뒤에도 기본 조건이 유지된다.
    """
    upper = rng.integers(0, RANDOM_ENTRY_MAX + 1, size=(n, n))
    lower = rng.integers(1, RANDOM_ENTRY_MAX + 1, size=(n, n))
    weights = np.where(np.triu(np.ones((n, n), dtype=bool)), upper, lower)
    lam = min_plus_closure(weights)
    return ExponentMatrix(tuple(tuple(int(x) for x in row) for row in lam))


def _tiled_arrow_name(i: int, j: int) -> str:
    return f"t{i}_{j}"


def tiled_order_presentation(lam: ExponentMatrix) -> Presentation:
    n = lam.n
    arrows = [
        Arrow(_tiled_arrow_name(i, j), str(i), str(j))
        for i, j in itertools.product(range(n), repeat=2)
        if lam.irreducible(i, j)
    ]
    quiver = Quiver.build((str(v) for v in range(n)), arrows)

    def value(p: Path) -> int:
        return sum(lam[int(x.source), int(x.target)] for x in p.arrows)

    def alive(p: Path) -> bool:
        return value(p) == lam[int(p.source), int(p.target)]

    # 0 이 된 경로의 확장은 계속 0 (삼각 부등식) 이므로 층별로 가지치기
    nonzero: list[Path] = []
    minimal_zero: list[Path] = []
    frontier = [Path(str(v)) for v in range(n)]
    while frontier:
        nxt: list[Path] = []
        for q in extend_paths(quiver, frontier):
            if alive(q):
                nxt.append(q)
            elif q.length >= 2 and alive(Path.of(q.arrows[1:])):
                minimal_zero.append(q)
        nonzero.extend(q for q in nxt if q.length >= 2)
        frontier = nxt
        longest = frontier[0].length if frontier else None
        if longest is not None and longest >= n:
            # 기본 조건 아래에서는 도달 불가: 살아 있는 경로는 정점을 반복하지 않음
            raise GeneratorInputError(f"길이 {longest} 의 0 아닌 경로: 순환이 소멸하지 않음")

    longest_nonzero = max((q.length for q in nonzero), default=1 if arrows else 0)
    loewy = max(2, longest_nonzero + 1)

    relations: list[Relation] = []
    for q in sorted(minimal_zero, key=Path.sort_key):
        if q.length < loewy:
            relations.append(Relation(((Fraction(1), q),)))
    by_ends: dict[tuple[str, str], list[Path]] = {}
    for q in nonzero:
        by_ends.setdefault((q.source, q.target), []).append(q)
    for ends in sorted(by_ends):
        group = sorted(by_ends[ends], key=Path.sort_key)
        head = group[0]
        for q in group[1:]:
            relations.append(Relation(((Fraction(1), q), (Fraction(-1), head))))

    name = "tiled-" + "-".join("".join(str(x) for x in row) for row in lam.entries)
    logger.info(f"타일 차수 몫: n={n}, 화살표 {len(arrows)}개, 관계식 {len(relations)}개, L={loewy}")
    return Presentation(quiver, tuple(relations), loewy, name=name)

