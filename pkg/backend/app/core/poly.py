"""
유리수 계수 희소 다항식
========================
우회 변수 (α, u, i) 를 키로 쓰는 희소 다변수 다항식과, 다양체 분석·섬유 시스템에
쓰이는 정확한 선형 소거.

변수 네임스페이스:
  X : 우회 변수 X_i(α,u)     → "X[arrow,len(u),i]"
  Z : 섬유 시스템 미지수 Z_j  → "Z[j]"
  t : slack 판정용 매개변수   → "t"
  P : 생성기 입력의 평범한 변수 → "Xj"

정준 변수 순서는 (네임스페이스, len(v_i), len(u), 화살표 이름, i).
계수는 fractions.Fraction 으로 정확하게 유지한다.
"""
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
import functools
import re

import sympy

from app.core.errors import EvaluationError, PresentationSyntaxError, UnsupportedOperationError

Scalar = Fraction

NS_DETOUR = "X"
NS_FIBER = "Z"
NS_PARAM = "t"
NS_PLAIN = "P"
_NS_RANK = {NS_DETOUR: 0, NS_PLAIN: 1, NS_FIBER: 2, NS_PARAM: 3}


def to_scalar(value: int | str | Fraction) -> Fraction:
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as e:
        raise UnsupportedOperationError(f"유리수로 해석할 수 없음: {value!r}") from e


def format_scalar(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def value_preference(c: Fraction) -> tuple:
    """0, 1, −1, 2, −2, … 순서."""
    return (abs(c), c < 0)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 변수 키
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@functools.total_ordering
@dataclass(frozen=True)
class VarKey:
    arrow: str
    u_length: int
    index: int
    v_length: int = 0
    namespace: str = NS_DETOUR

    @classmethod
    def fiber(cls, j: int) -> "VarKey":
        return cls("", 0, j, 0, NS_FIBER)

    @classmethod
    def param(cls) -> "VarKey":
        return cls("", 0, 0, 0, NS_PARAM)

    @classmethod
    def plain(cls, j: int) -> "VarKey":
        return cls("", 0, j, 0, NS_PLAIN)

    def order_key(self) -> tuple:
        return (_NS_RANK[self.namespace], self.v_length, self.u_length, self.arrow, self.index)

    def __lt__(self, other: "VarKey") -> bool:
        return self.order_key() < other.order_key()

    def render(self) -> str:
        if self.namespace == NS_DETOUR:
            return f"X[{self.arrow},{self.u_length},{self.index}]"
        if self.namespace == NS_FIBER:
            return f"Z[{self.index}]"
        if self.namespace == NS_PLAIN:
            return f"X{self.index}"
        return "t"

    def __str__(self) -> str:
        return self.render()


Monomial = tuple[tuple[VarKey, int], ...]
ONE: Monomial = ()


def _mono(powers: Mapping[VarKey, int]) -> Monomial:
    return tuple(sorted((v, e) for v, e in powers.items() if e > 0))


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    powers = dict(a)
    for v, e in b:
        powers[v] = powers.get(v, 0) + e
    return _mono(powers)


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _mono_key(m: Monomial) -> tuple:
    return (-_mono_degree(m), tuple((v.order_key(), -e) for v, e in m))


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 다항식
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
class Polynomial:
    """불변 희소 다항식. 0 계수는 저장하지 않는다."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None):
        clean: dict[Monomial, Fraction] = {}
        for m, c in (terms or {}).items():
            c = Fraction(c)
            if c != 0:
                clean[m] = c
        self._terms = dict(sorted(clean.items(), key=lambda kv: _mono_key(kv[0])))

    @classmethod
    def constant(cls, c: int | Fraction) -> "Polynomial":
        return cls({ONE: Fraction(c)})

    @classmethod
    def variable(cls, v: VarKey) -> "Polynomial":
        return cls({((v, 1),): Fraction(1)})

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls()

    # ── 조회 ───────────────────────────────────────────────
    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(m == ONE for m in self._terms)

    def constant_value(self) -> Fraction:
        return self._terms.get(ONE, Fraction(0))

    def variables(self) -> set[VarKey]:
        return {v for m in self._terms for v, _ in m}

    def total_degree(self) -> int:
        return max((_mono_degree(m) for m in self._terms), default=0)

    def degree_in(self, v: VarKey) -> int:
        return max((dict(m).get(v, 0) for m in self._terms), default=0)

    def coefficient(self, powers: Mapping[VarKey, int]) -> Fraction:
        return self._terms.get(_mono(powers), Fraction(0))

    # ── 산술 ───────────────────────────────────────────────
    @staticmethod
    def _lift(other: "Polynomial | int | Fraction") -> "Polynomial":
        return other if isinstance(other, Polynomial) else Polynomial.constant(other)

    def __add__(self, other: "Polynomial | int | Fraction") -> "Polynomial":
        other = self._lift(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial({m: -c for m, c in self._terms.items()})

    def __sub__(self, other: "Polynomial | int | Fraction") -> "Polynomial":
        return self + (-self._lift(other))

    def __rsub__(self, other: "Polynomial | int | Fraction") -> "Polynomial":
        return self._lift(other) - self

    def __mul__(self, other: "Polynomial | int | Fraction") -> "Polynomial":
        other = self._lift(other)
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        out = Polynomial.constant(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other)
        return isinstance(other, Polynomial) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(tuple(self._terms.items()))

    # ── 대입 / 평가 ────────────────────────────────────────
    def evaluate(self, point: Mapping[VarKey, Fraction]) -> Fraction:
        missing = self.variables() - set(point)
        if missing:
            names = ", ".join(v.render() for v in sorted(missing))
            raise EvaluationError(f"평가 지점에 변수 값 없음: {names}")
        total = Fraction(0)
        for m, c in self._terms.items():
            term = c
            for v, e in m:
                term *= Fraction(point[v]) ** e
            total += term
        return total

    def substitute(self, mapping: Mapping[VarKey, "Polynomial | Fraction | int"]) -> "Polynomial":
        """부분 대입. mapping 에 없는 변수는 그대로 둔다."""
        subs = {v: self._lift(x) for v, x in mapping.items()}
        out = Polynomial.zero()
        for m, c in self._terms.items():
            term = Polynomial.constant(c)
            rest: dict[VarKey, int] = {}
            for v, e in m:
                if v in subs:
                    term = term * subs[v] ** e
                else:
                    rest[v] = e
            out = out + term * Polynomial({_mono(rest): Fraction(1)})
        return out

    def linear_form(self) -> tuple[dict[VarKey, Fraction], Fraction]:
        """차수 ≤ 1 다항식 → (계수, 상수항)."""
        if self.total_degree() > 1:
            raise UnsupportedOperationError(f"비선형 다항식: {self.render()}")
        coeffs = {m[0][0]: c for m, c in self._terms.items() if m != ONE}
        return coeffs, self.constant_value()

    def split_by(self, unknowns: set[VarKey]) -> dict[Monomial, "Polynomial"]:
        """unknowns 에 대한 단항식별로 묶고, 나머지 변수는 계수 다항식으로."""
        groups: dict[Monomial, dict[Monomial, Fraction]] = {}
        for m, c in self._terms.items():
            inner = tuple((v, e) for v, e in m if v in unknowns)
            outer = tuple((v, e) for v, e in m if v not in unknowns)
            groups.setdefault(inner, {})[outer] = c
        return {k: Polynomial(v) for k, v in groups.items()}

    def monic(self) -> "Polynomial":
        """선두항 계수 1 로 정규화 (영점 집합 불변)."""
        if self.is_zero():
            return self
        lead = next(iter(self._terms.values()))
        return self * (1 / lead)

    # ── 출력 ───────────────────────────────────────────────
    def render(self) -> str:
        if not self._terms:
            return "0"
        parts: list[str] = []
        for m, c in self._terms.items():
            body = "*".join(v.render() if e == 1 else f"{v.render()}^{e}" for v, e in m)
            mag = abs(c)
            if not body:
                text = format_scalar(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{format_scalar(mag)}*{body}"
            if not parts:
                parts.append(f"-{text}" if c < 0 else text)
            else:
                parts.append(f"- {text}" if c < 0 else f"+ {text}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"Polynomial({self.render()})"


def poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    return a + b


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    return a * b


def poly_eval(q: Polynomial, point: Mapping[VarKey, Fraction]) -> Fraction:
    return q.evaluate(point)


def occurs(v: VarKey, polys: Iterable[Polynomial]) -> bool:
    return any(v in q.variables() for q in polys)


def rational_roots(q: Polynomial) -> list[Fraction]:
    """일변수 다항식의 유리근 (선호 순서 0, 1, −1, …)."""
    vs = q.variables()
    if len(vs) != 1:
        raise UnsupportedOperationError(f"일변수 다항식이 아님: {q.render()}")
    (v,) = vs
    deg = q.degree_in(v)
    dense = [q.coefficient({v: k}) for k in range(deg, -1, -1)]
    x = sympy.Symbol("x")
    sp = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in dense], x, domain=sympy.QQ)
    roots = []
    for r in sp.ground_roots():
        r = sympy.Rational(r)
        roots.append(Fraction(int(r.p), int(r.q)))
    return sorted(roots, key=value_preference)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 선형 시스템
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass
class LinearRow:
    """Σ coeffs[v]·v = constant."""
    coeffs: dict[VarKey, Fraction]
    constant: Fraction = Fraction(0)


@dataclass
class LinearSystem:
    rows: list[LinearRow] = field(default_factory=list)
    unknowns: list[VarKey] = field(default_factory=list)


@dataclass
class Triangulation:
    consistent: bool
    assignments: dict[VarKey, Polynomial] = field(default_factory=dict)
    free: list[VarKey] = field(default_factory=list)
    contradiction: Fraction | None = None

    @property
    def forced(self) -> dict[VarKey, Fraction]:
        return {v: e.constant_value() for v, e in self.assignments.items() if e.is_constant()}

    def to_dict(self) -> dict:
        if not self.consistent:
            return {"status": "Inconsistent", "contradiction": format_scalar(self.contradiction or 0)}
        return {
            "status": "Solved",
            "assignments": {v.render(): e.render() for v, e in sorted(self.assignments.items())},
            "free": [v.render() for v in self.free],
        }


@dataclass
class Consistency:
    consistent: bool
    witness: dict[VarKey, Fraction] = field(default_factory=dict)
    free: list[VarKey] = field(default_factory=list)
    contradiction: Fraction | None = None

    def to_dict(self) -> dict:
        if not self.consistent:
            return {"status": "Inconsistent", "contradiction": format_scalar(self.contradiction or 0)}
        return {
            "status": "Consistent",
            "witness": {v.render(): format_scalar(c) for v, c in sorted(self.witness.items())},
            "free": [v.render() for v in self.free],
        }


def _gauss_jordan(
    rows: list[LinearRow], unknowns: Iterable[VarKey]
) -> tuple[dict[VarKey, LinearRow], list[VarKey], Fraction | None]:
    """기약 행사다리꼴. 피벗은 정준 순서상 가장 앞선 변수.

    반환: (피벗 → 정규화된 행, 자유변수, 모순 상수 또는 None)
    """
    pivots: dict[VarKey, LinearRow] = {}
    universe = set(unknowns)
    for row in rows:
        coeffs = {v: Fraction(c) for v, c in row.coeffs.items() if c != 0}
        const = Fraction(row.constant)
        universe |= set(coeffs)
        # 기존 피벗으로 축약
        for pv, prow in pivots.items():
            f = coeffs.pop(pv, None)
            if f:
                for v, c in prow.coeffs.items():
                    if v == pv:
                        continue
                    coeffs[v] = coeffs.get(v, Fraction(0)) - f * c
                const -= f * prow.constant
        coeffs = {v: c for v, c in coeffs.items() if c != 0}
        if not coeffs:
            if const != 0:
                return pivots, [], const
            continue
        pv = min(coeffs)
        scale = coeffs[pv]
        new = LinearRow({v: c / scale for v, c in coeffs.items()}, const / scale)
        # 새 피벗을 기존 행에서 제거
        for other_pv, orow in list(pivots.items()):
            f = orow.coeffs.get(pv)
            if f:
                merged = dict(orow.coeffs)
                del merged[pv]
                for v, c in new.coeffs.items():
                    if v == pv:
                        continue
                    merged[v] = merged.get(v, Fraction(0)) - f * c
                pivots[other_pv] = LinearRow(
                    {v: c for v, c in merged.items() if c != 0}, orow.constant - f * new.constant
                )
        pivots[pv] = new
    free = sorted(universe - set(pivots))
    return pivots, free, None


def linear_triangulate(polys: Iterable[Polynomial], variables: Iterable[VarKey] = ()) -> Triangulation:
    """차수 ≤ 1 다항식 집합 (= 0) 의 정확한 가우스 소거."""
    rows = []
    for q in polys:
        coeffs, const = q.linear_form()
        rows.append(LinearRow(coeffs, -const))
    pivots, free, contradiction = _gauss_jordan(rows, variables)
    if contradiction is not None:
        return Triangulation(False, contradiction=contradiction)
    assignments = {}
    for pv, row in sorted(pivots.items()):
        expr = Polynomial.constant(row.constant)
        for v, c in row.coeffs.items():
            if v != pv:
                expr = expr - Polynomial.variable(v) * c
        assignments[pv] = expr
    return Triangulation(True, assignments, free)


def solve_consistency(system: LinearSystem) -> Consistency:
    pivots, free, contradiction = _gauss_jordan(system.rows, system.unknowns)
    if contradiction is not None:
        return Consistency(False, contradiction=contradiction)
    # 자유변수 = 0 으로 둔 증인
    witness = {v: Fraction(0) for v in free}
    for pv, row in pivots.items():
        witness[pv] = row.constant
    return Consistency(True, dict(sorted(witness.items())), free)


# ── 1-매개변수 유리함수체 위의 소거 (분수 없는 소거) ──────────────
@dataclass
class ParametricOutcome:
    linear: bool
    consistent: bool = False
    obstructions: list[Polynomial] = field(default_factory=list)


def parametric_consistency(polys: Iterable[Polynomial], unknowns: set[VarKey]) -> ParametricOutcome:
    """계수가 매개변수 다항식인 선형 시스템의 일반적(generic) 해 존재 여부.

    각 다항식은 unknowns 에 대해 차수 ≤ 1 이어야 한다 (아니면 linear=False).
    행 연산 s ← a·s − b·r 로 나눗셈 없이 소거한다.
    """
    rows: list[tuple[dict[VarKey, Polynomial], Polynomial]] = []
    for q in polys:
        groups = q.split_by(unknowns)
        if any(_mono_degree(m) > 1 for m in groups):
            return ParametricOutcome(linear=False)
        coeffs = {m[0][0]: c for m, c in groups.items() if m != ONE}
        rows.append((coeffs, -groups.get(ONE, Polynomial.zero())))

    obstructions: list[Polynomial] = []
    pending = rows
    while pending:
        coeffs, rhs = pending.pop(0)
        coeffs = {v: c for v, c in coeffs.items() if not c.is_zero()}
        if not coeffs:
            if not rhs.is_zero():
                obstructions.append(rhs)
            continue
        pv = min(coeffs)
        a = coeffs[pv]
        reduced = []
        for oc, orhs in pending:
            b = oc.get(pv)
            if b is None or b.is_zero():
                reduced.append((oc, orhs))
                continue
            merged: dict[VarKey, Polynomial] = {}
            for v in set(oc) | set(coeffs):
                merged[v] = a * oc.get(v, Polynomial.zero()) - b * coeffs.get(v, Polynomial.zero())
            merged.pop(pv, None)
            reduced.append((merged, a * orhs - b * rhs))
        pending = reduced
    return ParametricOutcome(linear=True, consistent=not obstructions, obstructions=obstructions)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 텍스트 파서 ("X1*X2 - 1", "3/2*X[b2,1,1]^2")
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<var>X\[[^\]]+\]|[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*^]))"
)
_DETOUR_VAR = re.compile(r"X\[(?P<arrow>[^,\]]+),(?P<u>\d+),(?P<i>\d+)\]")
_PLAIN_VAR = re.compile(r"X(?P<j>\d+)")


def default_resolver(name: str) -> VarKey:
    """문맥 없는 해석. X[a,u,i] 는 v_length=0 으로 남으므로 마스트 변수와 비교하려면 MastContext.resolve 를 쓴다."""
    if m := _DETOUR_VAR.fullmatch(name):
        return VarKey(m["arrow"], int(m["u"]), int(m["i"]))
    if m := _PLAIN_VAR.fullmatch(name):
        return VarKey.plain(int(m["j"]))
    if name == "t":
        return VarKey.param()
    raise UnsupportedOperationError(f"알 수 없는 변수 이름: {name}")


def parse_polynomial(text: str, resolver=default_resolver, line: int = 1) -> Polynomial:
    """정준 텍스트 형식의 다항식 파싱. 항 = [부호] [계수 '*'] 인수 ('*' 인수)*."""
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PresentationSyntaxError(f"해석할 수 없는 문자: {text[pos:pos + 8]!r}", line, pos + 1)
        kind = m.lastgroup or "op"
        tokens.append((kind, m[kind], m.start(kind) + 1))
        pos = m.end()
    if not tokens:
        raise PresentationSyntaxError("빈 다항식", line, 1)

    result = Polynomial.zero()
    i = 0
    while i < len(tokens):
        sign = Fraction(1)
        if tokens[i][0] == "op" and tokens[i][1] in "+-":
            sign = Fraction(-1) if tokens[i][1] == "-" else sign
            i += 1
        elif i > 0:
            raise PresentationSyntaxError("항 사이에 + 또는 - 가 필요함", line, tokens[i][2])
        term = Polynomial.constant(sign)
        expect_factor = True
        while i < len(tokens):
            kind, val, col = tokens[i]
            if expect_factor:
                if kind == "num":
                    factor = Polynomial.constant(Fraction(val))
                elif kind == "var":
                    factor = Polynomial.variable(resolver(val))
                else:
                    raise PresentationSyntaxError(f"인수가 필요한 위치에 {val!r}", line, col)
                i += 1
                if i < len(tokens) and tokens[i][1] == "^":
                    if i + 1 >= len(tokens) or tokens[i + 1][0] != "num" or "/" in tokens[i + 1][1]:
                        raise PresentationSyntaxError("지수는 자연수여야 함", line, tokens[i][2])
                    factor = factor ** int(tokens[i + 1][1])
                    i += 2
                term = term * factor
                expect_factor = False
            elif kind == "op" and val == "*":
                expect_factor = True
                i += 1
            else:
                break
        if expect_factor:
            raise PresentationSyntaxError("항이 인수 없이 끝남", line, tokens[-1][2])
        result = result + term
    return result
