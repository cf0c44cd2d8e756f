"""
단열 다양체 V_p
================
우회(detour), 치환 평가기, V_p 정의 다항식 생성, 마스트 판정, halyard 와
slack/tight 분류.

좌표 약속:
  U 의 기저 = { u·x : u 는 p 의 오른쪽 부분경로 } (층 번호 = len(u))
  화살표 α 를 기저 u·x 에 적용하면
    (a) αu 가 p 의 오른쪽 부분경로 → 다음 층 (spine)
    (b) (α,u) 가 우회             → Σ_i X_i(α,u) · v_i(α,u)·x
    (c) 그 외                     → 0
  관계식 r 은 시작 정점이 맞는 모든 층 u 에서 0 이 되어야 한다.

상태 판정 순서:
  1) 선형 삼각화 + 역대입 반복
  2) 남은 일변수 다항식은 유리근으로 분기 (sympy)
  3) 그래도 남으면 격자 탐색 (기본 격자 + 2 단계 확장), 실패 시 Unknown
"""
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
import itertools
import logging

from app.config import settings
from app.core.errors import CompositionError, PreconditionError
from app.core.poly import (
    NS_DETOUR,
    NS_PARAM,
    Polynomial,
    VarKey,
    default_resolver,
    format_scalar,
    linear_triangulate,
    occurs,
    parametric_consistency,
    rational_roots,
    value_preference,
)
from app.core.presentation import Presentation, monomial_contains, nonzero_paths
from app.core.quiver import Arrow, Path, extend_paths

logger = logging.getLogger(__name__)

MAST = "Mast"
NOT_MAST = "NotMast"
NONEMPTY = "Nonempty"
EMPTY = "Empty"
UNKNOWN = "Unknown"
SLACK = "Slack"
TIGHT = "Tight"

Point = dict[VarKey, Fraction]


def render_point(point: Mapping[VarKey, Fraction]) -> dict[str, str]:
    return {v.render(): format_scalar(c) for v, c in sorted(point.items())}


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 마스트 문맥
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class Detour:
    arrow: Arrow
    u: Path
    family: tuple[Path, ...]

    @property
    def u_length(self) -> int:
        return self.u.length

    def varkey(self, i: int) -> VarKey:
        """i 는 1 부터."""
        return VarKey(self.arrow.name, self.u.length, i, self.family[i - 1].length)

    def varkeys(self) -> list[VarKey]:
        return [self.varkey(i) for i in range(1, len(self.family) + 1)]

    def render(self) -> str:
        return f"({self.arrow.name}, {self.u.render()})"

    def to_dict(self) -> dict:
        return {
            "arrow": self.arrow.name,
            "u": self.u.render(),
            "family": [v.render() for v in self.family],
        }


@dataclass
class MastContext:
    path: Path
    subpaths: list[Path]
    detours: list[Detour]
    variables: list[VarKey]
    _by_slot: dict[tuple[int, str], Detour] = field(default_factory=dict, repr=False)
    _by_var: dict[VarKey, tuple[Detour, int]] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        for d in self.detours:
            self._by_slot[(d.u_length, d.arrow.name)] = d
            for i, v in enumerate(d.varkeys(), start=1):
                self._by_var[v] = (d, i)

    @property
    def length(self) -> int:
        return self.path.length

    def detour(self, arrow_name: str, u_length: int) -> Detour | None:
        return self._by_slot.get((u_length, arrow_name))

    def detour_of(self, v: VarKey) -> tuple[Detour, int]:
        return self._by_var[v]

    def family_path(self, v: VarKey) -> Path:
        d, i = self._by_var[v]
        return d.family[i - 1]

    def resolve(self, name: str) -> VarKey:
        """parse_polynomial 용 resolver. X[a,u,i] 는 v_length 가 채워진 이 문맥의 키로."""
        key = default_resolver(name)
        if key.namespace != NS_DETOUR:
            return key
        for v in self.variables:
            if (v.arrow, v.u_length, v.index) == (key.arrow, key.u_length, key.index):
                return v
        known = ", ".join(v.render() for v in self.variables)
        raise PreconditionError(f"{self.path.render()} 의 변수가 아님: {name} (가능: {known})")

    def top_cycles(self) -> list[Path]:
        """w_1..w_t: 길이 양수이고 source(p) 에서 끝나는 오른쪽 부분경로."""
        e0 = self.path.source
        return [u for u in self.subpaths[1:] if u.target == e0]

    def to_dict(self) -> dict:
        return {
            "path": self.path.render(),
            "detours": [d.to_dict() for d in self.detours],
            "vars": [v.render() for v in self.variables],
        }


def build_mast_context(P: Presentation, p: Path) -> MastContext:
    if p.length < 1:
        raise PreconditionError("마스트 문맥은 길이 1 이상의 경로에만 정의됨")
    for a in p.arrows:
        if P.quiver.arrow(a.name) != a:
            raise CompositionError(f"화살표 {a.name} 가 퀴버의 화살표와 다름")
    subs = [p.prefix(k) for k in range(p.length + 1)]
    detours: list[Detour] = []
    for k, u in enumerate(subs):
        for a in P.quiver.arrows_from(u.target):
            if k < p.length and p.arrows[k] == a:
                continue
            family = tuple(v for v in subs[k + 1:] if v.target == a.target)
            if family:
                detours.append(Detour(a, u, family))
    variables = sorted(v for d in detours for v in d.varkeys())
    return MastContext(p, subs, detours, variables)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 치환 평가
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass
class Evaluation:
    """층 번호(= 오른쪽 부분경로 길이) → 다항식 계수."""
    context: MastContext
    coeffs: dict[int, Polynomial]

    def coefficient(self, layer: int) -> Polynomial:
        return self.coeffs.get(layer, Polynomial.zero())

    def items(self) -> Iterator[tuple[Path, Polynomial]]:
        for k in sorted(self.coeffs):
            yield self.context.subpaths[k], self.coeffs[k]

    def instantiate(self, point: Mapping[VarKey, Fraction]) -> dict[int, Fraction]:
        out = {k: q.evaluate(point) for k, q in self.coeffs.items()}
        return {k: c for k, c in out.items() if c != 0}

    def is_zero(self) -> bool:
        return not self.coeffs


def _apply_arrow(ctx: MastContext, a: Arrow, coeffs: Mapping[int, Polynomial]) -> dict[int, Polynomial]:
    out: dict[int, Polynomial] = {}
    p = ctx.path
    for k, c in coeffs.items():
        if k < p.length and p.arrows[k] == a:
            out[k + 1] = out.get(k + 1, Polynomial.zero()) + c
            continue
        d = ctx.detour(a.name, k)
        if d is None:
            continue
        for i, v in enumerate(d.family, start=1):
            term = c * Polynomial.variable(d.varkey(i))
            out[v.length] = out.get(v.length, Polynomial.zero()) + term
    return {k: c for k, c in out.items() if not c.is_zero()}


def substitution_eval(ctx: MastContext, word: Path, start: Path | int) -> Evaluation:
    layer = start if isinstance(start, int) else start.length
    base = ctx.subpaths[layer]
    if not isinstance(start, int) and base != start:
        raise PreconditionError(f"{start.render()} 는 {ctx.path.render()} 의 오른쪽 부분경로가 아님")
    if word.source != base.target:
        raise CompositionError(
            f"평가 불가: source({word.render()})={word.source} ≠ target({base.render()})={base.target}"
        )
    coeffs: dict[int, Polynomial] = {layer: Polynomial.constant(1)}
    for a in word.arrows:
        coeffs = _apply_arrow(ctx, a, coeffs)
        if not coeffs:
            break
    return Evaluation(ctx, coeffs)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 정확한 분기 풀이
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass
class SolutionBranch:
    assignments: dict[VarKey, Polynomial]
    residual: list[Polynomial] = field(default_factory=list)

    @property
    def resolved(self) -> bool:
        return not self.residual

    @property
    def parameters(self) -> list[VarKey]:
        vs: set[VarKey] = set()
        for e in self.assignments.values():
            vs |= e.variables()
        return sorted(vs)

    def is_constant(self, v: VarKey) -> bool:
        return self.assignments[v].is_constant()

    def point_at(self, params: Mapping[VarKey, Fraction]) -> Point:
        return {v: e.evaluate(params) for v, e in self.assignments.items()}

    def to_dict(self) -> dict:
        return {
            "assignments": {v.render(): e.render() for v, e in sorted(self.assignments.items())},
            "parameters": [v.render() for v in self.parameters],
            "residual": [q.render() for q in self.residual],
        }


@dataclass
class SolveResult:
    branches: list[SolutionBranch]
    contradictions: list[str]

    @property
    def complete(self) -> bool:
        return all(b.resolved for b in self.branches)

    @property
    def resolved_branches(self) -> list[SolutionBranch]:
        return [b for b in self.branches if b.resolved]

    def finite_points(self) -> list[Point] | None:
        if not self.complete or any(b.parameters for b in self.branches):
            return None
        seen: list[Point] = []
        for b in self.branches:
            pt = b.point_at({})
            if pt not in seen:
                seen.append(pt)
        return seen


def _extend(subst: Mapping[VarKey, Polynomial], new: Mapping[VarKey, Polynomial]) -> dict[VarKey, Polynomial]:
    out = {v: e.substitute(new) for v, e in subst.items()}
    out.update(new)
    return out


def _canonical(polys: Iterable[Polynomial]) -> list[Polynomial]:
    uniq = {q.monic() for q in polys if not q.is_zero()}
    return sorted(uniq, key=_poly_key)


def _poly_key(q: Polynomial) -> tuple:
    return (q.total_degree(), [v.order_key() for v in sorted(q.variables())], q.render())


def _solve(
    polys: list[Polynomial], subst: dict[VarKey, Polynomial]
) -> tuple[list[SolutionBranch], list[str]]:
    work = _canonical(q.substitute(subst) for q in polys)
    while True:
        for q in work:
            if q.is_constant():
                return [], [f"상수 모순: 0 = {q.render()}"]
        linear = [q for q in work if q.total_degree() <= 1]
        if not linear:
            break
        tri = linear_triangulate(linear)
        if not tri.consistent:
            return [], [f"선형 소거 모순: 0 = {format_scalar(tri.contradiction or 0)}"]
        subst = _extend(subst, tri.assignments)
        work = _canonical(q.substitute(tri.assignments) for q in work if q.total_degree() > 1)
    if not work:
        return [SolutionBranch(subst)], []

    univariate = next((q for q in work if len(q.variables()) == 1), None)
    if univariate is None:
        return [SolutionBranch(subst, work)], []
    (v,) = univariate.variables()
    roots = rational_roots(univariate)
    if not roots:
        return [], [f"유리근 없음: {univariate.render()}"]
    branches: list[SolutionBranch] = []
    certs: list[str] = []
    for r in roots:
        b, c = _solve(work, _extend(subst, {v: Polynomial.constant(r)}))
        branches.extend(b)
        certs.extend(c)
    return branches, certs


def solve_variety(polys: list[Polynomial], variables: Iterable[VarKey]) -> SolveResult:
    branches, certs = _solve(polys, {})
    full = []
    for b in branches:
        assignments = {v: b.assignments.get(v, Polynomial.variable(v)) for v in variables}
        full.append(SolutionBranch(assignments, b.residual))
    return SolveResult(full, certs)


def _grid_points(variables: list[VarKey], values: Iterable[Fraction], cap: int) -> Iterator[Point]:
    for combo in itertools.islice(itertools.product(values, repeat=len(variables)), cap):
        yield dict(zip(variables, combo))


def _grid_witness(branch: SolutionBranch, stages: Iterable[Iterable[Fraction]] | None = None) -> Point | None:
    params = branch.parameters
    for stage in stages or settings.grid_stages():
        for guess in _grid_points(params, stage, settings.MAX_GRID_POINTS):
            if all(q.evaluate(guess) == 0 for q in branch.residual):
                return branch.point_at(guess)
    return None


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# V_p
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass
class VarietyPresentation:
    context: MastContext
    polynomials: list[Polynomial]
    status: str
    witness: Point | None = None
    certificate: dict | None = None
    reason: str | None = None
    solution: SolveResult | None = None

    @property
    def linear(self) -> bool:
        return all(q.total_degree() <= 1 for q in self.polynomials)

    def points(self) -> list[Point] | None:
        return self.solution.finite_points() if self.solution else None

    def contains(self, point: Mapping[VarKey, Fraction]) -> bool:
        return all(q.evaluate(point) == 0 for q in self.polynomials)

    def to_dict(self) -> dict:
        out: dict = {
            "vars": [v.render() for v in self.context.variables],
            "polys": [q.render() for q in self.polynomials],
            "status": self.status,
            "linear": self.linear,
        }
        if self.witness is not None:
            out["witness"] = render_point(self.witness)
        if self.certificate is not None:
            out["certificate"] = self.certificate
        if self.reason:
            out["reason"] = self.reason
        pts = self.points()
        if pts is not None:
            out["points"] = [render_point(pt) for pt in pts]
        if self.solution is not None:
            out["branches"] = [b.to_dict() for b in self.solution.branches]
        return out


def defining_polynomials(P: Presentation, ctx: MastContext) -> list[Polynomial]:
    p = ctx.path
    if p.length >= P.loewy:
        return [Polynomial.constant(1)]
    polys: list[Polynomial] = []
    for r in P.relations:
        for u in ctx.subpaths:
            if u.target != r.source:
                continue
            total: dict[int, Polynomial] = {}
            for c, q in r.terms:
                ev = substitution_eval(ctx, q, u.length)
                for k, coeff in ev.coeffs.items():
                    total[k] = total.get(k, Polynomial.zero()) + coeff * c
            polys.extend(q for q in total.values() if not q.is_zero())
    return _canonical(polys)


def variety_polynomials(
    P: Presentation, p: Path, grid_stages: Iterable[Iterable[Fraction]] | None = None
) -> VarietyPresentation:
    """grid_stages 는 비선형 잔여 시스템의 증인 탐색 격자. None 이면 설정값."""
    key = tuple(tuple(stage) for stage in grid_stages) if grid_stages else None
    return _variety_polynomials(P, p, key)


@lru_cache(maxsize=8192)
def _variety_polynomials(
    P: Presentation, p: Path, grid_stages: tuple[tuple[Fraction, ...], ...] | None
) -> VarietyPresentation:
    ctx = build_mast_context(P, p)
    polys = defining_polynomials(P, ctx)
    if p.length >= P.loewy:
        return VarietyPresentation(
            ctx, polys, EMPTY,
            certificate={"kind": "nilpotency", "detail": f"length {p.length} ≥ L={P.loewy}", "complete": True},
        )
    sol = solve_variety(polys, ctx.variables)
    resolved = sol.resolved_branches
    if resolved:
        b = resolved[0]
        witness = b.point_at({v: Fraction(0) for v in b.parameters})
        status, cert, reason = NONEMPTY, None, None
    elif not sol.branches:
        witness, status = None, EMPTY
        cert, reason = {"kind": "exact", "contradictions": sol.contradictions, "complete": True}, None
    else:
        witness = None
        for b in sol.branches:
            witness = _grid_witness(b, grid_stages)
            if witness is not None:
                break
        if witness is not None:
            status, cert, reason = NONEMPTY, None, None
        else:
            status, cert = UNKNOWN, None
            reason = "비선형 잔여 시스템, 격자 탐색 소진"
            logger.warning(f"V_p 상태 미결정: p={p.render()} ({len(polys)}개 다항식)")
    if witness is not None and not all(q.evaluate(witness) == 0 for q in polys):
        raise AssertionError(f"증인이 정의 다항식을 만족하지 않음: p={p.render()}")
    return VarietyPresentation(ctx, polys, status, witness, cert, reason, sol)


# ── 마스트 판정 ────────────────────────────────────────────
@dataclass
class MastStatus:
    status: str
    witness: Point | None = None
    evidence: str = ""

    @property
    def is_mast(self) -> bool:
        return self.status == MAST

    def to_dict(self) -> dict:
        out: dict = {"status": self.status, "evidence": self.evidence}
        if self.witness is not None:
            out["witness"] = render_point(self.witness)
        return out


def mast_status(P: Presentation, p: Path) -> MastStatus:
    if p.length >= P.loewy:
        return MastStatus(NOT_MAST, evidence=f"길이 {p.length} ≥ L={P.loewy}")
    if p.length == 0:
        return MastStatus(MAST, {}, "자명한 경로 (단순 가군)")
    if P.monomial:
        if monomial_contains(P, p):
            return MastStatus(NOT_MAST, evidence="단항 아이디얼에 속함")
        return MastStatus(MAST, None, "단항: p ∉ I")
    vp = variety_polynomials(P, p)
    if vp.status == NONEMPTY:
        return MastStatus(MAST, vp.witness, "V_p 증인")
    if vp.status == EMPTY:
        return MastStatus(NOT_MAST, evidence="V_p 공집합")
    return MastStatus(UNKNOWN, evidence=vp.reason or "")


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# slack / tight
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass
class SlackEntry:
    var: VarKey
    status: str
    evidence: str = ""
    values: list[Fraction] = field(default_factory=list)

    @property
    def is_slack(self) -> bool:
        return self.status == SLACK

    def to_dict(self) -> dict:
        out = {"var": self.var.render(), "status": self.status}
        if self.evidence:
            out["evidence"] = self.evidence
        if self.status == TIGHT:
            out["values"] = [format_scalar(c) for c in self.values]
        return out


@dataclass
class DetourFlags:
    detour: Detour
    halyard: bool
    circular: bool

    def to_dict(self) -> dict:
        return {**self.detour.to_dict(), "halyard": self.halyard, "circular": self.circular}


@dataclass
class SlackReport:
    context: MastContext
    entries: dict[VarKey, SlackEntry]
    free_count: int
    dimension_lower_bound: int
    detours: list[DetourFlags]

    def slack_vars(self) -> list[VarKey]:
        return [v for v, e in self.entries.items() if e.status == SLACK]

    def unknown_vars(self) -> list[VarKey]:
        return [v for v, e in self.entries.items() if e.status == UNKNOWN]

    def tight_halyards(self) -> list[Detour]:
        """모든 변수가 tight 이면서 halyard 인 우회."""
        out = []
        for f in self.detours:
            if f.halyard and all(self.entries[v].status == TIGHT for v in f.detour.varkeys()):
                out.append(f.detour)
        return out

    def to_dict(self) -> list[dict]:
        return [self.entries[v].to_dict() for v in self.context.variables]

    def summary(self) -> dict:
        return {
            "vars": self.to_dict(),
            "free_count": self.free_count,
            "dimension_lower_bound": self.dimension_lower_bound,
            "detours": [f.to_dict() for f in self.detours],
        }


def _tight_values_by_probe(vp: VarietyPresentation, v: VarKey) -> SlackEntry:
    t = VarKey.param()
    probe = [q.substitute({v: Polynomial.variable(t)}) for q in vp.polynomials]
    unknowns: set[VarKey] = set()
    for q in probe:
        unknowns |= q.variables()
    unknowns = {u for u in unknowns if u.namespace != NS_PARAM}
    outcome = parametric_consistency(probe, unknowns)
    if not outcome.linear:
        return SlackEntry(v, UNKNOWN, "잔여 시스템이 나머지 변수에 대해 비선형")
    if outcome.consistent:
        return SlackEntry(v, SLACK, "rational-function-field")
    obstruction = next((g for g in outcome.obstructions if not g.is_constant()), None)
    if obstruction is None:
        return SlackEntry(v, UNKNOWN, "매개변수와 무관한 모순")
    values = []
    for r in rational_roots(obstruction) if obstruction.variables() else []:
        pinned = vp.polynomials + [Polynomial.variable(v) - r]
        sol = solve_variety(pinned, vp.context.variables)
        if sol.resolved_branches or any(_grid_witness(b) for b in sol.branches):
            values.append(r)
    return SlackEntry(v, TIGHT, "obstruction-roots", sorted(values, key=value_preference))


def _classify(vp: VarietyPresentation, v: VarKey) -> SlackEntry:
    if not occurs(v, vp.polynomials):
        return SlackEntry(v, SLACK, "absent")
    sol = vp.solution
    assert sol is not None
    for idx, b in enumerate(sol.resolved_branches):
        if not b.is_constant(v):
            return SlackEntry(v, SLACK, f"parametric-family#{idx}")
    if sol.complete:
        values = {b.assignments[v].constant_value() for b in sol.branches}
        return SlackEntry(v, TIGHT, "exact-branches", sorted(values, key=value_preference))
    return _tight_values_by_probe(vp, v)


def _is_circular(d: Detour) -> bool:
    return any(v.last_arrow == d.arrow and v.length >= d.u_length + 2 for v in d.family)


def slack_report(P: Presentation, p: Path) -> SlackReport:
    ms = mast_status(P, p)
    if not ms.is_mast:
        raise PreconditionError(f"{p.render()} 는 마스트로 확인되지 않음 ({ms.status})")
    vp = variety_polynomials(P, p)
    ctx = vp.context
    entries = {v: _classify(vp, v) for v in ctx.variables}
    free_count = sum(1 for v in ctx.variables if not occurs(v, vp.polynomials))
    family_dims = [len(b.parameters) for b in vp.solution.resolved_branches] if vp.solution else []
    witness = vp.witness or {}
    flags = []
    for d in ctx.detours:
        halyard = False
        for v in d.varkeys():
            e = entries[v]
            if e.status == SLACK or any(c != 0 for c in e.values) or witness.get(v, 0) != 0:
                halyard = True
        flags.append(DetourFlags(d, halyard, _is_circular(d)))
    return SlackReport(ctx, entries, free_count, max([free_count, *family_dims]), flags)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 마스트 열거
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass
class MastInventory:
    """길이 0..L−1 의 마스트 목록. Unknown 은 따로 모은다."""
    masts: list[Path]
    unknown: list[Path]
    statuses: dict[Path, MastStatus] = field(default_factory=dict, repr=False)

    def positive(self) -> list[Path]:
        return [p for p in self.masts if p.length >= 1]

    def parallel(self, source: str, target: str) -> tuple[list[Path], list[Path]]:
        """(확정 마스트, Unknown 후보) 중 source → target 이고 길이 ≥ 1 인 것."""
        def keep(p: Path) -> bool:
            return p.length >= 1 and p.source == source and p.target == target
        return [p for p in self.masts if keep(p)], [p for p in self.unknown if keep(p)]

    def to_dict(self) -> dict:
        return {
            "masts": [p.render() for p in self.masts],
            "unknown": [p.render() for p in self.unknown],
        }


def enumerate_masts(P: Presentation, max_length: int | None = None) -> MastInventory:
    """마스트의 부분경로는 다시 마스트이므로 길이 n 접두와 접미가 모두 살아 있는 경로만 확장한다."""
    bound = P.loewy - 1 if max_length is None else min(max_length, P.loewy - 1)
    if P.monomial:
        masts = nonzero_paths(P, bound)
        return MastInventory(masts, [], {p: MastStatus(MAST, None, "단항: p ∉ I") for p in masts})

    statuses: dict[Path, MastStatus] = {}
    alive: set[Path] = set()
    layer = [Path(v) for v in P.quiver.vertices]
    for p in layer:
        statuses[p] = mast_status(P, p)
        alive.add(p)
    for n in range(1, bound + 1):
        nxt = []
        for q in extend_paths(P.quiver, layer):
            suffix = Path(q.arrows[1].source, q.arrows[1:]) if q.length > 1 else Path(q.target)
            if suffix not in alive:
                continue
            st = mast_status(P, q)
            statuses[q] = st
            if st.status != NOT_MAST:
                alive.add(q)
                nxt.append(q)
        if not nxt:
            break
        layer = nxt
        logger.debug(f"길이 {n} 후보 {len(nxt)}개")
    ordered = sorted(statuses, key=Path.sort_key)
    masts = [p for p in ordered if statuses[p].status == MAST]
    unknown = [p for p in ordered if statuses[p].status == UNKNOWN]
    if unknown:
        logger.warning(f"마스트 여부 미결정 경로 {len(unknown)}개: {', '.join(p.render() for p in unknown)}")
    return MastInventory(masts, unknown, statuses)
