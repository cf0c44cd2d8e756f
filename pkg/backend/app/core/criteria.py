"""
구조 조건 검사
==============
판정 파이프라인이 쓰는 각 구조 조건을 독립적인 검사로 제공한다.
모든 검사는 결과와 함께 다시 검증할 수 있는 증명서(certificate)를 돌려준다.

  condition (N)        : 화살표 α: e→e′ 와 평행한 마스트는 α 로 시작하거나 끝난다
  all varieties finite : 평행 마스트가 모두 c′α 꼴 (모든 V_p 가 한 점)
  loop case            : 시작 정점에 루프가 있는 마스트의 모양 + slack 집합
  (Nec,p) / (Suf,p)    : slack 변수의 v_r 모양 (필요 / 충분)
  cond4                : 단항 대수의 순수 조합적 판정
  halyard catalogue    : 길이 ≤ 5 마스트의 slack halyard 모양 목록
"""
from dataclasses import dataclass, field
from functools import lru_cache
import logging

from app.core.errors import PreconditionError, UnsupportedOperationError
from app.core.poly import VarKey
from app.core.presentation import Presentation, nonzero_paths
from app.core.quiver import Arrow, Path
from app.core.variety import (
    SLACK,
    TIGHT,
    UNKNOWN,
    Detour,
    MastInventory,
    SlackReport,
    enumerate_masts,
    slack_report,
)

logger = logging.getLogger(__name__)

HOLDS = "holds"
FAILS = "fails"
SATISFIED = "Satisfied"
VIOLATED = "Violated"
CONFORMS = "Conforms"
VIOLATES = "Violates"


def verdict_label(verdict: bool | None) -> str:
    return {True: HOLDS, False: FAILS, None: UNKNOWN}[verdict]


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# condition (N) / 모든 V_p 유한
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass
class ConditionNReport:
    verdict: bool | None
    violations: list[tuple[Arrow, Path]] = field(default_factory=list)
    unknown_masts: list[Path] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": verdict_label(self.verdict),
            "violations": [{"arrow": a.name, "mast": p.render()} for a, p in self.violations],
            "unknown_masts": [p.render() for p in self.unknown_masts],
        }


def _parallel_scan(P: Presentation, inventory: MastInventory, allowed) -> ConditionNReport:
    violations: list[tuple[Arrow, Path]] = []
    unknown: list[Path] = []
    for a in P.quiver.arrows:
        masts, pending = inventory.parallel(a.source, a.target)
        violations.extend((a, p) for p in masts if not allowed(a, p))
        unknown.extend(p for p in pending if not allowed(a, p))
    if violations:
        verdict = False
    elif unknown:
        verdict = None
    else:
        verdict = True
    return ConditionNReport(verdict, violations, sorted(set(unknown), key=Path.sort_key))


def check_condition_N(P: Presentation, inventory: MastInventory | None = None) -> ConditionNReport:
    inventory = inventory or enumerate_masts(P)
    return _parallel_scan(P, inventory, lambda a, p: p.first_arrow == a or p.last_arrow == a)


@dataclass
class AllFiniteReport:
    scan: ConditionNReport

    @property
    def verdict(self) -> bool | None:
        return self.scan.verdict

    def to_dict(self) -> dict:
        label = verdict_label(self.verdict)
        return {
            **self.scan.to_dict(),
            # 하나의 검사로 동치인 진술들
            "corollaries": {
                "every_variety_is_a_point": label,
                "uniserials_determined_by_mast": label,
                "all_graphs_are_edge_paths": label,
            },
        }


def check_all_varieties_finite(P: Presentation, inventory: MastInventory | None = None) -> AllFiniteReport:
    inventory = inventory or enumerate_masts(P)
    return AllFiniteReport(_parallel_scan(P, inventory, lambda a, p: p.first_arrow == a))


def check_loop_powers(P: Presentation, inventory: MastInventory | None = None) -> list[tuple[Arrow, Path]]:
    """루프 γ 가 있는 정점 e 에서 e → e 마스트는 γ 의 거듭제곱이어야 함 (진단)."""
    inventory = inventory or enumerate_masts(P)
    out = []
    for g in (a for a in P.quiver.arrows if a.is_loop):
        masts, _ = inventory.parallel(g.source, g.source)
        out.extend((g, p) for p in masts if any(a != g for a in p.arrows))
    return out


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 루프 케이스
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass
class LoopCaseShape:
    mu: int
    nu: int
    loop: Arrow
    exit: Arrow | None
    tail: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "nu": self.nu,
            "loop": self.loop.name,
            "exit": self.exit.name if self.exit else None,
            "tail": list(self.tail),
        }


@dataclass
class LoopCaseResult:
    applicable: bool
    finite: bool | None = None
    exactly_one: bool = False
    shape: LoopCaseShape | None = None
    shape_ok: bool = False
    offending: list[VarKey] = field(default_factory=list)
    evidence: str = ""

    def to_dict(self) -> dict:
        if not self.applicable:
            return {"status": "NotApplicable", "evidence": self.evidence}
        return {
            "status": "Applicable",
            "finite": verdict_label(self.finite),
            "exactly_one": self.exactly_one,
            "shape": self.shape.to_dict() if self.shape else None,
            "shape_ok": self.shape_ok,
            "offending": [v.render() for v in self.offending],
            "evidence": self.evidence,
        }


def loop_case_shape(p: Path, loop: Arrow) -> LoopCaseShape:
    mu = 0
    while mu < p.length and p.arrows[mu] == loop:
        mu += 1
    nu = p.length - mu
    exit_arrow = p.arrows[mu] if nu else None
    return LoopCaseShape(mu, nu, loop, exit_arrow, p.vertex_sequence()[mu + 1:])


def check_loop_case(P: Presentation, p: Path, report: SlackReport | None = None) -> LoopCaseResult:
    loops = P.quiver.loops_at(p.source)
    if not loops:
        return LoopCaseResult(False, evidence=f"시작 정점 {p.source} 에 루프 없음")
    if len(loops) > 1:
        return LoopCaseResult(False, evidence=f"시작 정점 {p.source} 에 루프가 여러 개")
    shape = loop_case_shape(p, loops[0])
    e = p.source
    tail = shape.tail
    shape_ok = e not in tail
    if shape_ok and shape.mu >= 1 and shape.nu >= 2:
        shape_ok = tail[0] not in tail[1:]

    report = report or slack_report(P, p)
    offending: list[VarKey] = []
    pending: list[VarKey] = []
    for v, entry in report.entries.items():
        if entry.status == TIGHT:
            continue
        d, _ = report.context.detour_of(v)
        allowed = d.arrow == shape.exit and d.u_length <= shape.mu - 1
        if allowed:
            continue
        (offending if entry.status == SLACK else pending).append(v)

    if not shape_ok or offending:
        finite: bool | None = False
    elif pending:
        finite = None
    else:
        finite = True
    exactly_one = finite is True and not report.tight_halyards()
    if not shape_ok:
        evidence = "마스트 모양이 tail·α·γ^μ 조건을 만족하지 않음"
    elif offending:
        evidence = "허용 범위 밖의 slack halyard: " + ", ".join(v.render() for v in offending)
    else:
        evidence = "slack halyard 가 모두 (α, γ^i), i ≤ μ−1"
    return LoopCaseResult(True, finite, exactly_one, shape, shape_ok, offending, evidence)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# (Nec,p)
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass
class NecDecomposition:
    """v_r = α ε_μ β_μ ⋯ ε_1 β_1 w 의 분해 (적용 순서 경계 위치)."""
    w: Path
    epsilons: list[Path]

    def to_dict(self) -> dict:
        return {"w": self.w.render(), "epsilons": [c.render() for c in self.epsilons]}


@dataclass
class NecResult:
    var: VarKey
    status: str
    decomposition: NecDecomposition | None
    top_cycles: int
    dimension_lower_bound: int

    @property
    def dimension_exceeds(self) -> bool:
        return self.dimension_lower_bound > self.top_cycles

    @property
    def violated(self) -> bool:
        return self.status == VIOLATED or self.dimension_exceeds

    def to_dict(self) -> dict:
        return {
            "var": self.var.render(),
            "status": self.status,
            "decomposition": self.decomposition.to_dict() if self.decomposition else None,
            "t": self.top_cycles,
            "dimension_lower_bound": self.dimension_lower_bound,
            "dimension_exceeds": self.dimension_exceeds,
        }


def _nec_search(v: Path, u: Path, alpha: Arrow) -> NecDecomposition | None:
    arrows = v.arrows
    verts = v.vertex_sequence()
    n = len(arrows)
    mu = u.length
    if n == 0 or arrows[-1] != alpha:
        return None

    @lru_cache(maxsize=None)
    def walk(pos: int, i: int) -> tuple[int, ...] | None:
        """(pos, i): β_1..β_i 를 맞췄고 정점 e(i) 에 있음. 반환값은 ε_i.. 의 끝 위치들."""
        for end in range(pos, n):
            if verts[end] != verts[pos]:
                continue
            if i == mu:
                if end == n - 1:
                    return (end,)
                continue
            if arrows[end] == u.arrows[i]:
                rest = walk(end + 1, i + 1)
                if rest is not None:
                    return (end,) + rest
        return None

    for k in range(1, n):
        if verts[k] != v.source:
            continue
        if mu == 0:
            if k == n - 1:
                return NecDecomposition(v.prefix(k), [])
            continue
        if arrows[k] != u.arrows[0]:
            continue
        ends = walk(k + 1, 1)
        if ends is None:
            continue
        epsilons = []
        start = k + 1
        for end in ends:
            epsilons.append(Path(verts[start], arrows[start:end]))
            start = end + 1
        return NecDecomposition(v.prefix(k), epsilons)
    return None


def verify_nec_certificate(v: Path, u: Path, alpha: Arrow, dec: NecDecomposition) -> bool:
    """분해를 다시 이어 붙여 v_r 과 같은지, 각 조각이 조건을 지키는지 확인."""
    if dec.w.length < 1 or dec.w.target != v.source or len(dec.epsilons) != u.length:
        return False
    rebuilt = list(dec.w.arrows)
    for i, beta in enumerate(u.arrows):
        rebuilt.append(beta)
        eps = dec.epsilons[i]
        if eps.source != beta.target or eps.target != beta.target:
            return False
        rebuilt.extend(eps.arrows)
    rebuilt.append(alpha)
    return tuple(rebuilt) == v.arrows and v.arrows[: dec.w.length] == dec.w.arrows


def check_nec(P: Presentation, p: Path, var: VarKey, report: SlackReport | None = None) -> NecResult:
    report = report or slack_report(P, p)
    entry = report.entries.get(var)
    if entry is None:
        raise PreconditionError(f"{var.render()} 는 {p.render()} 의 변수가 아님")
    if entry.status != SLACK:
        raise PreconditionError(f"{var.render()} 는 slack 변수가 아님 ({entry.status})")
    d, i = report.context.detour_of(var)
    v = d.family[i - 1]
    dec = _nec_search(v, d.u, d.arrow)
    if dec is not None and not verify_nec_certificate(v, d.u, d.arrow, dec):
        raise AssertionError(f"(Nec) 분해 재검증 실패: {var.render()}")
    status = SATISFIED if dec is not None else VIOLATED
    t = len(report.context.top_cycles())
    return NecResult(var, status, dec, t, report.dimension_lower_bound)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# (Suf,p)
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def suf_factor(d: Detour, v: Path) -> Path | None:
    """v = α·u·w 이고 w 가 source(p) 에서 끝나는 양의 길이 오른쪽 부분경로면 w."""
    k = v.length - d.u_length - 1
    if k < 1 or v.last_arrow != d.arrow:
        return None
    if v.vertex_sequence()[k] != v.source:
        return None
    if v.arrows[k:k + d.u_length] != d.u.arrows:
        return None
    return v.prefix(k)


@dataclass
class SufResult:
    entries: dict[VarKey, tuple[str, Path | None]]

    @property
    def status(self) -> str:
        states = {s for s, _ in self.entries.values()}
        if VIOLATED in states:
            return VIOLATED
        if UNKNOWN in states:
            return UNKNOWN
        return SATISFIED

    def violations(self) -> list[VarKey]:
        return [v for v, (s, _) in self.entries.items() if s == VIOLATED]

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "vars": [
                {"var": v.render(), "status": s, "w": w.render() if w else None}
                for v, (s, w) in self.entries.items()
            ],
        }


def check_suf(P: Presentation, p: Path, report: SlackReport | None = None) -> SufResult:
    report = report or slack_report(P, p)
    out: dict[VarKey, tuple[str, Path | None]] = {}
    for v, entry in report.entries.items():
        if entry.status == TIGHT:
            continue
        if entry.status == UNKNOWN:
            out[v] = (UNKNOWN, None)
            continue
        d, i = report.context.detour_of(v)
        w = suf_factor(d, d.family[i - 1])
        out[v] = (SATISFIED, w) if w is not None else (VIOLATED, None)
    return SufResult(out)


def families_factor_through_top(report: SlackReport) -> bool:
    """모든 v_i(α,u) 가 α·u·w_i 꼴 (w_i 는 source(p) 의 순환)."""
    return all(
        suf_factor(d, v) is not None
        for d in report.context.detours
        for v in d.family
    )


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 단항 대수: cond4
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass
class Cond4Witness:
    path: Path
    i: int
    j: int

    @property
    def mast(self) -> Path:
        return self.path.prefix(self.j + 1)

    def to_dict(self) -> dict:
        return {"path": self.path.render(), "i": self.i, "j": self.j, "mast": self.mast.render()}


@dataclass
class Cond4Report:
    verdict: bool
    condition_n: ConditionNReport
    witness: Cond4Witness | None = None

    def to_dict(self) -> dict:
        return {
            "verdict": verdict_label(self.verdict),
            "condition_n": self.condition_n.to_dict(),
            "witness": self.witness.to_dict() if self.witness else None,
        }


def _cond4_violation(seq: tuple[str, ...], i: int, j: int, reachable: set[tuple[str, ...]]) -> bool:
    if not (seq[i] == seq[j] and seq[i + 1] != seq[j + 1]):
        return False
    if seq[: i + 1] + (seq[j + 1],) not in reachable:
        return False
    head = seq[: i + 1]
    body = seq[: j + 1]
    return body[len(body) - len(head):] != head


def _reachable_sequences(P: Presentation) -> set[tuple[str, ...]]:
    return {q.vertex_sequence() for q in nonzero_paths(P, P.loewy - 1)}


def verify_cond4_witness(P: Presentation, witness: Cond4Witness) -> bool:
    q = witness.path
    if not (0 <= witness.i < witness.j < q.length) or q.length >= P.loewy:
        return False
    if any(g.length <= q.length and _is_infix(g, q) for g in P.generators):
        return False
    return _cond4_violation(q.vertex_sequence(), witness.i, witness.j, _reachable_sequences(P))


def _is_infix(g: Path, q: Path) -> bool:
    n = g.length
    return any(q.arrows[k:k + n] == g.arrows for k in range(q.length - n + 1))


def check_monomial_cond4(P: Presentation, inventory: MastInventory | None = None) -> Cond4Report:
    if not P.monomial:
        raise UnsupportedOperationError("cond4 는 단항 표현에서만 정의됨")
    inventory = inventory or enumerate_masts(P)
    n_report = check_condition_N(P, inventory)
    reachable = _reachable_sequences(P)
    for q in inventory.positive():
        seq = q.vertex_sequence()
        for j in range(1, q.length):
            for i in range(j):
                if _cond4_violation(seq, i, j, reachable):
                    w = Cond4Witness(q, i, j)
                    logger.debug(f"cond4 위반: {q.render()} (i={i}, j={j})")
                    return Cond4Report(False, n_report, w)
    return Cond4Report(bool(n_report.verdict), n_report)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# halyard 모양 카탈로그
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass(frozen=True)
class HalyardShape:
    """층별 정점 라벨과 허용 halyard 구간 (from 층, to 층).

    라벨이 다르면 정점도 달라야 한다. may_coincide 의 쌍만 예외.
    """
    name: str
    labels: tuple[int, ...]
    spans: tuple[tuple[int, int], ...]
    may_coincide: tuple[tuple[int, int], ...] = ()


SHORT_SHAPES = (
    HalyardShape("loop-1", (1, 1, 1, 2, 3), ((1, 3),)),
    HalyardShape("loop-2", (1, 1, 1, 1, 2), ((1, 4), (2, 4))),
    HalyardShape("cycle-2", (1, 2, 1, 2, 3), ((1, 4),)),
)

LENGTH5_SHAPES = (
    HalyardShape("loop-1", (1, 1, 1, 2, 3, 4), ((1, 3),), may_coincide=((3, 4),)),
    HalyardShape("loop-2", (1, 1, 1, 1, 2, 3), ((1, 4), (2, 4))),
    HalyardShape("loop-3", (1, 1, 1, 1, 1, 2), ((1, 5), (2, 5), (3, 5))),
    HalyardShape("cycle-2", (1, 2, 1, 2, 3, 4), ((1, 4),)),
    HalyardShape("cycle-3", (1, 2, 3, 1, 2, 4), ((1, 5),)),
)


def catalogue_for(length: int) -> tuple[HalyardShape, ...]:
    if length > 5:
        raise UnsupportedOperationError(f"카탈로그는 길이 ≤ 5 마스트에만 있음 (길이 {length})")
    return LENGTH5_SHAPES if length == 5 else SHORT_SHAPES


def _labels_fit(shape: HalyardShape, offset: int, verts: tuple[str, ...]) -> bool:
    labels = shape.labels[offset:offset + len(verts)]
    if len(labels) != len(verts):
        return False
    assign: dict[int, str] = {}
    for lab, v in zip(labels, verts):
        if assign.setdefault(lab, v) != v:
            return False
    for a, b in ((a, b) for a in assign for b in assign if a < b):
        if assign[a] == assign[b] and (a, b) not in shape.may_coincide:
            return False
    return True


@dataclass
class CatalogueMatch:
    var: VarKey
    shape: str
    offset: int

    def to_dict(self) -> dict:
        return {"var": self.var.render(), "shape": self.shape, "offset": self.offset}


@dataclass
class CatalogueResult:
    status: str
    matches: list[CatalogueMatch] = field(default_factory=list)
    offending: VarKey | None = None

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "matches": [m.to_dict() for m in self.matches],
            "offending": self.offending.render() if self.offending else None,
        }


def match_halyard(p: Path, d: Detour, v: Path, var: VarKey) -> CatalogueMatch | None:
    if v.last_arrow != d.arrow:
        return None
    verts = p.vertex_sequence()
    span = (d.u_length, v.length)
    for shape in catalogue_for(p.length):
        for offset in range(len(shape.labels) - len(verts) + 1):
            if (span[0] + offset, span[1] + offset) not in shape.spans:
                continue
            if _labels_fit(shape, offset, verts):
                return CatalogueMatch(var, shape.name, offset)
    return None


def check_halyard_catalogue(P: Presentation, p: Path, report: SlackReport | None = None) -> CatalogueResult:
    catalogue_for(p.length)
    report = report or slack_report(P, p)
    matches: list[CatalogueMatch] = []
    undecided = False
    for v, entry in report.entries.items():
        if entry.status == TIGHT:
            continue
        d, i = report.context.detour_of(v)
        if d.u_length == 0:
            continue
        if entry.status == UNKNOWN:
            undecided = True
            continue
        m = match_halyard(p, d, d.family[i - 1], v)
        if m is None:
            return CatalogueResult(VIOLATES, matches, v)
        matches.append(m)
    return CatalogueResult(UNKNOWN if undecided else CONFORMS, matches)


def check_circular_halyards(P: Presentation, p: Path, report: SlackReport | None = None) -> list[Detour]:
    """원형이 아닌 halyard 목록 (condition (N) 아래에서는 비어 있어야 함)."""
    report = report or slack_report(P, p)
    return [f.detour for f in report.detours if f.halyard and not f.circular]
