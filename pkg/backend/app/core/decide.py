"""
판정 오케스트레이터
===================
마스트별 판정(decide_mast)과 대수 전체 판정(decide_algebra).

대수 판정 단계 (trace 에 논리 순서대로 기록):
  1. 이중 화살표        → 있으면 InfiniteType
  2. 마스트 열거
  3. condition (N)      → 실패하면 InfiniteType
  4. 비순환 퀴버        → (N) 만으로 FiniteType            [빠른 경로]
  5. 단항 cond4         → 완전 판정                       [빠른 경로]
  6. halyard 카탈로그   → L ≤ CATALOGUE_DECISIVE_MAX_L    [빠른 경로]
  7. 마스트별 판정 집계 (빠른 경로가 결론을 내면 격자 탐침 없이 교차 확인만)

마스트별 판정:
  loop case → (Suf,p) → (Nec,p)/차원 → 단항 top 변수 → 격자 탐침
격자 탐침은 유한성도 무한성도 증명하지 못하므로 결과에 sampled 표시를 남긴다.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
import logging

from app.config import settings
from app.core.criteria import (
    CONFORMS,
    SATISFIED,
    VIOLATED,
    VIOLATES,
    ConditionNReport,
    check_condition_N,
    check_halyard_catalogue,
    check_loop_case,
    check_monomial_cond4,
    check_nec,
    check_suf,
    families_factor_through_top,
    suf_factor,
    verify_cond4_witness,
)
from app.core.errors import PreconditionError
from app.core.fibers import iso_classes, probe_points
from app.core.presentation import Presentation, monomial_contains
from app.core.quiver import PATH_ORDER_NOTE, Path, double_arrow_pair, has_double_arrows, is_acyclic
from app.core.variety import (
    UNKNOWN,
    SlackReport,
    VarietyPresentation,
    enumerate_masts,
    mast_status,
    slack_report,
    variety_polynomials,
)

logger = logging.getLogger(__name__)

FINITELY_MANY = "FinitelyMany"
INFINITE = "Infinite"
FINITE_TYPE = "FiniteType"
INFINITE_TYPE = "InfiniteType"

NEC_VIOLATION = "NecViolation"
DIMENSION_EXCEEDS = "DimensionExceeds"
LOOP_CASE_VIOLATION = "LoopCaseViolation"
MONOMIAL_TOP_VIOLATION = "MonomialTopViolation"


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 마스트별 판정
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass
class MastVerdict:
    mast: Path
    status: str
    class_count: int | None = None
    exactly_one: bool = False
    reason: str | None = None
    certificate: dict = field(default_factory=dict)
    sampled: bool = False
    variety: VarietyPresentation | None = None
    slack: SlackReport | None = None
    unresolved: list[str] = field(default_factory=list)

    @property
    def linear(self) -> bool | None:
        return self.variety.linear if self.variety else None

    def to_dict(self) -> dict:
        out: dict = {
            "path": self.mast.render(),
            "status": self.status,
            "class_count": self.class_count,
            "exactly_one": self.exactly_one,
            "reason": self.reason,
            "sampled": self.sampled,
            "certificate": self.certificate,
            "diagnostics": {
                "linear": self.linear,
                "unique": self.class_count == 1 if self.class_count is not None else None,
            },
        }
        if self.variety is not None:
            full = self.variety.to_dict()
            out["variety"] = {k: full[k] for k in ("vars", "polys", "status")}
        out["slack"] = self.slack.to_dict() if self.slack else []
        if self.unresolved:
            out["unresolved"] = self.unresolved
        return out


def monomial_top_violation(P: Presentation, p: Path, report: SlackReport) -> dict | None:
    """단항 대수: αu ∉ I 이고 p 가 v-가족에 속하는 우회에서 p ≠ α·u·w 이면 무한."""
    for d in report.context.detours:
        if d.family[-1] != p:
            continue
        alpha_u = Path(d.u.base, d.u.arrows + (d.arrow,))
        if monomial_contains(P, alpha_u):
            continue
        if suf_factor(d, p) is None:
            return {"detour": d.to_dict(), "var": d.varkey(len(d.family)).render()}
    return None


def _grid_probe(P: Presentation, p: Path, vp: VarietyPresentation, stages) -> tuple[list[int], bool]:
    counts: list[int] = []
    truncated = False
    for values in stages:
        points, cut = probe_points(vp, values)
        truncated |= cut
        if not points:
            counts.append(0)
            continue
        counts.append(iso_classes(P, p, points).count)
    return counts, truncated


def decide_mast(
    P: Presentation,
    p: Path,
    *,
    condition_n: bool | None = None,
    grid_stages=None,
    probe: bool = True,
) -> MastVerdict:
    """probe=False 이면 구조 조건만 적용하고 격자 탐침이 필요한 마스트는 Unknown 으로 남긴다."""
    status = mast_status(P, p)
    if not status.is_mast:
        raise PreconditionError(f"{p.render()} 는 마스트로 확인되지 않음 ({status.status})")
    if p.length == 0:
        return MastVerdict(p, FINITELY_MANY, 1, True, certificate={"kind": "simple"})

    stages = grid_stages or settings.grid_stages()
    if condition_n is None:
        condition_n = check_condition_N(P).verdict
    vp = variety_polynomials(P, p, grid_stages)
    report = slack_report(P, p)
    base = {"variety": vp, "slack": report}

    # loop case
    loop = check_loop_case(P, p, report)
    if loop.applicable and loop.finite is False:
        return MastVerdict(p, INFINITE, reason=LOOP_CASE_VIOLATION, certificate=loop.to_dict(), **base)
    if loop.applicable and loop.finite:
        count = 1 if loop.exactly_one else None
        return MastVerdict(p, FINITELY_MANY, count, loop.exactly_one, certificate=loop.to_dict(), **base)

    # (Suf,p)
    suf = check_suf(P, p, report)
    if suf.status == SATISFIED and not has_double_arrows(P.quiver):
        if families_factor_through_top(report):
            return MastVerdict(p, FINITELY_MANY, 1, True, certificate={"kind": "uniform_suf", **suf.to_dict()}, **base)
        if not probe:
            return MastVerdict(p, FINITELY_MANY, certificate={"kind": "suf", **suf.to_dict()}, **base)
        counts, _ = _grid_probe(P, p, vp, stages[:1])
        return MastVerdict(
            p, FINITELY_MANY, counts[0], counts[0] == 1, certificate={"kind": "suf", **suf.to_dict()}, **base
        )

    # (Nec,p) 와 차원 상한은 (N) 가정 아래에서만
    if condition_n:
        for var in report.slack_vars():
            nec = check_nec(P, p, var, report)
            if nec.status == VIOLATED:
                return MastVerdict(p, INFINITE, reason=NEC_VIOLATION, certificate=nec.to_dict(), **base)
        t = len(report.context.top_cycles())
        if report.dimension_lower_bound > t:
            cert = {"t": t, "dimension_lower_bound": report.dimension_lower_bound}
            return MastVerdict(p, INFINITE, reason=DIMENSION_EXCEEDS, certificate=cert, **base)
        if P.monomial:
            top = monomial_top_violation(P, p, report)
            if top is not None:
                return MastVerdict(p, INFINITE, reason=MONOMIAL_TOP_VIOLATION, certificate=top, **base)

    # 격자 탐침
    if not probe:
        cert = {"kind": "grid", "counts": [], "skipped": True, "suf": suf.to_dict()}
        return MastVerdict(p, UNKNOWN, certificate=cert, unresolved=["격자 탐침 생략"], **base)
    counts, truncated = _grid_probe(P, p, vp, stages)
    cert = {"kind": "grid", "counts": counts, "truncated": truncated, "suf": suf.to_dict()}
    if counts and counts[0] > 0 and len(set(counts)) == 1:
        return MastVerdict(
            p, FINITELY_MANY, counts[0], counts[0] == 1, certificate=cert, sampled=True, **base
        )
    unresolved = [f"격자 동형류 수 {counts}"]
    unresolved += [v.render() for v in report.unknown_vars()]
    logger.warning(f"마스트 {p.render()} 판정 불가: 동형류 수 {counts}")
    return MastVerdict(p, UNKNOWN, certificate=cert, unresolved=unresolved, **base)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 대수 판정
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass
class AlgebraVerdict:
    algebra: str
    status: str
    witness: dict | None = None
    masts: list[MastVerdict] = field(default_factory=list)
    unresolved: list[str] = field(default_factory=list)
    trace: list[dict] = field(default_factory=list)
    condition_n: ConditionNReport | None = None

    def conjecture_diagnostics(self) -> dict:
        return {
            "all_linear": all(m.linear is not False for m in self.masts),
            "all_unique": all(m.class_count == 1 for m in self.masts),
        }

    def to_dict(self) -> dict:
        return {
            "path_order": PATH_ORDER_NOTE,
            "algebra": self.algebra,
            "status": self.status,
            "witness": self.witness,
            "masts": [m.to_dict() for m in self.masts],
            "unresolved": self.unresolved,
            "trace": self.trace,
            "condition_n": self.condition_n.to_dict() if self.condition_n else None,
            "diagnostics": self.conjecture_diagnostics(),
        }


def _mast_witness(v: MastVerdict) -> dict:
    return {"kind": "mast", "mast": v.mast.render(), "reason": v.reason}


def _aggregate(verdicts: list[MastVerdict], unknown_masts: list[Path]) -> tuple[str, dict | None, list[str]]:
    for v in verdicts:
        if v.status == INFINITE:
            return INFINITE_TYPE, _mast_witness(v), []
    unresolved = [v.mast.render() for v in verdicts if v.status == UNKNOWN]
    unresolved += [p.render() for p in unknown_masts]
    if unresolved:
        return UNKNOWN, None, unresolved
    return FINITE_TYPE, None, []


def _per_mast(
    P: Presentation,
    masts: list[Path],
    condition_n: bool | None,
    workers: int,
    grid_stages=None,
    probe: bool = True,
) -> list[MastVerdict]:
    def one(p: Path) -> MastVerdict:
        return decide_mast(P, p, condition_n=condition_n, grid_stages=grid_stages, probe=probe)

    if workers <= 1:
        return [one(p) for p in masts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, masts))


def _settled_by_fastpath(m: MastVerdict) -> MastVerdict:
    if m.status != UNKNOWN:
        return m
    return replace(m, status=FINITELY_MANY, certificate={"kind": "algebra_fastpath"}, unresolved=[])


def _fast_path(P: Presentation, inventory, n_report: ConditionNReport, trace: list[dict]) -> tuple[str, dict | None] | None:
    if is_acyclic(P.quiver):
        trace.append({"step": "acyclic", "result": FINITE_TYPE})
        return FINITE_TYPE, None

    if P.monomial:
        cond4 = check_monomial_cond4(P, inventory)
        trace.append({"step": "monomial_cond4", "result": cond4.to_dict()})
        if cond4.verdict:
            return FINITE_TYPE, None
        if cond4.witness is not None:
            if not verify_cond4_witness(P, cond4.witness):
                raise AssertionError(f"cond4 증인 재검증 실패: {cond4.witness.path.render()}")
            mv = decide_mast(P, cond4.witness.mast, condition_n=n_report.verdict, probe=False)
            return INFINITE_TYPE, {"kind": "mast", "mast": cond4.witness.mast.render(), "reason": mv.reason}

    masts = [p for p in inventory.positive() if p.length <= 5]
    if P.loewy <= settings.CATALOGUE_DECISIVE_MAX_L + 1 and masts:
        results = [(p, check_halyard_catalogue(P, p)) for p in masts]
        offending = next(((p, r) for p, r in results if r.status == VIOLATES), None)
        decisive = P.loewy <= settings.CATALOGUE_DECISIVE_MAX_L
        summary = {
            "decisive": decisive,
            "violations": [p.render() for p, r in results if r.status == VIOLATES],
        }
        trace.append({"step": "catalogue", "result": summary})
        if not decisive:
            return None
        if offending is not None:
            p, r = offending
            return INFINITE_TYPE, {"kind": "mast", "mast": p.render(), "reason": "CatalogueViolation"}
        if all(r.status == CONFORMS for _, r in results) and not inventory.unknown:
            return FINITE_TYPE, None
    return None


def decide_algebra(
    P: Presentation,
    *,
    fastpath: bool | None = None,
    workers: int | None = None,
    grid_stages: list[list[Fraction]] | None = None,
) -> AlgebraVerdict:
    fastpath = settings.FASTPATH_ENABLED if fastpath is None else fastpath
    workers = settings.MAX_WORKERS if workers is None else workers
    verdict = AlgebraVerdict(P.name, UNKNOWN)
    trace = verdict.trace

    # 평행한 두 화살표 β, β′: β 는 마스트이고 β′ 와 (N) 위반
    double = double_arrow_pair(P.quiver)
    trace.append({"step": "double_arrows", "result": double is not None})
    if double is not None and P.loewy >= 2:
        mast_arrow, other = double
        verdict.status = INFINITE_TYPE
        verdict.witness = {"kind": "condition_n", "arrow": other.name, "mast": mast_arrow.name}
        logger.info(f"[{P.name}] 이중 화살표 {mast_arrow.name}, {other.name}")
        return verdict

    inventory = enumerate_masts(P)
    trace.append({"step": "masts", "result": {"count": len(inventory.masts), "unknown": len(inventory.unknown)}})
    logger.info(f"[{P.name}] 마스트 {len(inventory.masts)}개 열거 (미결정 {len(inventory.unknown)}개)")

    n_report = check_condition_N(P, inventory)
    verdict.condition_n = n_report
    trace.append({"step": "condition_n", "result": n_report.to_dict()["verdict"]})
    if n_report.verdict is False:
        a, p = n_report.violations[0]
        verdict.status = INFINITE_TYPE
        verdict.witness = {"kind": "condition_n", "arrow": a.name, "mast": p.render()}
        logger.info(f"[{P.name}] condition (N) 위반: {a.name} vs {p.render()}")
        return verdict

    fast = _fast_path(P, inventory, n_report, trace) if fastpath and n_report.verdict else None

    # 빠른 경로가 결론을 내면 일반 경로는 구조 조건만으로 교차 확인 (격자 탐침 없음)
    probe = fast is None
    verdict.masts = _per_mast(P, inventory.positive(), n_report.verdict, workers, grid_stages, probe)
    generic = _aggregate(verdict.masts, inventory.unknown)
    trace.append({"step": "generic", "result": generic[0], "probed": probe})

    if fast is not None:
        trace.append({"step": "fastpath", "result": fast[0]})
        if generic[0] != UNKNOWN and generic[0] != fast[0]:
            logger.warning(f"[{P.name}] 빠른 경로({fast[0]})와 일반 경로({generic[0]}) 판정 불일치")
        else:
            verdict.status, verdict.witness = fast
            if verdict.status == INFINITE_TYPE and generic[0] == INFINITE_TYPE and verdict.witness["reason"] is None:
                verdict.witness = generic[1]
            if verdict.status == FINITE_TYPE:
                # 유한 uniserial 형이면 모든 마스트의 동형류도 유한
                verdict.masts = [_settled_by_fastpath(m) for m in verdict.masts]
            return verdict

    verdict.status, verdict.witness, verdict.unresolved = generic
    if verdict.status == FINITE_TYPE:
        diag = verdict.conjecture_diagnostics()
        if not all(diag.values()):
            logger.info(f"[{P.name}] FiniteType 이지만 선형/유일성 진단 불일치: {diag}")
    return verdict
