"""
섬유 시스템과 동형류
====================
고정된 마스트 p 위에서 V_p 의 두 점이 같은 uniserial 가군을 주는지 판정한다.

  (*_k)  k_i − k⁰_i = Σ_j Z_j ( a_ij − Σ_{μ<i} k_μ · b_iμj )

  w_j   : source(p) 에서 끝나는 양의 길이 오른쪽 부분경로 (길이 오름차순)
  a_ij  : α·u·w_j 를 층 0 에서 평가한 결과의 v_i 계수 (k⁰ 에서)
  b_iμj : v_μ·w_j 를 층 0 에서 평가한 결과의 v_i 계수 (k⁰ 에서)

동형류 계산은 scipy DisjointSet 으로 합치되, 양방향 모두 Equivalent 일 때만 합친다.
"""
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
import itertools
import logging

from scipy.cluster.hierarchy import DisjointSet

from app.config import settings
from app.core.criteria import SATISFIED, check_suf, suf_factor
from app.core.errors import PreconditionError, UnsupportedOperationError
from app.core.poly import (
    Consistency,
    LinearRow,
    LinearSystem,
    VarKey,
    format_scalar,
    solve_consistency,
    value_preference,
)
from app.core.presentation import Presentation
from app.core.quiver import Path
from app.core.variety import (
    MastContext,
    Point,
    SlackReport,
    VarietyPresentation,
    render_point,
    slack_report,
    substitution_eval,
    variety_polynomials,
)

logger = logging.getLogger(__name__)

EQUIVALENT = "Equivalent"
DISTINCT = "Distinct"


def point_key(point: Mapping[VarKey, Fraction]) -> tuple:
    return tuple(value_preference(point[v]) for v in sorted(point))


def require_member(vp: VarietyPresentation, point: Mapping[VarKey, Fraction], label: str = "점") -> None:
    expected = set(vp.context.variables)
    if set(point) != expected:
        raise PreconditionError(f"{label} 의 좌표 집합이 D 와 다름 (|D|={len(expected)})")
    if not vp.contains(point):
        raise PreconditionError(f"{label} {render_point(point)} 는 V_p 위에 있지 않음")


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 섬유 시스템
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass
class FiberSystem:
    context: MastContext
    base: Point
    cycles: list[Path]
    a: dict[tuple[VarKey, int], Fraction] = field(default_factory=dict)
    b: dict[tuple[VarKey, int, int], Fraction] = field(default_factory=dict)

    @property
    def t(self) -> int:
        return len(self.cycles)

    @property
    def unknowns(self) -> list[VarKey]:
        return [VarKey.fiber(j) for j in range(1, self.t + 1)]

    def row(self, var: VarKey, k: Mapping[VarKey, Fraction]) -> LinearRow:
        d, i = self.context.detour_of(var)
        coeffs: dict[VarKey, Fraction] = {}
        for j in range(1, self.t + 1):
            c = self.a.get((var, j), Fraction(0))
            for mu in range(1, i):
                c -= k[d.varkey(mu)] * self.b.get((var, mu, j), Fraction(0))
            if c:
                coeffs[VarKey.fiber(j)] = c
        return LinearRow(coeffs, Fraction(k[var]) - self.base[var])

    def system(self, k: Mapping[VarKey, Fraction]) -> LinearSystem:
        rows = [self.row(v, k) for v in self.context.variables]
        return LinearSystem(rows, self.unknowns)

    def apply(self, z: Mapping[int, Fraction]) -> Point:
        """Z 가 주어졌을 때 (*_k) 를 층별 삼각 순서로 풀어 새 좌표 k 를 만든다."""
        out: Point = {}
        for d in self.context.detours:
            for i, var in enumerate(d.varkeys(), start=1):
                val = self.base[var]
                for j, zj in z.items():
                    if not zj:
                        continue
                    c = self.a.get((var, j), Fraction(0))
                    for mu in range(1, i):
                        c -= out[d.varkey(mu)] * self.b.get((var, mu, j), Fraction(0))
                    val += zj * c
                out[var] = val
        return out

    def to_dict(self) -> dict:
        return {
            "base": render_point(self.base),
            "cycles": [w.render() for w in self.cycles],
            "a": [
                {"var": v.render(), "j": j, "value": format_scalar(c)}
                for (v, j), c in sorted(self.a.items()) if c
            ],
            "b": [
                {"var": v.render(), "mu": mu, "j": j, "value": format_scalar(c)}
                for (v, mu, j), c in sorted(self.b.items()) if c
            ],
        }


def _word(*parts: Path) -> Path:
    arrows = tuple(a for part in parts for a in part.arrows)
    return Path(parts[0].base, arrows)


def fiber_system(P: Presentation, p: Path, k0: Mapping[VarKey, Fraction]) -> FiberSystem:
    vp = variety_polynomials(P, p)
    require_member(vp, k0, "기준점")
    ctx = vp.context
    base = {v: Fraction(k0[v]) for v in ctx.variables}
    cycles = ctx.top_cycles()
    fs = FiberSystem(ctx, base, cycles)
    for j, w in enumerate(cycles, start=1):
        for d in ctx.detours:
            word = _word(w, d.u, Path(d.arrow.source, (d.arrow,)))
            hit = substitution_eval(ctx, word, 0).instantiate(base)
            for i, v in enumerate(d.family, start=1):
                fs.a[(d.varkey(i), j)] = hit.get(v.length, Fraction(0))
            for mu, v_mu in enumerate(d.family, start=1):
                hit = substitution_eval(ctx, _word(w, v_mu), 0).instantiate(base)
                for i in range(mu + 1, len(d.family) + 1):
                    fs.b[(d.varkey(i), mu, j)] = hit.get(d.family[i - 1].length, Fraction(0))
    return fs


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 동형 판정 / 동형류
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass
class IsoOutcome:
    status: str
    consistency: Consistency

    @property
    def equivalent(self) -> bool:
        return self.status == EQUIVALENT

    def to_dict(self) -> dict:
        out = {"status": self.status}
        if self.equivalent:
            out["witness"] = {v.render(): format_scalar(c) for v, c in self.consistency.witness.items()}
            out["free"] = [v.render() for v in self.consistency.free]
        else:
            out["contradiction"] = format_scalar(self.consistency.contradiction or 0)
        return out


def _iso(fs: FiberSystem, k: Mapping[VarKey, Fraction]) -> IsoOutcome:
    res = solve_consistency(fs.system(k))
    return IsoOutcome(EQUIVALENT if res.consistent else DISTINCT, res)


def iso_equivalent(
    P: Presentation, p: Path, k0: Mapping[VarKey, Fraction], k: Mapping[VarKey, Fraction]
) -> IsoOutcome:
    vp = variety_polynomials(P, p)
    require_member(vp, k, "비교점")
    return _iso(fiber_system(P, p, k0), k)


@dataclass
class IsoPartition:
    points: list[Point]
    classes: list[list[int]]
    anomalies: list[tuple[int, int]] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.classes)

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "classes": [[render_point(self.points[i]) for i in c] for c in self.classes],
            "anomalies": [
                {"forward": render_point(self.points[i]), "backward": render_point(self.points[j])}
                for i, j in self.anomalies
            ],
        }


class _FiberCache:
    def __init__(self, P: Presentation, p: Path):
        self.P, self.p = P, p
        self._cache: dict[tuple, FiberSystem] = {}

    def get(self, k0: Point) -> FiberSystem:
        key = point_key(k0)
        if key not in self._cache:
            self._cache[key] = fiber_system(self.P, self.p, k0)
        return self._cache[key]


def iso_classes(P: Presentation, p: Path, points: Iterable[Mapping[VarKey, Fraction]]) -> IsoPartition:
    vp = variety_polynomials(P, p)
    ordered: list[Point] = []
    seen: set[tuple] = set()
    for pt in points:
        pt = {v: Fraction(c) for v, c in pt.items()}
        require_member(vp, pt)
        if point_key(pt) not in seen:
            seen.add(point_key(pt))
            ordered.append(pt)
    ordered.sort(key=point_key)

    cache = _FiberCache(P, p)
    ds = DisjointSet(range(len(ordered)))
    anomalies: list[tuple[int, int]] = []
    for i, j in itertools.combinations(range(len(ordered)), 2):
        if ds.connected(i, j):
            continue
        forward = _iso(cache.get(ordered[i]), ordered[j]).equivalent
        backward = _iso(cache.get(ordered[j]), ordered[i]).equivalent
        if forward and backward:
            ds.merge(i, j)
        elif forward != backward:
            anomalies.append((i, j))
            logger.warning(
                f"비대칭 동형 판정: {render_point(ordered[i])} ↔ {render_point(ordered[j])} (p={p.render()})"
            )
    classes = sorted((sorted(s) for s in ds.subsets()), key=lambda c: c[0])
    return IsoPartition(ordered, classes, anomalies)


def symmetry_audit(P: Presentation, p: Path, points: Iterable[Mapping[VarKey, Fraction]]) -> list[tuple[Point, Point]]:
    pts = [{v: Fraction(c) for v, c in pt.items()} for pt in points]
    cache = _FiberCache(P, p)
    out = []
    for k, l in itertools.combinations(pts, 2):
        if _iso(cache.get(k), l).equivalent != _iso(cache.get(l), k).equivalent:
            out.append((k, l))
    if out:
        logger.warning(f"대칭성 감사 실패 {len(out)}건 (p={p.render()})")
    return out


# ── 탐침 점 ───────────────────────────────────────────────
def probe_points(vp: VarietyPresentation, values: list[Fraction]) -> tuple[list[Point], bool]:
    """해 분기마다 매개변수에 격자 값을 넣어 V_p 의 점을 만든다. (점 목록, 절단 여부)."""
    if vp.solution is None:
        return [], False
    cap = settings.MAX_GRID_POINTS
    out: list[Point] = []
    seen: set[tuple] = set()
    truncated = False
    for branch in vp.solution.branches:
        params = branch.parameters
        for combo in itertools.product(values, repeat=len(params)):
            if len(out) >= cap:
                truncated = True
                break
            guess = dict(zip(params, combo))
            if not all(q.evaluate(guess) == 0 for q in branch.residual):
                continue
            pt = branch.point_at(guess)
            key = point_key(pt)
            if key not in seen:
                seen.add(key)
                out.append(pt)
    if truncated:
        logger.warning(f"탐침 점이 MAX_GRID_POINTS={cap} 에서 절단됨 (p={vp.context.path.render()})")
    return out, truncated


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 정규화 (top element 교체)
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def normalize_point(
    P: Presentation,
    p: Path,
    k: Mapping[VarKey, Fraction],
    report: SlackReport | None = None,
    *,
    max_passes: int | None = None,
) -> Point:
    """
    top 좌표를 짧은 순서로 0 으로 만든다. max_passes 기본값은 top 좌표 수 + 1.
    패스를 다 써도 0 이 아닌 top 좌표가 남으면 UnsupportedOperationError.
    """
    report = report or slack_report(P, p)
    suf = check_suf(P, p, report)
    if suf.status != SATISFIED:
        raise UnsupportedOperationError(f"(Suf,p) 가 성립하지 않아 정규화 불가: {p.render()}")
    ctx = report.context
    cycles = ctx.top_cycles()
    triples = []
    for var, (_, w) in suf.entries.items():
        assert w is not None
        triples.append((w.length, var, cycles.index(w) + 1))
    triples.sort(key=lambda t: (t[0], t[1].order_key()))

    current: Point = {v: Fraction(c) for v, c in k.items()}
    # 한 바퀴로 끝나지 않으면 고정점까지 반복
    passes = len(triples) + 1 if max_passes is None else max_passes
    for _ in range(passes):
        changed = False
        for _, var, j in triples:
            lv = current[var]
            if lv == 0:
                continue
            current = fiber_system(P, p, current).apply({j: -lv})
            changed = True
        if not changed:
            break
    else:
        left = [var.render() for _, var, _ in triples if current[var] != 0]
        if left:
            logger.warning(f"정규화가 {passes}회 패스 안에 수렴하지 않음 (p={p.render()}, 남은 좌표={left})")
            raise UnsupportedOperationError(f"정규화 미수렴: {p.render()} 에서 {', '.join(left)} 가 0 이 아님")
    return current


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 층 그래프
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
@dataclass
class LayeredGraph:
    name: str
    layers: tuple[str, ...]
    spine: list[tuple[int, int, str]]
    detours: list[tuple[int, int, str]]

    @property
    def is_edge_path(self) -> bool:
        return not self.detours

    def to_dict(self) -> dict:
        return {
            "layers": list(self.layers),
            "spine": [{"from": a, "to": b, "arrow": n} for a, b, n in self.spine],
            "detours": [{"from": a, "to": b, "arrow": n} for a, b, n in self.detours],
        }


def layered_graph(P: Presentation, p: Path, k: Mapping[VarKey, Fraction]) -> LayeredGraph:
    vp = variety_polynomials(P, p)
    require_member(vp, k)
    ctx = vp.context
    spine = [(i, i + 1, a.name) for i, a in enumerate(p.arrows)]
    detours = []
    for d in ctx.detours:
        hits = [v.length for i, v in enumerate(d.family, start=1) if k[d.varkey(i)] != 0]
        if hits:
            detours.append((d.u_length, min(hits), d.arrow.name))
    detours.sort()
    return LayeredGraph(p.render(), p.vertex_sequence(), spine, detours)


def _node(i: int, vertex: str) -> str:
    return f"L{i}_{vertex}"


def emit_dot(g: LayeredGraph) -> str:
    lines = [f'digraph "{g.name}" {{', "  rankdir=TB;", "  node [shape=plaintext];"]
    for i, v in enumerate(g.layers):
        lines.append(f'  {{ rank = same; {_node(i, v)} [label="{v}"]; }}')
    for a, b, name in g.spine:
        lines.append(f'  {_node(a, g.layers[a])} -> {_node(b, g.layers[b])} [label="{name}"];')
    for a, b, name in g.detours:
        lines.append(
            f'  {_node(a, g.layers[a])} -> {_node(b, g.layers[b])} '
            f'[label="{name}", style=dashed, constraint=false];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
