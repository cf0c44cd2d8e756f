"""
uniserial 명령행 도구
======================
표현 파일(.alg)을 읽어 마스트·다양체·판정 보고서를 JSON 으로 표준 출력에 쓴다.
로그는 표준 오류로만 나간다.

경로 표기: 왼쪽 토큰이 마지막에 적용 ("g b1 a" = g∘b1∘a). 표현 파일 문법과 같다.
'-' 로 시작하는 값은 '=' 로 붙여 쓴다:  --grid=-2..2   --point=-1,-1

사용법:
  python -m app.cli decide fixtures/ex36.alg
  python -m app.cli variety fixtures/ex23d.alg --path "g b1 a"
  python -m app.cli iso fixtures/ex36.alg --path "d g b a" --points "0;5"
  python -m app.cli --grid=-2..2 classes fixtures/ex56b.alg --path "a5 a4 a3 a1 a2 a1"
  python -m app.cli graph fixtures/ex56b.alg --path "a5 a4 a3 a1 a2 a1" --point 0,0,1 --dot
  python -m app.cli gen-tiled --random 7 --text

종료 코드: 0 확정 결과, 2 Unknown 포함, 1 입력 오류.
"""
import argparse
from collections.abc import Sequence
from fractions import Fraction
import itertools
import logging
from pathlib import Path as FilePath
import sys

import numpy as np

from app.config import settings
from app.core.criteria import (
    check_all_varieties_finite,
    check_circular_halyards,
    check_condition_N,
    check_halyard_catalogue,
    check_loop_powers,
    check_nec,
    check_suf,
)
from app.core.decide import UNKNOWN, decide_algebra, decide_mast
from app.core.errors import PointFormatError, PresentationError, UniserialError
from app.core.fibers import emit_dot, iso_classes, iso_equivalent, layered_graph, normalize_point
from app.core.generators import (
    parse_exponent_matrix,
    parse_multilinear,
    random_exponent_matrix,
    realize_variety,
    tiled_order_presentation,
)
from app.core.poly import VarKey
from app.core.presentation import load_presentation, opposite_presentation, serialize
from app.core.report import report_json
from app.core.variety import (
    MastContext,
    Point,
    build_mast_context,
    enumerate_masts,
    mast_status,
    render_point,
    slack_report,
    variety_polynomials,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_UNKNOWN = 2


class _Parser(argparse.ArgumentParser):
    """사용법 오류도 종료 코드 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT_ERROR, f"{self.prog}: error: {message}\n")


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 좌표 / 격자 입력
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def _rational(token: str) -> Fraction:
    try:
        return Fraction(token.strip())
    except (ValueError, ZeroDivisionError):
        raise PointFormatError(f"유리수가 아님: {token!r}") from None


def load_point(text: str, ctx: MastContext) -> Point:
    """'1,-1/2' → 정준 변수 순서의 좌표."""
    tokens = text.split(",") if text.strip() else []
    if len(tokens) != len(ctx.variables):
        raise PointFormatError(
            f"좌표 {len(tokens)}개, 기대 {len(ctx.variables)}개 ({', '.join(v.render() for v in ctx.variables)})"
        )
    return {v: _rational(t) for v, t in zip(ctx.variables, tokens)}


def parse_grid_values(spec: str) -> list[Fraction]:
    """'-2..2' (정수 구간) 또는 '0,1,-1/2' (나열)."""
    if ".." in spec:
        lo, _, hi = spec.partition("..")
        try:
            a, b = int(lo), int(hi)
        except ValueError:
            raise PointFormatError(f"정수 구간이 아님: {spec!r}") from None
        if a > b:
            raise PointFormatError(f"빈 구간: {spec!r}")
        return [Fraction(x) for x in range(a, b + 1)]
    values = [_rational(t) for t in spec.split(",") if t.strip()]
    if not values:
        raise PointFormatError(f"빈 격자: {spec!r}")
    return values


def load_grid(spec: str, ctx: MastContext) -> list[Point]:
    """격자 값의 |D| 겹 곱. MAX_GRID_POINTS 초과분은 버린다."""
    values = parse_grid_values(spec)
    out = []
    for coords in itertools.product(values, repeat=len(ctx.variables)):
        if len(out) >= settings.MAX_GRID_POINTS:
            logger.warning(f"격자 점이 MAX_GRID_POINTS={settings.MAX_GRID_POINTS} 에서 절단됨")
            break
        out.append(dict(zip(ctx.variables, coords)))
    return out


def _var(text: str, ctx: MastContext) -> VarKey:
    return ctx.resolve(text.replace(" ", ""))


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 명령
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def _load(args):
    P = load_presentation(args.file)
    return opposite_presentation(P) if getattr(args, "opposite", False) else P


def _mast(args) -> tuple:
    P = _load(args)
    return P, P.quiver.parse_path(args.path)


def _stages(args) -> list[list[Fraction]] | None:
    return settings.grid_stages(parse_grid_values(args.grid)) if args.grid else None


def cmd_validate(args) -> tuple[dict, int]:
    P = _load(args)
    return P.to_dict(), EXIT_OK


def cmd_masts(args) -> tuple[dict, int]:
    inv = enumerate_masts(_load(args), args.max_length)
    return inv.to_dict(), EXIT_UNKNOWN if inv.unknown else EXIT_OK


def cmd_variety(args) -> tuple[dict, int]:
    P, p = _mast(args)
    vp = variety_polynomials(P, p, _stages(args))
    out = {"path": p.render(), "mast": mast_status(P, p).to_dict(), "variety": vp.to_dict()}
    if vp.status == UNKNOWN:
        return out, EXIT_UNKNOWN
    if mast_status(P, p).is_mast:
        out["slack"] = slack_report(P, p).summary()
    return out, EXIT_OK


def cmd_slack(args) -> tuple[dict, int]:
    P, p = _mast(args)
    report = slack_report(P, p)
    out = {"path": p.render(), **report.summary()}
    out["circular_violations"] = [d.render() for d in check_circular_halyards(P, p, report)]
    return out, EXIT_UNKNOWN if report.unknown_vars() else EXIT_OK


def cmd_check_n(args) -> tuple[dict, int]:
    P = _load(args)
    inv = enumerate_masts(P)
    n = check_condition_N(P, inv)
    out = {
        "condition_n": n.to_dict(),
        "all_varieties_finite": check_all_varieties_finite(P, inv).to_dict(),
        "loop_powers": [{"loop": a.name, "mast": p.render()} for a, p in check_loop_powers(P, inv)],
    }
    return out, EXIT_UNKNOWN if n.verdict is None else EXIT_OK


def cmd_decide(args) -> tuple[dict, int]:
    P = _load(args)
    verdict = decide_algebra(P, fastpath=not args.no_fastpath, grid_stages=_stages(args))
    return verdict.to_dict(), EXIT_UNKNOWN if verdict.status == UNKNOWN else EXIT_OK


def cmd_decide_mast(args) -> tuple[dict, int]:
    P, p = _mast(args)
    verdict = decide_mast(P, p, grid_stages=_stages(args))
    return verdict.to_dict(), EXIT_UNKNOWN if verdict.status == UNKNOWN else EXIT_OK


def cmd_iso(args) -> tuple[dict, int]:
    P, p = _mast(args)
    ctx = build_mast_context(P, p)
    base, sep, other = args.points.partition(";")
    if not sep:
        raise PointFormatError("--points 형식: 'k0;k'")
    k0, k = load_point(base, ctx), load_point(other, ctx)
    outcome = iso_equivalent(P, p, k0, k)
    return {"path": p.render(), "base": render_point(k0), "point": render_point(k), **outcome.to_dict()}, EXIT_OK


def cmd_classes(args) -> tuple[dict, int]:
    P, p = _mast(args)
    vp = variety_polynomials(P, p, _stages(args))
    grid = load_grid(args.grid or "-2..2", vp.context)
    members = [pt for pt in grid if vp.contains(pt)]
    partition = iso_classes(P, p, members)
    return {"path": p.render(), "grid_points": len(grid), "members": len(members), **partition.to_dict()}, EXIT_OK


def cmd_graph(args) -> tuple[dict | str, int]:
    P, p = _mast(args)
    ctx = build_mast_context(P, p)
    g = layered_graph(P, p, load_point(args.point, ctx))
    if args.dot:
        return emit_dot(g), EXIT_OK
    return {"path": p.render(), "edge_path": g.is_edge_path, **g.to_dict()}, EXIT_OK


def cmd_normalize(args) -> tuple[dict, int]:
    P, p = _mast(args)
    ctx = build_mast_context(P, p)
    k = load_point(args.point, ctx)
    return {"path": p.render(), "point": render_point(k), "normalized": render_point(normalize_point(P, p, k))}, EXIT_OK


def cmd_nec(args) -> tuple[dict, int]:
    P, p = _mast(args)
    var = _var(args.var, build_mast_context(P, p))
    return {"path": p.render(), **check_nec(P, p, var).to_dict()}, EXIT_OK


def cmd_suf(args) -> tuple[dict, int]:
    P, p = _mast(args)
    suf = check_suf(P, p)
    return {"path": p.render(), **suf.to_dict()}, EXIT_UNKNOWN if suf.status == UNKNOWN else EXIT_OK


def cmd_catalogue(args) -> tuple[dict, int]:
    P, p = _mast(args)
    result = check_halyard_catalogue(P, p)
    return {"path": p.render(), **result.to_dict()}, EXIT_UNKNOWN if result.status == UNKNOWN else EXIT_OK


def cmd_opposite(args) -> tuple[dict | str, int]:
    P = opposite_presentation(load_presentation(args.file))
    text = serialize(P)
    return (text if args.text else {"presentation": text, **P.to_dict()}), EXIT_OK


def _read(path: str) -> str:
    try:
        return FilePath(path).read_text(encoding="utf-8")
    except OSError as e:
        raise PresentationError(f"파일을 읽을 수 없음: {path} ({e})") from e


def cmd_gen_variety(args) -> tuple[dict | str, int]:
    system = parse_multilinear(_read(args.file))
    realized = realize_variety(system)
    text = serialize(realized.presentation) + f"# mast: {realized.mast.render()}\n"
    if args.text:
        return text, EXIT_OK
    return {"system": system.to_dict(), "presentation": text, **realized.to_dict()}, EXIT_OK


def cmd_gen_tiled(args) -> tuple[dict | str, int]:
    if args.random is not None:
        lam = random_exponent_matrix(np.random.default_rng(args.random), args.n)
    elif args.file:
        lam = parse_exponent_matrix(_read(args.file))
    else:
        raise PresentationError("지수 행렬 파일 또는 --random SEED 가 필요함")
    P = tiled_order_presentation(lam)
    text = serialize(P)
    if args.text:
        return text, EXIT_OK
    return {"matrix": lam.to_dict(), "presentation": text, **P.to_dict()}, EXIT_OK


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 파서
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="uniserial",
        description="유한 uniserial 형 판정 도구 (경로는 왼쪽 토큰이 마지막에 적용)",
    )
    parser.add_argument("--log-level", default=None, help=f"로그 레벨 (기본 {settings.LOG_LEVEL})")
    parser.add_argument("--no-fastpath", action="store_true", help="빠른 경로 끄기")
    parser.add_argument("--grid", default=None, help="탐침 격자, 예: --grid=-2..2 또는 --grid=0,1,-1")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    algebra = _Parser(add_help=False)
    algebra.add_argument("file", help="표현 파일 (.alg)")

    mast = _Parser(add_help=False, parents=[algebra])
    mast.add_argument("--path", required=True, help='마스트, 예: "g b1 a"')
    mast.add_argument("--opposite", action="store_true", help="반대 대수에서 계산")

    def add(name: str, handler, parents, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=parents, help=help_text)
        p.set_defaults(handler=handler)
        return p

    add("validate", cmd_validate, [algebra], "표현 검증")
    add("masts", cmd_masts, [algebra], "마스트 열거").add_argument("--max-length", type=int, default=None)
    add("variety", cmd_variety, [mast], "V_p 정의 다항식과 slack 보고서")
    add("slack", cmd_slack, [mast], "slack/tight 분류")
    add("check-n", cmd_check_n, [algebra], "condition (N) 과 관련 진단")
    add("decide", cmd_decide, [algebra], "유한 uniserial 형 판정").add_argument(
        "--opposite", action="store_true", help="반대 대수 판정"
    )
    add("decide-mast", cmd_decide_mast, [mast], "마스트 하나의 동형류 유한성")
    add("iso", cmd_iso, [mast], "두 점의 동형 판정").add_argument(
        "--points", required=True, help="'k0;k', 예: '0;5' 또는 '1,1;-1,-1'"
    )
    add("classes", cmd_classes, [mast], "격자 ∩ V_p 의 동형류 (--grid, 기본 -2..2)")
    graph = add("graph", cmd_graph, [mast], "층 그래프")
    graph.add_argument("--point", required=True)
    graph.add_argument("--dot", action="store_true", help="DOT 출력")
    add("normalize", cmd_normalize, [mast], "top element 정규화").add_argument("--point", required=True)
    add("nec", cmd_nec, [mast], "(Nec,p) 검사").add_argument("--var", required=True, help='예: "X[a,1,1]"')
    add("suf", cmd_suf, [mast], "(Suf,p) 검사")
    add("catalogue", cmd_catalogue, [mast], "halyard 카탈로그 대조")
    add("opposite", cmd_opposite, [algebra], "반대 표현 출력").add_argument("--text", action="store_true")

    gv = sub.add_parser("gen-variety", help="다중선형 시스템 → 표현")
    gv.add_argument("file", help="다항식 목록 파일 (X1..Xm)")
    gv.add_argument("--text", action="store_true")
    gv.set_defaults(handler=cmd_gen_variety)

    gt = sub.add_parser("gen-tiled", help="지수 행렬 → 타일 차수 몫")
    gt.add_argument("file", nargs="?", default=None, help="정수 행렬 파일")
    gt.add_argument("--random", type=int, default=None, metavar="SEED", help="무작위 행렬 시드")
    gt.add_argument("--n", type=int, default=3)
    gt.add_argument("--text", action="store_true")
    gt.set_defaults(handler=cmd_gen_tiled)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logging.basicConfig(
        level=(args.log_level or settings.LOG_LEVEL).upper(),
        format="%(asctime)s [%(levelname)s] %(message)s",
        stream=sys.stderr,
    )
    logger.debug(f"명령 {args.command} 실행")
    try:
        payload, code = args.handler(args)
    except UniserialError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if isinstance(payload, str):
        sys.stdout.write(payload)
    else:
        sys.stdout.write(report_json(payload, args.command))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
