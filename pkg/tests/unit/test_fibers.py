"""
[단위 테스트] 섬유 시스템 / 동형류 / 정규화 / 층 그래프
=======================================================
pytest tests/unit/test_fibers.py -v
"""
from fractions import Fraction
import itertools
import logging
import os
import sys

import pytest

BASE_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), "../.."))
sys.path.insert(0, os.path.join(BASE_DIR, "backend"))

try:
    from app.core.errors import PreconditionError, UnsupportedOperationError
    from app.core.fibers import (
        DISTINCT,
        EQUIVALENT,
        emit_dot,
        fiber_system,
        iso_classes,
        iso_equivalent,
        layered_graph,
        normalize_point,
        probe_points,
        symmetry_audit,
    )
    from app.core.poly import VarKey
    from app.core.variety import build_mast_context, variety_polynomials
    from conftest import load_fixture, mast, point
except ImportError:
    pytestmark = pytest.mark.skip(reason="fibers import 실패")

GRID = [Fraction(v) for v in range(-2, 3)]


def ctx_of(name, text):
    P = load_fixture(name)
    p = mast(P, text)
    return P, p, build_mast_context(P, p)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 1. 섬유 시스템 계수
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
class TestFiberSystem:
    """a_ij, b_iμj 계산."""

    def test_coefficients(self):
        P, p, ctx = ctx_of("ex36", "d g b a")
        fs = fiber_system(P, p, point(ctx, 0))
        (x,) = ctx.variables
        assert [w.render() for w in fs.cycles] == ["b a", "d g b a"]
        assert fs.a[(x, 1)] == 1
        assert fs.a[(x, 2)] == 0
        assert fs.unknowns == [VarKey.fiber(1), VarKey.fiber(2)]

    def test_second_mast_has_no_action(self):
        P, p, ctx = ctx_of("ex36", "a d g b")
        fs = fiber_system(P, p, point(ctx, 0))
        assert fs.t == 1
        assert all(c == 0 for c in fs.a.values())

    def test_base_point_must_lie_on_variety(self):
        P, p, ctx = ctx_of("ex23d", "g b1 a")
        with pytest.raises(PreconditionError):
            fiber_system(P, p, point(ctx, 2, 0))


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 2. 동형 판정
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
class TestIsoEquivalence:
    """(*_k) 의 해 존재 ⇔ 같은 uniserial."""

    def test_all_points_equivalent(self):
        P, p, ctx = ctx_of("ex36", "d g b a")
        out = iso_equivalent(P, p, point(ctx, 0), point(ctx, 5))
        assert out.status == EQUIVALENT
        assert out.consistency.witness == {VarKey.fiber(1): Fraction(5), VarKey.fiber(2): Fraction(0)}

    def test_second_mast_distinct(self):
        P, p, ctx = ctx_of("ex36", "a d g b")
        assert iso_equivalent(P, p, point(ctx, 0), point(ctx, 1)).status == DISTINCT

    def test_reflexive(self):
        P, p, ctx = ctx_of("ex23e", "a2 a1")
        k = point(ctx, -1, -1)
        assert iso_equivalent(P, p, k, k).equivalent

    def test_non_member_rejected(self):
        P, p, ctx = ctx_of("ex23d", "g b1 a")
        with pytest.raises(PreconditionError):
            iso_equivalent(P, p, point(ctx, 1, 0), point(ctx, 0, 0))


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 3. 동형류 분할
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
class TestIsoClasses:
    """격자 점들의 동형류."""

    def test_single_class(self):
        P, p, ctx = ctx_of("ex36", "d g b a")
        part = iso_classes(P, p, [point(ctx, v) for v in GRID])
        assert part.count == 1
        assert part.anomalies == []

    def test_second_mast_five_classes(self):
        P, p, ctx = ctx_of("ex36", "a d g b")
        part = iso_classes(P, p, [point(ctx, v) for v in GRID])
        assert part.count == 5

    def test_free_coordinate_separates(self):
        P, p, ctx = ctx_of("ex23d", "g b1 a")
        part = iso_classes(P, p, [point(ctx, 1, v) for v in GRID])
        assert part.count == 5

    def test_points_sorted_by_preference(self):
        P, p, ctx = ctx_of("ex23e", "a2 a1")
        part = iso_classes(P, p, [point(ctx, -1, -1), point(ctx, 1, 1)])
        first = part.points[0]
        assert [first[v] for v in ctx.variables] == [1, 1]
        assert part.count == 2

    def test_duplicates_collapsed(self):
        P, p, ctx = ctx_of("ex36", "d g b a")
        part = iso_classes(P, p, [point(ctx, 1), point(ctx, 1)])
        assert len(part.points) == 1

    def test_symmetry_audit_clean(self):
        P, p, ctx = ctx_of("ex23d", "g b1 a")
        pts = [point(ctx, 1, a) for a in (0, 1, -1)]
        assert symmetry_audit(P, p, pts) == []


class TestProbePoints:
    """해 분기에서 만든 V_p 의 점."""

    def test_isolated_points(self):
        P, p, _ = ctx_of("ex23e", "a2 a1")
        pts, truncated = probe_points(variety_polynomials(P, p), GRID)
        assert len(pts) == 2 and not truncated

    def test_parameter_grid(self):
        P, p, _ = ctx_of("ex23d", "g b1 a")
        pts, _ = probe_points(variety_polynomials(P, p), GRID)
        assert len(pts) == len(GRID)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 4. 정규화
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
class TestNormalize:
    """(Suf,p) 아래에서 slack 좌표를 0 으로."""

    def test_slack_coordinate_cleared(self):
        P, p, ctx = ctx_of("ex36", "d g b a")
        out = normalize_point(P, p, point(ctx, 3))
        assert out == point(ctx, 0)

    def test_idempotent_and_equivalent(self):
        P, p, ctx = ctx_of("ex36", "d g b a")
        for v in GRID:
            k = point(ctx, v)
            once = normalize_point(P, p, k)
            assert normalize_point(P, p, once) == once
            assert iso_equivalent(P, p, k, once).equivalent

    def test_requires_suf(self):
        P, p, ctx = ctx_of("ex36", "a d g b")
        with pytest.raises(UnsupportedOperationError):
            normalize_point(P, p, point(ctx, 1))

    def test_unconverged_raises(self, caplog):
        """패스가 모자라 top 좌표가 남으면 조용히 반환하지 않는다."""
        P, p, ctx = ctx_of("ex36", "d g b a")
        with caplog.at_level(logging.WARNING, logger="app.core.fibers"):
            with pytest.raises(UnsupportedOperationError, match="미수렴"):
                normalize_point(P, p, point(ctx, 3), max_passes=0)
        assert any("수렴하지 않음" in r.getMessage() for r in caplog.records)

    def test_single_pass_is_enough_here(self):
        P, p, ctx = ctx_of("ex36", "d g b a")
        assert normalize_point(P, p, point(ctx, 3), max_passes=1) == point(ctx, 0)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 5. 층 그래프 / DOT
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
class TestLayeredGraph:
    """0 이 아닌 좌표만 우회 간선으로."""

    def test_edge_path_at_origin(self):
        P, p, ctx = ctx_of("ex36", "a d g b")
        g = layered_graph(P, p, point(ctx, 0))
        assert g.is_edge_path
        assert g.layers == ("2", "1", "3", "1", "2")
        assert [n for _, _, n in g.spine] == ["b", "g", "d", "a"]

    def test_detour_edge(self):
        P, p, ctx = ctx_of("ex36", "a d g b")
        g = layered_graph(P, p, point(ctx, 1))
        assert g.detours == [(1, 4, "a")]

    def test_dot_output(self):
        P, p, ctx = ctx_of("ex36", "a d g b")
        dot = emit_dot(layered_graph(P, p, point(ctx, 1)))
        assert dot.startswith('digraph "a d g b" {')
        assert dot.count("rank = same") == 5
        assert 'L1_1 -> L4_2 [label="a", style=dashed, constraint=false];' in dot
        assert dot.rstrip().endswith("}")

    def test_every_layer_pair_connected_once(self):
        P, p, ctx = ctx_of("ex23e", "a2 a1")
        g = layered_graph(P, p, point(ctx, 1, 1))
        pairs = [(a, b) for a, b, _ in itertools.chain(g.spine, g.detours)]
        assert (0, 1) in pairs and (1, 2) in pairs
        assert len(g.detours) == 2
