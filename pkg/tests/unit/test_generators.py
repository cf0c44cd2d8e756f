"""
[단위 테스트] 정답이 알려진 표현 생성기
========================================
다중선형 시스템의 다양체 실현, 타일 차수 몫.

pytest tests/unit/test_generators.py -v
"""
from fractions import Fraction
import os
import sys

import numpy as np
import pytest

BASE_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), "../.."))
sys.path.insert(0, os.path.join(BASE_DIR, "backend"))

try:
    from app.core.criteria import check_condition_N
    from app.core.decide import FINITE_TYPE, decide_algebra
    from app.core.errors import GeneratorInputError
    from app.core.generators import (
        ExponentMatrix,
        min_plus_closure,
        parse_exponent_matrix,
        parse_multilinear,
        random_exponent_matrix,
        realize_variety,
        tiled_order_presentation,
    )
    from app.core.poly import VarKey
    from app.core.variety import NONEMPTY, UNKNOWN, enumerate_masts, variety_polynomials
    from conftest import fixture_path
except ImportError:
    pytestmark = pytest.mark.skip(reason="generators import 실패")

GRID = [Fraction(v) for v in range(-2, 3)]


def read(name):
    with open(fixture_path(name), encoding="utf-8") as fh:
        return fh.read()


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 1. 다중선형 시스템
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
class TestMultilinearSystem:
    """입력 검증과 격자 영점."""

    def test_parse_system(self):
        system = parse_multilinear(read("x1x2.poly"))
        assert system.m == 2
        assert [f.render() for f in system.polynomials] == ["X1*X2 - 1"]

    def test_grid_zeros(self):
        system = parse_multilinear(read("x1x2.poly"))
        assert system.zeros_on(GRID) == [(-1, -1), (1, 1)]

    def test_vars_directive(self):
        system = parse_multilinear("vars: 3\nX1*X2 - 1\n")
        assert system.m == 3

    def test_coefficient_maps(self):
        (coeffs,) = parse_multilinear("X1*X2 - 1").coefficient_maps()
        assert coeffs == {frozenset({1, 2}): Fraction(1), frozenset(): Fraction(-1)}

    def test_square_rejected(self):
        with pytest.raises(GeneratorInputError):
            parse_multilinear("X1^2 - 1")

    def test_variable_outside_range(self):
        with pytest.raises(GeneratorInputError):
            parse_multilinear("vars: 1\nX1*X2 - 1")


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 2. 다양체 실현
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
class TestRealizeVariety:
    """V_p 가 주어진 영점 집합과 같아지는 표현."""

    @pytest.fixture
    def realized(self):
        return realize_variety(parse_multilinear(read("x1x2.poly")))

    def test_shape(self, realized):
        P = realized.presentation
        assert realized.mast.render() == "a2 b2 g1 a1 b1 g0"
        assert P.loewy == 7
        assert P.quiver.vertices == ("0", "1", "2", "3", "4")

    def test_correspondence(self, realized):
        assert realized.correspondence == {
            VarKey.plain(1): VarKey("a1", 1, 1, 3),
            VarKey.plain(2): VarKey("a2", 4, 1, 6),
        }

    def test_defining_polynomial(self, realized):
        vp = variety_polynomials(realized.presentation, realized.mast)
        assert [q.render() for q in vp.polynomials] == ["X[a1,1,1]*X[a2,4,1] - 1"]

    def test_witness_search_uses_given_grid(self, realized):
        """X1*X2 = 1 의 증인은 넘겨준 격자 안에서만 찾는다."""
        P, p = realized.presentation, realized.mast
        assert variety_polynomials(P, p).status == NONEMPTY
        half = variety_polynomials(P, p, [[Fraction(2), Fraction(1, 2)]])
        assert half.status == NONEMPTY
        x1, x2 = (realized.correspondence[VarKey.plain(j)] for j in (1, 2))
        assert (half.witness[x1], half.witness[x2]) == (Fraction(2), Fraction(1, 2))
        assert variety_polynomials(P, p, [[Fraction(3)]]).status == UNKNOWN

    def test_condition_n_holds(self, realized):
        """실현된 표현은 condition (N) 을 만족한다."""
        assert check_condition_N(realized.presentation).verdict is True

    def test_grid_zero_sets_agree(self, realized):
        system = parse_multilinear(read("x1x2.poly"))
        vp = variety_polynomials(realized.presentation, realized.mast)
        for coords in [(a, b) for a in GRID for b in GRID]:
            expected = coords in system.zeros_on(GRID)
            assert vp.contains(realized.translate(coords)) == expected, f"{coords} 에서 불일치"


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 3. 타일 차수
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
class TestExponentMatrix:
    """대각 0, 삼각 부등식, 기본 조건."""

    def test_parse_matrix(self):
        lam = parse_exponent_matrix(read("tiled3.mat"))
        assert lam.n == 3
        assert lam[2, 0] == 1
        assert [(i, j) for i in range(3) for j in range(3) if lam.irreducible(i, j)] == [(0, 1), (1, 2), (2, 0)]

    def test_diagonal_must_vanish(self):
        with pytest.raises(GeneratorInputError):
            ExponentMatrix(((1, 0), (1, 0)))

    def test_triangle_inequality(self):
        with pytest.raises(GeneratorInputError):
            ExponentMatrix(((0, 0, 3), (1, 0, 1), (1, 1, 0)))

    def test_basic_condition(self):
        with pytest.raises(GeneratorInputError):
            ExponentMatrix(((0, 0), (0, 0)))

    def test_min_plus_closure(self):
        w = np.array([[0, 3, 9], [1, 0, 2], [1, 1, 0]])
        lam = min_plus_closure(w)
        assert lam[0, 2] == 5
        assert lam[0, 1] == 3

    def test_random_matrices_are_valid(self, rng):
        for _ in range(20):
            lam = random_exponent_matrix(rng, 3)
            assert lam.n == 3


class TestTiledOrder:
    """타일 차수 몫 표현."""

    def test_three_cycle(self):
        P = tiled_order_presentation(parse_exponent_matrix(read("tiled3.mat")))
        assert [a.name for a in P.quiver.arrows] == ["t0_1", "t1_2", "t2_0"]
        assert P.loewy == 3
        assert P.relations == ()
        assert P.name == "tiled-000-100-110"

    def test_two_vertices(self):
        P = tiled_order_presentation(ExponentMatrix(((0, 0), (1, 0))))
        assert [a.name for a in P.quiver.arrows] == ["t0_1", "t1_0"]
        assert (P.loewy, P.relations) == (2, ())

    def test_single_vertex(self):
        P = tiled_order_presentation(ExponentMatrix(((0,),)))
        assert P.quiver.arrows == ()
        assert P.loewy == 2

    def test_fixture_is_finite_type(self):
        P = tiled_order_presentation(parse_exponent_matrix(read("tiled3.mat")))
        assert decide_algebra(P).status == FINITE_TYPE

    def test_masts_never_repeat_a_vertex(self, rng):
        for _ in range(10):
            P = tiled_order_presentation(random_exponent_matrix(rng, 3))
            for p in enumerate_masts(P).masts:
                seq = p.vertex_sequence()
                assert len(set(seq)) == len(seq), f"{P.name}: {p.render()}"
