"""
[단위 테스트] 퀴버 코어
========================
경로 합성·부분경로 술어·출력 순서·반대 퀴버.

pytest tests/unit/test_quiver.py -v
"""
import os
import sys

import pytest

BASE_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), "../.."))
sys.path.insert(0, os.path.join(BASE_DIR, "backend"))

try:
    from app.core.errors import CompositionError, PresentationError
    from app.core.quiver import (
        Arrow,
        Path,
        Quiver,
        compose,
        cycles_at,
        double_arrow_pair,
        enumerate_paths,
        has_double_arrows,
        is_acyclic,
        is_left_subpath,
        is_right_subpath,
        is_subpath,
        right_subpaths,
    )
except ImportError:
    pytestmark = pytest.mark.skip(reason="quiver import 실패")


@pytest.fixture
def two_cycles_quiver():
    return Quiver.build(
        ["1", "2", "3"],
        [Arrow("a", "1", "2"), Arrow("b", "2", "1"), Arrow("g", "1", "3"), Arrow("d", "3", "1")],
    )


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 1. 합성과 출력 순서
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
class TestComposition:
    """q after p 합성과 표기 규약."""

    def test_compose_appends_in_application_order(self, two_cycles_quiver):
        Q = two_cycles_quiver
        p = Q.parse_path("b a")
        q = Q.parse_path("g")
        r = compose(q, p)
        assert r.names == ("a", "b", "g")
        assert r.render() == "g b a"
        assert (r.source, r.target) == ("1", "3")

    def test_compose_mismatch_raises(self, two_cycles_quiver):
        Q = two_cycles_quiver
        with pytest.raises(CompositionError):
            compose(Q.parse_path("g"), Q.parse_path("a"))

    def test_trivial_path_is_identity(self, two_cycles_quiver):
        Q = two_cycles_quiver
        p = Q.parse_path("d g")
        assert compose(p, Q.trivial("1")) == p
        assert compose(Q.trivial("1"), p) == p

    def test_trivial_render_and_parse(self, two_cycles_quiver):
        e = two_cycles_quiver.parse_path("e2")
        assert e.length == 0 and e.render() == "e2"

    def test_unknown_arrow_rejected(self, two_cycles_quiver):
        with pytest.raises(PresentationError):
            two_cycles_quiver.parse_path("a zz")

    def test_non_composable_tokens_rejected(self, two_cycles_quiver):
        with pytest.raises(CompositionError):
            two_cycles_quiver.parse_path("a a")

    def test_vertex_sequence(self, two_cycles_quiver):
        p = two_cycles_quiver.parse_path("d g b a")
        assert p.vertex_sequence() == ("1", "2", "1", "3", "1")
        assert p.first_arrow.name == "a" and p.last_arrow.name == "d"


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 2. 부분경로 술어
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
class TestSubpaths:
    """오른쪽 = 먼저 적용되는 쪽, 왼쪽 = 나중에 적용되는 쪽."""

    def test_right_subpaths_are_prefixes(self, two_cycles_quiver):
        p = two_cycles_quiver.parse_path("d g b a")
        rs = right_subpaths(p)
        assert [r.render() for r in rs] == ["e1", "a", "b a", "g b a", "d g b a"]

    def test_right_and_left(self, two_cycles_quiver):
        Q = two_cycles_quiver
        p = Q.parse_path("d g b a")
        assert is_right_subpath(Q.parse_path("b a"), p)
        assert not is_right_subpath(Q.parse_path("d g"), p)
        assert is_left_subpath(Q.parse_path("d g"), p)
        assert not is_left_subpath(Q.parse_path("b a"), p)

    def test_trivial_left_subpath_is_target(self, two_cycles_quiver):
        Q = two_cycles_quiver
        p = Q.parse_path("g")
        assert is_left_subpath(Q.trivial("3"), p)
        assert not is_left_subpath(Q.trivial("1"), p)

    def test_infix(self, two_cycles_quiver):
        Q = two_cycles_quiver
        p = Q.parse_path("a d g b a")
        assert is_subpath(Q.parse_path("g b"), p)
        assert is_subpath(Q.parse_path("a d"), p)
        assert not is_subpath(Q.parse_path("b a d"), Q.parse_path("d g b a"))


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 3. 퀴버 성질
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
class TestQuiverProperties:
    """이중 화살표, 비순환, 경로 열거."""

    def test_double_arrows(self, two_cycles_quiver):
        assert not has_double_arrows(two_cycles_quiver)
        Q = Quiver.build(["1", "2"], [Arrow("x", "1", "2"), Arrow("y", "1", "2")])
        assert has_double_arrows(Q)

    def test_double_arrow_pair_in_arrow_order(self, two_cycles_quiver):
        assert double_arrow_pair(two_cycles_quiver) is None
        Q = Quiver.build(["1"], [Arrow("g0", "1", "1"), Arrow("g1", "1", "1"), Arrow("g2", "1", "1")])
        first, second = double_arrow_pair(Q)
        assert (first.name, second.name) == ("g0", "g1")

    def test_acyclic(self, two_cycles_quiver):
        assert not is_acyclic(two_cycles_quiver)
        line = Quiver.build(["1", "2", "3"], [Arrow("x", "1", "2"), Arrow("y", "2", "3")])
        assert is_acyclic(line)

    def test_loop_is_cycle(self):
        Q = Quiver.build(["1"], [Arrow("g", "1", "1")])
        assert not is_acyclic(Q)
        assert [a.name for a in Q.loops_at("1")] == ["g"]

    def test_enumerate_paths(self, two_cycles_quiver):
        paths = enumerate_paths(two_cycles_quiver, "1", "1", range(1, 3))
        assert {p.render() for p in paths} == {"b a", "d g"}

    def test_cycles_at_includes_trivial(self, two_cycles_quiver):
        cycles = cycles_at(two_cycles_quiver, "2", 2)
        assert [p.render() for p in cycles] == ["e2", "a b"]

    def test_duplicate_arrow_name_rejected(self):
        with pytest.raises(PresentationError):
            Quiver.build(["1", "2"], [Arrow("x", "1", "2"), Arrow("x", "2", "1")])

    def test_opposite_reverses_arrows(self, two_cycles_quiver):
        opp = two_cycles_quiver.opposite()
        assert opp.arrow("a") == Arrow("a", "2", "1")
        assert opp.opposite() == two_cycles_quiver

    def test_path_requires_matching_base(self):
        with pytest.raises(CompositionError):
            Path("2", (Arrow("x", "1", "2"),))
