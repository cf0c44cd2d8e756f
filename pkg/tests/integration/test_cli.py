"""
[통합 테스트] 명령행 도구
==========================
app.cli.run(argv) 를 프로세스 없이 호출해 표준 출력 JSON, 종료 코드, 바이트 안정성을 확인.

테스트 범위:
  1. decide / decide-mast 보고서와 종료 코드
  2. 마스트 단위 명령 (variety, iso, classes, graph, normalize, nec, suf, catalogue)
  3. 생성기 명령 (gen-variety, gen-tiled, opposite)
  4. 입력 오류 → 종료 코드 1
  5. 픽스처 헤더의 골든 명령/결과, 재실행 바이트 동일성

실행: pytest tests/integration/test_cli.py -v
"""
import os
import shlex
import sys

import orjson
import pytest

BASE_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), "../.."))
sys.path.insert(0, os.path.join(BASE_DIR, "backend"))

pytestmark = pytest.mark.integration

try:
    from app.cli import EXIT_INPUT_ERROR, EXIT_OK, run
    from app.core.quiver import PATH_ORDER_NOTE
    from conftest import FIXTURE_NAMES, fixture_path
except ImportError:
    pytestmark = [pytest.mark.integration, pytest.mark.skip(reason="cli import 실패")]


def invoke(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def invoke_json(capsys, *argv):
    code, out, err = invoke(capsys, *argv)
    assert out.endswith("\n"), "JSON 출력은 개행으로 끝나야 함"
    return code, orjson.loads(out)


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 1. decide
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
class TestDecide:
    """대수 판정 보고서."""

    def test_infinite_with_witness(self, capsys):
        code, report = invoke_json(capsys, "decide", fixture_path("ex36"))
        assert code == EXIT_OK
        assert report["command"] == "decide"
        assert report["path_order"] == PATH_ORDER_NOTE
        assert report["status"] == "InfiniteType"
        assert report["witness"]["mast"] == "a d g b"

    def test_finite(self, capsys):
        code, report = invoke_json(capsys, "decide", fixture_path("ex59"))
        assert code == EXIT_OK
        assert report["status"] == "FiniteType"
        assert report["unresolved"] == []

    def test_opposite_flag(self, capsys):
        _, report = invoke_json(capsys, "decide", fixture_path("ex42c"), "--opposite")
        assert report["status"] == "FiniteType"

    def test_no_fastpath_keeps_verdict(self, capsys):
        _, report = invoke_json(capsys, "--no-fastpath", "decide", fixture_path("ex36"))
        assert report["status"] == "InfiniteType"
        assert all(step["step"] != "fastpath" for step in report["trace"])

    def test_byte_identical_reruns(self, capsys):
        """같은 입력은 같은 바이트."""
        _, first, _ = invoke(capsys, "decide", fixture_path("ex56b"))
        _, second, _ = invoke(capsys, "decide", fixture_path("ex56b"))
        assert first == second

    def test_decide_mast(self, capsys):
        code, report = invoke_json(
            capsys, "decide-mast", fixture_path("ex56a"), "--path", "a5 a4 a3 a1 a2 a1"
        )
        assert code == EXIT_OK
        assert report["status"] == "Infinite"
        assert report["reason"] == "DimensionExceeds"

    def test_logs_go_to_stderr(self, capsys):
        _, out, _ = invoke(capsys, "--log-level", "debug", "decide", fixture_path("ex23a"))
        assert orjson.loads(out)["status"] == "FiniteType"


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 2. 마스트 단위 명령
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
class TestMastCommands:
    """--path 를 받는 명령들."""

    def test_variety(self, capsys):
        code, report = invoke_json(capsys, "variety", fixture_path("ex23d"), "--path", "g b1 a")
        assert code == EXIT_OK
        assert report["variety"]["polys"] == ["X[b2,1,1] - 1"]
        assert report["mast"]["status"] == "Mast"

    def test_variety_of_non_mast(self, capsys):
        code, report = invoke_json(capsys, "variety", fixture_path("ex23d"), "--path", "g g")
        assert code == EXIT_OK
        assert report["mast"]["status"] == "NotMast"
        assert "slack" not in report

    def test_masts(self, capsys):
        _, report = invoke_json(capsys, "masts", fixture_path("ex23a"))
        assert report["masts"] == ["e1", "e2", "a", "b", "a b"]

    def test_iso(self, capsys):
        _, report = invoke_json(
            capsys, "iso", fixture_path("ex36"), "--path", "d g b a", "--points", "0;5"
        )
        assert report["status"] == "Equivalent"

    def test_classes_with_negative_grid(self, capsys):
        _, report = invoke_json(
            capsys, "--grid=-2..2", "classes", fixture_path("ex36"), "--path", "a d g b"
        )
        assert report["grid_points"] == 5
        assert report["count"] == 5

    def test_graph_dot(self, capsys):
        code, out, _ = invoke(
            capsys, "graph", fixture_path("ex36"), "--path", "a d g b", "--point", "1", "--dot"
        )
        assert code == EXIT_OK
        assert out.startswith('digraph "a d g b" {')
        assert 'L1_1 -> L4_2 [label="a", style=dashed, constraint=false];' in out

    def test_normalize(self, capsys):
        _, report = invoke_json(
            capsys, "normalize", fixture_path("ex36"), "--path", "d g b a", "--point", "3"
        )
        assert report["normalized"] == {"X[g,0,1]": "0"}

    def test_nec(self, capsys):
        _, report = invoke_json(
            capsys, "nec", fixture_path("ex36"), "--path", "a d g b", "--var", "X[a,1,1]"
        )
        assert report["status"] == "Violated"

    def test_suf(self, capsys):
        _, report = invoke_json(capsys, "suf", fixture_path("ex36"), "--path", "d g b a")
        assert report["status"] == "Satisfied"

    def test_catalogue(self, capsys):
        _, report = invoke_json(capsys, "catalogue", fixture_path("ex36"), "--path", "a d g b")
        assert report["status"] == "Violates"


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 3. 생성기
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
class TestGenerators:
    """생성 결과는 다시 읽을 수 있는 표현 텍스트."""

    def test_gen_tiled_text(self, capsys):
        code, out, _ = invoke(capsys, "gen-tiled", fixture_path("tiled3.mat"), "--text")
        assert code == EXIT_OK
        assert "# algebra: tiled-000-100-110" in out
        assert "arrow t2_0: 2 -> 0" in out

    def test_gen_tiled_random_is_seeded(self, capsys):
        _, first, _ = invoke(capsys, "gen-tiled", "--random", "7")
        _, second, _ = invoke(capsys, "gen-tiled", "--random", "7")
        assert first == second

    def test_gen_variety(self, capsys):
        _, out, _ = invoke(capsys, "gen-variety", fixture_path("x1x2.poly"), "--text")
        assert out.rstrip().endswith("# mast: a2 b2 g1 a1 b1 g0")

    def test_opposite_text_round_trip(self, capsys, tmp_path):
        _, out, _ = invoke(capsys, "opposite", fixture_path("ex42c"), "--text")
        target = tmp_path / "op.alg"
        target.write_text(out, encoding="utf-8")
        _, back, _ = invoke(capsys, "opposite", str(target), "--text")
        _, original = invoke_json(capsys, "validate", fixture_path("ex42c"))
        target.write_text(back, encoding="utf-8")
        _, again = invoke_json(capsys, "validate", str(target))
        assert again["relations"] == original["relations"]
        assert again["arrows"] == original["arrows"]


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 4. 입력 오류
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
class TestInputErrors:
    """모든 입력 오류는 종료 코드 1, 메시지는 표준 오류."""

    def test_syntax_error_reports_position(self, capsys, tmp_path):
        bad = tmp_path / "bad.alg"
        bad.write_text("vertices: 1 2\narrow a 1 -> 2\n", encoding="utf-8")
        code, out, err = invoke(capsys, "decide", str(bad))
        assert code == EXIT_INPUT_ERROR
        assert out == ""
        assert "error: 2:1:" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = invoke(capsys, "decide", str(tmp_path / "nope.alg"))
        assert code == EXIT_INPUT_ERROR
        assert err.startswith("error:")

    def test_wrong_point_arity(self, capsys):
        code, _, err = invoke(
            capsys, "iso", fixture_path("ex23e"), "--path", "a2 a1", "--points", "1;1"
        )
        assert code == EXIT_INPUT_ERROR
        assert "X[b1,0,1]" in err

    def test_unknown_command(self, capsys):
        code, _, _ = invoke(capsys, "explode", fixture_path("ex23a"))
        assert code == EXIT_INPUT_ERROR

    def test_unknown_arrow_in_path(self, capsys):
        code, _, _ = invoke(capsys, "variety", fixture_path("ex23a"), "--path", "zz")
        assert code == EXIT_INPUT_ERROR

    def test_non_mast_decide_mast(self, capsys):
        code, _, _ = invoke(capsys, "decide-mast", fixture_path("ex23d"), "--path", "g g")
        assert code == EXIT_INPUT_ERROR


# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
# 5. 픽스처 골든 헤더
# ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
EXPECT_PREFIX = "# expect "


def expectations(name: str) -> list[tuple[list[str], dict]]:
    """'# expect <command> [옵션] -> key=value ...' 줄을 (argv, {점 경로: 기대값}) 로."""
    out = []
    with open(fixture_path(name), encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith(EXPECT_PREFIX):
                continue
            command, sep, expected = line[len(EXPECT_PREFIX):].partition(" -> ")
            assert sep, f"{name}: '->' 없음: {line!r}"
            head, *options = shlex.split(command)
            pairs = {}
            for item in shlex.split(expected):
                key, _, raw = item.partition("=")
                try:
                    pairs[key] = orjson.loads(raw)
                except orjson.JSONDecodeError:
                    pairs[key] = raw
            out.append(([head, fixture_path(name), *options], pairs))
    return out


def lookup(report: dict, dotted: str):
    value = report
    for key in dotted.split("."):
        value = value[key]
    return value


@pytest.mark.parametrize("name", FIXTURE_NAMES)
class TestFixtureGolden:
    """모든 픽스처는 파싱되고, 헤더에 적힌 명령/결과 쌍이 그대로 재현된다."""

    def test_has_expectations(self, name):
        assert expectations(name), f"{name}.alg 에 '# expect' 줄이 없음"

    def test_parses(self, name, capsys):
        code, report = invoke_json(capsys, "validate", fixture_path(name))
        assert code == EXIT_OK
        assert report["name"] == name

    def test_expected_output_and_bytes(self, name, capsys):
        for argv, pairs in expectations(name):
            code, first, err = invoke(capsys, *argv)
            assert code == EXIT_OK, f"{argv}: {err}"
            _, second, _ = invoke(capsys, *argv)
            assert first == second, f"{argv}: 재실행 결과가 바이트 단위로 다름"
            report = orjson.loads(first)
            for key, expected in pairs.items():
                assert lookup(report, key) == expected, f"{argv}: {key}"
