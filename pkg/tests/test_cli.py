import io
import json

import pytest

from app.cli import EXIT_OK, EXIT_PARSE_ERROR, EXIT_TYPE_ERROR, main


def run(argv, stdin_text=""):
    out = io.StringIO()
    code = main(argv, stdin=io.StringIO(stdin_text), stdout=out)
    return code, out.getvalue()


@pytest.fixture
def source_file(tmp_path):
    def write(text: str):
        path = tmp_path / "program.pi"
        path.write_text(text)
        return str(path)

    return write


def test_check_prints_derivation_and_leftover(fixture_path):
    code, out = run(["check", str(fixture_path("courier.pi"))])
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0].startswith("res new[x]")
    assert lines[-1] == "leftover: []"


def test_check_json(fixture_path):
    code, out = run(["check", str(fixture_path("two_senders.pi")), "--json"])
    assert code == EXIT_OK
    body = json.loads(out)
    assert body["success"] is True
    assert body["data"]["names"] == ["c", "u"]
    assert body["data"]["leftover"] == "[gra (0,0), gra (0,0)]"


def test_reduce_to_end(fixture_path):
    code, out = run(["reduce", str(fixture_path("courier.pi")), "--to-end"])
    assert code == EXIT_OK
    lines = out.splitlines()
    assert [line.split(":")[0] for line in lines[:4]] == ["step 1", "step 2", "step 3", "step 4"]
    assert all("channel=internal" in line for line in lines[:4])
    assert lines[-1] == "normal form: end"


def test_reduce_json_reports_root_contexts(fixture_path):
    code, out = run(["reduce", str(fixture_path("courier.pi")), "--steps", "2", "--json"])
    assert code == EXIT_OK
    data = json.loads(out)["data"]
    assert len(data["trace"]) == 2
    assert data["roots"] == ["[] => []", "[] => []"]


def test_roundtrip_suffixes_every_name(fixture_path):
    code, out = run(["roundtrip", str(fixture_path("naming.pi"))])
    assert code == EXIT_OK
    assert out == (
        "free z^0 : unit @ lin (0,0);\n"
        "new x^0 . (x^0?(x^1). x^1!z^0. end | new y^0 . x^0!y^0. y^0?(y^1). end)\n"
    )


def test_parse_error_exit_code(source_file):
    code, out = run(["check", source_file("new . end")])
    assert code == EXIT_PARSE_ERROR
    assert out.startswith("parse error:")
    assert "line 1, column 5" in out


def test_scope_error_exit_code(source_file):
    code, out = run(["check", source_file("x!y. end")])
    assert code == EXIT_TYPE_ERROR
    assert out.startswith("ScopeError:")


def test_type_error_exit_code(source_file):
    code, out = run(["check", source_file("new c : chan<unit>[lin (0,0)] @ lin 1 . end")])
    assert code == EXIT_TYPE_ERROR
    assert out.startswith("ResidualUsage:")


def test_missing_file(tmp_path):
    code, out = run(["check", str(tmp_path / "absent.pi")])
    assert code == EXIT_TYPE_ERROR
    assert out.startswith("cannot read input:")


def test_repl_steps_on_a_free_channel(fixture_path):
    code, out = run(["repl", str(fixture_path("two_senders.pi"))], "1\nq\n")
    assert code == EXIT_OK
    assert "  [1] comm on ext 1 -> (end | end) | 1!0. end" in out
    assert "  [2] comm on ext 1 -> " in out
    assert "leftover: [gra (0,0), gra (0,0)]" in out
    assert "contexts: [gra (0,1), gra (0,0)] => [gra (0,0), gra (0,0)]" in out


def test_repl_rejects_bad_choice(fixture_path):
    code, out = run(["repl", str(fixture_path("two_senders.pi"))], "99\n")
    assert code == EXIT_OK
    assert "choose a number between 1 and" in out


def test_repl_runs_until_nothing_applies(source_file):
    path = source_file("end")
    code, out = run(["repl", path])
    assert code == EXIT_OK
    assert out == "process: end\ncontexts: [] => []\nno step applies\n"


def test_properties_command():
    code, out = run(["properties", "--samples", "3", "--only", "exchange", "roundtrip"])
    assert code == EXIT_OK
    assert out.splitlines() == [
        "exchange: passed 3/3 (seed 2020, budget 8)",
        "roundtrip: passed 3/3 (seed 2020, budget 8)",
    ]
