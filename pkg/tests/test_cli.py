import json
import subprocess
import sys

import pytest

from gitbetti.cli import main
from gitbetti.worksheet import shipped_worksheet


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_series_text(capsys):
    code, out, _ = run(capsys, "series", "1/(1-t^2)", "--truncation", "4")
    assert code == 0
    assert out.strip() == "1 + t^2 + t^4"


def test_series_json(capsys):
    code, out, _ = run(capsys, "series", "BG(SL3)", "--truncation", "6", "--format", "json")
    obj = json.loads(out)
    assert code == 0 and obj["truncation"] == 6


def test_series_error(capsys):
    code, _, err = run(capsys, "series", "1 + (t", "--truncation", "4")
    assert code == 2 and "column" in err


def test_verify_pass(capsys):
    code, out, _ = run(capsys, "verify", "--worksheet", "cubic4fold.ws")
    assert code == 0 and out.strip().endswith("verify: pass")


def test_verify_mismatch(tmp_path, capsys):
    text = shipped_worksheet("planecubic.ws").replace(
        "expect = (1+t^2-t^6-t^8+t^12)", "expect = (1+t^2-t^6-t^8+2t^12)"
    )
    path = tmp_path / "bad.ws"
    path.write_text(text)
    code, out, _ = run(capsys, "verify", "--worksheet", str(path))
    assert code == 1 and "first difference at t^12" in out


def test_verify_errors(tmp_path, capsys):
    path = tmp_path / "nogold.ws"
    path.write_text("[worksheet]\ntitle = x\ntruncation = 2\n\n[step a]\nkind = series_literal\nprovenance = [TRIVIAL] x\nvalue = 1\n")
    assert run(capsys, "verify", "--worksheet", str(path))[0] == 2
    path.write_text("[worksheet]\ntruncation = 2\n[step a]\nkind = nope\n")
    code, _, err = run(capsys, "verify", "--worksheet", str(path))
    assert code == 2 and "line 4" in err
    assert run(capsys, "verify", "--worksheet", str(tmp_path / "missing.ws"))[0] == 2


def test_evaluate_json_step(capsys):
    code, out, _ = run(capsys, "evaluate", "--worksheet", "cubic4fold.ws", "--step", "A1", "--format", "json")
    obj = json.loads(out)
    assert code == 0
    assert obj["steps"][-1]["name"] == "A1"
    assert obj["steps"][0]["status"] == "match"


def test_evaluate_text(capsys):
    code, out, _ = run(capsys, "evaluate", "--worksheet", "sextics_crosscheck.ws", "--timing")
    assert code == 0 and "[PASS] binary_ss" in out and "elapsed" in out


def test_evaluate_unknown_step(capsys):
    assert run(capsys, "evaluate", "--worksheet", "planecubic.ws", "--step", "nope")[0] == 2


def test_search_plane_cubics(capsys):
    code, out, _ = run(capsys, "search", "--vars", "3", "--degree", "3")
    obj = json.loads(out)
    assert code == 0
    assert [row["codim_rootcount"] for row in obj["index_vectors"]] == [2, 3, 4, 5, 5, 7]


def test_search_bad_cutoff(capsys):
    assert run(capsys, "search", "--vars", "3", "--degree", "3", "--cutoff", "-2")[0] == 2


@pytest.mark.parametrize("args,code", [(["verify", "--worksheet", "planecubic.ws"], 0), (["series", "t/"], 2)])
def test_console_entry(args, code):
    proc = subprocess.run([sys.executable, "-m", "gitbetti.cli", *args], capture_output=True, text=True)
    assert proc.returncode == code
