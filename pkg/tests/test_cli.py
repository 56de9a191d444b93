import json
import re
import subprocess
import sys

import pytest

from perspekt.cli import main

PHI_JSON = {"p": 1, "q": 1, "d": 5, "r": 2}


def run(capsys, verb, payload, *extra, tmp_path=None):
    path = tmp_path / "in.json"
    path.write_text(json.dumps(payload))
    code = main([verb, str(path), *extra])
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_csv(capsys, tmp_path):
    payload = {"flow": {"type": "linear", "omega": [1, 2]}, "t_end": 0.04, "dt": 0.01}
    code, out, _ = run(capsys, "simulate", payload, tmp_path=tmp_path)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "t,base_1,base_2,lift_1,lift_2,disc_1,disc_2"
    assert len(lines) == 6
    last = [float(x) for x in lines[-1].split(",")]
    assert last[0] == pytest.approx(0.04) and last[3:5] == pytest.approx([0.04, 0.08])


def test_simulate_precondition_exit_3(capsys, tmp_path):
    payload = {"flow": {"type": "linear", "omega": [100, 0]}, "t_end": 1, "dt": 0.01}
    code, _, err = run(capsys, "simulate", payload, tmp_path=tmp_path)
    assert code == 3 and "dt <" in err


def test_schema_error_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "simulate", {"flow": {"type": "linear"}}, tmp_path=tmp_path)
    assert code == 2 and "omega" in err
    code, _, _ = run(capsys, "equiv-linear", {"a": {"slope": 1}}, tmp_path=tmp_path)
    assert code == 2
    assert main(["simulate", str(tmp_path / "missing.json")]) == 2
    capsys.readouterr()


def test_bad_json_exit_2(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["orbit", str(p)]) == 2
    capsys.readouterr()


def test_equiv_linear(capsys, tmp_path):
    payload = {"a": {"slope": PHI_JSON}, "b": {"slope": {"p": -1, "q": 1, "d": 5, "r": 2}}}
    code, out, _ = run(capsys, "equiv-linear", payload, tmp_path=tmp_path)
    res = json.loads(out)
    assert code == 0 and res["status"] == "equivalent"
    payload = {"a": {"slope": PHI_JSON}, "b": {"slope": {"p": 0, "q": 1, "d": 2, "r": 1}}}
    res = json.loads(run(capsys, "equiv-linear", payload, tmp_path=tmp_path)[1])
    assert res["status"] == "not_equivalent"


def test_perspective_forward_backward(capsys, tmp_path):
    payload = {"flow": {"type": "linear", "omega": [1, 2]}, "t_end": 1000, "dt": 0.01}
    res = json.loads(run(capsys, "perspective", payload, tmp_path=tmp_path)[1])
    assert res["escaped"] and len(res["points"]) == 1
    assert res["points"][0]["direction"] == pytest.approx([5**-0.5, 2 * 5**-0.5], abs=2e-3)
    res = json.loads(run(capsys, "perspective", payload, "--backward", tmp_path=tmp_path)[1])
    assert res["points"][0]["direction"] == pytest.approx([-(5**-0.5), -2 * 5**-0.5], abs=2e-3)


def test_perspective_bad_threads(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("PERSPEKT_THREADS", "zero")
    payload = {"flow": {"type": "linear", "omega": [1, 2]}, "t_end": 10, "dt": 0.01}
    assert run(capsys, "perspective", payload, tmp_path=tmp_path)[0] == 2


def test_orbit_and_resource_exit_4(capsys, tmp_path):
    payload = {"base": [[0, 1]], "generators": [[[1, 1], [0, 1]]], "max_word_length": 3}
    code, out, _ = run(capsys, "orbit", payload, tmp_path=tmp_path)
    assert code == 0 and json.loads(out)["count"] == 7
    payload = {"base": [[1, 1.618]], "generators": [[[1, 1], [0, 1]], [[0, -1], [1, 0]]], "max_word_length": 12, "cap": 20}
    assert run(capsys, "orbit", payload, tmp_path=tmp_path)[0] == 4


def test_denjoy_verb(capsys, tmp_path):
    payload = {"alpha": {"p": -1, "q": 1, "d": 2, "r": 1}, "samples": 50, "iterations": 2000}
    res = json.loads(run(capsys, "denjoy", payload, tmp_path=tmp_path)[1])
    assert res["exact"] and res["semiconjugacy_ok"] and res["semiconjugacy_defect"] == 0.0
    code, _, _ = run(capsys, "denjoy", {"alpha": "1/3"}, tmp_path=tmp_path)
    assert code == 3


def test_exponents_verb(capsys, tmp_path):
    payload = {"groups": [[2, {"p": 1, "q": 1, "d": 5, "r": 1}], [1, PHI_JSON]]}
    res = json.loads(run(capsys, "exponents", payload, tmp_path=tmp_path)[1])
    assert res["equal_up_to_constant"] and res["constant"] == 2
    payload = {"flow": {"type": "timechange", "base": {"type": "linear", "omega": [1, 2]}, "rate": {"kind": "constant", "value": 2}}}
    res = json.loads(run(capsys, "exponents", payload, tmp_path=tmp_path)[1])
    assert res["flow"]["defined"] is False
    payload = {"groups": [[1, PHI_JSON, {"p": 0, "q": 1, "d": 2, "r": 1}], [1]]}
    assert run(capsys, "exponents", payload, tmp_path=tmp_path)[0] == 3


def test_solenoid_check_verb(capsys, tmp_path):
    payload = {"solenoid": {"n": 2, "matrices": [[[2, 0], [0, 2]]], "repeat": True, "depth": 3}, "s": ["1/3", "1/5"], "fiber": True}
    res = json.loads(run(capsys, "solenoid-check", payload, tmp_path=tmp_path)[1])
    assert res["point"]["valid"] and res["point"]["defect"] == 0
    assert res["fiber_size"] == 16 and res["fiber"]["count"] == 16 and res["fiber"]["all_valid"]
    payload["solenoid"]["depth"] = 20
    assert run(capsys, "solenoid-check", payload, tmp_path=tmp_path)[0] == 4


def test_print_schema(capsys):
    assert main(["plot-disc", "--print-schema"]) == 0
    schema = json.loads(capsys.readouterr().out)
    assert "orbits" in schema["properties"]


def _orbits_payload():
    return {
        "orbits": [
            {"flow": {"type": "linear", "omega": [1, PHI_JSON]}, "t_end": 50, "dt": 0.01},
            {"flow": {"type": "linear", "omega": [1, PHI_JSON]}, "start": [0.3, 0.1], "t_end": 50, "dt": 0.01},
        ],
        "grid": True,
    }


def test_plot_disc_byte_stable(tmp_path):
    p = tmp_path / "in.json"
    p.write_text(json.dumps(_orbits_payload()))
    outs = []
    for i in range(2):
        o = tmp_path / f"out{i}.svg"
        r = subprocess.run([sys.executable, "-m", "perspekt.cli", "plot-disc", str(p), "-o", str(o)], capture_output=True)
        assert r.returncode == 0, r.stderr
        outs.append(o.read_bytes())
    assert outs[0] == outs[1]
    svg = outs[0].decode()
    for pts in re.findall(r'points="([^"]*)"', svg):
        for pair in pts.split():
            x, y = map(float, pair.split(","))
            assert x * x + y * y <= (1 + 1e-9) ** 2


def test_plot_disc_empty_and_unsupported(capsys, tmp_path):
    code, out, _ = run(capsys, "plot-disc", {"orbits": []}, tmp_path=tmp_path)
    assert code == 0 and 'class="grid"' in out and "orbit0" not in out
    payload = {"orbits": [{"flow": {"type": "linear", "omega": [1, 2, 3]}, "t_end": 1}]}
    assert run(capsys, "plot-disc", payload, tmp_path=tmp_path)[0] == 3
