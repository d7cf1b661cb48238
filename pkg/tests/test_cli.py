import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diracqca.cli import RunConfig, main, oracle_report, run
from diracqca.core import FieldState, delta_state
from diracqca.stateio import StateFormatError, load_state, parse_state, write_state


def write_json(tmp_path, doc, name="state.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return path


def test_load_delta(tmp_path):
    path = write_json(tmp_path, {"sites": [{"x": 0, "R": [1, 0], "L": [0, 0]}]})
    assert load_state(path) == delta_state(0)


def test_load_two_sites_unit_norm(tmp_path, recwarn):
    h = 2 ** -0.5
    doc = {"sites": [{"x": 3, "R": [0, h], "L": [0, 0]}, {"x": 1, "R": [0, 0], "L": [h, 0]}]}
    s = load_state(write_json(tmp_path, doc))
    assert s.offset == 1 and len(s) == 3
    assert s.norm2() == pytest.approx(1, abs=1e-15)
    assert not [w for w in recwarn if "norm" in str(w.message)]


def test_load_warns_on_norm(tmp_path):
    path = write_json(tmp_path, {"sites": [{"x": 0, "R": [2, 0], "L": [0, 0]}]})
    with pytest.warns(UserWarning, match="norm"):
        load_state(path)


@pytest.mark.parametrize("text, field", [
    ('{"sites": [{"x": 0, "R": [1, 0]}]}', "'L'"),
    ('{"sites": [{"x": 0.5, "R": [1, 0], "L": [0, 0]}]}', "sites[0].x"),
    ('{"sites": [{"x": 0, "R": [1], "L": [0, 0]}]}', "sites[0].R"),
    ('{"sites": [{"x": 0, "R": [1, 0], "L": [0, 0]}, {"x": 0, "R": [0, 0], "L": [0, 0]}]}', "duplicate"),
    ('{"states": []}', "sites"),
    ('{"sites": [', "line 1"),
])
def test_load_errors_name_the_field(tmp_path, text, field):
    with pytest.raises(StateFormatError, match=field.replace("[", r"\[").replace("]", r"\]")):
        load_state(write_json(tmp_path, text))


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=50, deadline=None)
@given(st.integers(-1000, 1000), st.lists(st.tuples(finite, finite, finite, finite), min_size=0, max_size=6),
       st.integers(0, 10 ** 6))
def test_round_trip_bit_exact(tmp_path_factory, offset, rows, time):
    amps = np.array([[complex(a, b), complex(c, d)] for a, b, c, d in rows], dtype=complex).reshape(-1, 2)
    s = FieldState(offset if rows else 0, amps, time)
    path = tmp_path_factory.mktemp("rt") / "s.json"
    write_state(s, path)
    back = parse_state(json.loads(path.read_text()))
    assert back.offset == s.offset and back.time == s.time
    assert back.amplitudes.tobytes() == s.amplitudes.tobytes()


def cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_evolve_pathsum_csv(capsys):
    code, out, _ = cli(["evolve", "--m", "0.6", "--t", "100", "--method", "pathsum"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "x,prob,reR,imR,reL,imL"
    assert len(lines) == 202
    total = sum(float(row.split(",")[1]) for row in lines[1:])
    assert abs(total - 1) <= 1e-10


def test_evolve_json(capsys):
    code, out, _ = cli(["evolve", "--t", "3", "--method", "direct", "--format", "json"], capsys)
    doc = json.loads(out)
    assert code == 0 and len(doc["sites"]) == 7


def test_compare_direct_spectral(capsys):
    code, out, _ = cli(["compare", "--methods", "direct,spectral", "--t", "128", "--tol", "1e-9"], capsys)
    assert code == 0
    assert out.splitlines()[1].endswith(",1")


def test_compare_failure_exit_code(capsys):
    code, _, _ = cli(["compare", "--methods", "direct,spectral", "--t", "20", "--tol", "0"], capsys)
    assert code == 2


def test_kernel_t2(capsys):
    code, out, _ = cli(["kernel", "--t", "2", "--m", "0.6", "--method", "pathsum"], capsys)
    rows = [r.split(",") for r in out.strip().splitlines()[1:]]
    d0 = {(r[1], r[2]): float(r[3]) for r in rows if r[0] == "0"}
    assert code == 0
    assert d0[("0", "0")] == pytest.approx(-0.36, abs=1e-15)
    assert d0[("1", "1")] == pytest.approx(-0.36, abs=1e-15)
    assert len(rows) == 5 * 4


@pytest.mark.parametrize("method", ["direct", "spectral", "closedform", "brute"])
def test_kernel_methods_agree(method, capsys):
    _, ref, _ = cli(["kernel", "--t", "6", "--m", "0.3", "--format", "json"], capsys)
    _, got, _ = cli(["kernel", "--t", "6", "--m", "0.3", "--method", method, "--format", "json"], capsys)
    a = np.array([e["value"] for e in json.loads(ref)["entries"]])
    b = np.array([e["value"] for e in json.loads(got)["entries"]])
    assert np.max(np.abs(a - b)) <= 1e-12


def test_resource_guard_exit(capsys):
    code, _, err = cli(["kernel", "--t", "17", "--method", "brute"], capsys)
    assert code == 3 and "t <= 16" in err


@pytest.mark.parametrize("args", [["evolve", "--m", "1.5"], ["evolve", "--method", "magic"],
                                  ["compare", "--methods", "direct"], ["frobnicate"],
                                  ["bench", "--grid", "1,2"]])
def test_usage_errors_exit_1(args, capsys):
    assert cli(args, capsys)[0] == 1


def test_parse_error_exit_1(tmp_path, capsys):
    path = write_json(tmp_path, '{"sites": [{"x": "zero"}]}')
    code, _, err = cli(["evolve", "--input", str(path)], capsys)
    assert code == 1 and "sites[0]" in err


def test_evolve_from_file(tmp_path, capsys):
    path = write_json(tmp_path, {"sites": [{"x": 5, "R": [0, 0], "L": [1, 0]}]})
    out_path = tmp_path / "out.csv"
    assert main(["evolve", "--t", "4", "--input", str(path), "--output", str(out_path)]) == 0
    rows = out_path.read_text().splitlines()
    assert rows[1].startswith("1,") and rows[-1].startswith("9,")


def test_bench_rows(capsys):
    code, out, _ = cli(["bench", "--grid", "4,8;0.2,0.7", "--methods", "direct,brute,spectral"], capsys)
    rows = out.strip().splitlines()
    assert code == 0
    assert rows[0] == "method,t,m,seconds,peak_bytes"
    assert len(rows) == 1 + 2 * 2 * 3


def test_oracle_report_structure():
    rep = oracle_report(3)
    assert rep["failures"] == 0
    assert [row["t"] for row in rep["structure"]] == [0, 1, 2, 3]
    assert len(rep["prefactor_reconciliation"]) == 6


def test_run_accepts_config():
    assert run(RunConfig(command="compare", t=5, methods=("pathsum", "closedform"), tol=1e-12,
                         output="-")) == 0
