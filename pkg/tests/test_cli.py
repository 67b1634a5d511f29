import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mlgosc.cli import RunConfig, config_from_args, main, parse_pairs
from mlgosc.correlators import f12sq_eigenstate_closed
from mlgosc.coupling import gaussian_matrix_elements

PI = math.pi


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


def test_run_config_round_trip_default():
    r = RunConfig()
    assert RunConfig.from_text(r.to_text()) == r


@given(st.floats(0.1, 10), st.lists(st.floats(0, 7), max_size=4), st.none() | st.integers(4, 5000),
       st.booleans(), st.sampled_from(["csv", "json"]))
def test_run_config_round_trip(omega, grid, k_max, flag, fmt):
    r = RunConfig(omega=omega, omega_tau=tuple(grid), k_max=k_max, standard=flag, format=fmt,
                  state="coherent:0.6,-2", coupling="gaussian:0.25")
    assert RunConfig.from_text(r.to_text()) == r


def test_config_file_and_flag_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nstate = fock:2\nomega=2.0\nformat=json\n")
    r = config_from_args(["dwell", "--config", str(path), "--omega", "0.5"])
    assert (r.command, r.state, r.omega, r.format) == ("dwell", "fock:2", 0.5, "json")


def test_bad_config_file(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text("bogus_key=1\n")
    code, _, err = run(capsys, "dwell", "--config", str(path))
    assert code == 2 and "bogus_key" in err
    assert parse_pairs("k_max=none")["k_max"] is None


def test_correlator_ground_state(capsys):
    code, out, _ = run(capsys, "correlator", "--state", "fock:0", "--grid-points", "9",
                       "--grid-stop", repr(2 * PI))
    assert code == 0
    header, rows = table(out)
    assert header == ["omega_tau", "value", "tail_estimate"]
    for x, v, _ in rows:
        ref = f12sq_eigenstate_closed(0, float(x), "delta").value
        assert float(v) == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_correlator_extra_columns(capsys):
    code, out, _ = run(capsys, "correlator", "--omega-tau", "0,1.0", "--oscillatory", "--standard")
    header, rows = table(out)
    assert header[-2:] == ["oscillatory", "c12"]
    assert float(rows[0][-1]) == 1.0


def test_correlator_pstate_side_by_side(capsys):
    code, out, _ = run(capsys, "correlator", "--state", "pstate:1", "--omega-tau",
                       f"0,{PI / 2!r},{PI!r}")
    assert code == 0
    header, rows = table(out)
    assert header == ["omega_tau", "value", "tail_estimate", "closed_form", "c12_exact",
                      "c12_closed"]
    last = [float(v) for v in rows[-1]]
    assert last[1] == pytest.approx(PI / 2) and last[3] == pytest.approx(PI ** 2 / 4)
    assert last[3] / last[1] == pytest.approx(PI / 2, rel=1e-10)
    assert [float(rows[0][i]) for i in (4, 5)] == [1.0, 1.0]


@pytest.mark.parametrize("argv,code", [
    (["correlator", "--grid-points", "0"], 2),
    (["correlator", "--state", "fock:x"], 2),
    (["correlator", "--state", "squeezed:1"], 2),
    (["correlator", "--coupling", "gaussian:-1"], 2),
    (["correlator", "--omega", "-1"], 2),
    (["correlator", "--omega-tau", "-0.5"], 2),
    (["correlator", "--state", "coherent:0,0", "--oscillatory"], 2),
    (["inequalities", "--family", "stationary", "--state", "coherent:1,1", "--omega-tau", "0.3"], 2),
    (["inequalities", "--family", "lg2", "--coupling", "gaussian:0.5", "--omega-tau", "0.3"], 2),
    (["optimize", "--omega-tau", ""], 2),
    (["optimize", "--omega-tau", "0.3", "--x0-range", "1,1"], 2),
    (["gaussian-table", "--size", "0", "--coupling", "gaussian:1"], 2),
    (["correlator", "--omega-tau", "0.3", "--k-cap", "256"], 3),
])
def test_exit_codes(capsys, argv, code):
    got, _, err = run(capsys, *argv)
    assert got == code
    assert err


def test_truncation_message_names_parameter(capsys):
    _, _, err = run(capsys, "correlator", "--omega-tau", "0.3", "--k-cap", "256")
    assert "k_cap" in err


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_inequalities_stationary_ground(capsys):
    code, out, _ = run(capsys, "inequalities", "--family", "stationary", "--grid-start", "0.1",
                       "--grid-stop", repr(PI / 2), "--grid-points", "8", "--tail-tol", "1e-6")
    assert code == 0
    header, rows = table(out)
    assert "luders_scale" in header
    assert any(float(r[1]) < 0 for r in rows)


def test_inequalities_coherent_and_sigma_sweep(capsys):
    code, out, _ = run(capsys, "inequalities", "--state", "coherent:0.6,-2", "--omega-tau", "0.3")
    header, rows = table(out)
    assert code == 0 and float(rows[0][header.index("kernel_2")]) < 0
    code, out, _ = run(capsys, "inequalities", "--state", "coherent:0.6,-2", "--omega-tau", "0.3",
                       "--sigmas", "0.25,0.5,1.0")
    header, rows = table(out)
    assert header[0] == "sigma" and len(rows) == 3
    assert all(float(r[header.index("kernel_2")]) < 0 for r in rows)


def test_inequalities_mlg4_and_lg2(capsys):
    code, out, _ = run(capsys, "inequalities", "--family", "mlg4", "--omega-tau", "0.3")
    header, _ = table(out)
    assert code == 0 and header[-3:] == ["luders_lower", "luders_upper", "tau_d_sq"]
    code, out, _ = run(capsys, "inequalities", "--family", "lg2", "--omega-tau", repr(PI))
    _, rows = table(out)
    assert float(rows[0][1]) == pytest.approx(PI)


def test_optimize_deterministic(capsys, tmp_path):
    argv = ["optimize", "--omega-tau", "0.3", "--search-grid", "5", "--x0-range", "0,1.5",
            "--p0-range=-3,-1"]
    outs = []
    for i in range(2):
        path = tmp_path / f"o{i}.csv"
        assert main(argv + ["-o", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    header, rows = table(outs[0].decode())
    assert header == ["omega_tau", "x0", "p0", "best_kernel", "kernel_index", "tau_d_sq"]
    assert float(rows[0][3]) < 0


def test_dwell_command(capsys):
    code, out, _ = run(capsys, "dwell", "--state", "pstate:1")
    _, rows = table(out)
    got = {r[0]: float(r[1]) for r in rows}
    assert got["spectral"] == pytest.approx(PI / 2)
    assert got["window-pi"] == pytest.approx(PI / 2)
    assert got["p1-closed"] == pytest.approx(PI ** 2 / 4)


def test_gaussian_table_reparses_bit_identical(capsys):
    code, out, _ = run(capsys, "gaussian-table", "--coupling", "gaussian:0.37", "--size", "6")
    _, rows = table(out)
    ref = gaussian_matrix_elements(0.37, size=6).entries
    got = np.zeros((6, 6))
    for n, k, m in rows:
        got[int(n), int(k)] = float(m)
    assert np.array_equal(got, ref)


def test_json_output(capsys):
    code, out, _ = run(capsys, "correlator", "--omega-tau", "0,3.141592653589793", "--format", "json")
    doc = json.loads(out)
    assert doc["schema"] == "mlg-1"
    assert doc["conventions"]["units"] == "hbar = m = 1"
    assert doc["dwell_method"] == "spectral"
    assert doc["columns"] == ["omega_tau", "value", "tail_estimate"]
    assert doc["rows"][1][1] == pytest.approx(PI)
    assert RunConfig(**{k: tuple(v) if isinstance(v, list) else v
                        for k, v in doc["config"].items()}) == config_from_args(
        ["correlator", "--omega-tau", "0,3.141592653589793", "--format", "json"])
