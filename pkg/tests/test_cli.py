import csv
import io
import json
import math
import subprocess
import sys

import pytest

from wignerlim.cli import main

G = 0.915965594177219015054603514932384110774


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# ---------------------------------------------------------------- zeta


def test_zeta_closed_four_at_one(capsys):
    code, out, _ = run(capsys, "zeta", "--cubic", "-d", "4", "--re", "1", "--method", "closed")
    assert code == 0
    (row,) = rows(out)
    assert float(row["re_Z"]) == pytest.approx(-8 * math.log(2), rel=1e-15)
    assert round(float(row["re_Z"]), 10) == -5.5451774445
    assert float(row["abs_err"]) > 0


def test_zeta_grid_row_count(capsys):
    code, out, _ = run(capsys, "zeta", "--cubic", "-d", "3", "--method", "theta", "--re-min", "-1", "--re-max", "2.4", "--steps", "100")
    assert code == 0
    data = rows(out)
    assert len(data) == 100
    assert list(data[0]) == ["re_s", "im_s", "re_Z", "im_Z", "abs_err"]
    assert float(data[0]["re_s"]) == -1 and float(data[-1]["re_s"]) == 2.4


def test_zeta_form_matches_closed(capsys, tmp_path):
    form = tmp_path / "Q.json"
    form.write_text(json.dumps({"dim": 2, "matrix": [[1, 0], [0, 1]]}))
    _, a, _ = run(capsys, "zeta", "--form", str(form), "--re", "0.7", "--method", "epstein")
    _, b, _ = run(capsys, "zeta", "--cubic", "-d", "2", "--re", "0.7", "--method", "closed")
    za, zb = float(rows(a)[0]["re_Z"]), float(rows(b)[0]["re_Z"])
    assert abs(za - zb) < 1e-9


def test_zeta_inline_form_and_complex_s(capsys):
    code, out, _ = run(capsys, "zeta", "--form", '{"dim": 2, "matrix": [[2, 0.5], [0.5, 1]]}', "--re", "0.3", "--im", "2", "--format", "json")
    assert code == 0
    (rec,) = json.loads(out)
    assert rec["im_s"] == 2 and rec["abs_err"] > 0


@pytest.mark.parametrize("method", ["theta", "bessel", "closed"])
def test_zeta_methods_agree(capsys, method):
    _, out, _ = run(capsys, "zeta", "--cubic", "-d", "4", "--re", "0.3", "--im", "1.5", "--method", method)
    r = rows(out)[0]
    _, ref, _ = run(capsys, "zeta", "--cubic", "-d", "4", "--re", "0.3", "--im", "1.5", "--method", "epstein")
    q = rows(ref)[0]
    z = complex(float(r["re_Z"]), float(r["im_Z"]))
    w = complex(float(q["re_Z"]), float(q["im_Z"]))
    assert abs(z - w) < 1e-9 * abs(w)


def test_zeta_boundary_method(capsys):
    _, out, _ = run(capsys, "zeta", "--cubic", "-d", "2", "--method", "boundary")
    assert float(rows(out)[0]["re_Z"]) == pytest.approx(-1, abs=1e-14)


def test_zeta_pole_is_numeric_failure(capsys):
    code, _, err = run(capsys, "zeta", "--cubic", "-d", "2", "--re", "1")
    assert code == 3 and "PoleError" in err


@pytest.mark.parametrize(
    "argv",
    [
        ("zeta", "--re", "1"),
        ("zeta", "--cubic", "-d", "2"),
        ("zeta", "--form", "/nonexistent/Q.json", "--re", "1"),
        ("zeta", "--form", '{"matrix": [[1, 2], [2, 1]]}', "--re", "0.3"),
        ("zeta", "--cubic", "-d", "2", "--re-min", "0", "--re-max", "1", "--steps", "0"),
        ("zeta", "--cubic", "-d", "2", "--bogus"),
    ],
)
def test_config_errors_exit_two(capsys, argv):
    assert run(capsys, *argv)[0] == 2


# ---------------------------------------------------------------- sigma


def test_sigma_cubic_three(capsys):
    code, out, _ = run(capsys, "sigma", "--cubic", "-d", "3", "-s", "1", "--N-list", "20,30,40,50,60,70,80")
    assert code == 0
    rec = json.loads(out)
    assert abs(rec["value"]["re"] - (-8.913632917585153)) < 1e-3
    assert rec["abs_err_estimate"] > 0 and rec["N_sequence"][0] == 20


def test_sigma_binary_zero(capsys):
    _, out, _ = run(capsys, "sigma", "--cubic", "-d", "2", "-s", "0")
    assert abs(json.loads(out)["value"]["re"] + 1) < 1e-12


def test_sigma_pball_below_strip_exits_four(capsys):
    code, _, err = run(capsys, "sigma", "--cubic", "-d", "2", "--scheme", "pball", "--p", "2", "-s", "0.2")
    assert code == 4 and "outside" in err


def test_sigma_pball_inside_strip(capsys):
    code, out, _ = run(capsys, "sigma", "--cubic", "-d", "2", "--scheme", "pball", "--p", "2", "-s", "0.6", "--N-max", "200")
    assert code == 0
    rec = json.loads(out)
    assert rec["model"] == "window_mean" and rec["p"] == 2


def test_sigma_csv_rows_carry_errors(capsys):
    code, out, _ = run(capsys, "sigma", "--cubic", "-d", "3", "-s", "1", "--format", "csv", "--N-list", "20,30,40,50")
    assert code == 0
    data = rows(out)
    assert [int(r["N"]) for r in data] == [20, 30, 40, 50]
    assert all(float(r["abs_err"]) > 0 for r in data)


def test_sigma_cube_outside_strip(capsys):
    assert run(capsys, "sigma", "--cubic", "-d", "3", "-s", "1.7")[0] == 4


# ---------------------------------------------------------------- jump


def test_jump_cubic_three(capsys):
    code, out, _ = run(capsys, "jump", "--cubic", "-d", "3")
    assert code == 0
    rec = json.loads(out)
    assert abs(rec["jump"] - math.pi / 6) < 5e-3
    assert rec["discrepancy"] < 5e-3
    assert rec["sign"] == "positive"


def test_jump_cubic_six_boundary_value(capsys):
    _, out, _ = run(capsys, "jump", "--cubic", "-d", "6")
    rec = json.loads(out)
    assert abs(rec["sigma_boundary"] - (math.pi**3 / 6 - math.pi**2 / 3 - 8 * G)) < 5e-3


def test_jump_a_p_sign(capsys):
    form = json.dumps({"dim": 3, "matrix": [[0.8, -0.2, -0.2], [-0.2, 0.8, -0.2], [-0.2, -0.2, 0.8]]})
    code, out, _ = run(capsys, "jump", "--form", form)
    assert code == 0
    rec = json.loads(out)
    assert rec["sign"] == "positive" and rec["jump"] > 0
    assert rec["jump_err"] < rec["jump"]


def test_jump_rejects_indefinite(capsys):
    form = json.dumps({"dim": 3, "matrix": [[0.5, -0.5, -0.5], [-0.5, 0.5, -0.5], [-0.5, -0.5, 0.5]]})
    assert run(capsys, "jump", "--form", form)[0] == 2


# ---------------------------------------------------------------- count


def test_count_sup_norm_error_is_exact(capsys):
    code, out, err = run(capsys, "count", "-d", "2", "--p", "inf", "--N-max", "20")
    assert code == 0
    for r in rows(out):
        N = int(float(r["N"]))
        assert int(r["count"]) == (2 * N + 1) ** 2
        assert float(r["error"]) == 4 * N
        assert float(r["abs_err"]) >= 0
    assert err.startswith("lambda_hat=")


@pytest.mark.slow
@pytest.mark.parametrize("d,n,band", [(2, 2048, (0.4, 0.7)), (4, 512, (1.8, 2.2))])
def test_count_lambda_band(capsys, d, n, band):
    _, out, _ = run(capsys, "count", "-d", str(d), "--p", "2", "--N-max", str(n), "--format", "json")
    lam = json.loads(out)["lambda_hat"]
    assert band[0] <= lam <= band[1]


def test_count_json_small_range_has_null_lambda(capsys):
    _, out, _ = run(capsys, "count", "-d", "2", "--p", "2", "--N-max", "4", "--format", "json")
    rec = json.loads(out)
    assert rec["lambda_hat"] is None and len(rec["rows"]) == 4


# ---------------------------------------------------------------- verify and scan


def test_verify_single_check(capsys):
    code, out, _ = run(capsys, "verify", "--only", "cosh-identity")
    rec = json.loads(out)
    assert code == 0 and rec["failures"] == 0
    assert rec["testcases"][0]["value"] < 1e-12
    assert "time" not in rec["testcases"][0]


def test_verify_functional_equation_trials(capsys):
    code, out, _ = run(capsys, "verify", "--only", "functional-equation", "--trials", "25")
    rec = json.loads(out)
    assert code == 0 and rec["testcases"][0]["value"] < 1e-7


def test_verify_list_and_unknown(capsys):
    code, out, _ = run(capsys, "verify", "--list")
    assert code == 0 and "cosh-identity" in out.split()
    assert run(capsys, "verify", "--only", "nope")[0] == 2


def test_verify_timings_flag(capsys):
    _, out, _ = run(capsys, "verify", "--only", "theta-modular", "--timings")
    assert "time" in json.loads(out)["testcases"][0]


@pytest.mark.slow
def test_verify_default_run_passes(capsys):
    code, out, err = run(capsys, "verify")
    assert code == 0, err
    assert json.loads(out)["failures"] == 0


def test_jump_scan(capsys):
    code, out, _ = run(capsys, "jump-scan", "-d", "2", "--trials", "4", "--seed", "3")
    assert code == 0
    data = rows(out)
    assert len(data) == 4
    vals = [abs(float(r["vq_prime"])) for r in data]
    assert vals == sorted(vals)
    assert all(float(r["abs_err"]) >= 0 for r in data)


# ---------------------------------------------------------------- config, output, determinism


def test_config_file_and_flag_precedence(capsys, tmp_path):
    conf = tmp_path / "job.json"
    conf.write_text(json.dumps({"cubic": True, "dim": 2, "re": 0.7, "method": "closed"}))
    _, a, _ = run(capsys, "zeta", "--config", str(conf))
    assert float(rows(a)[0]["re_s"]) == 0.7
    _, b, _ = run(capsys, "zeta", "--config", str(conf), "--re", "0.9")
    assert float(rows(b)[0]["re_s"]) == 0.9


def test_config_rejects_unknown_keys(capsys, tmp_path):
    conf = tmp_path / "job.json"
    conf.write_text(json.dumps({"colour": "blue"}))
    assert run(capsys, "zeta", "--config", str(conf))[0] == 2


def test_config_inline_form_object(capsys, tmp_path):
    conf = tmp_path / "job.json"
    conf.write_text(json.dumps({"form": {"dim": 2, "matrix": [[1, 0], [0, 1]]}, "re": 2.0, "method": "epstein"}))
    _, out, _ = run(capsys, "zeta", "--config", str(conf))
    assert float(rows(out)[0]["re_Z"]) == pytest.approx(4 * 1.6449340668482264 * G, rel=1e-12)


def test_output_file_is_byte_identical(capsys, tmp_path):
    argv = ["zeta", "--form", '{"dim": 3, "matrix": [[2, 0.3, 0], [0.3, 1, 0.1], [0, 0.1, 1.5]]}', "--re-min", "-0.5", "--re-max", "2.2", "--steps", "9"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(argv + ["-o", str(a)]) == 0
    assert main(argv + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(rows(a.read_text())) == 9


def test_verify_output_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["verify", "--only", "gamma-reflection,theta-modular", "-o", str(a)])
    main(["verify", "--only", "gamma-reflection,theta-modular", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_threads_env_validated(capsys, monkeypatch):
    monkeypatch.setenv("WIGNER_THREADS", "four")
    assert run(capsys, "zeta", "--cubic", "-d", "2", "--re", "2")[0] == 2
    monkeypatch.setenv("WIGNER_THREADS", "4")
    assert run(capsys, "zeta", "--cubic", "-d", "2", "--re", "2")[0] == 0


def test_csv_values_round_trip(capsys):
    _, out, _ = run(capsys, "zeta", "--cubic", "-d", "2", "--re", "2", "--method", "closed")
    text = rows(out)[0]["re_Z"]
    assert format(float(text), ".17g") == text
    assert float(text) == pytest.approx(4 * 1.6449340668482264 * G, rel=1e-14)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "wignerlim", "zeta", "--cubic", "-d", "2", "--re", "2"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("re_s,im_s,re_Z,im_Z,abs_err\n")
