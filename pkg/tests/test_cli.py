import csv
import io
import json

import pytest

from ilz.cli import run


def _run(capsys, argv):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_field_info_table(capsys):
    code, out, _ = _run(capsys, ["field-info", "15"])
    assert code == 0
    assert "1265625" in out and "8" in out


def test_field_info_json(capsys):
    code, out, _ = _run(capsys, ["field-info", "15", "--format", "json"])
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == 1 and doc["command"] == "field-info"
    row = doc["rows"][0]
    assert (row["d"], row["r2"], row["abs_disc"]) == (8, 4, 1265625)


def test_global_flags_before_subcommand(capsys):
    code, out, _ = _run(capsys, ["--format", "csv", "field-info", "5"])
    assert code == 0 and out.startswith("n,")


def test_primorial_csv(capsys):
    code, out, _ = _run(capsys, ["primorial-table", "--kmax", "5", "--format", "csv"])
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][:4] == ["k", "n", "phi", "n_over_phi"]
    assert rows[-1][:4] == ["5", "2310", "480", "4.8125"]


def test_hecke_check_json(capsys):
    code, out, _ = _run(capsys, ["hecke-check", "8", "--s", "2", "--samples", "2000", "--seed", "7", "--format", "json"])
    assert code == 0
    row = json.loads(out)["rows"][0]
    for key in ("lhs_mean", "lhs_stderr", "rhs", "z_score"):
        assert key in row
    assert abs(row["z_score"]) < 3


def test_zeta_complex(capsys):
    code, out, _ = _run(capsys, ["zeta", "4", "--s", "0.5,14", "--format", "json"])
    assert code == 0
    v = json.loads(out)["rows"][0]["zeta_K"]
    assert set(v) == {"re", "im"}


def test_epstein_gram_file(capsys, tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("2\n1 0\n0 1\n")
    code, out, _ = _run(capsys, ["epstein", "--gram", str(f), "--s", "4", "--format", "json"])
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["continued"]["re"] == pytest.approx(6.0268120396919, rel=1e-11)
    assert abs(row["direct"]["re"] - row["continued"]["re"]) <= row["direct_tail_error_bound"] + 1e-9


def test_epstein_bad_gram_file(capsys, tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("2\n1 0\n")
    code, _, err = _run(capsys, ["epstein", "--gram", str(f), "--s", "4"])
    assert code == 1 and "DimensionMismatch" in err


def test_error_exit_codes(capsys):
    code, _, err = _run(capsys, ["field-info", "6"])
    assert code == 1 and err.startswith("NotNormalized")
    code, _, err = _run(capsys, ["error-term", "5", "--volume", "1"])
    assert code == 1 and "InsufficientDecay" in err
    code, _, _ = _run(capsys, ["no-such-command"])
    assert code == 2
    code, _, _ = _run(capsys, ["primorial-table"])
    assert code == 2
    code, _, err = _run(capsys, ["primorial-table", "--kmax", "16"])
    assert code == 1 and "Overflow" in err


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_output_independent_of_threads(capsys, fmt):
    base = ["mean-count", "12", "--volume", "24", "--samples", "3000", "--seed", "5", "--format", fmt]
    _, a, _ = _run(capsys, base + ["--threads", "1"])
    _, b, _ = _run(capsys, base + ["--threads", "4"])
    assert a == b


def test_out_file(capsys, tmp_path):
    f = tmp_path / "o.json"
    code, out, _ = _run(capsys, ["stark", "16", "--format", "json", "--out", str(f)])
    assert code == 0 and out == ""
    row = json.loads(f.read_text())["rows"][0]
    assert row["holds"] is True


def test_gamma_bound_small_grid(capsys):
    code, out, _ = _run(capsys, ["gamma-bound", "--rmax", "8", "--tmax", "10", "--format", "json"])
    doc = json.loads(out)
    assert code == 0 and doc["meta"]["C"] > 0
    assert all(r["bound_holds"] for r in doc["rows"])
    assert all(r["closed_vs_loggamma"] < 1e-9 for r in doc["rows"])


def test_subconvexity_profile_csv(capsys):
    code, out, _ = _run(capsys, ["subconvexity-profile", "5", "--tmax", "5", "--format", "csv"])
    assert code == 0 and len(out.strip().splitlines()) == 7


def test_error_term_cli(capsys):
    code, out, _ = _run(capsys, ["error-term", "16", "--volume", "16", "--format", "json"])
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["tail_bound_heuristic"] is True and abs(row["imag_part"]) < 1e-8
