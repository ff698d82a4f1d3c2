import csv
import io

import numpy as np
import pytest

from z2renyi import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_spectrum_reference_point(capsys):
    code, out, _ = run(capsys, "spectrum")
    assert code == 0
    rows = table(out)
    assert [int(r["R"]) for r in rows] == [1, 2, 3]
    rp = np.array([float(r["rho1_prime"]) for r in rows])
    assert (rp.max() - rp.min()) / rp.max() <= 1e-10
    header = [l for l in out.splitlines() if l.startswith("# rho1_single")][0]
    single = float(header.split()[1].split("=")[1])
    assert float(rows[0]["rho1"]) == pytest.approx(single**2, rel=1e-12)


def test_spectrum_product_state(capsys):
    code, out, _ = run(capsys, "spectrum", "--alpha", "1", "--beta", "0", "--delta", "0")
    rows = table(out)
    assert all(float(r["rho1"]) == pytest.approx(1) and float(r["rho1_prime"]) == pytest.approx(1) for r in rows)


def test_entropy_both_methods_agree(capsys):
    code, out, _ = run(capsys, "entropy", "--R2", "15")
    rows = {r["method"]: float(r["S"]) for r in table(out)}
    assert code == 0 and abs(rows["finite"] - rows["thermodynamic"]) <= 1e-6


def test_fig5_small_grid(capsys, tmp_path):
    out = tmp_path / "fig5.csv"
    code, _, _ = run(capsys, "fig5", "--R2-min", "5", "--R2-max", "8", "--out", str(out))
    text = out.read_text()
    rows = table(text)
    assert code == 0 and len(rows) == 12
    assert max(float(r["abs_diff"]) for r in rows) <= 1e-6
    assert "# summary max_abs_diff=" in text


def test_fig5_beta_to_zero_flattens(capsys):
    code, out, _ = run(capsys, "fig5", "--beta", "1e-8", "--R1-set", "2", "--R2-min", "5", "--R2-max", "9")
    S = np.array([float(r["S2_finite"]) for r in table(out)])
    assert np.ptp(S) <= 1e-10


def test_fig6_shape_and_second_difference(capsys):
    code, out, _ = run(capsys, "fig6", "--gamma-set", "0", "--delta-min", "0.98", "--delta-max", "1.02",
                       "--delta-step", "0.01")
    rows = table(out)
    assert code == 0 and len(rows) == 5
    assert rows[0]["d2"] == "" and rows[-1]["d2"] == ""
    S = [float(r["S2"]) for r in rows]
    assert float(rows[2]["d2"]) == pytest.approx(S[1] - 2 * S[2] + S[3], abs=1e-15)


def test_fig7_point_matches_fig5(capsys):
    code, out, _ = run(capsys, "fig7", "--beta-set", "0.1", "--gamma-min", "0", "--gamma-max", "0",
                       "--delta-min", "0.95", "--delta-max", "0.95", "--N2", "100", "--R1", "2", "--R2", "20")
    s7 = float(table(out)[0]["S2"])
    code, out, _ = run(capsys, "fig5", "--R1-set", "2", "--R2-min", "20", "--R2-max", "20")
    assert s7 == float(table(out)[0]["S2_finite"])


def test_config_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nalpha = 1\nbeta = 0   # zero\ngamma = 0\ndelta = 0.95\nN1 = 2\nN2 = 2\nR1 = 1\nR2 = 1\n")
    code, out, _ = run(capsys, "entropy", "--config", str(cfg), "--method", "finite")
    ghz = float(table(out)[0]["S"])
    assert ghz == pytest.approx(0.653021, abs=1e-6)
    code, out, _ = run(capsys, "entropy", "--config", str(cfg), "--method", "finite", "--delta", "0")
    assert float(table(out)[0]["S"]) == pytest.approx(0, abs=1e-14)


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    code, _, err = run(capsys, "entropy", "--config", str(cfg))
    assert code == 3 and "unknown config keys" in err


def test_exit_codes(capsys):
    assert run(capsys, "entropy", "--R1", "9")[0] == 3
    assert run(capsys, "entropy", "--alpha", "-1")[0] == 3
    for bad in (["entropy", "--method", "magic"], ["nonsense"]):
        with pytest.raises(SystemExit) as info:
            cli.main(bad)
        assert info.value.code == 3
    # near-degenerate sectors: the closed form refuses
    assert run(capsys, "entropy", "--beta", "0", "--delta", "1.0001", "--method", "thermodynamic")[0] == 1


def test_output_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["fig6", "--gamma-set", "0,1", "--delta-min", "0.9", "--delta-max", "1.1", "--delta-step", "0.05"]
    run(capsys, *args, "--out", str(a))
    run(capsys, *args, "--out", str(b), "--threads", "2")
    assert a.read_bytes() == b.read_bytes()


def test_seventeen_digits():
    assert cli.fmt(0.1) == "0.10000000000000001"
    assert float(cli.fmt(np.pi)) == np.pi


def test_mps_demo_and_consistency(capsys):
    code, out, _ = run(capsys, "mps-demo", "--chi", "3", "--N", "7", "--start", "2", "--L", "3", "--seed", "5")
    assert code == 0 and float(table(out)[0]["abs_diff"]) <= 1e-12
    code, out, _ = run(capsys, "consistency", "--gamma", "0.4", "--N2", "4", "--R2", "2")
    assert code == 0 and float(table(out)[0]["rel_diff"]) <= 1e-10


def test_oracle_verify(capsys):
    code, out, _ = run(capsys, "oracle-verify", "--N1", "3", "--N2", "2", "--R1", "2", "--draws", "3", "--seed", "1")
    rows = table(out)
    assert code == 0 and len(rows) == 4
    assert max(float(r["rel_diff"]) for r in rows) <= 1e-10


def test_verify_clean_subset(capsys):
    code, out, _ = run(capsys, "verify", "--only", "1,4,10")
    assert code == 0 and all(r["status"] == "pass" for r in table(out))


def test_verify_negative_control_kappa(capsys):
    code, out, _ = run(capsys, "verify", "--only", "1", "--inject-kappa", "0.1")
    rows = table(out)
    assert code == 2 and rows[0]["status"] == "fail"
    assert float(rows[1]["value"]) == pytest.approx(0.1, abs=1e-12)


def test_verify_negative_control_boundary(capsys):
    code, out, _ = run(capsys, "verify", "--only", "3", "--inject-x")
    assert code == 2 and table(out)[0]["status"] == "fail"
