import json
import os

import pytest

from rbsim.cli import main


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def small_rbsv_config(seed=11):
    return {
        "protocol": "rbsv",
        "n": 2,
        "lengths": [3, 6, 9, 12],
        "K_m": 6,
        "N_m": 24,
        "shots": 24,
        "mode": "sampled",
        "noise": {"gate": {"kind": "depolarizing", "epsilon": 0.01}},
        "seed": seed,
    }


class TestConfigErrors:
    def test_missing_config_file(self, capsys):
        assert main(["rb", "--config", "/nonexistent.json"]) == 2
        assert "config file not found" in capsys.readouterr().err

    def test_missing_noise_field(self, tmp_path, capsys):
        path = write_config(tmp_path, "bad.json", {"protocol": "rb", "lengths": [1, 2, 3]})
        assert main(["rb", "--config", path]) == 2
        assert "noise" in capsys.readouterr().err

    def test_bad_channel_kind(self, tmp_path, capsys):
        cfg = small_rbsv_config()
        cfg["noise"] = {"gate": {"kind": "warp"}}
        path = write_config(tmp_path, "bad2.json", cfg)
        assert main(["rbsv", "--config", path]) == 2
        assert "noise" in capsys.readouterr().err

    def test_protocol_subcommand_mismatch(self, tmp_path, capsys):
        path = write_config(tmp_path, "mis.json", small_rbsv_config())
        assert main(["rb", "--config", path]) == 2
        assert "protocol" in capsys.readouterr().err

    def test_invalid_json(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["rb", "--config", str(path)]) == 2
        assert "JSON" in capsys.readouterr().err


class TestRuns:
    def test_rbsv_artifacts(self, tmp_path):
        cfg = small_rbsv_config()
        path = write_config(tmp_path, "rbsv.json", cfg)
        out = str(tmp_path / "out")
        assert main(["rbsv", "--config", path, "--out", out]) == 0
        csv = open(os.path.join(out, "rbsv.csv")).read()
        assert csv.splitlines()[0] == "m,F_bar_m,mean_p_acc,mean_R,n_saturated"
        assert len(csv.splitlines()) == 1 + len(cfg["lengths"])
        summary = json.load(open(os.path.join(out, "rbsv_summary.json")))
        assert {"r_rbsv", "A0", "B0", "p", "fit_residual",
                "reproducibility"} <= set(summary)
        assert "r_rb" not in summary
        assert summary["reproducibility"]["seed"] == cfg["seed"]

    def test_rb_artifacts(self, tmp_path):
        cfg = dict(small_rbsv_config(), protocol="rb")
        path = write_config(tmp_path, "rb.json", cfg)
        out = str(tmp_path / "out")
        assert main(["rb", "--config", path, "--out", out]) == 0
        csv = open(os.path.join(out, "rb.csv")).read()
        assert csv.splitlines()[0] == "m,P_m,stderr,K_m,shots"
        summary = json.load(open(os.path.join(out, "rb_summary.json")))
        assert "r_rb" in summary

    def test_compare_has_both_values_and_ratio(self, tmp_path):
        path = write_config(tmp_path, "cmp.json", small_rbsv_config())
        out = str(tmp_path / "out")
        assert main(["compare", "--config", path, "--out", out]) == 0
        summary = json.load(open(os.path.join(out, "compare_summary.json")))
        assert {"r_rb", "r_rbsv", "ratio_rbsv_over_rb"} <= set(summary)

    def test_exact_flag_and_seed_override(self, tmp_path):
        cfg = small_rbsv_config()
        path = write_config(tmp_path, "rbsv.json", cfg)
        out1 = str(tmp_path / "a")
        out2 = str(tmp_path / "b")
        assert main(["rbsv", "--config", path, "--out", out1, "--exact", "--seed", "99"]) == 0
        assert main(["rbsv", "--config", path, "--out", out2, "--exact", "--seed", "99"]) == 0
        assert open(os.path.join(out1, "rbsv.csv")).read() == \
            open(os.path.join(out2, "rbsv.csv")).read()
        summary = json.load(open(os.path.join(out1, "rbsv_summary.json")))
        assert summary["reproducibility"]["seed"] == 99

    def test_determinism_bit_identical_csv(self, tmp_path):
        path = write_config(tmp_path, "rbsv.json", small_rbsv_config())
        outs = []
        for sub in ("x", "y"):
            out = str(tmp_path / sub)
            assert main(["rbsv", "--config", path, "--out", out, "--threads", "3"]) == 0
            outs.append(open(os.path.join(out, "rbsv.csv"), "rb").read())
        assert outs[0] == outs[1]

    def test_irbgs_run(self, tmp_path):
        cfg = {
            "protocol": "irbgs",
            "lengths": [2, 5, 8],
            "K_m": 2,
            "noise": {"gate": {"kind": "depolarizing", "epsilon": 0.002}},
            "noise_n": {"kind": "depolarizing", "epsilon": 0.001},
            "recipe": "phase-on-j",
            "seed": 3,
        }
        path = write_config(tmp_path, "irbgs.json", cfg)
        out = str(tmp_path / "out")
        assert main(["irbgs", "--config", path, "--out", out]) == 0
        summary = json.load(open(os.path.join(out, "irbgs_summary.json")))
        assert {"p", "p_bar_c", "r_c_est", "r_n_est", "error_bound",
                "noise_class"} <= set(summary)
        assert os.path.exists(os.path.join(out, "irbgs_baseline.csv"))
        assert os.path.exists(os.path.join(out, "irbgs_interleaved.csv"))

    def test_plan_subcommand(self, tmp_path, capsys):
        cfg = {"t": 0.01, "delta": 0.05, "lam": 0.02, "upsilon": 0.005,
               "q": 20, "n": 2, "r_copies": 10, "p_meas": 0.001}
        path = write_config(tmp_path, "plan.json", cfg)
        out = str(tmp_path / "out")
        assert main(["plan", "--config", path, "--out", out]) == 0
        text = capsys.readouterr().out
        assert "N_m" in text and "K_m" in text
        values = json.load(open(os.path.join(out, "plan.json")))
        assert values["N_m"] == 10000
        assert values["K_m"] == 182

    def test_plan_rejects_unknown_fields(self, tmp_path, capsys):
        path = write_config(tmp_path, "plan.json", {"bogus": 1})
        assert main(["plan", "--config", path]) == 2

    def test_verify_synthesis_bundled(self, capsys):
        assert main(["verify-synthesis"]) == 0
        out = capsys.readouterr().out
        assert out.count("pass") == 7

    def test_verify_synthesis_failure_exit_code(self, tmp_path):
        from rbsim.irbgs import builtin_recipes

        base = builtin_recipes()[0].to_json()
        base["gates"] = base["gates"][:-1]
        path = write_config(tmp_path, "broken.json", [base])
        assert main(["verify-synthesis", "--recipes", path]) == 1


def test_degenerate_fit_exits_zero_with_flag(tmp_path):
    cfg = small_rbsv_config()
    cfg["noise"] = {"gate": {"kind": "ideal"}}
    cfg["mode"] = "exact"
    path = write_config(tmp_path, "noiseless.json", cfg)
    out = str(tmp_path / "out")
    assert main(["rbsv", "--config", path, "--out", out]) == 0
    summary = json.load(open(os.path.join(out, "rbsv_summary.json")))
    assert summary["degenerate"] is True
    assert summary["r_rbsv"] == 0.0


def test_rbsv_with_pauli_channel_config(tmp_path):
    cfg = small_rbsv_config()
    cfg["noise"] = {"gate": {"kind": "pauli",
                             "probabilities": {"II": 0.98, "XI": 0.01, "ZZ": 0.01}}}
    path = write_config(tmp_path, "pauli.json", cfg)
    out = str(tmp_path / "out")
    assert main(["rbsv", "--config", path, "--out", out]) == 0
    summary = json.load(open(os.path.join(out, "rbsv_summary.json")))
    assert 0.0 <= summary["p"] <= 1.0
