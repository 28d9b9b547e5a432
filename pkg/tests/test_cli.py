import json
import os

import pytest

from fpplab.cli import main
from fpplab.expcli import (ConfigError, RunError, config_hash, run, sweep,
                           validate_config)


def shape_cfg(seed=1, trials=2):
    return {"kind": "shape", "seed": seed, "trials": trials,
            "params": {"dist": {"atoms": [[1.0, 1.0]]},
                       "directions": 5, "n": 50}}


def oriented_cfg(p_values, seed=2, trials=30, T=50):
    return {"kind": "oriented", "seed": seed, "trials": trials,
            "params": {"p_values": p_values, "T": T}}


class TestValidation:
    def test_valid_config_passes(self):
        validate_config(shape_cfg())

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            validate_config({"kind": "frobnicate", "seed": 0, "params": {}})

    def test_missing_params(self):
        with pytest.raises(ConfigError):
            validate_config({"kind": "shape", "seed": 0,
                             "params": {"directions": 5}})

    def test_missing_seed(self):
        cfg = shape_cfg()
        del cfg["seed"]
        with pytest.raises(ConfigError):
            validate_config(cfg)

    def test_hash_key_order_invariant(self):
        a = {"kind": "shape", "seed": 1, "params": {"n": 50,
             "directions": 5, "dist": {"atoms": [[1.0, 1.0]]}}}
        b = {"params": {"dist": {"atoms": [[1.0, 1.0]]}, "directions": 5,
             "n": 50}, "seed": 1, "kind": "shape"}
        assert config_hash(a) == config_hash(b)


class TestRun:
    def test_shape_run_outputs(self, tmp_path, capsys):
        art = run(shape_cfg(), out_root=str(tmp_path))
        line = capsys.readouterr().out.strip()
        summary = json.loads(line)
        assert summary["kind"] == "shape"
        for p in art.payloads + art.figures:
            assert os.path.exists(p)
        with open(art.payloads[0]) as f:
            payload = json.load(f)
        assert len(payload["m_hat"]) == 5

    def test_rerun_byte_identical(self, tmp_path, capsys):
        a = run(shape_cfg(), out_root=str(tmp_path / "a"), echo=False)
        b = run(shape_cfg(), out_root=str(tmp_path / "b"), echo=False)
        for pa, pb in zip(a.payloads, b.payloads):
            assert open(pa, "rb").read() == open(pb, "rb").read()

    def test_thread_hint_does_not_change_bytes(self, tmp_path):
        cfg = oriented_cfg([0.7, 0.8, 0.9])
        a = run(cfg, out_root=str(tmp_path / "a"), threads=1, echo=False)
        b = run(cfg, out_root=str(tmp_path / "b"), threads=4, echo=False)
        for pa, pb in zip(a.payloads, b.payloads):
            assert open(pa, "rb").read() == open(pb, "rb").read()

    def test_construct_emits_stage_files(self, tmp_path):
        cfg = {"kind": "construct", "seed": 0,
               "params": {"base": {"atoms": [[1.0, 0.9], [3.0, 0.1]]},
                          "schedule": {"p0": 0.9, "p_seq": [0.8, 0.72],
                                       "y_seq": [2.0, 1.5]}}}
        art = run(cfg, out_root=str(tmp_path), echo=False)
        names = [os.path.basename(p) for p in art.payloads]
        assert names[:3] == ["mu_0.json", "mu_1.json", "mu_2.json"]

    def test_runtime_error_propagates(self, tmp_path):
        cfg = oriented_cfg([0.3], T=80)  # subcritical: every run dies
        with pytest.raises(RunError):
            run(cfg, out_root=str(tmp_path), echo=False)


class TestSweep:
    def test_isolation(self, tmp_path):
        cfgs = [oriented_cfg([0.7]), oriented_cfg([0.3], T=80),
                oriented_cfg([0.9])]
        arts = sweep(cfgs, out_root=str(tmp_path), echo=False)
        assert len(arts) == 3
        assert arts[0].error is None
        assert arts[1].error is not None
        assert arts[2].error is None
        merged = os.path.join(str(tmp_path), "sweep-oriented.csv")
        lines = open(merged).read().splitlines()
        assert len(lines) == 4  # header + 3 rows

    def test_empty_rejected(self):
        with pytest.raises(ConfigError):
            sweep([])

    def test_heterogeneous_rejected(self):
        with pytest.raises(ConfigError):
            sweep([shape_cfg(), oriented_cfg([0.7])])


class TestMain:
    def write(self, tmp_path, cfg, name="c.json"):
        p = tmp_path / name
        p.write_text(json.dumps(cfg))
        return str(p)

    def test_success_exit_zero(self, tmp_path, capsys):
        path = self.write(tmp_path, shape_cfg())
        rc = main(["shape", "--config", path, "--out", str(tmp_path / "o")])
        assert rc == 0
        out = capsys.readouterr().out
        assert json.loads(out.strip())["kind"] == "shape"

    def test_config_error_exit_two(self, tmp_path, capsys):
        path = self.write(tmp_path, {"kind": "shape", "seed": 0,
                                     "params": {}})
        assert main(["shape", "--config", path]) == 2

    def test_kind_mismatch_exit_two(self, tmp_path):
        path = self.write(tmp_path, shape_cfg())
        assert main(["oriented", "--config", path]) == 2

    def test_runtime_error_exit_three(self, tmp_path):
        path = self.write(tmp_path, oriented_cfg([0.3], T=80))
        assert main(["oriented", "--config", path,
                     "--out", str(tmp_path / "o")]) == 3

    def test_seed_override_changes_hash(self, tmp_path, capsys):
        path = self.write(tmp_path, shape_cfg())
        main(["shape", "--config", path, "--out", str(tmp_path / "o")])
        h1 = json.loads(capsys.readouterr().out.strip())["hash"]
        main(["shape", "--config", path, "--seed", "99",
              "--out", str(tmp_path / "o")])
        h2 = json.loads(capsys.readouterr().out.strip())["hash"]
        assert h1 != h2

    def test_env_output_root(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("FPPLAB_OUT", str(tmp_path / "envout"))
        path = self.write(tmp_path, shape_cfg())
        assert main(["shape", "--config", path]) == 0
        out = json.loads(capsys.readouterr().out.strip())
        assert out["out"].startswith(str(tmp_path / "envout"))
