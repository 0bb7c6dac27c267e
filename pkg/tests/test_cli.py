"""Experiment CLI tests: determinism, manifests, validation, exit codes."""

import json
import math

import pytest

from shrinktarget.cli import (
    ExperimentConfig,
    main,
    parse_rate,
    parse_system,
    parse_t_points,
    run,
    validate,
)
from shrinktarget.errors import ConfigInvalid
from shrinktarget.orbits import DiagonalTorusSystem, IntegerMatrixSystem


class TestParsing:
    def test_system_specs(self):
        s = parse_system("diag:2,3")
        assert isinstance(s, DiagonalTorusSystem) and s.betas == (2, 3)
        m = parse_system("matrix:2,1;1,1")
        assert isinstance(m, IntegerMatrixSystem)
        g = parse_system("diag:g,-g")
        assert g.moduli == pytest.approx([1.618033988749895] * 2)

    def test_rate_specs(self):
        assert parse_rate("exp:0.7").psi(1) == pytest.approx(math.exp(-0.7))
        assert parse_rate("pow:0.5,0.25").psi(16) == pytest.approx(0.25)
        assert parse_rate("superexp").psi(2) == pytest.approx(math.exp(-4))
        assert parse_rate("table:0.5,0.25:hold").psi(7) == 0.25

    def test_t_points(self):
        acc = parse_t_points("0.5,1.2;0.3,inf")
        assert acc.points == ((0.5, 1.2), (0.3, math.inf))


class TestConfig:
    def test_round_trip(self):
        cfg = ExperimentConfig("count", {"system": "diag:2,3", "seed": 7})
        again = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
        assert again == cfg
        assert again.config_hash == cfg.config_hash

    def test_hash_changes_with_params(self):
        a = ExperimentConfig("count", {"seed": 7})
        b = ExperimentConfig("count", {"seed": 8})
        assert a.config_hash != b.config_hash


class TestValidate:
    def test_seed_mandatory_for_stochastic(self):
        cfg = ExperimentConfig("count", {"system": "diag:2,3", "rate": "pow:0.5,0.25",
                                         "center": "0,0", "steps": 10})
        assert any(d.startswith("error:") and "seed" in d for d in validate(cfg))

    def test_degenerate_eigenvalue_flagged(self):
        cfg = ExperimentConfig("count", {"system": "diag:0.5,3", "seed": 1,
                                         "rate": "pow:0.5,0.25", "center": "0,0",
                                         "steps": 10})
        msgs = validate(cfg)
        assert any("reduction" in d for d in msgs)

    def test_markov_slope_note(self):
        cfg = ExperimentConfig("markov", {"beta": 5})
        assert any("modulus > 8" in d for d in validate(cfg))

    def test_superexponential_routed_to_unbounded(self):
        cfg = ExperimentConfig("dimension", {"method": "rect", "rate": "superexp",
                                             "t_points": "0.5,inf", "moduli": ["2", "3"]})
        msgs = validate(cfg)
        assert any("unbounded" in d for d in msgs)

    def test_matrix_eigenvalue_hypothesis(self):
        cfg = ExperimentConfig("count", {"system": "matrix:1,1;0,2", "seed": 1,
                                         "rate": "pow:0.5,0.25", "center": "0,0",
                                         "steps": 10})
        msgs = validate(cfg)
        assert any("eigenvalue moduli > 1" in d for d in msgs)


class TestRun:
    def test_count_outputs_and_manifest(self, tmp_path):
        cfg = ExperimentConfig("count", {
            "system": "diag:2,3", "shape": "ball", "center": [0, 0],
            "rate": "pow:0.5,0.25", "samples": 3, "steps": 2000, "seed": 5,
            "checkpoints": [1000, 2000],
        })
        manifest = run(cfg, tmp_path)
        data = (tmp_path / "count.csv").read_text().splitlines()
        assert data[0] == "sample_id,N,R_lo,R_hi,Phi,e"
        assert len(data) == 1 + 3 * 2
        import hashlib
        for name, digest in manifest.outputs.items():
            assert hashlib.sha256((tmp_path / name).read_bytes()).hexdigest() == digest

    def test_byte_identical_across_jobs(self, tmp_path):
        cfg = ExperimentConfig("count", {
            "system": "diag:2,3", "shape": "ball", "center": [0, 0],
            "rate": "pow:0.5,0.25", "samples": 4, "steps": 3000, "seed": 9,
        })
        run(cfg, tmp_path / "a", jobs=1)
        run(cfg, tmp_path / "b", jobs=2)
        assert (tmp_path / "a/count.csv").read_bytes() == (tmp_path / "b/count.csv").read_bytes()

    def test_fail_fast_on_invalid(self, tmp_path):
        cfg = ExperimentConfig("count", {"system": "diag:2,3", "rate": "pow:0.5,0.25",
                                         "center": [0, 0], "steps": 10})
        with pytest.raises(ConfigInvalid):
            run(cfg, tmp_path)

    def test_manifest_only_skips_outputs(self, tmp_path):
        cfg = ExperimentConfig("dimension", {"method": "ball", "moduli": ["2", "3"],
                                             "lam": 0.0})
        manifest = run(cfg, tmp_path, manifest_only=True)
        assert manifest.outputs == {}
        assert not (tmp_path / "dimension.json").exists()


class TestMainExitCodes:
    def test_success(self, tmp_path):
        code = main(["dimension", "--method", "ball", "--moduli", "2,3",
                     "--lam", "0", "--out", str(tmp_path)])
        assert code == 0
        payload = json.loads((tmp_path / "dimension.json").read_text())
        assert payload["value"] == 2.0

    def test_config_invalid_is_two(self, tmp_path):
        code = main(["count", "--system", "diag:2,3", "--rate", "pow:0.5,0.25",
                     "--center", "0,0", "--steps", "10", "--out", str(tmp_path)])
        assert code == 2

    def test_precondition_is_three(self, tmp_path):
        code = main(["markov", "--beta", "5", "--out", str(tmp_path)])
        assert code == 3

    def test_config_file_round_trip(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({
            "command": "measure",
            "params": {"beta": "-g", "a": 0.0, "b": 0.5},
        }))
        code = main(["measure", "--beta", "2", "--config", str(cfg_path),
                     "--out", str(tmp_path)])
        assert code == 0
        # the flag override wins over the config file parameter
        payload = json.loads((tmp_path / "measure.json").read_text())
        assert payload["beta"] == 2.0

    def test_mixing_outputs(self, tmp_path):
        code = main(["mixing", "--beta", "2", "--set-e", "0,0.5", "--set-f", "0,0.25",
                     "--lags", "1:6", "--seed", "3", "--method", "auto",
                     "--out", str(tmp_path)])
        assert code == 0
        lines = (tmp_path / "mixing.csv").read_text().splitlines()
        assert lines[0] == "n,phi_hat,stderr"
        assert all(line.split(",")[1] == "0.0" for line in lines[1:])

    def test_volume_closed_form(self, tmp_path):
        code = main(["volume", "--shape", "hyperboloid", "--d", "2",
                     "--delta", "0.125", "--out", str(tmp_path)])
        assert code == 0
        line = (tmp_path / "volume.csv").read_text().splitlines()[1]
        assert float(line.split(",")[1]) == pytest.approx(0.5 * (1 + math.log(2)))

    def test_support_json(self, tmp_path):
        code = main(["support", "--beta=-1.3", "--out", str(tmp_path)])
        assert code == 0
        payload = json.loads((tmp_path / "support.json").read_text())
        assert len(payload["intervals"]) >= 2

    def test_orbit_trace_keeps_precision(self, tmp_path):
        code = main(["orbit", "--system", "diag:2,3", "--x", "0.3,0.7",
                     "--steps", "200", "--stride", "50", "--out", str(tmp_path)])
        assert code == 0
        lines = (tmp_path / "orbit.csv").read_text().splitlines()[1:]
        last = [l for l in lines if l.startswith("200,")]
        assert len(last) == 2
        for row in last:
            _, _, lo, hi = row.split(",")
            assert 0 <= float(lo) <= float(hi) < 1
            assert float(hi) - float(lo) < 1e-9

    def test_precision_cap_env_override(self, tmp_path, monkeypatch):
        from shrinktarget.orbits import DiagonalTorusSystem, required_precision
        from shrinktarget.errors import BudgetTooLarge
        monkeypatch.setenv("SHRINKTARGET_PRECISION_CAP", "100")
        with pytest.raises(BudgetTooLarge):
            required_precision(DiagonalTorusSystem((2,)), 100)
        monkeypatch.setenv("SHRINKTARGET_PRECISION_CAP", str(1 << 24))
        assert required_precision(DiagonalTorusSystem((2, 3)), 10 ** 6) == 1585027

    def test_manifest_records_wall_time(self, tmp_path):
        cfg = ExperimentConfig("dimension", {"method": "onedim",
                                             "beta_modulus": 2.0, "lam": 0.5})
        manifest = run(cfg, tmp_path)
        assert manifest.wall_time_seconds >= 0.0
        payload = json.loads((tmp_path / "dimension_manifest.json").read_text())
        assert "wall_time_seconds" in payload and "tolerances" in payload
