import json
import os
import stat
import subprocess
import sys

import numpy as np
import pytest

from povm_shadows.cli import main
from povm_shadows.experiments import (
    config_hash,
    family_from_spec,
    operator_from_spec,
    povm_from_spec,
    run_fig3,
    run_fig4,
    run_simulate,
)

FAST_ANNEAL = {"t_min": 1e-2, "gamma": 0.9, "n_steps": 40, "restarts": 2}


def read_csv(path):
    meta = {}
    rows = []
    header = None
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            key, value = line[2:].split("=", 1)
            meta[key] = value
        elif header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    return meta, header, rows


class TestSpecs:
    def test_named_operator(self):
        assert np.allclose(operator_from_spec("sigma_x"), [[0, 1], [1, 0]])

    def test_matrix_operator(self):
        spec = {"matrix": [[[0.0, 0.0], [0.0, -1.0]], [[0.0, 1.0], [0.0, 0.0]]]}
        assert np.allclose(operator_from_spec(spec), [[0, -1j], [1j, 0]])

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown operator"):
            operator_from_spec("sigma_w")

    def test_haar_family_seeded(self):
        a = family_from_spec({"haar_projectors": 5}, seed=3)
        b = family_from_spec({"haar_projectors": 5}, seed=3)
        assert all(np.allclose(x, y) for x, y in zip(a, b))

    def test_povm_specs(self):
        assert povm_from_spec("pauli6").n_effects == 6
        assert povm_from_spec({"kind": "random_n", "n": 5, "seed": 1}).n_effects == 5
        dense = povm_from_spec("tetrahedral")
        again = povm_from_spec(
            {"dim": 2, "effects": [[[[z.real, z.imag] for z in row] for row in e]
                                   for e in dense.effects]}
        )
        for a, b in zip(dense.effects, again.effects):
            assert np.allclose(a, b)


class TestRunners:
    def test_fig3_small_grid(self, tmp_path):
        params = {"family_sizes": [1, 3], "n_values": [4], "anneal": FAST_ANNEAL}
        path = run_fig3(params, seed=1, out_dir=tmp_path)
        meta, header, rows = read_csv(path)
        assert header == ["n_observables", "series", "kappa_sq"]
        assert len(rows) == 2
        assert meta["seed"] == "1"
        assert meta["version"]

    def test_fig4_contains_pum_reference(self, tmp_path):
        params = {"qubit_counts": [1, 2], "n_values": [4]}
        path = run_fig4(params, seed=1, out_dir=tmp_path)
        _, header, rows = read_csv(path)
        pum = [r for r in rows if r[1] == "PUM"]
        assert len(pum) == 2
        assert all(float(r[2]) == 6.0 for r in pum)

    def test_rerun_byte_identical(self, tmp_path):
        params = {"qubit_counts": [1], "n_values": [4]}
        path = run_fig4(params, seed=9, out_dir=tmp_path)
        first = path.read_bytes()
        path = run_fig4(params, seed=9, out_dir=tmp_path)
        assert path.read_bytes() == first

    def test_simulate_runner(self, tmp_path):
        params = {
            "channel": {"kind": "depolarizing", "p": 0.5},
            "povm": "pauli6",
            "states": ["ket0_proj"],
            "observables": ["sigma_z"],
            "epsilon": 0.25,
            "delta": 0.2,
        }
        path = run_simulate(params, seed=2, out_dir=tmp_path)
        payload = json.loads(path.read_text())
        assert payload["truths"] == [[0.5]]
        assert payload["within_epsilon"] is True
        assert payload["meta"]["seed"] == 2

    def test_config_hash_stable(self):
        assert config_hash({"a": 1}) == config_hash({"a": 1})
        assert config_hash({"a": 1}) != config_hash({"a": 2})

    def test_four_effects_worse_than_six_for_large_families(self):
        # the structural gap: 6-effect POVMs reach the octahedron value 9
        # for dense projector families while 4-effect ones sit well above
        from povm_shadows.anneal import AnnealConfig, optimize_choi
        from povm_shadows.operators import random_projector

        gen = np.random.default_rng(88)
        states = [random_projector(gen) for _ in range(30)]
        observables = [random_projector(gen) for _ in range(30)]
        four = optimize_choi(states, observables, 4, 4,
                             AnnealConfig(seed=89)).kappa_sq
        six = optimize_choi(states, observables, 6, 6,
                            AnnealConfig(seed=89)).kappa_sq
        assert four >= six + 1.0


class TestCli:
    def test_norm_subcommand(self, tmp_path):
        cfg = tmp_path / "norm.json"
        cfg.write_text(json.dumps({"povm": "pauli6", "observables": ["sigma_x"]}))
        code = main(["norm", "--config", str(cfg), "--out", str(tmp_path)])
        assert code == 0
        payload = json.loads((tmp_path / "norm.json").read_text())
        assert payload["shadow_norms_sq"][0] == pytest.approx(3.0, abs=1e-9)

    def test_kappa_via_norm_subcommand(self, tmp_path):
        cfg = tmp_path / "kappa.json"
        cfg.write_text(json.dumps({
            "povm_a": "pauli6", "povm_b": "pauli6",
            "states": ["ket0_proj"], "observables": ["sigma_x"],
        }))
        out = tmp_path / "out"
        code = main(["norm", "--config", str(cfg), "--out", str(out)])
        assert code == 0
        payload = json.loads((out / "norm.json").read_text())
        assert payload["kappa_sq"] == pytest.approx(18.0, abs=1e-9)

    def test_toml_config(self, tmp_path):
        cfg = tmp_path / "norm.toml"
        cfg.write_text('povm = "tetrahedral"\nobservables = ["I"]\n')
        code = main(["norm", "--config", str(cfg), "--out", str(tmp_path)])
        assert code == 0

    def test_validation_error_exit_code(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"povm": "nonexistent", "observables": ["I"]}))
        assert main(["norm", "--config", str(cfg), "--out", str(tmp_path)]) == 2

    def test_missing_config_is_io_error(self, tmp_path):
        assert main(["norm", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path)]) == 3

    def test_unwritable_out_is_io_error(self, tmp_path):
        if os.geteuid() == 0:
            pytest.skip("root bypasses directory permissions")
        blocked = tmp_path / "blocked"
        blocked.mkdir()
        blocked.chmod(stat.S_IRUSR | stat.S_IXUSR)
        cfg = tmp_path / "norm.json"
        cfg.write_text(json.dumps({"povm": "pauli6", "observables": ["I"]}))
        assert main(["norm", "--config", str(cfg),
                     "--out", str(blocked / "sub")]) == 3

    def test_simulate_seed_override_changes_output(self, tmp_path):
        cfg = tmp_path / "sim.json"
        cfg.write_text(json.dumps({
            "channel": {"kind": "identity"},
            "povm": "pauli6",
            "states": ["ket0_proj"],
            "observables": ["sigma_z"],
            "epsilon": 0.4, "delta": 0.2,
        }))
        main(["simulate", "--config", str(cfg), "--seed", "1", "--out", str(tmp_path)])
        first = json.loads((tmp_path / "simulate.json").read_text())
        main(["simulate", "--config", str(cfg), "--seed", "2", "--out", str(tmp_path)])
        second = json.loads((tmp_path / "simulate.json").read_text())
        assert first["meta"]["seed"] == 1
        assert second["meta"]["seed"] == 2
        assert first["estimates"] != second["estimates"]

    def test_console_entrypoint(self, tmp_path):
        out = subprocess.run(
            [sys.executable, "-m", "povm_shadows.cli", "--help"],
            capture_output=True, text=True,
        )
        assert out.returncode == 0
        for name in ("table1", "fig3", "fig4", "compare", "norm",
                     "simulate", "optimize"):
            assert name in out.stdout


class TestWorkerPool:
    def test_worker_env_matches_serial(self, tmp_path, monkeypatch):
        params = {"qubit_counts": [1, 2], "n_values": [4]}
        path = run_fig4(params, seed=4, out_dir=tmp_path)
        serial = path.read_bytes()
        monkeypatch.setenv("POVM_SHADOWS_WORKERS", "2")
        path = run_fig4(params, seed=4, out_dir=tmp_path)
        assert path.read_bytes() == serial
