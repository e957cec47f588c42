import json

import numpy as np
import pytest

from imo3.harness import (
    SweepSpec,
    aggregate_rows,
    build_problem,
    default_workers,
    derive_seed,
    emit_plot_data,
    read_results,
    run_sweep,
    write_plot_data,
)


def _tiny_spec(tmp_path, name="out.csv", **kwargs):
    defaults = dict(
        t_grid=(5, 10),
        n_grid=(500,),
        algorithms=("imo3", "rand_t"),
        estimators=("ips",),
        num_log_datasets=2,
        num_theta_stars=2,
        runs_per_combo=2,
        preselect_l=30,
        master_seed=7,
        out=str(tmp_path / name),
    )
    defaults.update(kwargs)
    return SweepSpec(**defaults)


class TestDeriveSeed:
    def test_deterministic(self):
        assert derive_seed(7, "a", 1) == derive_seed(7, "a", 1)

    def test_salt_sensitivity(self):
        seeds = {
            derive_seed(7),
            derive_seed(7, "a"),
            derive_seed(7, "b"),
            derive_seed(7, "a", 0),
            derive_seed(7, "a", 1),
            derive_seed(8, "a", 1),
        }
        assert len(seeds) == 6

    def test_fits_in_64_bits(self):
        for salt in range(50):
            assert 0 <= derive_seed(123, salt) < 2**64


class TestSweepSpecValidation:
    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            SweepSpec(t_grid=())

    def test_unknown_algorithm_rejected(self):
        with pytest.raises(ValueError, match="unknown algorithms"):
            SweepSpec(algorithms=("imo3", "gradient_descent"))

    def test_nonpositive_counts_rejected(self):
        with pytest.raises(ValueError):
            SweepSpec(num_log_datasets=0)


class TestBuildProblem:
    def test_zdt1_default(self):
        p = build_problem(SweepSpec())
        assert p.problem_id == "zdt1"
        assert (p.num_contexts, p.num_actions) == (5, 10)

    def test_same_master_seed_same_problem(self):
        a = build_problem(SweepSpec(master_seed=3))
        b = build_problem(SweepSpec(master_seed=3))
        np.testing.assert_array_equal(a.true_mean_rewards, b.true_mean_rewards)

    def test_unknown_problem(self):
        spec = SweepSpec()
        object.__setattr__(spec, "problem", "knapsack")
        with pytest.raises(ValueError, match="unknown problem"):
            build_problem(spec)


class TestAggregateRows:
    def test_hand_computed_mean_and_stderr(self):
        detail = [
            {
                "row_type": "detail", "problem": "zdt1", "algorithm": "imo3",
                "estimator": "ips", "T": 10, "N": 500, "dataset_idx": 0,
                "theta_idx": 0, "rep_idx": i, "seed": i,
                "simple_regret": r, "mean": "", "stderr": "", "n_runs": "",
            }
            for i, r in enumerate([0.1, 0.2, 0.3])
        ]
        agg = aggregate_rows(detail)
        assert len(agg) == 1
        assert agg[0]["mean"] == pytest.approx(0.2)
        assert agg[0]["stderr"] == pytest.approx(0.1 / np.sqrt(3))
        assert agg[0]["n_runs"] == 3

    def test_groups_by_algorithm_and_t(self):
        detail = []
        for algo in ("imo3", "rand_t"):
            for t in (10, 20):
                detail.append({
                    "row_type": "detail", "problem": "zdt1", "algorithm": algo,
                    "estimator": "ips", "T": t, "N": 500, "dataset_idx": 0,
                    "theta_idx": 0, "rep_idx": 0, "seed": 0,
                    "simple_regret": 0.5, "mean": "", "stderr": "", "n_runs": "",
                })
        agg = aggregate_rows(detail)
        assert len(agg) == 4
        assert all(row["stderr"] == 0.0 for row in agg)


class TestRunSweep:
    def test_row_counts_and_csv_shape(self, tmp_path):
        spec = _tiny_spec(tmp_path)
        rows = run_sweep(spec)
        detail = [r for r in rows if r["row_type"] == "detail"]
        agg = [r for r in rows if r["row_type"] == "aggregate"]
        # 2 algos x 1 estimator x 2 T x 1 N x 2 datasets x 2 thetas x 2 reps.
        assert len(detail) == 2 * 2 * 2 * 2 * 2
        assert len(agg) == 2 * 2
        loaded = read_results(spec.out)
        assert len(loaded) == len(rows)
        assert all(float(r["simple_regret"]) >= -1e-9 for r in detail)

    def test_sidecar_metadata(self, tmp_path):
        spec = _tiny_spec(tmp_path)
        run_sweep(spec)
        with open(spec.out + ".meta.json") as fh:
            sidecar = json.load(fh)
        assert sidecar["spec"]["master_seed"] == 7
        assert sidecar["spec"]["t_grid"] == [5, 10]
        assert "objective_lows" in sidecar["normalization"]

    def test_byte_identical_reruns(self, tmp_path):
        spec_a = _tiny_spec(tmp_path, name="a.csv")
        spec_b = _tiny_spec(tmp_path, name="b.csv")
        run_sweep(spec_a)
        run_sweep(spec_b)
        with open(spec_a.out, "rb") as fa, open(spec_b.out, "rb") as fb:
            assert fa.read() == fb.read()

    def test_parallel_matches_serial_bytes(self, tmp_path):
        serial = _tiny_spec(tmp_path, name="serial.csv", workers=1)
        parallel = _tiny_spec(tmp_path, name="parallel.csv", workers=2)
        run_sweep(serial)
        run_sweep(parallel)
        with open(serial.out, "rb") as fa, open(parallel.out, "rb") as fb:
            assert fa.read() == fb.read()

    def test_stderr_recomputable_from_detail(self, tmp_path):
        spec = _tiny_spec(tmp_path)
        rows = run_sweep(spec)
        detail = [r for r in rows if r["row_type"] == "detail"]
        for agg in (r for r in rows if r["row_type"] == "aggregate"):
            vals = np.array([
                float(r["simple_regret"]) for r in detail
                if (r["algorithm"], r["estimator"], r["T"], r["N"])
                == (agg["algorithm"], agg["estimator"], agg["T"], agg["N"])
            ])
            assert agg["mean"] == pytest.approx(vals.mean(), abs=1e-12)
            assert agg["stderr"] == pytest.approx(vals.std(ddof=1) / np.sqrt(len(vals)), abs=1e-12)

    def test_unwritable_out_fails_before_compute(self, tmp_path):
        spec = _tiny_spec(tmp_path, out=str(tmp_path / "missing_dir" / "out.csv"))
        with pytest.raises(OSError):
            run_sweep(spec)


class TestEmitPlotData:
    def _fixture_rows(self):
        rows = []
        for algo, t, regrets in [
            ("imo3", 10, [0.4, 0.6]),
            ("imo3", 50, [0.1, 0.3]),
            ("rand_t", 10, [0.5, 0.7]),
            ("rand_t", 50, [0.45, 0.55]),
        ]:
            for i, r in enumerate(regrets):
                rows.append({
                    "row_type": "detail", "problem": "zdt1", "algorithm": algo,
                    "estimator": "ips", "T": str(t), "N": "500",
                    "dataset_idx": "0", "theta_idx": "0", "rep_idx": str(i),
                    "seed": "0", "simple_regret": str(r),
                    "mean": "", "stderr": "", "n_runs": "",
                })
        return rows

    def test_hand_computed_series(self):
        series = emit_plot_data(self._fixture_rows())
        assert all(p["x_name"] == "T" for p in series)
        by_key = {(p["algorithm"], p["x"]): p for p in series}
        assert by_key[("imo3", 10)]["mean"] == pytest.approx(0.5)
        assert by_key[("imo3", 50)]["mean"] == pytest.approx(0.2)
        assert by_key[("rand_t", 50)]["stderr"] == pytest.approx(
            np.std([0.45, 0.55], ddof=1) / np.sqrt(2)
        )

    def test_n_axis_selected_when_t_fixed(self):
        rows = self._fixture_rows()
        for r in rows:
            r["T"] = "100"
            r["N"] = "500" if r["rep_idx"] == "0" else "5000"
        series = emit_plot_data(rows)
        assert all(p["x_name"] == "N" for p in series)

    def test_unknown_metric_names_known_ones(self):
        with pytest.raises(ValueError, match="simple_regret"):
            emit_plot_data(self._fixture_rows(), metric="accuracy")

    def test_empty_detail_rejected(self):
        with pytest.raises(ValueError, match="no detail rows"):
            emit_plot_data([])

    def test_roundtrip_write(self, tmp_path):
        series = emit_plot_data(self._fixture_rows())
        path = tmp_path / "series.csv"
        write_plot_data(series, str(path))
        loaded = list(__import__("csv").DictReader(open(path)))
        assert len(loaded) == len(series)
        assert loaded[0]["algorithm"] == series[0]["algorithm"]


class TestDefaultWorkers:
    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("IMO3_THREADS", "4")
        assert default_workers() == 4

    def test_default_is_one(self, monkeypatch):
        monkeypatch.delenv("IMO3_THREADS", raising=False)
        assert default_workers() == 1
