import math

import numpy as np
import pytest

from uncdrift.config import dataset_section, experiment_config, load_config
from uncdrift.errors import ConfigurationError, InputError
from uncdrift.harness import (
    DatasetStream,
    ExperimentConfig,
    equal_positions,
    load_stream,
    random_positions,
    run_baseline,
    run_detection,
    run_experiment,
    run_fixed_positions,
    split_initial,
    sweep,
)
from uncdrift.synthetic import concept_flip_stream, constant_stream, stationary_stream
from uncdrift.uncertainty import EstimatorConfig


def quick(kind="basic", **kw):
    base = dict(estimator=EstimatorConfig(kind, mcd_passes=5, swag_samples=5, swag_rank=5),
                hidden_sizes=(8, 4), epochs=5)
    base.update(kw)
    return ExperimentConfig(**base)


@pytest.fixture(scope="module")
def flip():
    return concept_flip_stream(3000, seed=1)


@pytest.fixture(scope="module")
def flip_detect(flip):
    return run_detection(flip, quick(epochs=15), 0)


class TestLoadStream:
    def test_label_mapping(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("1,2,a\n3,4,b\n5,6,a\n")
        s = load_stream(p)
        assert s.num_classes == 2
        assert s.labels.tolist() == [0, 1, 0]
        assert s.features.tolist() == [[1, 2], [3, 4], [5, 6]]
        assert s.label_names == ["a", "b"]

    def test_non_numeric_cell_reports_line(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("1,2,a\n3,x,b\n")
        with pytest.raises(InputError, match=":2:"):
            load_stream(p)

    def test_column_count(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("1,2,a\n3,b\n")
        with pytest.raises(InputError, match="columns"):
            load_stream(p)

    def test_delimiter(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("1;2;up\n3;4;down\n")
        assert load_stream(p, delimiter=";").features.shape == (2, 2)

    def test_scaling_uses_initial_rows_only(self, tmp_path):
        rows = [f"{i},5,{i % 2}" for i in range(200)]
        rows[150] = "1000,9,0"
        p = tmp_path / "s.csv"
        p.write_text("\n".join(rows) + "\n")
        s = load_stream(p, feature_scaling=True, initial_fraction=0.05)
        # fit on the first 10 rows: feature 0 spans 0..9, feature 1 is constant there
        assert s.features[9, 0] == 1.0
        assert s.features[150, 0] == pytest.approx(1000 / 9)
        assert np.all(s.features[:, 1] == 0.0)


class TestSplit:
    @pytest.mark.parametrize("n, first, rest", [(1000, 50, 950), (999, 49, 950)])
    def test_floor(self, n, first, rest):
        s = DatasetStream("x", np.arange(n, dtype=float)[:, None], np.arange(n) % 2, 2)
        initial, online = split_initial(s, 0.05)
        assert (len(initial), len(online)) == (first, rest)
        assert np.array_equal(np.concatenate([initial.features, online.features]), s.features)

    def test_empty_part(self):
        s = DatasetStream("x", np.zeros((10, 1)), np.arange(10) % 2, 2)
        with pytest.raises(InputError):
            split_initial(s, 0.05)


class TestBaseline:
    def test_no_retraining_and_deterministic(self, flip):
        a = run_baseline(flip, quick(), 3)
        b = run_baseline(flip, quick(), 3)
        assert a.retraining_count == 0
        assert (a.mcc, a.ece) == (b.mcc, b.ece)
        assert np.array_equal(a.confusion.counts, b.confusion.counts)

    def test_every_online_sample_scored_once(self, flip):
        r = run_baseline(flip, quick(batch_size=97), 0)
        assert r.confusion.total == r.online_length == len(flip) - 150

    def test_batch_size_irrelevant(self, flip):
        a = run_detection(flip, quick(batch_size=1000), 2)
        b = run_detection(flip, quick(batch_size=37), 2)
        assert a.retraining_positions == b.retraining_positions
        assert np.array_equal(a.confusion.counts, b.confusion.counts)


class TestDetection:
    def test_constant_stream_equals_baseline(self):
        s = constant_stream(1000)
        for kind in ("basic", "mcd"):
            det = run_detection(s, quick(kind), 0)
            base = run_baseline(s, quick(kind), 0)
            assert det.retraining_count == 0
            assert np.array_equal(det.confusion.counts, base.confusion.counts)
            assert det.ece == base.ece

    def test_flip_triggers_retraining(self, flip, flip_detect):
        assert flip_detect.retraining_count >= 1
        flip_online = 1500 - 150
        assert any(flip_online <= p <= flip_online + 150 for p in flip_detect.retraining_positions)
        assert flip_detect.mcc > run_baseline(flip, quick(epochs=15), 0).mcc + 0.1

    def test_retraining_set_size(self, flip_detect):
        for e in flip_detect.events:
            assert e.training_set_size == 150 + min(30, e.trigger_index + 1)

    def test_early_trigger_uses_available_samples(self, flip):
        r = run_fixed_positions(flip, quick(), 0, [3])
        assert r.events[0].training_set_size == 150 + 4

    def test_stationary_gap_small(self):
        s = stationary_stream(4000, seed=2)
        cfg = quick(epochs=20)
        base = np.mean([run_baseline(s, cfg, k).mcc for k in range(2)])
        det = np.mean([run_detection(s, cfg, k).mcc for k in range(2)])
        assert abs(base - det) <= 0.02


class TestFixedPositions:
    def test_empty_equals_baseline(self, flip):
        a = run_fixed_positions(flip, quick(), 1, [])
        b = run_baseline(flip, quick(), 1)
        assert np.array_equal(a.confusion.counts, b.confusion.counts) and a.ece == b.ece

    @pytest.mark.parametrize("kind", ["basic", "mcd"])
    def test_replay(self, flip, kind):
        cfg = quick(kind, epochs=15)
        det = run_detection(flip, cfg, 4)
        fixed = run_fixed_positions(flip, cfg, 4, det.retraining_positions)
        assert fixed.retraining_count == det.retraining_count
        assert np.array_equal(fixed.confusion.counts, det.confusion.counts)

    @pytest.mark.parametrize("positions", [[5, 5], [9, 3], [-1], [2850]])
    def test_invalid(self, flip, positions):
        with pytest.raises(InputError):
            run_fixed_positions(flip, quick(), 0, positions)

    def test_electricity_sized_equal_count(self):
        s = stationary_stream(45_312, seed=0)
        _, online = split_initial(s, 0.05)
        pos = equal_positions(7, len(online))
        r = run_fixed_positions(s, quick(epochs=1, hidden_sizes=(4,), batch_size=4096), 0, pos)
        assert r.retraining_count == 7


class TestPositions:
    def test_equal_examples(self):
        assert equal_positions(1, 100) == [50]
        assert equal_positions(4, 100) == [20, 40, 60, 80]

    def test_equal_increasing(self):
        for r in range(1, 60):
            p = equal_positions(r, 950)
            assert all(a < b for a, b in zip(p, p[1:])) and p[-1] < 950

    def test_random(self):
        a = random_positions(52, 1000, 7)
        assert a == random_positions(52, 1000, 7)
        assert a == sorted(set(a)) and len(a) == 52
        assert 0 <= a[0] and a[-1] < 1000
        with pytest.raises(InputError):
            random_positions(11, 10, 0)

    def test_random_uniform(self):
        draws = np.concatenate([random_positions(1, 1000, s) for s in range(10_000)])
        assert abs(draws.mean() - 500) <= 0.02 * 500


class TestExperiment:
    def test_five_seeds(self, flip):
        rep = run_experiment(flip, quick(mode="baseline"))
        assert [r.seed for r in rep.runs] == [0, 1, 2, 3, 4]
        assert rep.mean.mcc == pytest.approx(np.mean([r.mcc for r in rep.runs]))

    def test_identical_seeds_zero_std(self, flip):
        rep = run_experiment(flip, quick(mode="detect", seeds=(3,) * 5))
        assert rep.std.mcc == 0.0 and rep.std.ece == 0.0 and rep.std.retraining_count == 0.0

    def test_fixed_mode_copies_detect_count(self, flip):
        cfg = quick(epochs=15, seeds=(0,))
        det = run_experiment(flip, cfg.with_overrides(mode="detect"))
        for strategy in ("equal", "random"):
            fixed = run_experiment(flip, cfg.with_overrides(mode="fixed_positions", strategy=strategy))
            assert fixed.runs[0].retraining_count == det.runs[0].retraining_count

    def test_parallel_matches_sequential(self, flip):
        cfg = quick(mode="baseline", seeds=(0, 1))
        a = run_experiment(flip, cfg)
        b = run_experiment(flip, cfg.with_overrides(parallel_seeds=2))
        assert [r.mcc for r in a.runs] == [r.mcc for r in b.runs]


class TestSweep:
    @pytest.mark.parametrize("kind, grid, rows", [
        ("mcd", {"T": [25, 50, 75, 100]}, 4),
        ("ensemble", {"M": [3, 5, 7]}, 3),
        ("basic", {}, 1),
    ])
    def test_row_counts(self, kind, grid, rows):
        out = sweep(concept_flip_stream(600, seed=0), quick(kind, epochs=2), grid)
        assert len(out) == rows
        if grid:
            (key, values), = grid.items()
            assert [r.setting[key] for r in out] == values
        else:
            assert out[0].setting == {}

    def test_cartesian_product(self):
        out = sweep(concept_flip_stream(600, seed=0), quick("swag", epochs=3), {"S": [2, 3], "rank": [2, 3, 4]})
        assert len(out) == 6

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError):
            sweep(concept_flip_stream(600), quick(), {"bogus": [1]})

    def test_delta_grid(self):
        s = concept_flip_stream(1000, seed=0)
        out = sweep(s, quick(epochs=5), {"delta": [0.1, 1e-20]})
        assert [r.setting["delta"] for r in out] == [0.1, 1e-20]


class TestConfig:
    def test_bundled_tables(self):
        cfg = load_config()
        gas = experiment_config(cfg, "gas")
        assert gas.hidden_sizes == (128, 64, 32, 16, 8)
        assert (gas.epochs, gas.adwin_delta, gas.dropout_rate) == (100, 0.1, 0.2)
        elec = experiment_config(cfg, "elec2")
        assert elec.hidden_sizes == (32, 16, 8) and elec.adwin_delta == 1e-15
        assert dataset_section(cfg, "electricity") is dataset_section(cfg, "elec")

    def test_override_precedence(self, tmp_path):
        user = tmp_path / "c.yaml"
        user.write_text("defaults:\n  adwin_delta: 0.01\n  estimator:\n    kind: mcd\n")
        cfg = load_config(user)
        ec = experiment_config(cfg, "unknown-dataset", {"mcd_passes": 7, "train.batch_size": 16})
        assert ec.adwin_delta == 0.01
        assert ec.estimator.kind == "mcd" and ec.estimator.mcd_passes == 7
        assert ec.train.batch_size == 16
        assert experiment_config(cfg, "x", {"adwin_delta": 0.3}).adwin_delta == 0.3

    def test_unknown_override(self):
        with pytest.raises(ConfigurationError):
            experiment_config(load_config(), "gas", {"learning_speed": 3})

    def test_invalid_values(self):
        with pytest.raises(ConfigurationError):
            ExperimentConfig(seeds=())
        with pytest.raises(ConfigurationError):
            ExperimentConfig(initial_fraction=1.0)
