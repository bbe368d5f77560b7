"""
Unit tests: random two-body error experiments, norm fit, exponential-count
extrapolation, guarantees and CSV output.

How to test:
Run "python -m pytest tests/unit/test_experiments.py -v"
Run "python -m pytest tests/unit/test_experiments.py -v -m 'not slow'" to skip the sweeps
"""

import csv

import numpy as np
import pytest

from core.models import GroupScalingRow
from simulation_compiler.experiments import (
    additivity_check,
    error_fit,
    error_slope,
    extrapolate_exp_counts,
    format_error_summary,
    group_scaling_experiment,
    guarantee_experiment,
    norm_scaling_fit,
    sample_seeds,
    ts_error_experiment,
    write_error_csv,
    write_rows_csv,
)
from simulation_compiler.hamiltonian import sample_random_twobody


# ---------------------------------------------------------------------------
# Seeds and fits
# ---------------------------------------------------------------------------
class TestSampleSeeds:
    def test_deterministic_and_distinct(self):
        seeds = sample_seeds(7, 50)
        assert seeds == sample_seeds(7, 50)
        assert len(set(seeds)) == 50
        assert seeds != sample_seeds(8, 50)


class TestErrorFit:
    def test_orders(self):
        assert error_fit(2.0, 0.5, 2, 1) == pytest.approx(1 / 12)
        assert error_fit(4.0, 1.0, 4, 2) == pytest.approx(2**5 / 3000)

    def test_rejects_other_orders(self):
        with pytest.raises(ValueError):
            error_fit(1.0, 1.0, 2, 3)


# ---------------------------------------------------------------------------
# Trotter error sweeps
# ---------------------------------------------------------------------------
class TestTsErrorExperiment:
    def test_report_shape_and_reproducibility(self):
        report = ts_error_experiment([2, 3], [0.01, 0.02], samples=3, order=1, seed=5)
        assert len(report.samples) == 2 * 3 * 2
        assert {row.n for row in report.aggregates()} == {2, 3}
        assert all(row.count == 3 for row in report.aggregates())
        again = ts_error_experiment([2, 3], [0.01, 0.02], samples=3, order=1, seed=5)
        assert [s.measured for s in again.samples] == [s.measured for s in report.samples]

    def test_order2_has_no_bound(self):
        report = ts_error_experiment([2], [0.05], samples=2, order=2)
        assert all(s.bound is None for s in report.samples)
        assert all(row.mean_ratio is None for row in report.aggregates())

    def test_rejects_unknown_order(self):
        with pytest.raises(ValueError):
            ts_error_experiment([2], [0.1], samples=1, order=3)

    def test_bound_is_valid_and_loose(self):
        report = ts_error_experiment([4], [0.01, 0.03], samples=10, order=1, seed=1)
        assert all(s.measured <= s.bound for s in report.samples)
        assert all(row.mean_ratio >= 1e3 for row in report.aggregates())

    def test_fit_tracks_measurement(self):
        report = ts_error_experiment([3, 4, 5], [0.01, 0.03], samples=10, order=1, seed=2)
        assert report.fit_deviations() == []
        assert all(1 / 10 <= row.measured_to_fit <= 10 for row in report.aggregates())

    def test_second_order_fit_is_flagged_as_deviating(self):
        # The order-2 fit underestimates this ensemble by a stable factor of tens.
        report = ts_error_experiment([4, 5], [0.02, 0.05], samples=20, order=2, seed=3)
        rows = report.aggregates()
        assert report.fit_deviations() == rows
        assert all(10 < row.measured_to_fit < 300 for row in rows)
        summary = format_error_summary(report).splitlines()
        assert summary[1].endswith("measured_to_fit,fit_deviates")
        assert all(line.endswith(",True") for line in summary[2:])

    def test_second_order_slope(self):
        report = ts_error_experiment([3], list(np.geomspace(5e-3, 5e-2, 4)), samples=6, order=2, seed=4)
        assert error_slope(report, 3) == pytest.approx(5.0, abs=0.4)

    def test_first_order_slope(self):
        report = ts_error_experiment([3], list(np.geomspace(1e-3, 1e-2, 4)), samples=5, order=1, seed=4)
        assert error_slope(report, 3) == pytest.approx(3.0, abs=0.2)

    def test_slope_needs_two_points(self):
        report = ts_error_experiment([2], [0.01], samples=2, order=1)
        with pytest.raises(ValueError):
            error_slope(report, 2)

    def test_summary_block(self):
        report = ts_error_experiment([2], [0.01, 0.02], samples=2, order=1, seed=9)
        lines = format_error_summary(report).splitlines()
        assert lines[0] == "# order=1 seed=9"
        assert lines[1].startswith("n,t,count,mean_error")
        assert len(lines) == 4
        assert lines[2].startswith("2,0.01,2,")


@pytest.mark.slow
class TestBoundSweep:
    def test_bound_holds_and_is_loose_across_sizes_and_times(self):
        report = ts_error_experiment(range(2, 9), list(np.geomspace(1e-4, 1e-1, 4)), samples=50, order=1, seed=0)
        assert all(s.measured <= s.bound for s in report.samples)
        rows = report.aggregates()
        assert {row.n for row in rows} == set(range(2, 9))
        assert all(row.mean_ratio >= 1e3 for row in rows)
        # Looseness grows with the system size.
        by_n = {n: min(row.mean_ratio for row in rows if row.n == n) for n in range(2, 9)}
        assert by_n[8] > by_n[2]


@pytest.mark.slow
class TestNormScaling:
    def test_fit_matches_reference_scaling(self):
        fit = norm_scaling_fit(range(2, 9), samples=10, seed=0)
        assert fit.exponent == pytest.approx(5 / 3, abs=0.15)
        assert fit.coefficient == pytest.approx(1.3, abs=0.2)
        assert fit.mean_norms == sorted(fit.mean_norms)


class TestNormScalingInput:
    def test_needs_two_sizes(self):
        with pytest.raises(ValueError):
            norm_scaling_fit([3, 3], samples=2)


# ---------------------------------------------------------------------------
# Extrapolated exponential counts
# ---------------------------------------------------------------------------
class TestExtrapolation:
    def test_loose_tolerance_rows(self):
        rows = {row.n: row for row in extrapolate_exp_counts([2, 4, 10], epsilon=0.01, t=0.1)}
        assert (rows[2].n_exp_order1, rows[2].n_exp_order2) == (36, 90)
        assert (rows[4].n_exp_order1, rows[4].n_exp_order2) == (432, 540)
        assert rows[2].ratio == pytest.approx(0.40)
        assert rows[4].ratio == pytest.approx(0.80)
        assert not rows[2].deviates and not rows[4].deviates

    def test_rounded_reference_is_flagged(self):
        row = extrapolate_exp_counts([10], epsilon=0.01, t=0.1)[0]
        assert row.n_exp_order2 == 8100
        assert row.reference_order1 == 8190
        assert row.deviates

    def test_tight_tolerance_deviation_is_flagged(self):
        row = extrapolate_exp_counts([2], epsilon=1e-6, t=0.01)[0]
        assert row.n_exp_order1 == 72
        assert row.reference_order1 == 108
        assert row.deviates

    def test_other_settings_have_no_reference(self):
        row = extrapolate_exp_counts([6], epsilon=0.05, t=0.2)[0]
        assert row.reference_order1 is None
        assert not row.deviates
        assert row.m == 135

    def test_second_order_wins_at_scale(self):
        rows = extrapolate_exp_counts([40, 100], epsilon=1e-6, t=0.01)
        assert all(row.ratio > 1 for row in rows)


# ---------------------------------------------------------------------------
# Guarantees
# ---------------------------------------------------------------------------
class TestGuarantees:
    def test_error_adds_over_steps(self):
        spec = sample_random_twobody(3, seed=21)
        result = additivity_check(spec, t=0.5, chi=1, r=5)
        assert result.holds
        assert result.total_error <= 5 * result.step_error * (1 + 1e-9) + 1e-13

    def test_default_parameters_meet_half_epsilon(self):
        samples = guarantee_experiment(n=4, samples=20, t=0.1, epsilon=0.05, seed=3)
        assert len(samples) == 20
        failures = [s for s in samples if not s.within_half_epsilon]
        assert not failures, f"{len(failures)} samples above epsilon/2, e.g. {failures[0]}"


# ---------------------------------------------------------------------------
# Group scaling
# ---------------------------------------------------------------------------
class TestGroupScaling:
    def test_honeycomb_stays_at_three_commuting_groups(self):
        rows = group_scaling_experiment("honeycomb", [2, 3])
        assert [(row.n, row.m) for row in rows] == [(8, 12), (18, 27)]
        assert all(row.m_bar_commuting == 3 for row in rows)
        assert all(3 <= row.m_bar_disjoint <= 5 for row in rows)

    def test_random_model(self):
        rows = group_scaling_experiment("random", [3, 4], seed=1)
        assert [(row.n, row.m) for row in rows] == [(3, 27), (4, 54)]
        assert all(1 <= row.m_bar_commuting <= row.m for row in rows)

    def test_unknown_model(self):
        with pytest.raises(ValueError, match="unknown model"):
            group_scaling_experiment("ladder", [2])


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------
class TestCsvWriters:
    def test_rows_csv(self, tmp_path):
        rows = [
            GroupScalingRow(model="honeycomb", n=8, m=12, m_bar_commuting=3, m_bar_disjoint=3),
            GroupScalingRow(model="honeycomb", n=18, m=27, m_bar_commuting=3, m_bar_disjoint=4),
        ]
        path = tmp_path / "out" / "groups.csv"
        write_rows_csv(rows, path)
        with path.open() as handle:
            read = list(csv.DictReader(handle))
        assert list(read[0]) == ["model", "n", "m", "m_bar_commuting", "m_bar_disjoint"]
        assert read[1]["m_bar_disjoint"] == "4"

    def test_empty_rows_write_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_rows_csv([], path)
        assert path.read_text() == ""

    def test_error_csv_keeps_seeds(self, tmp_path):
        report = ts_error_experiment([2], [0.01], samples=2, order=1, seed=4)
        path = tmp_path / "errors.csv"
        write_error_csv(report, path)
        with path.open() as handle:
            read = list(csv.DictReader(handle))
        assert [int(row["seed"]) for row in read] == [s.seed for s in report.samples]
        assert read[0]["order"] == "1"
