import pytest

from src.exceptions import DomainError
from src.tables import (
    KAPPA_GRID,
    SCENARIOS,
    TableBuilder,
    scenarios,
)


PUBLISHED_TOLERANCE = 0.02


@pytest.fixture
def builder():
    return TableBuilder(workers=1)


class TestSampleSizeTables:
    def test_table1(self, builder):
        rows = builder.build("1")
        assert [row["kappa"] for row in rows] == KAPPA_GRID
        assert rows[1]["n_conservative"] == 9861
        assert rows[1]["n_ordered"] == 8966
        assert rows[1]["tau"] == pytest.approx(1675.88)
        assert rows[-1]["n_conservative"] == pytest.approx(559, abs=1)
        assert rows[-1]["n_ordered"] == pytest.approx(380, abs=1)

    def test_table2(self, builder):
        rows = builder.build("2")
        assert rows[0]["n_conservative"] == pytest.approx(93241, abs=1)
        assert rows[2]["n_ordered"] == 9916
        for row in rows:
            assert row["n_ordered"] < row["n_conservative"]

    def test_ceil_rounding(self, builder):
        nearest = builder.sample_size_table(0.63)
        ceil = builder.sample_size_table(0.63, round_mode="ceil")
        for low, high in zip(nearest, ceil):
            assert 0 <= high["n_conservative"] - low["n_conservative"] <= 1

    def test_outcome_sd_scales_tau(self, builder):
        rows = builder.sample_size_table(0.4, outcome_sd=10.0)
        assert rows[0]["tau"] == pytest.approx(0.5)

    def test_simulation_options_are_ignored(self, builder):
        assert builder.build("1", reps=10, seed=3) == builder.build("1")

    def test_beta_changes_sizes(self, builder):
        default = builder.build("2")
        stricter = builder.build("2", beta=0.1)
        assert stricter[3]["n_conservative"] > default[3]["n_conservative"]


class TestScenarios:
    @pytest.mark.parametrize(
        "which, count", [("B1", 6), ("B2", 16), ("B3", 5), ("B4", 5)]
    )
    def test_scenario_counts(self, which, count):
        assert len(scenarios(which)) == count

    def test_unknown_tables(self, builder):
        with pytest.raises(DomainError):
            scenarios("B9")
        with pytest.raises(DomainError):
            builder.build("3")

    def test_every_scenario_is_valid(self):
        for which in SCENARIOS:
            for scenario in scenarios(which):
                assert scenario.spec.p_c > 0
                assert scenario.n >= 650


class TestSimulationTables:
    def test_b4_layout_and_scaled_ate(self, builder):
        rows = builder.simulation_table("B4", reps=20, seed=1)
        assert len(rows) == 5
        assert rows[0]["scaled_ate_power"] == pytest.approx(0.878, abs=1e-3)
        assert rows[0]["kappa"] == pytest.approx(0.59761, abs=1e-5)
        assert {"table", "block", "scenario", "power_itt"} <= set(rows[0])

    def test_rows_are_reproducible(self, builder):
        first = builder.simulation_table("B3", reps=10, seed=4)
        assert first == builder.simulation_table("B3", reps=10, seed=4)

    def test_b1_has_no_scaled_ate_column(self, builder):
        rows = builder.build("B1", reps=5)
        assert "scaled_ate_power" not in rows[0]
        assert [row["n"] for row in rows[:3]] == [1000, 2000, 4000]

    @pytest.mark.slow
    def test_b1_published_values(self, builder):
        rows = builder.simulation_table("B1", reps=5000)
        for row, expected in zip(rows[:3], (0.43, 0.71, 0.93)):
            assert row["power_late"] == pytest.approx(
                expected, abs=PUBLISHED_TOLERANCE
            )

    @pytest.mark.slow
    def test_b2_published_values(self, builder):
        rows = builder.simulation_table("B2", reps=5000)
        by_label = {row["scenario"]: row for row in rows}
        for label, expected in (
            ("-3/3", 0.44),
            ("10/-6", 0.13),
            ("12/4", 0.43),
        ):
            power = by_label[label]["power_late"]
            assert abs(power - expected) <= PUBLISHED_TOLERANCE

    @pytest.mark.slow
    def test_b3_published_values(self, builder):
        rows = builder.simulation_table("B3", reps=5000)
        by_label = {row["scenario"]: row for row in rows}
        for label, late, itt in (("-3/3", 0.44, 0.41), ("10/-6", 0.13, 0.30)):
            row = by_label[label]
            assert abs(row["power_late"] - late) <= PUBLISHED_TOLERANCE
            assert abs(row["power_itt"] - itt) <= PUBLISHED_TOLERANCE

    @pytest.mark.slow
    def test_b4_published_values(self, builder):
        rows = builder.simulation_table("B4", reps=5000)
        for index, expected in ((0, 0.87), (2, 0.39), (4, 0.19)):
            assert rows[index]["power_late"] == pytest.approx(
                expected, abs=PUBLISHED_TOLERANCE
            )
