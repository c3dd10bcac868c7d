import math

import numpy as np
import pytest

from src.exceptions import DegenerateSampleError
from src.sim.engine import substream
from src.sim.estimators import (
    critical_value,
    itt_estimate,
    wald_iv_estimate,
    z_statistic,
)
from src.sim.strata import generate_sample, wald_variance_of_spec

Z = [0, 0, 1, 1]


def test_perfect_compliance_without_noise():
    fit = wald_iv_estimate(Z, [0, 0, 1, 1], [1, 1, 3, 3])
    assert fit.tau_hat == pytest.approx(2.0)
    assert fit.var_hat == 0.0
    assert math.isinf(fit.z)
    assert fit.reject


def test_hand_computed_sandwich_variance():
    fit = wald_iv_estimate(Z, [0, 1, 1, 1], [0, 2, 4, 6])
    assert fit.tau_hat == pytest.approx(8.0)
    assert fit.pi_hat == pytest.approx(0.5)
    assert fit.gamma_hat == pytest.approx(4.0)
    np.testing.assert_allclose(fit.residuals, [3.0, -3.0, -1.0, 1.0])
    assert fit.var_hat == pytest.approx(20.0)
    assert fit.z == pytest.approx(8.0 / math.sqrt(20.0))
    assert not fit.reject


def test_alpha_changes_the_decision():
    fit = wald_iv_estimate(Z, [0, 1, 1, 1], [0, 2, 4, 6], alpha=0.1)
    assert fit.reject


def test_empty_arm_is_degenerate():
    with pytest.raises(DegenerateSampleError):
        wald_iv_estimate([1, 1, 1, 1], [0, 1, 1, 0], [1, 2, 3, 4])


def test_flat_first_stage_is_degenerate():
    with pytest.raises(DegenerateSampleError):
        wald_iv_estimate(Z, [1, 0, 1, 0], [1, 2, 3, 4])


def test_itt_constant_outcome():
    fit = itt_estimate(Z, [1, 1, 1, 1])
    assert fit.gamma_hat == 0.0
    assert fit.z == 0.0
    assert not fit.reject


def test_itt_difference_in_means():
    fit = itt_estimate(Z, [0, 2, 4, 6])
    assert fit.gamma_hat == pytest.approx(4.0)
    assert fit.var_hat == pytest.approx(2.0)
    assert fit.reject


def test_itt_needs_two_units_per_arm():
    with pytest.raises(DegenerateSampleError):
        itt_estimate([0, 1, 1, 1], [1, 2, 3, 4])


def test_z_statistic_edges():
    assert z_statistic(3.0, 4.0) == 1.5
    assert z_statistic(-1.0, 0.0) == -math.inf
    assert z_statistic(0.0, 0.0) == 0.0


def test_critical_value():
    assert critical_value(0.05) == pytest.approx(1.959964, abs=1e-6)


def test_large_sample_wald_fit(b1_spec):
    n = 200_000
    z, d, y = generate_sample(b1_spec, n, substream(11, 0))
    fit = wald_iv_estimate(z, d, y)
    assert fit.pi_hat == pytest.approx(0.2, abs=0.01)
    assert fit.tau_hat == pytest.approx(5.0, abs=1.0)
    assert fit.var_hat == pytest.approx(
        wald_variance_of_spec(b1_spec, n), rel=0.1
    )


def test_sandwich_variance_matches_residual_second_moment(b1_spec):
    n = 1_000_000
    z, d, y = generate_sample(b1_spec, n, substream(29, 0))
    fit = wald_iv_estimate(z, d, y)
    scaled = fit.var_hat * 0.25 * n * fit.pi_hat**2
    assert scaled == pytest.approx(np.mean(fit.residuals**2), rel=0.01)
