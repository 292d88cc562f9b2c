import numpy as np
import pytest
from conftest import linear_dataset

from tlmest.common.errors import ConfigError, InvalidInputError
from tlmest.core import Parameter, Regularizer, glm_loss
from tlmest.solvers import SolverOptions, fit_single
from tlmest.transfer import (
    FineTune,
    FineTuneKind,
    TransferConfig,
    fine_tune_constrained,
    fine_tune_cv,
    fine_tune_lagrangian,
    oracle_transfer,
    pooled_estimate,
)
from tlmest.tuning import shifted_lambda_max

L1 = Regularizer.l1()
TIGHT = SolverOptions(tolerance=1e-12, max_iterations=20000)


@pytest.fixture
def study(rng, sparse_theta):
    shifted = sparse_theta.copy()
    shifted[5] = 0.3
    return [
        linear_dataset(rng, 60, sparse_theta),
        linear_dataset(rng, 120, shifted),
        linear_dataset(rng, 120, sparse_theta),
    ]


def test_pool_of_one_is_single_fit(small_linear):
    cfg = TransferConfig(lambda_pool=0.1)
    np.testing.assert_array_equal(
        pooled_estimate([small_linear], cfg).values,
        fit_single(small_linear, L1, 0.1).parameter.values,
    )


def test_pooling_is_invariant_to_common_rescaling(study):
    base = pooled_estimate(study, TransferConfig(lambda_pool=0.05, solver=TIGHT))
    scaled = [d.with_weight(3.0) for d in study]
    rescaled = pooled_estimate(scaled, TransferConfig(lambda_pool=0.15, solver=TIGHT))
    np.testing.assert_allclose(rescaled.values, base.values, atol=1e-6)


def test_large_zeta_leaves_primal_untouched(study):
    target = study[0]
    primal = pooled_estimate(study, TransferConfig(lambda_pool=0.05))
    zeta = shifted_lambda_max(target, primal, L1)
    result = fine_tune_lagrangian(target, primal, 1.01 * zeta, L1)
    np.testing.assert_array_equal(result.delta.values, 0.0)
    assert result.theta.allclose(primal, atol=0.0)


def test_exact_primal_needs_no_correction(rng, sparse_theta):
    target = linear_dataset(rng, 50, sparse_theta, noise=0.0)
    for zeta in (0.01, 0.1, 1.0):
        result = fine_tune_lagrangian(target, Parameter(sparse_theta), zeta, L1)
        np.testing.assert_allclose(result.delta.values, 0.0, atol=1e-12)


def test_tiny_zeta_recovers_target_least_squares(rng, sparse_theta):
    target = linear_dataset(rng, 200, sparse_theta)
    x, y = target.covariates, target.responses
    ols = np.linalg.solve(x.T @ x, x.T @ y)
    primal = Parameter(np.full(10, 0.2))
    result = fine_tune_lagrangian(target, primal, 1e-8, L1, TIGHT)
    np.testing.assert_allclose(result.theta.values, ols, atol=1e-4)


def test_correction_shrinks_as_zeta_grows(study):
    target = study[0]
    primal = pooled_estimate(study, TransferConfig(lambda_pool=0.05))
    top = shifted_lambda_max(target, primal, L1)
    sizes = [
        L1.norm(fine_tune_lagrangian(target, primal, z, L1, TIGHT).delta)
        for z in np.geomspace(0.01 * top, top, 5)
    ]
    assert all(b <= a + 1e-8 for a, b in zip(sizes, sizes[1:]))


def test_fine_tuning_never_hurts_in_sample(study):
    target = study[0]
    primal = pooled_estimate(study, TransferConfig(lambda_pool=0.05))
    zeta = 0.05
    result = fine_tune_lagrangian(target, primal, zeta, L1, TIGHT)
    with_step = glm_loss(target, result.theta) + zeta * L1.norm(result.delta)
    assert with_step <= glm_loss(target, primal) + 1e-10


def test_constrained_zero_radius_keeps_primal(study):
    primal = pooled_estimate(study, TransferConfig(lambda_pool=0.05))
    result = fine_tune_constrained(study[0], primal, 0.0, L1)
    assert result.theta.allclose(primal, atol=0.0)


def test_constrained_slack_radius_equals_lagrangian(study):
    target = study[0]
    primal = pooled_estimate(study, TransferConfig(lambda_pool=0.05))
    free = fine_tune_lagrangian(target, primal, 1e-8, L1)
    result = fine_tune_constrained(target, primal, 2.0 * L1.norm(free.delta), L1)
    assert result.details["active"] is False
    np.testing.assert_allclose(result.delta.values, free.delta.values)


def test_constrained_active_radius_binds(study):
    target = study[0]
    primal = pooled_estimate(study, TransferConfig(lambda_pool=0.05))
    free = fine_tune_lagrangian(target, primal, 1e-8, L1)
    radius = 0.3 * L1.norm(free.delta)
    result = fine_tune_constrained(target, primal, radius, L1)
    size = L1.norm(result.delta)
    assert size <= radius + 1e-6
    assert result.details["active"] is True
    if result.details.get("in_band"):
        assert size >= 0.99 * radius


def test_cv_fine_tuning_is_seeded(study):
    target = study[0]
    primal = pooled_estimate(study, TransferConfig(lambda_pool=0.05))
    first = fine_tune_cv(target, primal, L1, grid_size=6, seed=4)
    second = fine_tune_cv(target, primal, L1, grid_size=6, seed=4)
    assert first.details["form"] == "cv"
    np.testing.assert_array_equal(first.theta.values, second.theta.values)


def test_oracle_transfer_without_fine_tuning(study):
    cfg = TransferConfig(lambda_pool=0.05, finetune=FineTune.none())
    fit = oracle_transfer(study, 0, cfg)
    np.testing.assert_array_equal(fit.delta.values, 0.0)
    assert fit.finetuned.allclose(fit.primal, atol=0.0)
    assert fit.converged
    assert fit.diagnostics["finetune"]["form"] == "none"


def test_oracle_transfer_finetuned_is_primal_plus_delta(study):
    cfg = TransferConfig(lambda_pool=0.05, finetune=FineTune.lagrangian(0.02))
    fit = oracle_transfer(study, 0, cfg)
    np.testing.assert_array_equal(fit.finetuned.values, (fit.primal + fit.delta).values)


def test_oracle_transfer_checks_target_index(study):
    with pytest.raises(InvalidInputError):
        oracle_transfer(study, 3, TransferConfig(lambda_pool=0.05))


def test_transfer_config_from_dict():
    cfg = TransferConfig.from_dict({"lambda_pool": 0.1, "finetune": "none"})
    assert cfg.finetune.kind is FineTuneKind.NONE
    cfg = TransferConfig.from_dict(
        {"lambda_pool": 0.1, "finetune": {"kind": "lagrangian", "value": 0.3}, "solver": {}}
    )
    assert cfg.finetune.value == 0.3
    with pytest.raises(ConfigError):
        TransferConfig.from_dict({"lambda_pool": 0.1, "fine_tune": "none"})
    with pytest.raises(ConfigError):
        TransferConfig.from_dict({"finetune": "none"})
    with pytest.raises(ConfigError):
        FineTune(FineTuneKind.LAGRANGIAN)
