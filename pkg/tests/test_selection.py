import numpy as np
import pytest
from conftest import linear_dataset, trace_dataset

from tlmest.common.errors import ConfigError, InvalidInputError, UnsupportedModelError
from tlmest.core import LossFamily, Parameter, Regularizer
from tlmest.selection import (
    SelectionConfig,
    TruncatedObjective,
    dc_truncated_sparse,
    dc_truncated_trace,
    identify_informative,
    initial_state,
    run_dc,
    select,
    select_and_transfer,
)
from tlmest.selection.dc import InnerOutcome
from tlmest.solvers import fit_single, fit_weighted
from tlmest.transfer import FineTune

L1 = Regularizer.l1()
NUC = Regularizer.nuclear()


@pytest.fixture
def mixed_sparse(rng, sparse_theta):
    far = sparse_theta.copy()
    far[3:9] += 2.0
    return [
        linear_dataset(rng, 100, sparse_theta, noise=0.3),
        linear_dataset(rng, 100, sparse_theta, noise=0.3),
        linear_dataset(rng, 100, far, noise=0.3),
    ]


@pytest.fixture
def trace_pool(rng, low_rank_theta):
    return [trace_dataset(rng, 150, low_rank_theta) for _ in range(3)]


def assert_monotone(trace):
    for before, after in zip(trace, trace[1:]):
        assert after <= before + 1e-8 * max(1.0, abs(before))


def test_config_validation():
    with pytest.raises(ConfigError):
        SelectionConfig(lambda_pool=0.1, lambda_q=0.1, tau=0.0)
    with pytest.raises(ConfigError):
        SelectionConfig(lambda_pool=0.1, lambda_q=[-1.0], tau=1.0)
    cfg = SelectionConfig(lambda_pool=0.1, lambda_q=0.3, tau=1.0)
    np.testing.assert_array_equal(cfg.lambda_q_for(3), [0.3, 0.3, 0.3])
    with pytest.raises(InvalidInputError):
        SelectionConfig(lambda_pool=0.1, lambda_q=[0.1, 0.2], tau=1.0).lambda_q_for(3)
    with pytest.raises(ConfigError):
        SelectionConfig.from_dict({"lambda_pool": 0.1, "tau": 1.0})


def test_identify_informative_rule():
    base = np.zeros(3)
    thetas = [base, base.copy(), np.array([1.0, 0.0, 0.0]), np.array([2.0, 0.0, 0.0])]
    assert identify_informative(thetas, 1.0, L1) == [True, True, False]
    with pytest.raises(InvalidInputError):
        identify_informative(thetas, 0.0, L1)


def test_truncation_indicator_counts_ties_as_truncated(small_linear):
    objective = TruncatedObjective([small_linear, small_linear], 0.1, np.array([0.5]), 1.0, L1)
    theta = [np.zeros(10), np.zeros(10)]
    theta[1][0] = 1.0
    assert objective.indicators(theta) == [True]
    assert identify_informative([Parameter(t) for t in theta], 1.0, L1) == [True]


def test_zero_lambda_q_decouples_the_fits(mixed_sparse):
    cfg = SelectionConfig(lambda_pool=0.05, lambda_q=0.0, tau=1.0)
    fit = dc_truncated_sparse(mixed_sparse, cfg)
    for d, theta in zip(mixed_sparse, fit.thetas):
        alone = fit_single(d, L1, 0.05).parameter
        np.testing.assert_allclose(theta.values, alone.values, atol=1e-4)


def test_huge_penalties_reduce_to_blind_pooling(mixed_sparse):
    cfg = SelectionConfig(lambda_pool=0.05, lambda_q=1e6, tau=1e6)
    fit = dc_truncated_sparse(mixed_sparse, cfg)
    pooled = fit_weighted(mixed_sparse, L1, 0.05).parameter
    np.testing.assert_allclose(fit.primal.values, pooled.values, atol=1e-3)
    assert fit.informative_flags == [True, True]


def test_sparse_selection_flags_the_distant_source(mixed_sparse):
    cfg = SelectionConfig(lambda_pool=0.05, lambda_q=0.5, tau=2.0)
    fit = dc_truncated_sparse(mixed_sparse, cfg)
    assert fit.informative_flags == [True, False]
    assert fit.converged
    assert fit.details["stop_reason"] in ("stable", "no_descent")
    assert_monotone(fit.objective_trace)


@pytest.mark.parametrize("inner_converged", [True, False])
def test_rejected_step_reports_the_inner_convergence(mixed_sparse, inner_converged):
    cfg = SelectionConfig(lambda_pool=0.05, lambda_q=0.5, tau=2.0)
    objective = TruncatedObjective(mixed_sparse, 0.05, cfg.lambda_q_for(2), 2.0, L1)

    def uphill(candidate, truncated):
        candidate.theta = [t + 100.0 for t in candidate.theta]
        return InnerOutcome(sweeps=3, converged=inner_converged)

    fit = run_dc(objective, initial_state(mixed_sparse, cfg), uphill, cfg)
    assert fit.details["stop_reason"] == "no_descent"
    assert fit.dc_iterations == 0
    assert fit.converged is inner_converged
    assert fit.details["admm_converged"] == [inner_converged]


def test_sparse_branches_follow_indicators(mixed_sparse):
    cfg = SelectionConfig(lambda_pool=0.05, lambda_q=0.5, tau=2.0)
    fit = dc_truncated_sparse(mixed_sparse, cfg)
    history = fit.details["branch_history"]
    assert len(history) == fit.dc_iterations
    if history:
        # the far source starts above tau and stays there
        assert all(step[1] == "exact" for step in history)
        assert all(step[0] == "shrink" for step in history)


def test_sparse_inner_admm_reaches_consensus(mixed_sparse):
    cfg = SelectionConfig(lambda_pool=0.05, lambda_q=0.5, tau=2.0)
    fit = dc_truncated_sparse(mixed_sparse, cfg)
    assert all(fit.details["admm_converged"][: fit.dc_iterations])
    assert all(r <= 1e-2 for r in fit.details["consensus_residuals"])


def test_sparse_selection_is_deterministic(mixed_sparse):
    cfg = SelectionConfig(lambda_pool=0.05, lambda_q=0.5, tau=2.0)
    first = dc_truncated_sparse(mixed_sparse, cfg)
    second = dc_truncated_sparse(mixed_sparse, cfg)
    for a, b in zip(first.thetas, second.thetas):
        assert a.values.tobytes() == b.values.tobytes()


def test_sparse_rejects_other_models(trace_pool, mixed_sparse):
    cfg = SelectionConfig(lambda_pool=0.05, lambda_q=0.5, tau=2.0)
    with pytest.raises(UnsupportedModelError):
        dc_truncated_sparse(trace_pool, cfg)
    with pytest.raises(UnsupportedModelError):
        dc_truncated_trace(mixed_sparse, cfg)


def test_trace_zero_lambda_q_decouples_the_fits(trace_pool):
    cfg = SelectionConfig(lambda_pool=0.05, lambda_q=0.0, tau=1.0, regularizer=NUC)
    fit = dc_truncated_trace(trace_pool, cfg)
    for d, theta in zip(trace_pool, fit.thetas):
        alone = fit_single(d, NUC, 0.05).parameter
        np.testing.assert_allclose(theta.values, alone.values, atol=1e-3)


def test_trace_copy_of_target_is_pooled(rng, low_rank_theta):
    target = trace_dataset(rng, 150, low_rank_theta)
    cfg = SelectionConfig(lambda_pool=0.05, lambda_q=1.0, tau=10.0, regularizer=NUC)
    fit = dc_truncated_trace([target, target], cfg)
    assert fit.informative_flags == [True]
    pooled = fit_weighted([target, target], NUC, 0.05).parameter
    np.testing.assert_allclose(fit.primal.values, pooled.values, atol=1e-3)


def test_trace_selection_with_logit_link(rng, low_rank_theta):
    datasets = [
        trace_dataset(rng, 200, low_rank_theta, family=LossFamily.LOGISTIC_LOGIT)
        for _ in range(2)
    ]
    cfg = SelectionConfig(
        lambda_pool=0.02, lambda_q=0.1, tau=5.0, regularizer=NUC, max_dc_iterations=10
    )
    fit = select(datasets, cfg)
    assert len(fit.sources) == 1
    assert_monotone(fit.objective_trace)


def test_select_and_transfer_without_fine_tuning(mixed_sparse):
    cfg = SelectionConfig(lambda_pool=0.05, lambda_q=0.5, tau=2.0)
    selection, fit = select_and_transfer(mixed_sparse, cfg, FineTune.none())
    assert fit.finetuned.allclose(selection.primal, atol=0.0)
    assert fit.diagnostics["informative_flags"] == selection.informative_flags
