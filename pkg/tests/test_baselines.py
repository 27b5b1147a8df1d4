import numpy as np
import pytest
from conftest import spike_instance

from stsad import instrumentation
from stsad.baselines import BaselineParams, solve_horpca, solve_loss, svt
from stsad.logss import LogssParams, solve
from stsad.tensor import project_support


def nuclear_2x2_grid(M, tau, lo=-1.5, hi=1.5, step=0.25):
    """Dense grid argmin of tau*||X||_* + 0.5*||X - M||_F^2 over 2x2 X."""
    axis = np.arange(lo, hi + step / 2, step)
    A, B, C, D = np.meshgrid(axis, axis, axis, axis, indexing="ij")
    q = A**2 + B**2 + C**2 + D**2
    det = np.abs(A * D - B * C)
    nuclear = np.sqrt(q + 2 * det)
    fit = (
        (A - M[0, 0]) ** 2
        + (B - M[0, 1]) ** 2
        + (C - M[1, 0]) ** 2
        + (D - M[1, 1]) ** 2
    )
    objective = tau * nuclear + 0.5 * fit
    best = np.unravel_index(np.argmin(objective), objective.shape)
    return np.array([[axis[best[0]], axis[best[1]]], [axis[best[2]], axis[best[3]]]])


def test_svt_diagonal():
    out = svt(np.diag([3.0, 1.0]), 2.0)
    assert np.allclose(out, np.diag([1.0, 0.0]), atol=1e-12)


def test_svt_tau_zero_reconstructs():
    M = np.random.default_rng(0).normal(size=(4, 6))
    assert np.linalg.norm(svt(M, 0.0) - M) <= 1e-8
    with pytest.raises(ValueError):
        svt(M, -0.5)


def test_svt_matches_grid_prox():
    rng = np.random.default_rng(1)
    step = 0.25
    for _ in range(10):
        M = rng.uniform(-1, 1, size=(2, 2))
        tau = rng.uniform(0.05, 0.5)
        ours = svt(M, tau)
        grid_best = nuclear_2x2_grid(M, tau, step=step)
        assert np.abs(ours - grid_best).max() <= step + 1e-12


def test_svt_shrinks_singular_values():
    rng = np.random.default_rng(2)
    for _ in range(10):
        M = rng.normal(size=(5, 7))
        tau = rng.uniform(0, 2)
        s_in = np.linalg.svd(M, compute_uv=False)
        s_out = np.linalg.svd(svt(M, tau), compute_uv=False)
        assert s_out.sum() <= s_in.sum() + 1e-10
        assert np.allclose(s_out, np.maximum(s_in - tau, 0.0), atol=1e-8)


def baseline_params(Y, observed, **kw):
    beta = 1.0 / Y.std()
    kw.setdefault("tol", 1e-4)
    kw.setdefault("max_iter", 300)
    return BaselineParams.defaults(
        Y, observed, beta1=beta, beta2=beta, beta3=beta, beta4=beta, **kw
    )


def test_solve_loss_zero_data():
    Y = np.zeros((4, 3, 5, 2))
    observed = np.ones(Y.shape, dtype=bool)
    result = solve_loss(Y, observed, BaselineParams())
    assert result.iterations == 1
    assert np.allclose(result.L, 0.0)
    assert np.allclose(result.S, 0.0)


def test_solve_loss_exactly_low_rank_data():
    rng = np.random.default_rng(3)
    vecs = [rng.uniform(1.0, 2.0, size=d) for d in (6, 5, 8, 4)]
    Y = np.einsum("i,j,k,l->ijkl", *vecs)
    observed = np.ones(Y.shape, dtype=bool)
    result = solve_loss(Y, observed, baseline_params(Y, observed))
    assert np.abs(result.S).sum() / np.abs(Y).sum() <= 1e-2


@pytest.fixture(scope="module")
def spike_loss_run():
    Y, graphs, spike_idx, _ = spike_instance()
    observed = np.ones(Y.shape, dtype=bool)
    params = baseline_params(Y, observed)
    result = solve_loss(Y, observed, params)
    return Y, graphs, spike_idx, observed, params, result


def test_solve_loss_spike_instance(spike_loss_run):
    Y, _, spike_idx, observed, _, result = spike_loss_run
    residual = np.linalg.norm(project_support(result.L + result.S - Y, observed))
    assert residual / np.linalg.norm(Y) <= 1e-3
    assert np.unravel_index(np.argmax(np.abs(result.S)), Y.shape) == spike_idx


def test_loss_performs_exactly_n_svds_per_iteration(spike_loss_run):
    Y, _, _, observed, params, _ = spike_loss_run
    short = BaselineParams(
        **{**{f: getattr(params, f) for f in LogssParams.__dataclass_fields__},
           "max_iter": 7, "tol": 0.0}
    )
    before = instrumentation.snapshot()["svd"]
    result = solve_loss(Y, observed, short)
    total = instrumentation.snapshot()["svd"] - before
    assert result.iterations == 7
    assert total == 7 * Y.ndim
    assert result.svd_history == [Y.ndim] * 7
    assert result.diagnostics_rows()[0]["svd_count"] == Y.ndim


def test_logss_iterations_cost_no_svds_and_less_time(spike_loss_run):
    Y, graphs, _, observed, params, _ = spike_loss_run
    fields = {f: getattr(params, f) for f in LogssParams.__dataclass_fields__}
    fields.update(max_iter=40, tol=0.0)
    same = BaselineParams(**fields)
    before = instrumentation.snapshot()
    fast = solve(Y, observed, graphs, same)
    assert instrumentation.snapshot()["svd"] == before["svd"]
    slow = solve_loss(Y, observed, same)
    assert fast.iterations == slow.iterations == 40
    assert fast.wall_time < slow.wall_time


def test_horpca_equals_loss_with_gamma_zero():
    rng = np.random.default_rng(4)
    Y = rng.normal(size=(5, 4, 6, 3))
    observed = rng.random(Y.shape) < 0.9
    params = baseline_params(Y, observed, max_iter=25, tol=0.0)
    fields = {f: getattr(params, f) for f in LogssParams.__dataclass_fields__}
    fields["gamma"] = 0.0
    reference = solve_loss(Y, observed, BaselineParams(**fields))
    horpca = solve_horpca(Y, observed, params)
    assert np.array_equal(horpca.L, reference.L)
    assert np.array_equal(horpca.S, reference.S)


def test_loss_threads_match_serial(spike_loss_run):
    Y, _, _, observed, params, result = spike_loss_run
    threaded = solve_loss(Y, observed, params, threads=4)
    assert np.allclose(threaded.L, result.L)
    assert np.allclose(threaded.S, result.S)
    assert threaded.svd_history == result.svd_history


def test_horpca_zero_data_and_spike():
    Y = np.zeros((4, 3, 5, 2))
    observed = np.ones(Y.shape, dtype=bool)
    result = solve_horpca(Y, observed, BaselineParams())
    assert np.allclose(result.L, 0.0) and np.allclose(result.S, 0.0)

    Y, _, spike_idx, _ = spike_instance()
    observed = np.ones(Y.shape, dtype=bool)
    result = solve_horpca(Y, observed, baseline_params(Y, observed))
    residual = np.linalg.norm(project_support(result.L + result.S - Y, observed))
    assert residual / np.linalg.norm(Y) <= 1e-3
