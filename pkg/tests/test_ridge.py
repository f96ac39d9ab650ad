import numpy as np
import pytest

from graphsig.ridge import RidgeModel, _spd_solve, fit_ridge, ridge_scores


def primal_scores(F_tr, Y, alphas, F, epsilon):
    # (F^T F + alpha I_K)^-1 F^T Y agrees with the dual weights on every row
    K = F_tr.shape[1]
    out = np.zeros((F.shape[0], Y.shape[1]))
    for alpha in alphas:
        W = np.linalg.solve(F_tr.T @ F_tr + alpha * np.eye(K), F_tr.T @ Y)
        sigma = np.std(F_tr @ W)
        out -= (F @ W) / (sigma + epsilon)
    return out / len(alphas)


def test_two_point_hand_example():
    F_tr = np.array([[1.0], [-1.0]])
    Y = np.eye(2)
    model = fit_ridge(F_tr, Y, alphas=(1.0,), epsilon=0.0)
    assert np.allclose(model.betas[0], np.array([[2.0, 1.0], [1.0, 2.0]]) / 3.0)
    assert model.sigmas[0] == pytest.approx(1.0 / 3.0)
    R = ridge_scores(model, np.array([[1.0]]))
    assert np.allclose(R, [[-1.0, 1.0]])
    model_eps = fit_ridge(F_tr, Y, alphas=(1.0,))
    R_eps = ridge_scores(model_eps, np.array([[1.0]]))
    assert np.allclose(R_eps, [[-1.0, 1.0]], atol=1e-9)


def test_dual_matches_primal_solution():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n_tr = int(rng.integers(3, 41))
        K = int(rng.integers(2, 61))
        C = int(rng.integers(2, 5))
        F_tr = rng.standard_normal((n_tr, K))
        Y = np.eye(C)[rng.integers(0, C, size=n_tr)]
        alphas = tuple(rng.uniform(0.05, 5.0, size=3))
        model = fit_ridge(F_tr, Y, alphas)
        F = rng.standard_normal((9, K))
        want = primal_scores(F_tr, Y, alphas, F, model.epsilon)
        got = ridge_scores(model, F)
        assert np.allclose(got, want, rtol=1e-6, atol=1e-8)


def test_multi_alpha_is_mean_of_single_alpha_scores():
    rng = np.random.default_rng(1)
    F_tr = rng.standard_normal((12, 5))
    Y = np.eye(3)[rng.integers(0, 3, size=12)]
    F = rng.standard_normal((6, 5))
    alphas = (0.1, 1.0, 10.0)
    combined = ridge_scores(fit_ridge(F_tr, Y, alphas), F)
    singles = [ridge_scores(fit_ridge(F_tr, Y, (a,)), F) for a in alphas]
    assert np.allclose(combined, np.mean(singles, axis=0), atol=1e-12)


def test_sigma_is_population_std_of_training_scores():
    rng = np.random.default_rng(2)
    F_tr = rng.standard_normal((10, 4))
    Y = np.eye(2)[rng.integers(0, 2, size=10)]
    model = fit_ridge(F_tr, Y, alphas=(0.5,))
    G = F_tr @ F_tr.T
    Z_tr = G @ model.betas[0]
    assert model.sigmas[0] == pytest.approx(np.std(Z_tr), rel=1e-12)


def test_spd_solve_jitter_retry():
    # slightly indefinite matrix defeats the first factorization attempt
    G = np.diag([1.0, -1e-14])
    beta = _spd_solve(G, 1e-15, np.eye(2))
    assert np.all(np.isfinite(beta))
    A = G + 1e-15 * np.eye(2)
    jitter = 1e-10 * np.trace(A) / 2
    want = np.linalg.solve(A + jitter * np.eye(2), np.eye(2))
    assert np.allclose(beta, want, rtol=1e-6)


def test_transductive_scores_lower_for_true_class():
    rng = np.random.default_rng(3)
    F_tr = np.vstack([rng.standard_normal((20, 3)) + [4, 0, 0],
                      rng.standard_normal((20, 3)) - [4, 0, 0]])
    y = np.repeat([0, 1], 20)
    Y = np.eye(2)[y]
    model = fit_ridge(F_tr, Y, alphas=(0.1, 1.0))
    R = ridge_scores(model, F_tr)
    assert np.mean(np.argmin(R, axis=1) == y) > 0.95


def test_validation_errors():
    F_tr = np.zeros((4, 2))
    Y = np.eye(2)[[0, 1, 0, 1]]
    with pytest.raises(ValueError, match="positive"):
        fit_ridge(F_tr, Y, alphas=(1.0, 0.0))
    with pytest.raises(ValueError, match="rows"):
        fit_ridge(F_tr, Y[:3], alphas=(1.0,))
    model = fit_ridge(np.eye(4)[:, :2] + 1.0, Y, alphas=(1.0,))
    with pytest.raises(ValueError, match="dimension"):
        ridge_scores(model, np.zeros((2, 3)))
