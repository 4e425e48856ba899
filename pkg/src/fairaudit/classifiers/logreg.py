"""L2-penalized logistic regression fitted by damped IRLS (Newton steps with
step halving).

Objective, with ``s`` the sample weights and ``c = n / sum(s)``::

    L(beta) = c * sum_i s_i * [log(1 + exp(z_i)) - y_i * z_i] + (lam / 2) * |beta[1:]|^2

where ``z = beta[0] + X @ beta[1:]``. The intercept is not penalized. The
factor ``c`` makes the fit invariant to a global rescaling of the weights and
leaves unit-weight and reweighed data (whose weights sum to n) unscaled.
"""
from __future__ import annotations

import numpy as np


def sigmoid(z):
    return np.exp(-np.logaddexp(0.0, -z))


def _design(X):
    return np.hstack([np.ones((X.shape[0], 1)), X])


def loss_and_grad(beta, X, y, s, lam):
    A = _design(X)
    z = A @ beta
    c = len(y) / s.sum()
    penalty = beta.copy()
    penalty[0] = 0.0
    loss = c * np.sum(s * (np.logaddexp(0.0, z) - y * z)) + 0.5 * lam * penalty @ penalty
    grad = c * A.T @ (s * (sigmoid(z) - y)) + lam * penalty
    return float(loss), grad


def _loss(beta, A, y, s, c, lam):
    z = A @ beta
    return c * np.sum(s * (np.logaddexp(0.0, z) - y * z)) + 0.5 * lam * (beta[1:] @ beta[1:])


def fit(X, y, s, l2=1.0, max_iter=100, tol=1e-8):
    A = _design(X)
    y = y.astype(np.float64)
    n, p = A.shape
    c = n / s.sum()
    ridge = np.full(p, float(l2))
    ridge[0] = 0.0
    beta = np.zeros(p)
    loss = _loss(beta, A, y, s, c, l2)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        mu = sigmoid(A @ beta)
        grad = c * A.T @ (s * (mu - y)) + ridge * beta
        curv = c * s * mu * (1.0 - mu)
        H = (A * curv[:, None]).T @ A + np.diag(ridge)
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, grad, rcond=None)[0]
        t = 1.0
        for _ in range(50):
            candidate = beta - t * step
            new_loss = _loss(candidate, A, y, s, c, l2)
            if new_loss <= loss:
                break
            t *= 0.5
        else:
            break
        beta = candidate
        converged = abs(loss - new_loss) <= tol * max(abs(loss), 1.0)
        loss = new_loss
        if converged:
            break
    return {"coef": beta}, {"iterations": iterations, "loss": float(loss)}


def scores(params, X):
    beta = params["coef"]
    return sigmoid(beta[0] + X @ beta[1:])
