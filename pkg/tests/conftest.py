import sys

import numpy as np
import pytest

from adaptcomp.model import GaussianSignalModel


def random_spd(rng, n, floor=0.1):
    X = rng.standard_normal((n, n))
    return X @ X.T + floor * np.eye(n)


def random_model(rng, N, K, L, m=1, rnn_zero=False):
    H = rng.standard_normal((K, N))
    while np.linalg.svd(H, compute_uv=False).min() < 1e-3:
        H = rng.standard_normal((K, N))
    Rnn = np.zeros((K, K)) if rnn_zero else 0.3 * random_spd(rng, K)
    return GaussianSignalModel(H=H, P0=random_spd(rng, N), Rnn=Rnn,
                               Rww=random_spd(rng, L, floor=0.5), m=m)


def scalar_model(lambdas, sigma_n2=0.0, sigma_w2=1.0, m=1, V=None):
    lam = np.asarray(lambdas, dtype=float)
    N = lam.size
    V = np.eye(N) if V is None else V
    return GaussianSignalModel(H=np.eye(N), P0=(V * lam) @ V.T,
                               Rnn=sigma_n2 * np.eye(N), Rww=np.array([[sigma_w2]]), m=m)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if not mod or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in mod.RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {label}: {detail}")
