import numpy as np
import pytest

from blockade_lab import analytic
from blockade_lab.model import SystemParams

# Weak-coupling working point (kappa2 units): omega_m = 500, g/omega_m = 0.042,
# lambda1 = 0.95, E = 0.02, gamma_m = omega_m / 1e6, chi = 0.882.
WEAK_CHI = 0.882
WEAK_LAMBDA1 = 0.95


@pytest.fixture(scope="session")
def weak_optimum() -> SystemParams:
    """Parameters at the '-' branch interference optimum of the weak regime."""
    point = analytic.upb_optimal(WEAK_CHI, 1.0, WEAK_LAMBDA1, "-")
    return SystemParams(
        delta1=point.delta2,
        delta2=point.delta2,
        omega_m=500.0,
        lambda1=WEAK_LAMBDA1,
        lambda2=point.lambda2,
        g=21.0,
        E=0.02,
        kappa1=1.0,
        kappa2=1.0,
        gamma_m=5e-4,
        n_th=0.0,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def random_symmetric_params(rng, lambda_range=(0.2, 5.0)) -> SystemParams:
    """Random params obeying the closed-form preconditions delta1=delta2, kappa1=kappa2."""
    delta = float(rng.uniform(-2.0, 2.0))
    return SystemParams(
        delta1=delta,
        delta2=delta,
        omega_m=500.0,
        lambda1=float(rng.uniform(*lambda_range)),
        lambda2=float(rng.uniform(*lambda_range)),
        g=float(rng.uniform(5.0, 60.0)),
        E=0.02,
        kappa1=1.0,
        kappa2=1.0,
        gamma_m=5e-4,
        n_th=0.0,
    )
