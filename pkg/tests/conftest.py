import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("snowsum", derandomize=True, max_examples=40, deadline=None)
settings.load_profile("snowsum")


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Run one tiny training up front so the compiled kernel is loaded before
    any timed test measures steady-state behavior."""
    from snowsum.linsvm import TrainConfig, train_binary

    X = np.array([[1.0, 0.0], [-1.0, 0.0]])
    y = np.array([1.0, -1.0])
    train_binary(X, y, TrainConfig(C=1.0, max_epochs=5))
