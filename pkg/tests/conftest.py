import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "ratc1", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ratc1")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def central_jacobian(fn, pts, h):
    """Central differences of fn (P, d) -> (P, p) along every axis, shape (P, p, d)."""
    pts = np.asarray(pts, dtype=float)
    cols = []
    for k in range(pts.shape[1]):
        e = np.zeros(pts.shape[1])
        e[k] = h
        hi = np.asarray(fn(pts + e)).reshape(len(pts), -1)
        lo = np.asarray(fn(pts - e)).reshape(len(pts), -1)
        cols.append((hi - lo) / (2 * h))
    return np.stack(cols, axis=-1)
