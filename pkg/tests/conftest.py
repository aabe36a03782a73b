import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from langsim.rng import Stream

settings.register_profile(
    "ci",
    derandomize=True,
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


def random_psd(dim: int, seed: int, min_eigenvalue: float = 0.0) -> np.ndarray:
    """Random symmetric PSD matrix from an orthogonal basis and given spectrum floor."""
    stream = Stream(seed)
    a = stream.normals(dim * dim).reshape(dim, dim)
    q, _ = np.linalg.qr(a)
    eigvals = min_eigenvalue + stream.uniforms(dim) * 2.0
    m = (q * eigvals) @ q.T
    return 0.5 * (m + m.T)


@pytest.fixture
def psd_factory():
    return random_psd
