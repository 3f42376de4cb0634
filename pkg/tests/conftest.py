import warnings

import numpy as np
import pytest

from aauc.channel import (AngularMatrix, ChannelSet, Geometry, SystemParams,
                          default_params, make_rng, null_space_basis)

warnings.filterwarnings("ignore", message="closed-form design assumes")


@pytest.fixture
def params_small():
    return default_params(n_antennas=8, n_users=4)


def make_random_setup(seed, n, k, params=None):
    """Synthetic channels at physical scales without geometry, for solver
    unit tests that do not need the placement model."""
    p = params or default_params(n_antennas=n, n_users=k)
    rng = make_rng(seed)
    scale = 1e-5
    g = scale * (rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n)))
    h = scale * (rng.standard_normal(k - 1) + 1j * rng.standard_normal(k - 1))
    u = null_space_basis(g[-1])
    channels = ChannelSet(g=g, h_k=h, u=u, attacked_index=k)
    j = AngularMatrix(diag=10.0 ** rng.uniform(-12, -10, k - 1))
    return p, channels, j


def random_feasible_point(rng, n, k, p_max):
    """Random (z, w) inside the two-phase power budget."""
    z = rng.standard_normal(n - 1) + 1j * rng.standard_normal(n - 1)
    w = rng.standard_normal(k - 1) + 1j * rng.standard_normal(k - 1)
    total = np.linalg.norm(z) ** 2 + np.linalg.norm(w) ** 2
    s = np.sqrt(rng.uniform(0.05, 1.0) * 2.0 * p_max / total)
    return z * s, w * s
