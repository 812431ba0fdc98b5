"""
Configuração global para testes pytest
"""

import os
import sys
from pathlib import Path

import numpy as np
import pytest

# Adicionar backend ao path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from app.schemas import OptimOptions
from app.services.channel import validate_channel

DATA_DIR = Path(__file__).resolve().parents[2] / "data" / "channels"


def pytest_configure(config):
    config.addinivalue_line("markers", "unit: Unit tests")
    config.addinivalue_line("markers", "integration: Integration tests")
    config.addinivalue_line("markers", "slow: Slow tests")


def mod_additive_raw(q_s):
    """Y = X ⊕ S com A = len(q_s)"""
    size = len(q_s)
    w = np.zeros((size, size, size))
    for x in range(size):
        for s in range(size):
            w[x, s, (x + s) % size] = 1.0
    return {"x_size": size, "s_size": size, "y_size": size, "q_s": list(q_s), "w": w.tolist()}


def random_channel(seed, x_size=2, s_size=2, y_size=2, useless=False):
    """Canal aleatório reprodutível (Dirichlet nas linhas)"""
    rng = np.random.default_rng(seed)
    q_s = rng.dirichlet(np.ones(s_size))
    if useless:
        rows = rng.dirichlet(np.ones(y_size), size=s_size)
        w = np.broadcast_to(rows, (x_size, s_size, y_size))
    else:
        w = rng.dirichlet(np.ones(y_size), size=(x_size, s_size))
    return validate_channel({
        "x_size": x_size, "s_size": s_size, "y_size": y_size,
        "q_s": q_s.tolist(), "w": np.asarray(w).tolist(),
    }, name=f"random-{seed}")


@pytest.fixture
def data_dir():
    """Diretório com os canais de exemplo"""
    return DATA_DIR


@pytest.fixture
def mod2_channel():
    """Canal módulo-2 com Q_S uniforme (H(S) = 1)"""
    return validate_channel(mod_additive_raw([0.5, 0.5]), name="mod2")


@pytest.fixture
def mod2_biased_channel():
    """Canal módulo-2 com Q_S = [0.89, 0.11]"""
    return validate_channel(mod_additive_raw([0.89, 0.11]), name="mod2-biased")


@pytest.fixture
def useless_channel():
    """Saída independente da entrada"""
    return random_channel(7, x_size=2, s_size=2, y_size=3, useless=True)


@pytest.fixture
def asymmetric_channel(data_dir):
    from app.services.channel import load_channel
    return load_channel(data_dir / "asymmetric_2x2x2.json")


@pytest.fixture
def small_opts():
    """Opções reduzidas para testes rápidos"""
    return OptimOptions(r_grid_size=7, restarts=4, max_iters=200, rate_split_grid_size=9, seed=0)
