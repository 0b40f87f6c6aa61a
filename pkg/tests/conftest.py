"""This module contains default fixtures for tests."""

import numpy as np
import pytest

from qlangevin import numkit
from qlangevin.model import BathSpec, ModelSpec, SystemSpec, random_model, thermalization_model
from qlangevin.modelfile import dump_model


@pytest.fixture(autouse=True)
def env_vars(monkeypatch):
    monkeypatch.setenv("QLANGEVIN_LOG_LEVEL", "WARNING")
    monkeypatch.setenv("QLANGEVIN_SEED", "0")
    monkeypatch.setenv("QLANGEVIN_MAX_CHAIN_DIM", "65536")
    yield


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def make_random_model():
    def _make(seed: int = 0, d: int = 2, N: int = 1, coupling_scale: float = 1.0):
        return random_model(np.random.default_rng(seed), d, N, coupling_scale=coupling_scale)

    return _make


@pytest.fixture
def small_gap_model():
    """d=2, N=2 model with weak couplings and bath levels (0, 0.25, 0.5) at beta=1."""

    def _make(seed: int = 7):
        rng = np.random.default_rng(seed)
        h_s = numkit.random_hermitian(2, rng, 1.0)
        couplings = []
        for _ in range(2):
            g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            couplings.append(g * (0.25 / numkit.spectral_norm(g)))
        bath = BathSpec.from_gibbs([0.0, 0.25, 0.5], 1.0)
        return ModelSpec(SystemSpec(h_s, tuple(couplings)), bath)

    return _make


@pytest.fixture
def decoupled_model(rng):
    h_s = numkit.random_hermitian(2, rng, 1.0)
    zero = np.zeros((2, 2), dtype=np.complex128)
    bath = BathSpec.from_gibbs([0.0, 0.25, 0.5], 1.0)
    return ModelSpec(SystemSpec(h_s, (zero, zero)), bath)


@pytest.fixture
def qubit_ladder():
    return thermalization_model([0.0, 1.0], 1.0)


@pytest.fixture
def model_file(tmp_path):
    def _write(model: ModelSpec, name: str = "model.json"):
        path = tmp_path / name
        dump_model(model, path)
        return path

    return _write
