"""
Shared fixtures.
"""
import json

import numpy as np
import pytest

from partitioner.models.schemas import dump_cluster
from partitioner.services.cluster_generator import generate_cluster
from partitioner.services.log_service import log_service
from tests.helpers import adversarial_cluster, make_cluster, split_only_cluster


@pytest.fixture(autouse=True)
def clear_log_service():
    """Each test starts with an empty event history."""
    log_service.clear()
    yield


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))


@pytest.fixture
def two_platform_cluster():
    """A fast expensive platform with hourly billing and a slow cheap one billed per minute."""
    return make_cluster(
        beta=[[1e-3, 2e-3], [4e-3, 5e-3]],
        gamma=[[30.0, 20.0], [1.0, 1.0]],
        work=[200_000, 150_000],
        quantum_s=[3600.0, 60.0],
        price=[2.5, 0.01],
    )


@pytest.fixture
def symmetric_cluster():
    """Two identical platforms, no setup time, billing quantum far below any latency."""
    return make_cluster(
        beta=[[1e-3, 1e-3], [1e-3, 1e-3]],
        gamma=[[0.0, 0.0], [0.0, 0.0]],
        work=[1000, 1000],
        quantum_s=[1e-3, 1e-3],
        price=[1e-3, 1e-3],
    )


@pytest.fixture
def adversarial():
    return adversarial_cluster()


@pytest.fixture
def generated_cluster():
    return generate_cluster(6, 16, seed=7)


@pytest.fixture
def cluster_file(tmp_path, adversarial):
    path = tmp_path / "cluster.json"
    path.write_text(json.dumps(dump_cluster(adversarial)))
    return str(path)


@pytest.fixture
def split_only():
    return split_only_cluster()


@pytest.fixture
def split_only_file(tmp_path, split_only):
    path = tmp_path / "split_only.json"
    path.write_text(json.dumps(dump_cluster(split_only)))
    return str(path)
