import os

import pytest

from toricfan import f_closure, fano_seeds, projective_space_fan

THREADS = max(1, os.cpu_count() or 1)


@pytest.fixture(scope="session")
def d2_graph():
    return f_closure(fano_seeds(2), 2, "fano")


@pytest.fixture(scope="session")
def d2_weak_graph():
    return f_closure([projective_space_fan(2)], 2, "weak")


@pytest.fixture(scope="session")
def d3_graph():
    return f_closure(fano_seeds(3), 3, "fano")


@pytest.fixture(scope="session")
def d4_checkpoint_path(tmp_path_factory):
    override = os.environ.get("TORICFAN_D4_CHECKPOINT")
    if override:
        return override
    return str(tmp_path_factory.mktemp("closure") / "d4.json")


@pytest.fixture(scope="session")
def d4_graph(d4_checkpoint_path):
    return f_closure(
        fano_seeds(4), 4, "fano", threads=THREADS, checkpoint=d4_checkpoint_path
    )
