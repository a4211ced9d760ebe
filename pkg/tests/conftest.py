import numpy as np
import pytest

from kmsa import GraphRecipe, KernelSpec, KmsaConfig, MultiviewDataset


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def random_dataset(rng, m=3, n=20, dims=None, classes=2):
    dims = dims or [3 + v for v in range(m)]
    views = [rng.standard_normal((dims[v], n)) for v in range(m)]
    labels = np.sort(rng.integers(0, classes, size=n))
    # keep every class populated
    labels[:classes] = np.arange(classes)
    return MultiviewDataset(views=views, labels=np.sort(labels))


def small_config(d=2, recipe="pca", **kw):
    return KmsaConfig(d=d, graph=GraphRecipe(kind=recipe), **kw)


@pytest.fixture
def toy_dataset(rng):
    return random_dataset(rng)


@pytest.fixture
def gaussian_spec():
    return KernelSpec(kind="gaussian", bandwidth=1.0)
