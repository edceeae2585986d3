import numpy as np
import pytest

from bruxkit.corpus import load_corpus
from bruxkit.eval import build_dataset, task_spec
from bruxkit.synth import generate_corpus

DEFAULT_SEED = 7
DEFAULT_PARTICIPANTS = 13


@pytest.fixture(scope="session")
def default_corpus_dir(tmp_path_factory):
    """The default 13-participant synthetic corpus, written once per session."""
    out = tmp_path_factory.mktemp("default_corpus")
    generate_corpus(out, DEFAULT_PARTICIPANTS, DEFAULT_SEED)
    return out


@pytest.fixture(scope="session")
def default_corpus(default_corpus_dir):
    return load_corpus(default_corpus_dir)


@pytest.fixture(scope="session")
def small_corpus_dir(tmp_path_factory):
    """Three participants; enough for LOSO but fast to evaluate."""
    out = tmp_path_factory.mktemp("small_corpus")
    generate_corpus(out, 3, master_seed=11)
    return out


@pytest.fixture(scope="session")
def small_corpus(small_corpus_dir):
    return load_corpus(small_corpus_dir)


@pytest.fixture(scope="session")
def task1a_gyro(default_corpus):
    return build_dataset(default_corpus, task_spec("task1a"), "gyroscope")


@pytest.fixture(scope="session")
def task1a_accel(default_corpus):
    return build_dataset(default_corpus, task_spec("task1a"), "accelerometer")


@pytest.fixture(scope="session")
def task1b_gyro(default_corpus):
    return build_dataset(default_corpus, task_spec("task1b"), "gyroscope")


def make_blobs(n=200, d=71, separation=8.0, seed=0):
    """Two well-separated Gaussian blobs; the shared separable-model oracle.

    Class means sit `separation` apart in Euclidean distance with unit
    per-dimension noise.
    """
    rng = np.random.default_rng(seed)
    half = n // 2
    shift = separation / np.sqrt(d)
    X = np.vstack(
        [
            rng.normal(0.0, 1.0, (half, d)),
            rng.normal(shift, 1.0, (n - half, d)),
        ]
    )
    y = np.array([0] * half + [1] * (n - half))
    order = rng.permutation(n)
    return X[order], y[order]
