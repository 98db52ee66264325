import pathlib

import pytest

from forcelang.data import GeneratorConfig, generate_corpus
from forcelang.lang import HashingProvider, table_provider
from forcelang.models import TrainConfig, train

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def provider():
    return HashingProvider(0)


@pytest.fixture(scope="session")
def fixture_table_path():
    return str(FIXTURES / "hash_table.tsv")


@pytest.fixture(scope="session")
def table(fixture_table_path):
    return table_provider(fixture_table_path)


@pytest.fixture(scope="session")
def small_corpus():
    # 2 participants x (10 + 10) = 40 paired samples, enough for quick training
    cfg = GeneratorConfig(participants=2, phrase_trials=10,
                          description_trials=10, noise=0.1, seed=7)
    return generate_corpus(cfg)


@pytest.fixture(scope="session")
def fast_config():
    return TrainConfig(epochs=3, batch_size=16, svm_epochs=50)


@pytest.fixture(scope="session")
def svm_model(small_corpus, fast_config):
    return train("svm_knn", small_corpus, config=fast_config, seed=3)


@pytest.fixture(scope="session")
def tiny_dae(small_corpus, fast_config):
    return train("dae_b", small_corpus, config=fast_config, seed=5)
