import sys

import pytest
from hypothesis import settings

from sdee.embed import TrainingScenario, train
from sdee.evaluation import EvalDataset
from sdee.fixtures import build_fixture_bundle, make_topic_corpus
from sdee.store import persist

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")


def pytest_runtest_logreport(report):
    """One PASS/FAIL line per acceptance criterion."""
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        status = "PASS" if report.passed else "FAIL"
        name = report.nodeid.split("::")[-1]
        sys.stderr.write(f"ACCEPTANCE {status}: {name}\n")


@pytest.fixture(scope="session")
def topic_corpus():
    return make_topic_corpus(30, seed=11)


@pytest.fixture(scope="session")
def topic_model(topic_corpus):
    docs, _ = topic_corpus
    scenario = TrainingScenario(epochs=10, vector_size=10, training_samples=30, seed=7)
    return train(docs, scenario)


@pytest.fixture(scope="session")
def fixture_bundle():
    return build_fixture_bundle()


@pytest.fixture(scope="session")
def fixture_corpus(fixture_bundle):
    return fixture_bundle[0]


@pytest.fixture(scope="session")
def fixture_model(fixture_bundle):
    return fixture_bundle[1]


@pytest.fixture(scope="session")
def fixture_store_path(fixture_corpus, tmp_path_factory):
    path = tmp_path_factory.mktemp("store") / "fixture.sqlite"
    persist(fixture_corpus, path)
    return path


@pytest.fixture(scope="session")
def eval_dataset(fixture_corpus):
    return EvalDataset.from_corpus(fixture_corpus)
