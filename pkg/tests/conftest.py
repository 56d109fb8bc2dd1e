import pytest
from hypothesis import HealthCheck, settings

from g2kummer.corpus import analytic_corpus, height_corpus, named_curves, pair_corpus

settings.register_profile(
    "ci",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")

ANALYTIC_BITS = 256


@pytest.fixture(scope="session")
def curves():
    return named_curves()


@pytest.fixture(scope="session")
def corpus_curves():
    return analytic_corpus()


@pytest.fixture(scope="session")
def corpus_pairs():
    return height_corpus()

@pytest.fixture(scope="session")
def corpus_point_pairs():
    return pair_corpus()


@pytest.fixture(scope="session")
def corpus_rdata(corpus_curves):
    """Period data for the analytic corpus, computed once per session."""
    from g2kummer.analytic import compute_periods

    return {c.coeffs(): compute_periods(c, ANALYTIC_BITS) for c in corpus_curves}
