import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def d8_targets():
    """Five Dirichlet(1) targets on eight symbols, fixed once and for all."""
    from chansim.distributions import dirichlet_sample
    from chansim.randomness import Stream, StreamKey

    return [dirichlet_sample(1.0, 8, StreamKey(1234, Stream.TARGET, i)) for i in range(5)]


def chi2_pvalue(counts, probs):
    from scipy import stats

    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    keep = probs > 0
    assert counts[~keep].sum() == 0, "mass outside the target support"
    expected = probs[keep] * counts.sum()
    return stats.chisquare(counts[keep], expected).pvalue


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
