"""Every acceptance criterion at its stated size; prints one PASS/FAIL line each."""

import pytest

from multisub import acceptance as acc


@pytest.fixture(scope="module")
def traces():
    return acc._planted_traces(20)


CHECKS = {
    1: lambda t: acc.greedy_guarantee(),
    2: lambda t: acc.lazy_equivalence(),
    3: lambda t: acc.threshold_queries(),
    4: lambda t: acc.round_value_bound(traces=t),
    5: lambda t: acc.average_value_bound(traces=t),
    6: lambda t: acc.averaged_point_bound(traces=t),
    7: lambda t: acc.concavity(),
    8: lambda t: acc.swap_marginals(),
    9: lambda t: acc.subset_variation(),
    10: lambda t: acc.stage1_postcondition(),
    11: lambda t: acc.benchmark_trend(),
    12: lambda t: acc.determinism(jobs=8),
    13: lambda t: acc.kronecker_edges(),
}


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number, traces, capsys):
    result = CHECKS[number](traces)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.number == number
    assert result.passed, result.detail
