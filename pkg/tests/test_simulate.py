import math

import numpy as np
import pytest

from conftest import F3_SYMMETRIC
from mubest.estimation import triple_fidelity
from mubest.mub import mub_triple
from mubest.simulate import (
    SimConfig,
    equivalence_scan_phase,
    equivalence_scan_random,
    estimator_tables,
    exact_protocol_fidelity,
    random_subset_analysis,
    reprocess_two_copy,
    simulate_protocol,
)

HALF = math.pi / 2

SMALL = SimConfig(seed=11, m_block=400, blocks=3)


@pytest.fixture(scope="module")
def small_report(symmetric_triple, design960):
    return simulate_protocol(symmetric_triple, design960, SMALL)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(seed=0, m_block=0)
    with pytest.raises(ValueError):
        SimConfig(seed=0, blocks=0)


def test_counts_shape_and_totals(small_report, design960):
    counts = small_report.counts
    assert counts.shape == (design960.size, SMALL.blocks, 64)
    assert np.all(counts.sum(axis=2) == SMALL.m_block)
    assert small_report.outcome_shape == (4, 4, 4)


def test_seed_reproducibility(symmetric_triple, design960, small_report):
    again = simulate_protocol(symmetric_triple, design960, SMALL)
    assert np.array_equal(again.counts, small_report.counts)
    assert again.mean_fidelity == small_report.mean_fidelity


def test_different_seed_differs(symmetric_triple, design960, small_report):
    other = simulate_protocol(
        symmetric_triple, design960, SimConfig(seed=12, m_block=400, blocks=3)
    )
    assert not np.array_equal(other.counts, small_report.counts)


def test_mean_consistent_with_exact(small_report, symmetric_triple, design960):
    exact = exact_protocol_fidelity(symmetric_triple, design960)
    n = design960.size * SMALL.m_block * SMALL.blocks
    # binomial-scale tolerance, generous factor
    assert abs(small_report.mean_fidelity - exact) <= 8 / math.sqrt(n)


def test_exact_limit_matches_ideal_theory(symmetric_triple, design960):
    exact = exact_protocol_fidelity(symmetric_triple, design960)
    assert abs(exact - F3_SYMMETRIC) <= 1e-9


def test_std_of_mean_property(small_report):
    assert small_report.std_of_mean == pytest.approx(
        small_report.std / math.sqrt(SMALL.blocks)
    )
    assert small_report.per_block_fidelities.shape == (SMALL.blocks,)
    assert small_report.mean_fidelity == pytest.approx(
        float(small_report.per_block_fidelities.mean())
    )


def test_shared_ab_streams_across_z(design960, symmetric_triple, small_report):
    # triples differing only in z reuse the A and B outcome streams, so the
    # marginal counts over the C outcome agree exactly
    other = simulate_protocol(mub_triple(HALF, HALF, HALF / 2), design960, SMALL)
    c1 = small_report.counts.reshape(-1, SMALL.blocks, 4, 4, 4)
    c2 = other.counts.reshape(-1, SMALL.blocks, 4, 4, 4)
    assert np.array_equal(c1.sum(axis=4), c2.sum(axis=4))
    assert not np.array_equal(c1, c2)


def test_unshared_streams_differ(design960, symmetric_triple, small_report):
    cfg = SimConfig(seed=11, m_block=400, blocks=3, share_ab_outcomes=False)
    solo = simulate_protocol(
        mub_triple(HALF, HALF, HALF / 2), design960, cfg
    )
    c1 = small_report.counts.reshape(-1, SMALL.blocks, 4, 4, 4)
    c2 = solo.counts.reshape(-1, cfg.blocks, 4, 4, 4)
    assert not np.array_equal(c1.sum(axis=4), c2.sum(axis=4))


def test_estimator_tables_cached(symmetric_triple, design960):
    a = estimator_tables(symmetric_triple, design960)
    b = estimator_tables(symmetric_triple, design960)
    assert a[1] is b[1]
    assert a[1].shape == (design960.size, 64)


def test_to_dict_roundtrippable(small_report):
    import json

    data = small_report.to_dict()
    assert "counts" not in data
    text = json.dumps(data)
    back = json.loads(text)
    assert back["mean_fidelity"] == small_report.mean_fidelity
    assert len(back["per_block_fidelities"]) == SMALL.blocks


def test_reprocess_two_copy(small_report, design960):
    rep2 = reprocess_two_copy(small_report, (0, 1), design960)
    assert rep2.counts.shape == (design960.size, SMALL.blocks, 16)
    assert np.all(rep2.counts.sum(axis=2) == SMALL.m_block)
    n = design960.size * SMALL.m_block * SMALL.blocks
    assert abs(rep2.mean_fidelity - 7.0 / 15.0) <= 8 / math.sqrt(n)
    with pytest.raises(ValueError):
        reprocess_two_copy(small_report, (1, 0), design960)


def test_reprocess_pairs_marginalize_consistently(small_report, design960):
    # marginalized totals per state-block agree with the parent run
    for pair in [(0, 1), (0, 2), (1, 2)]:
        rep2 = reprocess_two_copy(small_report, pair, design960)
        assert np.array_equal(
            rep2.counts.sum(axis=2), small_report.counts.sum(axis=2)
        )


def test_equivalence_scan_phase_exact_invariance(symmetric_triple, design960):
    rows = equivalence_scan_phase(
        [0.0, HALF, math.pi], symmetric_triple, design960
    )
    for phi, exact, sim, std in rows:
        assert abs(exact - F3_SYMMETRIC) <= 1e-10
        assert sim is None and std is None


def test_equivalence_scan_random_exact_invariance(symmetric_triple, design960):
    exact_s, sim_s = equivalence_scan_random(
        5, symmetric_triple, design960, unitary_seed=4
    )
    assert exact_s.max_deviation <= 1e-10
    assert exact_s.std <= 1e-10
    assert sim_s is None
    with pytest.raises(ValueError):
        equivalence_scan_random(0, symmetric_triple, design960)


def test_random_subset_analysis(small_report, design960):
    K = design960.size
    results = random_subset_analysis(
        small_report, [K // 4, K // 2, K], trials=40, seed=2
    )
    stds = [results[s][1] for s in sorted(results)]
    assert results[K][1] == 0.0
    assert results[K][0] == pytest.approx(
        float(small_report.per_state_fidelity.mean())
    )
    assert stds[0] > stds[1] > stds[2]
    with pytest.raises(ValueError):
        random_subset_analysis(small_report, [0])
