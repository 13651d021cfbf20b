import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from qolci.errors import DomainError, RankOutOfRange
from qolci.experiment import (
    DEMO_SPEC,
    Assignment,
    PotentialOutcomes,
    SynthSpec,
    demo_experiment,
    ground_truth_upsilon,
    observe,
    randomize,
    sharp_null_population,
    synth_population,
)
from qolci.ordering import DEATH, DeathPlacement, Quality, order_stat


@pytest.mark.parametrize("N,n", [(5, 0), (5, 5), (5, 6), (1, 1)])
def test_randomize_rejects_bad_n(N, n):
    with pytest.raises(DomainError):
        randomize(N, n, 0)


def test_randomize_deterministic():
    assert randomize(20, 7, 11) == randomize(20, 7, 11)
    assert randomize(20, 7, 11).n == 7


@pytest.fixture(scope="module")
def draws_5_2():
    ss = np.random.SeedSequence(20240607).spawn(100_000)
    return [tuple(k for k, v in enumerate(randomize(5, 2, s).z) if v) for s in ss]


def test_randomize_uniform_over_subsets(draws_5_2):
    counts = Counter(draws_5_2)
    subsets = list(itertools.combinations(range(5), 2))
    assert set(counts) == set(subsets)
    trials = len(draws_5_2)
    sigma = math.sqrt(trials * 0.1 * 0.9)
    for s in subsets:
        assert abs(counts[s] - trials / 10) <= 4 * sigma
    observed = [counts[s] for s in subsets]
    assert stats.chisquare(observed).pvalue > 1e-6


def test_randomize_marginals(draws_5_2):
    trials = len(draws_5_2)
    hits = Counter(k for pair in draws_5_2 for k in pair)
    sigma = math.sqrt(trials * 0.4 * 0.6)
    for k in range(5):
        assert abs(hits[k] - 0.4 * trials) <= 4 * sigma


def _pop(pairs):
    return PotentialOutcomes(tuple((Quality(float(t)) if t is not None else DEATH,
                                    Quality(float(c)) if c is not None else DEATH) for t, c in pairs))


def test_observe_two_subjects():
    pop = _pop([(1, 2), (3, 4)])
    obs = observe(pop, Assignment((1, 0)))
    assert obs.outcomes == (Quality(1.0), Quality(4.0))
    assert (obs.n, obs.m) == (1, 1)


def test_observe_null_effect_ignores_assignment():
    pop = _pop([(k, k) for k in range(6)])
    a = observe(pop, randomize(6, 3, 1)).outcomes
    b = observe(pop, randomize(6, 3, 2)).outcomes
    assert a == b


def test_observe_length_mismatch():
    with pytest.raises(DomainError):
        observe(_pop([(1, 1), (2, 2)]), Assignment((1, 0, 0)))


def test_observe_destroys_counterfactuals():
    # Populations differing only in unobserved outcomes give identical data.
    z = Assignment((1, 0, 1, 0))
    p1 = _pop([(1, 9), (9, 2), (3, 9), (9, 4)])
    p2 = _pop([(1, 5), (7, 2), (3, None), (None, 4)])
    assert observe(p1, z) == observe(p2, z)
    p3 = _pop([(1, 9), (9, 2), (3, 9), (9, 5)])
    assert observe(p1, z) != observe(p3, z)


def test_ground_truth_null_effect():
    pop = _pop([(k, k) for k in (5, 2, 8, 1, 9, 4)])
    z = randomize(6, 3, 0)
    for i in range(1, 4):
        t = ground_truth_upsilon(pop, z, i)
        assert t.treated_stat == t.counterfactual_stat


def test_ground_truth_by_hand():
    pop = _pop([(10, 3), (20, 1), (30, 2)])
    z = Assignment((1, 1, 0))
    t1 = ground_truth_upsilon(pop, z, 1)
    t2 = ground_truth_upsilon(pop, z, 2)
    assert (t1.treated_stat, t1.counterfactual_stat) == (Quality(10.0), Quality(1.0))
    assert (t2.treated_stat, t2.counterfactual_stat) == (Quality(20.0), Quality(3.0))
    with pytest.raises(RankOutOfRange):
        ground_truth_upsilon(pop, z, 3)


@given(st.lists(st.integers(0, 20), min_size=6, max_size=6), st.integers(0, 2**32 - 1),
       st.integers(1, 3))
def test_ground_truth_ignores_control_subjects(new_values, seed, i):
    base = [(k, 2 * k) for k in range(6)]
    pop = _pop(base)
    z = randomize(6, 3, seed)
    mutated = [(t, nv if not zi else c) for (t, c), zi, nv in zip(base, z.z, new_values)]
    assert ground_truth_upsilon(pop, z, i) == ground_truth_upsilon(_pop(mutated), z, i)


def test_ground_truth_under_placement():
    pop = PotentialOutcomes(((Quality(1.0), DEATH), (Quality(5.0), Quality(2.0)), (DEATH, Quality(6.0))))
    z = Assignment((1, 1, 0))
    cut = DeathPlacement(3.0)
    t = ground_truth_upsilon(pop, z, 1, cut)
    assert t.treated_stat == Quality(1.0)
    assert t.counterfactual_stat == Quality(2.0)


@pytest.mark.parametrize("dt,dc,expect", [(0.0, 0.0, 0), (1.0, 1.0, 2 * 40)])
def test_synth_extremes(dt, dc, expect):
    pop = synth_population(SynthSpec(N=40, death_treated=dt, death_control=dc, seed=3))
    deaths = sum(x == DEATH for pair in pop.subjects for x in pair)
    assert deaths == expect


def test_synth_deterministic():
    spec = SynthSpec(N=50, seed=9)
    assert synth_population(spec) == synth_population(spec)


def test_synth_demo_death_counts():
    pop = synth_population(DEMO_SPEC)
    z = randomize(650, 325, 1)
    obs = observe(pop, z)
    deaths_t = sum(1 for zi, x in zip(obs.z, obs.outcomes) if zi and x == DEATH)
    deaths_c = sum(1 for zi, x in zip(obs.z, obs.outcomes) if not zi and x == DEATH)
    for count, p in ((deaths_t, 16 / 325), (deaths_c, 111 / 325)):
        assert abs(count - 325 * p) <= 4 * math.sqrt(325 * p * (1 - p))


def test_synth_spec_validation():
    with pytest.raises(DomainError):
        SynthSpec(death_treated=1.5)
    with pytest.raises(DomainError):
        SynthSpec.from_dict({"N": 10, "mystery": 1})
    assert SynthSpec.from_dict(DEMO_SPEC.to_dict()) == DEMO_SPEC


def test_demo_experiment_shape():
    obs = demo_experiment()
    assert (obs.n, obs.m) == (325, 325)
    treated = obs.sorted_arm(True)
    control = obs.sorted_arm(False)
    assert sum(x == DEATH for x in treated) == 16
    assert sum(x == DEATH for x in control) == 111
    assert sum(1 for x in treated if x != DEATH and x.score < 3.5) == 66
    assert all(x.score >= 3.5 for x in control if x != DEATH)
    expect_t = {41: "3.10", 82: "3.49", 163: "4.19", 244: "4.79", 285: "5.20"}
    expect_c = {138: "3.81", 189: "4.16", 221: "4.43", 266: "4.94", 267: "4.98", 302: "5.58"}
    assert {k: str(order_stat(treated, k)) for k in expect_t} == expect_t
    assert {k: str(order_stat(control, k)) for k in expect_c} == expect_c
    cut = obs.sorted_arm(True, DeathPlacement(3.5))
    assert str(order_stat(cut, 41)) == "3.23"


def test_sharp_null_population():
    obs = demo_experiment()
    pop = sharp_null_population(obs)
    assert all(rt == rc for rt, rc in pop.subjects)
    assert observe(pop, Assignment(obs.z)).outcomes == obs.outcomes
