import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rankcoarse.core import DataError, Ranking, Ordering
from rankcoarse.models import (
    MallowsParams,
    PLParams,
    RankingDistribution,
    enumerate_orderings,
    ground_truth,
    mallows_normalizer,
    mallows_normalizer_bruteforce,
    mallows_probability,
    mallows_sample,
    ordering_probabilities,
    pairwise_marginals,
    pl_marginal,
    pl_mode,
    pl_pairwise_marginal,
    pl_probability,
    pl_sample,
    pl_subset_probability,
    sample_orderings,
)

import oracles

# Mallows normaliser for K = 3, phi = 1, by enumerating the six rankings
Z3_PHI1 = 2.0562165171839744


def within_sigma(count, n, p, k=3.0):
    return abs(count - n * p) <= k * math.sqrt(n * p * (1 - p)) + 1e-9


def weights(k_min=2, k_max=6):
    return st.integers(k_min, k_max).flatmap(
        lambda k: st.lists(st.floats(0.05, 20.0), min_size=k, max_size=k)
    )


# ---------------------------------------------------------------- PL


def test_pl_params_validation():
    with pytest.raises(DataError):
        PLParams((1.0, 0.0))
    with pytest.raises(DataError):
        PLParams((1.0, float("inf")))
    with pytest.raises(DataError):
        PLParams(())
    assert PLParams((2, 2)).normalized().tolist() == [0.5, 0.5]


def test_pl_probability_examples():
    theta = PLParams((14, 5, 1))
    assert pl_probability(theta, Ranking((1, 2, 3)), exact=True) == Fraction(7, 12)
    for perm in itertools.permutations((1, 2, 3)):
        assert pl_probability(PLParams((1, 1, 1)), Ranking(perm)) == pytest.approx(1 / 6, abs=1e-15)
        r = Ranking(perm)
        assert pl_probability(theta, r, exact=True) == pl_probability(PLParams((28, 10, 2)), r, exact=True)


def test_pl_probability_dimension_mismatch():
    with pytest.raises(ValueError):
        pl_probability(PLParams((1, 2)), Ranking((1, 2, 3)))


@given(weights(), st.floats(0.01, 100.0))
def test_pl_scale_invariance(theta, c):
    a, b = PLParams(tuple(theta)), PLParams(tuple(t * c for t in theta))
    orderings = enumerate_orderings(len(theta))
    assert np.max(np.abs(ordering_probabilities(a, orderings) - ordering_probabilities(b, orderings))) <= 1e-12


@given(weights(1, 6))
def test_pl_mass_sums_to_one_and_matches_oracle(theta):
    model = PLParams(tuple(theta))
    orderings = enumerate_orderings(model.K)
    probs = ordering_probabilities(model, orderings)
    assert abs(probs.sum() - 1.0) <= 1e-12
    table = oracles.pl_table([Fraction(t) for t in theta])
    for o, p in zip(orderings, probs):
        assert abs(float(table[tuple(o + 1)]) - p) <= 1e-12


def test_pl_sample_frequencies():
    rng = np.random.default_rng(1)
    n = 100_000
    o = sample_orderings(PLParams((1, 1)), n, rng)
    assert within_sigma(int((o[:, 0] == 0).sum()), n, 0.5)
    o = sample_orderings(PLParams((14, 5, 1)), n, rng)
    assert within_sigma(int(np.all(o == [0, 1, 2], axis=1).sum()), n, 7 / 12)
    assert within_sigma(int((o[:, 0] == 0).sum()), n, 14 / 20)


def test_pl_sample_single_and_determinism():
    a = pl_sample(PLParams((3, 2, 1)), np.random.default_rng(5))
    b = pl_sample(PLParams((3, 2, 1)), np.random.default_rng(5))
    assert a == b and isinstance(a, Ranking)
    x = sample_orderings(PLParams((3, 2, 1)), 50, np.random.default_rng(9))
    y = sample_orderings(PLParams((3, 2, 1)), 50, np.random.default_rng(9))
    assert np.array_equal(x, y)


def test_pl_pairwise_marginal_examples():
    theta = PLParams((14, 5, 1))
    assert pl_pairwise_marginal(theta, 1, 2, exact=True) == Fraction(840, 1140)
    assert pl_pairwise_marginal(theta, 1, 3, exact=True) == Fraction(1064, 1140)
    assert pl_pairwise_marginal(PLParams((3, 3)), 1, 2) == 0.5
    with pytest.raises(ValueError):
        pl_pairwise_marginal(theta, 2, 2)


def test_pl_marginal_examples():
    theta = PLParams((14, 5, 1))
    assert pl_marginal(theta, [1, 3]).theta == (14, 1)
    assert pl_marginal(theta, [1, 2, 3]) == theta
    with pytest.raises(ValueError):
        pl_marginal(theta, [])
    # P(a2 before a3) under (2, 3, 5), summed over all six rankings
    table = oracles.pl_table((2, 3, 5))
    brute = sum(p for o, p in table.items() if o.index(2) < o.index(3))
    assert brute == Fraction(3, 8)
    assert pl_subset_probability(PLParams((2, 3, 5)), [2, 3], exact=True) == Fraction(3, 8)


@given(weights(2, 6), st.data())
def test_pl_marginal_closure(theta, data):
    K = len(theta)
    size = data.draw(st.integers(1, K))
    subset = data.draw(st.permutations(list(range(1, K + 1))))[:size]
    table = oracles.pl_table([Fraction(t) for t in theta])
    brute = sum(p for o, p in table.items() if [x for x in o if x in subset] == list(subset))
    assert abs(float(brute) - pl_subset_probability(PLParams(tuple(theta)), subset)) <= 1e-12


def test_pl_mode_examples():
    assert pl_mode(PLParams((14, 5, 1))).ranks == (1, 2, 3)
    assert pl_mode(PLParams((1, 5, 14))).ordering.items == (3, 2, 1)
    theta = (2, 9, 4, 7)
    table = oracles.pl_table(theta)
    best = max(table, key=table.get)
    assert pl_mode(PLParams(theta)).ordering.items == best
    assert pl_mode(PLParams((2, 5, 5, 1))).ordering.items == (2, 3, 1, 4)


@given(weights(2, 6).filter(lambda t: len(set(t)) == len(t)))
def test_pl_mode_is_argmax(theta):
    model = PLParams(tuple(theta))
    orderings = enumerate_orderings(model.K)
    probs = ordering_probabilities(model, orderings)
    assert tuple(orderings[int(np.argmax(probs))] + 1) == pl_mode(model).ordering.items


# ---------------------------------------------------------------- Mallows


def test_mallows_params_validation():
    with pytest.raises(DataError):
        MallowsParams(Ranking((1, 2)), -0.5)


def test_mallows_probability_examples():
    ref = Ranking((1, 2, 3))
    for perm in itertools.permutations((1, 2, 3)):
        assert mallows_probability(MallowsParams(ref, 0.0), Ranking(perm)) == pytest.approx(1 / 6)
    assert mallows_probability(MallowsParams(ref, 1.0), ref) == pytest.approx(1 / Z3_PHI1, abs=1e-14)
    total = sum(mallows_probability(MallowsParams(ref, 1.0), Ranking(p)) for p in itertools.permutations((1, 2, 3)))
    assert total == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("K", range(1, 8))
@pytest.mark.parametrize("phi", [0.0, 0.3, 1.0, 2.5])
def test_mallows_normalizer_closed_form(K, phi):
    assert mallows_normalizer(K, phi) == pytest.approx(mallows_normalizer_bruteforce(K, phi), rel=1e-12)


@given(st.integers(1, 6).flatmap(lambda k: st.permutations(list(range(1, k + 1)))), st.floats(0.0, 3.0))
def test_mallows_mass_and_mode(ref, phi):
    model = MallowsParams(Ranking(tuple(ref)), phi)
    orderings = enumerate_orderings(model.K)
    probs = ordering_probabilities(model, orderings)
    assert abs(probs.sum() - 1.0) <= 1e-12
    table = oracles.mallows_table(tuple(ref), phi)
    assert max(abs(table[tuple(o + 1)] - p) for o, p in zip(orderings, probs)) <= 1e-12
    if phi >= 0.01:
        best = orderings[int(np.argmax(probs))] + 1
        assert Ranking.from_ordering(tuple(best)) == model.reference


def test_mallows_sample_uniform_chi_square():
    from scipy.stats import chisquare

    rng = np.random.default_rng(3)
    o = sample_orderings(MallowsParams(Ranking.identity(4), 0.0), 100_000, rng)
    codes = np.unique(o @ (4 ** np.arange(4)), return_counts=True)[1]
    assert len(codes) == 24
    assert chisquare(codes).pvalue > 1e-3


def test_mallows_sample_frequencies():
    rng = np.random.default_rng(4)
    ref = Ranking((2, 3, 1))
    model = MallowsParams(ref, 2.0)
    n = 100_000
    o = sample_orderings(model, n, rng)
    hits = int(np.all(o + 1 == ref.ordering.items, axis=1).sum())
    assert within_sigma(hits, n, mallows_probability(model, ref))
    o = sample_orderings(MallowsParams(ref, 20.0), 10_000, rng)
    assert np.all(o + 1 == ref.ordering.items, axis=1).mean() >= 0.999


@pytest.mark.parametrize("K", [3, 4, 5, 6])
def test_mallows_sampler_matches_enumeration(K):
    from scipy.stats import chisquare

    rng = np.random.default_rng(K)
    ref = Ranking(tuple(rng.permutation(K) + 1))
    model = MallowsParams(ref, 0.7)
    n = 60_000
    o = sample_orderings(model, n, rng)
    orderings = enumerate_orderings(K)
    expected = ordering_probabilities(model, orderings) * n
    index = {tuple(x): k for k, x in enumerate(orderings)}
    observed = np.bincount([index[tuple(x)] for x in o], minlength=len(orderings))
    assert chisquare(observed, expected).pvalue > 1e-4


def test_mallows_sample_determinism():
    m = MallowsParams(Ranking((3, 1, 2)), 0.5)
    assert mallows_sample(m, np.random.default_rng(2)) == mallows_sample(m, np.random.default_rng(2))


# ---------------------------------------------------------------- distributions and marginals


def test_ranking_distribution_validation(tmp_path):
    with pytest.raises(DataError):
        RankingDistribution({Ranking((1, 2)): Fraction(1, 2)})
    d = RankingDistribution({Ranking((1, 2)): Fraction(1, 3), Ranking((2, 1)): Fraction(2, 3)})
    assert d.is_rational and d.probability(Ranking((2, 1))) == Fraction(2, 3)
    path = tmp_path / "d.txt"
    path.write_text("# ranks then probability\n1 2 1/4\n2 1 0.75\n")
    e = RankingDistribution.from_file(path)
    assert e.probability(Ranking((1, 2))) == Fraction(1, 4)
    path.write_text("1 2 half\n")
    with pytest.raises(DataError, match=":1:"):
        RankingDistribution.from_file(path)


def test_ground_truth():
    assert ground_truth(PLParams((1, 3, 2))).ordering == Ordering((2, 3, 1))
    assert ground_truth(MallowsParams(Ranking((2, 1, 3)), 1.0)) == Ranking((2, 1, 3))


@pytest.mark.parametrize(
    "model",
    [PLParams((3.0, 1.5, 0.5, 2.0)), MallowsParams(Ranking((2, 4, 1, 3)), 0.8)],
    ids=["pl", "mallows"],
)
def test_pairwise_marginals_vs_oracle(model):
    K = model.K
    if isinstance(model, PLParams):
        table = oracles.pl_table([Fraction(t) for t in model.theta])
    else:
        table = oracles.mallows_table(model.reference.ranks, model.dispersion)
    brute = oracles.pair_marginals(table, K)
    p = pairwise_marginals(model)
    assert np.max(np.abs(p - np.array(brute, dtype=float))) <= 1e-12


def test_pairwise_marginals_exact():
    p = pairwise_marginals(PLParams((14, 5, 1)), exact=True)
    assert p[0, 1] == Fraction(14, 19) and p[2, 1] == Fraction(1, 6)
