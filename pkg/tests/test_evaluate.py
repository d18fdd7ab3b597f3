from itertools import combinations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.metrics import adjusted_rand_score

from topoclust.errors import EmptyInputError, ValidationError
from topoclust.evaluate import (
    adjusted_rand_index,
    confusion_matrix,
    evaluate,
    permutation_test,
    purity,
)

partitions = st.lists(st.integers(0, 4), min_size=2, max_size=30)


def pair_counting_ari(a, b):
    """ARI straight from the four pair counts, no contingency table."""
    same_a = same_b = both = total = 0
    for i, j in combinations(range(len(a)), 2):
        sa, sb = a[i] == a[j], b[i] == b[j]
        same_a += sa
        same_b += sb
        both += sa and sb
        total += 1
    expected = same_a * same_b / total
    best = (same_a + same_b) / 2
    return 0.0 if best == expected else (both - expected) / (best - expected)


def degenerate(a, b):
    """True when chance agreement equals the maximum (each side one block or all singletons)."""
    trivial = lambda x: len(set(x)) in (1, len(x))
    return trivial(a) and trivial(b)


# ---------------------------------------------------------------- purity


def test_purity_examples():
    assert purity([0, 0, 1, 1], ["A", "A", "A", "B"]) == 0.75
    labels = ["L1"] * 20 + ["L2"] * 20 + ["L3"] * 20
    assert purity([0] * 60, labels) == pytest.approx(1 / 3)
    assert purity([2] * 20 + [0] * 20 + [1] * 20, labels) == 1.0


def test_purity_errors():
    with pytest.raises(ValidationError):
        purity([0, 1], ["A"])
    with pytest.raises(EmptyInputError):
        purity([], [])


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=40),
       st.permutations(range(4)), st.permutations(range(4)))
def test_purity_relabel_invariant(pairs, pa, pb):
    a = [x for x, _ in pairs]
    b = [y for _, y in pairs]
    assert purity(a, b) == purity([pa[x] for x in a], [f"z{pb[y]}" for y in b])


# ---------------------------------------------------------------- ARI


def test_ari_examples():
    assert adjusted_rand_index([0, 0, 1, 1], [0, 0, 1, 1]) == 1.0
    assert adjusted_rand_index([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0
    # two independent oracles agree on -1/2 for this pair
    assert adjusted_rand_index([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5, abs=1e-15)
    assert adjusted_rand_score([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5)
    assert pair_counting_ari([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5)


def test_ari_trivial_partitions():
    assert adjusted_rand_index([0, 0, 0], [1, 1, 1]) == 0.0
    assert adjusted_rand_index([0, 1, 2], [0, 1, 2]) == 0.0


def test_ari_errors():
    with pytest.raises(ValidationError):
        adjusted_rand_index([0, 1], [0])
    with pytest.raises(EmptyInputError):
        adjusted_rand_index([0], [0])


@given(partitions.flatmap(lambda a: st.tuples(
    st.just(a), st.lists(st.integers(0, 4), min_size=len(a), max_size=len(a)))))
def test_ari_matches_oracles(pair):
    a, b = pair
    ours = adjusted_rand_index(a, b)
    assert ours == pytest.approx(pair_counting_ari(a, b), abs=1e-12)
    assert ours == adjusted_rand_index(b, a)
    assert -1.0 <= ours <= 1.0
    if not degenerate(a, b):
        assert ours == pytest.approx(adjusted_rand_score(a, b), abs=1e-12)


@given(partitions, st.permutations(range(5)))
def test_ari_one_iff_same_up_to_relabeling(a, perm):
    relabeled = [perm[x] for x in a]
    if not degenerate(a, relabeled):
        assert adjusted_rand_index(a, relabeled) == 1.0


def test_ari_chance_level():
    rng = np.random.default_rng(3)
    a = np.repeat(np.arange(3), 20)
    scores = [adjusted_rand_index(a, rng.permutation(a)) for _ in range(1000)]
    assert abs(np.mean(scores)) < 0.05


# ---------------------------------------------------------------- permutation test


def test_perfect_clustering_has_zero_p():
    labels = np.repeat(["L1", "L2", "L3"], 20)
    assign = np.repeat([0, 1, 2], 20)
    assert permutation_test(assign, labels, 2000, seed=1) == 0.0
    assert permutation_test(assign, labels, 2000, seed=1, smoothed=True) == 1 / 2001


def test_single_permutation_not_exceeding():
    assert permutation_test([0, 0, 1, 1], ["A", "A", "B", "B"], 1, seed=0) == 0.0


def test_permutation_errors():
    with pytest.raises(ValidationError):
        permutation_test([0, 1], ["A"], 10)
    with pytest.raises(ValidationError):
        permutation_test([0, 1], ["A", "B"], 0)


def test_permutation_calibration():
    rng = np.random.default_rng(8)
    labels = np.repeat([0, 1, 2], 20)
    above = sum(permutation_test(rng.integers(0, 3, 60), labels, 500, seed=t) > 0.05
                for t in range(100))
    assert above >= 90


def test_p_value_monotone_in_purity():
    labels = np.repeat([0, 1, 2], 20)
    truth = np.repeat([0, 1, 2], 20)
    rng = np.random.default_rng(0)
    order = rng.permutation(60)
    prev_purity, prev_p = None, None
    for flips in range(0, 41, 5):
        assign = truth.copy()
        idx = order[:flips]
        assign[idx] = (assign[idx] + 1) % 3
        s = purity(assign, labels)
        p = permutation_test(assign, labels, 3000, seed=4)
        if prev_purity is not None and s <= prev_purity:
            assert p >= prev_p
        prev_purity, prev_p = s, p


def test_permutation_deterministic_across_workers():
    rng = np.random.default_rng(2)
    labels = np.repeat([0, 1, 2], 20)
    assign = rng.integers(0, 3, 60)
    one = permutation_test(assign, labels, 12_000, seed=5, workers=1)
    many = permutation_test(assign, labels, 12_000, seed=5, workers=3)
    assert one == many == permutation_test(assign, labels, 12_000, seed=5)


# ---------------------------------------------------------------- confusion


def test_confusion_examples():
    cm = confusion_matrix([0, 0, 1], ["A", "B", "B"])
    assert cm.counts.tolist() == [[1, 1], [0, 1]]
    assert cm.labels == ("A", "B") and cm.majority == ("A", "B")
    single = confusion_matrix([0] * 5, ["A", "A", "B", "C", "C"])
    assert single.counts.tolist() == [[2, 1, 2]]


def test_confusion_perfect_is_diagonal_under_majority():
    cm = confusion_matrix([2, 2, 0, 0, 1], ["A", "A", "B", "B", "C"])
    ordered = cm.by_majority()
    assert np.array_equal(ordered, np.diag(np.diag(ordered)))


@given(st.lists(st.tuples(st.integers(0, 3), st.sampled_from("ABC")), min_size=1, max_size=40))
def test_confusion_margins_and_purity(pairs):
    a = [x for x, _ in pairs]
    b = [y for _, y in pairs]
    cm = confusion_matrix(a, b)
    assert cm.counts.sum(axis=1).tolist() == [a.count(c) for c in cm.clusters]
    assert cm.counts.sum(axis=0).tolist() == [b.count(lab) for lab in cm.labels]
    assert cm.counts.max(axis=1).sum() / len(a) == purity(a, b)


def test_evaluate_report():
    rep = evaluate([0, 0, 1, 1], ["A", "A", "B", "B"], n_perms=100, seed=0)
    assert rep.accuracy == 1.0 and rep.ari == 1.0 and rep.p_value == 0.0
    assert rep.to_json()["confusion"]["counts"] == [[2, 0], [0, 2]]
    assert evaluate([0, 1], ["A", "B"], n_perms=None).p_value is None
