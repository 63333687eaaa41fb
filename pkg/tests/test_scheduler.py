import itertools

import numpy as np
import pytest

from swapqueue.scheduler import (
    brute_force_max_weight,
    delayed_schedule,
    is_sub_permutation,
    masked_max_weight,
    max_weight_permutation,
    max_weight_schedule,
    random_schedule,
    schedule_norm,
    weight,
)


def perm_to_schedule(perm):
    n = len(perm)
    s = np.zeros((n, n), dtype=np.int64)
    for i, k in enumerate(perm):
        s[i, k] = 1
    return s


def test_weight_examples():
    z = np.array([[3, 1], [2, 5]])
    s = np.eye(2, dtype=np.int64)
    assert weight(s, z) == 8.0
    anti = np.array([[0, 1], [1, 0]])
    assert weight(anti, z) == 3.0


def test_weight_shape_mismatch():
    with pytest.raises(ValueError):
        weight(np.eye(2), np.zeros((3, 3)))


def test_max_weight_spot():
    z = np.array([[3, 1], [2, 5]])
    s = max_weight_schedule(z)
    assert np.array_equal(s, np.eye(2, dtype=np.int64))
    z2 = np.array([[1, 9], [9, 1]])
    s2 = max_weight_schedule(z2)
    assert np.array_equal(s2, np.array([[0, 1], [1, 0]]))


def test_max_weight_tie_breaks_lexicographically():
    # both diagonals score 9; identity assigns input 0 the smaller output
    z = np.array([[2, 2, 0], [2, 2, 0], [0, 0, 5]])
    assert max_weight_permutation(z).tolist() == [0, 1, 2]
    # all-equal matrix: identity is the lexicographically least optimum
    assert max_weight_permutation(np.ones((4, 4))).tolist() == [0, 1, 2, 3]
    assert max_weight_permutation(np.zeros((3, 3))).tolist() == [0, 1, 2]


def test_max_weight_deterministic_and_scale_invariant():
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        z = rng.integers(0, 50, size=(n, n))
        p1 = max_weight_permutation(z)
        assert np.array_equal(p1, max_weight_permutation(z))
        assert np.array_equal(p1, max_weight_permutation(3 * z))


def test_max_weight_matches_exhaustive_search():
    # smaller sweep here; the acceptance suite runs the full workload
    rng = np.random.default_rng(99)
    for _ in range(300):
        n = int(rng.integers(2, 7))
        z = rng.integers(0, 50, size=(n, n))
        assert np.array_equal(max_weight_schedule(z), brute_force_max_weight(z))


def test_max_weight_beats_every_permutation():
    rng = np.random.default_rng(17)
    for _ in range(20):
        z = rng.integers(0, 30, size=(4, 4))
        best = weight(max_weight_schedule(z), z)
        for perm in itertools.permutations(range(4)):
            assert best >= weight(perm_to_schedule(perm), z)


def test_max_weight_handles_large_entries():
    # forces the constructive fallback past the float53 exactness guard
    z = np.full((5, 5), 2**40, dtype=np.int64)
    z[2, 3] += 1
    perm = max_weight_permutation(z)
    assert perm[2] == 3
    assert sorted(perm) == [0, 1, 2, 3, 4]


def test_brute_force_guard():
    with pytest.raises(ValueError):
        brute_force_max_weight(np.ones((10, 10)))


def test_masked_max_weight():
    z = np.array([[3, 1], [2, 5]])
    s = masked_max_weight(z, available_outputs={0})
    assert np.array_equal(s, np.array([[1, 0], [0, 0]]))
    # empty mask yields the empty schedule
    s0 = masked_max_weight(z, available_outputs=set())
    assert np.array_equal(s0, np.zeros((2, 2), dtype=np.int64))
    # full mask reduces to the unmasked solution
    assert np.array_equal(
        masked_max_weight(z, available_outputs={0, 1}), max_weight_schedule(z)
    )


def test_masked_schedule_respects_mask():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(2, 7))
        z = rng.integers(0, 20, size=(n, n))
        keep = int(rng.integers(0, n + 1))
        avail = set(rng.choice(n, size=keep, replace=False).tolist())
        s = masked_max_weight(z, available_outputs=avail)
        assert is_sub_permutation(s)
        blocked = [k for k in range(n) if k not in avail]
        assert not s[:, blocked].any()


def test_random_schedule_structure():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        keep = int(rng.integers(0, n + 1))
        avail = set(rng.choice(n, size=keep, replace=False).tolist())
        s = random_schedule(rng, n, avail)
        assert is_sub_permutation(s)
        assert int(s.sum()) == keep
        blocked = [k for k in range(n) if k not in avail]
        assert not s[:, blocked].any()


def test_random_schedule_uniform_over_permutations():
    # with all outputs available every full permutation should be equally
    # likely; chi-square over the 24 cells at a pinned seed
    rng = np.random.default_rng(2024)
    n, draws = 4, 12_000
    counts = {p: 0 for p in itertools.permutations(range(n))}
    avail = set(range(n))
    for _ in range(draws):
        s = random_schedule(rng, n, avail)
        perm = tuple(int(np.argmax(s[i])) for i in range(n))
        counts[perm] += 1
    expected = draws / 24
    stat = sum((c - expected) ** 2 / expected for c in counts.values())
    # chi2 ppf(0.999, df=23) is about 49.7
    assert stat < 49.7


def test_delayed_schedule():
    history = [np.eye(2, dtype=np.int64) * (t + 1) for t in range(5)]
    # warm-up returns the empty schedule
    assert np.array_equal(delayed_schedule(history, 1, 3, n=2), np.zeros((2, 2)))
    assert np.array_equal(delayed_schedule(history, 4, 3), history[1])
    # zero delay reads the current entry
    assert np.array_equal(delayed_schedule(history, 2, 0), history[2])
    with pytest.raises(IndexError):
        delayed_schedule(history, 9, 2)
    with pytest.raises(ValueError):
        delayed_schedule([], 0, 2)


def test_schedule_norm():
    # max row/column sum: 1 for any nonempty sub-permutation
    assert schedule_norm(np.eye(3)) == 1
    assert schedule_norm(np.zeros((3, 3))) == 0
    s = np.zeros((4, 4))
    s[0, 1] = 1
    s[2, 3] = 1
    assert schedule_norm(s) == 1
    assert schedule_norm(np.ones((2, 2))) == 2


def test_is_sub_permutation():
    assert is_sub_permutation(np.eye(3, dtype=np.int64))
    assert is_sub_permutation(np.zeros((2, 2), dtype=np.int64))
    bad_row = np.array([[1, 1], [0, 0]])
    assert not is_sub_permutation(bad_row)
    bad_col = np.array([[1, 0], [1, 0]])
    assert not is_sub_permutation(bad_col)
    assert not is_sub_permutation(np.array([[2, 0], [0, 0]]))


def test_max_weight_dominates_random_sub_permutations():
    rng = np.random.default_rng(23)
    for _ in range(30):
        n = int(rng.integers(2, 6))
        z = rng.integers(0, 40, size=(n, n))
        best = weight(max_weight_schedule(z), z)
        for _ in range(50):
            s = random_schedule(rng, n, set(range(n)))
            assert best >= weight(s, z)
