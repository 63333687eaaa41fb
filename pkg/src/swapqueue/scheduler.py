"""Swap schedule construction.

A schedule is a 0/1 sub-permutation matrix: at most one swap per source row
and per output column.  The workhorse is the exact max-weight schedule; the
factorial enumerator exists as an independent oracle, and random / delayed
policies serve as baselines for stability comparisons.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = [
    "weight",
    "max_weight_permutation",
    "max_weight_schedule",
    "brute_force_max_weight",
    "masked_max_weight",
    "random_schedule",
    "delayed_schedule",
    "schedule_norm",
    "is_sub_permutation",
]

# n! enumeration is refused above this size.
BRUTE_FORCE_LIMIT = 9

# All scores must stay exactly representable in float64 for the single-solve
# tie-break encoding; above this we fall back to the constructive route.
_FLOAT_EXACT = 2**53


def _as_square(values, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {arr.shape}")
    return arr


def _as_state(values) -> np.ndarray:
    z = _as_square(values, "z")
    if np.any(z < 0):
        raise ValueError("queue state entries must be non-negative")
    if not np.issubdtype(z.dtype, np.integer):
        zi = z.astype(np.int64)
        if np.any(zi != z):
            raise ValueError("queue state entries must be integers")
        z = zi
    return z.astype(np.int64)


def weight(schedule, z) -> float:
    """Inner product of a schedule with the queue state."""
    s = _as_square(schedule, "schedule")
    zm = _as_square(z, "z")
    if s.shape != zm.shape:
        raise ValueError(f"dimension mismatch: schedule {s.shape} vs z {zm.shape}")
    return float((s * zm).sum())


def _permutation_to_schedule(perm: Sequence[int], n: int) -> np.ndarray:
    s = np.zeros((n, n), dtype=np.int64)
    s[np.arange(n), np.asarray(perm, dtype=np.int64)] = 1
    return s


def _lex_argmax_encoded(z: np.ndarray) -> np.ndarray | None:
    """Single assignment solve returning the lex-smallest max-weight permutation.

    Each permutation is penalized by its base-(n+1) positional code, scaled so
    that any unit of real weight dominates any code difference.  The perturbed
    problem then has a unique optimum: the lexicographically smallest
    maximizer of the original weights.  Returns None when the encoded scores
    would lose integer exactness in float64.
    """
    n = z.shape[0]
    base = n + 1
    scale = base**n
    zmax = int(z.max(initial=0))
    # largest possible |sum of n scores|, computed in exact Python ints
    if n * scale * (zmax + base) >= _FLOAT_EXACT:
        return None
    col_penalty = np.array([float(base ** (n - 1 - i)) for i in range(n)])
    scores = z.astype(np.float64) * float(scale)
    scores -= col_penalty[:, None] * np.arange(n, dtype=np.float64)[None, :]
    _, cols = linear_sum_assignment(scores, maximize=True)
    return cols.astype(np.int64)


def _lex_argmax_constructive(z: np.ndarray) -> np.ndarray:
    """Row-by-row fixing of the lex-smallest optimal assignment.

    For each row in order, pick the smallest column that still allows the
    remaining rows to reach the optimal total.  All values are integer-valued
    floats below 2**53, so the equality tests are exact.
    """
    n = z.shape[0]
    zf = z.astype(np.float64)

    def best_total(rows: list[int], cols: list[int]) -> float:
        if not rows:
            return 0.0
        sub = zf[np.ix_(rows, cols)]
        r, c = linear_sum_assignment(sub, maximize=True)
        return float(sub[r, c].sum())

    cols_left = list(range(n))
    perm = np.empty(n, dtype=np.int64)
    target = best_total(list(range(n)), cols_left)
    for i in range(n):
        rest = list(range(i + 1, n))
        for j, k in enumerate(cols_left):
            remainder = best_total(rest, cols_left[:j] + cols_left[j + 1 :])
            if float(zf[i, k]) + remainder == target:
                perm[i] = k
                cols_left.pop(j)
                target -= float(zf[i, k])
                break
    return perm


def max_weight_permutation(z) -> np.ndarray:
    """Column indices of the exact max-weight schedule, row by row."""
    zm = _as_state(z)
    perm = _lex_argmax_encoded(zm)
    if perm is None:
        perm = _lex_argmax_constructive(zm)
    return perm


def max_weight_schedule(z) -> np.ndarray:
    """Exact max-weight full permutation schedule.

    Ties are broken toward the lexicographically smallest permutation (read
    as the assigned column per row, top row first), so the result is a total
    function of the queue state.
    """
    zm = _as_state(z)
    return _permutation_to_schedule(max_weight_permutation(zm), zm.shape[0])


def brute_force_max_weight(z) -> np.ndarray:
    """Oracle max-weight schedule via full enumeration of all n! permutations.

    Strictly-improving scan over permutations in lexicographic order yields
    the same tie-break as ``max_weight_schedule`` by an independent route.
    """
    zm = _as_state(z)
    n = zm.shape[0]
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(
            f"refusing to enumerate {n}! permutations (limit n <= {BRUTE_FORCE_LIMIT})"
        )
    best_w = -1
    best_perm: tuple[int, ...] | None = None
    for perm in itertools.permutations(range(n)):
        w = 0
        for i in range(n):
            w += int(zm[i, perm[i]])
        if w > best_w:
            best_w = w
            best_perm = perm
    assert best_perm is not None
    return _permutation_to_schedule(best_perm, n)


def _available_columns(available_outputs: Iterable[int], n: int) -> list[int]:
    cols = sorted({int(k) for k in available_outputs})
    if cols and (cols[0] < 0 or cols[-1] >= n):
        raise ValueError(f"available outputs must lie in 0..{n - 1}")
    return cols


def masked_max_weight(z, available_outputs: Iterable[int]) -> np.ndarray:
    """Max-weight sub-permutation restricted to the given output columns.

    Masked columns are zeroed before the solve, then any assignment landing
    on them is dropped; what remains is a maximum-weight matching into the
    surviving outputs.
    """
    zm = _as_state(z)
    n = zm.shape[0]
    cols = _available_columns(available_outputs, n)
    if not cols:
        return np.zeros((n, n), dtype=np.int64)
    keep = np.zeros(n, dtype=bool)
    keep[cols] = True
    masked_state = np.where(keep[None, :], zm, 0)
    s = max_weight_schedule(masked_state)
    s[:, ~keep] = 0
    return s


def random_schedule(
    rng: np.random.Generator, n: int, available_outputs: Iterable[int]
) -> np.ndarray:
    """Uniformly random maximal matching of sources to the available outputs.

    Sources are ordered by ranking n uniforms; the first m sources in that
    order take the m available outputs in ascending column order.  Every
    injective assignment is equally likely.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    cols = _available_columns(available_outputs, n)
    s = np.zeros((n, n), dtype=np.int64)
    if not cols:
        return s
    order = np.argsort(rng.random(n), kind="stable")
    for j, k in enumerate(cols):
        s[order[j], k] = 1
    return s


def delayed_schedule(
    history: Sequence[np.ndarray], t: int, d: int, n: int | None = None
) -> np.ndarray:
    """Schedule computed d periods ago, or the zero schedule before any exists.

    ``history[j]`` must hold the max-weight schedule of period j.  With d = 0
    this reduces to the current entry, so the caller is expected to have
    appended it already.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if d < 0:
        raise ValueError("d must be >= 0")
    idx = t - d
    if idx < 0:
        if n is None:
            if not history:
                raise ValueError("empty history needs an explicit n for the zero schedule")
            n = np.asarray(history[0]).shape[0]
        return np.zeros((n, n), dtype=np.int64)
    if idx >= len(history):
        raise IndexError(f"history holds {len(history)} schedules, period {idx} missing")
    return np.asarray(history[idx], dtype=np.int64).copy()


def schedule_norm(schedule) -> float:
    """Largest row or column sum; 0 for the empty schedule, 1 otherwise."""
    s = _as_square(schedule, "schedule")
    return float(max(s.sum(axis=1).max(), s.sum(axis=0).max()))


def is_sub_permutation(schedule) -> bool:
    """True when entries are 0/1 with every row and column sum at most 1."""
    s = _as_square(schedule, "schedule")
    if not np.all((s == 0) | (s == 1)):
        return False
    return bool(s.sum(axis=1).max(initial=0) <= 1 and s.sum(axis=0).max(initial=0) <= 1)
