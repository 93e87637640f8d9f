"""Independent reference implementations used across the test modules.

Everything here is deliberately naive: exhaustive enumeration over
subsets and first-principles product formulas, sharing no code with the
package so disagreements point at real defects.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations


def pascal_rows(limit: int) -> list[list[int]]:
    """Rows 0..limit of Pascal's triangle, built purely additively."""
    rows = [[1]]
    for _ in range(limit):
        prev = rows[-1]
        rows.append([1] + [prev[i] + prev[i + 1] for i in range(len(prev) - 1)] + [1])
    return rows


def binom_product(m: int, r: int) -> int:
    """C(m, r) via the multiplicative formula, reduced incrementally."""
    if r < 0 or r > m:
        return 0
    value = Fraction(1)
    for i in range(1, min(r, m - r) + 1):
        value *= Fraction(m - i + 1, i)
    assert value.denominator == 1
    return value.numerator


def _mask(indices) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def urn_miss_probability(n: int, q: int, alpha: int) -> Fraction:
    """Miss probability by exhausting every replacement and probe subset.

    Core members are nodes 0..q-1.  A probe subset misses when it shares
    no node with the core members that escaped replacement.
    """
    green = (1 << q) - 1
    probe_masks = [_mask(c) for c in combinations(range(n), q)]
    misses = 0
    total = 0
    for repl in combinations(range(n), alpha):
        survivors = green & ~_mask(repl)
        for pm in probe_masks:
            total += 1
            if pm & survivors == 0:
                misses += 1
    return Fraction(misses, total)


def overlap_pmf(n: int, q: int, alpha: int) -> dict[int, Fraction]:
    """Distribution of |replacement set ∩ core| over all replacement sets."""
    green = (1 << q) - 1
    counts: dict[int, int] = {}
    total = 0
    for repl in combinations(range(n), alpha):
        k = bin(_mask(repl) & green).count("1")
        counts[k] = counts.get(k, 0) + 1
        total += 1
    return {k: Fraction(v, total) for k, v in sorted(counts.items())}


def avoidance_probability(n: int, survivors: int, q: int) -> Fraction:
    """Probability that q probe nodes avoid a fixed survivor set, enumerated."""
    target = _mask(range(survivors))
    good = 0
    total = 0
    for probe in combinations(range(n), q):
        total += 1
        if _mask(probe) & target == 0:
            good += 1
    return Fraction(good, total)


def avoidance_product(n: int, q: int, k: int) -> Fraction:
    """The per-term product form: prod_{i=1..q} (1 - (q-k)/(n-i+1))."""
    value = Fraction(1)
    for i in range(1, q + 1):
        value *= 1 - Fraction(q - k, n - i + 1)
    return value


def churn_ratio_exact(c: Fraction, delta: int) -> Fraction:
    """1 - (1-c)^delta in exact rational arithmetic."""
    return 1 - (1 - c) ** delta
