"""Brute-force reference implementations used to cross-check the library.

Everything here is deliberately written from the problem statement, not from
the library code: exact rational arithmetic instead of log-space floats for
the classifier, and exhaustive enumeration instead of Lloyd iterations for
clustering. Keep it that way -- these oracles are only worth something while
they share no code path with ``pvta``.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


def naive_bayes_posteriors(
    corpus: dict[str, list[list[str]]],
    query_tokens: list[str],
    alpha: float = 1.0,
) -> dict[str, float]:
    """Posterior over intents for a tokenized query, computed exactly.

    ``corpus`` maps intent name -> list of tokenized example utterances.
    Multinomial model, additive smoothing ``alpha`` over the training
    vocabulary; query tokens outside the vocabulary are skipped. With an
    empty effective query the posterior is the prior.
    """
    a = Fraction(alpha)
    vocab = sorted({t for examples in corpus.values() for ex in examples for t in ex})
    vsize = len(vocab)
    vocab_set = set(vocab)
    total_examples = sum(len(examples) for examples in corpus.values())

    scores: dict[str, Fraction] = {}
    for intent, examples in corpus.items():
        counts: dict[str, int] = {}
        for ex in examples:
            for tok in ex:
                counts[tok] = counts.get(tok, 0) + 1
        n_tokens = sum(counts.values())
        score = Fraction(len(examples), total_examples)
        for tok in query_tokens:
            if tok not in vocab_set:
                continue
            score *= (counts.get(tok, 0) + a) / (n_tokens + a * vsize)
        scores[intent] = score

    total = sum(scores.values())
    return {intent: float(score / total) for intent, score in scores.items()}


def tally_token_counts(examples: list[list[str]]) -> dict[str, int]:
    """Plain tally of token occurrences across tokenized examples."""
    counts: dict[str, int] = {}
    for ex in examples:
        for tok in ex:
            counts[tok] = counts.get(tok, 0) + 1
    return counts


def _sse(points: list[tuple[float, ...]]) -> float:
    if not points:
        return 0.0
    dim = len(points[0])
    mean = [sum(p[d] for p in points) / len(points) for d in range(dim)]
    return sum(sum((p[d] - mean[d]) ** 2 for d in range(dim)) for p in points)


def best_bipartition(points: list[tuple[float, ...]]) -> tuple[set[int], set[int], float]:
    """Exhaustively find the 2-way split of point indices minimizing total SSE.

    Returns (group_a, group_b, sse). Feasible only for small n; the caller
    is expected to pass a handful of points.
    """
    n = len(points)
    best: tuple[set[int], set[int], float] | None = None
    for size_a in range(1, n // 2 + 1):
        for combo in itertools.combinations(range(n), size_a):
            group_a = set(combo)
            group_b = set(range(n)) - group_a
            sse = _sse([points[i] for i in group_a]) + _sse([points[i] for i in group_b])
            if best is None or sse < best[2]:
                best = (group_a, group_b, sse)
    assert best is not None, "need at least 2 points"
    return best
