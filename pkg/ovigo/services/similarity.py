"""Character-trigram cosine similarity between short labels."""

from __future__ import annotations

import re
from collections.abc import Sequence

import numpy as np
from sklearn.feature_extraction.text import CountVectorizer
from sklearn.metrics.pairwise import cosine_similarity

_SPACES = re.compile(r"\s+")


def normalize_label(text: str) -> str:
    return _SPACES.sub(" ", text.strip().lower())


def similarity_matrix(left: Sequence[str], right: Sequence[str]) -> np.ndarray:
    """Cosine of word-padded character-trigram counts; empty labels score 0 against everything."""
    a = [normalize_label(t) for t in left]
    b = [normalize_label(t) for t in right]
    if not a or not b:
        return np.zeros((len(a), len(b)))
    if not any(a) or not any(b):
        return np.zeros((len(a), len(b)))
    vectorizer = CountVectorizer(analyzer="char_wb", ngram_range=(3, 3), lowercase=False)
    vectorizer.fit([*a, *b])
    return np.asarray(cosine_similarity(vectorizer.transform(a), vectorizer.transform(b)), dtype=np.float64)


def tag_similarity(a: str, b: str) -> float:
    return float(similarity_matrix([a], [b])[0, 0])
