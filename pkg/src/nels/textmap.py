"""Free-text to sound-class mapping and phrase-based label discovery.

Queries are resolved by cosine similarity between the query's mean word
embedding and each class label's mean word embedding; matches below the
0.15 similarity floor return no class. Embedding files use the plain-text
``<token> <f1> ... <fD>`` format of publicly distributed word-vector sets.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from nels.errors import EmbeddingFormatError, UndefinedSimilarityError
from nels.vocab import SoundClass

SIMILARITY_THRESHOLD = 0.15

_PUNCT_TO_SPACE = str.maketrans({c: " " for c in string.punctuation})


class EmbeddingVocabulary:
    """Token -> D-vector map; tokens are lowercase and unique."""

    def __init__(self, vectors: dict[str, np.ndarray], dimension: int, duplicates: int = 0):
        self._vectors = vectors
        self.dimension = dimension
        self.duplicate_count = duplicates

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, token: str) -> bool:
        return token in self._vectors

    def get(self, token: str) -> Optional[np.ndarray]:
        return self._vectors.get(token)


def load_embeddings(path: str | Path) -> EmbeddingVocabulary:
    """Parse a text embedding file; duplicates keep the last vector."""
    vectors: dict[str, np.ndarray] = {}
    dimension = None
    duplicates = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            token = parts[0].lower()
            try:
                vec = np.array([float(v) for v in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise EmbeddingFormatError(lineno, f"bad float: {exc}") from exc
            if vec.size == 0:
                raise EmbeddingFormatError(lineno, "token without vector values")
            if dimension is None:
                dimension = vec.size
            elif vec.size != dimension:
                raise EmbeddingFormatError(
                    lineno, f"expected {dimension} values, got {vec.size}"
                )
            if token in vectors:
                duplicates += 1
            vectors[token] = vec
    if dimension is None:
        raise EmbeddingFormatError(1, "empty embedding file")
    return EmbeddingVocabulary(vectors, dimension, duplicates)


def tokenize(text: str) -> list[str]:
    """Lowercase, punctuation to spaces, split on whitespace."""
    return text.lower().translate(_PUNCT_TO_SPACE).split()


def embed_text(vocab: EmbeddingVocabulary, text: str) -> Optional[np.ndarray]:
    """Mean of the in-vocabulary token vectors; None if all tokens are OOV."""
    found = [vocab.get(token) for token in tokenize(text)]
    found = [v for v in found if v is not None]
    if not found:
        return None
    return np.mean(found, axis=0)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise UndefinedSimilarityError("cosine similarity of a zero vector is undefined")
    return float(np.dot(a, b)) / (norm_a * norm_b)


@dataclass
class QueryMapping:
    query: str
    matched_class: Optional[SoundClass]
    similarity: Optional[float]


def build_class_embeddings(
    vocab: EmbeddingVocabulary, classes: Sequence[SoundClass]
) -> list[tuple[SoundClass, np.ndarray]]:
    """Label embeddings (mean of label word vectors), lexicographic order.

    Classes whose labels are fully out-of-vocabulary are excluded from
    matching.
    """
    embedded = []
    for cls in sorted(classes, key=lambda c: c.label):
        vec = embed_text(vocab, cls.label)
        if vec is not None and np.linalg.norm(vec) > 0.0:
            embedded.append((cls, vec))
    return embedded


def map_query(
    vocab: EmbeddingVocabulary,
    classes: Sequence[SoundClass],
    query: str,
    class_embeddings: Optional[list[tuple[SoundClass, np.ndarray]]] = None,
) -> QueryMapping:
    """Pick the class most similar to the query, subject to the 0.15 floor.

    The floor is inclusive. Ties go to the lexicographically smaller label.
    Returns a none-mapping when the query is fully OOV or below the floor.
    """
    query_vec = embed_text(vocab, query)
    if query_vec is None or not np.linalg.norm(query_vec) > 0.0:
        return QueryMapping(query=query, matched_class=None, similarity=None)

    if class_embeddings is None:
        class_embeddings = build_class_embeddings(vocab, classes)

    best_class: Optional[SoundClass] = None
    best_sim = -np.inf
    for cls, vec in class_embeddings:  # lexicographic order, so ties keep the first
        sim = cosine_similarity(query_vec, vec)
        if sim > best_sim:
            best_class, best_sim = cls, sim
    if best_class is None or best_sim < SIMILARITY_THRESHOLD:
        return QueryMapping(query=query, matched_class=None, similarity=None)
    return QueryMapping(query=query, matched_class=best_class, similarity=float(best_sim))


# --- phrase discovery ------------------------------------------------

_TRIGGER = re.compile(r"\bsounds?\s+of\b", re.IGNORECASE)
_WORD_AT_START = re.compile(r"[ \t\r\n]*([A-Za-z0-9']+)")

MAX_PHRASE_TOKENS = 4

STOP_TOKENS = {
    "that", "which", "and", "or", "as", "in", "on", "at", "from", "with", "when", "while",
}
LEADING_STRIP = {"the", "a", "an", "my", "our", "their", "his", "her", "its"}
REJECTED_INITIAL = {"it", "he", "she", "they", "them", "this", "those"}


def discover_phrases(text: str) -> list[str]:
    """Candidate sound labels from "sound(s) of <Y>" occurrences.

    Captures up to four tokens after the trigger, truncating at punctuation
    or a stop token; strips leading articles/possessives; rejects empty and
    pronoun-initial candidates. Candidates are lowercase, deduplicated in
    order of first appearance.
    """
    candidates: list[str] = []
    for match in _TRIGGER.finditer(text):
        tokens = []
        pos = match.end()
        while len(tokens) < MAX_PHRASE_TOKENS:
            word = _WORD_AT_START.match(text, pos)
            if word is None:  # end of text or punctuation
                break
            token = word.group(1).lower()
            if token in STOP_TOKENS:
                break
            tokens.append(token)
            pos = word.end()
        while tokens and tokens[0] in LEADING_STRIP:
            tokens.pop(0)
        if not tokens or tokens[0] in REJECTED_INITIAL:
            continue
        candidate = " ".join(tokens)
        if candidate not in candidates:
            candidates.append(candidate)
    return candidates
