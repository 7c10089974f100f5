"""Corpus ingestion, tokenization, vocabularies and stratified folds."""

import csv
import json
import logging
import unicodedata
from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import groupby
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .exceptions import CorpusFormatError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_SEED = 42

_SPACE, _ALNUM, _PUNCT = 0, 1, 2


@lru_cache(maxsize=65536)
def _char_class(ch):
    if ch.isspace():
        return _SPACE
    cat = unicodedata.category(ch)
    if cat[0] == "L" or cat == "Nd":
        return _ALNUM
    return _PUNCT


def _lower(ch):
    low = ch.lower()
    # multi-char lowercase forms (e.g. U+0130) would change the token's run structure
    return low if len(low) == 1 else ch


def tokenize(text: str) -> list:
    """Split ``text`` into maximal alphanumeric runs and maximal punctuation runs.

    Whitespace only separates tokens. Letters (Unicode ``L*``) and decimal
    digits (``Nd``) are alphanumeric; every other non-space character,
    emoji and currency symbols included, is punctuation. Tokens are
    lowercased.

    >>> tokenize("Don't watch this!")
    ['don', "'", 't', 'watch', 'this', '!']
    """
    tokens = []
    for cls, run in groupby(text, key=_char_class):
        if cls != _SPACE:
            tokens.append("".join(_lower(c) for c in run))
    return tokens


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    label: int
    star_rating: Optional[int] = None
    source_corpus: str = ""

    def __post_init__(self):
        if not self.text.strip():
            raise ValidationError(f"document {self.id!r} has empty text")
        if self.label not in (0, 1):
            raise ValidationError(f"document {self.id!r}: label must be 0 or 1, got {self.label!r}")
        if self.star_rating is not None and not 1 <= self.star_rating <= 5:
            raise ValidationError(f"document {self.id!r}: star must be in [1, 5], got {self.star_rating!r}")


@dataclass(frozen=True)
class Corpus:
    name: str
    documents: tuple
    skipped: int = 0

    def __post_init__(self):
        docs = tuple(d if d.source_corpus else replace(d, source_corpus=self.name) for d in self.documents)
        object.__setattr__(self, "documents", docs)
        seen = set()
        for doc in self.documents:
            if doc.id in seen:
                raise ValidationError(f"corpus {self.name!r}: duplicate document id {doc.id!r}")
            seen.add(doc.id)

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    @property
    def class_counts(self):
        n_pos = sum(doc.label for doc in self.documents)
        return (len(self.documents) - n_pos, n_pos)

    @property
    def texts(self):
        return [doc.text for doc in self.documents]

    @property
    def labels(self):
        return np.array([doc.label for doc in self.documents], dtype=np.int64)

    @property
    def has_stars(self):
        return bool(self.documents) and all(d.star_rating is not None for d in self.documents)

    @property
    def stars(self):
        return np.array([d.star_rating for d in self.documents], dtype=np.float64)

    def subset(self, indices, name=None):
        """Corpus holding the documents at ``indices``, in that order."""
        return Corpus(name or self.name, [self.documents[i] for i in indices])


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple
    index: dict = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(index) != len(self.tokens):
            raise ValidationError("vocabulary contains duplicate tokens")
        object.__setattr__(self, "index", index)

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.index


def _texts_of(documents):
    return [d.text if isinstance(d, Document) else d for d in documents]


def build_vocabulary(documents: Iterable) -> Vocabulary:
    """Vocabulary of every token in ``documents`` in first-occurrence order.

    ``documents`` may hold :class:`Document` objects or raw strings.
    """
    texts = _texts_of(documents)
    if not texts:
        raise ValidationError("cannot build a vocabulary from zero documents")
    seen = {}
    for text in texts:
        for tok in tokenize(text):
            seen.setdefault(tok, None)
    if not seen:
        raise ValidationError("all documents tokenize to empty token lists")
    return Vocabulary(tuple(seen))


# -- loading ---------------------------------------------------------------

def _parse_label(value, line):
    if isinstance(value, bool):
        raise ValidationError(f"line {line}: label must be 0 or 1, got {value!r}")
    if isinstance(value, str):
        value = value.strip()
        if value not in ("0", "1"):
            raise ValidationError(f"line {line}: label must be 0 or 1, got {value!r}")
        return int(value)
    if isinstance(value, (int, float)) and value in (0, 1):
        return int(value)
    raise ValidationError(f"line {line}: label must be 0 or 1, got {value!r}")


def _parse_star(value, line):
    if value is None or (isinstance(value, str) and not value.strip()):
        return None
    try:
        if isinstance(value, bool):
            raise ValueError
        star = int(value.strip()) if isinstance(value, str) else value
        if isinstance(star, float) and star.is_integer():
            star = int(star)
        if not isinstance(star, int):
            raise ValueError
    except ValueError:
        raise ValidationError(f"line {line}: star must be an integer in [1, 5], got {value!r}") from None
    if not 1 <= star <= 5:
        raise ValidationError(f"line {line}: star must be an integer in [1, 5], got {star}")
    return star


def _make_document(record, line, name):
    text, label = record.get("text"), record.get("label")
    if text is None or label is None or (isinstance(label, str) and not label.strip()):
        return None
    if not isinstance(text, str):
        raise CorpusFormatError(f"'text' must be a string, got {type(text).__name__}", line)
    if not text.strip():
        return None
    doc_id = record.get("id")
    doc_id = str(line) if doc_id is None or doc_id == "" else str(doc_id)
    return Document(
        id=doc_id,
        text=text,
        label=_parse_label(label, line),
        star_rating=_parse_star(record.get("star"), line),
        source_corpus=name,
    )


def _read_jsonl(fh):
    for lineno, raw in enumerate(fh, start=1):
        if not raw.strip():
            continue
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"invalid JSON ({exc.msg})", lineno) from None
        if not isinstance(record, dict):
            raise CorpusFormatError("record is not a JSON object", lineno)
        yield lineno, record


def _read_csv(fh):
    reader = csv.DictReader(fh)
    header = reader.fieldnames or []
    missing = {"text", "label"} - set(header)
    if missing:
        raise CorpusFormatError(f"CSV header lacks column(s) {sorted(missing)}", 1)
    try:
        for row in reader:
            if None in row:
                raise CorpusFormatError("row has more fields than the header", reader.line_num)
            yield reader.line_num, row
    except csv.Error as exc:
        raise CorpusFormatError(str(exc), reader.line_num) from None


def load_corpus(path, format: Optional[str] = None, name: Optional[str] = None) -> Corpus:
    """Read a JSONL or CSV corpus.

    Records missing ``text`` or ``label`` (or with blank text) are skipped and
    counted in ``Corpus.skipped``. Unparseable records raise
    :class:`CorpusFormatError` and out-of-range labels or stars raise
    :class:`ValidationError`, both naming the line.
    """
    path = Path(path)
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    format = format.lower()
    if format not in ("jsonl", "csv"):
        raise ValidationError(f"unknown corpus format {format!r}; expected 'jsonl' or 'csv'")
    name = name or path.stem

    documents, skipped = [], 0
    with open(path, encoding="utf-8", newline="" if format == "csv" else None) as fh:
        records = _read_jsonl(fh) if format == "jsonl" else _read_csv(fh)
        for line, record in records:
            doc = _make_document(record, line, name)
            if doc is None:
                skipped += 1
                continue
            documents.append(doc)
    if skipped:
        logger.warning("%s: skipped %d record(s) with missing text or label", path, skipped)
    return Corpus(name, documents, skipped=skipped)


# -- folds -----------------------------------------------------------------

@dataclass(frozen=True)
class FoldAssignment:
    """Maps ``(corpus name, document id)`` to a fold index in ``[0, k)``."""

    k: int
    assignment: dict

    def fold_of(self, doc: Document) -> int:
        return self.assignment[(doc.source_corpus, doc.id)]

    def folds_for(self, corpus: Corpus) -> np.ndarray:
        return np.array([self.assignment[(corpus.name, d.id)] for d in corpus.documents], dtype=np.int64)

    def split(self, corpus: Corpus, fold: int):
        """Train and test index arrays of ``corpus`` for ``fold``."""
        folds = self.folds_for(corpus)
        return np.flatnonzero(folds != fold), np.flatnonzero(folds == fold)


def _stratified_folds(labels, k, seed):
    if k < 2:
        raise ValidationError(f"k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    order = []
    for cls in (0, 1):
        members = np.flatnonzero(labels == cls)
        if len(members) < k:
            raise ValidationError(f"class {cls} has {len(members)} member(s), fewer than k={k}")
        order.append(rng.permutation(members))
    order = np.concatenate(order)
    folds = np.empty(len(labels), dtype=np.int64)
    folds[order] = np.arange(len(order)) % k
    return folds


def stratified_kfold(corpus: Corpus, k: int = 10, seed: int = DEFAULT_SEED) -> FoldAssignment:
    """Class-stratified K-fold assignment, deterministic in ``seed``."""
    folds = _stratified_folds(corpus.labels, k, seed)
    return FoldAssignment(k, {(corpus.name, d.id): int(f) for d, f in zip(corpus.documents, folds)})


def union_folds(corpora: Sequence[Corpus], k: int = 10, seed: int = DEFAULT_SEED) -> FoldAssignment:
    """Stratify each corpus independently so every fold mixes all corpora.

    Every corpus is folded with the same seed, so a single corpus yields the
    same assignment as :func:`stratified_kfold`.
    """
    names = [c.name for c in corpora]
    if len(set(names)) != len(names):
        raise ValidationError(f"corpus names must be unique, got {names}")
    assignment = {}
    for corpus in corpora:
        assignment.update(stratified_kfold(corpus, k, seed).assignment)
    return FoldAssignment(k, assignment)
