"""Text to stem lists, and records to feature-set documents."""

from __future__ import annotations

import hashlib
import re
import unicodedata
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable

from ..errors import EmptyDocument
from ..ingest import CleanRecord
from .porter import porter_stem

__all__ = [
    "Field",
    "FeatureSet",
    "TokenDoc",
    "Preprocessor",
    "preprocess",
    "build_doc",
    "build_docs",
    "load_word_list",
    "default_stopwords",
    "default_domain_terms",
    "default_lemmas",
]

_TAG_RE = re.compile(r"<[^>]*>")
_URL_RE = re.compile(r"(?:https?://|ftp://|www\.)\S+", re.IGNORECASE)
_TOKEN_RE = re.compile(r"[a-z0-9]+")
_VALID_RE = re.compile(r"[a-z][a-z0-9]*")
MIN_LEN = 3


class Field(str, Enum):
    TITLE = "Title"
    ABSTRACT = "Abstract"
    KEYWORDS = "Keywords"
    CATEGORIES = "Categories"


class FeatureSet(str, Enum):
    SET1 = "Set1"
    SET2 = "Set2"
    SET3 = "Set3"
    SET4 = "Set4"

    @property
    def members(self) -> frozenset[Field]:
        return _MEMBERS[self]

    @classmethod
    def parse(cls, name: str) -> "FeatureSet":
        key = name.strip().lower().replace(" ", "")
        for fs in cls:
            if fs.value.lower() == key:
                return fs
        raise ValueError(f"unknown feature set {name!r}; expected one of set1..set4")


_MEMBERS = {
    FeatureSet.SET1: frozenset({Field.TITLE, Field.ABSTRACT, Field.KEYWORDS}),
    FeatureSet.SET2: frozenset({Field.TITLE, Field.CATEGORIES}),
    FeatureSet.SET3: frozenset({Field.ABSTRACT, Field.KEYWORDS}),
    FeatureSet.SET4: frozenset({Field.TITLE, Field.KEYWORDS}),
}
_FIELD_ORDER = (Field.TITLE, Field.ABSTRACT, Field.KEYWORDS, Field.CATEGORIES)


@dataclass(frozen=True)
class TokenDoc:
    doc_id: str
    tokens: tuple[str, ...]
    pub_year: int


def load_word_list(path: str | Path) -> frozenset[str]:
    """One entry per line; blank lines and ``#`` comments are ignored."""
    text = Path(path).read_text(encoding="utf-8")
    return frozenset(_parse_lines(text))


def _parse_lines(text: str):
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip().lower()
        if line:
            yield line


def _data_text(name: str) -> str:
    return resources.files("topictrends").joinpath("data", name).read_text(encoding="utf-8")


def default_stopwords() -> frozenset[str]:
    return frozenset(_parse_lines(_data_text("stopwords.txt")))


def default_lemmas() -> dict[str, str]:
    out = {}
    for line in _data_text("lemmas.tsv").splitlines():
        if line.strip() and not line.startswith("#"):
            form, lemma = line.split("\t")
            out[form.strip()] = lemma.strip()
    return out


def default_domain_terms() -> frozenset[str]:
    """``hydrolog`` plus the stems of the shipped verb lexicon."""
    verbs = _parse_lines(_data_text("verbs.txt"))
    return frozenset(_parse_lines(_data_text("domain_terms.txt"))) | {porter_stem(v) for v in verbs}


class Preprocessor:
    """Configured text-to-stems pipeline.

    Steps, in order: strip markup and URLs, lower-case, split on
    non-alphanumerics, drop short/numeric tokens, drop stopwords, map
    irregular forms, Porter-stem, drop domain stems.  Stems are held to the
    same length and stopword rules as raw tokens.

    Porter stemming is not idempotent ("erosion" -> "eros" -> "ero"), so
    feeding stems back through the pipeline can change them.
    """

    def __init__(self, stopwords: Iterable[str] | None = None,
                 domain_terms: Iterable[str] | None = None,
                 lemmas: dict[str, str] | None = None):
        self.stopwords = frozenset(stopwords) if stopwords is not None else default_stopwords()
        self.domain_terms = frozenset(domain_terms) if domain_terms is not None else default_domain_terms()
        self.lemmas = dict(lemmas) if lemmas is not None else default_lemmas()
        self._cache: dict[str, str | None] = {}

    def _keep(self, tok: str) -> bool:
        return len(tok) >= MIN_LEN and _VALID_RE.fullmatch(tok) is not None and tok not in self.stopwords

    def normalize_token(self, tok: str) -> str | None:
        """Map one raw lower-case token to its stem, or None if it is dropped."""
        cached = self._cache.get(tok, ...)
        if cached is not ...:
            return cached
        out = None
        if self._keep(tok):
            stem = porter_stem(self.lemmas.get(tok, tok))
            # Step 1a can shorten a kept token ("ties" -> "ti") or land on a stopword.
            if stem not in self.domain_terms and self._keep(stem):
                out = stem
        self._cache[tok] = out
        return out

    def __call__(self, text: str) -> list[str]:
        text = _URL_RE.sub(" ", _TAG_RE.sub(" ", text))
        text = unicodedata.normalize("NFKD", text.lower()).encode("ascii", "ignore").decode("ascii")
        out = []
        for tok in _TOKEN_RE.findall(text):
            stem = self.normalize_token(tok)
            if stem is not None:
                out.append(stem)
        return out

    @property
    def fingerprint(self) -> dict:
        """Sizes and digests of the active lists, stored with fitted models."""
        def digest(items):
            return hashlib.sha256("\n".join(sorted(items)).encode()).hexdigest()[:16]

        return {
            "stopwords": digest(self.stopwords),
            "domain_terms": digest(self.domain_terms),
            "lemmas": digest(f"{k}\t{v}" for k, v in self.lemmas.items()),
        }


_DEFAULT: Preprocessor | None = None


def _default() -> Preprocessor:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = Preprocessor()
    return _DEFAULT


def preprocess(text: str) -> list[str]:
    """Run the default pipeline on ``text``."""
    return _default()(text)


def build_doc(record: CleanRecord, feature_set: FeatureSet,
              preprocessor: Preprocessor | None = None) -> TokenDoc:
    """Concatenate the feature set's fields and preprocess them.

    Keywords and categories are sorted before joining so the result does not
    depend on their listing order.  Raises EmptyDocument when nothing survives.
    """
    pre = preprocessor or _default()
    parts = []
    for field in _FIELD_ORDER:
        if field not in feature_set.members:
            continue
        if field is Field.TITLE:
            parts.append(record.title)
        elif field is Field.ABSTRACT:
            parts.append(record.abstract)
        elif field is Field.KEYWORDS:
            parts.append(" ".join(sorted(record.keywords)))
        else:
            parts.append(" ".join(sorted(record.categories)))
    tokens = tuple(pre(" ".join(parts)))
    if not tokens:
        raise EmptyDocument(f"record {record.id} has no tokens for {feature_set.value}")
    return TokenDoc(record.id, tokens, record.pub_year)


def build_docs(records: Iterable[CleanRecord], feature_set: FeatureSet,
               preprocessor: Preprocessor | None = None) -> tuple[list[TokenDoc], list[str]]:
    """Build every document, returning (docs, ids of records left empty)."""
    docs, empty = [], []
    for rec in records:
        try:
            docs.append(build_doc(rec, feature_set, preprocessor))
        except EmptyDocument:
            empty.append(rec.id)
    return docs, empty
