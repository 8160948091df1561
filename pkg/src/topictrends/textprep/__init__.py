"""Tokenisation, stemming and feature-set document construction."""

from .pipeline import (
    FeatureSet,
    Field,
    Preprocessor,
    TokenDoc,
    build_doc,
    build_docs,
    default_domain_terms,
    default_lemmas,
    default_stopwords,
    load_word_list,
    preprocess,
)
from .porter import porter_stem

__all__ = [
    "FeatureSet",
    "Field",
    "Preprocessor",
    "TokenDoc",
    "build_doc",
    "build_docs",
    "default_domain_terms",
    "default_lemmas",
    "default_stopwords",
    "load_word_list",
    "porter_stem",
    "preprocess",
]
