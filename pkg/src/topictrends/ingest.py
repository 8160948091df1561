"""Bibliographic export parsing and record repair.

Two input formats are understood: Web of Science tab-delimited exports
(header row of two-letter field tags) and JSON Lines.  Parsed records are
type-filtered, repaired (keyword merge, year recovery), stripped of
unrecoverable items and deduplicated against an existing corpus.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

from .errors import UnsupportedHeader

__all__ = [
    "DocType",
    "BibRecord",
    "CleanRecord",
    "MalformedLine",
    "parse_export",
    "filter_types",
    "repair",
    "dedupe",
    "dump_records",
    "load_clean_corpus",
    "write_clean_corpus",
]

WOS_REQUIRED_TAGS = ("UT", "DT", "TI", "AB", "DE", "ID", "WC", "PY", "EA")
MULTI_SEP = "; "
YEAR_MIN, YEAR_MAX = 1900, 2100

_MONTHS = {m: i for i, m in enumerate(
    ["JAN", "FEB", "MAR", "APR", "MAY", "JUN", "JUL", "AUG", "SEP", "OCT", "NOV", "DEC"], start=1)}


class DocType(str, Enum):
    ARTICLE = "Article"
    PROCEEDINGS_PAPER = "ProceedingsPaper"
    REVIEW = "Review"
    BOOK_CHAPTER = "BookChapter"
    LETTER = "Letter"
    EDITORIAL = "Editorial"
    OTHER = "Other"

    @classmethod
    def parse(cls, raw: str | None) -> "DocType":
        """Map a WOS or canonical document-type string, case-insensitively.

        WOS sometimes stacks types ("Article; Early Access"); the first one wins.
        """
        if not raw:
            return cls.OTHER
        key = raw.split(";")[0].strip().lower().replace(" ", "").replace("_", "")
        return _DOC_TYPE_KEYS.get(key, cls.OTHER)


_DOC_TYPE_KEYS = {
    "article": DocType.ARTICLE,
    "proceedingspaper": DocType.PROCEEDINGS_PAPER,
    "proceedingpaper": DocType.PROCEEDINGS_PAPER,
    "review": DocType.REVIEW,
    "bookchapter": DocType.BOOK_CHAPTER,
    "letter": DocType.LETTER,
    "editorial": DocType.EDITORIAL,
    "editorialmaterial": DocType.EDITORIAL,
    "other": DocType.OTHER,
}

ALLOWED_TYPES = frozenset({DocType.ARTICLE, DocType.PROCEEDINGS_PAPER})


@dataclass(frozen=True)
class BibRecord:
    id: str
    doc_type: DocType
    title: str | None = None
    abstract: str | None = None
    author_keywords: tuple[str, ...] | None = None
    keywords_plus: tuple[str, ...] | None = None
    categories: tuple[str, ...] | None = None
    pub_year: int | None = None
    early_access_date: dt.date | None = None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "doc_type": self.doc_type.value,
            "title": self.title,
            "abstract": self.abstract,
            "author_keywords": _list_or_none(self.author_keywords),
            "keywords_plus": _list_or_none(self.keywords_plus),
            "categories": _list_or_none(self.categories),
            "pub_year": self.pub_year,
            "early_access_date": self.early_access_date.isoformat() if self.early_access_date else None,
        }


@dataclass(frozen=True)
class CleanRecord:
    id: str
    doc_type: DocType
    title: str
    abstract: str
    keywords: tuple[str, ...]
    categories: tuple[str, ...]
    pub_year: int

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "doc_type": self.doc_type.value,
            "title": self.title,
            "abstract": self.abstract,
            "keywords": list(self.keywords),
            "categories": list(self.categories),
            "pub_year": self.pub_year,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CleanRecord":
        return cls(
            id=str(obj["id"]),
            doc_type=DocType.parse(obj["doc_type"]),
            title=obj["title"],
            abstract=obj["abstract"],
            keywords=tuple(obj["keywords"]),
            categories=tuple(obj["categories"]),
            pub_year=int(obj["pub_year"]),
        )


@dataclass(frozen=True)
class MalformedLine:
    line_no: int
    reason: str


def _list_or_none(values):
    return list(values) if values is not None else None


def _clean_text(value) -> str | None:
    if value is None:
        return None
    value = str(value).strip()
    return value or None


def _split_multi(value) -> tuple[str, ...] | None:
    if value is None:
        return None
    if isinstance(value, str):
        parts = [p.strip().rstrip(";").strip() for p in value.split(MULTI_SEP)]
    else:
        parts = [str(v).strip() for v in value]
    parts = [p for p in parts if p]
    return tuple(parts) or None


def _parse_year(value) -> int | None:
    if value is None or (isinstance(value, str) and not value.strip()):
        return None
    year = int(str(value).strip())
    if not YEAR_MIN <= year <= YEAR_MAX:
        raise ValueError(f"publication year {year} outside [{YEAR_MIN}, {YEAR_MAX}]")
    return year


def _parse_date(value) -> dt.date | None:
    """Accepts ISO dates, WOS style "NOV 2021" / "NOV 3 2021", or a bare year."""
    if value is None:
        return None
    text = str(value).strip()
    if not text:
        return None
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        pass
    parts = text.replace(",", " ").split()
    if len(parts) == 1 and parts[0].isdigit():
        return dt.date(int(parts[0]), 1, 1)
    month = _MONTHS.get(parts[0][:3].upper())
    if month is None or not parts[-1].isdigit():
        raise ValueError(f"unrecognised date {text!r}")
    day = int(parts[1]) if len(parts) == 3 and parts[1].isdigit() else 1
    return dt.date(int(parts[-1]), month, day)


def _record_id(ut: str | None, doi: str | None, title: str | None, year: int | None) -> str:
    if ut:
        return ut
    if doi:
        return doi
    digest = hashlib.sha1(f"{title or ''}|{year if year is not None else ''}".encode("utf-8"))
    return "h:" + digest.hexdigest()[:16]


def _build_record(fields: dict) -> BibRecord:
    title = _clean_text(fields.get("title"))
    year = _parse_year(fields.get("pub_year"))
    return BibRecord(
        id=_record_id(_clean_text(fields.get("id")), _clean_text(fields.get("doi")), title, year),
        doc_type=DocType.parse(_clean_text(fields.get("doc_type"))),
        title=title,
        abstract=_clean_text(fields.get("abstract")),
        author_keywords=_split_multi(fields.get("author_keywords")),
        keywords_plus=_split_multi(fields.get("keywords_plus")),
        categories=_split_multi(fields.get("categories")),
        pub_year=year,
        early_access_date=_parse_date(fields.get("early_access_date")),
    )


_WOS_FIELDS = {
    "UT": "id",
    "DI": "doi",
    "DT": "doc_type",
    "TI": "title",
    "AB": "abstract",
    "DE": "author_keywords",
    "ID": "keywords_plus",
    "WC": "categories",
    "PY": "pub_year",
    "EA": "early_access_date",
}

_JSON_KEYS = ("id", "doc_type", "title", "abstract", "author_keywords",
              "keywords_plus", "categories", "pub_year", "early_access_date")


def _iter_lines(data: bytes | str):
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    text = text.lstrip("\ufeff")
    # str.splitlines would also break on form feeds and U+2028 inside cells
    for line_no, line in enumerate(text.split("\n"), start=1):
        yield line_no, line.rstrip("\r")


def _parse_wos(data) -> tuple[list[dict], list[MalformedLine]]:
    lines = _iter_lines(data)
    try:
        _, header_line = next(lines)
    except StopIteration:
        raise UnsupportedHeader("empty export: no header line") from None
    header = [tag.strip() for tag in header_line.split("\t")]
    # WOS headers usually end in a trailing tab
    while header and not header[-1]:
        header.pop()
    missing = [tag for tag in WOS_REQUIRED_TAGS if tag not in header]
    if missing:
        raise UnsupportedHeader(f"header lacks required tags: {', '.join(missing)}")

    rows, bad = [], []
    for line_no, line in lines:
        if not line.strip():
            continue
        cells = line.split("\t")
        while len(cells) > len(header) and not cells[-1].strip():
            cells.pop()
        if len(cells) != len(header):
            bad.append(MalformedLine(line_no, f"expected {len(header)} cells, found {len(cells)}"))
            continue
        row = {_WOS_FIELDS[tag]: cell for tag, cell in zip(header, cells) if tag in _WOS_FIELDS}
        rows.append((line_no, row))
    return rows, bad


def _parse_jsonl(data) -> tuple[list, list[MalformedLine]]:
    rows, bad = [], []
    for line_no, line in _iter_lines(data):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            bad.append(MalformedLine(line_no, f"invalid JSON: {exc.msg}"))
            continue
        if not isinstance(obj, dict):
            bad.append(MalformedLine(line_no, "JSON line is not an object"))
            continue
        rows.append((line_no, {k: obj.get(k) for k in _JSON_KEYS + ("doi",)}))
    return rows, bad


def parse_export(data: bytes | str, fmt: str) -> tuple[list[BibRecord], list[MalformedLine]]:
    """Parse an export into records.

    Parameters
    ----------
    data : bytes or str
        UTF-8 content of the export file.
    fmt : {"wos", "jsonl"}
        Tab-delimited Web of Science export or JSON Lines.

    Returns
    -------
    records : list of BibRecord
        One per well-formed data line, in input order.
    malformed : list of MalformedLine
        Lines that were skipped, with the reason.  Duplicate ids inside one
        export are reported here too, keeping the first occurrence.
    """
    if fmt in ("wos", "WosTabDelimited"):
        rows, bad = _parse_wos(data)
    elif fmt in ("jsonl", "JsonLines"):
        rows, bad = _parse_jsonl(data)
    else:
        raise ValueError(f"unknown export format {fmt!r}")

    records, seen = [], set()
    for line_no, row in rows:
        try:
            rec = _build_record(row)
        except (ValueError, TypeError) as exc:
            bad.append(MalformedLine(line_no, str(exc)))
            continue
        if rec.id in seen:
            bad.append(MalformedLine(line_no, f"duplicate id {rec.id}"))
            continue
        seen.add(rec.id)
        records.append(rec)
    bad.sort(key=lambda m: m.line_no)
    return records, bad


def dump_records(records: Iterable[BibRecord | CleanRecord]) -> str:
    """Serialise records as JSON Lines with a fixed key order."""
    return "".join(json.dumps(r.to_json(), ensure_ascii=False) + "\n" for r in records)


def filter_types(records: Iterable[BibRecord]) -> list[BibRecord]:
    return [r for r in records if r.doc_type in ALLOWED_TYPES]


def _merge_keywords(*groups) -> tuple[str, ...]:
    merged: dict[str, None] = {}
    for group in groups:
        for kw in group or ():
            kw = re.sub(r"\s+", " ", kw.strip().casefold())
            if kw:
                merged.setdefault(kw)
    return tuple(merged)


def repair(records: Iterable[BibRecord]) -> tuple[list[CleanRecord], Counter]:
    """Fill what can be filled and drop what cannot.

    Keywords become the case-folded union of author keywords and keywords-plus
    (first occurrence order).  A missing publication year is taken from the
    early-access date.  Records still lacking title, abstract, keywords,
    categories or year are dropped.

    The summary counts ``dropped`` records, ``missing_<field>`` for every
    missing field of a dropped record, and ``year_from_early_access`` fills.
    """
    survivors: list[CleanRecord] = []
    summary: Counter = Counter()
    for rec in records:
        keywords = _merge_keywords(rec.author_keywords, rec.keywords_plus)
        year = rec.pub_year
        if year is None and rec.early_access_date is not None:
            year = rec.early_access_date.year
            summary["year_from_early_access"] += 1
        fields = {
            "title": rec.title,
            "abstract": rec.abstract,
            "keywords": keywords,
            "categories": rec.categories,
            "pub_year": year,
        }
        missing = [name for name, value in fields.items() if value is None or value == ()]
        if missing:
            summary["dropped"] += 1
            for name in missing:
                summary[f"missing_{name}"] += 1
            continue
        survivors.append(CleanRecord(id=rec.id, doc_type=rec.doc_type, **fields))
    return survivors, summary


def dedupe(new: Iterable[CleanRecord], existing_ids: set[str] | frozenset[str]) -> list[CleanRecord]:
    """Remove records already known, then repeated ids within the batch."""
    out, seen = [], set(existing_ids)
    for rec in new:
        if rec.id in seen:
            continue
        seen.add(rec.id)
        out.append(rec)
    return out


def load_clean_corpus(path: str | Path) -> list[CleanRecord]:
    with open(path, encoding="utf-8") as fh:
        return [CleanRecord.from_json(json.loads(line)) for line in fh if line.strip()]


def write_clean_corpus(records: Iterable[CleanRecord], path: str | Path) -> None:
    Path(path).write_text(dump_records(records), encoding="utf-8")
