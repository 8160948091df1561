"""Command-line driver: ``topictrends {ingest,sweep,trends,report}``.

Exit codes are 0 on success, 2 for usage or input errors (missing files,
bad formats, model/corpus mismatch) and 1 for anything unexpected.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from collections import Counter
from pathlib import Path

from . import __version__
from .errors import ModelMismatch, TopicTrendsError
from .ingest import (dedupe, filter_types, load_clean_corpus, parse_export, repair,
                     write_clean_corpus)
from .persist import (load_model, model_filename, read_sweep_csv, render_report, save_model,
                      shares_csv, sweep_csv, topics_sidecar, trends_csv)
from .textprep import FeatureSet, Preprocessor, build_docs, load_word_list
from .trends import (MODELS, SweepGrid, TrendSeries, assign_topics, attach_labels, fold_in,
                     read_labels, run_sweep, select_best, vectorize_with, yearly_series)
from .vectorize import build_vocab, count_matrix

log = logging.getLogger("topictrends")


class InputError(Exception):
    """Bad user input; reported with exit code 2."""


# Resolved defaults for sweep and trends; a --config file may set any of them.
SWEEP_DEFAULTS = {
    "sets": ["set1", "set2", "set3", "set4"],
    "models": ["lda", "nmf", "lsa"],
    "k": [5, 10, 15],
    "seed": 0,
    "jobs": 1,
    "min_df": 5,
    "max_df": 0.5,
    "window": 110,
    "top_n": 10,
    "start": None,
    "end": None,
    "lda_iterations": 1000,
    "lda_burn_in": 500,
    "lda_alpha": None,
    "lda_beta": 0.01,
    "nmf_max_iter": 300,
    "nmf_tol": 1e-4,
    "stopwords": None,
    "domain_terms": None,
}
TRENDS_DEFAULTS = {"start": None, "end": None, "labels": None, "fold_in": False, "top_n": 10}


def _read_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise InputError(f"config file not found: {path}")
    try:
        cfg = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(cfg, dict):
        raise InputError(f"{path}: expected a JSON object")
    return cfg.get("config", cfg)  # a run.json can be fed back as a config


def resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """Defaults, then the config file, then explicit flags (flags win)."""
    cfg = _read_config(getattr(args, "config", None))
    unknown = set(cfg) - set(defaults)
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
    out = dict(defaults)
    out.update(cfg)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            out[key] = value
    if out.get("start") is not None and out.get("end") is not None and out["start"] > out["end"]:
        raise InputError(f"--start {out['start']} is after --end {out['end']}")
    return out


def _require_file(path: str | Path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"input file not found: {path}")
    return p


def _writable_dir(path: str | Path) -> Path:
    p = Path(path)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory {path}: {exc}") from None
    return p


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _preprocessor(stopwords: str | None, domain_terms: str | None) -> Preprocessor:
    sw = load_word_list(_require_file(stopwords)) if stopwords else None
    dt = load_word_list(_require_file(domain_terms)) if domain_terms else None
    return Preprocessor(stopwords=sw, domain_terms=dt)


def _in_window(corpus, start, end):
    lo = start if start is not None else -10**9
    hi = end if end is not None else 10**9
    return [r for r in corpus if lo <= r.pub_year <= hi]


def _load_corpus(path: str):
    try:
        return load_clean_corpus(_require_file(path))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: not a clean corpus file ({exc})") from None


# ---------------------------------------------------------------- ingest

def cmd_ingest(args: argparse.Namespace) -> int:
    paths = [_require_file(p) for p in args.inputs]
    existing: set[str] = set()
    if args.dedupe_against:
        existing = {r.id for r in _load_corpus(args.dedupe_against)}

    summary: Counter = Counter()
    malformed = []
    parsed = []
    for path in paths:
        records, bad = parse_export(path.read_bytes(), args.format)
        parsed.extend(records)
        malformed.extend({"file": str(path), "line": m.line_no, "reason": m.reason} for m in bad)
        summary["parsed"] += len(records)
    summary["malformed"] = len(malformed)

    kept = filter_types(parsed)
    summary["dropped_type"] = len(parsed) - len(kept)
    repaired, repair_counts = repair(kept)
    summary.update(repair_counts)
    clean = dedupe(repaired, existing)
    summary["dropped_duplicate"] = len(repaired) - len(clean)
    summary["written"] = len(clean)

    out = Path(args.out)
    _writable_dir(out.parent if str(out.parent) else ".")
    write_clean_corpus(clean, out)
    report = {
        "config": {"format": args.format, "inputs": [str(p) for p in paths], "out": str(out),
                   "dedupe_against": args.dedupe_against},
        "counts": dict(sorted(summary.items())),
        "malformed": malformed,
    }
    _dump_json(report, out.with_name(out.name + ".summary.json"))
    for key, n in sorted(summary.items()):
        print(f"{key}\t{n}")
    return 0


# ---------------------------------------------------------------- sweep

def _grid(cfg: dict) -> SweepGrid:
    # canonical order, so the CSV does not depend on how flags were listed
    try:
        chosen = {FeatureSet.parse(s) for s in cfg["sets"]}
    except ValueError as exc:
        raise InputError(str(exc)) from None
    sets = tuple(fs for fs in FeatureSet if fs in chosen)
    names = {m.upper() for m in cfg["models"]}
    bad = sorted(names - set(MODELS))
    if bad:
        raise InputError(f"unknown model(s): {', '.join(bad)}")
    models = tuple(m for m in MODELS if m in names)
    lda = {"iterations": cfg["lda_iterations"], "burn_in": cfg["lda_burn_in"], "beta": cfg["lda_beta"]}
    if cfg["lda_alpha"] is not None:
        lda["alpha"] = cfg["lda_alpha"]
    nmf = {"max_iter": cfg["nmf_max_iter"], "tol": cfg["nmf_tol"]}
    return SweepGrid(sets=sets, models=models, k_values=tuple(sorted({int(k) for k in cfg["k"]})), lda=lda,
                     nmf=nmf, min_df=cfg["min_df"], max_df_ratio=cfg["max_df"],
                     window=cfg["window"], top_n=cfg["top_n"])


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = resolve(args, SWEEP_DEFAULTS)
    grid = _grid(cfg)
    pre = _preprocessor(cfg["stopwords"], cfg["domain_terms"])
    corpus = _in_window(_load_corpus(args.corpus), cfg["start"], cfg["end"])
    out = _writable_dir(args.out)

    prepared: dict = {}
    cells = run_sweep(corpus, grid, base_seed=cfg["seed"], jobs=cfg["jobs"], preprocessor=pre,
                      keep_models=True, prepared=prepared)

    models_dir = _writable_dir(out / "models")
    for cell in cells:
        if cell.fitted is None:
            continue
        prep = prepared[FeatureSet(cell.set_id)]
        meta = {"set": cell.set_id, "min_df": grid.min_df, "max_df_ratio": grid.max_df_ratio,
                "stopwords": cfg["stopwords"], "domain_terms": cfg["domain_terms"],
                "textprep": pre.fingerprint, "cv": cell.cv}
        save_model(cell.fitted, models_dir / model_filename(cell.set_id, cell.model, cell.k),
                   prep.counts.vocab, meta)

    (out / "coherence.csv").write_text(sweep_csv(cells), encoding="utf-8")
    (out / "coherence_topics.json").write_text(topics_sidecar(cells), encoding="utf-8")
    _dump_json({"command": "sweep", "version": __version__, "corpus": str(args.corpus),
                "documents": len(corpus), "config": cfg}, out / "run.json")

    failed = sum(1 for c in cells if not c.ok)
    best = select_best(cells)
    print(f"best\t{best.set_id}\t{best.model}\tK={best.k}\tcv={best.cv:.6f}")
    if failed:
        print(f"failed cells\t{failed}/{len(cells)}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------- trends

def _model_docs(model_path: str, corpus_path: str):
    model, vocab, meta, stored_hash = load_model(_require_file(model_path))
    pre = _preprocessor(meta.get("stopwords"), meta.get("domain_terms"))
    if meta.get("textprep") and meta["textprep"] != pre.fingerprint:
        raise ModelMismatch("text preprocessing lists differ from those the model was fitted with")
    corpus = _load_corpus(corpus_path)
    fs = FeatureSet.parse(meta.get("set", "Set4"))
    docs, _ = build_docs(corpus, fs, pre)
    return model, vocab, meta, stored_hash, corpus, docs


def _assignments(model, vocab, meta, stored_hash, docs, use_fold_in: bool):
    """Returns (doc_ids, topic per doc)."""
    if use_fold_in:
        X = vectorize_with(docs, vocab, "tfidf")
        return list(X.doc_ids), fold_in(model, X)
    rebuilt = build_vocab(docs, meta.get("min_df", 5), meta.get("max_df_ratio", 0.5)) if docs else None
    if rebuilt is None or rebuilt.digest != stored_hash:
        raise ModelMismatch("vocabulary hash differs: this corpus is not the one the model was fitted on "
                            "(use --fold-in to score new documents)")
    ids = list(count_matrix(docs, rebuilt).doc_ids)
    if model.doc_ids and list(model.doc_ids) != ids:
        raise ModelMismatch("document order differs from the fitted model")
    return ids, assign_topics(model)


def _year_range(cfg: dict, years) -> tuple[int, int]:
    if not years and (cfg["start"] is None or cfg["end"] is None):
        raise InputError("no documents with a publication year; pass --start and --end")
    start = cfg["start"] if cfg["start"] is not None else min(years)
    end = cfg["end"] if cfg["end"] is not None else max(years)
    if start > end:
        raise InputError(f"--start {start} is after --end {end}")
    return start, end


def cmd_trends(args: argparse.Namespace) -> int:
    cfg = resolve(args, TRENDS_DEFAULTS)
    labels = read_labels(_require_file(cfg["labels"])) if cfg["labels"] else {}
    model, vocab, meta, stored_hash, corpus, docs = _model_docs(args.model, args.corpus)
    if cfg["fold_in"] and model.__class__.__name__ == "LdaModel":
        raise InputError("LDA models do not support --fold-in")
    ids, topics = _assignments(model, vocab, meta, stored_hash, docs, cfg["fold_in"])
    year_of = {r.id: r.pub_year for r in corpus}
    years = [year_of[i] for i in ids]
    series = attach_labels(yearly_series(topics, years, _year_range(cfg, years), model.K), labels)

    out = _writable_dir(args.out)
    (out / "trends.csv").write_text(trends_csv(series), encoding="utf-8")
    (out / "shares.csv").write_text(shares_csv(series), encoding="utf-8")
    report = render_report(None, None, model, series, labels, top_n=cfg["top_n"])
    (out / "report.md").write_text(report, encoding="utf-8")
    _dump_json({"command": "trends", "version": __version__, "model": str(args.model),
                "corpus": str(args.corpus), "documents": len(ids), "config": cfg}, out / "run.json")
    for s in series:
        print(f"{s.label}\t{sum(s.counts.values())}\t{s.share:.2f}%")
    return 0


# ---------------------------------------------------------------- report

def _read_trends(trends_dir: Path) -> list[TrendSeries]:
    counts: dict[str, dict[int, int]] = {}
    with open(_require_file(trends_dir / "trends.csv"), newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            counts.setdefault(row["topic"], {})[int(row["year"])] = int(row["count"])
    with open(_require_file(trends_dir / "shares.csv"), newline="", encoding="utf-8") as fh:
        shares = {row["topic"]: float(row["percent"]) for row in csv.DictReader(fh)}
    return [TrendSeries(i, label, c, shares.get(label, 0.0)) for i, (label, c) in enumerate(counts.items())]


def cmd_report(args: argparse.Namespace) -> int:
    sweep_dir = Path(args.sweep)
    cells = read_sweep_csv(_require_file(sweep_dir / "coherence.csv"))
    best = select_best(cells)
    model_path = args.model or sweep_dir / "models" / model_filename(best.set_id, best.model, best.k)
    model = load_model(_require_file(model_path))[0]
    labels = read_labels(_require_file(args.labels)) if args.labels else {}
    series = _read_trends(Path(args.trends)) if args.trends else None
    text = render_report(cells, best, model, series, labels, top_n=args.top_n)
    out = Path(args.out) if args.out else sweep_dir / "report.md"
    out.write_text(text, encoding="utf-8")
    print(out)
    return 0


# ---------------------------------------------------------------- parser

def _csv_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _int_list(value: str) -> list[int]:
    try:
        return [int(v) for v in _csv_list(value)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topictrends", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse, filter, repair and deduplicate exports")
    p.add_argument("--format", choices=["wos", "jsonl"], required=True)
    p.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="PATH")
    p.add_argument("--out", required=True, help="clean corpus (JSON Lines)")
    p.add_argument("--dedupe-against", metavar="CORPUS", help="drop records already in this corpus")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("sweep", help="fit every (set, model, K) cell and score C_V")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="JSON config; flags override it")
    p.add_argument("--sets", type=_csv_list, help="e.g. set1,set4")
    p.add_argument("--models", type=_csv_list, help="subset of lda,nmf,lsa")
    p.add_argument("--k", type=_int_list, help="e.g. 5,10,15")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, help="concurrent cells")
    p.add_argument("--min-df", type=int)
    p.add_argument("--max-df", type=float, help="max document-frequency ratio")
    p.add_argument("--window", type=int, help="C_V sliding window")
    p.add_argument("--top-n", type=int)
    p.add_argument("--start", type=int, help="first publication year")
    p.add_argument("--end", type=int, help="last publication year")
    p.add_argument("--lda-iterations", type=int)
    p.add_argument("--lda-burn-in", type=int)
    p.add_argument("--lda-alpha", type=float, help="default 50/K")
    p.add_argument("--lda-beta", type=float)
    p.add_argument("--nmf-max-iter", type=int)
    p.add_argument("--nmf-tol", type=float)
    p.add_argument("--stopwords", help="stopword list, one per line")
    p.add_argument("--domain-terms", help="domain stems to drop, one per line")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("trends", help="assign documents and count them per topic and year")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="JSON config; flags override it")
    p.add_argument("--start", type=int)
    p.add_argument("--end", type=int)
    p.add_argument("--labels", help="index<TAB>name per line")
    p.add_argument("--fold-in", action="store_true", help="score documents the model was not fitted on")
    p.add_argument("--top-n", type=int)
    p.set_defaults(func=cmd_trends)

    p = sub.add_parser("report", help="rebuild report.md from a sweep (and trends) directory")
    p.add_argument("--sweep", required=True, help="sweep output directory")
    p.add_argument("--model", help="model file (default: best cell)")
    p.add_argument("--trends", help="trends output directory")
    p.add_argument("--labels")
    p.add_argument("--top-n", type=int, default=10)
    p.add_argument("--out", help="default: <sweep>/report.md")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, TopicTrendsError, FileNotFoundError, ValueError) as exc:
        print(f"topictrends {args.command}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"topictrends {args.command}: internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
