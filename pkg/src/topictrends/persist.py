"""JSON files for fitted models and CSV/Markdown outputs of a run."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .coherence import CoherenceCell
from .lda import LdaConfig, LdaModel
from .lsa import LsaModel
from .nmf import NmfConfig, NmfModel
from .trends import TrendSeries, model_kind, topic_terms
from .vectorize import Vocabulary

__all__ = ["save_model", "load_model", "model_filename", "sweep_csv", "read_sweep_csv",
           "topics_sidecar", "trends_csv", "shares_csv", "render_report"]


def _rows(a: np.ndarray) -> list:
    return np.asarray(a, dtype=np.float64).tolist()


def model_filename(set_id: str, model: str, k: int) -> str:
    return f"{set_id.lower()}_{model.lower()}_k{k}.json"


def save_model(model, path: str | Path, vocab: Vocabulary, meta: dict | None = None) -> None:
    """Write a fitted model with its vocabulary and a vocabulary hash."""
    kind = model_kind(model)
    payload = {
        "kind": kind,
        "config": model.config_dict(),
        "meta": meta or {},
        "vocabulary": {"hash": vocab.digest, "terms": list(vocab.terms), "df": list(vocab.df)},
        "doc_ids": list(model.doc_ids or []),
    }
    if kind == "LDA":
        payload["theta"] = _rows(model.theta)
        payload["phi"] = _rows(model.phi)
    elif kind == "NMF":
        payload["W"] = _rows(model.W)
        payload["H"] = _rows(model.H)
        payload["objective_trace"] = list(model.objective_trace)
        payload["iterations_run"] = model.iterations_run
    else:
        payload["U"] = _rows(model.U)
        payload["sigma"] = _rows(model.sigma)
        payload["Vt"] = _rows(model.Vt)
    Path(path).write_text(json.dumps(payload, separators=(",", ":")) + "\n", encoding="utf-8")


def load_model(path: str | Path):
    """Returns ``(model, vocabulary, meta, stored_hash)``."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    vocab = Vocabulary(tuple(payload["vocabulary"]["terms"]), tuple(payload["vocabulary"]["df"]))
    terms, doc_ids, cfg = vocab.terms, payload.get("doc_ids") or None, payload["config"]
    kind = payload["kind"]
    if kind == "LDA":
        theta, phi = np.array(payload["theta"]), np.array(payload["phi"])
        model = LdaModel(theta, phi, np.zeros(0, np.int64), np.zeros(0, np.int64), LdaConfig(**cfg),
                         terms, doc_ids)
    elif kind == "NMF":
        model = NmfModel(np.array(payload["W"]), np.array(payload["H"]), payload["objective_trace"],
                         payload["iterations_run"], NmfConfig(**cfg), terms, doc_ids)
    elif kind == "LSA":
        model = LsaModel(np.array(payload["U"]), np.array(payload["sigma"]), np.array(payload["Vt"]),
                         cfg["k"], cfg.get("seed", 0), cfg.get("method", "exact"), terms, doc_ids)
    else:
        raise ValueError(f"{path}: unknown model kind {kind!r}")
    return model, vocab, payload.get("meta", {}), payload["vocabulary"]["hash"]


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.6f}"


def sweep_csv(cells: Sequence[CoherenceCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["set", "model", "k", "cv", "error"])
    for c in cells:
        w.writerow([c.set_id, c.model, c.k, _fmt(c.cv), c.error or ""])
    return buf.getvalue()


def read_sweep_csv(path: str | Path) -> list[CoherenceCell]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [CoherenceCell(r["set"], r["model"], int(r["k"]), float(r["cv"]) if r["cv"] else None,
                              error=r.get("error") or None) for r in csv.DictReader(fh)]


def topics_sidecar(cells: Sequence[CoherenceCell]) -> str:
    out = [{"set": c.set_id, "model": c.model, "k": c.k, "cv": c.cv,
            "per_topic": c.per_topic, "topics": c.topics, "error": c.error} for c in cells]
    return json.dumps(out, indent=1) + "\n"


def trends_csv(series: Sequence[TrendSeries]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["topic", "year", "count"])
    for s in series:
        for year, n in sorted(s.counts.items()):
            w.writerow([s.label, year, n])
    return buf.getvalue()


def shares_csv(series: Sequence[TrendSeries]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["topic", "percent"])
    for s in series:
        w.writerow([s.label, f"{s.share:.2f}"])
    return buf.getvalue()


def _md_table(header: Sequence[str], rows: Sequence[Sequence]) -> list[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(v) for v in row) + " |" for row in rows]
    return lines


def render_report(cells: Sequence[CoherenceCell] | None, best: CoherenceCell | None,
                  model=None, series: Sequence[TrendSeries] | None = None,
                  labels: dict[int, str] | None = None, title: str = "Topic trend report",
                  top_n: int = 10) -> str:
    labels = labels or {}
    lines = [f"# {title}", ""]
    if cells:
        lines += ["## Coherence sweep (C_V)", ""]
        lines += _md_table(["set", "model", "K", "C_V"],
                           [[c.set_id, c.model, c.k, _fmt(c.cv) if c.ok else f"failed ({c.error})"] for c in cells])
        lines.append("")
    if best is not None:
        lines += ["## Best cell", "", f"{best.set_id} / {best.model} / K={best.k}: C_V = {_fmt(best.cv)}", ""]
    if model is not None:
        lines += ["## Top words per topic", ""]
        rows = []
        for k in range(model.K):
            words = ", ".join(str(t) for t, _ in topic_terms(model, k, top_n))
            rows.append([k, labels.get(k, f"topic-{k}"), words])
        lines += _md_table(["#", "topic", f"top {top_n} words"], rows)
        lines.append("")
    if series:
        years = sorted({y for s in series for y in s.counts})
        lines += ["## Documents per topic and year", ""]
        lines += _md_table(["topic"] + [str(y) for y in years] + ["share %"],
                           [[s.label] + [s.counts.get(y, 0) for y in years] + [f"{s.share:.2f}"] for s in series])
        lines.append("")
    return "\n".join(lines)
