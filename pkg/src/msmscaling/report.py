"""Result tables in wide layout and their CSV/JSON serialization.

Every table is a list of flat dicts. CSV output starts with ``# key: value``
metadata lines (package version, master seed, config hash, table name)
followed by a header row; JSON output is ``{"meta": {...}, "rows": [...]}``.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .moments import GmmResult
from .montecarlo import Ensemble, ghe_label, lo_h_label, quantile_coincidence, v_label

TABLES = ("gmm", "ghe", "lo_v", "lo_rejections", "lo_h")


def config_hash(config: Mapping) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def metadata(table: str, config: Mapping, seed=None) -> dict:
    from . import __version__

    return {
        "table": table,
        "version": __version__,
        "seed": seed,
        "config_hash": config_hash(config),
    }


def gmm_table(label: str, results: Iterable[GmmResult]) -> list[dict]:
    return [{"series": label, **res.to_record()} for res in results]


def _coincide(empirical, ensemble: Ensemble, k, key):
    if empirical is None:
        return None
    vals = ensemble.values[(k, key)]
    try:
        return quantile_coincidence(empirical, vals)
    except ValueError:
        return None


def _compare_rows(label, empirical, ensemble, keys, index_name, index_values, coincidence=True):
    rows = []
    ks = list(ensemble.excluded)
    for key, idx in zip(keys, index_values):
        row = {"series": label, index_name: idx, "empirical": empirical.get(key) if empirical else None}
        for k in ks:
            s = ensemble.summary(k, key)
            row[f"k{k}_mean"] = s.mean
            row[f"k{k}_std"] = s.std
            if coincidence:
                row[f"k{k}_coincide"] = _coincide(row["empirical"], ensemble, k, key)
        rows.append(row)
    return rows


def ghe_table(label, empirical, ensemble: Ensemble) -> list[dict]:
    qs = ensemble.config.q_set
    return _compare_rows(label, empirical, ensemble, [ghe_label(q) for q in qs], "q", list(qs))


def lo_v_table(label, empirical, ensemble: Ensemble) -> list[dict]:
    taus = ensemble.config.tau_set
    return _compare_rows(
        label, empirical, ensemble, [v_label(t) for t in taus], "tau", list(taus), coincidence=False
    )


def lo_h_table(label, empirical, ensemble: Ensemble) -> list[dict]:
    taus = ensemble.config.tau_set
    return _compare_rows(label, empirical, ensemble, [lo_h_label(t) for t in taus], "tau", list(taus))


def rejection_rows(label, ensemble: Ensemble) -> list[dict]:
    rows = []
    for tau in ensemble.config.tau_set:
        row = {"series": label, "tau": tau}
        for k in ensemble.excluded:
            s = ensemble.summary(k, v_label(tau))
            row[f"k{k}_reject_95"] = s.reject_95
            row[f"k{k}_reject_99"] = s.reject_99
        rows.append(row)
    return rows


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    return str(v)


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, tuple):
        return list(v)
    return v


def render(rows: list[dict], meta: dict, fmt: str = "csv") -> str:
    if fmt == "json":
        clean = [{k: _plain(v) for k, v in row.items()} for row in rows]
        return json.dumps({"meta": meta, "rows": clean}, indent=2, sort_keys=False) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}: {_cell(value)}\n")
    columns = list(dict.fromkeys(c for row in rows for c in row))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def write(rows: list[dict], meta: dict, path, fmt: str = "csv") -> None:
    Path(path).write_text(render(rows, meta, fmt), encoding="utf-8")
