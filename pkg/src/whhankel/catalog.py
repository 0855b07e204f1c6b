"""Symbol-pair catalogs: parsing, execution, and expectation checking.

Catalog files are UTF-8 and line-oriented; '#' starts a comment.  Each entry
is pipe-separated:

    name | a_expr | b_expr | expected_json | notes

An empty b_expr marks a scalar entry (the operator W(a) alone).  The expected
field, when present, pins classifier output: for pairs
``{"plus": {"ker": "1", "coker": "1"}, "minus": {...}}``, for scalars
``{"ker": "1", "coker": "0"}``; dimension values use the report notation
("2", ">=1", "inf", "?").  Entries run classify -> oracle verify; an entry
passes when the classifier matches every pinned expectation and no oracle
verdict fails.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import dsl, kernels, oracle
from .classify import MatchingPair, classify as run_classify, scalar_wh_classify
from .errors import WhhError


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    a_expr: str
    b_expr: str = ""
    expected: dict | None = None
    notes: str = ""

    @property
    def is_scalar(self):
        return not self.b_expr.strip()


def parse_catalog(text) -> list[CatalogEntry]:
    entries = []
    names = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) < 2:
            raise ValueError(f"line {lineno}: need at least 'name | a_expr'")
        name = parts[0]
        if name in names:
            raise ValueError(f"line {lineno}: duplicate entry name {name!r}")
        names.add(name)
        expected = None
        if len(parts) > 3 and parts[3]:
            expected = json.loads(parts[3])
        entries.append(
            CatalogEntry(
                name=name,
                a_expr=parts[1],
                b_expr=parts[2] if len(parts) > 2 else "",
                expected=expected,
                notes=parts[4] if len(parts) > 4 else "",
            )
        )
    return entries


def load_catalog(path) -> list[CatalogEntry]:
    with open(path, encoding="utf-8") as fh:
        return parse_catalog(fh.read())


def shipped_catalog_path(name="catalog.txt"):
    from importlib.resources import files

    return files("whhankel.data").joinpath(name)


def _check_expected_sign(expected_side, side_report, label, mismatches):
    for fld in ("ker", "coker"):
        if fld in expected_side:
            got = getattr(side_report, fld).describe()
            if got != str(expected_side[fld]):
                mismatches.append(
                    f"{label}.{fld}: expected {expected_side[fld]}, classified {got}"
                )
    if "status" in expected_side and side_report.status != expected_side["status"]:
        mismatches.append(
            f"{label}.status: expected {expected_side['status']}, "
            f"classified {side_report.status}"
        )


def run_entry(entry: CatalogEntry, grid=None, cfg=oracle.DEFAULT_CONFIG,
              kappa_tester=None) -> dict:
    """Classify and oracle-verify one entry; never raises for entry-level
    failures (they are reported as status 'error')."""
    grid = grid or oracle.Grid()
    result = {"name": entry.name, "notes": entry.notes}
    try:
        a = dsl.parse_symbol(entry.a_expr)
        if entry.is_scalar:
            report = scalar_wh_classify(a)
            table = oracle.verify_scalar(report, a, grid, cfg)
        else:
            b = dsl.parse_symbol(entry.b_expr)
            pair = MatchingPair(a, b)
            tester = kappa_tester or kernels.make_kappa_tester(grid, cfg)
            report = run_classify(pair, kappa_tester=tester)
            table = oracle.verify(report, pair, grid, cfg)
    except WhhError as err:
        result["status"] = "error"
        result["error"] = type(err).__name__
        result["message"] = str(err)
        return result
    mismatches = []
    if entry.expected:
        if entry.is_scalar:
            _check_expected_sign(entry.expected, report, "scalar", mismatches)
        else:
            for side in ("plus", "minus"):
                if side in entry.expected:
                    _check_expected_sign(
                        entry.expected[side], getattr(report, side), side, mismatches
                    )
    result["report"] = report.to_dict()
    result["verdicts"] = [r.to_dict() for r in table.rows]
    result["mismatches"] = mismatches
    result["status"] = "pass" if table.ok and not mismatches else "fail"
    return result


def run_catalog(entries, grid=None, cfg=oracle.DEFAULT_CONFIG, workers=2) -> list[dict]:
    """Run entries in a bounded worker pool; output ordered by entry name."""
    grid = grid or oracle.Grid()
    tester = kernels.make_kappa_tester(grid, cfg)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = {
            pool.submit(run_entry, e, grid, cfg, tester): e.name for e in entries
        }
        results = [f.result() for f in futures]
    return sorted(results, key=lambda r: r["name"])


def summarize(results) -> str:
    width = max([len(r["name"]) for r in results] + [4])
    lines = [f"{'name':<{width}}  status  detail"]
    for r in results:
        if r["status"] == "error":
            detail = f"{r['error']}: {r['message']}"
        elif r["status"] == "fail":
            bad = [v for v in r.get("verdicts", []) if v["verdict"] == "fail"]
            detail = "; ".join(
                r.get("mismatches", [])
                + [f"{v['cell']}: predicted {v['predicted']}, measured {v['measured']}"
                   for v in bad]
            )
        else:
            detail = ""
        lines.append(f"{r['name']:<{width}}  {r['status']:<6}  {detail}")
    npass = sum(1 for r in results if r["status"] == "pass")
    lines.append(f"{npass}/{len(results)} entries passed")
    return "\n".join(lines)
