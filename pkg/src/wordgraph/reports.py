"""CSV/JSON serialization of profiles, fits and plot data.

Reals are written with 6 fractional digits and ``.`` as decimal separator,
so files are byte-stable and parse -> re-emit round-trips exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from wordgraph.errors import DataError
from wordgraph.graphcore import ATTRIBUTES, AttributeVector
from wordgraph.pipeline import CorpusRecord, SkipEntry, TextProfile
from wordgraph.stats import CorrelationResult, FitResult, YearMean

PROFILE_FIELDS = ("doc_id", "grade", "window_count", *ATTRIBUTES)
ANALYZE_FIELDS = ("doc_id", "window_count", *ATTRIBUTES)
FIT_FIELDS = (
    "attribute", "rho", "p_value", "significant", "f0", "f_inf",
    "T", "T_rounded", "r_squared", "mse", "identifiable",
)
CURVE_FIELDS = ("attribute", "t", "empirical_mean", "empirical_n", "fitted_value")
YEAR_FIELDS = ("grade", "count", *ATTRIBUTES)
SD_FIELDS = ("attribute", "sd")
SKIP_FIELDS = ("doc_id", "reason", "detail")
CURVE_TIMES = tuple(i * 0.25 for i in range(45))


def fmt(x: float | None) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def fmt_bool(b: bool) -> str:
    return "true" if b else "false"


def parse_float(s: str, where: str) -> float:
    if s == "":
        return math.nan
    try:
        return float(s)
    except ValueError:
        raise DataError(f"{where}: {s!r} is not a number") from None


def parse_int(s: str, where: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise DataError(f"{where}: {s!r} is not an integer") from None


def parse_bool(s: str, where: str) -> bool:
    if s not in ("true", "false"):
        raise DataError(f"{where}: {s!r} is not true/false")
    return s == "true"


def _json_num(x: float | None) -> float | None:
    if x is None or math.isnan(x):
        return None
    v = round(x, 6)
    return 0.0 if v == 0 else v


def render_csv(fields: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    writer.writerows(rows)
    return buf.getvalue()


def render_json(rows: Iterable[Mapping[str, object]]) -> str:
    return json.dumps(list(rows), indent=2, ensure_ascii=False) + "\n"


def _read_rows(path: Path, fields: Sequence[str]) -> list[tuple[int, dict[str, str]]]:
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    reader = csv.DictReader(io.StringIO(text, newline=""))
    if tuple(reader.fieldnames or ()) != tuple(fields):
        raise DataError(f"{path}: expected header {','.join(fields)}")
    return [(reader.line_num, row) for row in reader]


def write_text(path: Path, content: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(content)
    return path


# -- profiles -------------------------------------------------------------------


def _profile_values(p: TextProfile) -> list[float]:
    return list(p.mean.as_tuple())


def render_profiles(records: Sequence[CorpusRecord], fmt_name: str = "csv") -> str:
    if fmt_name == "json":
        return render_json(
            {"doc_id": r.doc_id, "grade": r.grade, "window_count": r.profile.window_count,
             **{a: _json_num(v) for a, v in zip(ATTRIBUTES, _profile_values(r.profile))}}
            for r in records
        )
    return render_csv(
        PROFILE_FIELDS,
        ([r.doc_id, str(r.grade), str(r.profile.window_count),
          *map(fmt, _profile_values(r.profile))] for r in records),
    )


def render_analysis(profile: TextProfile, fmt_name: str = "csv") -> str:
    values = _profile_values(profile)
    if fmt_name == "json":
        obj = {"doc_id": profile.doc_id, "window_count": profile.window_count,
               **{a: _json_num(v) for a, v in zip(ATTRIBUTES, values)}}
        return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"
    return render_csv(ANALYZE_FIELDS, [[profile.doc_id, str(profile.window_count), *map(fmt, values)]])


def read_profiles(path: str | Path) -> list[CorpusRecord]:
    """Load a profiles table written by :func:`render_profiles` (CSV or JSON by suffix)."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        try:
            rows = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise DataError(f"cannot read {path}: {exc}") from None
        if not isinstance(rows, list):
            raise DataError(f"{path}: expected a JSON list of profiles")
        raw = []
        for i, row in enumerate(rows, start=1):
            if not isinstance(row, dict) or set(row) != set(PROFILE_FIELDS):
                raise DataError(f"{path}: entry {i} must have fields {','.join(PROFILE_FIELDS)}")
            raw.append((i, {k: "" if row[k] is None else str(row[k]) for k in PROFILE_FIELDS}))
    else:
        raw = _read_rows(path, PROFILE_FIELDS)
    records = []
    seen: set[str] = set()
    for line, row in raw:
        where = f"{path}:{line}"
        if row["doc_id"] in seen:
            raise DataError(f"{where}: duplicate doc_id {row['doc_id']!r}")
        seen.add(row["doc_id"])
        mean = AttributeVector.from_sequence([parse_float(row[a], where) for a in ATTRIBUTES])
        profile = TextProfile(row["doc_id"], parse_int(row["window_count"], where), mean)
        records.append(CorpusRecord(row["doc_id"], parse_int(row["grade"], where), profile))
    return sorted(records, key=lambda r: r.doc_id)


def render_skips(skips: Sequence[SkipEntry], fmt_name: str = "csv") -> str:
    if fmt_name == "json":
        return render_json({"doc_id": s.doc_id, "reason": s.reason, "detail": s.detail} for s in skips)
    return render_csv(SKIP_FIELDS, ([s.doc_id, s.reason, s.detail] for s in skips))


# -- fits -------------------------------------------------------------------------


@dataclass(frozen=True)
class FitRow:
    """One line of the fit/correlation report."""

    attribute: str
    rho: float
    p_value: float
    significant: bool
    f0: float
    f_inf: float
    T: float
    T_rounded: int | None
    r_squared: float
    mse: float
    identifiable: bool

    @classmethod
    def combine(cls, corr: CorrelationResult, fit: FitResult) -> FitRow:
        if corr.attribute != fit.attribute:
            raise ValueError(f"attribute mismatch: {corr.attribute} vs {fit.attribute}")
        return cls(fit.attribute, corr.rho, corr.p_value, corr.significant, fit.f0, fit.f_inf,
                   fit.T, fit.T_rounded, fit.r_squared, fit.mse, fit.identifiable)

    def cells(self) -> list[str]:
        return [
            self.attribute, fmt(self.rho), fmt(self.p_value), fmt_bool(self.significant),
            fmt(self.f0), fmt(self.f_inf), fmt(self.T),
            "" if self.T_rounded is None else str(self.T_rounded),
            fmt(self.r_squared), fmt(self.mse), fmt_bool(self.identifiable),
        ]

    def json_obj(self) -> dict[str, object]:
        return {
            "attribute": self.attribute, "rho": _json_num(self.rho), "p_value": _json_num(self.p_value),
            "significant": self.significant, "f0": _json_num(self.f0), "f_inf": _json_num(self.f_inf),
            "T": _json_num(self.T), "T_rounded": self.T_rounded,
            "r_squared": _json_num(self.r_squared), "mse": _json_num(self.mse),
            "identifiable": self.identifiable,
        }

    def predict(self, t: np.ndarray) -> np.ndarray:
        fit = FitResult(self.attribute, self.f0, self.f_inf, self.T, self.r_squared, self.mse,
                        self.identifiable, 0)
        return fit.predict(t)


def render_fits(rows: Sequence[FitRow], fmt_name: str = "csv") -> str:
    if fmt_name == "json":
        return render_json(r.json_obj() for r in rows)
    return render_csv(FIT_FIELDS, (r.cells() for r in rows))


def read_fits(path: str | Path) -> list[FitRow]:
    path = Path(path)
    if path.suffix.lower() == ".json":
        try:
            objs = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise DataError(f"cannot read {path}: {exc}") from None
        rows = []
        for i, o in enumerate(objs, start=1):
            try:
                rows.append(FitRow(
                    o["attribute"], o["rho"], o["p_value"], bool(o["significant"]), o["f0"],
                    o["f_inf"], math.nan if o["T"] is None else o["T"], o["T_rounded"],
                    o["r_squared"], o["mse"], bool(o["identifiable"]),
                ))
            except (KeyError, TypeError) as exc:
                raise DataError(f"{path}: entry {i} malformed ({exc})") from None
        return rows
    out = []
    for line, r in _read_rows(path, FIT_FIELDS):
        w = f"{path}:{line}"
        out.append(FitRow(
            r["attribute"], parse_float(r["rho"], w), parse_float(r["p_value"], w),
            parse_bool(r["significant"], w), parse_float(r["f0"], w), parse_float(r["f_inf"], w),
            parse_float(r["T"], w), None if r["T_rounded"] == "" else parse_int(r["T_rounded"], w),
            parse_float(r["r_squared"], w), parse_float(r["mse"], w), parse_bool(r["identifiable"], w),
        ))
    return out


# -- plot data and per-year statistics ----------------------------------------------


def render_curves(rows: Sequence[FitRow], year_table: Mapping[int, YearMean]) -> str:
    lines = []
    for row in rows:
        fitted = row.predict(np.asarray(CURVE_TIMES))
        for t, f in zip(CURVE_TIMES, fitted):
            year = year_table.get(int(t)) if float(t).is_integer() else None
            emp = "" if year is None else fmt(getattr(year.mean, row.attribute))
            n = "" if year is None else str(year.count)
            lines.append([row.attribute, fmt(t), emp, n, fmt(float(f))])
    return render_csv(CURVE_FIELDS, lines)


def render_year_means(year_table: Mapping[int, YearMean]) -> str:
    return render_csv(
        YEAR_FIELDS,
        ([str(g), str(y.count), *map(fmt, y.mean.as_tuple())] for g, y in sorted(year_table.items())),
    )


def read_year_means(path: str | Path) -> dict[int, YearMean]:
    path = Path(path)
    table = {}
    for line, r in _read_rows(path, YEAR_FIELDS):
        w = f"{path}:{line}"
        g = parse_int(r["grade"], w)
        mean = AttributeVector.from_sequence([parse_float(r[a], w) for a in ATTRIBUTES])
        table[g] = YearMean(g, parse_int(r["count"], w), mean)
    return table


def render_sd(sd: Mapping[str, float]) -> str:
    return render_csv(SD_FIELDS, ([a, fmt(sd[a])] for a in ATTRIBUTES))


def read_sd(path: str | Path) -> dict[str, float]:
    path = Path(path)
    return {r["attribute"]: parse_float(r["sd"], f"{path}:{line}") for line, r in _read_rows(path, SD_FIELDS)}
