"""Result rows and their CSV form.

The file starts with a schema line, then the fixed header. Empty cells mean
"not applicable". Floats are written with ``repr`` so every row reads back
to an equal ``ResultRow``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, dataclass, fields
from typing import Iterable

SCHEMA = "#schema=rpreturn-results/1"
COLUMNS = ("experiment", "family", "gamma", "n", "delta_mu", "alpha", "variant", "seed", "index",
           "metric", "value")


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    metric: str
    value: float
    family: str | None = None
    gamma: float | None = None
    n: int | None = None
    delta_mu: float | None = None
    alpha: float | None = None
    variant: str | None = None
    seed: int | None = None
    index: int | None = None

    def __eq__(self, other):
        if not isinstance(other, ResultRow):
            return NotImplemented
        a, b = astuple(self), astuple(other)
        return all(x == y or (isinstance(x, float) and isinstance(y, float)
                              and math.isnan(x) and math.isnan(y)) for x, y in zip(a, b))

    __hash__ = None


_TYPES = {f.name: f.type for f in fields(ResultRow)}


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(name, text):
    if text == "":
        return None
    kind = str(_TYPES[name])
    if kind.startswith("float"):
        return float(text)
    if kind.startswith("int"):
        return int(text)
    return text


def write_csv(rows: Iterable[ResultRow], fh) -> None:
    fh.write(SCHEMA + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])


def to_csv_string(rows: Iterable[ResultRow]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def read_csv(fh) -> list[ResultRow]:
    first = fh.readline().strip()
    if first != SCHEMA:
        raise ValueError(f"unrecognized results schema line {first!r}")
    reader = csv.reader(fh)
    header = tuple(next(reader))
    if header != COLUMNS:
        raise ValueError(f"unexpected header {header!r}")
    return [ResultRow(**{c: _parse(c, v) for c, v in zip(COLUMNS, line)}) for line in reader if line]


def cells(rows: Iterable[ResultRow], experiment: str | None = None) -> dict:
    """Group summary rows (``index is None``) into ``{cell_key: {metric: value}}``.

    The cell key is ``(family, gamma, n, delta_mu, alpha, variant)``.
    """
    out: dict = {}
    for r in rows:
        if r.index is not None or (experiment is not None and r.experiment != experiment):
            continue
        key = (r.family, r.gamma, r.n, r.delta_mu, r.alpha, r.variant)
        out.setdefault(key, {})[r.metric] = r.value
    return out
