"""CSV ingestion for regression data sets."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError
from .linreg import Dataset

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LoadedData:
    """A data set plus the marginality rules implied by its interaction columns.

    ``rules`` holds ``(interaction, parent_a, parent_b)`` column indices, the
    format accepted by :func:`imstruct.structure.enumerate_structures`.
    """

    dataset: Dataset
    rules: tuple = ()


def parse_interactions(spec: str | Sequence[str] | None) -> list[tuple[str, str]]:
    """``"a:b,c:d"`` (or a list of ``"a:b"`` items) to ``[("a", "b"), ("c", "d")]``."""
    if not spec:
        return []
    items = spec.split(",") if isinstance(spec, str) else [i for s in spec for i in s.split(",")]
    pairs = []
    for item in items:
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 2 or not all(parts):
            raise DataError(f"interaction {item!r} must look like 'a:b'")
        pairs.append((parts[0].strip(), parts[1].strip()))
    return pairs


def _to_float(cell: str) -> float | None:
    try:
        value = float(cell)
    except ValueError:
        return None
    return value if np.isfinite(value) else None


def load_csv(
    path,
    response: str,
    exclude: Sequence[str] = (),
    standardize: bool = False,
    interactions: str | Sequence[str] | None = None,
) -> LoadedData:
    """Read a headed CSV into a :class:`LoadedData`.

    Every column other than the response is a covariate unless excluded or
    wholly non-numeric (an identifier column such as a country name is
    skipped with a log message).  A column with a mix of numbers and other
    cells is an error, reported with its 1-based data row.

    Interaction ``a:b`` appends the product column ``a.b`` after the main
    effects.  With ``standardize`` the main effects are centred and scaled
    before products are formed, and every column is rescaled afterwards.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"data file {str(path)!r} does not exist")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if any(c.strip() for c in r)]
    if not body:
        raise DataError(f"{path} has no data rows")
    for i, r in enumerate(body, start=1):
        if len(r) != len(header):
            raise DataError(f"row {i} has {len(r)} cells, header has {len(header)}", row=i)
    for name in [response, *exclude]:
        if name not in header:
            raise DataError(f"unknown column {name!r}", column=name)

    columns: dict[str, np.ndarray] = {}
    for j, name in enumerate(header):
        if name in exclude:
            continue
        parsed = [_to_float(r[j].strip()) for r in body]
        if name != response and all(v is None for v in parsed):
            log.info("skipping non-numeric column %r", name)
            continue
        for i, v in enumerate(parsed, start=1):
            if v is None:
                raise DataError(f"non-numeric cell {body[i - 1][j]!r} at row {i}, column {name!r}",
                                row=i, column=name)
        columns[name] = np.array(parsed)

    y = columns.pop(response)
    names = list(columns)
    x = np.column_stack([columns[c] for c in names]) if names else np.empty((y.size, 0))
    if standardize and names:
        x = Dataset(y, x, names).standardized().design

    rules = []
    products = []
    for a, b in parse_interactions(interactions):
        for c in (a, b):
            if c not in names:
                raise DataError(f"interaction refers to unknown covariate {c!r}", column=c)
        ia, ib = names.index(a), names.index(b)
        rules.append((len(names) + len(products), ia, ib))
        products.append((f"{a}.{b}", x[:, ia] * x[:, ib]))
    if products:
        names += [n for n, _ in products]
        x = np.column_stack([x] + [v for _, v in products])
    data = Dataset(y, x, names)
    if standardize and products:
        data = data.standardized()
    return LoadedData(data, tuple(rules))
