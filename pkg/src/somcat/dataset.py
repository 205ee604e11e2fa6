"""Categorical survey data and its complete disjunctive encoding.

A dataset is N individuals answering K qualitative questions, each question
having a fixed list of modalities (possible answers).  Quantitative columns
can be discretized into modalities via break-points.  The complete
disjunctive table is the N x M one-hot encoding (M = total modality count)
with exactly one 1 per question block in every row.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import jsonio
from .errors import DataError


@dataclass(frozen=True)
class VariableSpec:
    """One qualitative variable: its name and ordered modality labels.

    For a discretized quantitative column, ``breaks`` holds the strictly
    increasing break-points.  Intervals are left-closed/right-open, with an
    implicit open interval below the first break and a closed-at-left
    interval above the last, so every finite value falls in exactly one bin.
    ``descending=True`` maps the first label to the highest interval (the
    convention used when labels are transcribed from a table that lists
    ">= x" first).
    """

    name: str
    modalities: tuple[str, ...]
    breaks: tuple[float, ...] | None = None
    descending: bool = False

    def __post_init__(self):
        if not self.name:
            raise DataError("variable name must be non-empty")
        if len(self.modalities) < 2:
            raise DataError(
                f"variable {self.name!r} needs at least 2 modalities, "
                f"got {len(self.modalities)}"
            )
        if len(set(self.modalities)) != len(self.modalities):
            raise DataError(f"variable {self.name!r} has duplicate modality labels")
        if self.breaks is not None:
            if any(b2 <= b1 for b1, b2 in zip(self.breaks, self.breaks[1:])):
                raise DataError(
                    f"break-points of {self.name!r} must be strictly increasing"
                )
            if len(self.modalities) != len(self.breaks) + 1:
                raise DataError(
                    f"variable {self.name!r}: {len(self.breaks)} break-points "
                    f"need {len(self.breaks) + 1} labels, got {len(self.modalities)}"
                )

    @property
    def is_binned(self) -> bool:
        return self.breaks is not None

    def bin_value(self, value: float) -> int:
        """Modality index for a numeric value (binned variables only)."""
        if self.breaks is None:
            raise DataError(f"variable {self.name!r} is not binned")
        interval = int(np.searchsorted(self.breaks, value, side="right"))
        if self.descending:
            interval = len(self.breaks) - interval
        return interval

    def to_json(self) -> dict:
        out: dict = {"name": self.name, "modalities": list(self.modalities)}
        if self.breaks is not None:
            out["breaks"] = list(self.breaks)
            out["order"] = "descending" if self.descending else "ascending"
        return out

    @classmethod
    def from_json(cls, data: dict) -> "VariableSpec":
        breaks = data.get("breaks")
        order = data.get("order", "ascending")
        if order not in ("ascending", "descending"):
            raise DataError(f"unknown bin order {order!r}")
        return cls(
            name=data["name"],
            modalities=tuple(data["modalities"]),
            breaks=None if breaks is None else tuple(float(b) for b in breaks),
            descending=order == "descending",
        )


class CategoricalDataset:
    """N individuals x K qualitative variables, cells are modality indices."""

    def __init__(
        self,
        individuals: list[str],
        variables: list[VariableSpec],
        cells: np.ndarray,
    ):
        self.individuals = list(individuals)
        self.variables = list(variables)
        self.cells = np.asarray(cells, dtype=np.int64)
        self._validate()

    def _validate(self) -> None:
        n, k = len(self.individuals), len(self.variables)
        if n < 1 or k < 1:
            raise DataError("dataset needs at least one individual and one variable")
        if self.cells.shape != (n, k):
            raise DataError(
                f"cells shape {self.cells.shape} does not match "
                f"{n} individuals x {k} variables"
            )
        seen: set[str] = set()
        for ident in self.individuals:
            if ident in seen:
                raise DataError(f"duplicate individual id {ident!r}")
            seen.add(ident)
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise DataError("duplicate variable names")
        for j, var in enumerate(self.variables):
            col = self.cells[:, j]
            if col.min() < 0 or col.max() >= len(var.modalities):
                raise DataError(
                    f"cell value out of range for variable {var.name!r}"
                )

    @property
    def n_individuals(self) -> int:
        return len(self.individuals)

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def n_modalities(self) -> int:
        return sum(len(v.modalities) for v in self.variables)

    @property
    def block_offsets(self) -> tuple[int, ...]:
        """Start column of each variable's block in the disjunctive table."""
        offsets, pos = [], 0
        for var in self.variables:
            offsets.append(pos)
            pos += len(var.modalities)
        return tuple(offsets)

    @property
    def global_modality_names(self) -> tuple[str, ...]:
        """Column labels 'VARIABLE.MODALITY', unique across the dataset."""
        return tuple(
            f"{var.name}.{mod}" for var in self.variables for mod in var.modalities
        )

    def variable_index(self, name: str) -> int:
        for i, var in enumerate(self.variables):
            if var.name == name:
                return i
        raise DataError(f"unknown variable {name!r}")

    def to_json(self) -> dict:
        return {
            "individuals": list(self.individuals),
            "variables": [v.to_json() for v in self.variables],
            "cells": self.cells.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "CategoricalDataset":
        return cls(
            individuals=list(data["individuals"]),
            variables=[VariableSpec.from_json(v) for v in data["variables"]],
            cells=np.asarray(data["cells"], dtype=np.int64),
        )

    def sha256(self) -> str:
        return jsonio.sha256_of(self.to_json())


@dataclass(eq=False)
class DisjunctiveTable:
    """Complete disjunctive table: one-hot rows with one 1 per question block."""

    entries: np.ndarray                 # N x M, 0/1
    block_offsets: tuple[int, ...]
    counts: np.ndarray                  # column sums b_j, length M
    names: tuple[str, ...]              # global modality names
    individuals: tuple[str, ...]
    n_variables: int

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.int64)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        n, m = self.entries.shape
        k = self.n_variables
        if len(self.names) != m or len(self.block_offsets) != k:
            raise DataError("disjunctive table labels do not match its shape")
        bounds = list(self.block_offsets) + [m]
        for blk in range(k):
            lo, hi = bounds[blk], bounds[blk + 1]
            if not np.all(self.entries[:, lo:hi].sum(axis=1) == 1):
                raise DataError(f"block {blk} must contain exactly one 1 per row")
        if not np.array_equal(self.counts, self.entries.sum(axis=0)):
            raise DataError("modality counts do not match column sums")
        if int(self.counts.sum()) != n * k:
            raise DataError("sum of modality counts must equal N*K")

    @property
    def n_individuals(self) -> int:
        return self.entries.shape[0]

    @property
    def n_modalities(self) -> int:
        return self.entries.shape[1]

    def column_index(self, name: str) -> int:
        """Column of a global name, or of a bare label when unambiguous."""
        if name in self.names:
            return self.names.index(name)
        hits = [j for j, full in enumerate(self.names) if full.split(".", 1)[1] == name]
        if len(hits) == 1:
            return hits[0]
        if not hits:
            raise DataError(f"unknown modality {name!r}")
        raise DataError(f"modality label {name!r} is ambiguous; use VAR.MODALITY")

    def to_json(self) -> dict:
        return {
            "n_individuals": self.n_individuals,
            "n_variables": self.n_variables,
            "n_modalities": self.n_modalities,
            "block_offsets": list(self.block_offsets),
            "modality_counts": self.counts.tolist(),
            "names": list(self.names),
            "individuals": list(self.individuals),
            "ones": [np.flatnonzero(row).tolist() for row in self.entries],
        }


def to_disjunctive(ds: CategoricalDataset) -> DisjunctiveTable:
    """One-hot encode a dataset; row sums all equal K by construction."""
    n, m = ds.n_individuals, ds.n_modalities
    entries = np.zeros((n, m), dtype=np.int64)
    offsets = ds.block_offsets
    for j, off in enumerate(offsets):
        entries[np.arange(n), off + ds.cells[:, j]] = 1
    return DisjunctiveTable(
        entries=entries,
        block_offsets=offsets,
        counts=entries.sum(axis=0),
        names=ds.global_modality_names,
        individuals=tuple(ds.individuals),
        n_variables=ds.n_variables,
    )


def load_schema(path: str | Path) -> list[VariableSpec]:
    """Read a schema/binning config file (see README for the key layout)."""
    data = jsonio.load(path)
    if not isinstance(data, dict) or "variables" not in data:
        raise DataError(f"schema file {path} must contain a 'variables' list")
    return [VariableSpec.from_json(v) for v in data["variables"]]


def ingest_csv(
    path: str | Path,
    schema: list[VariableSpec] | str = "infer",
) -> CategoricalDataset:
    """Read a survey CSV (header row, first column = individual id).

    With ``schema="infer"`` every distinct cell string becomes a modality in
    first-appearance order.  With an explicit schema, the listed variables
    are matched to CSV columns by name (unlisted columns are ignored),
    unknown labels are rejected, and binned variables are discretized by
    their break-points.  Missing values are rejected.
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            rows = [row for row in reader if row]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if len(rows) < 2:
        raise DataError(f"{path}: need a header row and at least one individual")
    header, body = rows[0], rows[1:]
    if len(header) < 2:
        raise DataError(f"{path}: need an id column plus at least one variable")
    col_names = [h.strip() for h in header[1:]]

    ids: list[str] = []
    raw_cols: list[list[str]] = [[] for _ in col_names]
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} fields")
        ids.append(row[0].strip())
        for j, cell in enumerate(row[1:]):
            cell = cell.strip()
            if not cell:
                raise DataError(
                    f"{path}:{lineno}: empty cell in column {col_names[j]!r}"
                )
            raw_cols[j].append(cell)

    if schema == "infer":
        variables = []
        for name, col in zip(col_names, raw_cols):
            labels: list[str] = []
            for cell in col:
                if cell not in labels:
                    labels.append(cell)
            variables.append(VariableSpec(name=name, modalities=tuple(labels)))
        used = list(range(len(col_names)))
    else:
        variables = list(schema)
        used = []
        for var in variables:
            if var.name not in col_names:
                raise DataError(f"{path}: schema variable {var.name!r} not in header")
            used.append(col_names.index(var.name))

    cells = np.zeros((len(ids), len(variables)), dtype=np.int64)
    for k, (var, j) in enumerate(zip(variables, used)):
        col = raw_cols[j]
        if var.is_binned:
            for i, cell in enumerate(col):
                try:
                    value = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: non-numeric value {cell!r} in binned "
                        f"column {var.name!r}"
                    ) from None
                cells[i, k] = var.bin_value(value)
        else:
            lookup = {mod: idx for idx, mod in enumerate(var.modalities)}
            for i, cell in enumerate(col):
                if cell not in lookup:
                    raise DataError(
                        f"{path}: unknown modality {cell!r} for variable {var.name!r}"
                    )
                cells[i, k] = lookup[cell]

    return CategoricalDataset(individuals=ids, variables=variables, cells=cells)


def expand_from_contingency(
    table,
    row_labels: list[str],
    col_labels: list[str],
    var_names: tuple[str, str] = ("row", "col"),
) -> CategoricalDataset:
    """Rebuild individuals from an I x J count table (two variables, K=2).

    Cell (i, j) with count c yields c identical individuals choosing row
    modality i and column modality j; ids are ``ROW:COL:n``.
    """
    counts = np.asarray(table)
    if counts.ndim != 2:
        raise DataError("contingency table must be 2-dimensional")
    if np.any(counts < 0) or not np.all(counts == counts.astype(np.int64)):
        raise DataError("contingency table must hold nonnegative integer counts")
    counts = counts.astype(np.int64)
    if counts.shape != (len(row_labels), len(col_labels)):
        raise DataError("contingency labels do not match the table shape")
    if counts.sum() == 0:
        raise DataError("contingency table is all zero")

    ids: list[str] = []
    cells: list[tuple[int, int]] = []
    for i, rlab in enumerate(row_labels):
        for j, clab in enumerate(col_labels):
            for t in range(int(counts[i, j])):
                ids.append(f"{rlab}:{clab}:{t + 1}")
                cells.append((i, j))
    variables = [
        VariableSpec(name=var_names[0], modalities=tuple(row_labels)),
        VariableSpec(name=var_names[1], modalities=tuple(col_labels)),
    ]
    return CategoricalDataset(
        individuals=ids, variables=variables, cells=np.array(cells, dtype=np.int64)
    )


def cross_tabulate(ds: CategoricalDataset, var_a: int, var_b: int) -> np.ndarray:
    """Count matrix of variable pair (a, b); inverse check for expansion."""
    ma = len(ds.variables[var_a].modalities)
    mb = len(ds.variables[var_b].modalities)
    out = np.zeros((ma, mb), dtype=np.int64)
    np.add.at(out, (ds.cells[:, var_a], ds.cells[:, var_b]), 1)
    return out
