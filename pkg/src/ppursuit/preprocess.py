"""Count-matrix ingestion, zero-fraction gene filtering and quantile normalization.

CSV layout: the header starts with the literal ``cell_id`` followed by gene ids;
each following row is a cell id then its counts. Label files have the header
``cell_id,label``.

Quantile normalization is applied to whatever values the matrix holds; the
pipeline feeds it raw counts.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from os import PathLike
from typing import Mapping, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import ContractError, DimensionError, EmptyResultError, ParseError

DEFAULT_ZERO_FRACTION = 0.8


@dataclass(frozen=True)
class CountMatrix:
    """Nonnegative cell-by-gene matrix with row (cell) and column (gene) ids."""

    cell_ids: tuple[str, ...]
    gene_ids: tuple[str, ...]
    counts: NDArray[np.float64]

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.float64)
        object.__setattr__(self, "cell_ids", tuple(self.cell_ids))
        object.__setattr__(self, "gene_ids", tuple(self.gene_ids))
        object.__setattr__(self, "counts", counts)
        if counts.ndim != 2 or counts.shape != (len(self.cell_ids), len(self.gene_ids)):
            raise DimensionError(
                f"counts shape {counts.shape} does not match "
                f"{len(self.cell_ids)} cell ids x {len(self.gene_ids)} gene ids"
            )
        for kind, ids in (("cell", self.cell_ids), ("gene", self.gene_ids)):
            if len(set(ids)) != len(ids):
                raise ValueError(f"duplicate {kind} id: {_first_duplicate(ids)!r}")
        bad = ~np.isfinite(counts) | (counts < 0)
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise ValueError(f"count at cell {self.cell_ids[r]!r}, gene {self.gene_ids[c]!r} is not a finite nonnegative number")

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape


def _first_duplicate(ids: Sequence[str]) -> str | None:
    seen = set()
    for i in ids:
        if i in seen:
            return i
        seen.add(i)
    return None


def filter_genes(M: CountMatrix, zero_fraction_threshold: float = DEFAULT_ZERO_FRACTION) -> CountMatrix:
    """Drop genes that are zero in *more than* ``zero_fraction_threshold`` of cells.

    A gene exactly at the threshold is kept. Cell order and the relative order
    of surviving genes are unchanged.
    """
    if not 0 < zero_fraction_threshold <= 1:
        raise ValueError(f"zero_fraction_threshold must be in (0, 1], got {zero_fraction_threshold}")
    n_cells = M.counts.shape[0]
    zero_frac = np.count_nonzero(M.counts == 0, axis=0) / n_cells
    keep = zero_frac <= zero_fraction_threshold
    if not keep.any():
        raise EmptyResultError(
            f"all {len(M.gene_ids)} genes are zero in more than {zero_fraction_threshold:g} of cells"
        )
    genes = tuple(g for g, k in zip(M.gene_ids, keep) if k)
    return CountMatrix(M.cell_ids, genes, M.counts[:, keep])


def quantile_reference(values: NDArray[np.float64]) -> NDArray[np.float64]:
    """Per-rank mean of the rows' order statistics."""
    return np.sort(values, axis=1).mean(axis=0)


def quantile_normalize(M: CountMatrix) -> CountMatrix:
    """Map every cell onto the shared reference distribution by rank.

    The reference is the per-rank mean of all cells' sorted counts. Tied values
    within a cell all receive the mean of the reference over their rank span.
    """
    values = M.counts
    ref = quantile_reference(values)
    # prefix sums give O(1) means over any rank span
    csum = np.concatenate(([0.0], np.cumsum(ref)))
    out = np.empty_like(values)
    for i, row in enumerate(values):
        order = np.argsort(row, kind="stable")
        srt = row[order]
        starts = np.flatnonzero(np.concatenate(([True], srt[1:] != srt[:-1])))
        ends = np.append(starts[1:], srt.size)
        span_mean = (csum[ends] - csum[starts]) / (ends - starts)
        out[i, order] = np.repeat(span_mean, ends - starts)
    return CountMatrix(M.cell_ids, M.gene_ids, out)


def preprocess(M: CountMatrix, zero_fraction_threshold: float = DEFAULT_ZERO_FRACTION,
               quantile: bool = True) -> CountMatrix:
    """Filter genes, then quantile-normalize. The order is fixed."""
    out = filter_genes(M, zero_fraction_threshold)
    if quantile:
        out = quantile_normalize(out)
    return out


def _open_text(path):
    # newline="" lets csv handle both LF and CRLF
    return open(path, newline="", encoding="utf-8")


def load_counts(path: str | PathLike, format: str = "dense-csv") -> CountMatrix:
    """Read a dense CSV count matrix.

    Raises
    ------
    ParseError
        On a bad header, duplicate ids, ragged rows, non-numeric or negative
        entries. The message gives 1-based line and column numbers.
    """
    if format != "dense-csv":
        raise ValueError(f"unsupported format {format!r}")
    with _open_text(path) as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if not header or header[0].lstrip("﻿") != "cell_id":
            raise ParseError(f"{path}: line 1, column 1: header must start with 'cell_id'")
        genes = header[1:]
        if not genes:
            raise ParseError(f"{path}: line 1: no gene columns")
        dup = _first_duplicate(genes)
        if dup is not None:
            col = genes.index(dup, genes.index(dup) + 1) + 2
            raise ParseError(f"{path}: line 1, column {col}: duplicate gene id {dup!r}")
        width = len(header)
        cells: list[str] = []
        rows: list[NDArray[np.float64]] = []
        seen: set[str] = set()
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != width:
                raise ParseError(f"{path}: line {lineno}: expected {width} fields, got {len(rec)}")
            cid = rec[0]
            if cid in seen:
                raise ParseError(f"{path}: line {lineno}, column 1: duplicate cell id {cid!r}")
            seen.add(cid)
            try:
                vals = np.array(rec[1:], dtype=np.float64)
            except ValueError:
                for j, tok in enumerate(rec[1:], start=2):
                    try:
                        float(tok)
                    except ValueError:
                        raise ParseError(f"{path}: line {lineno}, column {j}: not a number: {tok!r}") from None
                raise
            bad = np.flatnonzero(~np.isfinite(vals) | (vals < 0))
            if bad.size:
                j = int(bad[0])
                raise ParseError(
                    f"{path}: line {lineno}, column {j + 2}: count must be finite and nonnegative, got {rec[j + 1]!r}"
                )
            cells.append(cid)
            rows.append(vals)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return CountMatrix(tuple(cells), tuple(genes), np.vstack(rows))


def write_counts(M: CountMatrix, path: str | PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("cell_id",) + M.gene_ids)
        for cid, row in zip(M.cell_ids, M.counts):
            w.writerow([cid] + [repr(float(v)) for v in row])


def load_labels(path: str | PathLike) -> dict[str, str]:
    """Read a ``cell_id,label`` CSV into a dict."""
    with _open_text(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lstrip("﻿") for h in header[:2]] != ["cell_id", "label"]:
            raise ParseError(f"{path}: line 1: header must be 'cell_id,label'")
        labels: dict[str, str] = {}
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != 2:
                raise ParseError(f"{path}: line {lineno}: expected 2 fields, got {len(rec)}")
            if rec[0] in labels:
                raise ParseError(f"{path}: line {lineno}, column 1: duplicate cell id {rec[0]!r}")
            labels[rec[0]] = rec[1]
    return labels


def join_labels(M: CountMatrix, labels: Mapping[str, str]) -> list[str]:
    """Labels in ``M``'s cell order. Extra entries in ``labels`` are ignored."""
    missing = [c for c in M.cell_ids if c not in labels]
    if missing:
        shown = ", ".join(repr(c) for c in missing[:10])
        more = f" (and {len(missing) - 10} more)" if len(missing) > 10 else ""
        raise ContractError(f"{len(missing)} cell id(s) have no label: {shown}{more}")
    return [labels[c] for c in M.cell_ids]
