"""Deterministic matrix corpora for verification campaigns.

The default corpus covers every shape (n, N) in {1..5}^2 with 50 uniform,
10 integer-grid, and 10 sparse matrices per cell.  Entries are pure functions
of (seed, distribution, n, N, index), so corpora regenerate identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import rng
from .errors import FormatError
from .matrices import Matrix
from .reports import canonical_json

DEFAULT_SEED = 123456789
DEFAULT_GRID = tuple((n, N) for n in range(1, 6) for N in range(1, 6))
DEFAULT_SPARSE_DENSITY = 0.3

_DIST_CODES = {"uniform": 1, "integer": 2, "sparse": 3}
_DIST_PREFIX = {"uniform": "u", "integer": "i", "sparse": "s"}


@dataclass(frozen=True)
class CorpusSpec:
    """One homogeneous slice of a corpus: a shape grid, a count per cell, and
    an entry distribution (uniform [0,1], integer grid 0..9, or sparse with
    the given density of uniform entries)."""

    cells: tuple[tuple[int, int], ...] = DEFAULT_GRID
    matrices_per_cell: int = 50
    distribution: str = "uniform"
    sparse_density: float = DEFAULT_SPARSE_DENSITY
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.distribution not in _DIST_CODES:
            raise FormatError(f"unknown distribution {self.distribution!r}")
        if self.matrices_per_cell < 0:
            raise FormatError("matrices_per_cell must be nonnegative")


@dataclass(frozen=True)
class CorpusCell:
    n: int
    N: int
    matrices: tuple[tuple[str, Matrix], ...]  # (id, matrix) pairs


@dataclass(frozen=True)
class Corpus:
    seed: int
    cells: tuple[CorpusCell, ...]

    def __iter__(self) -> Iterator[CorpusCell]:
        return iter(self.cells)

    def total_matrices(self) -> int:
        return sum(len(c.matrices) for c in self.cells)


def _generate_matrix(spec: CorpusSpec, n: int, N: int, index: int) -> Matrix:
    key = rng.derive_key(
        spec.seed, 202, _DIST_CODES[spec.distribution], n, N, index
    )
    count = n * N
    if spec.distribution == "uniform":
        flat = rng.uniforms(key, 0, count)
    elif spec.distribution == "integer":
        flat = (rng.words(key, 0, count) % np.uint64(10)).astype(np.float64)
    else:
        gates = rng.uniforms(key, 0, count)
        values = rng.uniforms(key, count, count)
        flat = np.where(gates < spec.sparse_density, values, 0.0)
    return Matrix(flat.reshape(n, N))


def generate_corpus(specs: Sequence[CorpusSpec], seed: int = DEFAULT_SEED) -> Corpus:
    """Materialize the union of several corpus slices, grouped by cell."""
    by_cell: dict[tuple[int, int], list[tuple[str, Matrix]]] = {}
    for spec in specs:
        prefix = _DIST_PREFIX[spec.distribution]
        for n, N in spec.cells:
            slot = by_cell.setdefault((n, N), [])
            for idx in range(spec.matrices_per_cell):
                slot.append((f"{prefix}{idx:02d}", _generate_matrix(spec, n, N, idx)))
    cells = tuple(
        CorpusCell(n=n, N=N, matrices=tuple(by_cell[(n, N)]))
        for (n, N) in sorted(by_cell)
    )
    return Corpus(seed=seed, cells=cells)


def default_corpus(seed: int = DEFAULT_SEED) -> Corpus:
    return generate_corpus(
        [
            CorpusSpec(matrices_per_cell=50, distribution="uniform", seed=seed),
            CorpusSpec(matrices_per_cell=10, distribution="integer", seed=seed),
            CorpusSpec(matrices_per_cell=10, distribution="sparse", seed=seed),
        ],
        seed=seed,
    )


def single_matrix_corpus(a: Matrix, matrix_id: str = "m00") -> Corpus:
    """Wrap one matrix so campaigns can run on it directly."""
    return Corpus(
        seed=0,
        cells=(CorpusCell(n=a.rows, N=a.cols, matrices=((matrix_id, a),)),),
    )


# ---------------------------------------------------------------------------
# serialization


def corpus_to_json(corpus: Corpus) -> str:
    doc = {
        "seed": corpus.seed,
        "cells": [
            {
                "n": cell.n,
                "N": cell.N,
                "matrices": [
                    {
                        "id": mid,
                        "entries": [[float(v) for v in row] for row in m.entries],
                    }
                    for mid, m in cell.matrices
                ],
            }
            for cell in corpus.cells
        ],
    }
    return canonical_json(doc) + "\n"


def parse_corpus_json(text: str) -> Corpus:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e}") from e
    if not isinstance(obj, dict) or "cells" not in obj:
        raise FormatError('corpus JSON needs a "cells" list')
    cells = []
    for cell in obj["cells"]:
        n, N = cell.get("n"), cell.get("N")
        if not isinstance(n, int) or not isinstance(N, int) or n < 1 or N < 1:
            raise FormatError("cell dimensions must be positive integers")
        mats = []
        for item in cell.get("matrices", []):
            grid = item.get("entries")
            if not isinstance(grid, list) or len(grid) != n:
                raise FormatError(f"matrix in cell {n}x{N} has wrong row count")
            if any(len(row) != N for row in grid):
                raise FormatError("ragged rows are not allowed")
            m = Matrix.from_rows(grid)
            mats.append((str(item.get("id", f"m{len(mats):02d}")), m))
        cells.append(CorpusCell(n=n, N=N, matrices=tuple(mats)))
    return Corpus(seed=int(obj.get("seed", 0)), cells=tuple(cells))


def load_corpus(path: str) -> Corpus:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_corpus_json(fh.read())


def save_corpus(corpus: Corpus, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(corpus_to_json(corpus))
