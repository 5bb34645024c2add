"""Finite families of maps {1..n} -> {1..N} with normalized counting measure.

Built-in kinds (the full symmetric group and the set of all mappings) are
never materialized for measure certificates; closed-form counts are used.
Enumeration-requiring operations stream members in chunks and refuse families
above the size cap (``OSB_ENUM_CAP``, default 10**7).
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Optional, Sequence

import numpy as np

from . import rng
from .errors import DomainError, FormatError, ResourceError

DEFAULT_ENUM_CAP = 10_000_000

KIND_SYMMETRIC = "symmetric-group"
KIND_FULL_MAPPING = "full-mapping"
KIND_EXPLICIT = "explicit"

_KIND_CODES = {KIND_SYMMETRIC: 1, KIND_FULL_MAPPING: 2, KIND_EXPLICIT: 3}
_SAMPLE_STREAM = 101


def enumeration_cap() -> int:
    raw = os.environ.get("OSB_ENUM_CAP")
    return int(raw) if raw else DEFAULT_ENUM_CAP


@dataclass(frozen=True)
class MapFamily:
    """A multiset of maps {1..n} -> {1..N}; probability of E is |E| / |G|."""

    n: int
    N: int
    kind: str
    members: Optional[tuple[tuple[int, ...], ...]] = None

    def __post_init__(self):
        if self.n < 1 or self.N < 1:
            raise DomainError("n and N must be positive")
        if self.kind == KIND_SYMMETRIC and self.N != self.n:
            raise DomainError("symmetric-group families require N == n")
        if self.kind == KIND_EXPLICIT:
            if not self.members:
                raise DomainError("explicit families must be nonempty")
            for g in self.members:
                if len(g) != self.n or any(not 1 <= v <= self.N for v in g):
                    raise DomainError(f"map {g} is not {self.n} values in 1..{self.N}")
        elif self.members is not None:
            raise DomainError("built-in kinds carry no explicit member list")

    @property
    def size(self) -> int:
        if self.kind == KIND_SYMMETRIC:
            return math.factorial(self.n)
        if self.kind == KIND_FULL_MAPPING:
            return self.N**self.n
        return len(self.members)

    def descriptor(self) -> str:
        if self.kind == KIND_SYMMETRIC:
            return f"sym:{self.n}"
        if self.kind == KIND_FULL_MAPPING:
            return f"map:{self.n}:{self.N}"
        payload = f"{self.n}:{self.N}:" + ";".join(
            ",".join(map(str, g)) for g in self.members
        )
        return "explicit:" + hashlib.sha256(payload.encode()).hexdigest()[:8]

    @cached_property
    def _members_array(self) -> np.ndarray:
        arr = np.asarray(self.members, dtype=np.int64)
        arr.setflags(write=False)
        return arr


def symmetric_group(n: int) -> MapFamily:
    """All n! permutations of {1..n}."""
    return MapFamily(n=n, N=n, kind=KIND_SYMMETRIC)


def full_mapping_family(n: int, N: int) -> MapFamily:
    """All N**n maps from {1..n} to {1..N}."""
    return MapFamily(n=n, N=N, kind=KIND_FULL_MAPPING)


def explicit_family(maps: Sequence[Sequence[int]], n: int, N: int) -> MapFamily:
    """A listed family; duplicates weight the counting measure."""
    return MapFamily(n=n, N=N, kind=KIND_EXPLICIT,
                     members=tuple(tuple(int(v) for v in g) for g in maps))


def load_family(path: str) -> MapFamily:
    """Read an explicit family from JSON {"n": ..., "N": ..., "maps": [[...]]}."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as e:
            raise FormatError(f"invalid JSON: {e}") from e
    if not isinstance(obj, dict) or not {"n", "N", "maps"} <= set(obj):
        raise FormatError('family JSON needs keys "n", "N", "maps"')
    n, N, maps = obj["n"], obj["N"], obj["maps"]
    if not isinstance(n, int) or not isinstance(N, int) or n < 1 or N < 1:
        raise FormatError("n and N must be positive integers")
    if not isinstance(maps, list) or not maps:
        raise FormatError("maps must be a nonempty list")
    for g in maps:
        if not isinstance(g, list) or len(g) != n:
            raise FormatError(f"each map must list {n} values")
        for v in g:
            if not isinstance(v, int) or isinstance(v, bool) or not 1 <= v <= N:
                raise FormatError(f"map value {v!r} outside 1..{N}")
    try:
        return explicit_family(maps, n, N)
    except DomainError as e:
        raise FormatError(str(e)) from e


# ---------------------------------------------------------------------------
# enumeration


def require_enumerable(family: MapFamily, cap: int | None = None):
    cap = enumeration_cap() if cap is None else cap
    if family.size > cap:
        raise ResourceError(
            f"family {family.descriptor()} has {family.size} members, above the "
            f"enumeration cap {cap}; use Monte Carlo sampling instead"
        )


def iter_member_arrays(
    family: MapFamily, chunk: int = 65536, cap: int | None = None
) -> Iterator[np.ndarray]:
    """Stream all members as int64 arrays of shape (B, n), values 1..N.

    Iteration order is fixed: lexicographic for built-in kinds, list order for
    explicit families.  Chunk boundaries never change the multiset.
    """
    require_enumerable(family, cap)
    n, N = family.n, family.N
    if family.kind == KIND_EXPLICIT:
        arr = family._members_array
        for lo in range(0, arr.shape[0], chunk):
            yield arr[lo : lo + chunk]
    elif family.kind == KIND_SYMMETRIC:
        it = itertools.permutations(range(1, n + 1))
        while True:
            block = list(itertools.islice(it, chunk))
            if not block:
                return
            yield np.asarray(block, dtype=np.int64)
    else:
        total = family.size
        powers = N ** np.arange(n - 1, -1, -1, dtype=np.int64)
        for lo in range(0, total, chunk):
            idx = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
            yield (idx[:, None] // powers) % N + 1


def iter_members(family: MapFamily, cap: int | None = None) -> Iterator[tuple[int, ...]]:
    for block in iter_member_arrays(family, cap=cap):
        for row in block:
            yield tuple(int(v) for v in row)


# ---------------------------------------------------------------------------
# measure certificates


@dataclass(frozen=True)
class MeasureCertificate:
    """Exact marginal and pairwise-correlation data for a family.

    ``pairwise_bound`` is N**2 times the largest probability of fixing two
    distinct (index, value) pairs; fields not computed by a partial check are
    None.  All probabilities are exact rationals.
    """

    family: str
    size: int
    marginals_uniform: Optional[bool] = None
    worst_marginal_deviation: Optional[Fraction] = None
    pairwise_bound: Optional[Fraction] = None
    argmax_pair: Optional[tuple[tuple[int, int], tuple[int, int]]] = None

    def to_json_obj(self) -> dict:
        def rational(f):
            return None if f is None else {
                "fraction": f"{f.numerator}/{f.denominator}",
                "real": float(f),
            }

        return {
            "family": self.family,
            "size": self.size,
            "marginals_uniform": self.marginals_uniform,
            "worst_marginal_deviation": rational(self.worst_marginal_deviation),
            "pairwise_constant": rational(self.pairwise_bound),
            "argmax_pair": None if self.argmax_pair is None else
                [list(self.argmax_pair[0]), list(self.argmax_pair[1])],
        }


def check_marginals(family: MapFamily, cap: int | None = None) -> MeasureCertificate:
    """Exact check that every event {g(i) = j} has probability 1/N."""
    n, N = family.n, family.N
    if family.kind in (KIND_SYMMETRIC, KIND_FULL_MAPPING):
        # each value j is attained by exactly |G|/N members at every index
        return MeasureCertificate(
            family=family.descriptor(), size=family.size,
            marginals_uniform=True, worst_marginal_deviation=Fraction(0),
        )
    size = family.size
    target = Fraction(1, N)
    worst = Fraction(0)
    uniform = True
    arr = family._members_array
    for i in range(n):
        counts = np.bincount(arr[:, i], minlength=N + 1)[1:]
        for j in range(N):
            dev = abs(Fraction(int(counts[j]), size) - target)
            if dev > worst:
                worst = dev
            if dev != 0:
                uniform = False
    return MeasureCertificate(
        family=family.descriptor(), size=size,
        marginals_uniform=uniform, worst_marginal_deviation=worst,
    )


def pairwise_constant(family: MapFamily, cap: int | None = None) -> MeasureCertificate:
    """Exact smallest constant C with P(g(i1)=j1, g(i2)=j2) <= C / N**2.

    Computed as N**2 times the maximal probability over distinct pairs; the
    maximum over an empty pair set (n = N = 1) is 0.
    """
    n, N = family.n, family.N
    if family.kind in (KIND_SYMMETRIC, KIND_FULL_MAPPING):
        if n == 1:
            # pairs (1,j1),(1,j2) with j1 != j2 have probability 0
            bound = Fraction(0)
            argmax = None if N == 1 else ((1, 1), (1, 2))
        elif family.kind == KIND_SYMMETRIC:
            # exactly (n-2)! permutations fix two compatible values
            bound = Fraction(n, n - 1)
            argmax = ((1, 1), (2, 2))
        else:
            bound = Fraction(1)
            argmax = ((1, 1), (2, 1))
        return MeasureCertificate(
            family=family.descriptor(), size=family.size,
            pairwise_bound=bound, argmax_pair=argmax,
        )

    size = family.size
    arr = family._members_array
    best_count = 0
    argmax = None
    for i1 in range(n):
        for i2 in range(n):
            if i1 == i2:
                continue
            codes = (arr[:, i1] - 1) * N + (arr[:, i2] - 1)
            counts = np.bincount(codes, minlength=N * N)
            top = int(counts.argmax())
            if int(counts[top]) > best_count:
                best_count = int(counts[top])
                argmax = ((i1 + 1, top // N + 1), (i2 + 1, top % N + 1))
    if argmax is None and N > 1:
        argmax = ((1, 1), (1, 2))  # probability-0 pair; no two indices exist
    return MeasureCertificate(
        family=family.descriptor(), size=size,
        pairwise_bound=Fraction(N * N * best_count, size), argmax_pair=argmax,
    )


def family_certificate(family: MapFamily, cap: int | None = None) -> MeasureCertificate:
    """Marginal and pairwise certificates combined."""
    marg = check_marginals(family, cap)
    pair = pairwise_constant(family, cap)
    return MeasureCertificate(
        family=family.descriptor(), size=family.size,
        marginals_uniform=marg.marginals_uniform,
        worst_marginal_deviation=marg.worst_marginal_deviation,
        pairwise_bound=pair.pairwise_bound, argmax_pair=pair.argmax_pair,
    )


# ---------------------------------------------------------------------------
# sampling

# Draw d of the stream owns words [d*n, (d+1)*n); permutations use a
# Fisher-Yates sweep, mappings one word per coordinate, explicit families one
# word as a member index.  The result is a pure function of (seed, d), so any
# partitioning of a draw range reproduces the serial sequence.


def _sample_key(family: MapFamily, seed: int) -> int:
    code = _KIND_CODES[family.kind]
    return rng.derive_key(seed, _SAMPLE_STREAM, code, family.n, family.N, family.size)


def sample_array(
    family: MapFamily, seed: int, count: int, start: int = 0
) -> np.ndarray:
    """Draws ``start .. start+count-1`` as an int64 array of shape (count, n)."""
    if count < 1:
        raise DomainError("count must be >= 1")
    n, N = family.n, family.N
    key = _sample_key(family, seed)
    w = rng.words(key, start * n, count * n).reshape(count, n)
    if family.kind == KIND_FULL_MAPPING:
        return (w % np.uint64(N)).astype(np.int64) + 1
    if family.kind == KIND_EXPLICIT:
        idx = (w[:, 0] % np.uint64(family.size)).astype(np.int64)
        return family._members_array[idx]
    perm = np.tile(np.arange(1, n + 1, dtype=np.int64), (count, 1))
    rows = np.arange(count)
    for t in range(n - 1):
        i = n - 1 - t
        j = (w[:, t] % np.uint64(i + 1)).astype(np.int64)
        vi = perm[rows, i].copy()
        perm[rows, i] = perm[rows, j]
        perm[rows, j] = vi
    return perm


def sample(family: MapFamily, seed: int, count: int) -> list[tuple[int, ...]]:
    """``count`` i.i.d. uniform draws from the family, reproducible from seed."""
    arr = sample_array(family, seed, count)
    return [tuple(int(v) for v in row) for row in arr]


# ---------------------------------------------------------------------------
# family specifiers ("sym:3", "map:2:3", "file:PATH"; bare "sym"/"map" adapt
# to each corpus cell)


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    n: Optional[int] = None
    N: Optional[int] = None
    path: Optional[str] = None

    def label(self) -> str:
        if self.kind == "sym":
            return "sym" if self.n is None else f"sym:{self.n}"
        if self.kind == "map":
            return "map" if self.n is None else f"map:{self.n}:{self.N}"
        return f"file:{self.path}"


def parse_family_spec(text: str) -> FamilySpec:
    parts = text.split(":")
    try:
        if parts[0] == "sym":
            if len(parts) == 1:
                return FamilySpec("sym")
            if len(parts) == 2:
                return FamilySpec("sym", n=int(parts[1]), N=int(parts[1]))
        elif parts[0] == "map":
            if len(parts) == 1:
                return FamilySpec("map")
            if len(parts) == 3:
                return FamilySpec("map", n=int(parts[1]), N=int(parts[2]))
        elif parts[0] == "file" and len(parts) >= 2:
            return FamilySpec("file", path=text.split(":", 1)[1])
    except ValueError:
        pass
    raise DomainError(
        f"bad family specifier {text!r}; expected sym[:n], map[:n:N], or file:PATH"
    )


def family_for_cell(spec: FamilySpec, n: int, N: int) -> Optional[MapFamily]:
    """The family this spec denotes on an (n, N) cell, or None if inapplicable."""
    if spec.kind == "sym":
        if spec.n is not None and spec.n != n:
            return None
        return symmetric_group(n) if n == N else None
    if spec.kind == "map":
        if spec.n is not None and (spec.n, spec.N) != (n, N):
            return None
        return full_mapping_family(n, N)
    fam = load_family(spec.path)
    return fam if (fam.n, fam.N) == (n, N) else None
