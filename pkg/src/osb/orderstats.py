"""Expected sums of the largest path entries, hit-count statistics, and the
tail-inequality suite.

A map g traces the path (a[1,g(1)], ..., a[n,g(n)]) through a matrix.  The
central quantity is the expectation over a family of the sum of the ell
largest path values.  Exact expectations enumerate the family; hit counts
(how many path positions fall among the m largest entries) are tallied with
integer arithmetic, so every probability here is an exact rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import DomainError, HypothesisError
from .families import (
    MapFamily,
    check_marginals,
    iter_member_arrays,
    pairwise_constant,
    sample_array,
)
from .matrices import Matrix, OrderMap, order_map
from .reports import (
    VerificationReport,
    exact_inequality_report,
    vacuous_report,
)

_MC_CHUNK = 131072


def _check_dims(a: Matrix, family: MapFamily):
    if (a.rows, a.cols) != (family.n, family.N):
        raise DomainError(
            f"matrix is {a.rows}x{a.cols}, family maps {family.n} -> {family.N}"
        )


def path_values(a: Matrix, g: Sequence[int]) -> np.ndarray:
    """The path (a[1,g(1)], ..., a[n,g(n)]) as a float array."""
    if len(g) != a.rows:
        raise DomainError(f"map has {len(g)} values, matrix has {a.rows} rows")
    cols = np.asarray(g, dtype=np.int64)
    if cols.min() < 1 or cols.max() > a.cols:
        raise DomainError(f"map values must lie in 1..{a.cols}")
    return a.entries[np.arange(a.rows), cols - 1]


def path_top_sum(a: Matrix, g: Sequence[int], ell: int) -> float:
    """Sum of the ell largest path values of g."""
    if not 1 <= ell <= a.rows:
        raise DomainError(f"ell={ell} out of range 1..{a.rows}")
    vals = np.sort(path_values(a, g))
    return float(vals[a.rows - ell:].sum())


@dataclass(frozen=True)
class OrderStatResult:
    """Expectation of the top-ell path sum, with per-rank contributions.

    ``per_k[k-1]`` is the expected k-th largest path value; ``value`` is their
    sum.  Monte Carlo results carry the draw count and the standard error of
    the value.
    """

    value: float
    per_k: tuple[float, ...]
    mode: str
    samples: Optional[int] = None
    stderr: Optional[float] = None


def _paths_for_block(a: Matrix, block: np.ndarray) -> np.ndarray:
    return a.entries[np.arange(a.rows)[None, :], block - 1]


class RunningMoments:
    """Count/mean/M2 accumulator combined chunk by chunk.

    Combination uses the parallel variance formula, so streaming large draw
    counts needs O(1) memory; the chunking schedule is fixed, keeping results
    deterministic.
    """

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self._m2 = 0.0

    def add(self, values: np.ndarray):
        b = int(values.size)
        if b == 0:
            return
        b_mean = float(values.mean())
        b_m2 = float(((values - b_mean) ** 2).sum())
        delta = b_mean - self.mean
        total = self.count + b
        self.mean += delta * b / total
        self._m2 += b_m2 + delta * delta * self.count * b / total
        self.count = total

    def stderr(self) -> float:
        if self.count < 2:
            return float("nan")
        return math.sqrt(self._m2 / (self.count - 1)) / math.sqrt(self.count)


def expected_top_sum(
    a: Matrix, family: MapFamily, ell: int, cap: int | None = None
) -> OrderStatResult:
    """Exact average of the top-ell path sum over the whole family."""
    _check_dims(a, family)
    if not 1 <= ell <= a.rows:
        raise DomainError(f"ell={ell} out of range 1..{a.rows}")
    sums = np.zeros(ell)
    for block in iter_member_arrays(family, cap=cap):
        paths = _paths_for_block(a, block)
        top = np.sort(paths, axis=1)[:, ::-1][:, :ell]
        sums += top.sum(axis=0)
    per_k = tuple(float(s) / family.size for s in sums)
    return OrderStatResult(value=math.fsum(per_k), per_k=per_k, mode="exact")


def expected_top_sum_mc(
    a: Matrix, family: MapFamily, ell: int, samples: int, seed: int
) -> OrderStatResult:
    """Monte Carlo estimate of the same expectation from seeded draws."""
    _check_dims(a, family)
    if not 1 <= ell <= a.rows:
        raise DomainError(f"ell={ell} out of range 1..{a.rows}")
    if samples < 2:
        raise DomainError("samples must be >= 2")
    sums = np.zeros(ell)
    moments = RunningMoments()
    for start in range(0, samples, _MC_CHUNK):
        block = sample_array(family, seed, min(_MC_CHUNK, samples - start), start)
        paths = _paths_for_block(a, block)
        top = np.sort(paths, axis=1)[:, ::-1][:, :ell]
        sums += top.sum(axis=0)
        moments.add(top.sum(axis=1))
    per_k = tuple(float(s) / samples for s in sums)
    return OrderStatResult(
        value=math.fsum(per_k), per_k=per_k, mode="mc",
        samples=samples, stderr=moments.stderr(),
    )


# ---------------------------------------------------------------------------
# hit counts: how many of the m largest positions does a path cross?


@dataclass(frozen=True)
class HitCountTable:
    """Integer tallies of path hit ranks for one (family, ordering) pair.

    For each member g, its n path positions have ranks in 1..n*N under the
    ordering; ``hist[k][j]`` counts members whose k-th smallest rank equals j.
    Every hit-count tail probability follows by prefix summation:
    #(X_m >= k) = sum over j <= m of hist[k][j].
    """

    size: int
    n: int
    N: int
    hist: np.ndarray

    @cached_property
    def _counts_ge(self) -> np.ndarray:
        counts = np.cumsum(self.hist, axis=1)
        counts.setflags(write=False)
        return counts

    def tail_count(self, m: int, k: int) -> int:
        """#{g : X_m >= k} as an exact integer."""
        if not 0 <= m <= self.n * self.N:
            raise DomainError(f"m={m} out of range 0..{self.n * self.N}")
        if k <= 0:
            return self.size
        if k > self.n:
            return 0
        return int(self._counts_ge[k, m])

    def tail(self, m: int, k: int) -> Fraction:
        """P(X_m >= k)."""
        return Fraction(self.tail_count(m, k), self.size)

    def prob_eq(self, m: int, k: int) -> Fraction:
        return Fraction(self.tail_count(m, k) - self.tail_count(m, k + 1), self.size)

    def indicator_expectation(self, m: int, ell: int) -> Fraction:
        """E of the top-ell path sum of the 0/1 matrix marking the m largest
        positions: sum over k <= ell of P(X_m >= k)."""
        return Fraction(
            sum(self.tail_count(m, k) for k in range(1, ell + 1)), self.size
        )

    def coefficients(self, ell: int) -> tuple[Fraction, ...]:
        """Exact weights f with E S(b) = sum_j f[j-1] * b(h(j)) for every b
        carried by the ordering (nonincreasing on ranks 1..ell*N, 0 beyond)."""
        if not 1 <= ell <= self.n:
            raise DomainError(f"ell={ell} out of range 1..{self.n}")
        top = ell * self.N
        col = self.hist[1: ell + 1, 1: top + 1].sum(axis=0)
        return tuple(Fraction(int(c), self.size) for c in col)


def build_hit_table(
    family: MapFamily, order: OrderMap, cap: int | None = None
) -> HitCountTable:
    """Tally hit ranks over the whole family (exact integer counts)."""
    if (order.n, order.N) != (family.n, family.N):
        raise DomainError("ordering and family dimensions differ")
    n, N = family.n, family.N
    nN = n * N
    hist = np.zeros((n + 1, nN + 1), dtype=np.int64)
    rank = order.rank_of
    for block in iter_member_arrays(family, cap=cap):
        pos = rank[np.arange(n)[None, :], block - 1].copy()
        pos.sort(axis=1)
        for k in range(1, n + 1):
            hist[k] += np.bincount(pos[:, k - 1], minlength=nN + 1)
    hist.setflags(write=False)
    return HitCountTable(size=family.size, n=n, N=N, hist=hist)


@dataclass(frozen=True)
class HitCountDistribution:
    """Exact distribution of the number of path positions among the m largest."""

    m: int
    probabilities: tuple[Fraction, ...]  # index k = 0..n

    def tail(self, k: int) -> Fraction:
        return sum(self.probabilities[max(k, 0):], Fraction(0))

    def expectation(self) -> Fraction:
        return sum((k * p for k, p in enumerate(self.probabilities)), Fraction(0))

    def second_moment(self) -> Fraction:
        return sum((k * k * p for k, p in enumerate(self.probabilities)), Fraction(0))

    def pairs(self) -> list[tuple[int, Fraction]]:
        return list(enumerate(self.probabilities))


def hit_count_distribution(
    family: MapFamily, order: OrderMap, m: int,
    table: HitCountTable | None = None, cap: int | None = None,
) -> HitCountDistribution:
    """Distribution of the hit count for the m largest positions, counted
    exactly over the family."""
    if table is None:
        table = build_hit_table(family, order, cap=cap)
    if not 1 <= m <= table.n * table.N:
        raise DomainError(f"m={m} out of range 1..{table.n * table.N}")
    probs = tuple(table.prob_eq(m, k) for k in range(0, table.n + 1))
    return HitCountDistribution(m=m, probabilities=probs)


def expectation_coefficients(
    family: MapFamily, order: OrderMap, ell: int,
    table: HitCountTable | None = None, cap: int | None = None,
) -> tuple[Fraction, ...]:
    """The ell*N exact coefficients representing the expectation as a linear
    functional of the ordered entries."""
    if table is None:
        table = build_hit_table(family, order, cap=cap)
    return table.coefficients(ell)


# ---------------------------------------------------------------------------
# Paley-Zygmund


Distribution = Union[HitCountDistribution, Iterable[tuple[object, object]]]


def _pz_moments(pairs: list[tuple[Fraction, Fraction]]):
    values = [v for v, _ in pairs]
    probs = [p for _, p in pairs]
    mean = sum((v * p for v, p in zip(values, probs)), Fraction(0))
    second = sum((v * v * p for v, p in zip(values, probs)), Fraction(0))
    return values, probs, mean, second


def _pz_report(values, probs, mean, second, theta: Fraction, inputs: dict
               ) -> VerificationReport:
    base_inputs = dict(inputs)
    base_inputs["theta"] = float(theta)
    if mean == 0:
        return vacuous_report(
            "paley-zygmund", base_inputs, "E Z = 0; inequality is vacuous"
        )
    threshold = theta * mean
    prob = sum((p for v, p in zip(values, probs) if v >= threshold), Fraction(0))
    bound = (1 - theta) ** 2 * mean * mean / second
    return exact_inequality_report(
        "paley-zygmund", base_inputs, lhs=prob, rhs=bound, direction="ge",
        extra={"mean": float(mean), "second_moment": float(second)},
    )


def paley_zygmund_check(
    distribution: Distribution,
    theta: float | Fraction,
    inputs: dict | None = None,
) -> VerificationReport:
    """Check P(Z >= theta * E Z) >= (1-theta)^2 (E Z)^2 / E Z^2 exactly.

    The distribution is a finite list of (value, weight) pairs with
    nonnegative values; weights are normalized by their exact sum.  A zero
    mean makes the inequality vacuous.
    """
    theta = Fraction(theta)
    if not 0 < theta < 1:
        raise DomainError("theta must lie strictly between 0 and 1")
    if isinstance(distribution, HitCountDistribution):
        pairs = distribution.pairs()
    else:
        pairs = list(distribution)
    values = [Fraction(v) for v, _ in pairs]
    weights = [Fraction(w) for _, w in pairs]
    if any(v < 0 for v in values) or any(w < 0 for w in weights):
        raise DomainError("values and weights must be nonnegative")
    total = sum(weights, Fraction(0))
    if total == 0:
        raise DomainError("distribution has zero total weight")
    normalized = [(v, w / total) for v, w in zip(values, weights)]
    vs, ps, mean, second = _pz_moments(normalized)
    return _pz_report(vs, ps, mean, second, theta, inputs or {})


# ---------------------------------------------------------------------------
# the tail-inequality suite (report ids lemma3.1 .. lemma3.6)

DEFAULT_THETAS = tuple(Fraction(t, 10) for t in range(1, 10))


def _ceil_fraction(f: Fraction) -> int:
    return -((-f.numerator) // f.denominator)


def check_lemma31(
    table: HitCountTable, c_pair: Fraction, m: int
) -> tuple[Fraction, Fraction]:
    """(P(X_m >= 1), (m/N)(1 - C (m-1) / (2N)))."""
    N = table.N
    bound = Fraction(m, N) * (1 - c_pair * Fraction(m - 1, 2 * N))
    return table.tail(m, 1), bound


def check_lemma32(
    table: HitCountTable, c_pair: Fraction, m: int, theta: Fraction
) -> tuple[Fraction, Fraction]:
    """(P(X_m >= theta m/N), (1-theta)^2 m / (N + m C))."""
    N = table.N
    k0 = _ceil_fraction(theta * Fraction(m, N))
    prob = table.tail(m, max(k0, 1))
    bound = (1 - theta) ** 2 * Fraction(m, N + m * c_pair)
    return prob, bound


def check_lemma33a(
    table: HitCountTable, c_pair: Fraction, ell: int, m: int
) -> tuple[Fraction, Fraction]:
    """(P(X_m >= 1), min(m/2N, 1/2C) * P(X_{ell N} >= 1))."""
    N = table.N
    factor = Fraction(m, 2 * N)
    if c_pair > 0:
        factor = min(factor, Fraction(1, 2) / c_pair)
    return table.tail(m, 1), factor * table.tail(ell * N, 1)


def check_lemma33b(
    table: HitCountTable, c_pair: Fraction, ell: int, m: int, k: int
) -> tuple[Fraction, Fraction]:
    """(P(X_m >= k), P(X_{ell N} >= k) / (2 + 4C)); requires 2kN <= m."""
    bound = table.tail(ell * table.N, k) / (2 + 4 * c_pair)
    return table.tail(m, k), bound


def check_lemma34(
    table: HitCountTable, c_pair: Fraction, ell: int, m: int
) -> tuple[Fraction, Fraction]:
    """(averaged indicator expectation, (8+16C) * plain indicator expectation)."""
    lhs = Fraction(m, ell * table.N) * table.indicator_expectation(ell * table.N, ell)
    rhs = (8 + 16 * c_pair) * table.indicator_expectation(m, ell)
    return lhs, rhs


def check_lemma35(
    a: Matrix, order: OrderMap, table: HitCountTable, c_pair: Fraction, ell: int
) -> tuple[Fraction, Fraction]:
    """Averaging inequality for the matrix reduced to its ell*N largest
    entries, evaluated through the exact coefficient representation."""
    top = ell * table.N
    s_vals = [Fraction(float(v)) for v in a.rearrangement[:top]]
    coeffs = table.coefficients(ell)
    exp_reduced = sum((f * s for f, s in zip(coeffs, s_vals)), Fraction(0))
    coeff_sum = sum(coeffs, Fraction(0))
    exp_averaged = coeff_sum * sum(s_vals, Fraction(0)) / top
    return exp_averaged, (8 + 16 * c_pair) * exp_reduced


def check_lemma36(
    table: HitCountTable, c_pair: Fraction, ell: int, k: int
) -> tuple[Fraction, Fraction]:
    """(expected k-th largest path value of the ell*N-ones indicator,
    1/(2+4C)); requires k <= ell/2."""
    return table.tail(ell * table.N, k), Fraction(1, 1) / (2 + 4 * c_pair)


def _require_uniform_marginals(family: MapFamily, cap: int | None):
    cert = check_marginals(family, cap)
    if not cert.marginals_uniform:
        raise HypothesisError(
            f"family {family.descriptor()} does not have uniform marginals "
            f"(worst deviation {cert.worst_marginal_deviation})",
            certificate=cert,
        )


def lemma_suite(
    a: Matrix,
    family: MapFamily,
    ell: int,
    *,
    thetas: Sequence[Fraction] = DEFAULT_THETAS,
    table: HitCountTable | None = None,
    c_pair: Fraction | None = None,
    cap: int | None = None,
    skip_hypothesis_check: bool = False,
    extra_inputs: dict | None = None,
) -> list[VerificationReport]:
    """Run every tail inequality on one (matrix, family, ell) instance.

    Sweeps: m over 1..nN (restricted to m <= ell*N where the statement
    requires it), theta over ``thetas``, and k over the admissible ranges.
    Instances with an empty parameter range are reported as vacuous.
    """
    _check_dims(a, family)
    if not 1 <= ell <= family.n:
        raise DomainError(f"ell={ell} out of range 1..{family.n}")
    if not skip_hypothesis_check:
        _require_uniform_marginals(family, cap)
    if c_pair is None:
        c_pair = pairwise_constant(family, cap).pairwise_bound
    order = order_map(a)
    if table is None:
        table = build_hit_table(family, order, cap=cap)
    n, N = family.n, family.N
    nN = n * N
    base = {
        **(extra_inputs or {}),
        "matrix": a.digest(), "family": family.descriptor(), "ell": ell,
    }
    constant = float(c_pair)
    out: list[VerificationReport] = []

    for m in range(1, nN + 1):
        prob, bound = check_lemma31(table, c_pair, m)
        out.append(exact_inequality_report(
            "lemma3.1", {**base, "m": m}, lhs=prob, rhs=bound,
            direction="ge", constant=constant))
        dist = hit_count_distribution(family, order, m, table=table)
        vs, ps, mean, second = _pz_moments(dist.pairs())
        for theta in thetas:
            prob, bound = check_lemma32(table, c_pair, m, Fraction(theta))
            out.append(exact_inequality_report(
                "lemma3.2", {**base, "m": m, "theta": float(theta)},
                lhs=prob, rhs=bound, direction="ge", constant=constant))
            out.append(_pz_report(
                vs, ps, mean, second, Fraction(theta), {**base, "m": m}))
        prob, bound = check_lemma33a(table, c_pair, ell, m)
        out.append(exact_inequality_report(
            "lemma3.3a", {**base, "m": m}, lhs=prob, rhs=bound,
            direction="ge", constant=constant))

    any_33b = False
    for k in range(1, n // 2 + 1):
        for m in range(2 * k * N, nN + 1):
            any_33b = True
            prob, bound = check_lemma33b(table, c_pair, ell, m, k)
            out.append(exact_inequality_report(
                "lemma3.3b", {**base, "m": m, "k": k},
                lhs=prob, rhs=bound, direction="ge", constant=constant))
    if not any_33b:
        out.append(vacuous_report(
            "lemma3.3b", base, "no (m, k) satisfies 2kN <= m <= nN"))

    for m in range(1, ell * N + 1):
        lhs, rhs = check_lemma34(table, c_pair, ell, m)
        out.append(exact_inequality_report(
            "lemma3.4", {**base, "m": m}, lhs=lhs, rhs=rhs, constant=constant))

    lhs, rhs = check_lemma35(a, order_map(a), table, c_pair, ell)
    out.append(exact_inequality_report(
        "lemma3.5", base, lhs=lhs, rhs=rhs, constant=constant))

    if ell // 2 >= 1:
        for k in range(1, ell // 2 + 1):
            value, bound = check_lemma36(table, c_pair, ell, k)
            out.append(exact_inequality_report(
                "lemma3.6", {**base, "k": k}, lhs=value, rhs=bound,
                direction="ge", constant=constant))
    else:
        out.append(vacuous_report(
            "lemma3.6", base, "k range 1..floor(ell/2) is empty for ell = 1"))
    return out
