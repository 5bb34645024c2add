"""K-functionals for the (sum, max) couple, the derived interpolation norm,
and expected lp path norms with their two-sided benchmark.

For a vector x the K-functional at weight t is the piecewise-linear curve
through the partial sums of the decreasing rearrangement:
K(t) = x*_1 + ... + x*_floor(t) + (t - floor(t)) x*_ceil(t), saturating at the
full sum for t >= n.  Averaging over a map family commutes with this formula,
so the mixed curve is the same object built from expected order statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DomainError
from .families import (
    MapFamily,
    iter_member_arrays,
    pairwise_constant,
    sample_array,
)
from .matrices import Matrix
from .orderstats import (
    RunningMoments,
    _check_dims,
    _paths_for_block,
    _require_uniform_marginals,
    expected_top_sum,
    expected_top_sum_mc,
)
from .reports import (
    STATUS_FAIL,
    STATUS_PASS,
    VerificationReport,
    inequality_report,
    vacuous_report,
)

_GL_POINTS = 32
_GL_NODES, _GL_WEIGHTS = leggauss(_GL_POINTS)
_MC_CHUNK = 65536


@dataclass(frozen=True)
class KFunctionalCurve:
    """Piecewise-linear K-functional curve with integer breakpoints.

    ``slopes[k-1]`` is the slope on [k-1, k]; for a single vector these are
    the rearranged magnitudes, for a mixed curve the expected k-th largest
    path values.  Slopes must be nonnegative and nonincreasing (concavity).
    """

    slopes: tuple[float, ...]

    def __post_init__(self):
        if not self.slopes:
            raise DomainError("curve needs at least one slope")
        arr = np.asarray(self.slopes, dtype=np.float64)
        if arr.min() < 0 or np.any(arr[:-1] < arr[1:] - 1e-12):
            raise DomainError("slopes must be nonnegative and nonincreasing")

    @classmethod
    def from_vector(cls, x: Sequence[float]) -> "KFunctionalCurve":
        arr = np.sort(np.abs(np.asarray(x, dtype=np.float64)))[::-1]
        if arr.size == 0:
            raise DomainError("vector must be nonempty")
        return cls(tuple(float(v) for v in arr))

    @property
    def n(self) -> int:
        return len(self.slopes)

    @cached_property
    def knots(self) -> tuple[float, ...]:
        """Curve values at the integer breakpoints 0..n."""
        ps = [0.0]
        for s in self.slopes:
            ps.append(ps[-1] + s)
        return tuple(ps)

    def value(self, t: float) -> float:
        if t < 0:
            raise DomainError("t must be nonnegative")
        if t >= self.n:
            return self.knots[self.n]
        k = int(math.floor(t))
        frac = t - k
        v = self.knots[k]
        if frac > 0:
            v += frac * self.slopes[k]
        return v


def k_functional(x: Sequence[float], t: float) -> float:
    """K(x, t) for the (sum, max) couple, in closed piecewise-linear form."""
    return KFunctionalCurve.from_vector(x).value(t)


def mixed_k_curve(
    a: Matrix,
    family: MapFamily,
    *,
    cap: int | None = None,
    samples: int | None = None,
    seed: int = 0,
) -> KFunctionalCurve:
    """The family average of the per-path K-functional curves.

    Averaging commutes with the closed form, so the mixed curve's slopes are
    the expected order statistics of the path values.
    """
    if samples is None:
        result = expected_top_sum(a, family, a.rows, cap=cap)
    else:
        result = expected_top_sum_mc(a, family, a.rows, samples, seed)
    return KFunctionalCurve(result.per_k)


def k_functional_mixed(
    a: Matrix,
    family: MapFamily,
    t: float,
    *,
    cap: int | None = None,
    samples: int | None = None,
    seed: int = 0,
) -> float:
    """Average of k_functional over the family's paths at weight t."""
    return mixed_k_curve(a, family, cap=cap, samples=samples, seed=seed).value(t)


# ---------------------------------------------------------------------------
# the (theta, p) interpolation norm with theta = 1 - 1/p


@dataclass(frozen=True)
class InterpolationParams:
    """Exponent bookkeeping: theta = 1 - 1/p and q = p.

    The integral norm needs 0 < theta < 1, i.e. p > 1; p = 1 is handled by
    the exact identity in the lp verifier instead.
    """

    p: float

    def __post_init__(self):
        if not math.isfinite(self.p) or self.p < 1.0:
            raise DomainError("p must be finite and >= 1")

    @property
    def theta(self) -> float:
        return 1.0 - 1.0 / self.p

    @property
    def q(self) -> float:
        return self.p


def interpolation_norm_from_curve(curve: KFunctionalCurve, p: float) -> float:
    """(integral of [t^-theta K(t)]^p dt/t)^(1/p) for theta = 1 - 1/p.

    The integrand reduces to t^-p K(t)^p.  On (0, 1) the curve is linear
    through the origin and the piece integrates in closed form to K(1)^p;
    beyond n the curve is flat and the improper tail is K(n)^p n^(1-p)/(p-1).
    Each middle unit interval uses a fixed 32-point Gauss-Legendre rule, so
    results are bit-reproducible.
    """
    if not math.isfinite(p) or p <= 1.0:
        raise DomainError("the integral norm requires p > 1")
    knots = curve.knots
    n = curve.n
    if knots[n] == 0.0:
        return 0.0
    pieces = [knots[1] ** p]
    for k in range(1, n):
        t = k + 0.5 + 0.5 * _GL_NODES
        kt = knots[k] + (t - k) * curve.slopes[k]
        pieces.append(0.5 * float(np.sum(_GL_WEIGHTS * (kt / t) ** p)))
    pieces.append(knots[n] ** p * n ** (1.0 - p) / (p - 1.0))
    return math.fsum(pieces) ** (1.0 / p)


def interpolation_norm(x: Sequence[float], p: float) -> float:
    """Interpolation norm of a vector (p > 1; p = 1 is rejected)."""
    return interpolation_norm_from_curve(KFunctionalCurve.from_vector(x), p)


# ---------------------------------------------------------------------------
# expected lp path norms and the head/tail benchmark


@dataclass(frozen=True)
class ScalarExpectation:
    value: float
    mode: str
    samples: Optional[int] = None
    stderr: Optional[float] = None


def expected_lp_norm(
    a: Matrix,
    family: MapFamily,
    p: float,
    *,
    cap: int | None = None,
    samples: int | None = None,
    seed: int = 0,
) -> ScalarExpectation:
    """Average of the lp norm of the path values, exact or Monte Carlo."""
    _check_dims(a, family)
    if not math.isfinite(p) or p < 1.0:
        raise DomainError("p must be finite and >= 1")

    def block_norms(block: np.ndarray) -> np.ndarray:
        paths = _paths_for_block(a, block)
        if p == 1.0:
            return paths.sum(axis=1)
        return (paths**p).sum(axis=1) ** (1.0 / p)

    if samples is None:
        totals = [
            math.fsum(block_norms(b)) for b in iter_member_arrays(family, cap=cap)
        ]
        return ScalarExpectation(value=math.fsum(totals) / family.size, mode="exact")
    if samples < 2:
        raise DomainError("samples must be >= 2")
    moments = RunningMoments()
    for start in range(0, samples, _MC_CHUNK):
        block = sample_array(family, seed, min(_MC_CHUNK, samples - start), start)
        moments.add(block_norms(block))
    return ScalarExpectation(
        value=moments.mean, mode="mc", samples=samples, stderr=moments.stderr()
    )


class HeadTailBound(NamedTuple):
    lower_expr: float
    upper_expr: float


def head_tail_bound(a: Matrix, p: float) -> HeadTailBound:
    """(1/N) * sum of the N largest entries plus the lp tail mean
    ((1/N) * sum over the remaining entries of s^p)^(1/p); returned twice,
    once for each side of the two-sided comparison."""
    if not math.isfinite(p) or p < 1.0:
        raise DomainError("p must be finite and >= 1")
    s = a.rearrangement
    N = a.cols
    head = math.fsum(s[:N]) / N
    tail_terms = s[N:]
    if tail_terms.size:
        tail = (math.fsum(tail_terms**p) / N) ** (1.0 / p)
    else:
        tail = 0.0
    value = head + tail
    return HeadTailBound(lower_expr=value, upper_expr=value)


def verify_lp_bounds(
    a: Matrix,
    family: MapFamily,
    p: float,
    *,
    cap: int | None = None,
    samples: int | None = None,
    seed: int = 0,
    extra_inputs: dict | None = None,
) -> list[VerificationReport]:
    """The two lp reports: the upper bound with constant 1, and the recorded
    lower ratio asserted strictly positive (ids thm1.2/upper, thm1.2/lower-ratio).

    The lower constant is never numeric, so the ratio is logged rather than
    compared against a closed-form bound; the reference value
    1/(32 (1 + 2C)^2) is attached for context.
    """
    _require_uniform_marginals(family, cap)
    c_pair = pairwise_constant(family, cap).pairwise_bound
    reference = 1.0 / (32.0 * float((1 + 2 * c_pair)) ** 2)
    expectation = expected_lp_norm(
        a, family, p, cap=cap, samples=samples, seed=seed
    )
    bound = head_tail_bound(a, p).upper_expr
    inputs = {
        **(extra_inputs or {}),
        "matrix": a.digest(), "family": family.descriptor(), "p": float(p),
    }
    if expectation.mode == "mc":
        inputs["samples"] = expectation.samples
        inputs["seed"] = seed
    upper = inequality_report(
        "thm1.2/upper", inputs, lhs=expectation.value, rhs=bound,
        constant=1.0, mode=expectation.mode, stderr=expectation.stderr,
    )
    if bound == 0.0:
        lower = vacuous_report(
            "thm1.2/lower-ratio", inputs, "zero matrix; ratio is undefined"
        )
    else:
        ratio = expectation.value / bound
        status = STATUS_PASS if ratio > 0.0 else STATUS_FAIL
        lower = VerificationReport(
            check_id="thm1.2/lower-ratio", inputs=inputs,
            lhs=ratio, rhs=0.0, margin=ratio, status=status, direction="ge",
            mode=expectation.mode, stderr=expectation.stderr,
            extra={"reference_constant": reference},
        )
    return [upper, lower]
