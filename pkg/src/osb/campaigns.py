"""Corpus-level verification campaigns behind the CLI subcommands.

Each campaign walks a corpus cell by cell, realizes the requested family for
each shape, and emits verification reports.  Families failing the uniform
marginal hypothesis abort the campaign with their certificate attached.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Sequence

from .errors import HypothesisError
from .families import (
    FamilySpec,
    MapFamily,
    check_marginals,
    family_certificate,
    family_for_cell,
    pairwise_constant,
)
from .corpus import Corpus
from .matrices import order_map, reduce_to_top
from .orderstats import (
    build_hit_table,
    expected_top_sum,
    expected_top_sum_mc,
    lemma_suite,
)
from .interpolation import verify_lp_bounds
from .reports import (
    STATUS_FAIL,
    STATUS_PASS,
    STATUS_VACUOUS,
    VerificationReport,
    inequality_report,
    vacuous_report,
)

EXAMPLE_CONSTANTS = {
    "symmetric-group": 1.0 / 800.0,
    "full-mapping": 1.0 / 288.0,
}


def lower_constant(c_pair: Fraction) -> float:
    """The guaranteed lower constant 1 / (32 (1 + 2C)^2)."""
    return float(Fraction(1, 1) / (32 * (1 + 2 * c_pair) ** 2))


def _iter_cell_families(corpus: Corpus, spec: FamilySpec):
    for cell in corpus:
        family = family_for_cell(spec, cell.n, cell.N)
        if family is None:
            continue
        yield cell, family


def _require_hypotheses(family: MapFamily, cap: Optional[int]):
    cert = check_marginals(family, cap)
    if not cert.marginals_uniform:
        raise HypothesisError(
            f"family {family.descriptor()} violates the uniform-marginal "
            f"hypothesis (worst deviation {cert.worst_marginal_deviation})",
            certificate=family_certificate(family, cap),
        )


def _ell_values(ell_range: Optional[tuple[int, int]], n: int) -> list[int]:
    if ell_range is None:
        return list(range(1, n + 1))
    lo, hi = ell_range
    values = [ell for ell in range(lo, hi + 1) if 1 <= ell <= n]
    return values


def run_family_check(family: MapFamily, cap: int | None = None):
    """Certify conditions on the family: exact marginals and the pairwise
    correlation constant."""
    return family_certificate(family, cap)


def run_verify_main(
    corpus: Corpus,
    spec: FamilySpec,
    ell_range: Optional[tuple[int, int]] = None,
    *,
    reduce_top: bool = False,
    cap: int | None = None,
    samples: int | None = None,
    seed: int = 0,
) -> list[VerificationReport]:
    """The two-sided bound campaign (ids thm1.1/lower, thm1.1/upper, and the
    per-kind example-constant line thm1.1/example-lower).

    For every matrix and admissible ell, checks

        c * (1/N) * top(ell*N)  <=  E top-ell path sum  <=  (2/N) * top(ell*N)

    with c = 1/(32 (1+2C)^2) for the family's exact pairwise constant C.
    With ``reduce_top`` the lower check zeroes all entries outside the ell*N
    largest first (legitimate for lower bounds; off by default).
    """
    out: list[VerificationReport] = []
    for cell, family in _iter_cell_families(corpus, spec):
        _require_hypotheses(family, cap)
        c_pair = pairwise_constant(family, cap).pairwise_bound
        c_low = lower_constant(c_pair)
        example = EXAMPLE_CONSTANTS.get(family.kind)
        N = family.N
        for mid, a in cell.matrices:
            ells = _ell_values(ell_range, family.n)
            if not ells:
                continue
            mc_mode = samples is not None
            if not mc_mode:
                full = expected_top_sum(a, family, family.n, cap=cap)
            order = order_map(a) if reduce_top else None
            for ell in ells:
                if mc_mode:
                    res = expected_top_sum_mc(a, family, ell, samples, seed)
                    expect, stderr, mode = res.value, res.stderr, "mc"
                else:
                    expect = math.fsum(full.per_k[:ell])
                    stderr, mode = None, "exact"
                top_avg = a.top_sum(ell * N) / N
                inputs = {
                    "cell": f"{cell.n}x{cell.N}", "id": mid,
                    "matrix": a.digest(), "family": family.descriptor(),
                    "ell": ell,
                }
                if mc_mode:
                    inputs["samples"] = samples
                    inputs["seed"] = seed
                if reduce_top:
                    reduced = reduce_to_top(a, order, ell)
                    if mc_mode:
                        low_res = expected_top_sum_mc(
                            reduced, family, ell, samples, seed)
                        low_expect, low_stderr = low_res.value, low_res.stderr
                    else:
                        low_expect = expected_top_sum(
                            reduced, family, ell, cap=cap).value
                        low_stderr = None
                    low_inputs = {**inputs, "reduced": True}
                else:
                    low_expect, low_stderr = expect, stderr
                    low_inputs = inputs
                out.append(inequality_report(
                    "thm1.1/lower", low_inputs,
                    lhs=c_low * top_avg, rhs=low_expect,
                    constant=c_low, mode=mode, stderr=low_stderr,
                ))
                out.append(inequality_report(
                    "thm1.1/upper", inputs,
                    lhs=expect, rhs=2.0 * top_avg,
                    constant=2.0, mode=mode, stderr=stderr,
                ))
                if example is not None:
                    out.append(inequality_report(
                        "thm1.1/example-lower", low_inputs,
                        lhs=example * top_avg, rhs=low_expect,
                        constant=example, mode=mode, stderr=low_stderr,
                    ))
    return out


def run_verify_lp(
    corpus: Corpus,
    spec: FamilySpec,
    p_list: Sequence[float],
    *,
    cap: int | None = None,
    samples: int | None = None,
    seed: int = 0,
) -> list[VerificationReport]:
    """The lp campaign: upper bound with constant 1 per matrix and exponent,
    plus one aggregate minimum-lower-ratio report per exponent
    (id thm1.2/lower-min-ratio)."""
    out: list[VerificationReport] = []
    min_ratio: dict[float, tuple[float, dict]] = {}
    for cell, family in _iter_cell_families(corpus, spec):
        _require_hypotheses(family, cap)
        for mid, a in cell.matrices:
            for p in p_list:
                reports = verify_lp_bounds(
                    a, family, p, cap=cap, samples=samples, seed=seed,
                    extra_inputs={"cell": f"{cell.n}x{cell.N}", "id": mid},
                )
                for r in reports:
                    if r.check_id == "thm1.2/lower-ratio" and r.status != STATUS_VACUOUS:
                        current = min_ratio.get(p)
                        if current is None or r.lhs < current[0]:
                            min_ratio[p] = (r.lhs, dict(r.inputs))
                out.extend(reports)
    for p in p_list:
        if p not in min_ratio:
            out.append(vacuous_report(
                "thm1.2/lower-min-ratio", {"p": float(p)},
                "no nonzero matrix produced a ratio",
            ))
            continue
        ratio, worst_inputs = min_ratio[p]
        status = STATUS_PASS if ratio > 0.0 else STATUS_FAIL
        out.append(VerificationReport(
            check_id="thm1.2/lower-min-ratio",
            inputs={"p": float(p)},
            lhs=ratio, rhs=0.0, margin=ratio, status=status, direction="ge",
            extra={"worst_case": worst_inputs},
        ))
    return out


_AGGREGATE_NOTE = "aggregated: worst margin over the swept instances"


def _aggregate(reports: list[VerificationReport], group_inputs: dict) -> list[VerificationReport]:
    """Collapse per-instance reports to one worst-margin report per check id."""
    grouped: dict[str, list[VerificationReport]] = {}
    for r in reports:
        grouped.setdefault(r.check_id, []).append(r)
    out = []
    for check_id in sorted(grouped):
        batch = grouped[check_id]
        live = [r for r in batch if r.status != STATUS_VACUOUS]
        if not live:
            out.append(vacuous_report(
                check_id, {**group_inputs, "instances": len(batch)},
                batch[0].extra.get("note", "all instances vacuous"),
            ))
            continue
        worst = min(live, key=lambda r: r.margin)
        failed = sum(1 for r in live if r.status == STATUS_FAIL)
        status = STATUS_FAIL if failed else STATUS_PASS
        out.append(VerificationReport(
            check_id=check_id,
            inputs={**group_inputs, "instances": len(batch)},
            lhs=worst.lhs, rhs=worst.rhs, margin=worst.margin, status=status,
            direction=worst.direction, mode=worst.mode, constant=worst.constant,
            extra={"note": _AGGREGATE_NOTE, "failed_instances": failed,
                   "worst_case": dict(worst.inputs)},
        ))
    return out


def run_lemmas(
    corpus: Corpus,
    spec: FamilySpec,
    ell_range: Optional[tuple[int, int]] = None,
    *,
    cap: int | None = None,
    aggregate: bool = True,
) -> list[VerificationReport]:
    """Drive the tail-inequality suite across the corpus.

    With ``aggregate`` (the default for corpus runs) the per-instance sweep
    reports of each (matrix, family, ell) group are collapsed to one
    worst-margin report per check id; every instance is still evaluated.
    """
    out: list[VerificationReport] = []
    for cell, family in _iter_cell_families(corpus, spec):
        _require_hypotheses(family, cap)
        c_pair = pairwise_constant(family, cap).pairwise_bound
        for mid, a in cell.matrices:
            table = build_hit_table(family, order_map(a), cap=cap)
            cell_inputs = {"cell": f"{cell.n}x{cell.N}", "id": mid}
            for ell in _ell_values(ell_range, family.n):
                instance = lemma_suite(
                    a, family, ell, table=table, c_pair=c_pair, cap=cap,
                    skip_hypothesis_check=True, extra_inputs=cell_inputs,
                )
                if aggregate:
                    group = {
                        **cell_inputs,
                        "matrix": a.digest(), "family": family.descriptor(),
                        "ell": ell,
                    }
                    out.extend(_aggregate(instance, group))
                else:
                    out.extend(instance)
    return out
