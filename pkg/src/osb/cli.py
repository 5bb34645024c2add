"""Command-line harness: verification campaigns, family certification,
sampling, and corpus generation.

Subcommands: verify-main, verify-lp, lemmas, family-check, sample,
corpus gen.  Settings resolve with precedence CLI flag > environment
(OSB_SEED, OSB_ENUM_CAP) > config file (key=value lines) > defaults.
Exit codes: 0 all non-vacuous checks pass, 1 any failure, 2 usage error,
3 family-hypothesis failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from . import campaigns
from .corpus import (
    DEFAULT_SEED,
    Corpus,
    corpus_to_json,
    default_corpus,
    load_corpus,
    single_matrix_corpus,
)
from .errors import DomainError, FormatError, HypothesisError, ResourceError
from .families import (
    DEFAULT_ENUM_CAP,
    family_for_cell,
    load_family,
    parse_family_spec,
    sample,
    symmetric_group,
    full_mapping_family,
)
from .matrices import load_matrix
from .reports import (
    all_passed,
    canonical_json,
    format_summary,
    reports_to_csv,
    reports_to_json,
    summarize,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_HYPOTHESIS = 3


def _read_config(path: Optional[str]) -> dict[str, str]:
    if path is None:
        path = os.environ.get("OSB_CONFIG")
    if path is None or not os.path.exists(path):
        return {}
    settings = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise FormatError(f"bad config line {line!r}; expected key=value")
            key, value = line.split("=", 1)
            settings[key.strip()] = value.strip()
    return settings


def _resolve_int(cli_value, env_name: str, config: dict, key: str, default: int) -> int:
    if cli_value is not None:
        return int(cli_value)
    env = os.environ.get(env_name)
    if env:
        return int(env)
    if key in config:
        return int(config[key])
    return default


def _parse_ell_range(text: Optional[str]) -> Optional[tuple[int, int]]:
    if text is None:
        return None
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return int(lo), int(hi)
        value = int(text)
        return value, value
    except ValueError:
        raise DomainError(f"bad ell range {text!r}; expected A..B or a single integer")


def _parse_p_list(text: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise DomainError(f"bad p list {text!r}; expected comma-separated numbers")
    if not values or any(p < 1 for p in values):
        raise DomainError("p values must be >= 1")
    return values


def _load_inputs(args) -> Corpus:
    if getattr(args, "matrix", None):
        return single_matrix_corpus(load_matrix(args.matrix))
    if getattr(args, "corpus", None):
        return load_corpus(args.corpus)
    return default_corpus(seed=args.resolved_corpus_seed)


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _finish_reports(args, reports) -> int:
    payload = (
        reports_to_csv(reports) if args.format == "csv" else reports_to_json(reports)
    )
    if args.summary:
        if args.out:
            _emit(args, payload)
        print(format_summary(summarize(reports)))
    else:
        _emit(args, payload)
    return EXIT_PASS if all_passed(reports) else EXIT_FAIL


def _add_common(parser: argparse.ArgumentParser, *, corpus_inputs: bool = True):
    parser.add_argument("--family", required=True,
                        help="sym[:n], map[:n:N], or file:PATH")
    if corpus_inputs:
        parser.add_argument("--matrix", help="single matrix file (.json or .csv)")
        parser.add_argument("--corpus", help="corpus JSON (default: built-in corpus)")
    parser.add_argument("--mc-samples", type=int, default=None,
                        help="Monte Carlo draw count (default: exact enumeration)")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--enum-cap", type=int, default=None)
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--summary", action="store_true",
                        help="print pass/fail counts and worst margins")
    parser.add_argument("--config", help="key=value settings file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osb",
        description="Verify order-statistic average bounds by exact "
        "enumeration and seeded Monte Carlo.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-main", help="two-sided top-sum bound campaign")
    _add_common(p)
    p.add_argument("--ell", help="ell range A..B (default: 1..n per matrix)")
    p.add_argument("--reduce", action="store_true",
                   help="zero entries outside the ell*N largest before the "
                   "lower-bound check")

    p = sub.add_parser("verify-lp", help="lp path-norm bound campaign")
    _add_common(p)
    p.add_argument("--p", default="1,1.5,2,3", help="comma-separated exponents")

    p = sub.add_parser("lemmas", help="tail-inequality suite campaign")
    _add_common(p)
    p.add_argument("--ell", help="ell range A..B (default: 1..n per matrix)")
    p.add_argument("--per-instance", action="store_true",
                   help="emit one report per swept instance (default for "
                   "--matrix runs; corpus runs aggregate by worst margin)")

    p = sub.add_parser("family-check", help="certify family hypotheses")
    _add_common(p, corpus_inputs=False)
    p.add_argument("--n", type=int, help="shape for bare sym/map specifiers")
    p.add_argument("--N", type=int, help="shape for bare sym/map specifiers")

    p = sub.add_parser("sample", help="draw maps from a family")
    _add_common(p, corpus_inputs=False)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--n", type=int, help="shape for bare sym/map specifiers")
    p.add_argument("--N", type=int, help="shape for bare sym/map specifiers")

    p = sub.add_parser("corpus", help="corpus utilities")
    corpus_sub = p.add_subparsers(dest="corpus_command", required=True)
    g = corpus_sub.add_parser("gen", help="write the default corpus")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", help="output path (default: stdout)")
    g.add_argument("--config", help="key=value settings file")
    return parser


def _resolve_family(args):
    spec = parse_family_spec(args.family)
    if spec.kind == "file":
        return load_family(spec.path)
    n = args.n if getattr(args, "n", None) else spec.n
    N = args.N if getattr(args, "N", None) else (spec.N or n)
    if spec.kind == "sym":
        if n is None:
            raise DomainError("sym needs a size: use sym:n or --n")
        return symmetric_group(n)
    if n is None or N is None:
        raise DomainError("map needs a shape: use map:n:N or --n/--N")
    return full_mapping_family(n, N)


def _run(args) -> int:
    config = _read_config(getattr(args, "config", None))
    seed = _resolve_int(getattr(args, "seed", None), "OSB_SEED", config, "seed",
                        DEFAULT_SEED)
    cap = _resolve_int(getattr(args, "enum_cap", None), "OSB_ENUM_CAP", config,
                       "enum_cap", DEFAULT_ENUM_CAP)
    args.resolved_corpus_seed = seed

    if args.command == "corpus":
        corpus = default_corpus(seed=seed)
        _emit(args, corpus_to_json(corpus))
        return EXIT_PASS

    if args.command == "family-check":
        family = _resolve_family(args)
        cert = campaigns.run_family_check(family, cap=cap)
        _emit(args, canonical_json(cert.to_json_obj()) + "\n")
        if args.summary:
            print(f"family {cert.family}: size {cert.size}, "
                  f"marginals uniform: {cert.marginals_uniform}, "
                  f"pairwise constant: {float(cert.pairwise_bound)}")
        return EXIT_PASS if cert.marginals_uniform else EXIT_HYPOTHESIS

    if args.command == "sample":
        family = _resolve_family(args)
        maps = sample(family, seed, args.count)
        doc = {"n": family.n, "N": family.N, "maps": [list(g) for g in maps]}
        _emit(args, canonical_json(doc) + "\n")
        return EXIT_PASS

    spec = parse_family_spec(args.family)
    corpus = _load_inputs(args)
    samples = args.mc_samples
    if args.command == "verify-main":
        reports = campaigns.run_verify_main(
            corpus, spec, _parse_ell_range(args.ell),
            reduce_top=args.reduce, cap=cap, samples=samples, seed=seed,
        )
    elif args.command == "verify-lp":
        reports = campaigns.run_verify_lp(
            corpus, spec, _parse_p_list(args.p),
            cap=cap, samples=samples, seed=seed,
        )
    elif args.command == "lemmas":
        aggregate = not (args.per_instance or getattr(args, "matrix", None))
        reports = campaigns.run_lemmas(
            corpus, spec, _parse_ell_range(args.ell), cap=cap,
            aggregate=aggregate,
        )
    else:  # pragma: no cover - argparse restricts commands
        raise DomainError(f"unknown command {args.command}")
    if not reports:
        print("no applicable (cell, family) pairs; nothing checked",
              file=sys.stderr)
    return _finish_reports(args, reports)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except HypothesisError as e:
        print(f"hypothesis failure: {e}", file=sys.stderr)
        if e.certificate is not None:
            print(canonical_json(e.certificate.to_json_obj()), file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (DomainError, FormatError, ResourceError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
