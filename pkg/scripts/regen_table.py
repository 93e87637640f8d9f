#!/usr/bin/env python3
"""Regenerate the core-size table over the default (n, p, C) grid.

For every combination of system size, hit-probability target, and churn
ratio, solves for the minimal core size q and reports it with the
achieved miss probability.  Writes CSV to stdout (or --out) and prints
the wall-clock time to stderr, since regenerating the full grid quickly
is part of the point.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

from coreprobe import min_core_size, replaced_count
from coreprobe.cli import parse_ratio


def build_rows(n_values, p_tokens, c_tokens, mode):
    rows = []
    for n in n_values:
        for p_tok in p_tokens:
            target = 1 - parse_ratio(p_tok, name="p")
            for c_tok in c_tokens:
                ratio = parse_ratio(c_tok, name="C", allow_static=True)
                alpha = replaced_count(n, ratio)
                result = min_core_size(n, alpha, target, mode=mode)
                rows.append(
                    (n, p_tok, c_tok, alpha, result.q, float(result.epsilon))
                )
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--n", default="1000,10000,100000",
        help="comma-separated system sizes (default: %(default)s)",
    )
    parser.add_argument(
        "--p", default="99%,99.9%",
        help="comma-separated hit-probability targets (default: %(default)s)",
    )
    parser.add_argument(
        "--C", dest="cap_c", default="static,10%,30%,60%,80%",
        help="comma-separated churn ratios (default: %(default)s)",
    )
    parser.add_argument(
        "--mode", choices=("auto", "exact", "logspace"), default="logspace",
        help="numeric path (default: %(default)s)",
    )
    parser.add_argument("--out", default=None, help="write CSV here instead of stdout")
    args = parser.parse_args(argv)

    n_values = [int(tok) for tok in args.n.split(",") if tok.strip()]
    p_tokens = [tok.strip() for tok in args.p.split(",") if tok.strip()]
    c_tokens = [tok.strip() for tok in args.cap_c.split(",") if tok.strip()]

    started = time.perf_counter()
    rows = build_rows(n_values, p_tokens, c_tokens, args.mode)
    elapsed = time.perf_counter() - started

    lines = ["n,p,C,alpha,q,epsilon"]
    lines += [
        f"{n},{p},{c},{alpha},{q},{eps:.17g}" for n, p, c, alpha, q, eps in rows
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    print(
        f"{len(rows)} cells in {elapsed:.2f}s ({args.mode} mode)",
        file=sys.stderr,
    )


if __name__ == "__main__":
    main()
