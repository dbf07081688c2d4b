"""Command-line entry point for the scoring adapter."""

from __future__ import annotations

import argparse
import sys

from .scorers import SCORERS, ScorerError, make_scorer
from .serve import serve


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vlt-adapter",
        description="Score JSONL {id, src, hyp, ref} requests from stdin; "
                    "write {id, score} replies to stdout.",
    )
    parser.add_argument("--scorer", choices=sorted(SCORERS), default="dummy")
    parser.add_argument("--checkpoint", default=None,
                        help="Scorer-specific model name or path.")
    parser.add_argument("--batch-size", type=int, default=32)
    args = parser.parse_args(argv)
    try:
        scorer = make_scorer(args.scorer, args.checkpoint)
    except ScorerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return serve(scorer, sys.stdin, sys.stdout, batch_size=args.batch_size)


if __name__ == "__main__":
    sys.exit(main())
