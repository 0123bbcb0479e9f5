"""Sharp Rosenthal-type constants, moment matching and extremal checks."""

import json

from ._roskit import (
    complex_constant,
    feasibility_interval,
    gaussian_abs_moment,
    match,
    mixture_sup,
    positive_sum_sup,
    rosenthal_constant,
    run_cli,
)

__all__ = [
    "cli_records",
    "complex_constant",
    "feasibility_interval",
    "gaussian_abs_moment",
    "match",
    "mixture_sup",
    "positive_sum_sup",
    "rosenthal_constant",
    "run_cli",
]


def cli_records(*args):
    """Runs the command line and parses its JSON-lines output."""
    code, out, err = run_cli([str(a) for a in args])
    if code != 0:
        raise RuntimeError(err.strip())
    return [json.loads(line) for line in out.splitlines() if line]
