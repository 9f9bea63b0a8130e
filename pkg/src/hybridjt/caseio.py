"""Evidence case files and posterior CSV output.

Evidence files hold one case per line as comma-separated ``var=state`` pairs
using variable and state names. ``#`` starts a comment; a line that is blank
before any comment is stripped is a case with no evidence, while comment-only
lines are skipped.
"""

from __future__ import annotations

import csv
import hashlib
import io
from typing import Iterable, Mapping

from .network import BayesianNetwork, Evidence

CSV_HEADER = ("case_id", "variable", "state", "posterior")
ZERO_FLAG = "ZERO_PROBABILITY_EVIDENCE"


class EvidenceFileError(ValueError):
    pass


def parse_evidence_file(text: str, net: BayesianNetwork) -> list[Evidence]:
    cases = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line, hash_, _ = raw.partition("#")
        line = line.strip()
        if not line and hash_:
            continue
        assignments: dict[int, int] = {}
        for item in filter(None, (p.strip() for p in line.split(","))):
            name, eq, state = (s.strip() for s in item.partition("="))
            if not eq or not name or not state:
                raise EvidenceFileError(f"line {lineno}: expected var=state, got {item!r}")
            try:
                var = net.var_id(name)
            except KeyError:
                raise EvidenceFileError(f"line {lineno}: unknown variable {name!r}") from None
            states = net.variables[var].states
            if state not in states:
                raise EvidenceFileError(f"line {lineno}: unknown state {state!r} for variable {name!r}")
            if var in assignments:
                raise EvidenceFileError(f"line {lineno}: variable {name!r} observed twice")
            assignments[var] = states.index(state)
        cases.append(Evidence(assignments))
    return cases


def format_evidence(evidence: Mapping[int, int], net: BayesianNetwork) -> str:
    return ",".join(
        f"{net.variables[v].name}={net.variables[v].states[s]}" for v, s in sorted(evidence.items())
    )


def format_posterior(p: float) -> str:
    return f"{p:.12g}"


def posterior_rows(case_id: int, results, net: BayesianNetwork):
    """CSV rows for one case; ``results`` is None for zero-probability evidence."""
    if results is None:
        return [(case_id, "", ZERO_FLAG, "nan")]
    rows = []
    for var in sorted(results):
        posterior = getattr(results[var], "posterior", results[var])
        variable = net.variables[var]
        for s, p in enumerate(posterior):
            rows.append((case_id, variable.name, variable.states[s], format_posterior(float(p))))
    return rows


def write_csv(rows: Iterable, out, header=CSV_HEADER) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def rows_to_csv(rows: Iterable, header=CSV_HEADER) -> str:
    buf = io.StringIO()
    write_csv(rows, buf, header)
    return buf.getvalue()


def checksum(rows: Iterable) -> int:
    """Order-independent 64-bit hash of posterior rows."""
    total = 0
    for row in rows:
        digest = hashlib.blake2b("\x1f".join(str(x) for x in row).encode(), digest_size=8).digest()
        total = (total + int.from_bytes(digest, "little")) & 0xFFFFFFFFFFFFFFFF
    return total
