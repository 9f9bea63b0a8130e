"""Reader and writer for the BIF 0.3 interchange format (bnlearn dialect).

Supported probability syntaxes are ``table`` lists, per-configuration rows
``(s1, s2) p1, p2;`` and ``default`` rows. ``property`` entries are skipped.
"""

from __future__ import annotations

import dataclasses
import gzip
import itertools
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import BifSyntaxError
from .network import BayesianNetwork, Cpt, Variable, check_network, normalize_rows

_PUNCT = "{}()[];,|"
_TOKEN_RE = re.compile(r"//[^\n]*|/\*.*?\*/|\s+|[{}()\[\];,|]|[^\s{}()\[\];,|]+", re.DOTALL)


@dataclass
class _Token:
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:  # pragma: no cover - the pattern matches any character
            raise BifSyntaxError("unreadable character", line, pos - line_start + 1)
        s = m.group()
        if not (s[0].isspace() or s.startswith("//") or s.startswith("/*")):
            tokens.append(_Token(s, line, pos - line_start + 1))
        newlines = s.count("\n")
        if newlines:
            line += newlines
            line_start = pos + s.rfind("\n") + 1
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        end_line = text.count("\n") + 1
        self._eof = _Token("<end of file>", end_line, 1)

    def peek(self) -> _Token:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else self._eof

    def next(self) -> _Token:
        tok = self.peek()
        if tok is self._eof:
            raise BifSyntaxError("unexpected end of file", tok.line, tok.col)
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            raise BifSyntaxError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def word(self) -> _Token:
        tok = self.next()
        if tok.text in _PUNCT:
            raise BifSyntaxError(f"expected a name, found {tok.text!r}", tok.line, tok.col)
        return tok

    def skip_statement(self):
        while self.next().text != ";":
            pass

    def numbers(self) -> list[float]:
        values = []
        while True:
            tok = self.next()
            if tok.text == ";":
                return values
            if tok.text == ",":
                continue
            try:
                values.append(float(tok.text))
            except ValueError:
                raise BifSyntaxError(f"expected a number, found {tok.text!r}", tok.line, tok.col) from None

    def name_list(self, close: str) -> list[_Token]:
        names = [self.word()]
        while self.peek().text == ",":
            self.next()
            names.append(self.word())
        self.expect(close)
        return names


def parse_bif(text: str, validate: bool = True) -> BayesianNetwork:
    """Parse a BIF document. Variable ids follow declaration order."""
    p = _Parser(text)
    name = "unknown"
    variables: list[Variable] = []
    index: dict[str, int] = {}
    tables: dict[int, tuple[tuple[int, ...], np.ndarray]] = {}

    while p.peek() is not p._eof:
        tok = p.next()
        if tok.text == "network":
            words = []
            while p.peek().text != "{":
                words.append(p.word().text)
            name = " ".join(words) or name
            p.expect("{")
            while p.peek().text != "}":
                p.skip_statement()
            p.expect("}")
        elif tok.text == "variable":
            vtok = p.word()
            if vtok.text in index:
                raise BifSyntaxError(f"variable {vtok.text!r} declared twice", vtok.line, vtok.col)
            p.expect("{")
            states = None
            while p.peek().text != "}":
                head = p.next()
                if head.text == "type":
                    kind = p.word()
                    if kind.text != "discrete":
                        raise BifSyntaxError(f"unsupported variable type {kind.text!r}", kind.line, kind.col)
                    p.expect("[")
                    ctok = p.word()
                    try:
                        declared = int(ctok.text)
                    except ValueError:
                        raise BifSyntaxError(f"bad cardinality {ctok.text!r}", ctok.line, ctok.col) from None
                    p.expect("]")
                    p.expect("{")
                    states = tuple(t.text for t in p.name_list("}"))
                    if len(states) != declared:
                        raise BifSyntaxError(
                            f"variable {vtok.text!r} declares {declared} states but lists {len(states)}",
                            ctok.line, ctok.col,
                        )
                    p.expect(";")
                elif head.text == "property":
                    p.skip_statement()
                else:
                    raise BifSyntaxError(f"unexpected {head.text!r} in variable block", head.line, head.col)
            p.expect("}")
            if states is None:
                raise BifSyntaxError(f"variable {vtok.text!r} has no type declaration", vtok.line, vtok.col)
            index[vtok.text] = len(variables)
            variables.append(Variable(len(variables), vtok.text, states))
        elif tok.text == "probability":
            child, parents, probs = _probability_block(p, variables, index)
            if child in tables:
                t = tok
                raise BifSyntaxError(f"second probability block for {variables[child].name!r}", t.line, t.col)
            tables[child] = (parents, probs)
        else:
            raise BifSyntaxError(f"unexpected {tok.text!r} at top level", tok.line, tok.col)

    cpts = []
    for v in variables:
        if v.id not in tables:
            raise BifSyntaxError(f"no probability block for variable {v.name!r}", p._eof.line, 1)
        parents, probs = tables[v.id]
        cpts.append(Cpt(v.id, parents, probs))
    net = BayesianNetwork(tuple(variables), tuple(cpts), name=name)
    return normalize_rows(check_network(net)) if validate else net


def _probability_block(p: _Parser, variables, index):
    p.expect("(")
    names = [p.word()]
    parent_toks: list[_Token] = []
    if p.peek().text == "|":
        p.next()
        parent_toks = p.name_list(")")
    else:
        while p.peek().text == ",":  # some emitters list the parents after a comma
            p.next()
            parent_toks.append(p.word())
        p.expect(")")
    for t in names + parent_toks:
        if t.text not in index:
            raise BifSyntaxError(f"unknown variable {t.text!r} in probability block", t.line, t.col)
    child = index[names[0].text]
    parents = tuple(index[t.text] for t in parent_toks)
    card = variables[child].card
    pcards = [variables[q].card for q in parents]
    n_rows = math.prod(pcards)
    rows = np.full((n_rows, card), np.nan)
    default = None
    p.expect("{")
    while p.peek().text != "}":
        head = p.next()
        if head.text == "table":
            values = p.numbers()
            if len(values) != n_rows * card:
                raise BifSyntaxError(
                    f"table for {names[0].text!r} has {len(values)} entries, expected {n_rows * card}",
                    head.line, head.col,
                )
            # flat tables list the child states slowest
            rows[:] = np.asarray(values).reshape(card, n_rows).T
        elif head.text == "default":
            default = _row(p, head, card, names[0].text)
        elif head.text == "(":
            state_toks = p.name_list(")")
            if len(state_toks) != len(parents):
                raise BifSyntaxError(
                    f"row names {len(state_toks)} parent states, expected {len(parents)}",
                    head.line, head.col,
                )
            r = 0
            for q, st in zip(parents, state_toks):
                try:
                    s = variables[q].states.index(st.text)
                except ValueError:
                    raise BifSyntaxError(
                        f"unknown state {st.text!r} of variable {variables[q].name!r}", st.line, st.col
                    ) from None
                r = r * variables[q].card + s
            rows[r] = _row(p, head, card, names[0].text)
        elif head.text == "property":
            p.skip_statement()
        else:
            raise BifSyntaxError(f"unexpected {head.text!r} in probability block", head.line, head.col)
    close = p.expect("}")
    missing = np.isnan(rows[:, 0]) if card else np.zeros(n_rows, bool)
    if missing.any():
        if default is None:
            raise BifSyntaxError(
                f"probability block for {names[0].text!r} leaves {int(missing.sum())} row(s) unspecified",
                close.line, close.col,
            )
        rows[missing] = default
    return child, parents, rows.ravel()


def _row(p: _Parser, head: _Token, card: int, name: str) -> list[float]:
    values = p.numbers()
    if len(values) != card:
        raise BifSyntaxError(
            f"row for {name!r} has {len(values)} entries, expected {card}", head.line, head.col
        )
    return values


def write_bif(net: BayesianNetwork) -> str:
    """Emit ``net`` as BIF text that :func:`parse_bif` reads back exactly."""
    lines = [f"network {net.name} {{", "}"]
    for v in net.variables:
        lines.append(f"variable {v.name} {{")
        lines.append(f"  type discrete [ {v.card} ] {{ {', '.join(v.states)} }};")
        lines.append("}")
    for v in net.variables:
        cpt = net.cpt_of(v.id)
        probs = cpt.probabilities.reshape(-1, v.card)
        if not cpt.parents:
            lines.append(f"probability ( {v.name} ) {{")
            lines.append("  table " + ", ".join(repr(float(x)) for x in probs[0]) + ";")
        else:
            pnames = ", ".join(net.variables[q].name for q in cpt.parents)
            lines.append(f"probability ( {v.name} | {pnames} ) {{")
            combos = itertools.product(*(net.variables[q].states for q in cpt.parents))
            for states, row in zip(combos, probs):
                values = ", ".join(repr(float(x)) for x in row)
                lines.append(f"  ({', '.join(states)}) {values};")
        lines.append("}")
    return "\n".join(lines) + "\n"


def read_bif(path, validate: bool = True) -> BayesianNetwork:
    """Read a BIF file; ``.gz`` files are decompressed transparently."""
    path = Path(path)
    raw = path.read_bytes()
    if path.suffix == ".gz":
        raw = gzip.decompress(raw)
    net = parse_bif(raw.decode("utf-8"), validate=validate)
    if net.name == "unknown":
        net = dataclasses.replace(net, name=path.name.split(".")[0])
    return net
