"""Text format for influence diagrams.

The format is line oriented and whitespace insensitive within a line::

    # comments run to end of line
    name: weather
    format_version: 1

    chance Weather {
      domain: sunny rain
      parents:
      table:
        : 0.7 0.3
    }
    decision Umbrella {
      domain: take leave
      parents: Forecast
    }
    value Util {
      parents: Weather Umbrella
      table:
        sunny take : 0.3
        sunny leave : 1.0
        rain take : 0.8
        rain leave : 0.0
    }

Table rows are keyed by parent outcome labels in declared parent order
(chance rows list one probability per outcome; value rows one real).
Node names and labels may not contain whitespace, ``{``, ``}``, ``:`` or
``#``.  Decision blocks carry no table.  Reals are written with
``repr``, i.e. the shortest decimal that round-trips exactly.
"""

from __future__ import annotations

from typing import Iterator, Sequence

import numpy as np

from .model import (
    ChanceNode,
    DecisionNode,
    DiagramError,
    InfluenceDiagram,
    ValueNode,
    Variable,
    iter_assignments,
)

FORMAT_VERSION = 1
_KINDS = ("chance", "decision", "value")


class DiagramParseError(DiagramError):
    def __init__(self, message: str, line: int | None = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def _tokens(text: str) -> list[tuple[str, int]]:
    out: list[tuple[str, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        for ch in "{}:":
            line = line.replace(ch, f" {ch} ")
        parts = line.split()
        out.extend((p, lineno) for p in parts)
        if parts:
            out.append(("\n", lineno))
    return out


class _Block:
    def __init__(self, kind: str, name: str, line: int) -> None:
        self.kind = kind
        self.name = name
        self.line = line
        self.domain: list[str] | None = None
        self.parents: list[str] | None = None
        self.rows: list[tuple[tuple[str, ...], list[float], int]] = []
        self.has_table = False


class _Parser:
    def __init__(self, text: str) -> None:
        self.toks = _tokens(text)
        self.pos = 0

    def _peek(self) -> tuple[str, int] | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def _next(self, what: str) -> tuple[str, int]:
        tok = self._peek()
        if tok is None:
            last = self.toks[-1][1] if self.toks else 1
            raise DiagramParseError(f"unexpected end of input, expected {what}", last)
        self.pos += 1
        return tok

    def _expect(self, literal: str) -> int:
        tok, line = self._next(repr(literal))
        if tok != literal:
            raise DiagramParseError(f"expected {literal!r}, found {tok!r}", line)
        return line

    def _skip_newlines(self) -> None:
        while (tok := self._peek()) is not None and tok[0] == "\n":
            self.pos += 1

    def _rest_of_line(self) -> list[str]:
        atoms = []
        while (tok := self._peek()) is not None and tok[0] != "\n":
            if tok[0] in "{}:":
                break
            atoms.append(tok[0])
            self.pos += 1
        return atoms

    def parse(self) -> tuple[dict[str, str], list[_Block]]:
        headers: dict[str, str] = {}
        blocks: list[_Block] = []
        self._skip_newlines()
        while (tok := self._peek()) is not None:
            word, line = tok
            if word in _KINDS:
                blocks.append(self._parse_block())
            else:
                self.pos += 1
                self._expect(":")
                value = self._rest_of_line()
                if len(value) != 1:
                    raise DiagramParseError(f"header {word!r} needs exactly one value", line)
                headers[word] = value[0]
            self._skip_newlines()
        return headers, blocks

    def _parse_block(self) -> _Block:
        kind, line = self._next("node kind")
        name, _ = self._next("node name")
        if name in "{}:\n":
            raise DiagramParseError(f"missing name for {kind} block", line)
        self._skip_newlines_until_brace()
        self._expect("{")
        block = _Block(kind, name, line)
        while True:
            self._skip_newlines()
            tok = self._peek()
            if tok is None:
                raise DiagramParseError(f"unterminated block {name!r}", line)
            if tok[0] == "}":
                self.pos += 1
                return block
            self._parse_entry(block)

    def _skip_newlines_until_brace(self) -> None:
        while (tok := self._peek()) is not None and tok[0] == "\n":
            self.pos += 1

    def _parse_entry(self, block: _Block) -> None:
        key, line = self._next("block entry")
        if key not in ("domain", "parents", "table"):
            raise DiagramParseError(
                f"unknown entry {key!r} in block {block.name!r} (expected domain, parents or table)",
                line,
            )
        self._expect(":")
        if key == "domain":
            if block.domain is not None:
                raise DiagramParseError(f"duplicate domain in {block.name!r}", line)
            block.domain = self._rest_of_line()
        elif key == "parents":
            if block.parents is not None:
                raise DiagramParseError(f"duplicate parents in {block.name!r}", line)
            block.parents = self._rest_of_line()
        else:
            if block.has_table:
                raise DiagramParseError(f"duplicate table in {block.name!r}", line)
            block.has_table = True
            self._skip_newlines()
            self._parse_rows(block)

    def _parse_rows(self, block: _Block) -> None:
        while True:
            tok = self._peek()
            if tok is None or tok[0] == "}":
                return
            labels: list[str] = []
            while (tok := self._peek()) is not None and tok[0] not in (":", "\n", "}", "{"):
                labels.append(tok[0])
                self.pos += 1
            line = self._expect(":")
            numbers: list[float] = []
            for atom in self._rest_of_line():
                try:
                    numbers.append(float(atom))
                except ValueError:
                    raise DiagramParseError(f"bad number {atom!r} in table of {block.name!r}", line) from None
            if not numbers:
                raise DiagramParseError(f"empty table row in {block.name!r}", line)
            block.rows.append((tuple(labels), numbers, line))
            self._skip_newlines()


def _build_table(
    block: _Block,
    parents: Sequence[Variable],
    width: int,
) -> np.ndarray:
    sizes = tuple(v.size for v in parents)
    table = np.full(sizes + (width,), np.nan)
    seen: set[tuple[int, ...]] = set()
    for labels, numbers, line in block.rows:
        if len(labels) != len(parents):
            raise DiagramParseError(
                f"row in {block.name!r} keys {len(labels)} parent(s), expected {len(parents)}", line
            )
        if len(numbers) != width:
            raise DiagramParseError(
                f"row in {block.name!r} has {len(numbers)} value(s), expected {width}", line
            )
        try:
            idx = tuple(v.index_of(l) for v, l in zip(parents, labels))
        except KeyError as e:
            raise DiagramParseError(f"unknown outcome label in {block.name!r}: {e.args[0]}", line) from None
        if idx in seen:
            raise DiagramParseError(f"duplicate table row in {block.name!r}: {labels}", line)
        seen.add(idx)
        table[idx] = numbers
    n_expected = int(np.prod(sizes)) if sizes else 1
    if len(seen) != n_expected:
        raise DiagramParseError(
            f"table of {block.name!r} has {len(seen)} row(s), expected {n_expected}", block.line
        )
    return table


def parse_diagram(text: str) -> InfluenceDiagram:
    """Parse the text format into a diagram.

    Raises :class:`DiagramParseError` for anything that prevents assembly
    (syntax, unknown references, missing or duplicate rows).  Numeric and
    graph-level problems are left to ``validate_diagram``.
    """
    headers, blocks = _Parser(text).parse()
    if headers.get("format_version") != str(FORMAT_VERSION):
        raise DiagramParseError(
            f"missing or unsupported format_version (expected {FORMAT_VERSION}, got {headers.get('format_version')!r})"
        )
    name = headers.get("name", "diagram")

    names = [b.name for b in blocks]
    for i, n in enumerate(names):
        if n in names[:i]:
            raise DiagramParseError(f"duplicate node name {n!r}")

    value_blocks = [b for b in blocks if b.kind == "value"]
    if len(value_blocks) != 1:
        raise DiagramParseError(f"expected exactly one value node, found {len(value_blocks)}")

    variables: dict[str, Variable] = {}
    for b in blocks:
        if b.kind == "value":
            if b.domain is not None:
                raise DiagramParseError(f"value node {b.name!r} must not declare a domain", b.line)
            continue
        if b.domain is None:
            raise DiagramParseError(f"{b.kind} node {b.name!r} is missing its domain", b.line)
        try:
            variables[b.name] = Variable(b.name, tuple(b.domain))
        except DiagramError as e:
            raise DiagramParseError(str(e), b.line) from None

    def _resolve_parents(b: _Block) -> list[Variable]:
        out = []
        for p in b.parents or []:
            if p not in variables:
                raise DiagramParseError(f"node {b.name!r} references unknown parent {p!r}", b.line)
            out.append(variables[p])
        return out

    chance_nodes: list[ChanceNode] = []
    decision_nodes: list[DecisionNode] = []
    value_node: ValueNode | None = None
    for b in blocks:
        parents = _resolve_parents(b)
        parent_names = tuple(p.name for p in parents)
        if b.kind == "chance":
            if not b.has_table:
                raise DiagramParseError(f"chance node {b.name!r} is missing its table", b.line)
            cpt = _build_table(b, parents, variables[b.name].size)
            chance_nodes.append(ChanceNode(variables[b.name], parent_names, cpt))
        elif b.kind == "decision":
            if b.has_table:
                raise DiagramParseError(f"decision node {b.name!r} must not carry a table", b.line)
            decision_nodes.append(DecisionNode(variables[b.name], parent_names))
        else:
            if not b.has_table:
                raise DiagramParseError(f"value node {b.name!r} is missing its table", b.line)
            values = _build_table(b, parents, 1)[..., 0]
            value_node = ValueNode(b.name, parent_names, values)

    assert value_node is not None
    return InfluenceDiagram(chance_nodes, decision_nodes, value_node, name=name)


def _fmt_row(labels: Sequence[str], numbers: Sequence[float]) -> str:
    key = " ".join(labels)
    vals = " ".join(repr(float(x)) for x in numbers)
    return f"    {key} : {vals}" if key else f"    : {vals}"


def _emit_table(out: list[str], parents: Sequence[Variable], table: np.ndarray, width: int) -> None:
    out.append("  table:")
    sizes = tuple(v.size for v in parents)
    for idx in iter_assignments(sizes):
        labels = [v.domain[i] for v, i in zip(parents, idx)]
        row = table[idx] if width > 1 else [table[idx]]
        out.append(_fmt_row(labels, np.atleast_1d(row)))


def serialize_diagram(diagram: InfluenceDiagram, header_comments: Sequence[str] = ()) -> str:
    """Render a diagram in canonical form (chance, then decision, then value
    blocks, rows in row-major parent order, shortest round-trip reals)."""
    out: list[str] = [f"# {c}" for c in header_comments]
    out.append(f"name: {diagram.name}")
    out.append(f"format_version: {FORMAT_VERSION}")
    for c in diagram.chance_nodes:
        out.append("")
        out.append(f"chance {c.name} {{")
        out.append("  domain: " + " ".join(c.variable.domain))
        out.append("  parents: " + " ".join(c.parents))
        _emit_table(out, [diagram.variables[p] for p in c.parents], c.cpt, c.variable.size)
        out.append("}")
    for d in diagram.decision_nodes:
        out.append("")
        out.append(f"decision {d.name} {{")
        out.append("  domain: " + " ".join(d.variable.domain))
        out.append("  parents: " + " ".join(d.info_predecessors))
        out.append("}")
    v = diagram.value_node
    out.append("")
    out.append(f"value {v.name} {{")
    out.append("  parents: " + " ".join(v.parents))
    _emit_table(out, [diagram.variables[p] for p in v.parents], v.values, 1)
    out.append("}")
    out.append("")
    return "\n".join(out)


def diagrams_equal(a: InfluenceDiagram, b: InfluenceDiagram) -> bool:
    """Structural equality: same nodes in the same order with identical tables."""
    if a.name != b.name or len(a.chance_nodes) != len(b.chance_nodes):
        return False
    if len(a.decision_nodes) != len(b.decision_nodes):
        return False
    for ca, cb in zip(a.chance_nodes, b.chance_nodes):
        if ca.variable != cb.variable or ca.parents != cb.parents:
            return False
        if not np.array_equal(ca.cpt, cb.cpt):
            return False
    for da, db in zip(a.decision_nodes, b.decision_nodes):
        if da != db:
            return False
    va, vb = a.value_node, b.value_node
    return va.name == vb.name and va.parents == vb.parents and np.array_equal(va.values, vb.values)
