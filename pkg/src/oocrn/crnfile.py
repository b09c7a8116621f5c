"""The ``.crn`` text format.

Grammar (one item per line, ``#`` starts a comment)::

    line     := pragma | reaction | <blank>
    pragma   := "@input" NAME{1,2} | "@output" NAME | "@leader" NAME | "@species" NAME*
    reaction := side "->" side
    side     := "0" | term ("+" term)*
    term     := [COEFF] NAME            COEFF := [1-9][0-9]*
    NAME     := [A-Za-z][A-Za-z0-9_.]*

A coefficient of 1 is omitted when writing.  Without an ``@species`` line the
species set is inferred from pragmas and reactions, in order of appearance.
"""

from __future__ import annotations

import re
from typing import Iterable

from .crn import Crn, CrnError, Reaction

_TERM = re.compile(r"\s*(?:([0-9]+)\s*)?([A-Za-z][A-Za-z0-9_.]*)\s*\Z")


class CrnParseError(CrnError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        where = f"{path or '<crn>'}:{line}: " if line is not None else ""
        super().__init__(where + message)


def _parse_side(text: str) -> dict[str, int]:
    text = text.strip()
    if text == "0" or text == "":
        if text == "":
            raise CrnParseError("empty reaction side (write 0 for no species)")
        return {}
    counts: dict[str, int] = {}
    for raw in text.split("+"):
        m = _TERM.match(raw)
        if not m:
            raise CrnParseError(f"malformed term {raw.strip()!r}")
        coeff = int(m.group(1)) if m.group(1) else 1
        if coeff == 0:
            raise CrnParseError(f"zero coefficient in {raw.strip()!r}")
        counts[m.group(2)] = counts.get(m.group(2), 0) + coeff
    return counts


def parse_reaction(text: str) -> Reaction:
    if text.count("->") != 1:
        raise CrnParseError(f"reaction needs exactly one '->': {text!r}")
    lhs, rhs = text.split("->")
    return Reaction(_parse_side(lhs), _parse_side(rhs))


def _format_side(counts) -> str:
    if not counts:
        return "0"
    return " + ".join(name if k == 1 else f"{k} {name}" for name, k in counts.items())


def format_reaction(r: Reaction) -> str:
    return f"{_format_side(r.reactants)} -> {_format_side(r.products)}"


def parse_crn(text: str, path: str | None = None) -> Crn:
    reactions: list[Reaction] = []
    inputs: list[str] | None = None
    outputs: list[str] | None = None
    leader: str | None = None
    declared: list[str] | None = None
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        try:
            if body.startswith("@"):
                word, *names = body.split()
                for name in names:
                    if not _TERM.match(name) or name[0].isdigit():
                        raise CrnParseError(f"invalid species name {name!r}")
                if word == "@input":
                    if not 1 <= len(names) <= 2:
                        raise CrnParseError("@input takes one or two species")
                    inputs = names
                elif word == "@output":
                    if len(names) != 1:
                        raise CrnParseError("@output takes exactly one species")
                    outputs = names
                elif word == "@leader":
                    if len(names) != 1:
                        raise CrnParseError("@leader takes exactly one species")
                    leader = names[0]
                elif word == "@species":
                    declared = (declared or []) + names
                else:
                    raise CrnParseError(f"unknown pragma {word}")
            else:
                reactions.append(parse_reaction(body))
        except CrnParseError as exc:
            raise CrnParseError(str(exc), lineno, path) from None
    for name, value in (("@input", inputs), ("@output", outputs), ("@leader", leader)):
        if value is None:
            raise CrnParseError(f"missing {name} pragma", None, path)
    return Crn.build(reactions, inputs, outputs, leader, species=declared)


def serialize_crn(crn: Crn, header: Iterable[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    lines.append("@input " + " ".join(crn.inputs))
    lines.append("@output " + " ".join(crn.outputs))
    lines.append(f"@leader {crn.leader}")
    lines.append("@species " + " ".join(crn.species))
    lines += [format_reaction(r) for r in crn.reactions]
    return "\n".join(lines) + "\n"


def load_crn(path) -> Crn:
    with open(path) as fh:
        return parse_crn(fh.read(), str(path))


def dump_crn(crn: Crn, path, header: Iterable[str] = ()) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_crn(crn, header))
