"""Discrete chemical reaction networks with exact molecule counts."""

from __future__ import annotations

import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Sequence

SPECIES_RE = re.compile(r"[A-Za-z][A-Za-z0-9_.]*\Z")


class CrnError(ValueError):
    pass


class NotApplicableError(CrnError):
    pass


def _frozen_counts(
    counts: Mapping[str, int] | Iterable[tuple[str, int]], ordered: bool = False
) -> Mapping[str, int]:
    items = counts.items() if isinstance(counts, Mapping) else counts
    clean: dict[str, int] = {}
    for sp, c in items:
        if not isinstance(c, int) or isinstance(c, bool) or c < 0:
            raise CrnError(f"count of {sp!r} must be a natural, got {c!r}")
        if c:
            clean[sp] = clean.get(sp, 0) + c
    return MappingProxyType(dict(sorted(clean.items())) if ordered else clean)


class Configuration(Mapping):
    """Immutable species -> count map.  Only nonzero counts are stored."""

    __slots__ = ("_counts", "_key")

    def __init__(self, counts: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        self._counts = _frozen_counts(counts, ordered=True)
        self._key = tuple(self._counts.items())

    def __getitem__(self, species: str) -> int:
        return self._counts[species]

    def get(self, species: str, default: int = 0) -> int:
        return self._counts.get(species, default)

    def __iter__(self) -> Iterator[str]:
        return iter(self._counts)

    def __len__(self) -> int:
        return len(self._counts)

    def __hash__(self) -> int:
        return hash(self._key)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Configuration):
            return self._key == other._key
        if isinstance(other, Mapping):
            return self._key == Configuration(other)._key
        return NotImplemented

    def __repr__(self) -> str:
        inner = ", ".join(f"{s}: {c}" for s, c in self._key)
        return f"Configuration({{{inner}}})"

    def __str__(self) -> str:
        return "{" + ", ".join(f"{s}:{c}" for s, c in self._key) + "}"

    def __reduce__(self):
        return (Configuration, (self._key,))

    @property
    def key(self) -> tuple[tuple[str, int], ...]:
        """Canonical sorted ``(species, count)`` sequence."""
        return self._key


@dataclass(frozen=True)
class Reaction:
    reactants: Mapping[str, int]
    products: Mapping[str, int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "reactants", _frozen_counts(self.reactants))
        object.__setattr__(self, "products", _frozen_counts(self.products))

    def __hash__(self) -> int:
        return hash((frozenset(self.reactants.items()), frozenset(self.products.items())))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Reaction):
            return NotImplemented
        return dict(self.reactants) == dict(other.reactants) and dict(self.products) == dict(other.products)

    def __reduce__(self):
        return (Reaction, (dict(self.reactants), dict(self.products)))

    @classmethod
    def parse(cls, text: str) -> "Reaction":
        from .crnfile import parse_reaction

        return parse_reaction(text)

    @property
    def species(self) -> set[str]:
        return set(self.reactants) | set(self.products)

    def net(self, species: str) -> int:
        return self.products.get(species, 0) - self.reactants.get(species, 0)

    def is_trivial(self) -> bool:
        return dict(self.reactants) == dict(self.products)

    def __str__(self) -> str:
        from .crnfile import format_reaction

        return format_reaction(self)


@dataclass(frozen=True)
class Crn:
    """A CRN computing ``f: N^k -> N`` (k <= 2) with a leader.

    ``species`` keeps declaration order; it is what gets serialized, so a
    round trip through the text format reproduces the same value.
    """

    species: tuple[str, ...]
    reactions: tuple[Reaction, ...]
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    leader: str

    def __post_init__(self) -> None:
        for name in ("species", "reactions", "inputs", "outputs"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    @classmethod
    def build(
        cls,
        reactions: Iterable[Reaction | str],
        inputs: Sequence[str] = ("X1", "X2"),
        outputs: Sequence[str] = ("Y",),
        leader: str = "L",
        species: Sequence[str] | None = None,
    ) -> "Crn":
        rxns = tuple(Reaction.parse(r) if isinstance(r, str) else r for r in reactions)
        if species is None:
            seen: dict[str, None] = {}
            for sp in (leader, *inputs, *outputs):
                seen.setdefault(sp, None)
            for r in rxns:
                for sp in (*r.reactants, *r.products):
                    seen.setdefault(sp, None)
            species = tuple(seen)
        return cls(tuple(species), rxns, tuple(inputs), tuple(outputs), leader)

    def reaction_index(self, reaction: Reaction) -> int:
        return self.reactions.index(reaction)


def initial_configuration(crn: Crn, n: Sequence[int]) -> Configuration:
    if len(n) != len(crn.inputs):
        raise CrnError(f"expected {len(crn.inputs)} input counts, got {len(n)}")
    counts = {crn.leader: 1}
    for sp, c in zip(crn.inputs, n):
        counts[sp] = counts.get(sp, 0) + int(c)
    return Configuration(counts)


def is_applicable(c: Mapping[str, int], r: Reaction) -> bool:
    return all(c.get(sp, 0) >= k for sp, k in r.reactants.items())


def apply(c: Mapping[str, int], r: Reaction) -> Configuration:
    if not is_applicable(c, r):
        raise NotApplicableError(f"{r} is not applicable in {dict(c)}")
    counts = dict(c)
    for sp, k in r.reactants.items():
        counts[sp] -= k
    for sp, k in r.products.items():
        counts[sp] = counts.get(sp, 0) + k
    return Configuration(counts)


def applicable_reactions(crn: Crn, c: Mapping[str, int]) -> list[Reaction]:
    return [r for r in crn.reactions if is_applicable(c, r)]


@dataclass(frozen=True)
class Violation:
    reaction_index: int
    species: str
    message: str

    def __str__(self) -> str:
        return f"reaction {self.reaction_index}: {self.message}"


def check_output_oblivious(crn: Crn) -> list[Violation]:
    """Reactions that use an output species as a reactant, catalysts included."""
    out = []
    for i, r in enumerate(crn.reactions):
        for y in crn.outputs:
            if r.reactants.get(y, 0):
                kind = "catalyst" if r.products.get(y, 0) else "reactant"
                out.append(Violation(i, y, f"output {y} is a {kind} in {r}"))
    return out


def validate_crn(crn: Crn) -> list[Violation]:
    out: list[Violation] = []
    declared = set(crn.species)
    if len(declared) != len(crn.species):
        dupes = sorted({s for s in crn.species if crn.species.count(s) > 1})
        out += [Violation(-1, s, f"species {s} declared more than once") for s in dupes]
    for s in crn.species:
        if not SPECIES_RE.match(s):
            out.append(Violation(-1, s, f"invalid species name {s!r}"))
    for role, names in (("input", crn.inputs), ("output", crn.outputs), ("leader", (crn.leader,))):
        for s in names:
            if s not in declared:
                out.append(Violation(-1, s, f"{role} species {s} is not declared"))
    if not 1 <= len(crn.inputs) <= 2:
        out.append(Violation(-1, "", f"expected 1 or 2 inputs, got {len(crn.inputs)}"))
    if len(crn.outputs) != 1:
        out.append(Violation(-1, "", f"expected exactly one output, got {len(crn.outputs)}"))
    if len(set(crn.inputs)) != len(crn.inputs):
        out.append(Violation(-1, "", "input species repeated"))
    if crn.leader in crn.inputs:
        out.append(Violation(-1, crn.leader, f"leader {crn.leader} is also an input"))
    for y in crn.outputs:
        if y in crn.inputs or y == crn.leader:
            out.append(Violation(-1, y, f"output {y} is also an input or the leader"))
    for i, r in enumerate(crn.reactions):
        if r.is_trivial():
            out.append(Violation(i, "", f"reactants equal products in {r}"))
        for s in sorted(r.species - declared):
            out.append(Violation(i, s, f"undeclared species {s} in {r}"))
    return out


@dataclass(frozen=True)
class Execution:
    """A run ``c0 -r0-> c1 -r1-> ... -> final``; steps hold ``(c_i, reaction index)``."""

    crn: Crn
    steps: tuple[tuple[Configuration, int], ...]
    final: Configuration
    seed: int
    quiescent: bool = True

    @property
    def configurations(self) -> list[Configuration]:
        return [c for c, _ in self.steps] + [self.final]

    @property
    def budget_exceeded(self) -> bool:
        return not self.quiescent

    def output(self, species: str | None = None) -> int:
        return self.final.get(species or self.crn.outputs[0], 0)

    def __len__(self) -> int:
        return len(self.steps)


# -- compiled form used by the explorer and the simulator ------------------------


@dataclass
class CompiledCrn:
    """Index-based view of a CRN.

    States are canonical tuples of ``(species index, count)`` pairs sorted by
    index, with zero counts omitted.  Species indices follow sorted species
    ids, so the tuple is the canonical sorted ``(species id, count)``
    sequence.  Each reaction is keyed on the reactant species that occurs in
    the fewest reactions; a state only needs to look at reactions keyed on
    species it actually holds.
    """

    crn: Crn
    names: list[str] = field(init=False)
    index: dict[str, int] = field(init=False)
    needs: list[tuple[tuple[int, int], ...]] = field(init=False)
    delta: list[tuple[tuple[int, int], ...]] = field(init=False)
    by_key: dict[int, list[int]] = field(init=False)
    always: list[int] = field(init=False)

    def __post_init__(self) -> None:
        crn = self.crn
        names = sorted(set(crn.species).union(*(r.species for r in crn.reactions)))
        self.names = names
        self.index = {s: i for i, s in enumerate(names)}
        usage: dict[int, int] = {}
        self.needs, self.delta = [], []
        for r in crn.reactions:
            need = tuple(sorted((self.index[s], k) for s, k in r.reactants.items()))
            d = {}
            for s in r.species:
                if r.net(s):
                    d[self.index[s]] = r.net(s)
            self.needs.append(need)
            self.delta.append(tuple(sorted(d.items())))
            for i, _ in need:
                usage[i] = usage.get(i, 0) + 1
        self.by_key, self.always = {}, []
        for ri, need in enumerate(self.needs):
            if not need:
                self.always.append(ri)
            else:
                key = min(need, key=lambda ik: (usage[ik[0]], ik[0]))[0]
                self.by_key.setdefault(key, []).append(ri)

    def encode(self, c: Mapping[str, int]) -> tuple[tuple[int, int], ...]:
        return tuple(sorted((self.index[s], k) for s, k in c.items() if k))

    def decode(self, state: tuple[tuple[int, int], ...]) -> Configuration:
        names = self.names
        return Configuration((names[i], k) for i, k in state)

    def applicable(self, state: tuple[tuple[int, int], ...]) -> list[int]:
        counts = dict(state)
        cands = list(self.always)
        by_key = self.by_key
        for i, _ in state:
            lst = by_key.get(i)
            if lst:
                cands.extend(lst)
        needs = self.needs
        out = []
        for ri in cands:
            for i, k in needs[ri]:
                if counts.get(i, 0) < k:
                    break
            else:
                out.append(ri)
        out.sort()
        return out

    def fire(self, state: tuple[tuple[int, int], ...], ri: int) -> tuple[tuple[int, int], ...]:
        counts = dict(state)
        for i, d in self.delta[ri]:
            v = counts.get(i, 0) + d
            if v:
                counts[i] = v
            else:
                del counts[i]
        return tuple(sorted(counts.items()))

    def successors(self, state):
        return [(ri, self.fire(state, ri)) for ri in self.applicable(state)]

    def count(self, state, species: str) -> int:
        i = self.index.get(species)
        if i is None:
            return 0
        for j, k in state:
            if j == i:
                return k
        return 0
