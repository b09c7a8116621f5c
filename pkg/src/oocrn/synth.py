"""Compile grid-affine and min-of-fissure specs into output-oblivious CRNs.

Building blocks:

* :func:`synth_affine_on_grid` -- the three-reaction leader-catalysed emitter
  for one affine piece on one grid.
* :func:`synth_partial_fissure` -- the deficit-tracking state machine for one
  partial fissure function.
* :func:`synth_ceil_adapter` / :func:`synth_fanout` / :func:`synth_min` --
  the stitching layer that runs one branch per domain on the componentwise
  grid ceiling of the input and takes the minimum of the branch outputs.

:func:`synth` assembles the whole pipeline.  By default the per-branch
counters are run as one synchronous product automaton (``stitching="sync"``):
a single distributor molecule consumes each input copy once and advances
every branch counter in the same reaction.  ``stitching="async"`` builds the
literal fan-out (``X_i -> X_i.b1 + ... + X_i.bm``) with one independent
counter per branch; it computes the same function but its reachable state
space grows like a product over branches, which rules out exhaustive
verification beyond tiny boxes.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from . import funcspec
from .crn import Crn, Reaction, check_output_oblivious
from .funcspec import AffinePiece, Grid, GridAffineSpec, MinOfFissuresSpec, PartialFissureSpec


class SynthError(ValueError):
    pass


class RangeError(SynthError):
    pass


def _nat(q: Fraction, what: str) -> int:
    if q.denominator != 1 or q < 0:
        raise funcspec.IntegralityError(f"{what} = {q} is not a natural")
    return int(q)


def _num(v: int) -> str:
    return f"m{-v}" if v < 0 else str(v)


def _merge(*fragments: Crn, inputs, outputs, leader) -> Crn:
    seen: dict[str, None] = {}
    for sp in (leader, *inputs, *outputs):
        seen.setdefault(sp, None)
    reactions = []
    for frag in fragments:
        for sp in frag.species:
            seen.setdefault(sp, None)
        reactions.extend(frag.reactions)
    return Crn(tuple(seen), tuple(reactions), tuple(inputs), tuple(outputs), leader)


def _rxn(reactants: dict[str, int], products: dict[str, int]) -> Reaction:
    return Reaction({s: k for s, k in reactants.items() if k}, {s: k for s, k in products.items() if k})


def _add(counts: dict[str, int], species: str, k: int) -> dict[str, int]:
    if k:
        counts[species] = counts.get(species, 0) + k
    return counts


# -- leader-catalysed affine emitter ---------------------------------------------------


def synth_affine_on_grid(
    piece: AffinePiece, x1: str = "X1", x2: str = "X2", y: str = "Y", leader: str = "L", primed: str = "Lp"
) -> Crn:
    """Leader-catalysed emitter computing ``piece`` on inputs that lie on its grid."""
    g = piece.domain
    o1, o2 = g.offset
    base = _nat(piece.raw(g.offset), f"value at offset {g.offset}")
    reactions = [_rxn(_add(_add({leader: 1}, x1, o1), x2, o2), _add({primed: 1}, y, base))]
    for x, step, slope in ((x1, g.p, piece.slopes[0]), (x2, g.q, piece.slopes[1])):
        if step:
            emit = _nat(slope, f"per-step increment along {x}")
            if emit:
                reactions.append(_rxn({primed: 1, x: step}, {primed: 1, y: emit}))
    return Crn.build(reactions, (x1, x2), (y,), leader)


# -- partial fissure state machine ------------------------------------------------


@dataclass
class FissureMeta:
    """Tables driving the fissure state machine ``st(xline, zline, d)``."""

    k: int
    d_max: int
    span: int
    modulus: int
    dips: dict[int, int]
    z1_delta: dict[int, int]
    z2_delta: dict[int, int]
    z1_catalyst: dict[tuple[int, int], int]
    z2_catalyst: dict[tuple[int, int], int]
    x_steps: tuple[int, int]
    base_state: tuple[int, int, int]
    names: dict[str, str]
    state_of: dict[str, tuple[int, int, int]] = field(default_factory=dict)
    z_consuming: frozenset = frozenset()
    dropped: int = 0

    @property
    def lz_range(self) -> range:
        return range(-self.span + 1, self.span)

    @property
    def d_range(self) -> range:
        return range(-self.d_max, 2 * self.d_max + 2)

    def reduce(self, i: int) -> int:
        """Representative of ``i mod (2*span-1)`` in ``[-span+1, span-1]``."""
        r = i % self.modulus
        return r - self.modulus if r > self.span - 1 else r

    def state_name(self, xline: int, zline: int, d: int) -> str:
        return f"st.{_num(xline)}.{_num(zline)}.{_num(d)}{self.names['suffix']}"

    def to_json(self) -> dict:
        return {
            "k": self.k, "d_max": self.d_max, "span": self.span, "modulus": self.modulus,
            "dips": {str(i): d for i, d in sorted(self.dips.items())},
            "z1_delta": {str(i): d for i, d in sorted(self.z1_delta.items())},
            "z2_delta": {str(i): d for i, d in sorted(self.z2_delta.items())},
            "z1_catalyst": {f"{xline},{zline}": r for (xline, zline), r in sorted(self.z1_catalyst.items())},
            "z2_catalyst": {f"{xline},{zline}": r for (xline, zline), r in sorted(self.z2_catalyst.items())},
            "x_steps": list(self.x_steps),
            "base_state": list(self.base_state),
            "states": len(self.state_of),
            "dropped_out_of_range": self.dropped,
        }


def fissure_meta(fs: PartialFissureSpec, suffix: str = "", x1: str = "X1", x2: str = "X2",
                 y: str = "Y", leader: str = "L") -> FissureMeta:
    k = fs.k
    d_max = fs.d_max
    # span = k + d_max; with no dips at all the boundary band still needs one line
    # on each side so that Z-consumption out of the fissure band stays in range.
    span = k + max(d_max, 1)
    modulus = 2 * span - 1
    dips = {i: fs.dip(i) for i in range(-span, span + 1)}
    z1_delta = {}
    z2_delta = {}
    for zline in range(-span + 1, span):
        # Consuming Z1 moves from line zline to zline+1; min(z1, z2) grows iff z1 < z2.
        z1_delta[zline] = dips[zline] - dips[zline + 1] + (1 if zline < 0 else 0)
        # Consuming Z2 moves from zline to zline-1; min(z1, z2) grows iff z2 < z1.
        z2_delta[zline] = dips[zline] - dips[zline - 1] + (1 if zline > 0 else 0)
    z1_catalyst, z2_catalyst = {}, {}
    for xline in range(-span + 1, span):
        for zline in range(-span + 1, span):
            if zline >= k:
                z1_catalyst[(xline, zline)] = (xline - zline) % modulus
            if zline <= -k:
                z2_catalyst[(xline, zline)] = (zline - xline) % modulus
    p = fs.grid.period
    step1 = fs.A[1] * p - fs.B[1] * p
    step2 = fs.A[2] * p - fs.B[2] * p
    if step1.denominator != 1 or step2.denominator != 1:
        raise funcspec.IntegralityError("per-step line shifts (A_i - B_i) * p must be integers")
    o = fs.grid.offset
    za = _nat(fs.above(o), f"A{o}")
    zb = _nat(fs.below(o), f"B{o}")
    base_line = za - zb
    if not -span < base_line < span:
        raise RangeError(
            f"base line A(o) - B(o) = {base_line} lies outside [-{span - 1}, {span - 1}]")
    d0 = min(za, zb) - fs.dip(base_line)
    names = {"x1": x1, "x2": x2, "y": y, "leader": leader, "primed": f"Lp{suffix}" if suffix else "Lp",
             "z1": f"Z1{suffix}", "z2": f"Z2{suffix}", "suffix": suffix}
    meta = FissureMeta(k, d_max, span, modulus, dips, z1_delta, z2_delta, z1_catalyst, z2_catalyst,
                       (int(step1), int(step2)), (0, base_line, d0), names)
    meta.base_state = (meta.reduce(base_line), base_line, d0)
    return meta


def _fissure_transitions(meta: FissureMeta, st: tuple[int, int, int]):
    """Yield ``(family, catalyst/consumed dict, target state, Y emitted, Z delta)``."""
    xline, zline, d = st
    span, k, d_max = meta.span, meta.k, meta.d_max
    yield "x1", meta.reduce(xline + meta.x_steps[0]), zline, d
    yield "x2", meta.reduce(xline + meta.x_steps[1]), zline, d
    if -span < zline < k and d <= d_max:
        yield "z1", xline, zline + 1, d + meta.z1_delta[zline]
    if -k < zline < span and d <= d_max:
        yield "z2", xline, zline - 1, d + meta.z2_delta[zline]
    if d > d_max:
        yield "overflow", xline, zline, d_max
    if d > 0 and -k < xline == zline < k:
        yield "clear_line", xline, zline, 0
    if d > 0 and zline >= k:
        yield "clear_lower", xline, zline, 0
    if d > 0 and zline <= -k:
        yield "clear_upper", xline, zline, 0


def synth_partial_fissure(
    fs: PartialFissureSpec, suffix: str = "", x1: str = "X1", x2: str = "X2", y: str = "Y",
    leader: str = "L", meta: FissureMeta | None = None,
) -> "SynthReport":
    """State-machine CRN for one partial fissure function.

    Inputs are absolute counts on the fissure's grid: the base reaction takes
    the grid offset, every later X-consuming reaction takes one period's worth.
    Only states reachable from the base state through in-range transitions are
    emitted; transitions that would leave the tracked ranges are dropped and
    counted in ``meta.dropped``.  Passing ``meta`` (from :func:`fissure_meta`)
    builds the machine from those tables instead, e.g. to test a perturbed one.
    """
    meta = meta or fissure_meta(fs, suffix, x1, x2, y, leader)
    n = meta.names
    p = fs.grid.period
    o = fs.grid.offset
    za, zb = _nat(fs.above(o), "A(o)"), _nat(fs.below(o), "B(o)")
    inc = {
        "x1": (_nat(fs.A[1] * p, "A1*p"), _nat(fs.B[1] * p, "B1*p")),
        "x2": (_nat(fs.A[2] * p, "A2*p"), _nat(fs.B[2] * p, "B2*p")),
    }
    in_range = lambda s: s[1] in meta.lz_range and s[2] in meta.d_range  # noqa: E731

    states = {meta.base_state}
    queue = deque([meta.base_state])
    edges: list[tuple[str, tuple, tuple]] = []
    dropped = 0
    while queue:
        st = queue.popleft()
        for family, *target in _fissure_transitions(meta, st):
            target = tuple(target)
            if not in_range(target):
                dropped += 1
                continue
            edges.append((family, st, target))
            if target not in states:
                states.add(target)
                queue.append(target)
    meta.dropped = dropped
    name = meta.state_name

    by_family: dict[str, list[Reaction]] = {f: [] for f in (
        "z_producing", "z_consuming", "y_producing")}
    by_family["z_producing"].append(
        _rxn(_add(_add({leader: 1}, x1, o[0]), x2, o[1]), _add(_add({n["primed"]: 1}, n["z1"], za), n["z2"], zb)))
    by_family["z_consuming"].append(
        _rxn(_add(_add({n["primed"]: 1}, n["z1"], za), n["z2"], zb), {name(*meta.base_state): 1}))
    order = {"x1": 0, "x2": 1, "z1": 2, "z2": 3, "overflow": 4, "clear_line": 5, "clear_lower": 6,
             "clear_upper": 7}
    edges.sort(key=lambda e: (order[e[0]], e[1], e[2]))
    for family, st, tgt in edges:
        src, dst = name(*st), name(*tgt)
        xline, zline, d = st
        if family in ("x1", "x2"):
            a, b = inc[family]
            xs = x1 if family == "x1" else x2
            by_family["z_producing"].append(
                _rxn({src: 1, xs: p}, _add(_add({dst: 1}, n["z1"], a), n["z2"], b)))
        elif family == "z1":
            by_family["z_consuming"].append(_rxn({src: 1, n["z1"]: 1}, {dst: 1}))
        elif family == "z2":
            by_family["z_consuming"].append(_rxn({src: 1, n["z2"]: 1}, {dst: 1}))
        elif family == "overflow":
            by_family["y_producing"].append(_rxn({src: 1}, {dst: 1, y: d - meta.d_max}))
        elif family == "clear_line":
            by_family["y_producing"].append(_rxn({src: 1}, {dst: 1, y: d}))
        elif family == "clear_lower":
            r = meta.z1_catalyst[(xline, zline)]
            by_family["y_producing"].append(_rxn(_add({src: 1}, n["z1"], r), _add({dst: 1, y: d}, n["z1"], r)))
        else:
            r = meta.z2_catalyst[(xline, zline)]
            by_family["y_producing"].append(_rxn(_add({src: 1}, n["z2"], r), _add({dst: 1, y: d}, n["z2"], r)))

    meta.state_of = {name(*s): s for s in sorted(states)}
    meta.z_consuming = frozenset(r for r in by_family["z_consuming"][1:])
    species = [leader, x1, x2, y, n["primed"], n["z1"], n["z2"], *meta.state_of]
    reactions = [r for fam in ("z_producing", "z_consuming", "y_producing") for r in by_family[fam]]
    crn = Crn(tuple(species), tuple(reactions), (x1, x2), (y,), leader)
    return SynthReport(
        crn,
        species_families={"state": len(states), "z": 2, "leader": 2},
        reaction_families={f: len(v) for f, v in by_family.items()},
        fissure_meta=[meta],
    )


# -- stitching layer ------------------------------------------------------------------


@dataclass(frozen=True)
class DimCounter:
    """Per-axis input counter of one branch.

    Phase ``c`` is the number of copies consumed while ``c <= offset``, then
    cycles through ``offset+1 .. offset+period``.  ``step`` returns the next
    phase, how many grid steps the ceiling advanced (0 or 1), and whether the
    input has left a fixed (period-0) coordinate.
    """

    period: int
    offset: int

    def step(self, c: int) -> tuple[int, int, bool]:
        if c < self.offset:
            return c + 1, 0, False
        if self.period == 0:
            return c, 0, True
        if c == self.offset or c == self.offset + self.period:
            return self.offset + 1, 1, False
        return c + 1, 0, False


@dataclass
class Branch:
    """One stitched branch: a domain grid, what it emits, and its species names."""

    index: int
    grid: Grid
    kind: str  # "affine" or "fissure"
    base: dict[str, int]
    per_step: tuple[dict[str, int], dict[str, int]]
    output: str
    off: str
    fragment: Crn | None = None
    meta: FissureMeta | None = None
    info: dict[str, Any] = field(default_factory=dict)

    def counters(self) -> tuple[DimCounter, DimCounter]:
        g = self.grid
        return DimCounter(g.p, g.offset[0]), DimCounter(g.q, g.offset[1])


def _affine_branch(j: int, piece: AffinePiece) -> Branch:
    y = f"Y.b{j}"
    base = _nat(piece.raw(piece.domain.offset), f"piece {j} value at offset")
    s1 = _nat(piece.slopes[0], f"piece {j} a1*p") if piece.domain.p else 0
    s2 = _nat(piece.slopes[1], f"piece {j} a2*q") if piece.domain.q else 0
    return Branch(j, piece.domain, "affine", _add({}, y, base), (_add({}, y, s1), _add({}, y, s2)),
                  y, f"Off.b{j}", info={"a": [funcspec.format_rational(c) for c in (piece.a0, piece.a1, piece.a2)]})


def _fissure_branch(j: int, fs: PartialFissureSpec) -> Branch:
    suffix = f".b{j}"
    u1, u2, y, lead = f"U1{suffix}", f"U2{suffix}", f"Y{suffix}", f"L{suffix}"
    report = synth_partial_fissure(fs, suffix, u1, u2, y, lead)
    o, p = fs.grid.offset, fs.grid.period
    return Branch(j, fs.grid, "fissure", _add(_add({lead: 1}, u1, o[0]), u2, o[1]),
                  ({u1: p}, {u2: p}), y, f"Off{suffix}", report.crn, report.fissure_meta[0])


def synth_ceil_adapter(
    g: Grid, branch: int, slopes: Sequence[int], base: int, start: str | None = None,
    x1: str | None = None, x2: str | None = None, y: str | None = None,
) -> Crn:
    """Counter sub-CRN emitting ``f_j(ceil(x))`` for an affine branch on ``g``.

    ``slopes`` are the per-grid-step output increments ``(a1*p, a2*q)`` and
    ``base`` is ``f_j(offset)``.  The counter state ``C.b<j>.<c1>.<c2>``
    consumes branch-local inputs one at a time; the first copy consumed in
    each new period block emits that axis' slope.  On a point or line grid,
    consuming past a fixed coordinate turns the counter into ``Off.b<j>``,
    which lets the min cascade skip the branch.
    """
    b = Branch(branch, g, "affine", _add({}, y or f"Y.b{branch}", base),
               (_add({}, y or f"Y.b{branch}", slopes[0]), _add({}, y or f"Y.b{branch}", slopes[1])),
               y or f"Y.b{branch}", f"Off.b{branch}")
    return _async_adapter(b, start or f"L.b{branch}", x1 or f"X1.b{branch}", x2 or f"X2.b{branch}")


def _async_adapter(b: Branch, start: str, x1: str, x2: str) -> Crn:
    j = b.index
    cnt = lambda c1, c2: f"C.b{j}.{c1}.{c2}"  # noqa: E731
    dims = b.counters()
    reactions = [_rxn({start: 1}, {cnt(0, 0): 1, **b.base})]
    seen = {(0, 0)}
    queue = deque([(0, 0)])
    while queue:
        c = queue.popleft()
        for axis, x in ((0, x1), (1, x2)):
            nxt, stepped, off = dims[axis].step(c[axis])
            if off:
                reactions.append(_rxn({cnt(*c): 1, x: 1}, {b.off: 1}))
                continue
            new = (nxt, c[1]) if axis == 0 else (c[0], nxt)
            emit = dict(b.per_step[axis]) if stepped else {}
            reactions.append(_rxn({cnt(*c): 1, x: 1}, {cnt(*new): 1, **emit}))
            if new not in seen:
                seen.add(new)
                queue.append(new)
    return Crn.build(reactions, (x1, x2), (b.output,), start)


def synth_point_penalty(o: Sequence[int], value: int, c_max: int, branch: int = 1,
                        start: str | None = None) -> Crn:
    """Point-domain branch that overshoots linearly once the input passes ``o``.

    Emits ``value`` at start and ``c_max`` for every copy consumed beyond ``o``
    on either axis.  The branch dominates ``f`` off the point only if no unit
    step of ``f`` beyond ``o`` exceeds ``c_max``; :func:`synth` uses
    domain-exit bypass instead, which needs no such bound.
    """
    y, x1, x2 = f"Y.b{branch}", f"X1.b{branch}", f"X2.b{branch}"
    start = start or f"L.b{branch}"
    st = lambda c1, c2: f"P.b{branch}.{c1}.{c2}"  # noqa: E731
    reactions = [_rxn({start: 1}, _add({st(0, 0): 1}, y, value))]
    for c1 in range(o[0] + 1):
        for c2 in range(o[1] + 1):
            for axis, x in ((0, x1), (1, x2)):
                c = (c1, c2)[axis]
                if c < o[axis]:
                    new = (c1 + 1, c2) if axis == 0 else (c1, c2 + 1)
                    reactions.append(_rxn({st(c1, c2): 1, x: 1}, {st(*new): 1}))
                else:
                    reactions.append(_rxn({st(c1, c2): 1, x: 1}, _add({st(c1, c2): 1}, y, c_max)))
    return Crn.build(reactions, (x1, x2), (y,), start)


def synth_fanout(m: int, inputs: Sequence[str] = ("X1", "X2")) -> Crn:
    """``X_i -> X_i.b1 + ... + X_i.bm`` for each input."""
    if m < 1:
        raise SynthError("fan-out needs at least one branch")
    reactions = [_rxn({x: 1}, {f"{x}.b{j}": 1 for j in range(1, m + 1)}) for x in inputs]
    return Crn.build(reactions, tuple(inputs), (f"{inputs[0]}.b1",), leader=f"{inputs[0]}.b1",
                     species=[*inputs, *(f"{x}.b{j}" for x in inputs for j in range(1, m + 1))])


def synth_min(outputs: Sequence[str], final: str = "Y", bypass: dict[str, str] | None = None,
              leader: str = "L") -> Crn:
    """Left-fold cascade of binary min reactions ending at ``final``.

    ``Y.a + Y.b -> Y.m2``, ``Y.m2 + Y.c -> Y.m3``, ...  ``bypass`` maps a
    branch output (never the first) to a flag species; once the flag is
    present the accumulator passes through that stage unchanged, as if the
    branch output were unbounded.
    """
    if len(outputs) < 2:
        raise SynthError("min cascade needs at least two branch outputs")
    bypass = bypass or {}
    if outputs[0] in bypass:
        raise SynthError("the first cascade input cannot be bypassed")
    reactions = []
    acc = outputs[0]
    for stage, nxt in enumerate(outputs[1:], start=2):
        out = final if stage == len(outputs) else f"Y.m{stage}"
        reactions.append(_rxn({acc: 1, nxt: 1}, {out: 1}))
        if nxt in bypass:
            flag = bypass[nxt]
            reactions.append(_rxn({flag: 1, acc: 1}, {flag: 1, out: 1}))
        acc = out
    return Crn.build(reactions, tuple(outputs[:2]), (final,), leader=leader)


def _distributor(branches: list[Branch], leader: str, x1: str, x2: str) -> tuple[Crn, int]:
    """Synchronous product of all branch counters, driven by the real inputs."""
    dims = [b.counters() for b in branches]
    init = tuple((0, 0) for _ in branches)
    ids = {init: 0}
    queue = deque([init])
    reactions = []
    start_products: dict[str, int] = {"D.0": 1}
    for b in branches:
        for s, k in b.base.items():
            _add(start_products, s, k)
    reactions.append(_rxn({leader: 1}, start_products))
    while queue:
        state = queue.popleft()
        for axis, x in ((0, x1), (1, x2)):
            new, emit = [], {}
            for b, (d1, d2), c in zip(branches, dims, state):
                if c is None:
                    new.append(None)
                    continue
                nxt, stepped, off = (d1, d2)[axis].step(c[axis])
                if off:
                    new.append(None)
                    _add(emit, b.off, 1)
                    continue
                new.append((nxt, c[1]) if axis == 0 else (c[0], nxt))
                if stepped:
                    for s, k in b.per_step[axis].items():
                        _add(emit, s, k)
            new_state = tuple(new)
            if new_state not in ids:
                ids[new_state] = len(ids)
                queue.append(new_state)
            if new_state == state and not emit:
                continue
            reactions.append(_rxn({f"D.{ids[state]}": 1, x: 1}, {f"D.{ids[new_state]}": 1, **emit}))
    return Crn.build(reactions, (x1, x2), (branches[0].output,), leader), len(ids)


@dataclass
class SynthReport:
    crn: Crn
    species_families: dict[str, int] = field(default_factory=dict)
    reaction_families: dict[str, int] = field(default_factory=dict)
    fissure_meta: list[FissureMeta] = field(default_factory=list)
    branches: list[dict[str, Any]] = field(default_factory=list)
    stitching: str | None = None

    def to_json(self) -> dict:
        return {
            "species": len(self.crn.species),
            "reactions": len(self.crn.reactions),
            "species_families": self.species_families,
            "reaction_families": self.reaction_families,
            "stitching": self.stitching,
            "branches": self.branches,
            "fissures": [m.to_json() for m in self.fissure_meta],
            "output_oblivious": not check_output_oblivious(self.crn),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


def _single_branch(spec: funcspec.FunctionSpec) -> SynthReport | None:
    full = Grid(1, 1, (0, 0))
    if isinstance(spec, GridAffineSpec) and len(spec.pieces) == 1 and spec.pieces[0].domain == full:
        crn = synth_affine_on_grid(spec.pieces[0])
        return SynthReport(crn, {"leader": 2}, {"affine": len(crn.reactions)},
                           branches=[{"index": 1, "kind": "affine", "grid": [1, 1, [0, 0]]}])
    if isinstance(spec, MinOfFissuresSpec) and len(spec.partials()) == 1 and spec.partials()[0].grid == full:
        report = synth_partial_fissure(spec.partials()[0])
        report.branches = [{"index": 1, "kind": "fissure", "grid": [1, 1, [0, 0]]}]
        return report
    return None


def synth(spec: funcspec.FunctionSpec, stitching: str = "sync", check: bool = True) -> SynthReport:
    """Compile a validated spec into an output-oblivious CRN.

    A spec with a single domain covering N^2 compiles to its branch CRN
    alone; otherwise every piece (grid-affine) or partial fissure (min of
    fissures) becomes one branch running on the grid ceiling of the input,
    and a min cascade combines the branch outputs into ``Y``.
    """
    if stitching not in ("sync", "async"):
        raise SynthError(f"unknown stitching mode {stitching!r}")
    if check:
        problems = funcspec.validate_spec(spec)
        if problems:
            raise SynthError("spec does not validate: " + "; ".join(map(str, problems[:5])))
    single = _single_branch(spec)
    if single is not None:
        single.stitching = None
        return single

    if isinstance(spec, GridAffineSpec):
        branches = [_affine_branch(j, piece) for j, piece in enumerate(spec.pieces, 1)]
    else:
        branches = [_fissure_branch(j, fs) for j, fs in enumerate(spec.partials(), 1)]
    # The cascade starts from a branch that can never be switched off.
    order = sorted(branches, key=lambda b: (-b.grid.dimension, b.index))
    if order[0].grid.dimension != 2:
        raise SynthError("at least one domain must be a two-way-infinite grid")

    fragments: list[Crn] = []
    families: dict[str, int] = {}
    species_families: dict[str, int] = {}
    leader, x1, x2 = "L", "X1", "X2"
    if stitching == "sync":
        dist, n_states = _distributor(order, leader, x1, x2)
        fragments.append(dist)
        families["distributor"] = len(dist.reactions)
        species_families["distributor_states"] = n_states
    else:
        fan = synth_fanout(len(order), (x1, x2))
        rename = {f"{x}.b{i}": f"{x}.b{b.index}" for x in (x1, x2) for i, b in enumerate(order, 1)}
        fan_rxns = [Reaction(r.reactants, {rename[s]: k for s, k in r.products.items()}) for r in fan.reactions]
        fan_rxns.append(_rxn({leader: 1}, {f"S.b{b.index}": 1 for b in order}))
        fragments.append(Crn.build(fan_rxns, (x1, x2), ("Y",), leader))
        families["fanout"] = len(fan_rxns)
        for b in order:
            adapter = _async_adapter(b, f"S.b{b.index}", f"X1.b{b.index}", f"X2.b{b.index}")
            fragments.append(adapter)
            families["adapter"] = families.get("adapter", 0) + len(adapter.reactions)
    for b in order:
        if b.fragment is not None:
            fragments.append(b.fragment)
            families["fissure"] = families.get("fissure", 0) + len(b.fragment.reactions)
    outputs = [b.output for b in order]
    bypass = {b.output: b.off for b in order if b.grid.dimension < 2}
    cascade = synth_min(outputs, "Y", bypass, leader)
    fragments.append(cascade)
    families["min"] = len(cascade.reactions)
    crn = _merge(*fragments, inputs=(x1, x2), outputs=("Y",), leader=leader)
    species_families["branch_outputs"] = len(outputs)
    species_families["total"] = len(crn.species)
    report = SynthReport(
        crn, species_families, families,
        fissure_meta=[b.meta for b in order if b.meta is not None],
        branches=[{"index": b.index, "kind": b.kind, "grid": [b.grid.p, b.grid.q, list(b.grid.offset)],
                   "output": b.output, **b.info} for b in order],
        stitching=stitching,
    )
    violations = check_output_oblivious(crn)
    if violations:
        raise SynthError(f"internal error: synthesized CRN is not output-oblivious: {violations[0]}")
    return report
