"""Increasing semilinear functions on N^2 in grid-affine and min-of-fissures form.

Two spec shapes are supported:

* :class:`GridAffineSpec` -- affine pieces whose domains are points, one-way
  lines, or periodic grids; together they partition N^2.
* :class:`MinOfFissuresSpec` -- the minimum of several complete fissure
  functions, each a partition of N^2 into periodic grids carrying one
  :class:`PartialFissureSpec`.

All evaluation is exact (``fractions.Fraction``); no floats are involved.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Iterator, Sequence, Union

Point = tuple[int, int]


class SpecError(ValueError):
    """Raised for malformed spec documents and failed evaluations."""


class DomainError(SpecError):
    pass


class IntegralityError(SpecError):
    pass


class CoverError(SpecError):
    pass


def as_rational(value: Any) -> Fraction:
    """Parse ``3``, ``"3"``, ``"-1/2"`` into an exact rational.

    Floats are refused: a spec must never carry binary rounding error.
    """
    if isinstance(value, bool):
        raise SpecError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, _, den = text.partition("/")
            try:
                n, d = int(num), int(den)
            except ValueError:
                raise SpecError(f"malformed rational {value!r}") from None
            if d <= 0:
                raise SpecError(f"malformed rational {value!r}: denominator must be positive")
            return Fraction(n, d)
        try:
            return Fraction(int(text))
        except ValueError:
            raise SpecError(f"malformed rational {value!r}") from None
    raise SpecError(f"not a rational: {value!r}")


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _is_natural(q: Fraction) -> bool:
    return q.denominator == 1 and q >= 0


# -- grids -------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    """The set ``{(p*a1 + o1, q*a2 + o2) : a1, a2 in N}``."""

    p: int
    q: int
    offset: Point = (0, 0)

    def __post_init__(self) -> None:
        if self.p < 0 or self.q < 0 or min(self.offset) < 0:
            raise SpecError(f"grid parameters must be naturals: {self}")
        if self.p > 0 and self.q > 0 and self.p != self.q:
            raise SpecError(f"two-way grid needs p == q, got p={self.p} q={self.q}")
        object.__setattr__(self, "offset", (int(self.offset[0]), int(self.offset[1])))

    @property
    def dimension(self) -> int:
        return (self.p > 0) + (self.q > 0)

    @property
    def is_point(self) -> bool:
        return self.dimension == 0

    @property
    def is_line(self) -> bool:
        return self.dimension == 1

    @property
    def is_two_way(self) -> bool:
        return self.dimension == 2

    @property
    def period(self) -> int:
        return max(self.p, self.q)

    def points(self, box: Point) -> Iterator[Point]:
        """Grid points inside ``[0, box[0]] x [0, box[1]]``."""
        o1, o2 = self.offset
        xs = range(o1, box[0] + 1, self.p) if self.p else ([o1] if o1 <= box[0] else [])
        ys = range(o2, box[1] + 1, self.q) if self.q else ([o2] if o2 <= box[1] else [])
        for x in xs:
            for y in ys:
                yield (x, y)


def grid_member(g: Grid, n: Sequence[int]) -> bool:
    for coord, period, off in ((n[0], g.p, g.offset[0]), (n[1], g.q, g.offset[1])):
        if period == 0:
            if coord != off:
                return False
        elif coord < off or (coord - off) % period:
            return False
    return True


def _ceil_coord(x: int, period: int, off: int) -> int:
    if x <= off:
        return off
    return off + period * -(-(x - off) // period)


def grid_ceil(g: Grid, n: Sequence[int]) -> Point:
    """Componentwise-smallest point of a two-way grid that dominates ``n``."""
    if not g.is_two_way:
        raise DomainError(f"grid_ceil needs a two-way-infinite grid, got {g}")
    return (_ceil_coord(n[0], g.p, g.offset[0]), _ceil_coord(n[1], g.q, g.offset[1]))


def domain_ceil(g: Grid, n: Sequence[int]) -> Point | None:
    """Like :func:`grid_ceil` but for any grid; ``None`` when no grid point dominates ``n``."""
    out = []
    for x, period, off in ((n[0], g.p, g.offset[0]), (n[1], g.q, g.offset[1])):
        if period == 0:
            if x > off:
                return None
            out.append(off)
        else:
            out.append(_ceil_coord(x, period, off))
    return (out[0], out[1])


# -- affine pieces -----------------------------------------------------------


@dataclass(frozen=True)
class AffinePiece:
    a0: Fraction
    a1: Fraction
    a2: Fraction
    domain: Grid

    def __post_init__(self) -> None:
        for name in ("a0", "a1", "a2"):
            object.__setattr__(self, name, as_rational(getattr(self, name)))

    def raw(self, n: Sequence[int]) -> Fraction:
        return self.a1 * n[0] + self.a2 * n[1] + self.a0

    @property
    def slopes(self) -> tuple[Fraction, Fraction]:
        """Output increment per grid step along each axis (``a1*p``, ``a2*q``)."""
        return (self.a1 * self.domain.p, self.a2 * self.domain.q)


def eval_affine(piece: AffinePiece, n: Sequence[int]) -> int:
    if not grid_member(piece.domain, n):
        raise DomainError(f"{tuple(n)} is not on grid {piece.domain}")
    value = piece.raw(n)
    if not _is_natural(value):
        raise IntegralityError(f"affine value {value} at {tuple(n)} is not a natural")
    return int(value)


# -- partial fissures ----------------------------------------------------------


@dataclass(frozen=True)
class PartialFissureSpec:
    """One partial fissure function on a two-way grid.

    ``A`` and ``B`` are the coefficient triples ``(c0, c1, c2)`` of the two
    affine functions ``A`` and ``B``.  ``dips`` maps each fissure line
    index ``i`` (``-k < i < k``) to the amount the value drops below
    ``min(A, B)`` on that line; missing lines have dip 0.
    """

    grid: Grid
    A: tuple[Fraction, Fraction, Fraction]
    B: tuple[Fraction, Fraction, Fraction]
    k: int
    dips: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "A", tuple(as_rational(c) for c in self.A))
        object.__setattr__(self, "B", tuple(as_rational(c) for c in self.B))
        object.__setattr__(self, "dips", {int(i): int(d) for i, d in dict(self.dips).items()})

    def __hash__(self) -> int:
        return hash((self.grid, self.A, self.B, self.k, tuple(sorted(self.dips.items()))))

    def above(self, n: Sequence[Fraction | int]) -> Fraction:
        return self.A[0] + self.A[1] * n[0] + self.A[2] * n[1]

    def below(self, n: Sequence[Fraction | int]) -> Fraction:
        return self.B[0] + self.B[1] * n[0] + self.B[2] * n[1]

    def dip(self, i: int) -> int:
        """Extended dip table: zero outside ``-k < i < k``."""
        if -self.k < i < self.k:
            return self.dips.get(i, 0)
        return 0

    @property
    def d_max(self) -> int:
        return max([0, *(self.dip(i) for i in range(-self.k + 1, self.k))])

    def line_index(self, n: Sequence[Fraction | int]) -> Fraction:
        return self.above(n) - self.below(n)

    def value_from_z(self, z1: Fraction | int, z2: Fraction | int) -> Fraction:
        """``f(pre(z))``, where ``pre(z)`` is the input ``n`` with ``(A(n), B(n)) == z``.

        On the line ``A - B = i`` the value is ``min(A, B) - d_i``,
        which only depends on ``z`` and so is defined for every integer ``z``.
        """
        i = z1 - z2
        dip = self.dip(int(i)) if Fraction(i).denominator == 1 else 0
        return min(Fraction(z1), Fraction(z2)) - dip

    def raw(self, n: Sequence[int]) -> Fraction:
        return self.value_from_z(self.above(n), self.below(n))

    def preimage(self, z1: int, z2: int) -> tuple[Fraction, Fraction]:
        """The rational point ``n`` with ``(A(n), B(n)) == (z1, z2)``."""
        a0, a1, a2 = self.A
        b0, b1, b2 = self.B
        r1, r2 = z1 - a0, z2 - b0
        det = a1 * b2 - a2 * b1
        if det == 0:
            raise SpecError("A and B are not linearly independent")
        return ((r1 * b2 - a2 * r2) / det, (a1 * r2 - b1 * r1) / det)


def eval_partial_fissure(fs: PartialFissureSpec, n: Sequence[int]) -> int:
    """The four-case fissure value at a grid point ``n``."""
    if not grid_member(fs.grid, n):
        raise DomainError(f"{tuple(n)} is not on grid {fs.grid}")
    a, b = fs.above(n), fs.below(n)
    diff = a - b
    if diff <= -fs.k:
        value = a
    elif diff < 0:
        value = a - fs.dip(int(diff))
    elif diff < fs.k:
        value = b - fs.dip(int(diff))
    else:
        value = b
    if not _is_natural(value):
        raise IntegralityError(f"fissure value {value} at {tuple(n)} is not a natural")
    return int(value)


# -- whole functions -----------------------------------------------------------


@dataclass(frozen=True)
class GridAffineSpec:
    pieces: tuple[AffinePiece, ...]
    period: int

    kind = "grid_affine"

    def __post_init__(self) -> None:
        object.__setattr__(self, "pieces", tuple(self.pieces))

    def domains(self) -> list[Grid]:
        return [piece.domain for piece in self.pieces]


@dataclass(frozen=True)
class MinOfFissuresSpec:
    fissures: tuple[tuple[PartialFissureSpec, ...], ...]
    period: int

    kind = "min_of_fissures"

    def __post_init__(self) -> None:
        object.__setattr__(self, "fissures", tuple(tuple(f) for f in self.fissures))

    def partials(self) -> list[PartialFissureSpec]:
        return [fs for complete in self.fissures for fs in complete]


FunctionSpec = Union[GridAffineSpec, MinOfFissuresSpec]


def _find(items: Iterable, grid_of, n: Sequence[int]):
    for item in items:
        if grid_member(grid_of(item), n):
            return item
    raise CoverError(f"no piece contains {tuple(n)}")


def raw_value(spec: FunctionSpec, n: Sequence[int]) -> Fraction:
    """Exact value at ``n`` without the naturality check (used by the audits)."""
    if isinstance(spec, GridAffineSpec):
        return _find(spec.pieces, lambda p: p.domain, n).raw(n)
    values = [_find(complete, lambda f: f.grid, n).raw(n) for complete in spec.fissures]
    return min(values)


def eval(spec: FunctionSpec, n: Sequence[int]) -> int:  # noqa: A001 - mirrors the domain vocabulary
    if isinstance(spec, GridAffineSpec):
        return eval_affine(_find(spec.pieces, lambda p: p.domain, n), n)
    return min(eval_partial_fissure(_find(complete, lambda f: f.grid, n), n) for complete in spec.fissures)


evaluate = eval


# -- audits --------------------------------------------------------------------


def audit_box(spec: FunctionSpec) -> Point:
    """Box side used for cover / increasing audits: ``max(3p + largest offset, 8)``."""
    if isinstance(spec, GridAffineSpec):
        grids = spec.domains()
    else:
        grids = [fs.grid for fs in spec.partials()]
    largest = max([0, *(max(g.offset) for g in grids)])
    side = max(3 * spec.period + largest, 8)
    return (side, side)


def check_increasing(spec: FunctionSpec, box: Sequence[int]) -> list[tuple[Point, Point]]:
    """Adjacent pairs ``(n, n + e_i)`` in the box where the value decreases.

    Checking unit steps suffices: any ``n <= n'`` is joined by a monotone
    staircase of unit steps.  Points where the spec is not evaluable are
    skipped (``validate_spec`` reports those separately).
    """
    values: dict[Point, Fraction] = {}
    for x in range(box[0] + 1):
        for y in range(box[1] + 1):
            try:
                values[(x, y)] = raw_value(spec, (x, y))
            except CoverError:
                pass
    bad = []
    for (x, y), v in sorted(values.items()):
        for nxt in ((x + 1, y), (x, y + 1)):
            if nxt in values and values[nxt] < v:
                bad.append(((x, y), nxt))
    return bad


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    where: Any = None

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


def _check_cover(grids: list[Grid], box: Point, label: str) -> list[Diagnostic]:
    out = []
    for x in range(box[0] + 1):
        for y in range(box[1] + 1):
            owners = [i for i, g in enumerate(grids) if grid_member(g, (x, y))]
            if not owners:
                out.append(Diagnostic("cover-gap", f"{label}: no domain contains ({x},{y})", (x, y)))
            elif len(owners) > 1:
                out.append(Diagnostic(
                    "overlap", f"{label}: domains {owners} all contain ({x},{y})", (x, y)))
    return out


def _validate_piece(i: int, piece: AffinePiece, period: int) -> list[Diagnostic]:
    out = []
    g = piece.domain
    tag = f"piece {i}"
    for axis, step in ((1, g.p), (2, g.q)):
        if step and step != period:
            out.append(Diagnostic("period", f"{tag}: grid period {step} differs from spec period {period}", i))
    f_o = piece.raw(g.offset)
    if not _is_natural(f_o):
        out.append(Diagnostic("integrality", f"{tag}: value {f_o} at offset {g.offset} is not a natural", i))
    for axis, slope, step, coef in ((1, piece.slopes[0], g.p, piece.a1), (2, piece.slopes[1], g.q, piece.a2)):
        if step and not _is_natural(slope):
            out.append(Diagnostic(
                "integrality", f"{tag}: a{axis}*period = {slope} is not a natural", i))
        if step and coef < 0:
            out.append(Diagnostic("increasing", f"{tag}: a{axis} = {coef} is negative", i))
    return out


def _validate_fissure(tag: str, fs: PartialFissureSpec, period: int, box: Point) -> list[Diagnostic]:
    out = []
    g = fs.grid
    if not g.is_two_way:
        out.append(Diagnostic("grid", f"{tag}: fissure grid must be two-way-infinite, got {g}", tag))
    elif g.p != period:
        out.append(Diagnostic("period", f"{tag}: grid period {g.p} differs from spec period {period}", tag))
    if fs.k < 1:
        out.append(Diagnostic("width", f"{tag}: k must be >= 1, got {fs.k}", tag))
    for c, name in ((fs.A[0], "A0"), (fs.B[0], "B0")):
        if c.denominator != 1:
            out.append(Diagnostic("integrality", f"{tag}: {name} = {c} must be an integer", tag))
    for c, name in ((fs.A[1], "A1"), (fs.A[2], "A2"), (fs.B[1], "B1"), (fs.B[2], "B2")):
        if c < 0:
            out.append(Diagnostic("sign", f"{tag}: {name} = {c} must be nonnegative", tag))
        if g.period and not _is_natural(c * g.period):
            out.append(Diagnostic("integrality", f"{tag}: {name}*p = {c * g.period} is not a natural", tag))
    if not fs.A[1] > fs.B[1]:
        out.append(Diagnostic("orientation", f"{tag}: A1>B1 violated ({fs.A[1]} <= {fs.B[1]})", tag))
    if not fs.B[2] > fs.A[2]:
        out.append(Diagnostic("orientation", f"{tag}: B2>A2 violated ({fs.B[2]} <= {fs.A[2]})", tag))
    for i, d in sorted(fs.dips.items()):
        if not -fs.k < i < fs.k:
            out.append(Diagnostic("dips", f"{tag}: dip index {i} outside (-k, k)", tag))
        if d < 0:
            out.append(Diagnostic("dips", f"{tag}: dip d_{i} = {d} is negative", tag))
    if g.is_two_way:
        for n in g.points(box):
            for name, v in (("A", fs.above(n)), ("B", fs.below(n))):
                if not _is_natural(v):
                    out.append(Diagnostic("natural", f"{tag}: {name}{n} = {v} is not a natural", n))
    return out


def validate_spec(spec: FunctionSpec) -> list[Diagnostic]:
    """Every well-formedness problem found, as a list (empty means clean)."""
    out: list[Diagnostic] = []
    if spec.period < 1:
        return [Diagnostic("period", f"spec period must be positive, got {spec.period}")]
    box = audit_box(spec)
    if isinstance(spec, GridAffineSpec):
        if not spec.pieces:
            return [Diagnostic("empty", "grid-affine spec has no pieces")]
        for i, piece in enumerate(spec.pieces):
            out += _validate_piece(i, piece, spec.period)
        out += _check_cover(spec.domains(), box, "grid_affine")
    else:
        if not spec.fissures:
            return [Diagnostic("empty", "min-of-fissures spec has no fissure functions")]
        for j, complete in enumerate(spec.fissures):
            for i, fs in enumerate(complete):
                out += _validate_fissure(f"fissure {j}.{i}", fs, spec.period, box)
            out += _check_cover([fs.grid for fs in complete], box, f"fissure {j}")
    if out:
        return out
    for x in range(box[0] + 1):
        for y in range(box[1] + 1):
            try:
                eval(spec, (x, y))
            except SpecError as exc:
                out.append(Diagnostic("integrality", str(exc), (x, y)))
    for n, n2 in check_increasing(spec, box):
        out.append(Diagnostic("increasing", f"value drops from {n} to {n2}", (n, n2)))
    return out


# -- JSON ------------------------------------------------------------------------


def _grid_from_json(doc: dict) -> Grid:
    try:
        offset = doc.get("offset", [0, 0])
        return Grid(int(doc["p"]), int(doc["q"]), (int(offset[0]), int(offset[1])))
    except (KeyError, TypeError, IndexError) as exc:
        raise SpecError(f"malformed grid {doc!r}") from exc


def _grid_to_json(g: Grid) -> dict:
    return {"p": g.p, "q": g.q, "offset": list(g.offset)}


def _triple(doc: Any, what: str) -> tuple[Fraction, Fraction, Fraction]:
    if isinstance(doc, dict):
        doc = [doc.get(f"{what}0", 0), doc.get(f"{what}1", 0), doc.get(f"{what}2", 0)]
    if not isinstance(doc, list) or len(doc) != 3:
        raise SpecError(f"{what} must be a 3-element list, got {doc!r}")
    return tuple(as_rational(v) for v in doc)  # type: ignore[return-value]


def spec_from_dict(doc: dict) -> FunctionSpec:
    kind = doc.get("kind")
    period = int(doc.get("period", 1))
    if kind == "grid_affine":
        pieces = []
        for i, p in enumerate(doc.get("pieces", [])):
            try:
                pieces.append(AffinePiece(
                    as_rational(p.get("a0", 0)), as_rational(p.get("a1", 0)),
                    as_rational(p.get("a2", 0)), _grid_from_json(p["grid"])))
            except SpecError as exc:
                raise SpecError(f"pieces[{i}]: {exc}") from None
            except KeyError:
                raise SpecError(f"pieces[{i}]: missing 'grid'") from None
        return GridAffineSpec(tuple(pieces), period)
    if kind == "min_of_fissures":
        fissures = []
        for j, complete in enumerate(doc.get("fissures", [])):
            parts = []
            for i, f in enumerate(complete):
                where = f"fissures[{j}][{i}]"
                try:
                    dips = {int(key): int(v) for key, v in f.get("dips", {}).items()}
                    parts.append(PartialFissureSpec(
                        _grid_from_json(f["grid"]), _triple(f["A"], "A"), _triple(f["B"], "B"),
                        int(f["k"]), dips))
                except SpecError as exc:
                    raise SpecError(f"{where}: {exc}") from None
                except (KeyError, ValueError, TypeError, AttributeError) as exc:
                    raise SpecError(f"{where}: malformed partial fissure ({exc})") from None
            fissures.append(tuple(parts))
        return MinOfFissuresSpec(tuple(fissures), period)
    raise SpecError(f"unknown spec kind {kind!r}")


def _json_rational(q: Fraction) -> int | str:
    return int(q) if q.denominator == 1 else format_rational(q)


def spec_to_dict(spec: FunctionSpec) -> dict:
    if isinstance(spec, GridAffineSpec):
        return {
            "kind": "grid_affine",
            "period": spec.period,
            "pieces": [
                {"a0": _json_rational(p.a0), "a1": _json_rational(p.a1), "a2": _json_rational(p.a2),
                 "grid": _grid_to_json(p.domain)}
                for p in spec.pieces
            ],
        }
    return {
        "kind": "min_of_fissures",
        "period": spec.period,
        "fissures": [
            [
                {"grid": _grid_to_json(fs.grid),
                 "A": [_json_rational(c) for c in fs.A],
                 "B": [_json_rational(c) for c in fs.B],
                 "k": fs.k,
                 "dips": {str(i): d for i, d in sorted(fs.dips.items())}}
                for fs in complete
            ]
            for complete in spec.fissures
        ],
    }


def load_spec(path) -> FunctionSpec:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return spec_from_dict(doc)


def dump_spec(spec: FunctionSpec, path) -> None:
    with open(path, "w") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2)
        fh.write("\n")

