"""Exhaustive and randomized checks of stable computation.

Stability is decided on the closed reachability graph: a configuration is
stable iff no edge reachable from it changes an output count.  That turns the
"for all reachable configurations" quantifier into two linear-time backward
searches, so no SCC decomposition is needed.
"""

from __future__ import annotations

import random
from array import array
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Iterable, Mapping, Sequence

from . import funcspec
from .crn import CompiledCrn, Configuration, Crn, CrnError, Execution, initial_configuration

if TYPE_CHECKING:
    from .synth import FissureMeta

DEFAULT_MAX_CONFIGS = 1_000_000
DEFAULT_RUNS = 100
DEFAULT_MAX_STEPS = 1_000_000

PASS, FAIL, INCONCLUSIVE = "PASS", "FAIL", "INCONCLUSIVE"


class NotClosedError(CrnError):
    pass


@dataclass
class ReachabilityGraph:
    """Breadth-first closure of the initial configuration.

    Nodes are numbered in discovery order (root is 0).  Edges are stored in
    three parallel arrays grouped by source; ``out_start[u]:out_start[u+1]``
    slices the out-edges of node ``u``.  ``parent``/``parent_rxn`` record the
    BFS tree and give shortest witness paths.
    """

    compiled: CompiledCrn
    states: list
    out_start: array
    edge_rxn: array
    edge_dst: array
    parent: array
    parent_rxn: array
    bounded: bool
    bound: int
    input: tuple[int, ...]

    @property
    def crn(self) -> Crn:
        return self.compiled.crn

    @property
    def root(self) -> Configuration:
        return self.compiled.decode(self.states[0])

    @property
    def nodes(self) -> set[Configuration]:
        return {self.compiled.decode(s) for s in self.states}

    def __len__(self) -> int:
        return len(self.states)

    @property
    def edge_count(self) -> int:
        return len(self.edge_dst)

    def edges(self) -> Iterable[tuple[Configuration, int, Configuration]]:
        decode = self.compiled.decode
        for u in range(len(self.out_start) - 1):
            for e in range(self.out_start[u], self.out_start[u + 1]):
                yield decode(self.states[u]), self.edge_rxn[e], decode(self.states[self.edge_dst[e]])

    def config(self, u: int) -> Configuration:
        return self.compiled.decode(self.states[u])

    def path_to(self, u: int) -> list[tuple[Configuration, int]]:
        """``(configuration, reaction index)`` steps from the root to node ``u``."""
        steps = []
        while u != 0:
            p = self.parent[u]
            steps.append((self.config(p), self.parent_rxn[u]))
            u = p
        steps.reverse()
        return steps

    def output_values(self, outputs: Sequence[str]) -> list:
        idx = [self.compiled.index.get(y) for y in outputs]
        if len(idx) == 1:
            i = idx[0]
            return [dict(s).get(i, 0) for s in self.states]
        return [tuple(dict(s).get(i, 0) for i in idx) for s in self.states]

    def predecessors(self) -> tuple[array, array]:
        """Reverse adjacency in CSR form: ``(in_start, in_src)``."""
        n = len(self.states)
        in_start = array("q", [0]) * (n + 1)
        for v in self.edge_dst:
            in_start[v + 1] += 1
        for i in range(n):
            in_start[i + 1] += in_start[i]
        fill = array("q", in_start)
        in_src = array("q", [0]) * len(self.edge_dst)
        out_start = self.out_start
        for u in range(len(out_start) - 1):
            for e in range(out_start[u], out_start[u + 1]):
                v = self.edge_dst[e]
                in_src[fill[v]] = u
                fill[v] += 1
        return in_start, in_src


def _start(compiled: CompiledCrn, n: Sequence[int], initial: Mapping[str, int] | None):
    if initial is None:
        return compiled.encode(initial_configuration(compiled.crn, n))
    unknown = set(initial) - set(compiled.index)
    if unknown:
        raise CrnError(f"initial configuration names unknown species {sorted(unknown)}")
    return compiled.encode(initial)


def explore(
    crn: Crn | CompiledCrn, n: Sequence[int], max_configs: int = DEFAULT_MAX_CONFIGS,
    initial: Mapping[str, int] | None = None,
) -> ReachabilityGraph:
    """BFS closure from the initial configuration of input ``n``.

    ``initial`` replaces the standard start (leader plus inputs), which is
    handy for checking a fragment on its own.
    """
    compiled = crn if isinstance(crn, CompiledCrn) else CompiledCrn(crn)
    root = _start(compiled, n, initial)
    states = [root]
    seen = {root: 0}
    out_start = array("q", [0])
    edge_rxn, edge_dst = array("i"), array("q")
    parent, parent_rxn = array("q", [-1]), array("i", [-1])
    applicable, fire = compiled.applicable, compiled.fire
    bounded = False
    u = 0
    while u < len(states):
        state = states[u]
        for ri in applicable(state):
            nxt = fire(state, ri)
            v = seen.get(nxt)
            if v is None:
                if len(states) >= max_configs:
                    bounded = True
                    break
                v = len(states)
                seen[nxt] = v
                states.append(nxt)
                parent.append(u)
                parent_rxn.append(ri)
            edge_rxn.append(ri)
            edge_dst.append(v)
        if bounded:
            break
        out_start.append(len(edge_dst))
        u += 1
    # nodes left unexpanded by the cutoff get empty edge slices
    while len(out_start) < len(states) + 1:
        out_start.append(len(edge_dst))
    return ReachabilityGraph(compiled, states, out_start, edge_rxn, edge_dst, parent, parent_rxn,
                             bounded, max_configs, tuple(n))


def _backward_closure(start: Iterable[int], in_start: array, in_src: array, n: int) -> bytearray:
    mark = bytearray(n)
    queue = deque()
    for u in start:
        if not mark[u]:
            mark[u] = 1
            queue.append(u)
    while queue:
        v = queue.popleft()
        for e in range(in_start[v], in_start[v + 1]):
            u = in_src[e]
            if not mark[u]:
                mark[u] = 1
                queue.append(u)
    return mark


def _stable_mask(g: ReachabilityGraph, values: list, preds) -> bytearray:
    changing = []
    out_start, edge_dst = g.out_start, g.edge_dst
    for u in range(len(g.states)):
        vu = values[u]
        for e in range(out_start[u], out_start[u + 1]):
            if values[edge_dst[e]] != vu:
                changing.append(u)
                break
    unstable = _backward_closure(changing, *preds, len(g.states))
    return bytearray(1 - b for b in unstable)


def stable_set(g: ReachabilityGraph, outputs: Sequence[str] | None = None) -> set[Configuration]:
    if g.bounded:
        raise NotClosedError(f"reachability graph was cut off at {g.bound} configurations")
    outputs = outputs or g.crn.outputs
    mask = _stable_mask(g, g.output_values(outputs), g.predecessors())
    return {g.config(u) for u in range(len(g.states)) if mask[u]}


@dataclass
class Verdict:
    input: tuple[int, ...]
    expected: int
    outcome: str
    reason: str = ""
    witness: list[tuple[Configuration, int]] | None = None
    witness_end: Configuration | None = None
    stats: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.outcome == PASS

    def to_line(self) -> str:
        n = ",".join(str(v) for v in self.input)
        parts = [f"n=({n})", f"expected={self.expected}", f"outcome={self.outcome}"]
        parts += [f"{k}={v}" for k, v in self.stats.items()]
        if self.reason:
            parts.append(f"reason={self.reason!r}")
        return " ".join(parts)

    def to_dict(self, crn: Crn | None = None) -> dict:
        doc: dict[str, Any] = {
            "input": list(self.input), "expected": self.expected, "outcome": self.outcome,
            "reason": self.reason, "stats": self.stats,
        }
        if self.witness is not None:
            doc["witness"] = [
                {"config": dict(c), "reaction": ri, **({"text": str(crn.reactions[ri])} if crn else {})}
                for c, ri in self.witness
            ]
            doc["witness_end"] = dict(self.witness_end or {})
        return doc


def check_stable_computation(
    crn: Crn | CompiledCrn, n: Sequence[int], expected: int, max_configs: int = DEFAULT_MAX_CONFIGS,
    initial: Mapping[str, int] | None = None,
) -> Verdict:
    """PASS iff every reachable configuration can reach a stable one with the
    expected output and no reachable stable configuration has another output."""
    g = explore(crn, n, max_configs, initial)
    stats: dict[str, Any] = {"nodes": len(g.states), "edges": g.edge_count}
    if g.bounded:
        return Verdict(tuple(n), expected, INCONCLUSIVE, f"bound of {max_configs} configurations hit",
                       stats=stats)
    values = g.output_values(g.crn.outputs)
    preds = g.predecessors()
    stable = _stable_mask(g, values, preds)
    stats["stable"] = sum(stable)
    target = expected if len(g.crn.outputs) == 1 else (expected,)
    for u in range(len(g.states)):
        if stable[u] and values[u] != target:
            return Verdict(tuple(n), expected, FAIL,
                           f"reachable stable configuration has output {values[u]}",
                           g.path_to(u), g.config(u), stats)
    good = [u for u in range(len(g.states)) if stable[u]]
    reach = _backward_closure(good, *preds, len(g.states))
    for u in range(len(g.states)):
        if not reach[u]:
            return Verdict(tuple(n), expected, FAIL,
                           f"no stable configuration with output {expected} is reachable",
                           g.path_to(u), g.config(u), stats)
    return Verdict(tuple(n), expected, PASS, stats=stats)


# -- randomized runs -----------------------------------------------------------


def simulate(
    crn: Crn | CompiledCrn, n: Sequence[int], seed: int | str = 0, max_steps: int = DEFAULT_MAX_STEPS,
    initial: Mapping[str, int] | None = None,
) -> Execution:
    """Fire uniformly random applicable reactions until quiescence or the step budget."""
    compiled = crn if isinstance(crn, CompiledCrn) else CompiledCrn(crn)
    rng = random.Random(seed)
    state = _start(compiled, n, initial)
    steps = []
    quiescent = False
    for _ in range(max_steps):
        apps = compiled.applicable(state)
        if not apps:
            quiescent = True
            break
        ri = apps[rng.randrange(len(apps))]
        steps.append((compiled.decode(state), ri))
        state = compiled.fire(state, ri)
    else:
        quiescent = not compiled.applicable(state)
    return Execution(compiled.crn, tuple(steps), compiled.decode(state), seed, quiescent)


def monitor_monotonic(e: Execution, outputs: Sequence[str] | None = None) -> bool:
    outputs = outputs or e.crn.outputs
    configs = e.configurations
    for y in outputs:
        counts = [c.get(y, 0) for c in configs]
        if any(b < a for a, b in zip(counts, counts[1:])):
            return False
    return True


def run_seed(base: int | str, n: Sequence[int], run: int) -> str:
    return f"{base}:{','.join(map(str, n))}:{run}"


def check_random(
    crn: Crn | CompiledCrn, n: Sequence[int], expected: int, runs: int = DEFAULT_RUNS,
    seed: int | str = 0, max_steps: int = DEFAULT_MAX_STEPS, require_monotonic: bool = False,
) -> Verdict:
    """``runs`` seeded executions; PASS iff each quiesces with the expected output.

    Runs whose output count ever drops are counted in ``stats["non_monotonic"]``;
    with ``require_monotonic`` such a run is a FAIL.
    """
    compiled = crn if isinstance(crn, CompiledCrn) else CompiledCrn(crn)
    y = compiled.crn.outputs[0]
    steps_total = 0
    non_monotonic = 0
    for run in range(runs):
        e = simulate(compiled, n, run_seed(seed, n, run), max_steps)
        steps_total += len(e)
        stats = {"runs": run + 1, "steps": steps_total, "non_monotonic": non_monotonic}
        if not e.quiescent:
            return Verdict(tuple(n), expected, INCONCLUSIVE,
                           f"run {run} did not quiesce within {max_steps} steps", stats=stats)
        if not monitor_monotonic(e):
            non_monotonic += 1
            stats["non_monotonic"] = non_monotonic
            if require_monotonic:
                return Verdict(tuple(n), expected, FAIL, f"run {run}: output count decreased",
                               list(e.steps), e.final, stats)
        if e.output(y) != expected:
            return Verdict(tuple(n), expected, FAIL, f"run {run} quiesced with output {e.output(y)}",
                           list(e.steps), e.final, stats)
    return Verdict(tuple(n), expected, PASS,
                   stats={"runs": runs, "steps": steps_total, "non_monotonic": non_monotonic})


def _sweep_one(args) -> Verdict:
    crn, n, expected, mode, max_configs, runs, seed, max_steps = args
    if expected is None:
        return Verdict(tuple(n), -1, FAIL, "spec value is not a natural")
    if mode == "exhaustive":
        return check_stable_computation(crn, n, expected, max_configs)
    return check_random(crn, n, expected, runs, seed, max_steps)


def sweep(
    crn: Crn,
    spec: funcspec.FunctionSpec,
    box: Sequence[int],
    mode: str = "exhaustive",
    max_configs: int = DEFAULT_MAX_CONFIGS,
    runs: int = DEFAULT_RUNS,
    seed: int = 0,
    max_steps: int = DEFAULT_MAX_STEPS,
    jobs: int = 1,
) -> list[Verdict]:
    """One verdict per input in ``[0, box[0]] x [0, box[1]]``, ordered by input.

    A one-input CRN is checked against ``spec`` restricted to ``n2 = 0``, so
    only the first axis of the box is swept.
    """
    if mode not in ("exhaustive", "random"):
        raise ValueError(f"unknown sweep mode {mode!r}")
    one = len(crn.inputs) == 1
    tasks = []
    for a in range(box[0] + 1):
        for b in range(1 if one else box[1] + 1):
            try:
                expected = funcspec.eval(spec, (a, b))
            except funcspec.SpecError:
                expected = None
            tasks.append((crn, (a,) if one else (a, b), expected, mode, max_configs, runs, seed, max_steps))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_one, tasks))
    return [_sweep_one(t) for t in tasks]


# -- fissure invariant monitor --------------------------------------------------


@dataclass(frozen=True)
class InvariantViolation:
    step: int
    message: str

    def __str__(self) -> str:
        return f"step {self.step}: {self.message}"


def monitor_fissure_invariant(
    meta: "FissureMeta", fs: funcspec.PartialFissureSpec, e: Execution
) -> list[InvariantViolation]:
    """Check the deficit-tracking invariant along an execution of a fissure CRN.

    Whenever the state molecule ``st(xline, zline, d)`` is present, with ``z`` the Z
    molecules consumed so far, ``x`` the input consumed and ``y`` the output
    produced:

    * ``zline == z1 - z2`` (the line through ``pre(z)``) and ``|zline| <= span - 1``;
    * ``d == f(pre(z)) - y`` and ``-d_max <= d <= 2 d_max + 1``;
    * ``xline`` is the line index of ``x`` reduced into ``[-span+1, span-1]`` mod ``2*span-1``.

    At a stall (inputs exhausted, no Z-consuming reaction can fire even after
    overflow clearing) the deficit is nonnegative and ``f(pre(z)) == f(n)``.
    """
    names = meta.names
    crn = e.crn
    out: list[InvariantViolation] = []
    configs = e.configurations
    c0 = configs[0]
    p = fs.grid.period
    n_point = (c0.get(names["x1"], 0), c0.get(names["x2"], 0))
    f_n = funcspec.eval_partial_fissure(fs, n_point)
    z = [0, 0]
    zc_rxns = list(meta.z_consuming)
    for step, conf in enumerate(configs):
        if step:
            ri = e.steps[step - 1][1]
            r = crn.reactions[ri]
            z[0] += max(0, -r.net(names["z1"]))
            z[1] += max(0, -r.net(names["z2"]))
        states = [(s, k) for s, k in conf.items() if s in meta.state_of]
        if not states:
            continue
        if len(states) != 1 or states[0][1] != 1:
            out.append(InvariantViolation(step, f"expected one state molecule, found {states}"))
            continue
        xline, zline, d = meta.state_of[states[0][0]]
        y = conf.get(names["y"], 0)
        if zline != z[0] - z[1]:
            out.append(InvariantViolation(step, f"zline={zline} but consumed z={tuple(z)} lies on line {z[0] - z[1]}"))
        if not -meta.span < zline < meta.span:
            out.append(InvariantViolation(step, f"zline={zline} outside [-span+1, span-1] with span={meta.span}"))
        target = fs.value_from_z(*z)
        if d != target - y:
            out.append(InvariantViolation(step, f"deficit {d} != f(pre(z)) - y = {target} - {y}"))
        if not -meta.d_max <= d <= 2 * meta.d_max + 1:
            out.append(InvariantViolation(step, f"deficit {d} outside [-{meta.d_max}, {2 * meta.d_max + 1}]"))
        x_point = (n_point[0] - conf.get(names["x1"], 0), n_point[1] - conf.get(names["x2"], 0))
        if xline != meta.reduce(int(fs.line_index(x_point))):
            out.append(InvariantViolation(step, f"xline={xline} does not track line {fs.line_index(x_point)} of x"))
        inputs_left = conf.get(names["x1"], 0) >= p or conf.get(names["x2"], 0) >= p
        if not inputs_left:
            probe = dict(conf)
            if d > meta.d_max:
                probe.pop(states[0][0])
                probe[meta.state_name(xline, zline, meta.d_max)] = 1
            stalled = not any(
                all(probe.get(s, 0) >= k for s, k in r.reactants.items())
                for r in zc_rxns
            )
            if stalled:
                if d < 0:
                    out.append(InvariantViolation(step, f"negative deficit {d} at a stall"))
                if target != f_n:
                    out.append(InvariantViolation(step, f"stall at f(pre(z))={target} but f(n)={f_n}"))
    return out
