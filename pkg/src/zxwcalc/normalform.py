"""Normal forms for diagram states and the normalization pipeline.

A normal form is just a dense coefficient vector over ``n_wires`` qudit wires
(wire 0 = most significant digit), together with a canonical diagram shape
that denotes it: a one-hot selector state fanned out by a W node, one green
amplitude box per kept basis index, and per-wire pink adders fed through
multipliers that encode the index digits.  Two diagrams of equal type are
equal as linear maps exactly when their normal forms agree entrywise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagram import (
    Diagram,
    Multiplier,
    PinkSpider,
    WNodeGeneral,
    ZBox,
    bend_to_state,
    one_hot_phase,
    ones_phase,
    validate,
)
from .interpret import NODE_SIZE_CAP, _fold_order, _prepare, interpret, semantics


@dataclass(frozen=True, eq=False)
class NormalForm:
    """Dense state vector over ``n_wires`` wires of one qudit dimension."""

    dimension: int
    n_wires: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        d, m = int(self.dimension), int(self.n_wires)
        if d < 2:
            raise ValueError(f"dimension must be at least 2, got {d}")
        if m < 0 or amps.size != d**m:
            raise ValueError(
                f"expected {d**m} amplitudes for {m} wires, got {amps.size}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "dimension", d)
        object.__setattr__(self, "n_wires", m)
        object.__setattr__(self, "amplitudes", amps)

    def __repr__(self):
        return f"NormalForm(d={self.dimension}, wires={self.n_wires})"


def index_digits(index: int, dimension: int, wires: int) -> tuple[int, ...]:
    """Big-endian base-d digits of a basis index."""
    out = []
    for k in range(wires):
        out.append((index // dimension ** (wires - 1 - k)) % dimension)
    return tuple(out)


def digits_index(digits, dimension: int) -> int:
    index = 0
    for digit in digits:
        index = index * dimension + int(digit)
    return index


def matrix_to_nf(vector, dimension: int, n_wires: int) -> NormalForm:
    """Wrap a dense coefficient vector as a normal form."""
    return NormalForm(dimension, n_wires, np.asarray(vector, dtype=complex).ravel())


def generator_nf(kind, dimension: int) -> NormalForm:
    """Normal form of a single generator bent into a state.

    Output legs come first, then the bent former inputs, matching
    :func:`zxwcalc.diagram.bend_to_state`; the coefficients are the row-major
    raveling of the generator's matrix.
    """
    mat = semantics(kind, dimension)
    return NormalForm(dimension, kind.n_out + kind.n_in, mat.ravel())


def tensor_nf(a: NormalForm, b: NormalForm) -> NormalForm:
    """Juxtapose two normal forms; ``a``'s wires take the lower positions."""
    if a.dimension != b.dimension:
        raise ValueError("dimension mismatch in tensor_nf")
    amps = np.multiply.outer(a.amplitudes, b.amplitudes).ravel()
    return NormalForm(a.dimension, a.n_wires + b.n_wires, amps)


def partial_trace_nf(nf: NormalForm, s: int, t: int) -> NormalForm:
    """Join wires ``s`` and ``t`` of a state: keep entries whose two digits
    agree, sum over the shared value, and drop both digit positions."""
    d, m = nf.dimension, nf.n_wires
    if s == t or not (0 <= s < m and 0 <= t < m):
        raise ValueError(f"invalid wire pair ({s}, {t}) for {m} wires")
    idx = np.arange(d**m, dtype=np.int64)
    dig_s = (idx // d ** (m - 1 - s)) % d
    dig_t = (idx // d ** (m - 1 - t)) % d
    keep = dig_s == dig_t
    new_idx = np.zeros(d**m, dtype=np.int64)
    for p in range(m):
        if p in (s, t):
            continue
        new_idx = new_idx * d + (idx // d ** (m - 1 - p)) % d
    out = np.zeros(d ** (m - 2), dtype=complex)
    np.add.at(out, new_idx[keep], nf.amplitudes[keep])
    return NormalForm(d, m - 2, out)


def nf_permute(nf: NormalForm, source_positions) -> NormalForm:
    """Reorder wires: new wire ``j`` carries old wire ``source_positions[j]``."""
    m = nf.n_wires
    perm = [int(p) for p in source_positions]
    if sorted(perm) != list(range(m)):
        raise ValueError(f"not a wire permutation: {source_positions!r}")
    d = nf.dimension
    arr = nf.amplitudes.reshape((d,) * m).transpose(perm).ravel()
    return NormalForm(d, m, arr)


# ---------------------------------------------------------------------------
# the canonical diagram shape


def emit_diagram(nf: NormalForm, order=None) -> Diagram:
    """Render a normal form as its canonical diagram.

    Basis indices with exactly zero amplitude are omitted (the all-zero state
    keeps a single zero box so the diagram still denotes it).  ``order`` lets
    callers emit the amplitude boxes in a non-canonical sequence; it must list
    distinct indices covering every nonzero amplitude.  The default ascending
    order is the unique form.
    """
    d, m = nf.dimension, nf.n_wires
    amps = nf.amplitudes
    if order is None:
        kept = [j for j in range(amps.size) if amps[j] != 0] or [0]
    else:
        kept = [int(j) for j in order]
        if len(set(kept)) != len(kept):
            raise ValueError("order contains duplicate indices")
        missing = [j for j in range(amps.size) if amps[j] != 0 and j not in kept]
        if missing or any(not 0 <= j < amps.size for j in kept):
            raise ValueError("order must cover every nonzero amplitude")
    count = len(kept)

    nodes = {
        "sel": PinkSpider(d - 1, 0, 1),
        "w": WNodeGeneral(count),
    }
    wires = [(("out", "sel", 0), ("in", "w", 0))]
    if m == 0:
        nodes["box000000"] = ZBox(one_hot_phase(d, 1, amps[kept[0]]), 1, 0)
        wires.append((("out", "w", 0), ("in", "box000000", 0)))
        return Diagram(d, nodes, wires, 0, 0)

    for k in range(m):
        nodes[f"add{k:02d}"] = PinkSpider(0, count, 1)
        wires.append((("out", f"add{k:02d}", 0), ("bout", k)))
    for t, j in enumerate(kept):
        box = f"box{t:06d}"
        nodes[box] = ZBox(one_hot_phase(d, 1, amps[j]), 1, m)
        wires.append((("out", "w", t), ("in", box, 0)))
        digits = index_digits(j, d, m)
        for k in range(m):
            mul = f"mul{t:06d}x{k:02d}"
            nodes[mul] = Multiplier(digits[k])
            wires.append((("out", box, k), ("in", mul, 0)))
            wires.append((("out", mul, 0), ("in", f"add{k:02d}", t)))
    return Diagram(d, nodes, wires, 0, m)


def _parse_normal_form(diagram: Diagram):
    """Recover (n_wires, [(index, amplitude), ...]) from a canonical-shape
    diagram, in box order.  Raises ValueError when the shape does not match."""

    def bad(why: str):
        raise ValueError(f"not a normal-form diagram: {why}")

    errs = validate(diagram)
    if errs:
        bad("; ".join(errs))
    if diagram.n_in != 0:
        bad("it has inputs")
    d, m = diagram.dimension, diagram.n_out
    sink_of = diagram.sink_of()

    selectors = [
        nid
        for nid, kind in diagram.nodes.items()
        if isinstance(kind, PinkSpider) and (kind.label, kind.n_in, kind.n_out) == (d - 1, 0, 1)
    ]
    if len(selectors) != 1:
        bad(f"expected one selector state, found {len(selectors)}")
    sel = selectors[0]
    snk = sink_of[("out", sel, 0)]
    if snk[0] != "in" or snk[2] != 0:
        bad("selector does not feed a fan-out node")
    wid = snk[1]
    wkind = diagram.nodes[wid]
    if not isinstance(wkind, WNodeGeneral) or wkind.transposed:
        bad("selector feeds something other than a forward W node")
    count = wkind.legs

    expected_nodes = 2 + count + (count * m + m if m else 0)
    if len(diagram.nodes) != expected_nodes:
        bad(f"unexpected node count {len(diagram.nodes)}")

    entries = []
    seen_indices = set()
    for t in range(count):
        snk = sink_of[("out", wid, t)]
        if snk[0] != "in" or snk[2] != 0:
            bad(f"fan-out leg {t} does not feed a box input")
        box = snk[1]
        kind = diagram.nodes[box]
        if not isinstance(kind, ZBox) or kind.n_in != 1 or kind.n_out != m:
            bad(f"leg {t} feeds a non-box node {box!r}")
        if any(v != 0 for v in kind.phase[1:]):
            bad(f"box {box!r} carries amplitudes beyond the first slot")
        amp = kind.phase[0]
        if m == 0:
            entries.append((0, amp))
            continue
        digits = [None] * m
        for k in range(m):
            msnk = sink_of[("out", box, k)]
            if msnk[0] != "in" or msnk[2] != 0:
                bad(f"box {box!r} leg {k} does not feed a multiplier")
            mul = diagram.nodes[msnk[1]]
            if not isinstance(mul, Multiplier):
                bad(f"box {box!r} leg {k} feeds a non-multiplier")
            asnk = sink_of[("out", msnk[1], 0)]
            if asnk[0] != "in":
                bad("multiplier does not feed an adder")
            add = diagram.nodes[asnk[1]]
            if not isinstance(add, PinkSpider) or (add.label, add.n_in, add.n_out) != (0, count, 1):
                bad("multiplier feeds something other than a shared adder")
            bus = sink_of[("out", asnk[1], 0)]
            if bus[0] != "bout":
                bad("adder does not feed a boundary output")
            if digits[bus[1]] is not None:
                bad(f"box {box!r} hits output {bus[1]} twice")
            digits[bus[1]] = mul.weight % d
        index = digits_index(digits, d)
        if index in seen_indices:
            bad(f"basis index {index} appears twice")
        seen_indices.add(index)
        entries.append((index, amp))
    return m, entries


def unique_sort(diagram: Diagram) -> Diagram:
    """Reorder the amplitude boxes of a canonical-shape diagram into the
    unique ascending-index form.  Raises ValueError for any other diagram."""
    d = diagram.dimension
    m, entries = _parse_normal_form(diagram)
    amps = np.zeros(d**m, dtype=complex)
    for index, amp in entries:
        amps[index] += amp
    return emit_diagram(NormalForm(d, m, amps))


# ---------------------------------------------------------------------------
# layerization


def _node_sources(diagram: Diagram) -> dict:
    src_of = diagram.source_of()
    deps: dict[str, set[str]] = {nid: set() for nid in diagram.nodes}
    for nid, kind in diagram.nodes.items():
        for p in range(kind.n_in):
            src = src_of[("in", nid, p)]
            if src[0] == "out":
                deps[nid].add(src[1])
    return deps


def _topo_nodes(diagram: Diagram) -> list[str]:
    deps = _node_sources(diagram)
    order: list[str] = []
    done: set[str] = set()
    while len(order) < len(deps):
        ready = sorted(n for n, pre in deps.items() if n not in done and pre <= done)
        if not ready:
            raise ValueError("diagram contains a directed cycle")
        order.extend(ready)
        done.update(ready)
    return order


def _splice_cycles(diagram: Diagram) -> Diagram:
    """Break directed cycles by cutting wires with a cap/cup identity pair,
    so caps originate and cups terminate the layers they touch."""
    work = diagram
    counter = 0
    while True:
        try:
            _topo_nodes(work)
            return work
        except ValueError:
            pass
        deps = _node_sources(work)
        done: set[str] = set()
        changed = True
        while changed:
            changed = False
            for n, pre in deps.items():
                if n not in done and pre <= done:
                    done.add(n)
                    changed = True
        stuck = set(deps) - done
        candidates = sorted(
            (src, snk)
            for src, snk in work.wires
            if src[0] == "out" and snk[0] == "in" and src[1] in stuck and snk[1] in stuck
        )
        src, snk = candidates[0]
        d = work.dimension
        nodes = dict(work.nodes)
        cap_id, cup_id = f"cyc{counter}a", f"cyc{counter}b"
        while cap_id in nodes or cup_id in nodes:
            counter += 1
            cap_id, cup_id = f"cyc{counter}a", f"cyc{counter}b"
        counter += 1
        nodes[cap_id] = ZBox(ones_phase(d), 0, 2)
        nodes[cup_id] = ZBox(ones_phase(d), 2, 0)
        wires = [w for w in work.wires if w != (src, snk)]
        wires.append((src, ("in", cup_id, 0)))
        wires.append((("out", cap_id, 0), ("in", cup_id, 1)))
        wires.append((("out", cap_id, 1), snk))
        work = Diagram(d, nodes, wires, work.n_in, work.n_out)


def layerize(diagram: Diagram) -> list[Diagram]:
    """Slice a diagram into a sequential chain of single-layer diagrams.

    Directed cycles are cut with cap/cup pairs first.  The last element is a
    node-free permutation aligning the accumulated wire order with the
    diagram's output order, so composing the layers in sequence reproduces
    the diagram's matrix.
    """
    work = _splice_cycles(diagram)
    d = work.dimension
    src_of = work.source_of()
    deps = _node_sources(work)
    level: dict[str, int] = {}
    for nid in _topo_nodes(work):
        level[nid] = 1 + max((level[p] for p in deps[nid]), default=0)

    live: list[tuple] = [("bin", i) for i in range(work.n_in)]
    layers: list[Diagram] = []
    for lv in range(1, 1 + max(level.values(), default=0)):
        lnodes = sorted(n for n, v in level.items() if v == lv)
        consumed: dict[tuple, tuple] = {}
        for nid in lnodes:
            kind = work.nodes[nid]
            for p in range(kind.n_in):
                consumed[src_of[("in", nid, p)]] = ("in", nid, p)
        new_live = [tok for tok in live if tok not in consumed]
        wires = []
        for i, tok in enumerate(live):
            if tok in consumed:
                wires.append((("bin", i), consumed[tok]))
            else:
                wires.append((("bin", i), ("bout", new_live.index(tok))))
        pos = len(new_live)
        for nid in lnodes:
            for q in range(work.nodes[nid].n_out):
                wires.append((("out", nid, q), ("bout", pos)))
                new_live.append(("out", nid, q))
                pos += 1
        layers.append(
            Diagram(d, {n: work.nodes[n] for n in lnodes}, wires, len(live), len(new_live))
        )
        live = new_live

    targets = [None] * len(live)
    for k in range(work.n_out):
        targets[live.index(src_of[("bout", k)])] = k
    wires = [(("bin", i), ("bout", t)) for i, t in enumerate(targets)]
    layers.append(Diagram(d, {}, wires, len(live), work.n_out))
    return layers


# ---------------------------------------------------------------------------
# normalization


def _partial_state(bent: Diagram, processed: set, live: list) -> Diagram:
    d = bent.dimension
    nodes = {n: bent.nodes[n] for n in processed}
    wires = [
        (src, snk)
        for src, snk in bent.wires
        if src[0] == "out"
        and snk[0] == "in"
        and src[1] in processed
        and snk[1] in processed
    ]
    counter = 0
    for i, tok in enumerate(live):
        if tok[0] == "out":
            wires.append((tok, ("bout", i)))
        else:
            # a still-dangling in-port; expose it through a cap, matching how
            # bend_to_state turns inputs into outputs
            cid = f"pend{counter}"
            counter += 1
            while cid in nodes:
                cid += "_"
            nodes[cid] = ZBox(ones_phase(d), 0, 2)
            wires.append((("out", cid, 0), ("in", tok[1], tok[2])))
            wires.append((("out", cid, 1), ("bout", i)))
    return Diagram(d, nodes, wires, 0, len(live))


def normalize(diagram: Diagram, *, tol: float = 1e-8, check_steps: bool = False) -> NormalForm:
    """Reduce a diagram to its normal form.

    Pipeline: bend every input up into an output, then fold the generators
    one by one in the interpreter's connectivity-guided order, joining a wire
    with :func:`partial_trace_nf` as soon as both of its ends are in the
    running state (so cycles close on their own and the live cross-section
    stays narrow), and finally permute the accumulated wires into boundary
    order.  With ``check_steps`` the running coefficients are compared
    against the interpreter after every fold and a mismatch raises
    ValueError naming the offending node.
    """
    errs = validate(diagram)
    if errs:
        raise ValueError("cannot normalize an invalid diagram: " + "; ".join(errs))
    d = diagram.dimension
    bent = bend_to_state(diagram)
    bent = _prepare(bent, min(NODE_SIZE_CAP, d**4))
    src_of = bent.source_of()
    snk_of = {src: snk for src, snk in bent.wires}

    def close(running, live, i, j):
        running = partial_trace_nf(running, i, j)
        for k in sorted((i, j), reverse=True):
            del live[k]
        return running

    running = NormalForm(d, 0, np.ones(1, dtype=complex))
    live: list[tuple] = []
    processed: set[str] = set()
    for nid in _fold_order(bent):
        kind = bent.nodes[nid]
        running = tensor_nf(running, generator_nf(kind, d))
        live += [("out", nid, q) for q in range(kind.n_out)]
        live += [("pend", nid, p) for p in range(kind.n_in)]
        for p in range(kind.n_in):
            src = src_of[("in", nid, p)]
            if src in live:
                running = close(running, live, live.index(src), live.index(("pend", nid, p)))
        for q in range(kind.n_out):
            tok, snk = ("out", nid, q), snk_of[("out", nid, q)]
            if snk[0] == "in" and tok in live and ("pend", snk[1], snk[2]) in live:
                running = close(
                    running, live, live.index(tok), live.index(("pend", snk[1], snk[2]))
                )
        processed.add(nid)
        if check_steps:
            reference = interpret(_partial_state(bent, processed, live)).ravel()
            dev = float(np.max(np.abs(reference - running.amplitudes))) if reference.size else 0.0
            if dev > tol:
                raise ValueError(
                    f"normalization step for node {nid!r} deviates from the "
                    f"interpreter by {dev:.3e}"
                )
    perm = [live.index(src_of[("bout", k)]) for k in range(bent.n_out)]
    return nf_permute(running, perm)


def decide_equal(first: Diagram, second: Diagram, tol: float = 1e-8) -> bool:
    """Whether two diagrams denote the same linear map, within tolerance."""
    if first.dimension != second.dimension:
        return False
    if (first.n_in, first.n_out) != (second.n_in, second.n_out):
        return False
    a = normalize(first)
    b = normalize(second)
    if a.amplitudes.size != b.amplitudes.size:
        return False
    if a.amplitudes.size == 0:
        return True
    return bool(np.max(np.abs(a.amplitudes - b.amplitudes)) <= tol)
