"""Qudit ZXW diagrams as port graphs.

A diagram is a collection of generator nodes with ordered in/out ports plus a
set of wires.  Every wire joins a *source* (a node out-port or a diagram input
position) to a *sink* (a node in-port or a diagram output position), and every
port and boundary position is used exactly once.  Wires may cross freely: the
symmetry is implicit in which endpoints are joined, there is no swap node.

Wire endpoints are plain tuples:

    ("out", node_id, port)   node out-port         (source)
    ("in",  node_id, port)   node in-port          (sink)
    ("bin", pos)             diagram input  pos    (source)
    ("bout", pos)            diagram output pos    (sink)

Diagrams are value objects; all operations return new instances.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

Scalar = Union[int, float, complex]


def _ctuple(values: Iterable[Scalar]) -> tuple[complex, ...]:
    return tuple(complex(v) for v in values)


# ---------------------------------------------------------------------------
# generator kinds


@dataclass(frozen=True)
class ZBox:
    """Green box carrying an amplitude vector.

    ``phase[k - 1]`` weights the basis value ``k`` on all legs at once; the
    weight of the value 0 is fixed to 1.  A box at qudit dimension ``d``
    therefore takes ``d - 1`` entries.  Arity is free, including 0 -> 0
    (a scalar worth ``1 + sum(phase)``).
    """

    phase: tuple[complex, ...]
    n_in: int
    n_out: int

    def __post_init__(self):
        object.__setattr__(self, "phase", _ctuple(self.phase))
        object.__setattr__(self, "n_in", int(self.n_in))
        object.__setattr__(self, "n_out", int(self.n_out))


@dataclass(frozen=True)
class Hadamard:
    """Fourier box: entries omega**(j*k) / sqrt(d). Symmetric, order 4."""

    n_in = 1
    n_out = 1


@dataclass(frozen=True)
class HadamardDagger:
    """Conjugate transpose of :class:`Hadamard` (equals its cube)."""

    n_in = 1
    n_out = 1


@dataclass(frozen=True)
class WNode:
    """Binary W node, 1 -> 2: keeps 0 at both legs or routes i to one leg."""

    n_in = 1
    n_out = 2


@dataclass(frozen=True)
class WNodeGeneral:
    """W node with ``legs`` fan-out legs (1 -> legs), or its transpose.

    ``legs == 1`` behaves as a plain wire.  The transposed variant collapses
    the subspace where at most one leg is nonzero and kills the rest.
    """

    legs: int
    transposed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "legs", int(self.legs))
        object.__setattr__(self, "transposed", bool(self.transposed))

    @property
    def n_in(self) -> int:
        return self.legs if self.transposed else 1

    @property
    def n_out(self) -> int:
        return 1 if self.transposed else self.legs


@dataclass(frozen=True)
class GreenSpider:
    """Phase-only green node: amplitude exp(i * angles[k-1]) for value k."""

    angles: tuple[float, ...]
    n_in: int
    n_out: int

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        object.__setattr__(self, "n_in", int(self.n_in))
        object.__setattr__(self, "n_out", int(self.n_out))


@dataclass(frozen=True)
class LabeledBox:
    """Green box whose only free amplitude sits on the top value d - 1."""

    value: complex
    n_in: int
    n_out: int

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))
        object.__setattr__(self, "n_in", int(self.n_in))
        object.__setattr__(self, "n_out", int(self.n_out))


@dataclass(frozen=True)
class PinkSpider:
    """Additive (pink) spider: nonzero exactly when

        sum(outputs) + label == sum(inputs)  (mod d),

    with every nonzero entry equal to 1."""

    label: int
    n_in: int
    n_out: int

    def __post_init__(self):
        object.__setattr__(self, "label", int(self.label))
        object.__setattr__(self, "n_in", int(self.n_in))
        object.__setattr__(self, "n_out", int(self.n_out))


@dataclass(frozen=True)
class Dualiser:
    """Basis negation: |x> -> |-x mod d>. An involution; identity at d = 2."""

    n_in = 1
    n_out = 1


@dataclass(frozen=True)
class Multiplier:
    """Basis multiplication by a constant: |x> -> |w * x mod d>."""

    weight: int

    def __post_init__(self):
        object.__setattr__(self, "weight", int(self.weight))

    n_in = 1
    n_out = 1


@dataclass(frozen=True)
class Triangle:
    """Identity plus a row of ones into |0>: I + sum_{i>=1} |0><i|."""

    n_in = 1
    n_out = 1


@dataclass(frozen=True)
class TriangleInverse:
    """Inverse of :class:`Triangle`: I - sum_{i>=1} |0><i|."""

    n_in = 1
    n_out = 1


@dataclass(frozen=True)
class VBox:
    """Transpose of :class:`Triangle`: I + sum_{i>=1} |i><0|."""

    n_in = 1
    n_out = 1


@dataclass(frozen=True)
class ScalarBox:
    """Zero-legged node worth a bare complex number."""

    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))

    n_in = 0
    n_out = 0


@dataclass(frozen=True)
class Identity:
    """Pseudo-kind accepted by :func:`make_generator`; never stored as a node."""

    n_in = 1
    n_out = 1


GeneratorKind = Union[
    ZBox,
    Hadamard,
    HadamardDagger,
    WNode,
    WNodeGeneral,
    GreenSpider,
    LabeledBox,
    PinkSpider,
    Dualiser,
    Multiplier,
    Triangle,
    TriangleInverse,
    VBox,
    ScalarBox,
]

CORE_KINDS = (ZBox, Hadamard, WNode)


# ---------------------------------------------------------------------------
# phase vector helpers


def ones_phase(dimension: int) -> tuple[complex, ...]:
    """The trivial amplitude vector (every value weighted 1)."""
    return (1 + 0j,) * (dimension - 1)


def zeros_phase(dimension: int) -> tuple[complex, ...]:
    return (0j,) * (dimension - 1)


def one_hot_phase(dimension: int, slot: int, value: Scalar = 1) -> tuple[complex, ...]:
    """All-zero amplitude vector except ``value`` at basis value ``slot``."""
    if not 1 <= slot <= dimension - 1:
        raise ValueError(f"slot must be in 1..{dimension - 1}, got {slot}")
    out = [0j] * (dimension - 1)
    out[slot - 1] = complex(value)
    return tuple(out)


def constant_phase(dimension: int, value: Scalar) -> tuple[complex, ...]:
    return (complex(value),) * (dimension - 1)


def fourier_phase(dimension: int, j: int) -> tuple[complex, ...]:
    """Amplitudes omega**(j*k) for k = 1..d-1, omega the primitive d-th root."""
    w = cmath.exp(2j * math.pi / dimension)
    return tuple(w ** ((j * k) % dimension) for k in range(1, dimension))


# ---------------------------------------------------------------------------
# endpoints and wires


def out_port(node: str, port: int) -> tuple:
    return ("out", node, port)


def in_port(node: str, port: int) -> tuple:
    return ("in", node, port)


def input_pos(pos: int) -> tuple:
    return ("bin", pos)


def output_pos(pos: int) -> tuple:
    return ("bout", pos)


def _is_source(ep: tuple) -> bool:
    return ep[0] in ("out", "bin")


def _is_sink(ep: tuple) -> bool:
    return ep[0] in ("in", "bout")


def _orient(wire: Sequence[tuple]) -> tuple[tuple, tuple]:
    a, b = wire
    if _is_source(b) and _is_sink(a):
        return (b, a)
    return (a, b)


class Diagram:
    """Immutable port graph over qudit wires of one dimension.

    ``nodes`` maps opaque string ids to generator kinds; ``wires`` is a set of
    (source, sink) endpoint pairs; ``n_in``/``n_out`` count the boundary
    positions.  Use :func:`validate` to check well-formedness.
    """

    __slots__ = ("dimension", "nodes", "wires", "n_in", "n_out")

    def __init__(self, dimension, nodes, wires, n_in, n_out):
        object.__setattr__(self, "dimension", int(dimension))
        object.__setattr__(self, "nodes", dict(nodes))
        object.__setattr__(self, "wires", frozenset(_orient(w) for w in wires))
        object.__setattr__(self, "n_in", int(n_in))
        object.__setattr__(self, "n_out", int(n_out))

    def __setattr__(self, name, value):
        raise AttributeError("Diagram is immutable")

    def __eq__(self, other):
        if not isinstance(other, Diagram):
            return NotImplemented
        return (
            self.dimension == other.dimension
            and self.nodes == other.nodes
            and self.wires == other.wires
            and self.n_in == other.n_in
            and self.n_out == other.n_out
        )

    def __hash__(self):
        return hash((self.dimension, frozenset(self.nodes.items()), self.wires))

    def __repr__(self):
        return (
            f"Diagram(d={self.dimension}, {len(self.nodes)} nodes, "
            f"{len(self.wires)} wires, {self.n_in} -> {self.n_out})"
        )

    def source_of(self) -> dict:
        """Map each sink endpoint to the source wired to it."""
        return {snk: src for src, snk in self.wires}

    def sink_of(self) -> dict:
        return {src: snk for src, snk in self.wires}


# ---------------------------------------------------------------------------
# validation


def _check_kind(kind, d: int) -> list[str]:
    errs = []
    if isinstance(kind, ZBox) and len(kind.phase) != d - 1:
        errs.append(f"ZBox phase needs {d - 1} entries, has {len(kind.phase)}")
    if isinstance(kind, GreenSpider) and len(kind.angles) != d - 1:
        errs.append(f"GreenSpider needs {d - 1} angles, has {len(kind.angles)}")
    if isinstance(kind, (ZBox, GreenSpider, LabeledBox, PinkSpider)):
        if kind.n_in < 0 or kind.n_out < 0:
            errs.append(f"{type(kind).__name__} has negative arity")
    if isinstance(kind, WNodeGeneral) and kind.legs < 1:
        errs.append(f"WNodeGeneral needs at least 1 leg, has {kind.legs}")
    if isinstance(kind, Multiplier) and kind.weight < 0:
        errs.append(f"Multiplier weight must be non-negative, got {kind.weight}")
    if isinstance(kind, PinkSpider) and kind.label < 0:
        errs.append(f"PinkSpider label must be non-negative, got {kind.label}")
    return errs


def validate(diagram: Diagram) -> list[str]:
    """Return a list of violation messages; empty means well formed."""
    errs: list[str] = []
    d = diagram.dimension
    if d < 2:
        errs.append(f"dimension must be at least 2, got {d}")
        return errs

    for nid, kind in diagram.nodes.items():
        if not isinstance(kind, GeneratorKind.__args__):  # type: ignore[attr-defined]
            errs.append(f"node {nid!r} has unknown kind {type(kind).__name__}")
            continue
        errs.extend(f"node {nid!r}: {e}" for e in _check_kind(kind, d))

    seen: dict[tuple, int] = {}
    for src, snk in diagram.wires:
        if not (_is_source(src) and _is_sink(snk)):
            errs.append(f"wire {src} -- {snk} does not join a source to a sink")
            continue
        for ep in (src, snk):
            seen[ep] = seen.get(ep, 0) + 1
            role = ep[0]
            if role in ("in", "out"):
                _, nid, port = ep
                kind = diagram.nodes.get(nid)
                if kind is None:
                    errs.append(f"wire endpoint {ep} references missing node {nid!r}")
                    continue
                limit = kind.n_in if role == "in" else kind.n_out
                if not 0 <= port < limit:
                    errs.append(f"endpoint {ep} is out of range for {type(kind).__name__}")
            else:
                _, pos = ep
                limit = diagram.n_in if role == "bin" else diagram.n_out
                if not 0 <= pos < limit:
                    errs.append(f"boundary endpoint {ep} is out of range")

    expected = []
    for nid, kind in diagram.nodes.items():
        if not isinstance(kind, GeneratorKind.__args__):  # type: ignore[attr-defined]
            continue
        expected.extend(("in", nid, p) for p in range(kind.n_in))
        expected.extend(("out", nid, p) for p in range(kind.n_out))
    expected.extend(("bin", p) for p in range(diagram.n_in))
    expected.extend(("bout", p) for p in range(diagram.n_out))
    for ep in expected:
        count = seen.get(ep, 0)
        if count != 1:
            errs.append(f"endpoint {ep} used {count} times, expected exactly once")
    for ep, count in seen.items():
        if count > 1:
            errs.append(f"endpoint {ep} appears on {count} wires")
    return errs


def _require_valid(diagram: Diagram, where: str) -> Diagram:
    errs = validate(diagram)
    if errs:
        raise ValueError(f"{where} produced an invalid diagram: " + "; ".join(errs))
    return diagram


# ---------------------------------------------------------------------------
# constructors


def make_generator(kind, dimension: int) -> Diagram:
    """Single-generator diagram with straight boundary wiring.

    ``Identity()`` (or the string ``"identity"``) yields the node-free
    one-wire diagram.
    """
    if kind == "identity" or isinstance(kind, Identity):
        return identity_diagram(dimension, 1)
    errs = _check_kind(kind, dimension)
    if errs:
        raise ValueError("; ".join(errs))
    wires = [(("bin", i), ("in", "g", i)) for i in range(kind.n_in)]
    wires += [(("out", "g", j), ("bout", j)) for j in range(kind.n_out)]
    return Diagram(dimension, {"g": kind}, wires, kind.n_in, kind.n_out)


def identity_diagram(dimension: int, wires: int = 1) -> Diagram:
    return Diagram(
        dimension,
        {},
        [(("bin", i), ("bout", i)) for i in range(wires)],
        wires,
        wires,
    )


def permutation_diagram(dimension: int, targets: Sequence[int]) -> Diagram:
    """Node-free rewiring sending input ``i`` to output ``targets[i]``."""
    if sorted(targets) != list(range(len(targets))):
        raise ValueError(f"not a permutation: {targets!r}")
    wires = [(("bin", i), ("bout", t)) for i, t in enumerate(targets)]
    return Diagram(dimension, {}, wires, len(targets), len(targets))


def cap_diagram(dimension: int) -> Diagram:
    """0 -> 2 all-ones green box: the state sum_j |jj>."""
    return make_generator(ZBox(ones_phase(dimension), 0, 2), dimension)


def cup_diagram(dimension: int) -> Diagram:
    """2 -> 0 all-ones green box: the effect sum_j <jj|."""
    return make_generator(ZBox(ones_phase(dimension), 2, 0), dimension)


# ---------------------------------------------------------------------------
# junction splicing shared by composition and node replacement


def _resolve_junctions(edges: list[tuple], fresh_loop_id) -> tuple[list, list]:
    """Merge edges at junction plugs ("J", ...) until only real endpoints.

    Returns (wires, extra_nodes) where extra_nodes hosts closed loops that
    would otherwise have no endpoint (each becomes an identity box with a
    self wire, worth the loop value).
    """
    edges = [list(e) for e in edges]
    extra = []
    while True:
        slots: dict[tuple, list[int]] = {}
        for i, (a, b) in enumerate(edges):
            for plug in (a, b):
                if isinstance(plug, tuple) and plug and plug[0] == "J":
                    slots.setdefault(plug, []).append(i)
        if not slots:
            break
        j, where = next(iter(sorted(slots.items(), key=lambda kv: repr(kv[0]))))
        if len(where) != 2:
            raise ValueError(f"internal splice error: junction {j} used {len(where)} times")
        i1, i2 = where
        if i1 == i2:
            # both plugs of one edge: a wire closed onto itself
            extra.append(fresh_loop_id())
            edges.pop(i1)
            continue
        e1, e2 = edges[i1], edges[i2]
        a = e1[0] if e1[1] == j else e1[1]
        b = e2[0] if e2[1] == j else e2[1]
        for i in sorted((i1, i2), reverse=True):
            edges.pop(i)
        edges.append([a, b])
    return [tuple(e) for e in edges], extra


def replace_node(diagram: Diagram, node_id: str, replacement: Diagram) -> Diagram:
    """Substitute one node by a whole diagram of the same arity.

    The replacement's boundary positions take over the node's ports in order.
    """
    kind = diagram.nodes[node_id]
    if (replacement.n_in, replacement.n_out) != (kind.n_in, kind.n_out):
        raise ValueError(
            f"replacement is {replacement.n_in} -> {replacement.n_out}, "
            f"node {node_id!r} is {kind.n_in} -> {kind.n_out}"
        )
    if replacement.dimension != diagram.dimension:
        raise ValueError("dimension mismatch in replace_node")

    rename = {x: f"{node_id}:{i}" for i, x in enumerate(sorted(replacement.nodes))}

    def host_plug(ep):
        if ep[0] in ("in", "out") and ep[1] == node_id:
            return ("J", ep[0], ep[2])
        return ep

    def repl_plug(ep):
        if ep[0] == "bin":
            return ("J", "in", ep[1])
        if ep[0] == "bout":
            return ("J", "out", ep[1])
        return (ep[0], rename[ep[1]], ep[2])

    edges = [(host_plug(s), host_plug(t)) for s, t in diagram.wires]
    edges += [(repl_plug(s), repl_plug(t)) for s, t in replacement.wires]

    loops: list[str] = []

    def fresh_loop_id():
        lid = f"{node_id}:o{len(loops)}"
        loops.append(lid)
        return lid

    wires, extra = _resolve_junctions(edges, fresh_loop_id)
    nodes = {n: k for n, k in diagram.nodes.items() if n != node_id}
    nodes.update({rename[x]: k for x, k in replacement.nodes.items()})
    for lid in extra:
        nodes[lid] = ZBox(ones_phase(diagram.dimension), 1, 1)
        wires.append((("out", lid, 0), ("in", lid, 0)))
    return Diagram(diagram.dimension, nodes, wires, diagram.n_in, diagram.n_out)


# ---------------------------------------------------------------------------
# composition


def _renumber(diagram: Diagram, start: int) -> tuple[dict, int]:
    order = sorted(diagram.nodes)
    return {x: f"n{start + i}" for i, x in enumerate(order)}, start + len(order)


def compose_seq(first: Diagram, second: Diagram) -> Diagram:
    """Plug ``first``'s outputs into ``second``'s inputs, position by position.

    The interpretation is matrix(second) @ matrix(first).
    """
    if first.dimension != second.dimension:
        raise ValueError("dimension mismatch in compose_seq")
    if first.n_out != second.n_in:
        raise ValueError(
            f"cannot compose {first.n_in} -> {first.n_out} with "
            f"{second.n_in} -> {second.n_out}"
        )
    ren1, nxt = _renumber(first, 0)
    ren2, _ = _renumber(second, nxt)

    def plug1(ep):
        if ep[0] == "bout":
            return ("J", ep[1])
        if ep[0] in ("in", "out"):
            return (ep[0], ren1[ep[1]], ep[2])
        return ep

    def plug2(ep):
        if ep[0] == "bin":
            return ("J", ep[1])
        if ep[0] in ("in", "out"):
            return (ep[0], ren2[ep[1]], ep[2])
        return ep

    edges = [(plug1(s), plug1(t)) for s, t in first.wires]
    edges += [(plug2(s), plug2(t)) for s, t in second.wires]
    wires, extra = _resolve_junctions(edges, lambda: None)
    if extra:
        raise AssertionError("sequential composition cannot close loops")
    nodes = {ren1[x]: k for x, k in first.nodes.items()}
    nodes.update({ren2[x]: k for x, k in second.nodes.items()})
    return Diagram(first.dimension, nodes, wires, first.n_in, second.n_out)


def compose_par(left: Diagram, right: Diagram) -> Diagram:
    """Place two diagrams side by side; ``left`` owns the lower positions."""
    if left.dimension != right.dimension:
        raise ValueError("dimension mismatch in compose_par")
    ren1, nxt = _renumber(left, 0)
    ren2, _ = _renumber(right, nxt)

    def shift(ep, ren, din, dout):
        if ep[0] == "bin":
            return ("bin", ep[1] + din)
        if ep[0] == "bout":
            return ("bout", ep[1] + dout)
        return (ep[0], ren[ep[1]], ep[2])

    wires = [
        (shift(s, ren1, 0, 0), shift(t, ren1, 0, 0)) for s, t in left.wires
    ]
    wires += [
        (shift(s, ren2, left.n_in, left.n_out), shift(t, ren2, left.n_in, left.n_out))
        for s, t in right.wires
    ]
    nodes = {ren1[x]: k for x, k in left.nodes.items()}
    nodes.update({ren2[x]: k for x, k in right.nodes.items()})
    return Diagram(
        left.dimension, nodes, wires, left.n_in + right.n_in, left.n_out + right.n_out
    )


def bend_to_state(diagram: Diagram) -> Diagram:
    """Turn every input into an output by feeding it from a cap.

    The new outputs are appended after the existing ones, in input order, so
    the state's coefficients are ``matrix.ravel()`` of the original map.
    Idempotent: a diagram with no inputs is returned unchanged.
    """
    if diagram.n_in == 0:
        return diagram
    d = diagram.dimension
    nodes = dict(diagram.nodes)
    cap_ids = []
    for i in range(diagram.n_in):
        cid = f"bend{i}"
        while cid in nodes:
            cid += "_"
        nodes[cid] = ZBox(ones_phase(d), 0, 2)
        cap_ids.append(cid)
    wires = []
    for src, snk in diagram.wires:
        if src[0] == "bin":
            src = ("out", cap_ids[src[1]], 0)
        wires.append((src, snk))
    for i, cid in enumerate(cap_ids):
        wires.append((("out", cid, 1), ("bout", diagram.n_out + i)))
    return Diagram(d, nodes, wires, 0, diagram.n_out + diagram.n_in)


# ---------------------------------------------------------------------------
# derived-generator expansion


def _zstate(d: int, phase) -> Diagram:
    return make_generator(ZBox(phase, 0, 1), d)


def _zeffect(d: int, phase) -> Diagram:
    return make_generator(ZBox(phase, 1, 0), d)


def _par_power(diagram: Diagram, count: int, dimension: int) -> Diagram:
    out = identity_diagram(dimension, 0)
    for _ in range(count):
        out = compose_par(out, diagram)
    return out


def expansion(kind, dimension: int) -> "Diagram | None":
    """One-step rewrite of a derived generator into more basic ones.

    Returns None for the core kinds (green boxes, the Fourier box, the binary
    W node).  The result may itself contain derived kinds; iterate to reach
    core-only form.
    """
    d = dimension
    if isinstance(kind, CORE_KINDS):
        return None
    if isinstance(kind, HadamardDagger):
        h = make_generator(Hadamard(), d)
        return compose_seq(compose_seq(h, h), h)
    if isinstance(kind, GreenSpider):
        phase = tuple(cmath.exp(1j * a) for a in kind.angles)
        return make_generator(ZBox(phase, kind.n_in, kind.n_out), d)
    if isinstance(kind, LabeledBox):
        phase = one_hot_phase(d, d - 1, kind.value)
        return make_generator(ZBox(phase, kind.n_in, kind.n_out), d)
    if isinstance(kind, ScalarBox):
        return make_generator(ZBox(one_hot_phase(d, d - 1, kind.value - 1), 0, 0), d)
    if isinstance(kind, PinkSpider):
        n, m, j = kind.n_in, kind.n_out, kind.label
        ins = _par_power(make_generator(HadamardDagger(), d), n, d)
        outs = _par_power(make_generator(Hadamard(), d), m, d)
        mid = make_generator(ZBox(fourier_phase(d, j), n, m), d)
        body = compose_seq(compose_seq(ins, mid), outs)
        scale = make_generator(ScalarBox(d ** ((m + n - 2) / 2)), d)
        return compose_par(scale, body)
    if isinstance(kind, Dualiser):
        pink_cap = make_generator(PinkSpider(0, 0, 2), d)
        first = compose_par(pink_cap, identity_diagram(d))
        second = compose_par(identity_diagram(d), cup_diagram(d))
        return compose_seq(first, second)
    if isinstance(kind, Multiplier):
        w = kind.weight % d
        split = make_generator(ZBox(ones_phase(d), 1, w), d)
        merge = make_generator(PinkSpider(0, w, 1), d)
        return compose_seq(split, merge)
    if isinstance(kind, Triangle):
        return compose_seq(
            make_generator(WNode(), d),
            compose_par(_zeffect(d, ones_phase(d)), identity_diagram(d)),
        )
    if isinstance(kind, TriangleInverse):
        return compose_seq(
            make_generator(WNode(), d),
            compose_par(_zeffect(d, constant_phase(d, -1)), identity_diagram(d)),
        )
    if isinstance(kind, VBox):
        lift = compose_par(_zstate(d, ones_phase(d)), identity_diagram(d))
        return compose_seq(lift, make_generator(WNodeGeneral(2, transposed=True), d))
    if isinstance(kind, WNodeGeneral):
        k = kind.legs
        if k == 1:
            return identity_diagram(d)
        if not kind.transposed:
            if k == 2:
                return make_generator(WNode(), d)
            rest = make_generator(WNodeGeneral(k - 1), d)
            return compose_seq(
                make_generator(WNode(), d), compose_par(rest, identity_diagram(d))
            )
        # transpose via one cap and k cups around the forward node
        nodes = {"c": ZBox(ones_phase(d), 0, 2), "w": WNodeGeneral(k)}
        wires = [(("out", "c", 0), ("bout", 0)), (("out", "c", 1), ("in", "w", 0))]
        for i in range(k):
            uid = f"u{i}"
            nodes[uid] = ZBox(ones_phase(d), 2, 0)
            wires.append((("out", "w", i), ("in", uid, 0)))
            wires.append((("bin", i), ("in", uid, 1)))
        return Diagram(d, nodes, wires, k, 1)
    raise TypeError(f"unknown generator kind {type(kind).__name__}")


def expand_derived(diagram: Diagram) -> Diagram:
    """Rewrite until only green boxes, Fourier boxes, and binary W nodes remain."""
    work = diagram
    while True:
        target = None
        for nid in sorted(work.nodes):
            if not isinstance(work.nodes[nid], CORE_KINDS):
                target = nid
                break
        if target is None:
            return work
        repl = expansion(work.nodes[target], work.dimension)
        if repl is None:  # pragma: no cover
            raise AssertionError("core kind flagged as derived")
        work = replace_node(work, target, repl)


# ---------------------------------------------------------------------------
# a ready-made multi-party entangled state


def w_state_diagram(parties: int, dimension: int) -> Diagram:
    """Diagram whose state is sqrt(parties * (d - 1)) times the normalized
    single-excitation state shared over ``parties`` wires.

    Built from a W fan-out applied to the uniform nonzero-value state, which
    is itself produced by a Fourier box acting on a green state.
    """
    d = dimension
    seed = _zstate(d, constant_phase(d, -1 / (d - 1)))
    lifted = compose_seq(seed, make_generator(Hadamard(), d))
    spread = compose_seq(lifted, make_generator(WNodeGeneral(parties), d))
    scale = make_generator(ScalarBox((d - 1) / math.sqrt(d)), d)
    return compose_par(scale, spread)
