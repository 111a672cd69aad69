"""Exact matrix semantics of diagrams via tensor-network contraction.

Index convention (the single endianness rule of the package): boundary wire 0
is the *most significant* base-d digit of a row/column index, so a state on
wires (w0, w1) has its |x, y> coefficient at position x * d + y.

Matrices are complex128 with shape (d**n_out, d**n_in); a diagram with no
boundary wires interprets to a 1 x 1 matrix holding its scalar value.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from functools import lru_cache

import numpy as np

from .diagram import (
    CORE_KINDS,
    Diagram,
    Dualiser,
    GreenSpider,
    Hadamard,
    HadamardDagger,
    Identity,
    LabeledBox,
    Multiplier,
    PinkSpider,
    ScalarBox,
    Triangle,
    TriangleInverse,
    VBox,
    WNode,
    WNodeGeneral,
    ZBox,
    compose_par,
    compose_seq,
    expansion,
    identity_diagram,
    make_generator,
    ones_phase,
    replace_node,
    validate,
)

# dense per-node tensors above this entry count get expanded structurally
NODE_SIZE_CAP = 1 << 18


def _rep_index(value: int, legs: int, d: int) -> int:
    """Index of the basis vector with ``value`` on every one of ``legs`` wires."""
    return 0 if legs == 0 else value * (d**legs - 1) // (d - 1)


def _digit_sums(legs: int, d: int) -> np.ndarray:
    """Base-d digit sum (mod d) of every index on ``legs`` wires."""
    idx = np.arange(d**legs, dtype=np.int64)
    total = np.zeros_like(idx)
    for _ in range(legs):
        total += idx % d
        idx //= d
    return total % d


@lru_cache(maxsize=None)
def _semantics_cached(kind, d: int) -> np.ndarray:
    if isinstance(kind, (ZBox, GreenSpider, LabeledBox)):
        if isinstance(kind, GreenSpider):
            phase = tuple(np.exp(1j * a) for a in kind.angles)
        elif isinstance(kind, LabeledBox):
            phase = (0j,) * (d - 2) + (kind.value,)
        else:
            phase = kind.phase
        n, m = kind.n_in, kind.n_out
        mat = np.zeros((d**m, d**n), dtype=complex)
        for j in range(d):
            amp = 1 + 0j if j == 0 else phase[j - 1]
            mat[_rep_index(j, m, d), _rep_index(j, n, d)] += amp
        return mat
    if isinstance(kind, Hadamard):
        grid = np.outer(np.arange(d), np.arange(d)) % d
        return np.exp(2j * np.pi * grid / d) / math.sqrt(d)
    if isinstance(kind, HadamardDagger):
        return np.conj(_semantics_cached(Hadamard(), d))
    if isinstance(kind, WNode):
        return _semantics_cached(WNodeGeneral(2), d)
    if isinstance(kind, WNodeGeneral):
        k = kind.legs
        if d**(k + 1) > NODE_SIZE_CAP:
            raise ValueError(
                f"dense tensor for a {k}-leg W node at dimension {d} is too large; "
                "interpret() expands such nodes before contracting"
            )
        mat = np.zeros((d**k, d), dtype=complex)
        mat[0, 0] = 1
        for i in range(1, d):
            for slot in range(k):
                mat[i * d ** (k - 1 - slot), i] = 1
        return mat.T if kind.transposed else mat
    if isinstance(kind, PinkSpider):
        n, m = kind.n_in, kind.n_out
        if d**(n + m) > NODE_SIZE_CAP:
            raise ValueError(
                f"dense tensor for a {n} -> {m} pink spider at dimension {d} is too "
                "large; interpret() expands such nodes before contracting"
            )
        outs = _digit_sums(m, d)
        ins = _digit_sums(n, d)
        return (
            ((outs[:, None] + kind.label) % d == ins[None, :] % d)
        ).astype(complex)
    if isinstance(kind, Dualiser):
        mat = np.zeros((d, d), dtype=complex)
        mat[np.arange(d), (-np.arange(d)) % d] = 1
        return mat
    if isinstance(kind, Multiplier):
        mat = np.zeros((d, d), dtype=complex)
        mat[(kind.weight * np.arange(d)) % d, np.arange(d)] = 1
        return mat
    if isinstance(kind, Triangle):
        mat = np.eye(d, dtype=complex)
        mat[0, 1:] = 1
        return mat
    if isinstance(kind, TriangleInverse):
        mat = np.eye(d, dtype=complex)
        mat[0, 1:] = -1
        return mat
    if isinstance(kind, VBox):
        mat = np.eye(d, dtype=complex)
        mat[1:, 0] = 1
        return mat
    if isinstance(kind, ScalarBox):
        return np.array([[kind.value]], dtype=complex)
    if isinstance(kind, Identity):
        return np.eye(d, dtype=complex)
    raise TypeError(f"unknown generator kind {type(kind).__name__}")


def semantics(kind, dimension: int) -> np.ndarray:
    """Closed-form matrix of a single generator, shape (d**n_out, d**n_in)."""
    out = _semantics_cached(kind, int(dimension))
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# size control: split oversized nodes into chains of small ones


def _split_step(kind, d: int) -> Diagram:
    """One exact decomposition step for a node whose dense tensor is too big."""
    if isinstance(kind, (WNodeGeneral, GreenSpider, LabeledBox)):
        # the W recursion, or conversion to a plain green box
        repl = expansion(kind, d)
        if repl is None:  # pragma: no cover
            raise AssertionError("core kind cannot be split via expansion")
        return repl
    if isinstance(kind, PinkSpider):
        n, m, j = kind.n_in, kind.n_out, kind.label
        if m >= n and m >= 2:
            first = make_generator(PinkSpider(j, n, m - 1), d)
            splitter = make_generator(PinkSpider(0, 1, 2), d)
            return compose_seq(
                first, compose_par(splitter, identity_diagram(d, m - 2))
            )
        merger = make_generator(PinkSpider(0, 2, 1), d)
        rest = make_generator(PinkSpider(j, n - 1, m), d)
        return compose_seq(compose_par(merger, identity_diagram(d, n - 2)), rest)
    if isinstance(kind, ZBox):
        n, m = kind.n_in, kind.n_out
        if m >= n and m >= 2:
            first = make_generator(ZBox(kind.phase, n, m - 1), d)
            copier = make_generator(ZBox(ones_phase(d), 1, 2), d)
            return compose_seq(first, compose_par(copier, identity_diagram(d, m - 2)))
        merger = make_generator(ZBox(ones_phase(d), 2, 1), d)
        rest = make_generator(ZBox(kind.phase, n - 1, m), d)
        return compose_seq(compose_par(merger, identity_diagram(d, n - 2)), rest)
    raise ValueError(
        f"node of kind {type(kind).__name__} is too large to contract"
    )


def _prepare(diagram: Diagram, cap: int) -> Diagram:
    """Make every node small enough and remove boundary-to-boundary wires."""
    d = diagram.dimension
    work = diagram
    passthrough = [w for w in work.wires if w[0][0] == "bin" and w[1][0] == "bout"]
    if passthrough:
        nodes = dict(work.nodes)
        wires = [w for w in work.wires if w not in passthrough]
        for i, (src, snk) in enumerate(sorted(passthrough)):
            nid = f"pass{i}"
            while nid in nodes:
                nid += "_"
            nodes[nid] = ZBox(ones_phase(d), 1, 1)
            wires.append((src, ("in", nid, 0)))
            wires.append((("out", nid, 0), snk))
        work = Diagram(d, nodes, wires, work.n_in, work.n_out)
    while True:
        big = None
        for nid in sorted(work.nodes):
            kind = work.nodes[nid]
            if d ** (kind.n_in + kind.n_out) > cap:
                big = nid
                break
        if big is None:
            return work
        work = replace_node(work, big, _split_step(work.nodes[big], d))


# ---------------------------------------------------------------------------
# sequential contraction

# hard stop before an intermediate tensor can swallow the machine; the fold
# order keeps honest diagrams far below this
FRONTIER_ENTRY_CAP = 1 << 26


def _fold_order(work: Diagram) -> list:
    """Contraction order from a spectral linear arrangement.

    Nodes are laid on a line by the Fiedler vector of the wire graph's
    Laplacian, the standard minimum-linear-arrangement heuristic. Short wires
    mean the running tensor's open-wire frontier tracks the graph's cut width
    instead of its node count. Only the undirected shape matters, so cycles,
    or two chains crossing the same region in opposite directions, embed just
    as well as straight pipelines.
    """
    names = sorted(work.nodes)
    index = {nid: i for i, nid in enumerate(names)}
    n = len(names)
    weight = np.zeros((n, n))
    for src, snk in work.wires:
        ends = [ep[1] for ep in (src, snk) if ep[0] in ("in", "out")]
        if len(ends) == 2 and ends[0] != ends[1]:
            i, j = index[ends[0]], index[ends[1]]
            weight[i, j] += 1.0
            weight[j, i] += 1.0
    pos = np.zeros(n)
    unvisited = set(range(n))
    while unvisited:
        root = min(unvisited)
        comp = [root]
        unvisited.discard(root)
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for j in np.nonzero(weight[i])[0]:
                j = int(j)
                if j in unvisited:
                    unvisited.discard(j)
                    comp.append(j)
                    queue.append(j)
        comp.sort()
        if len(comp) > 2:
            sub = weight[np.ix_(comp, comp)]
            lap = np.diag(sub.sum(axis=1)) - sub
            fiedler = np.linalg.eigh(lap)[1][:, 1]
            ranked = sorted(range(len(comp)), key=lambda k: (fiedler[k], comp[k]))
            for r, k in enumerate(ranked):
                pos[comp[k]] = r
        else:
            for r, i in enumerate(comp):
                pos[i] = r

    # connected sweep along the arrangement: always fold the earliest node
    # touching the running block, so nothing enters as a bare outer product
    # while its neighbors wait
    order: list = []
    folded = np.zeros(n, dtype=bool)
    ready: list = []
    left = set(range(n))
    while left:
        if not ready:
            nxt = min(left, key=lambda i: (pos[i], i))
            heapq.heappush(ready, (pos[nxt], nxt))
        _, i = heapq.heappop(ready)
        if folded[i]:
            continue
        folded[i] = True
        left.discard(i)
        order.append(names[i])
        for j in np.nonzero(weight[i])[0]:
            j = int(j)
            if not folded[j]:
                heapq.heappush(ready, (pos[j], j))
    return order


def _trace_repeats(arr: np.ndarray, tags: list) -> tuple[np.ndarray, list]:
    while True:
        dup = None
        for i, t in enumerate(tags):
            if t in tags[i + 1 :]:
                dup = (i, i + 1 + tags[i + 1 :].index(t))
                break
        if dup is None:
            return arr, tags
        i, j = dup
        arr = np.trace(arr, axis1=i, axis2=j)
        tags = [t for k, t in enumerate(tags) if k not in (i, j)]


def interpret(diagram: Diagram) -> np.ndarray:
    """Contract a diagram to its matrix, shape (d**n_out, d**n_in)."""
    errs = validate(diagram)
    if errs:
        raise ValueError("cannot interpret an invalid diagram: " + "; ".join(errs))
    d = diagram.dimension
    # split to at most 4 legs per node: the fold's peak size is set by how
    # many wires a single step can open, not by what fits in memory
    work = _prepare(diagram, min(NODE_SIZE_CAP, d**4))

    tag_of: dict[tuple, tuple] = {}
    for idx, (src, snk) in enumerate(sorted(work.wires)):
        if src[0] == "bin":
            tag = ("bin", src[1])
        elif snk[0] == "bout":
            tag = ("bout", snk[1])
        else:
            tag = ("w", idx)
        for ep in (src, snk):
            if ep[0] in ("in", "out"):
                tag_of[ep] = tag

    result = np.array(1 + 0j)
    open_tags: list = []
    for nid in _fold_order(work):
        kind = work.nodes[nid]
        legs = kind.n_out + kind.n_in
        arr = np.asarray(semantics(kind, d)).reshape((d,) * legs)
        tags = [tag_of[("out", nid, p)] for p in range(kind.n_out)]
        tags += [tag_of[("in", nid, p)] for p in range(kind.n_in)]
        arr, tags = _trace_repeats(arr, tags)
        shared = [t for t in open_tags if t in tags]
        grown = len(open_tags) + len(tags) - 2 * len(shared)
        if d**grown > FRONTIER_ENTRY_CAP:
            raise RuntimeError(
                f"contraction frontier would need {d}**{grown} entries; "
                "the diagram is too entangled for the sequential fold"
            )
        axes_r = [open_tags.index(t) for t in shared]
        axes_a = [tags.index(t) for t in shared]
        result = np.tensordot(result, arr, axes=(axes_r, axes_a))
        open_tags = [t for t in open_tags if t not in shared] + [
            t for t in tags if t not in shared
        ]

    wanted = [("bout", k) for k in range(work.n_out)]
    wanted += [("bin", k) for k in range(work.n_in)]
    perm = [open_tags.index(t) for t in wanted]
    result = np.transpose(result, perm)
    return np.ascontiguousarray(
        result.reshape(d**work.n_out, d**work.n_in), dtype=complex
    )


def matrices_equal(a, b, tol: float = 1e-9) -> bool:
    """Entrywise comparison at absolute tolerance; shapes must match exactly."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        return False
    if a.size == 0:
        return True
    return bool(np.max(np.abs(a - b)) <= tol)
