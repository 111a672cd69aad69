"""Named rewrite rules, numerical soundness checks, and anchored rewriting.

Every registry entry carries a builder that instantiates both sides of the
equation as concrete diagrams for a given qudit dimension and parameter set,
plus a sampler that draws random parameters.  ``check_soundness`` interprets
both sides and reports the worst entrywise deviation over many samples, so
the whole registry is validated against the tensor semantics rather than
trusted.  ``apply_at`` rewrites an anchored occurrence of a rule's pattern
inside a larger diagram.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable

import numpy as np

from .diagram import (
    Diagram,
    Dualiser,
    GreenSpider,
    Hadamard,
    HadamardDagger,
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
    _resolve_junctions,
    bend_to_state,
    compose_par,
    compose_seq,
    fourier_phase,
    identity_diagram,
    make_generator,
    one_hot_phase,
    ones_phase,
    permutation_diagram,
    zeros_phase,
)
from .interpret import interpret, matrices_equal
from .normalform import (
    NormalForm,
    emit_diagram,
    generator_nf,
    matrix_to_nf,
    partial_trace_nf,
    tensor_nf,
)

__all__ = [
    "RewriteRule",
    "SoundnessReport",
    "all_rules",
    "apply_at",
    "check_soundness",
    "get_rule",
    "random_phase",
    "verify_all",
]


# ---------------------------------------------------------------------------
# rule objects


@dataclass(frozen=True)
class RewriteRule:
    """A two-sided diagram equation, parameterized by dimension and params."""

    name: str
    tier: str  # "axiom" or "derived"
    doc: str
    min_dimension: int = 2
    _sample: Callable = field(default=None, repr=False, compare=False)
    _build: Callable = field(default=None, repr=False, compare=False)

    def sample(self, dimension: int, rng) -> dict:
        """Draw a random parameter set valid at this dimension."""
        if dimension < self.min_dimension:
            raise ValueError(f"rule {self.name} needs dimension >= {self.min_dimension}")
        return self._sample(dimension, rng)

    def instantiate(self, dimension: int, params: dict | None = None):
        """Build (lhs, rhs) diagrams for one parameter set."""
        if dimension < self.min_dimension:
            raise ValueError(f"rule {self.name} needs dimension >= {self.min_dimension}")
        if params is None:
            params = self.sample(dimension, np.random.default_rng(0))
        return self._build(dimension, params)

    def lhs(self, dimension: int, params: dict | None = None) -> Diagram:
        return self.instantiate(dimension, params)[0]

    def rhs(self, dimension: int, params: dict | None = None) -> Diagram:
        return self.instantiate(dimension, params)[1]


@dataclass(frozen=True)
class SoundnessReport:
    rule: str
    dimension: int
    samples: int
    max_deviation: float
    passed: bool


_REGISTRY: dict[str, RewriteRule] = {}


def _register(name, tier, doc, sample, build, min_dimension=2):
    _REGISTRY[name] = RewriteRule(name, tier, doc, min_dimension, sample, build)


def all_rules() -> list[RewriteRule]:
    return list(_REGISTRY.values())


def get_rule(name: str) -> RewriteRule:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown rule {name!r}") from None


# ---------------------------------------------------------------------------
# samplers


def _disk(rng) -> complex:
    return complex(math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random()))


def random_phase(dimension: int, rng, nonzero=()) -> tuple:
    """Random amplitude vector for the d-1 free slots of a green box.

    Mixes smooth unit-disk samples with exact special values (0, 1, -1, a
    root of unity) so rules get exercised at their degenerate points too.
    ``nonzero`` lists 1-based slots that must not be zero.
    """
    special = np.array([0.0, 1.0, -1.0, np.exp(2j * np.pi / dimension)], dtype=complex)
    vals = []
    for _ in range(dimension - 1):
        if rng.random() < 0.3:
            vals.append(complex(rng.choice(special)))
        else:
            vals.append(_disk(rng))
    for slot in nonzero:
        while vals[slot - 1] == 0:
            vals[slot - 1] = _disk(rng)
    return tuple(vals)


def _no_params(d, rng):
    return {}


# ---------------------------------------------------------------------------
# builder shorthands


def _g(kind, d):
    return make_generator(kind, d)


def _seq(*parts):
    return reduce(compose_seq, parts)


def _par(*parts):
    return reduce(compose_par, parts)


def _idn(d, n=1):
    return identity_diagram(d, n)


def _zb(d, phase, n, m):
    return _g(ZBox(tuple(phase), n, m), d)


def _zstate(d, phase):
    return _zb(d, phase, 0, 1)


def _zeffect(d, phase):
    return _zb(d, phase, 1, 0)


def _pink(d, j, n, m):
    return _g(PinkSpider(j, n, m), d)


def _pink_state(d, j):
    return _pink(d, j, 0, 1)


def _pink_effect(d, j):
    return _pink(d, j, 1, 0)


def _kbox(d, j):
    return _pink(d, j, 1, 1)


def _mult(d, w):
    return _g(Multiplier(w), d)


def _dual(d):
    return _g(Dualiser(), d)


def _h(d):
    return _g(Hadamard(), d)


def _hdag(d):
    return _g(HadamardDagger(), d)


def _w(d):
    return _g(WNode(), d)


def _wk(d, k):
    return _g(WNodeGeneral(k), d)


def _wt(d, k):
    return _g(WNodeGeneral(k, True), d)


def _scal(d, v):
    return _g(ScalarBox(v), d)


def _cap(d):
    return _zb(d, ones_phase(d), 0, 2)


def _cup(d):
    return _zb(d, ones_phase(d), 2, 0)


def _par_power(diagram, count, d):
    out = identity_diagram(d, 0)
    for _ in range(count):
        out = compose_par(out, diagram)
    return out


def _shifted_ratio_vector(a, j, d):
    """Divide the j-shifted amplitude vector by its pivot entry."""
    den = 1.0 if j % d == 0 else a[(d - j) % d - 1]
    out = []
    for x in range(1, d):
        idx = (x - j) % d
        out.append((1.0 if idx == 0 else a[idx - 1]) / den)
    return tuple(out)


def _reindexed(a, w, d):
    """Amplitude vector b with b_x = a_{w x mod d} (slot 0 reads as 1)."""
    out = []
    for x in range(1, d):
        idx = (w * x) % d
        out.append(1.0 if idx == 0 else a[idx - 1])
    return tuple(out)


# ---------------------------------------------------------------------------
# named rules


def _s_s1(d, rng):
    return {
        "a": random_phase(d, rng),
        "b": random_phase(d, rng),
        "n1": int(rng.integers(0, 3)),
        "m1": int(rng.integers(1, 3)),
        "n2": int(rng.integers(1, 3)),
        "m2": int(rng.integers(0, 3)),
    }


def _joined_pair(d, ka, kb):
    """Two nodes joined by one wire: last output of `ka` into input 0 of `kb`.

    Boundary order: a's inputs, then b's remaining inputs; a's remaining
    outputs, then b's outputs.
    """
    n1, m1, n2, m2 = ka.n_in, ka.n_out, kb.n_in, kb.n_out
    nodes = {"za": ka, "zb": kb}
    wires = [(("out", "za", m1 - 1), ("in", "zb", 0))]
    for p in range(n1):
        wires.append((("bin", p), ("in", "za", p)))
    for p in range(1, n2):
        wires.append((("bin", n1 + p - 1), ("in", "zb", p)))
    for q in range(m1 - 1):
        wires.append((("out", "za", q), ("bout", q)))
    for q in range(m2):
        wires.append((("out", "zb", q), ("bout", m1 - 1 + q)))
    return Diagram(d, nodes, wires, n1 + n2 - 1, m1 + m2 - 1)


def _b_s1(d, p):
    a, b = p["a"], p["b"]
    n1, m1, n2, m2 = p["n1"], p["m1"], p["n2"], p["m2"]
    lhs = _joined_pair(d, ZBox(a, n1, m1), ZBox(b, n2, m2))
    fused = tuple(x * y for x, y in zip(a, b))
    rhs = _zb(d, fused, n1 + n2 - 1, m1 + m2 - 1)
    return lhs, rhs


_register(
    "S1",
    "axiom",
    "Two green boxes joined by one wire fuse; slot amplitudes multiply.",
    _s_s1,
    _b_s1,
)

_register(
    "S2",
    "axiom",
    "The 1-to-1 green box with all amplitudes 1 is a plain wire.",
    _no_params,
    lambda d, p: (_zb(d, ones_phase(d), 1, 1), _idn(d)),
)


def _b_s3(d, p):
    if p["shape"] == 0:
        lhs = _seq(_par(_cap(d), _idn(d)), _par(_idn(d), _cup(d)))
    else:
        lhs = _seq(_par(_idn(d), _cap(d)), _par(_cup(d), _idn(d)))
    return lhs, _idn(d)


_register(
    "S3",
    "derived",
    "A wire bent up and back down (either snake shape) straightens out.",
    lambda d, rng: {"shape": int(rng.integers(0, 2))},
    _b_s3,
)


def _b_s4(d, p):
    a, n, m = p["a"], p["n"], p["m"]
    nodes = {"z": ZBox(a, n, m), "cup": ZBox(ones_phase(d), 2, 0)}
    wires = [(("out", "z", m - 1), ("in", "cup", 0)), (("bin", n), ("in", "cup", 1))]
    for pth in range(n):
        wires.append((("bin", pth), ("in", "z", pth)))
    for q in range(m - 1):
        wires.append((("out", "z", q), ("bout", q)))
    lhs = Diagram(d, nodes, wires, n + 1, m - 1)
    rhs = _zb(d, a, n + 1, m - 1)
    return lhs, rhs


_register(
    "S4",
    "derived",
    "Bending a green box output down with a cup turns it into an input.",
    lambda d, rng: {
        "a": random_phase(d, rng),
        "n": int(rng.integers(0, 3)),
        "m": int(rng.integers(1, 3)),
    },
    _b_s4,
)

_register(
    "Ept",
    "axiom",
    "The all-ones green effect absorbs the zero pink state (value 1).",
    _no_params,
    lambda d, p: (
        _seq(_pink_state(d, 0), _zeffect(d, ones_phase(d))),
        identity_diagram(d, 0),
    ),
)

_register(
    "Zer",
    "axiom",
    "The green state with all slot amplitudes 0 is the zero pink state.",
    _no_params,
    lambda d, p: (_zstate(d, zeros_phase(d)), _pink_state(d, 0)),
)


def _b_ad(d, p):
    a, b = p["a"], p["b"]
    lhs = _seq(_par(_zstate(d, a), _zstate(d, b)), _wt(d, 2))
    rhs = _zstate(d, tuple(x + y for x, y in zip(a, b)))
    return lhs, rhs


_register(
    "AD",
    "axiom",
    "The collapsing W node adds green states slotwise.",
    lambda d, rng: {"a": random_phase(d, rng), "b": random_phase(d, rng)},
    _b_ad,
)


def _s_p1(d, rng):
    j = int(rng.integers(1, d))
    return {
        "j": j,
        "a": random_phase(d, rng, nonzero=((d - j) % d,) if j % d else ()),
        "n": int(rng.integers(0, 3)),
        "m": int(rng.integers(0, 3)),
    }


def _b_p1(d, p):
    a, j, n, m = p["a"], p["j"], p["n"], p["m"]
    lhs = _seq(_par_power(_kbox(d, j), n, d), _zb(d, a, n, m))
    pivot = 1.0 if j % d == 0 else a[(d - j) % d - 1]
    rhs = _par(
        _scal(d, pivot),
        _seq(_zb(d, _shifted_ratio_vector(a, j, d), n, m), _par_power(_kbox(d, j), m, d)),
    )
    return lhs, rhs


_register(
    "P1",
    "axiom",
    "Pink shift boxes on every input push through a green box, leaving the "
    "shifted/normalized box, shift boxes on every output, and a pivot scalar.",
    _s_p1,
    _b_p1,
)


def _b_k0(d, p):
    a, m = p["a"], p["m"]
    lhs = _seq(_pink_state(d, 0), _zb(d, a, 1, m))
    rhs = _par_power(_pink_state(d, 0), m, d)
    return lhs, rhs


_register(
    "K0",
    "axiom",
    "A green box copies the zero pink state onto each output.",
    lambda d, rng: {"a": random_phase(d, rng), "m": int(rng.integers(0, 4))},
    _b_k0,
)


def _b_hopf(d, p):
    lhs = _seq(_zb(d, ones_phase(d), 1, d), _pink(d, 0, d, 1))
    rhs = _seq(_zeffect(d, ones_phase(d)), _pink_state(d, 0))
    return lhs, rhs


_register(
    "Hopf",
    "derived",
    "A green copy feeding a pink adder through d parallel wires disconnects.",
    _no_params,
    _b_hopf,
)

_register(
    "Hdag",
    "derived",
    "The conjugate Fourier box equals three Fourier boxes in a row.",
    _no_params,
    lambda d, p: (_hdag(d), _seq(_h(d), _h(d), _h(d))),
)


def _s_hx(d, rng):
    return {
        "j": int(rng.integers(0, d)),
        "n": int(rng.integers(0, 3)),
        "m": int(rng.integers(0, 3)),
    }


def _b_hz(d, p):
    j, n, m = p["j"], p["n"], p["m"]
    lhs = _pink(d, j, n, m)
    rhs = _par(
        _scal(d, float(d) ** ((m + n - 2) / 2)),
        _seq(
            _par_power(_hdag(d), n, d),
            _zb(d, fourier_phase(d, j), n, m),
            _par_power(_h(d), m, d),
        ),
    )
    return lhs, rhs


_register(
    "HZ",
    "derived",
    "A pink spider is a green box with root-of-unity amplitudes, conjugated "
    "by Fourier boxes, times a dimension power.",
    _s_hx,
    _b_hz,
)


def _b_hx(d, p):
    j, n, m = p["j"], p["n"], p["m"]
    lhs = _seq(_par_power(_h(d), n, d), _pink(d, j, n, m), _par_power(_hdag(d), m, d))
    rhs = _par(
        _scal(d, float(d) ** ((m + n - 2) / 2)),
        _zb(d, fourier_phase(d, j), n, m),
    )
    return lhs, rhs


_register(
    "HX",
    "derived",
    "Conjugating a pink spider with Fourier boxes recovers the green box "
    "with root-of-unity amplitudes, times a dimension power.",
    _s_hx,
    _b_hx,
)

_register(
    "Du",
    "derived",
    "The dualiser is a pink cap bent around by a green cup.",
    _no_params,
    lambda d, p: (
        _dual(d),
        _seq(_par(_pink(d, 0, 0, 2), _idn(d)), _par(_idn(d), _cup(d))),
    ),
)


def _b_mu(d, p):
    w = p["w"]
    lhs = _mult(d, w)
    rhs = _seq(_zb(d, ones_phase(d), 1, w), _pink(d, 0, w, 1))
    return lhs, rhs


_register(
    "Mu",
    "derived",
    "The weight-w multiplier is a green copy into a pink adder over w wires.",
    lambda d, rng: {"w": int(rng.integers(0, d))},
    _b_mu,
)


def _b_wn(d, p):
    k = p["k"]
    lhs = _wk(d, k)
    rhs = _seq(_w(d), _par(_wk(d, k - 1), _idn(d)))
    return lhs, rhs


_register(
    "WN",
    "derived",
    "The k-output W node splits off one leg through a binary W node.",
    lambda d, rng: {"k": int(rng.integers(2, 5))},
    _b_wn,
)


def _b_yt(d, p):
    if p["which"] == 0:
        lhs = _g(Triangle(), d)
        eff = ones_phase(d)
    else:
        lhs = _g(TriangleInverse(), d)
        eff = tuple(-1.0 for _ in range(d - 1))
    rhs = _seq(_w(d), _par(_zeffect(d, eff), _idn(d)))
    return lhs, rhs


_register(
    "YT",
    "derived",
    "The triangle (or its inverse) is a W node with an all-ones (all minus "
    "ones) green effect on one leg.",
    lambda d, rng: {"which": int(rng.integers(0, 2))},
    _b_yt,
)


def _b_ww(d, p):
    proj = _seq(_wt(d, 2), _w(d))
    mixer = _seq(
        _par(_w(d), _w(d)),
        permutation_diagram(d, [0, 2, 1, 3]),
        _par(_wt(d, 2), _wt(d, 2)),
    )
    return _seq(proj, mixer), _seq(proj, proj)


_register(
    "WW",
    "axiom",
    "After the collapse-and-refan projection, the crossed double-W mixer "
    "acts like the projection again.",
    _no_params,
    _b_ww,
)


def _b_bzw(d, p):
    delta = _zb(d, ones_phase(d), 1, 2)
    lhs = _seq(_wt(d, 2), delta)
    rhs = _seq(
        _par(delta, delta),
        permutation_diagram(d, [0, 2, 1, 3]),
        _par(_wt(d, 2), _wt(d, 2)),
    )
    return lhs, rhs


_register(
    "BZW",
    "axiom",
    "Green copy commutes with the collapsing W node.",
    _no_params,
    _b_bzw,
)

_register(
    "Bs0",
    "axiom",
    "The W node copies the zero pink state.",
    _no_params,
    lambda d, p: (
        _seq(_pink_state(d, 0), _w(d)),
        _par(_pink_state(d, 0), _pink_state(d, 0)),
    ),
)


def _b_bsj(d, p):
    j = p["j"]
    lhs = _seq(_pink_state(d, j), _w(d), _par(_zeffect(d, ones_phase(d)), _idn(d)))
    rhs = _zstate(d, one_hot_phase(d, (d - j) % d))
    return lhs, rhs


_register(
    "Bsj",
    "axiom",
    "Splitting a shifted pink state on a W node and closing one leg with "
    "the all-ones effect yields a two-term green state.",
    lambda d, rng: {"j": int(rng.integers(1, d))},
    _b_bsj,
)


def _b_ta(d, p):
    adder = _pink(d, 0, 2, 1)
    lhs = _seq(_par(_idn(d), _w(d)), _par(adder, _idn(d)))
    rhs = _seq(
        permutation_diagram(d, [1, 0]),
        _par(_w(d), _idn(d)),
        _par(_idn(d), adder),
        permutation_diagram(d, [1, 0]),
    )
    return lhs, rhs


_register(
    "TA",
    "axiom",
    "The pink adder slides across a W split, up to swapping the two wires.",
    _no_params,
    _b_ta,
)


def _s_kz(d, rng):
    n = int(rng.integers(1, 4))
    return {"n": n, "e": tuple(int(rng.integers(1, d)) for _ in range(n))}


def _b_kz(d, p):
    n, e = p["n"], p["e"]
    nodes = {
        "wt": WNodeGeneral(n + 1, True),
        "pe": PinkSpider(d - 1, 1, 0),
        "pz": PinkSpider(0, n, 0),
    }
    wires = [(("bin", 0), ("in", "wt", 0)), (("out", "wt", 0), ("in", "pe", 0))]
    for i in range(1, n + 1):
        c, mu = f"c{i}", f"m{i}"
        nodes[c] = ZBox(ones_phase(d), 1, 2)
        nodes[mu] = Multiplier(e[i - 1])
        wires += [
            (("bin", i), ("in", c, 0)),
            (("out", c, 0), ("in", "wt", i)),
            (("out", c, 1), ("in", mu, 0)),
            (("out", mu, 0), ("in", "pz", i - 1)),
        ]
    lhs = Diagram(d, nodes, wires, n + 1, 0)
    rhs = _par(_pink_effect(d, d - 1), _par_power(_pink_effect(d, 0), n, d))
    return lhs, rhs


_register(
    "KZ",
    "axiom",
    "The collapse node with weighted side sums pins one wire to the top "
    "digit and the rest to zero.",
    _s_kz,
    _b_kz,
)


def _b_hd(d, p):
    lhs = _h(d)
    branches = [_seq(_h(d), _zb(d, one_hot_phase(d, r), 1, 1)) for r in range(1, d)]
    rhs = _par(
        _scal(d, float(d) ** ((d - 2) / 2)),
        _seq(_zb(d, ones_phase(d), 1, d - 1), _par(*branches), _wt(d, d - 1)),
    )
    return lhs, rhs


_register(
    "HD",
    "axiom",
    "The Fourier box splits into d-1 two-level branches recombined by the "
    "collapsing W node.",
    _no_params,
    _b_hd,
)


def _b_va(d, p):
    a = p["a"]
    lhs = _zstate(d, a)
    branches = [
        _seq(_g(LabeledBox(a[i - 1], 0, 1), d), _mult(d, d - i)) for i in range(1, d)
    ]
    rhs = _seq(_par(*branches), _wt(d, d - 1))
    return lhs, rhs


_register(
    "VA",
    "axiom",
    "A green state assembles from d-1 single-amplitude boxes routed through "
    "multipliers into the collapsing W node.",
    lambda d, rng: {"a": random_phase(d, rng)},
    _b_va,
)


def _b_vw(d, p):
    lhs = _seq(_wt(d, 2), _g(VBox(), d))
    rhs = _seq(_par(_g(VBox(), d), _idn(d)), _wt(d, 2))
    return lhs, rhs


_register(
    "VW",
    "axiom",
    "The V box slides through the collapsing W node onto one leg.",
    _no_params,
    _b_vw,
)


def _b_zv(d, p):
    a = p["a"]
    lhs = _seq(_zstate(d, a), _g(VBox(), d))
    rhs = _zstate(d, tuple(x + 1.0 for x in a))
    return lhs, rhs


_register(
    "ZV",
    "axiom",
    "The V box bumps every slot amplitude of a green state by one.",
    lambda d, rng: {"a": random_phase(d, rng)},
    _b_zv,
)


# ---------------------------------------------------------------------------
# derived lemmas


def _s_l1(d, rng):
    m = 2 if d <= 3 else 1
    size = d**m
    v = np.array([_disk(rng) for _ in range(size)], dtype=complex)
    for i in range(size):
        while v[i] == 0:
            v[i] = _disk(rng)
    return {"m": m, "v": tuple(v), "t": int(rng.integers(0, size - 1))}


def _b_l1(d, p):
    nf = matrix_to_nf(np.array(p["v"]), d, p["m"])
    order = list(range(len(p["v"])))
    t = p["t"]
    order[t], order[t + 1] = order[t + 1], order[t]
    return emit_diagram(nf, order=order), emit_diagram(nf)


_register(
    "Lemma1",
    "derived",
    "Swapping two neighboring amplitude boxes of a normal form changes "
    "nothing.",
    _s_l1,
    _b_l1,
)


def _s_l2(d, rng):
    arities = [(0, 1), (1, 1), (0, 2), (2, 1)] if d <= 3 else [(0, 1), (1, 1)]
    n, m = arities[int(rng.integers(0, len(arities)))]
    return {"a": random_phase(d, rng), "n": n, "m": m}


def _b_l2(d, p):
    kind = ZBox(p["a"], p["n"], p["m"])
    return bend_to_state(_g(kind, d)), emit_diagram(generator_nf(kind, d))


_register(
    "Lemma2",
    "derived",
    "A bent green box equals the normal form of its coefficient vector.",
    _s_l2,
    _b_l2,
)

_register(
    "Lemma3",
    "derived",
    "A bent W node equals the normal form of its coefficient vector.",
    _no_params,
    lambda d, p: (bend_to_state(_w(d)), emit_diagram(generator_nf(WNode(), d))),
)

_register(
    "Lemma4",
    "derived",
    "A bent Fourier box equals the normal form of its coefficient vector.",
    _no_params,
    lambda d, p: (bend_to_state(_h(d)), emit_diagram(generator_nf(Hadamard(), d))),
)


def _s_l5(d, rng):
    m = 3 if d <= 3 else 2
    size = d**m
    v = np.array([0.0 if rng.random() < 0.4 else _disk(rng) for _ in range(size)])
    s = int(rng.integers(0, m - 1))
    t = int(rng.integers(s + 1, m))
    return {"m": m, "v": tuple(v.astype(complex)), "s": s, "t": t}


def _cup_join(d, m, s, t):
    nodes = {"cup": ZBox(ones_phase(d), 2, 0)}
    wires = [(("bin", s), ("in", "cup", 0)), (("bin", t), ("in", "cup", 1))]
    pos = 0
    for i in range(m):
        if i in (s, t):
            continue
        wires.append((("bin", i), ("bout", pos)))
        pos += 1
    return Diagram(d, nodes, wires, m, m - 2)


def _b_l5(d, p):
    nf = matrix_to_nf(np.array(p["v"]), d, p["m"])
    lhs = compose_seq(emit_diagram(nf), _cup_join(d, p["m"], p["s"], p["t"]))
    rhs = emit_diagram(partial_trace_nf(nf, p["s"], p["t"]))
    return lhs, rhs


_register(
    "Lemma5",
    "derived",
    "Joining two wires of a normal form with a cup gives the normal form "
    "of the digit-matched sum.",
    _s_l5,
    _b_l5,
)


def _s_l6(d, rng):
    mk = lambda: tuple(0.0 if rng.random() < 0.25 else _disk(rng) for _ in range(d))
    return {"va": mk(), "vb": mk()}


def _b_l6(d, p):
    na = matrix_to_nf(np.array(p["va"]), d, 1)
    nb = matrix_to_nf(np.array(p["vb"]), d, 1)
    lhs = _par(emit_diagram(na), emit_diagram(nb))
    rhs = emit_diagram(tensor_nf(na, nb))
    return lhs, rhs


_register(
    "Lemma6",
    "derived",
    "Two normal forms side by side merge into the normal form of the "
    "tensor product.",
    _s_l6,
    _b_l6,
)


def _b_l7(d, p):
    a, j = p["a"], p["j"]
    lhs = _seq(_pink_state(d, j), _zeffect(d, a))
    rhs = _scal(d, a[(d - j) % d - 1])
    return lhs, rhs


_register(
    "Lemma7",
    "derived",
    "A green effect on a shifted pink state leaves the matching slot "
    "amplitude as a scalar.",
    lambda d, rng: {"a": random_phase(d, rng), "j": int(rng.integers(1, d))},
    _b_l7,
)

_register(
    "Lemma8",
    "derived",
    "Scalar boxes multiply.",
    lambda d, rng: {"x": _disk(rng), "y": _disk(rng)},
    lambda d, p: (_par(_scal(d, p["x"]), _scal(d, p["y"])), _scal(d, p["x"] * p["y"])),
)

_register(
    "Lemma9",
    "derived",
    "The 0-legged labeled box with label 0 has value 1 (empty diagram).",
    _no_params,
    lambda d, p: (_g(LabeledBox(0.0, 0, 0), d), identity_diagram(d, 0)),
)


def _s_l10(d, rng):
    x = 0.0
    while x == 0.0:
        x = _disk(rng)
    return {"x": x}


_register(
    "Lemma10",
    "derived",
    "A nonzero scalar cancels against its reciprocal.",
    _s_l10,
    lambda d, p: (_par(_scal(d, p["x"]), _scal(d, 1.0 / p["x"])), identity_diagram(d, 0)),
)

_register(
    "Lemma11",
    "derived",
    "The Fourier box and its conjugate cancel in either order.",
    lambda d, rng: {"which": int(rng.integers(0, 2))},
    lambda d, p: (
        _seq(_h(d), _hdag(d)) if p["which"] == 0 else _seq(_hdag(d), _h(d)),
        _idn(d),
    ),
)

_register(
    "Lemma12",
    "derived",
    "Two Fourier boxes make the dualiser.",
    _no_params,
    lambda d, p: (_seq(_h(d), _h(d)), _dual(d)),
)


def _s_l13(d, rng):
    return {
        "j": int(rng.integers(0, d)),
        "l": int(rng.integers(0, d)),
        "n1": int(rng.integers(0, 3)),
        "m1": int(rng.integers(1, 3)),
        "n2": int(rng.integers(1, 3)),
        "m2": int(rng.integers(0, 3)),
    }


def _b_l13(d, p):
    lhs = _joined_pair(
        d, PinkSpider(p["j"], p["n1"], p["m1"]), PinkSpider(p["l"], p["n2"], p["m2"])
    )
    rhs = _pink(d, (p["j"] + p["l"]) % d, p["n1"] + p["n2"] - 1, p["m1"] + p["m2"] - 1)
    return lhs, rhs


_register(
    "Lemma13",
    "derived",
    "Pink spiders joined by one wire fuse; shift labels add.",
    _s_l13,
    _b_l13,
)


def _b_l14(d, p):
    j, n, m = p["j"], p["n"], p["m"]
    nodes = {"pk": PinkSpider(j, n, m), "cup": PinkSpider(0, 2, 0)}
    wires = [(("out", "pk", m - 1), ("in", "cup", 0)), (("bin", n), ("in", "cup", 1))]
    for pth in range(n):
        wires.append((("bin", pth), ("in", "pk", pth)))
    for q in range(m - 1):
        wires.append((("out", "pk", q), ("bout", q)))
    lhs = Diagram(d, nodes, wires, n + 1, m - 1)
    rhs = _pink(d, j, n + 1, m - 1)
    return lhs, rhs


_register(
    "Lemma14",
    "derived",
    "Bending a pink spider output with a pink cup turns it into an input.",
    lambda d, rng: {
        "j": int(rng.integers(0, d)),
        "n": int(rng.integers(0, 3)),
        "m": int(rng.integers(1, 3)),
    },
    _b_l14,
)

_register(
    "Lemma15",
    "derived",
    "The all-ones effect on the all-ones state is the dimension scalar.",
    _no_params,
    lambda d, p: (
        _seq(_zstate(d, ones_phase(d)), _zeffect(d, ones_phase(d))),
        _scal(d, float(d)),
    ),
)

_register(
    "Lemma16",
    "derived",
    "The dualiser is an involution.",
    _no_params,
    lambda d, p: (_seq(_dual(d), _dual(d)), _idn(d)),
)

_register(
    "Lemma17",
    "derived",
    "The dualiser composed with the Fourier box (either order) is the "
    "conjugate Fourier box.",
    lambda d, rng: {"which": int(rng.integers(0, 2))},
    lambda d, p: (
        _seq(_h(d), _dual(d)) if p["which"] == 0 else _seq(_dual(d), _h(d)),
        _hdag(d),
    ),
)

_register(
    "Lemma18",
    "derived",
    "Conjugating a pink shift box by dualisers negates the shift.",
    lambda d, rng: {"j": int(rng.integers(0, d))},
    lambda d, p: (
        _seq(_dual(d), _kbox(d, p["j"]), _dual(d)),
        _kbox(d, (d - p["j"]) % d),
    ),
)

_register(
    "Lemma19",
    "derived",
    "The dualiser slides across a cap.",
    _no_params,
    lambda d, p: (
        _seq(_cap(d), _par(_dual(d), _idn(d))),
        _seq(_cap(d), _par(_idn(d), _dual(d))),
    ),
)

_register(
    "Lemma20",
    "derived",
    "Fourier boxes on both cap legs equal one dualiser on either leg.",
    _no_params,
    lambda d, p: (
        _seq(_cap(d), _par(_h(d), _h(d))),
        _seq(_cap(d), _par(_dual(d), _idn(d))),
    ),
)

_register(
    "Lemma21",
    "derived",
    "The Fourier box sends the all-ones state to the zero pink state, "
    "times the square root of the dimension.",
    _no_params,
    lambda d, p: (
        _seq(_zstate(d, ones_phase(d)), _h(d)),
        _par(_scal(d, math.sqrt(d)), _pink_state(d, 0)),
    ),
)

_register(
    "Lemma22",
    "derived",
    "The Fourier box sends the zero pink state to the all-ones state over "
    "the square root of the dimension.",
    _no_params,
    lambda d, p: (
        _seq(_pink_state(d, 0), _h(d)),
        _par(_scal(d, 1.0 / math.sqrt(d)), _zstate(d, ones_phase(d))),
    ),
)

_register(
    "Lemma23",
    "derived",
    "A multiplier commutes with a pink shift box, scaling the shift.",
    lambda d, rng: {"j": int(rng.integers(0, d)), "w": int(rng.integers(0, d))},
    lambda d, p: (
        _seq(_kbox(d, p["j"]), _mult(d, p["w"])),
        _seq(_mult(d, p["w"]), _kbox(d, (p["w"] * p["j"]) % d)),
    ),
)


def _b_l24(d, p):
    a, w = p["a"], p["w"]
    lhs = _seq(_mult(d, w), _zb(d, a, 1, 1))
    rhs = _seq(_zb(d, _reindexed(a, w, d), 1, 1), _mult(d, w))
    return lhs, rhs


_register(
    "Lemma24",
    "derived",
    "A diagonal green box commutes with a multiplier after reindexing its "
    "amplitude slots by the weight.",
    lambda d, rng: {"a": random_phase(d, rng), "w": int(rng.integers(0, d))},
    _b_l24,
)

_register(
    "Lemma25",
    "derived",
    "Dualisers on all three legs of a W node cancel.",
    _no_params,
    lambda d, p: (_seq(_dual(d), _w(d), _par(_dual(d), _dual(d))), _w(d)),
)

_register(
    "Lemma26",
    "derived",
    "The dualiser reverses a green state's amplitude vector.",
    lambda d, rng: {"a": random_phase(d, rng)},
    lambda d, p: (
        _seq(_zstate(d, p["a"]), _dual(d)),
        _zstate(d, tuple(reversed(p["a"]))),
    ),
)

_register(
    "Lemma27",
    "derived",
    "Conjugate Fourier boxes on both cap legs equal one dualiser.",
    _no_params,
    lambda d, p: (
        _seq(_cap(d), _par(_hdag(d), _hdag(d))),
        _seq(_cap(d), _par(_idn(d), _dual(d))),
    ),
)

_register(
    "Lemma28",
    "derived",
    "The pink cap is a green cap with a dualiser on one leg.",
    _no_params,
    lambda d, p: (
        _pink(d, 0, 0, 2),
        _seq(_cap(d), _par(_dual(d), _idn(d))),
    ),
)

_register(
    "Lemma29",
    "derived",
    "The d-wire copy/add pair disconnects into a state and an effect.",
    _no_params,
    _b_hopf,
)


def _b_l30(d, p):
    w = p["w"]
    lhs = _seq(
        _zb(d, ones_phase(d), 1, 2),
        _par(_mult(d, w), _mult(d, (d - w) % d)),
        _pink(d, 0, 2, 1),
    )
    rhs = _seq(_zeffect(d, ones_phase(d)), _pink_state(d, 0))
    return lhs, rhs


_register(
    "Lemma30",
    "derived",
    "Complementary multipliers on a copy/add pair disconnect it.",
    lambda d, rng: {"w": int(rng.integers(0, d))},
    _b_l30,
)


def _b_l31(d, p):
    x = p["x"]
    label = (d - x) % d
    if p["which"] == 0:
        lhs = _seq(_pink_state(d, label), _g(Triangle(), d))
        rhs = _zstate(d, one_hot_phase(d, x) if x else zeros_phase(d))
    else:
        lhs = _seq(
            _zstate(d, one_hot_phase(d, x) if x else zeros_phase(d)),
            _g(TriangleInverse(), d),
        )
        rhs = _pink_state(d, label)
    return lhs, rhs


_register(
    "Lemma31",
    "derived",
    "The triangle turns a pink point into a two-term green state; its "
    "inverse undoes it.",
    lambda d, rng: {"x": int(rng.integers(0, d)), "which": int(rng.integers(0, 2))},
    _b_l31,
)


def _b_l32(d, p):
    x, y = p["x"], p["y"]
    lhs = _seq(
        _par(_pink_state(d, (d - x) % d), _pink_state(d, (d - y) % d)),
        _pink(d, 0, 2, 1),
    )
    rhs = _pink_state(d, (d - x - y) % d)
    return lhs, rhs


_register(
    "Lemma32",
    "derived",
    "The pink adder adds pink points.",
    lambda d, rng: {"x": int(rng.integers(0, d)), "y": int(rng.integers(0, d))},
    _b_l32,
)

_register(
    "Lemma33",
    "derived",
    "Multiplier weights multiply under composition.",
    lambda d, rng: {"a": int(rng.integers(0, d)), "b": int(rng.integers(0, d))},
    lambda d, p: (
        _seq(_mult(d, p["a"]), _mult(d, p["b"])),
        _mult(d, (p["a"] * p["b"]) % d),
    ),
)

_register(
    "Lemma34",
    "derived",
    "A multiplier scales a pink point.",
    lambda d, rng: {"x": int(rng.integers(0, d)), "w": int(rng.integers(0, d))},
    lambda d, p: (
        _seq(_pink_state(d, (d - p["x"]) % d), _mult(d, p["w"])),
        _pink_state(d, (d - p["w"] * p["x"]) % d),
    ),
)


def _s_l35(d, rng):
    units = [w for w in range(1, d) if math.gcd(w, d) == 1]
    return {
        "a": random_phase(d, rng),
        "w": units[int(rng.integers(0, len(units)))],
    }


def _b_l35(d, p):
    a, w = p["a"], p["w"]
    winv = pow(w, -1, d)
    lhs = _seq(_zstate(d, a), _mult(d, w))
    rhs = _zstate(d, _reindexed(a, winv, d))
    return lhs, rhs


_register(
    "Lemma35",
    "derived",
    "An invertible multiplier permutes a green state's amplitude slots.",
    _s_l35,
    _b_l35,
)


def _s_l36(d, rng):
    units = [w for w in range(1, d) if math.gcd(w, d) == 1]
    return {"w": units[int(rng.integers(0, len(units)))]}


_register(
    "Lemma36",
    "derived",
    "An invertible multiplier slides through a W split onto both legs.",
    _s_l36,
    lambda d, p: (
        _seq(_w(d), _par(_mult(d, p["w"]), _mult(d, p["w"]))),
        _seq(_mult(d, p["w"]), _w(d)),
    ),
)

_register(
    "Lemma37",
    "derived",
    "Dualisers on both inputs of the collapsing W node slide to its output.",
    _no_params,
    lambda d, p: (
        _seq(_par(_dual(d), _dual(d)), _wt(d, 2)),
        _seq(_wt(d, 2), _dual(d)),
    ),
)

_register(
    "Lemma38",
    "derived",
    "Green copy duplicates any pink point.",
    lambda d, rng: {"j": int(rng.integers(0, d))},
    lambda d, p: (
        _seq(_pink_state(d, p["j"]), _zb(d, ones_phase(d), 1, 2)),
        _par(_pink_state(d, p["j"]), _pink_state(d, p["j"])),
    ),
)


def _constant_phase(d, value):
    return tuple(complex(value) for _ in range(d - 1))


_register(
    "Lemma39",
    "derived",
    "A W fan-out summed back by the pink adder is the diagonal box with "
    "constant slot amplitude equal to the leg count.",
    lambda d, rng: {"m": int(rng.integers(2, 4))},
    lambda d, p: (
        _seq(_wk(d, p["m"]), _pink(d, 0, p["m"], 1)),
        _zb(d, _constant_phase(d, p["m"]), 1, 1),
    ),
)

_register(
    "Lemma40",
    "derived",
    "A pink split collapsed by the transposed W node is the same constant "
    "diagonal box.",
    lambda d, rng: {"m": int(rng.integers(2, 4))},
    lambda d, p: (
        _seq(_pink(d, 0, 1, p["m"]), _wt(d, p["m"])),
        _zb(d, _constant_phase(d, p["m"]), 1, 1),
    ),
)


def _s_l41(d, rng):
    m = int(rng.integers(2, 4))
    return {"m": m, "boxes": tuple(random_phase(d, rng) for _ in range(m))}


def _b_l41(d, p):
    m, boxes = p["m"], p["boxes"]
    lhs = _seq(
        _wk(d, m),
        _par(*[_zb(d, a, 1, 1) for a in boxes]),
        _pink(d, 0, m, 1),
    )
    total = tuple(sum(col) for col in zip(*boxes))
    rhs = _zb(d, total, 1, 1)
    return lhs, rhs


_register(
    "Lemma41",
    "derived",
    "Diagonal boxes on every branch of a W fan-out, summed back by the "
    "pink adder, add slotwise.",
    _s_l41,
    _b_l41,
)

_register(
    "Lemma42",
    "derived",
    "The W node is coassociative.",
    _no_params,
    lambda d, p: (
        _seq(_w(d), _par(_w(d), _idn(d))),
        _seq(_w(d), _par(_idn(d), _w(d))),
    ),
)

_register(
    "Lemma43",
    "derived",
    "The W node is cocommutative.",
    _no_params,
    lambda d, p: (_seq(_w(d), permutation_diagram(d, [1, 0])), _w(d)),
)


def _b_l44(d, p):
    k = p["k"]
    lhs = _wt(d, k)
    nodes = {"c": ZBox(ones_phase(d), 0, 2), "w": WNodeGeneral(k)}
    wires = [(("out", "c", 0), ("bout", 0)), (("out", "c", 1), ("in", "w", 0))]
    for i in range(k):
        u = f"u{i}"
        nodes[u] = ZBox(ones_phase(d), 2, 0)
        wires.append((("out", "w", i), ("in", u, 0)))
        wires.append((("bin", i), ("in", u, 1)))
    rhs = Diagram(d, nodes, wires, k, 1)
    return lhs, rhs


_register(
    "Lemma44",
    "derived",
    "The transposed W node is the forward W node bent around by a cap and "
    "cups.",
    lambda d, rng: {"k": int(rng.integers(2, 4))},
    _b_l44,
)

_register(
    "Lemma45",
    "derived",
    "A diagonal green box slides across a cap.",
    lambda d, rng: {"a": random_phase(d, rng)},
    lambda d, p: (
        _seq(_cap(d), _par(_zb(d, p["a"], 1, 1), _idn(d))),
        _seq(_cap(d), _par(_idn(d), _zb(d, p["a"], 1, 1))),
    ),
)

_register(
    "Lemma46",
    "derived",
    "Combining two green states through the collapsing W node is "
    "commutative.",
    lambda d, rng: {"a": random_phase(d, rng), "b": random_phase(d, rng)},
    lambda d, p: (
        _seq(_par(_zstate(d, p["a"]), _zstate(d, p["b"])), _wt(d, 2)),
        _seq(_par(_zstate(d, p["b"]), _zstate(d, p["a"])), _wt(d, 2)),
    ),
)

_register(
    "Lemma47",
    "derived",
    "The Fourier box slides across a cap.",
    _no_params,
    lambda d, p: (
        _seq(_cap(d), _par(_h(d), _idn(d))),
        _seq(_cap(d), _par(_idn(d), _h(d))),
    ),
)

_register(
    "Lemma48",
    "derived",
    "Closing a cap with a cup is the dimension scalar.",
    _no_params,
    lambda d, p: (_seq(_cap(d), _cup(d)), _scal(d, float(d))),
)


# ---------------------------------------------------------------------------
# soundness


def check_soundness(
    rule: RewriteRule,
    dimension: int,
    samples: int = 20,
    seed: int = 0,
    tol: float = 1e-9,
) -> SoundnessReport:
    """Interpret both sides of a rule over random parameter draws and report
    the worst entrywise deviation."""
    if dimension < rule.min_dimension:
        return SoundnessReport(rule.name, dimension, 0, 0.0, True)
    rng = np.random.default_rng([seed, dimension, zlib.crc32(rule.name.encode())])
    max_dev = 0.0
    seen: set[str] = set()
    for _ in range(samples):
        params = rule.sample(dimension, rng)
        key = repr(sorted(params.items()))
        if key in seen:
            continue
        seen.add(key)
        lhs, rhs = rule.instantiate(dimension, params)
        a, b = interpret(lhs), interpret(rhs)
        if a.shape != b.shape:
            max_dev = float("inf")
            break
        dev = float(np.max(np.abs(a - b))) if a.size else 0.0
        max_dev = max(max_dev, dev)
    return SoundnessReport(rule.name, dimension, samples, max_dev, max_dev <= tol)


def verify_all(
    dimensions=(2, 3, 4, 5),
    samples: int = 20,
    seed: int = 0,
    tol: float = 1e-9,
    names=None,
) -> list[SoundnessReport]:
    """Soundness reports for every registered rule at every dimension."""
    rules = all_rules() if names is None else [get_rule(n) for n in names]
    return [
        check_soundness(rule, d, samples=samples, seed=seed, tol=tol)
        for rule in rules
        for d in dimensions
    ]


# ---------------------------------------------------------------------------
# anchored rewriting


def _values_close(x, y, tol=1e-12):
    return abs(complex(x) - complex(y)) <= tol


def _kinds_match(pattern_kind, node_kind) -> bool:
    if type(pattern_kind) is not type(node_kind):
        return False
    if isinstance(pattern_kind, ZBox):
        return (
            (pattern_kind.n_in, pattern_kind.n_out) == (node_kind.n_in, node_kind.n_out)
            and len(pattern_kind.phase) == len(node_kind.phase)
            and all(_values_close(x, y) for x, y in zip(pattern_kind.phase, node_kind.phase))
        )
    if isinstance(pattern_kind, GreenSpider):
        return (
            (pattern_kind.n_in, pattern_kind.n_out) == (node_kind.n_in, node_kind.n_out)
            and len(pattern_kind.angles) == len(node_kind.angles)
            and all(_values_close(x, y) for x, y in zip(pattern_kind.angles, node_kind.angles))
        )
    if isinstance(pattern_kind, LabeledBox):
        return (pattern_kind.n_in, pattern_kind.n_out) == (
            node_kind.n_in,
            node_kind.n_out,
        ) and _values_close(pattern_kind.value, node_kind.value)
    if isinstance(pattern_kind, ScalarBox):
        return _values_close(pattern_kind.value, node_kind.value)
    return pattern_kind == node_kind


def apply_at(
    diagram: Diagram,
    rule: RewriteRule,
    anchor,
    direction: str = "forward",
    *,
    params: dict | None = None,
    verify: bool = False,
    tol: float = 1e-9,
) -> Diagram:
    """Rewrite one anchored occurrence of a rule inside a diagram.

    ``anchor`` maps every node id of the instantiated pattern side (lhs for
    "forward", rhs for "backward") to the diagram node it stands for; a bare
    string is accepted for single-node patterns.  The occurrence must match
    exactly: same kinds (numeric data within 1e-12) and same internal wiring.
    Wires crossing the pattern boundary are reconnected to the replacement
    side's corresponding legs.  With ``verify`` the rewritten diagram is
    checked against the original by interpretation.
    """
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    d = diagram.dimension
    if params is None:
        params = rule.sample(d, np.random.default_rng(0))
    lhs, rhs = rule.instantiate(d, params)
    pattern, replacement = (lhs, rhs) if direction == "forward" else (rhs, lhs)

    if isinstance(anchor, str):
        if len(pattern.nodes) != 1:
            raise ValueError("a bare node id anchor needs a single-node pattern")
        anchor = {next(iter(pattern.nodes)): anchor}
    anchor = dict(anchor)
    if set(anchor) != set(pattern.nodes):
        raise ValueError("anchor must map exactly the pattern's node ids")
    if len(set(anchor.values())) != len(anchor):
        raise ValueError("anchor maps two pattern nodes to the same diagram node")
    for pn, dn in anchor.items():
        if dn not in diagram.nodes:
            raise ValueError(f"anchor target {dn!r} is not a diagram node")
        if not _kinds_match(pattern.nodes[pn], diagram.nodes[dn]):
            raise ValueError(
                f"diagram node {dn!r} does not match pattern node {pn!r} "
                f"({diagram.nodes[dn]!r} vs {pattern.nodes[pn]!r})"
            )

    matched_internal = set()
    in_role: dict[tuple, tuple] = {}
    out_role: dict[tuple, tuple] = {}
    wire_set = set(diagram.wires)
    for src, snk in pattern.wires:
        if src[0] == "out" and snk[0] == "in":
            dw = (("out", anchor[src[1]], src[2]), ("in", anchor[snk[1]], snk[2]))
            if dw not in wire_set:
                raise ValueError(f"pattern wire {src}->{snk} has no counterpart at the anchor")
            matched_internal.add(dw)
        elif src[0] == "bin" and snk[0] == "in":
            in_role[("in", anchor[snk[1]], snk[2])] = ("J", "in", src[1])
        elif src[0] == "out" and snk[0] == "bout":
            out_role[("out", anchor[src[1]], src[2])] = ("J", "out", snk[1])
        else:
            raise ValueError("pattern has a boundary-to-boundary wire; not anchorable")

    matched_nodes = set(anchor.values())
    edges = []
    for src, snk in diagram.wires:
        if (src, snk) in matched_internal:
            continue
        s2 = out_role.get(src, src)
        k2 = in_role.get(snk, snk)
        if s2[0] == "out" and s2[1] in matched_nodes:
            raise ValueError(f"diagram wiring at {src} is not part of the anchored occurrence")
        if k2[0] == "in" and k2[1] in matched_nodes:
            raise ValueError(f"diagram wiring at {snk} is not part of the anchored occurrence")
        edges.append((s2, k2))

    kept = {n: k for n, k in diagram.nodes.items() if n not in matched_nodes}
    rename = {}
    counter = 0
    for rn in sorted(replacement.nodes):
        while f"rw{counter}" in kept:
            counter += 1
        rename[rn] = f"rw{counter}"
        counter += 1
    for src, snk in replacement.wires:
        s2 = ("J", "in", src[1]) if src[0] == "bin" else ("out", rename[src[1]], src[2])
        k2 = ("J", "out", snk[1]) if snk[0] == "bout" else ("in", rename[snk[1]], snk[2])
        edges.append((s2, k2))

    loops: list[str] = []

    def fresh_loop_id():
        lid = f"rwo{len(loops)}"
        while lid in kept or lid in rename.values():
            lid += "x"
        loops.append(lid)
        return lid

    wires, extra = _resolve_junctions(edges, fresh_loop_id)
    kept.update({rename[n]: k for n, k in replacement.nodes.items()})
    for lid in extra:
        kept[lid] = ZBox(ones_phase(d), 1, 1)
        wires.append((("out", lid, 0), ("in", lid, 0)))
    result = Diagram(d, kept, wires, diagram.n_in, diagram.n_out)
    if verify and not matrices_equal(interpret(result), interpret(diagram), tol):
        raise ValueError(f"rewrite by {rule.name} changed the interpretation")
    return result
