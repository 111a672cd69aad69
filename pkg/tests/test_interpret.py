import numpy as np
import pytest

from conftest import bent_vector, random_circuit

from zxwcalc.diagram import (
    Diagram,
    Dualiser,
    Hadamard,
    HadamardDagger,
    Multiplier,
    PinkSpider,
    ScalarBox,
    Triangle,
    TriangleInverse,
    VBox,
    WNode,
    WNodeGeneral,
    ZBox,
    bend_to_state,
    compose_par,
    compose_seq,
    identity_diagram,
    make_generator,
    ones_phase,
)
from zxwcalc.interpret import interpret, matrices_equal, semantics


def g(kind, d):
    return interpret(make_generator(kind, d))


def test_zbox_diagonal():
    mat = g(ZBox((2j, -0.5), 1, 1), 3)
    assert matrices_equal(mat, np.diag([1, 2j, -0.5]))


def test_zbox_general_arity_entries():
    d, phase = 3, (0.5j, -2)
    mat = g(ZBox(phase, 2, 1), d)
    want = np.zeros((3, 9), dtype=complex)
    for j, a in enumerate((1,) + phase):
        want[j, j * 3 + j] = a
    assert matrices_equal(mat, want)


def test_hadamard_fourier_entries():
    for d in (2, 3, 5):
        w = np.exp(2j * np.pi / d)
        want = np.array([[w ** (j * k) for k in range(d)] for j in range(d)])
        want /= np.sqrt(d)
        assert matrices_equal(g(Hadamard(), d), want, tol=1e-12)


def test_hadamard_identities():
    for d in (2, 3, 5):
        h = g(Hadamard(), d)
        hd = g(HadamardDagger(), d)
        dual = g(Dualiser(), d)
        assert matrices_equal(h @ h, dual, tol=1e-12)
        assert matrices_equal(h @ h @ h @ h, np.eye(d), tol=1e-12)
        assert matrices_equal(h @ hd, np.eye(d), tol=1e-12)
        assert matrices_equal(hd, h @ h @ h, tol=1e-12)


def test_wnode_columns():
    d = 3
    mat = g(WNode(), d)
    want = np.zeros((9, 3), dtype=complex)
    want[0, 0] = 1  # |00><0|
    for i in range(1, d):
        want[0 * 3 + i, i] = 1
        want[i * 3 + 0, i] = 1
    assert matrices_equal(mat, want)


def test_wnode_general_and_transpose():
    d = 2
    w3 = g(WNodeGeneral(3), d)
    assert w3.shape == (8, 2)
    assert w3[0, 0] == 1 and w3[0, 1] == 0
    ones_positions = [4, 2, 1]  # |100>, |010>, |001>
    for pos in ones_positions:
        assert w3[pos, 1] == 1
    wt = g(WNodeGeneral(3, True), d)
    assert matrices_equal(wt, w3.T)


def test_pink_spider_indicator():
    for d in (2, 3, 4):
        for n, m in ((1, 1), (2, 1), (1, 2), (3, 1), (2, 2)):
            for j in range(d):
                mat = g(PinkSpider(j, n, m), d)
                for row in range(d**m):
                    for col in range(d**n):
                        outs = np.base_repr(row, d).zfill(m)
                        ins = np.base_repr(col, d).zfill(n)
                        lhs = (sum(int(c) for c in outs) + j) % d
                        rhs = sum(int(c) for c in ins) % d
                        want = 1.0 if lhs == rhs else 0.0
                        assert mat[row, col] == want, (d, n, m, j, row, col)


def test_fixed_one_to_one_kinds():
    d = 4
    assert matrices_equal(g(Dualiser(), d), np.eye(d)[:, [0, 3, 2, 1]])
    mul3 = np.zeros((d, d))
    for x in range(d):
        mul3[(3 * x) % d, x] = 1
    assert matrices_equal(g(Multiplier(3), d), mul3)
    tri = np.eye(d, dtype=complex)
    tri[0, 1:] = 1
    assert matrices_equal(g(Triangle(), d), tri)
    inv = np.eye(d, dtype=complex)
    inv[0, 1:] = -1
    assert matrices_equal(g(TriangleInverse(), d), inv)
    assert matrices_equal(g(Triangle(), d) @ g(TriangleInverse(), d), np.eye(d))
    assert matrices_equal(g(VBox(), d), tri.T)
    assert matrices_equal(g(ScalarBox(2.5j), d), np.array([[2.5j]]))


def test_multiplier_table():
    d = 4
    mat = g(Multiplier(2), d)
    want = np.zeros((4, 4))
    for x in range(4):
        want[(2 * x) % 4, x] = 1
    assert matrices_equal(mat, want)


def test_functoriality_against_numpy():
    rng = np.random.default_rng(11)
    for d in (2, 3):
        for _ in range(20):
            a = random_circuit(d, rng, max_width=3, steps=3)
            b = random_circuit(d, rng, max_width=3, steps=3)
            assert matrices_equal(
                interpret(compose_par(a, b)),
                np.kron(interpret(a), interpret(b)),
                tol=1e-10,
            )
            if a.n_out == b.n_in:
                assert matrices_equal(
                    interpret(compose_seq(a, b)),
                    interpret(b) @ interpret(a),
                    tol=1e-10,
                )


def test_bent_hadamard():
    d = 3
    bent = bent_vector(make_generator(Hadamard(), d))
    assert matrices_equal(bent, interpret(make_generator(Hadamard(), d)).ravel())


def test_traced_identity_counts_dimension():
    for d in (2, 3, 4):
        dia = Diagram(
            d,
            {"z": ZBox(ones_phase(d), 1, 1)},
            [(("out", "z", 0), ("in", "z", 0))],
            0,
            0,
        )
        assert matrices_equal(interpret(dia), np.array([[d]]))


def test_traced_w_node():
    # loop the first output of W back onto its input; leaves sum_i |i> - ish
    d = 3
    dia = Diagram(
        d,
        {"w": WNode()},
        [(("out", "w", 0), ("in", "w", 0)), (("out", "w", 1), ("bout", 0))],
        0,
        1,
    )
    want = np.einsum("aba->b", interpret(make_generator(WNode(), d)).reshape(d, d, d))
    assert matrices_equal(interpret(dia).ravel(), want)


def test_interpret_rejects_invalid():
    with pytest.raises(ValueError):
        interpret(Diagram(2, {}, [], 1, 0))


def test_big_nodes_split_exactly():
    d = 2
    for kind in (WNodeGeneral(9), PinkSpider(1, 7, 1), ZBox((0.5j,), 1, 7)):
        mat = interpret(make_generator(kind, d))
        assert matrices_equal(mat, semantics(kind, d), tol=1e-10), type(kind).__name__


def test_scalar_denseness_of_matrices_equal():
    assert matrices_equal(np.zeros((0, 1)), np.zeros((0, 1)))
    assert not matrices_equal(np.eye(2), np.eye(3))
    assert not matrices_equal(np.eye(2), 2 * np.eye(2))
    assert matrices_equal(np.eye(2), np.eye(2) + 1e-10)
    assert not matrices_equal(np.eye(2), np.eye(2) + 1e-8)
