"""Acceptance gate: seven checks, one printed PASS/FAIL line each.

Each test exercises one acceptance criterion end to end with pinned
tolerances.  The per-criterion verdict lines are emitted by the terminal
summary hook in conftest.py, so a plain ``pytest -v`` run shows them even
though passing tests have their stdout captured.
"""

import json
import time

import numpy as np

from zxwcalc.diagram import (
    Dualiser,
    Hadamard,
    PinkSpider,
    Triangle,
    WNodeGeneral,
    ZBox,
    bend_to_state,
    compose_seq,
    identity_diagram,
    make_generator,
    w_state_diagram,
)
from zxwcalc.interpret import interpret, matrices_equal
from zxwcalc.io import parse_diagram, serialize_diagram
from zxwcalc.normalform import (
    decide_equal,
    emit_diagram,
    matrix_to_nf,
    normalize,
    partial_trace_nf,
    tensor_nf,
    unique_sort,
)
from zxwcalc.rules import all_rules, apply_at, check_soundness, verify_all

import conftest
from conftest import bent_vector, random_circuit


def _report(criterion: int, ok: bool, detail: str) -> None:
    conftest.ACCEPTANCE_DETAILS[criterion] = detail
    assert ok, f"ACCEPTANCE {criterion}: FAIL ({detail})"


def test_criterion_1_rule_soundness_suite():
    start = time.monotonic()
    reports = verify_all(dimensions=(2, 3, 4, 5), samples=20, seed=0, tol=1e-9)
    elapsed = time.monotonic() - start
    worst = max(r.max_deviation for r in reports)
    n_rules = len({r.rule for r in reports})
    ok = all(r.passed for r in reports) and n_rules == len(all_rules()) and elapsed < 120.0
    _report(1, ok, f"{len(reports)} checks over {n_rules} rules, "
                   f"max_dev={worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_generator_spot_checks():
    tol = 1e-10
    checks = []

    h2 = interpret(make_generator(Hadamard(), 2))
    checks.append(np.allclose(h2, np.array([[1, 1], [1, -1]]) / np.sqrt(2), atol=tol))

    w2 = interpret(make_generator(WNodeGeneral(2, False), 2))
    checks.append(np.allclose(w2[:, 0], [1, 0, 0, 0], atol=tol))
    checks.append(np.allclose(w2[:, 1], [0, 1, 1, 0], atol=tol))

    du3 = interpret(make_generator(Dualiser(), 3))
    checks.append(np.allclose(du3, np.eye(3)[:, [0, 2, 1]], atol=tol))
    checks.append(np.allclose(du3 @ du3, np.eye(3), atol=tol))
    checks.append(np.allclose(interpret(make_generator(Dualiser(), 2)), np.eye(2), atol=tol))

    t2 = interpret(make_generator(Triangle(), 2))
    checks.append(np.allclose(t2, np.array([[1, 1], [0, 1]]), atol=tol))

    worst_pink = 0.0
    for d in (2, 3, 4):
        for n in range(4):
            for m in range(4):
                if n == 0 and m == 0:
                    continue
                for j in range(d):
                    got = interpret(make_generator(PinkSpider(j, n, m), d))
                    want = np.zeros((d ** m, d ** n))
                    for row in range(d ** m):
                        outs = np.unravel_index(row, (d,) * m) if m else ()
                        for col in range(d ** n):
                            ins = np.unravel_index(col, (d,) * n) if n else ()
                            want[row, col] = (sum(outs) + j) % d == sum(ins) % d
                    worst_pink = max(worst_pink, float(np.abs(got - want).max()))
    checks.append(worst_pink <= tol)

    _report(2, all(checks), f"{len(checks)} pinned identities, "
                            f"pink max_dev={worst_pink:.2e}")


def test_criterion_3_normalizer_matches_interpreter():
    start = time.monotonic()
    rng = np.random.default_rng(2024)
    total, worst = 0, 0.0
    for d in (2, 3):
        while total < (100 if d == 2 else 200):
            circ = random_circuit(d, rng, max_width=3, steps=5)
            if len(circ.nodes) > 6 or circ.n_in + circ.n_out > 4:
                continue
            oracle = bent_vector(circ)
            nf = normalize(circ, check_steps=True)
            dev = float(np.abs(nf.amplitudes - oracle).max())
            worst = max(worst, dev)
            assert dev <= 1e-8, f"deviation {dev} on sample {total} (d={d})"
            total += 1
    elapsed = time.monotonic() - start
    ok = total >= 200 and worst <= 1e-8 and elapsed < 180.0
    _report(3, ok, f"{total} diagrams, max_dev={worst:.2e}, {elapsed:.1f}s")


def test_criterion_4_equality_decision():
    rng = np.random.default_rng(77)
    agree = 0
    cases = 0

    # (a) random pairs against the interpreter oracle
    for _ in range(100):
        d = int(rng.choice([2, 3]))
        a = random_circuit(d, rng, max_width=2, steps=3)
        b = random_circuit(d, rng, max_width=2, steps=3)
        if a.n_in != b.n_in or a.n_out != b.n_out:
            b = a
        truth = matrices_equal(interpret(a), interpret(b), 1e-8)
        agree += decide_equal(a, b, 1e-8) == truth
        cases += 1

    # (b) constructed-equal pairs: one side rewritten in place.  Keep the
    # sides at the same desk scale as criterion 3 so the normalizer inside
    # decide_equal stays dense-vector sized.
    usable = [r for r in all_rules() if r.min_dimension <= 2]
    built = 0
    while built < 50:
        d = int(rng.choice([2, 3]))
        rule = usable[int(rng.integers(len(usable)))]
        params = rule.sample(d, rng)
        lhs, rhs = rule.instantiate(d, params)
        if lhs.n_in + lhs.n_out > 4 or max(len(lhs.nodes), len(rhs.nodes)) > 8:
            continue
        built += 1
        anchor = {nid: nid for nid in lhs.nodes}
        rewritten = apply_at(lhs, rule, anchor, params=params)
        truth = matrices_equal(interpret(lhs), interpret(rewritten), 1e-8)
        agree += (decide_equal(lhs, rewritten, 1e-8) == truth) and truth
        cases += 1

    # (c) perturbed pairs: one phase entry nudged by 1e-3
    for _ in range(50):
        d = int(rng.choice([2, 3]))
        phase = tuple(0.5 + 0.5j for _ in range(d - 1))
        base = make_generator(ZBox(phase, 1, 1), d)
        bumped_phase = (phase[0] + 1e-3,) + phase[1:]
        bumped = make_generator(ZBox(bumped_phase, 1, 1), d)
        truth = matrices_equal(interpret(base), interpret(bumped), 1e-8)
        agree += (decide_equal(base, bumped, 1e-8) == truth) and not truth
        cases += 1

    _report(4, agree == cases, f"{agree}/{cases} oracle agreements")


def test_criterion_5_algebraic_identities():
    checks = []

    # tensor and partial trace against dense numpy oracles
    def nf_of(vec, d, m):
        return matrix_to_nf(np.asarray(vec, dtype=complex), d, m)

    worst = 0.0
    rng = np.random.default_rng(11)
    cases = []
    d = 2
    for m_a in (1, 2, 3):
        for m_b in (1, 2):
            a = rng.standard_normal(d ** m_a) + 1j * rng.standard_normal(d ** m_a)
            b = rng.standard_normal(d ** m_b) + 1j * rng.standard_normal(d ** m_b)
            cases.append((d, m_a, a, m_b, b))
    for _ in range(50):
        d3 = 3
        m_a = int(rng.integers(1, 3))
        m_b = int(rng.integers(1, 3))
        a = rng.standard_normal(d3 ** m_a) + 1j * rng.standard_normal(d3 ** m_a)
        b = rng.standard_normal(d3 ** m_b) + 1j * rng.standard_normal(d3 ** m_b)
        cases.append((d3, m_a, a, m_b, b))
    for d_c, m_a, a, m_b, b in cases:
        got = tensor_nf(nf_of(a, d_c, m_a), nf_of(b, d_c, m_b)).amplitudes
        worst = max(worst, float(np.abs(got - np.kron(a, b)).max()))
        joint = np.kron(a, b)
        m = m_a + m_b
        for s in range(m):
            for t in range(m):
                if s == t:
                    continue
                traced = partial_trace_nf(nf_of(joint, d_c, m), s, t).amplitudes
                tensor = joint.reshape((d_c,) * m)
                oracle = np.trace(tensor, axis1=s, axis2=t).ravel()
                worst = max(worst, float(np.abs(traced - oracle).max()))
    checks.append(worst <= 1e-9)

    # Hopf: a copy node feeding all k legs of a pink merge disconnects at k=d
    hopf_ok = True
    for d_h in (2, 3, 4, 5):
        ones = (1.0,) * (d_h - 1)
        expected = np.zeros((d_h, d_h), dtype=complex)
        expected[0, :] = 1.0
        for k in range(1, d_h + 1):
            gadget = compose_seq(
                make_generator(ZBox(ones, 1, k), d_h),
                make_generator(PinkSpider(0, k, 1), d_h),
            )
            disconnected = matrices_equal(interpret(gadget), expected, 1e-9)
            hopf_ok &= disconnected == (k == d_h)
    checks.append(hopf_ok)

    # W state on three parties
    w_ok = True
    for d_w in (2, 3):
        vec = interpret(w_state_diagram(3, d_w)).ravel()
        want = np.zeros(d_w ** 3, dtype=complex)
        for value in range(1, d_w):
            for party in range(3):
                digits = [0, 0, 0]
                digits[party] = value
                want[int(np.ravel_multi_index(digits, (d_w,) * 3))] = 1.0
        w_ok &= bool(np.abs(vec - want).max() <= 1e-9)
    checks.append(w_ok)

    _report(5, all(checks), f"oracle max_dev={worst:.2e}, "
                            f"hopf={'ok' if hopf_ok else 'BAD'}, "
                            f"w3={'ok' if w_ok else 'BAD'}")


def test_criterion_6_uniqueness_round_trip():
    rng = np.random.default_rng(101)
    worst = 0.0
    for i in range(50):
        d = int(rng.choice([2, 3]))
        m = int(rng.integers(1, 4 if d == 2 else 3))
        vec = rng.standard_normal(d ** m) + 1j * rng.standard_normal(d ** m)
        vec[rng.integers(len(vec))] = 0.0
        if i % 10 == 0:
            vec[:] = 0.0
        back = normalize(emit_diagram(matrix_to_nf(vec, d, m))).amplitudes
        worst = max(worst, float(np.abs(back - vec).max()))
    round_trip_ok = worst <= 1e-8

    rng2 = np.random.default_rng(55)
    canon_ok = True
    for _ in range(10):
        vec = rng2.standard_normal(8) + 1j * rng2.standard_normal(8)
        nf = matrix_to_nf(vec, 2, 3)
        sorted_once = unique_sort(emit_diagram(nf))
        sorted_twice = unique_sort(sorted_once)
        canon_ok &= serialize_diagram(sorted_once) == serialize_diagram(sorted_twice)
        shuffled = emit_diagram(nf, order=list(rng2.permutation(len(vec))))
        canon_ok &= serialize_diagram(unique_sort(shuffled)) == serialize_diagram(sorted_once)

    ok = round_trip_ok and canon_ok
    _report(6, ok, f"50 round trips max_dev={worst:.2e}, "
                   f"canonical={'stable' if canon_ok else 'UNSTABLE'}")


def test_criterion_7_io_round_trips():
    rng = np.random.default_rng(9)
    corpus = [identity_diagram(3, 2), w_state_diagram(3, 2)]
    corpus += [random_circuit(d, rng, max_width=3, steps=4) for d in (2, 3) for _ in range(5)]
    corpus.append(bend_to_state(corpus[-1]))
    corpus.append(emit_diagram(normalize(w_state_diagram(2, 3))))
    for rule in all_rules()[:10]:
        lhs, rhs = rule.instantiate(2, rule.sample(2, rng))
        corpus += [lhs, rhs]
    stable = all(
        serialize_diagram(parse_diagram(serialize_diagram(dia))) == serialize_diagram(dia)
        for dia in corpus
    )

    reports = verify_all(dimensions=(2,), samples=2, seed=3)
    lines = [
        json.dumps(
            {"rule": r.rule, "d": r.dimension, "samples": r.samples,
             "max_dev": r.max_deviation, "pass": r.passed},
            sort_keys=True,
        )
        for r in reports
    ]
    parsed = [json.loads(line) for line in lines]
    lossless = all(
        json.dumps(rec, sort_keys=True) == line for rec, line in zip(parsed, lines)
    ) and len(parsed) == len(reports)

    ok = stable and lossless
    _report(7, ok, f"{len(corpus)} diagrams byte-stable, "
                   f"{len(parsed)} report records lossless")
