"""Shared test helpers: adversarial scalars and a random circuit builder."""

from __future__ import annotations

import re

import numpy as np

from zxwcalc.diagram import (
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
    bend_to_state,
    compose_par,
    compose_seq,
    identity_diagram,
    make_generator,
    ones_phase,
    permutation_diagram,
)
from zxwcalc.interpret import interpret

# values that sit on the branch points of the algebra show up often
_SPECIAL = (0j, 1 + 0j, -1 + 0j)


def adversarial_scalar(rng, allow_zero=True) -> complex:
    if rng.random() < 0.3:
        pool = _SPECIAL if allow_zero else _SPECIAL[1:]
        return pool[int(rng.integers(0, len(pool)))]
    z = rng.normal() + 1j * rng.normal()
    return complex(z / max(1.0, abs(z)))


def adversarial_phase(d: int, rng, allow_zero=True) -> tuple[complex, ...]:
    return tuple(adversarial_scalar(rng, allow_zero) for _ in range(d - 1))


def _random_block(d: int, rng, width: int):
    """A generator kind whose input arity fits the current width."""
    choices = []
    if width >= 1:
        choices += [
            lambda: ZBox(adversarial_phase(d, rng), 1, int(rng.integers(1, 3))),
            lambda: PinkSpider(int(rng.integers(0, d)), 1, int(rng.integers(1, 3))),
            lambda: Hadamard(),
            lambda: HadamardDagger(),
            lambda: Dualiser(),
            lambda: Multiplier(int(rng.integers(0, d))),
            lambda: Triangle(),
            lambda: TriangleInverse(),
            lambda: VBox(),
            lambda: WNode(),
            lambda: WNodeGeneral(int(rng.integers(1, 4))),
            lambda: GreenSpider(
                tuple(float(rng.uniform(0, 2 * np.pi)) for _ in range(d - 1)), 1, 1
            ),
            lambda: LabeledBox(adversarial_scalar(rng), 1, 1),
        ]
    if width >= 2:
        choices += [
            lambda: ZBox(adversarial_phase(d, rng), 2, int(rng.integers(1, 3))),
            lambda: PinkSpider(int(rng.integers(0, d)), 2, 1),
            lambda: WNodeGeneral(2, True),
            lambda: ZBox(ones_phase(d), 2, 0),  # cup
        ]
    choices += [
        lambda: ZBox(adversarial_phase(d, rng), 0, 1),
        lambda: PinkSpider(int(rng.integers(0, d)), 0, 1),
        lambda: ZBox(ones_phase(d), 0, 2),  # cap
        lambda: ScalarBox(adversarial_scalar(rng)),
    ]
    return choices[int(rng.integers(0, len(choices)))]()


def random_circuit(d: int, rng, max_width: int = 4, steps: int = 5) -> Diagram:
    """A small random diagram built by stacking generators at random offsets."""
    width = int(rng.integers(1, max_width + 1))
    dia = identity_diagram(d, width)
    for _ in range(steps):
        kind = _random_block(d, rng, width)
        if width - kind.n_in + kind.n_out > max_width + 1:
            continue
        offset = int(rng.integers(0, width - kind.n_in + 1))
        layer = compose_par(
            compose_par(identity_diagram(d, offset), make_generator(kind, d)),
            identity_diagram(d, width - offset - kind.n_in),
        )
        dia = compose_seq(dia, layer)
        width = width - kind.n_in + kind.n_out
        if width > 1 and rng.random() < 0.25:
            perm = list(rng.permutation(width))
            dia = compose_seq(dia, permutation_diagram(d, [int(p) for p in perm]))
    return dia


def bent_vector(diagram: Diagram) -> np.ndarray:
    """Amplitudes of the fully bent diagram, the interpreter route."""
    return interpret(bend_to_state(diagram)).ravel()


# One summary line per acceptance criterion, printed after capture ends so a
# plain `pytest -v` run always shows them.  Tests stash their detail string in
# ACCEPTANCE_DETAILS; the outcome comes from pytest itself, so a criterion
# that crashes before reporting still gets a FAIL line.
ACCEPTANCE_DETAILS: dict[int, str] = {}
_acceptance_outcomes: dict[int, str] = {}


def pytest_runtest_logreport(report):
    match = re.search(r"test_criterion_(\d+)", report.nodeid)
    if not match:
        return
    n = int(match.group(1))
    if report.when == "call":
        _acceptance_outcomes[n] = report.outcome
    elif report.outcome != "passed" and n not in _acceptance_outcomes:
        _acceptance_outcomes[n] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance_outcomes):
        verdict = "PASS" if _acceptance_outcomes[n] == "passed" else "FAIL"
        detail = ACCEPTANCE_DETAILS.get(n)
        suffix = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"ACCEPTANCE {n}: {verdict}{suffix}")
