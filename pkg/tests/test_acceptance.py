"""Acceptance criteria 1-10.

Run under pytest (one PASS/FAIL line per criterion appears in the terminal
summary) or directly with ``python3 tests/test_acceptance.py``.
"""

import itertools
import math
import sys
import time

import numpy as np
import pytest

from hcwalk.classical import classical_hitting, markov_first_passage, tau_ord
from hcwalk.errors import DarkStateDetected
from hcwalk.fullwalk import build_full_walk, dark_example_graph, full_walk_from_graph, hit_probabilities
from hcwalk.reduced import (
    build_basis,
    conditional_hitting,
    convergence_check,
    expected_hitting_exact,
    hitting_profile,
    reduced_walk,
    run_measured_walk,
)
from hcwalk.topology import WalkMode, WalkTopology as T, build_explicit_graph, degree, reduced_dimension

PEN = WalkMode.PENETRATE
RESULTS: dict[int, tuple[bool, str, float]] = {}


# --------------------------------------------------------------------------
# criteria


def criterion_1():
    """Classical closed forms equal the exact first-passage solve."""
    matrix = [T.bare(d, False) for d in range(1, 7)]
    matrix += [T.tails(d, n, q, False) for d in range(1, 5) for n in range(4) for q in range(4)]
    matrix += [T.concat([2, 2], self_loops=False), T.concat([2, 2, 2], self_loops=False),
               T.concat([2, 2], PEN, False)]
    bad = [t.key() for t in matrix
           if classical_hitting(t) != markov_first_passage(build_explicit_graph(t, prune_target_attachment=True))]
    return not bad, f"{len(matrix)} topologies, mismatches: {bad or 'none'}"


def criterion_2():
    bad = [d for d in range(1, 21) if tau_ord(d, d - 1) != 2**d - 1]
    return not bad, f"d = 1..20, failures: {bad or 'none'}"


def criterion_3():
    got = [classical_hitting(T.bare(d, False)) for d in (1, 2, 3)]
    oracle = [markov_first_passage(build_explicit_graph(T.bare(d, False))) for d in (1, 2, 3)]
    ok = got == [1, 4, 10] and oracle == got
    return ok, f"closed form {[str(v) for v in got]}, oracle {[str(v) for v in oracle]}"


def criterion_4():
    worst = {}
    for t in (T.tails(3, 2, 2), T.concat([2, 2]), T.concat([2, 2], PEN)):
        diff = hit_probabilities(reduced_walk(t), 200) - hit_probabilities(build_full_walk(t), 200)
        worst[t.key()] = float(np.abs(diff).max())
    return max(worst.values()) < 1e-10, "max |dp| = " + ", ".join(f"{v:.1e}" for v in worst.values())


def _criterion_5_instances():
    """Every topology used by the other walk criteria, with D_red <= 500."""
    out = list(_criterion_7_instances())
    out += [T.bare(d) for d in range(5, 13)] + [T.tails(d, 10, 1) for d in (4, 6, 8, 10)]
    out += [T.tails(3, 2, 2), T.concat([2, 2]), T.concat([2, 2], PEN)]
    out += _criterion_9_matrix()
    unique = []
    for t in out:
        if t not in unique and reduced_dimension(t) <= 500:
            unique.append(t)
    return unique


def criterion_5():
    gaps = []
    for t in _criterion_5_instances():
        op = reduced_walk(t)
        tau_q = run_measured_walk(op, 1 - 1e-6).tau_q
        gaps.append((abs(expected_hitting_exact(op) - tau_q) / tau_q, t.key()))
    worst = max(gaps)
    over = sum(1 for g, _ in gaps if g >= 5e-3)
    detail = f"{len(gaps)} instances, {over} outside 0.5%, worst relative gap {worst[0]:.2e} ({worst[1]})"
    return over == 0, detail


def criterion_6():
    short = []
    for d in range(5, 13):
        op = reduced_walk(T.bare(d))
        psi, cum = op.initial.copy(), 0.0
        for _ in range(math.ceil(math.pi * d)):
            psi, hit = op.measured_step(psi)
            cum += hit
        if cum < 1 / (d * math.log(d) ** 2):
            short.append(d)
    return not short, f"d = 5..12, below bound: {short or 'none'}"


def _criterion_7_instances():
    out = [T.bare(d) for d in range(1, 16)]
    out += [T.tails(d, n, q) for d in range(1, 11) for n in range(1, 11) for q in range(1, 4)]
    out += [T.concat([2] * (m + 1), mode) for m in (1, 2) for mode in WalkMode]
    return out


def criterion_7():
    eps = 1e-4
    failed, worst = [], 0.0
    instances = _criterion_7_instances()
    for t in instances:
        prof = hitting_profile(reduced_walk(t), [eps, eps / 2])
        a, b = prof[eps], prof[eps / 2]
        if not (a.converged and b.converged and convergence_check(a.tau_q, b.tau_q)):
            failed.append(t.key())
            continue
        worst = max(worst, math.log(b.tau_q) - math.log(a.tau_q))
    return not failed, f"{len(instances)} instances, largest log gap {worst:.4f}, failures: {failed or 'none'}"


def criterion_8():
    ratios = []
    for d in (4, 6, 8, 10):
        t = T.tails(d, 10, 1)
        tau_c = float(classical_hitting(t.with_loops(False)))
        tau_q = run_measured_walk(reduced_walk(t), 1 - 1e-4).tau_q
        ratios.append(tau_c / tau_q)
    ok = all(b > a for a, b in zip(ratios, ratios[1:])) and ratios[-1] > 4 * ratios[0]
    return ok, "ratios " + ", ".join(f"{r:.2f}" for r in ratios) + f"; growth x{ratios[-1] / ratios[0]:.1f}"


def _reachable_avoiding_target(g):
    seen, stack = {g.start}, [g.start]
    while stack:
        u = stack.pop()
        for v in g.adjacency[u]:
            if v not in seen and v != g.target:
                seen.add(v)
                stack.append(v)
    return seen


def _criterion_9_matrix():
    matrix = [T.bare(d) for d in (1, 2, 5, 9)]
    matrix += [T.tails(d, n, q) for d, n, q in itertools.product((1, 3, 5), (1, 3), (1, 2, 4))]
    matrix += [T.concat(dims, mode) for dims in ([2, 2], [2, 2, 2], [3, 2, 1], [1, 3], [2, 1, 2]) for mode in WalkMode]
    return matrix


def criterion_9():
    matrix = _criterion_9_matrix()
    rng = np.random.default_rng(2024)
    problems = []
    for t in matrix:
        basis, w = build_basis(t)
        if len(basis) != reduced_dimension(t):
            problems.append(f"{t}: D_red")
        op = reduced_walk(t)
        psi = rng.normal(size=op.dimension) + 1j * rng.normal(size=op.dimension)
        if abs(np.linalg.norm(op.matrix @ psi) - np.linalg.norm(psi)) > 1e-12 * np.linalg.norm(psi):
            problems.append(f"{t}: unitarity")
        s = run_measured_walk(op, 1 - 1e-4, trace=True)
        cum = np.cumsum(s.trace_p)
        if not np.allclose(s.trace_norm + cum, 1.0, atol=1e-10):
            problems.append(f"{t}: probability conservation")
        if np.any(np.diff(cum) < 0) or cum[-1] > 1 + 1e-9:
            problems.append(f"{t}: monotonicity")
        if s.tau_q > s.t_c:
            problems.append(f"{t}: tau_q > T_c")
        g = build_explicit_graph(t)
        region = _reachable_avoiding_target(g)
        inbound = sum(1 for u in g.adjacency[g.target] if u in region)
        if sum(w.weight(st) for st in basis) != degree(t) * len(region) + inbound:
            problems.append(f"{t}: dimension conservation")
    return not problems, f"{len(matrix)} topologies, problems: {problems or 'none'}"


def criterion_10():
    op = full_walk_from_graph(dark_example_graph())
    s = run_measured_walk(op, 1 - 1e-6)
    tilde, total = conditional_hitting(op)
    try:
        expected_hitting_exact(op)
        raised = False
    except DarkStateDetected:
        raised = True
    ok = s.dark and s.p_total < 1 and math.isfinite(tilde) and total < 1 and raised
    return ok, f"dark={s.dark}, p_total={s.p_total:.6f}, conditional tau={tilde:.6f}, DarkStateDetected={raised}"


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}
BUDGET = {1: 120, 2: 1, 3: 1, 4: 300, 5: 300, 6: 120, 7: 900, 8: 60, 9: 120, 10: 10}


def evaluate(k):
    start = time.perf_counter()
    ok, detail = CRITERIA[k]()
    elapsed = time.perf_counter() - start
    RESULTS[k] = (ok, detail, elapsed)
    return ok, detail, elapsed


def format_line(k):
    ok, detail, elapsed = RESULTS[k]
    return f"ACCEPTANCE {k:2d}: {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s, budget {BUDGET[k]}s) {detail}"


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_acceptance(k):
    ok, detail, _ = evaluate(k)
    print(format_line(k))
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for k in sorted(CRITERIA):
        evaluate(k)
        print(format_line(k), flush=True)
        failures += not RESULTS[k][0]
    sys.exit(1 if failures else 0)
