import math
import random
from fractions import Fraction

import pytest

from hcwalk.classical import (
    AlphaProfile,
    classical_hitting,
    f_e,
    first_return_time,
    format_exact,
    full_structure_edges,
    markov_first_passage,
    return_time,
    stationary_return,
    tau_general,
    tau_line,
    tau_ord,
    tau_uniform,
)
from hcwalk.errors import SingularSystem, UnsupportedLoops, ZeroLegs
from hcwalk.topology import ExplicitGraph, WalkMode, WalkTopology as T, build_explicit_graph

PEN = WalkMode.PENETRATE


def path_graph(k):
    """Path 0 - 1 - ... - k, start 0, target k."""
    return ExplicitGraph.from_edges(k + 1, [(i, i + 1) for i in range(k)], 0, k)


def test_return_time():
    assert return_time(2, 1) == 2
    assert return_time(4, 1) == 4
    for n in range(1, 5):
        for q in range(1, 5):
            assert return_time(2 * n * q, n) == 2 * q
    with pytest.raises(ZeroLegs):
        return_time(4, 0)
    with pytest.raises(ValueError):
        return_time(1, 1)


def test_return_time_matches_tail_oracle():
    # a tail of length q hanging off an anchor: leaving along the leg and
    # coming back takes 1 + (first passage from the tail's first vertex)
    for q in range(1, 6):
        g = ExplicitGraph.from_edges(q + 1, [(i, i + 1) for i in range(q)], 0, 0)
        assert first_return_time(g, 0) == return_time(2 * q, 1)


def test_tau_general_examples():
    assert tau_general(AlphaProfile(3, (1, 1, 1))) == 10
    assert tau_general(AlphaProfile(1, (1,))) == 1
    assert tau_general(AlphaProfile(2, (2, 2))) == 8


def test_alpha_profile_validation():
    with pytest.raises(ValueError):
        AlphaProfile(2, (1,))
    with pytest.raises(ValueError):
        AlphaProfile(2, (1, Fraction(1, 2)))
    assert AlphaProfile.from_edges(2, [4, 0]).alpha == (3, 1)


def test_tau_uniform_examples():
    assert tau_uniform(3, 0) == 10
    assert tau_uniform(2, 8) == 20
    with pytest.raises(ValueError):
        tau_uniform(2, -1)


@pytest.mark.parametrize("d", range(1, 21))
def test_tau_ord_last_step(d):
    assert tau_ord(d, d - 1) == 2**d - 1


def test_tau_uniform_equals_general():
    rng = random.Random(7)
    for _ in range(200):
        d = rng.randint(1, 30)
        e = rng.randint(0, 100)
        assert tau_uniform(d, e) == tau_general(AlphaProfile(d, (Fraction(e, d) + 1,) * d))


def test_tau_uniform_scaling():
    for d in range(1, 25):
        for e in (0, 1, 7, 64):
            assert tau_uniform(d, e) == (Fraction(e, d) + 1) * tau_uniform(d, 0)


def test_tau_general_monotone():
    rng = random.Random(3)
    for _ in range(50):
        d = rng.randint(1, 12)
        alpha = [Fraction(rng.randint(1, 20), rng.randint(1, 4)) + 1 for _ in range(d)]
        base = tau_general(AlphaProfile(d, alpha))
        x = rng.randrange(d)
        bumped = list(alpha)
        bumped[x] += Fraction(1, 10)
        assert tau_general(AlphaProfile(d, bumped)) > base


def test_tau_line_intermediate_positions():
    # from weight x on the plain cube, against the first-passage solve
    g = build_explicit_graph(T.bare(4, False))
    from hcwalk.classical import first_passage_times

    times = first_passage_times(g)
    for v in range(g.vertex_count):
        x = bin(v).count("1")
        assert times[v] == tau_line(AlphaProfile.uniform(4, 0), x)


def test_f_e_examples():
    assert f_e(2, [2, 2], 1) == 0
    assert f_e(1, [2, 2], 1) == 8
    assert f_e(1, [2, 2, 2], 2) == 32
    assert f_e(3, [2, 2, 2]) == 0
    with pytest.raises(ValueError):
        f_e(4, [2, 2, 2])


def test_full_structure_edges_by_count():
    for dims in ([2, 2], [2, 2, 2], [3, 2, 1], [1, 1]):
        g = build_explicit_graph(T.concat(dims, self_loops=False))
        assert full_structure_edges(dims) == g.total_degree()


def test_literal_total_edges_reading_differs():
    # the f_e sum evaluated at p = 0 undercounts the full structure
    assert f_e(0, [2, 2]) != full_structure_edges([2, 2])


@pytest.mark.parametrize(
    "t, expected",
    [
        (T.bare(1, False), 1),
        (T.bare(2, False), 4),
        (T.bare(3, False), 10),
        (T.tails(2, 1, 1, False), 8),
        (T.concat([2, 2], self_loops=False), 20),
        (T.concat([2, 2], PEN, False), 60),
        (T.concat([2, 2, 2], self_loops=False), 68),
        (T.concat([2, 2, 2], PEN, False), 340),
    ],
    ids=str,
)
def test_classical_hitting_values(t, expected):
    assert classical_hitting(t) == expected


def test_penetration_legs():
    # inbound legs 4 + 20 on [2, 2]; the outbound leg carries the rest
    assert tau_uniform(2, 0) + tau_uniform(2, 8) == 24
    assert classical_hitting(T.concat([2, 2], PEN, False)) - 24 == 36


@pytest.mark.parametrize(
    "t",
    [T.tails(2, 1, 1), T.tails(3, 2, 2), T.tails(2, 3, 1), T.tails(1, 1, 4)],
    ids=str,
)
def test_tails_with_loops_matches_oracle(t):
    g = build_explicit_graph(t, prune_target_attachment=True)
    assert classical_hitting(t) == markov_first_passage(g)


def test_tails_with_loops_alpha():
    # padded tails of one cube vertex have degree sum n q p + n
    d, n, q = 3, 2, 2
    p = d + n
    assert classical_hitting(T.tails(d, n, q)) == (Fraction(n * q * p + n, d) + 1) * tau_ord(d)


def test_loops_rejected_for_concat():
    with pytest.raises(UnsupportedLoops):
        classical_hitting(T.concat([2, 2]))


def test_markov_small_graphs():
    assert markov_first_passage(path_graph(1)) == 1
    assert markov_first_passage(build_explicit_graph(T.bare(2, False))) == 4
    assert markov_first_passage(build_explicit_graph(T.bare(3, False))) == 10
    assert markov_first_passage(path_graph(3)) == 9


def test_markov_unreachable():
    g = ExplicitGraph.from_edges(4, [(0, 1), (2, 3)], 0, 3)
    with pytest.raises(SingularSystem):
        markov_first_passage(g)


def test_stationary_return():
    for d in range(1, 6):
        g = build_explicit_graph(T.bare(d, False))
        assert stationary_return(g, 0) == 2**d
    assert stationary_return(path_graph(1), 0) == 2
    tri = ExplicitGraph.from_edges(3, [(0, 1), (1, 2), (2, 0)], 0, 2)
    assert stationary_return(tri, 1) == 3
    assert first_return_time(tri, 1) == 3


@pytest.mark.parametrize(
    "t",
    [T.tails(2, 1, 2, False), T.concat([2, 2], self_loops=False), T.bare(3, False), T.tails(3, 2, 2)],
    ids=str,
)
def test_stationary_return_identity(t):
    g = build_explicit_graph(t)
    total = g.total_degree()
    for v in range(g.vertex_count):
        assert stationary_return(g, v) * g.degree(v) == total
        assert stationary_return(g, v) == first_return_time(g, v)


def test_format_exact():
    assert format_exact(Fraction(6, 3)) == "2"
    assert format_exact(Fraction(50, 3)) == "50/3"
    assert math.isclose(float(Fraction(50, 3)), 16.6666666, rel_tol=1e-6)
