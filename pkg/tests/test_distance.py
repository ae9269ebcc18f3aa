import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import delannoy_paths, random_grid_path
from roughscl.distance import (
    CostGrid,
    GridTooLargeError,
    brute_force_distance,
    build_cost_grid,
    dp_distance,
    identity,
    kappa,
    phi,
    stability_bound_improved,
    value_function,
    witness_parameterization,
)
from roughscl.paths import (
    PiecewiseLinearPath,
    RegularityBounds,
    compose,
    evaluate,
    running_max,
    staircase,
    uniform_distance,
)
from roughscl.solver import DataNorms, burgers, continuous_dependence_rhs, data_norms, GridSolution

B10 = RegularityBounds(10.0, 10.0)
ZIGZAG = PiecewiseLinearPath([0, 1, 2, 3], [0, 1, -1, 2])
LEVELS = [0.5, 1.0, 3.0, 10.0, math.inf]


def random_pair(rng, max_breaks=5, tau=1.0):
    def one():
        idx, _, v = random_grid_path(rng, int(rng.integers(2, max_breaks + 1)), n_steps=100, scale=0.6)
        return PiecewiseLinearPath(idx / 100 * tau, v)

    b1 = RegularityBounds(*rng.choice(LEVELS, 2))
    b2 = RegularityBounds(*rng.choice(LEVELS, 2))
    return one(), one(), b1, b2


def hand_grid(kinds1, kinds2, p1, p2, terminal=0.0):
    n1, n2 = len(kinds1), len(kinds2)
    return CostGrid(
        t1_breaks=np.linspace(0, 1, n1),
        t2_breaks=np.linspace(0, 1, n2),
        kinds1=np.array(kinds1),
        kinds2=np.array(kinds2),
        rho1_plus=np.array(p1, dtype=float),
        rho1_minus=np.zeros(n1),
        rho2_plus=np.array(p2, dtype=float),
        rho2_minus=np.zeros(n2),
        c_plus=-1.0,
        c_minus=-1.0,
        k_plus_region=(0, 0),
        k_minus_region=(n1, n2),
        terminal_cost=terminal,
        tau=1.0,
    )


def test_identical_paths_have_zero_distance():
    rep = dp_distance(ZIGZAG, ZIGZAG, B10, B10)
    assert rep.value == 0.0
    assert np.all(rep.witness[:, 0] == rep.witness[:, 1])
    np.testing.assert_array_equal(rep.witness[-1], [3.0, 3.0])


def test_monotone_self_grid():
    z = PiecewiseLinearPath([0, 1], [0, 2])
    g = build_cost_grid(z, z, B10, B10)
    assert g.shape == (1, 1)
    assert g.vertical_term(1, 1) == 0.0 and g.horizontal_term(1, 1) == 0.0


def test_zigzag_costs_vanish_on_diagonal():
    g = build_cost_grid(ZIGZAG, ZIGZAG, B10, B10)
    for j in range(g.shape[0] + 1):
        assert g.vertical_term(j, j) == 0.0
        assert g.horizontal_term(j, j) == 0.0


def test_k_plus_region_is_the_threshold_up_set():
    rng = np.random.default_rng(3)
    for _ in range(30):
        z1, z2, _, _ = random_pair(rng, 8)
        g = build_cost_grid(z1, z2, B10, B10)
        r1 = running_max(z1, B10)
        r2 = running_max(z2, B10)
        n1, n2 = g.shape
        inside = np.zeros((n1 + 1, n2 + 1), dtype=bool)
        for j, s1 in enumerate(g.t1_breaks):
            for k, s2 in enumerate(g.t2_breaks):
                inside[j, k] = max(r1(s1), r2(s2)) > 0.1
                assert g.in_k_plus(j, k) == inside[j, k]
        # up-set: membership survives moving right or up
        assert np.all(inside[1:, :] >= inside[:-1, :])
        assert np.all(inside[:, 1:] >= inside[:, :-1])


def test_reparameterized_pair_has_zero_distance():
    rng = np.random.default_rng(8)
    for _ in range(20):
        z, _, b, _ = random_pair(rng, 8)
        alpha = staircase(rng, 1.0, int(rng.integers(1, 5)))
        assert dp_distance(z, compose(z, alpha), b, b).value == 0.0


def test_hand_planted_two_by_two():
    # column line 1 costs |5 - rho2| where it is crossed: 5 on the bottom row,
    # 1 higher up, so the optimum climbs first
    g = hand_grid([0, 1, 0], [0, 0, 0], [0, 5, 5], [0, 4, 6])
    assert brute_force_distance(g) == 1.0
    V = value_function(g)
    assert V[0, 0] == 1.0


def test_single_cell_brute_force():
    g = hand_grid([0, 1], [0, 1], [0, 2], [0, 0.5], terminal=0.7)
    # the diagonal charges both lines at once: max(|2-0.5|, |2-0.5|, 0.7)
    # the staircases charge one line at rho2=0 or rho1=0
    assert brute_force_distance(g) == pytest.approx(1.5)
    assert value_function(g)[0, 0] == pytest.approx(1.5)


def test_brute_force_refuses_large_grids():
    g = hand_grid([0] * 8, [0] * 8, [0] * 8, [0] * 8)
    with pytest.raises(GridTooLargeError):
        brute_force_distance(g, max_cells=36)


def test_dp_equals_minimum_of_phi_over_all_lattice_paths():
    """Independent route: phi() recomputes ORM, running extrema and kappa from
    the composed paths for every lattice path of the grid."""
    rng = np.random.default_rng(12)
    done = 0
    while done < 15:
        z1, z2, b1, b2 = random_pair(rng, 4)
        g = build_cost_grid(z1, z2, b1, b2)
        if g.shape[0] * g.shape[1] > 9:
            continue
        best = math.inf
        for nodes in delannoy_paths(*g.shape):
            idx = np.array(nodes)
            w = np.column_stack((g.t1_breaks[idx[:, 0]], g.t2_breaks[idx[:, 1]]))
            a1, a2 = witness_parameterization(w)
            best = min(best, phi(z1, z2, a1, a2, b1, b2))
        assert dp_distance(z1, z2, b1, b2).value == pytest.approx(best, abs=1e-12)
        done += 1


def test_dp_value_equals_phi_at_witness():
    rng = np.random.default_rng(2)
    for _ in range(60):
        z1, z2, b1, b2 = random_pair(rng, 6)
        rep = dp_distance(z1, z2, b1, b2)
        a1, a2 = witness_parameterization(rep.witness)
        assert phi(z1, z2, a1, a2, b1, b2) == pytest.approx(rep.value, abs=1e-12)


def test_report_invariants():
    rng = np.random.default_rng(5)
    for _ in range(50):
        z1, z2, b1, b2 = random_pair(rng, 6)
        rep = dp_distance(z1, z2, b1, b2)
        assert rep.value >= abs(z1.values[-1] - z2.values[-1])
        w = rep.witness
        np.testing.assert_array_equal(w[0], [0, 0])
        np.testing.assert_array_equal(w[-1], [1, 1])
        assert np.all(np.diff(w, axis=0) >= 0)
        assert np.all(np.diff(w, axis=0).sum(axis=1) > 0)


def test_phi_identity_bounded_by_sup_distance():
    rng = np.random.default_rng(17)
    for _ in range(50):
        z1, z2, b1, b2 = random_pair(rng, 8)
        ident = identity(1.0)
        v = phi(z1, z2, ident, ident, b1, b2)
        assert v <= uniform_distance(z1, z2) + 1e-12
        assert dp_distance(z1, z2, b1, b2).value <= v + 1e-12


def test_phi_self_is_zero():
    ident = identity(3.0)
    assert phi(ZIGZAG, ZIGZAG, ident, ident, B10, B10) == 0.0


def test_phi_symmetric():
    rng = np.random.default_rng(23)
    for _ in range(30):
        z1, z2, b1, b2 = random_pair(rng, 6)
        a = staircase(rng, 1.0, 3)
        b = staircase(rng, 1.0, 2)
        assert phi(z1, z2, a, b, b1, b2) == phi(z2, z1, b, a, b2, b1)


def test_phi_parameterization_independent():
    rng = np.random.default_rng(31)
    for _ in range(30):
        z1, z2, b1, b2 = random_pair(rng, 6)
        a1, a2 = staircase(rng, 1.0, 3), staircase(rng, 1.0, 3)
        # strictly increasing time warp of the common parameter
        cuts = np.sort(rng.uniform(0, 1, 4))
        beta = PiecewiseLinearPath(np.concatenate(([0], cuts, [1])), np.concatenate(([0], np.sort(rng.uniform(0, 1, 4)), [1])), anchored=False)
        if np.any(np.diff(beta.values) <= 0):
            continue
        v = phi(z1, z2, a1, a2, b1, b2)
        w = phi(z1, z2, compose(a1, beta), compose(a2, beta), b1, b2)
        assert w == pytest.approx(v, abs=1e-12)


def test_kappa_infinite_for_infinite_level():
    ident = identity(3.0)
    b = RegularityBounds(0.0, 10.0)
    assert kappa(ZIGZAG, ZIGZAG, ident, ident, b, B10, +1) == math.inf
    assert kappa(ZIGZAG, ZIGZAG, ident, ident, B10, B10, +1) == pytest.approx(0.1)
    assert kappa(ZIGZAG, ZIGZAG, ident, ident, B10, B10, -1) == pytest.approx(1.55)


def test_refinement_never_increases_value():
    rng = np.random.default_rng(41)
    for _ in range(100):
        z1, z2, b1, b2 = random_pair(rng, 6)
        coarse = dp_distance(z1, z2, b1, b2, refine=False).value
        fine = dp_distance(z1, z2, b1, b2, refine=True).value
        assert fine <= coarse + 1e-15
        if coarse == 0.0:
            assert fine == 0.0


def test_refinement_keeps_zero_optimum():
    rng = np.random.default_rng(43)
    for _ in range(20):
        z, _, b, _ = random_pair(rng, 8)
        w = compose(z, staircase(rng, 1.0, 3))
        assert dp_distance(z, w, b, b, refine=False).value == 0.0
        assert dp_distance(z, w, b, b, refine=True).value == 0.0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_dp_matches_brute_force_property(seed):
    rng = np.random.default_rng(seed)
    z1, z2, b1, b2 = random_pair(rng, 4)
    g = build_cost_grid(z1, z2, b1, b2)
    if g.shape[0] * g.shape[1] > 36:
        return
    assert value_function(g)[0, 0] == pytest.approx(brute_force_distance(g), abs=1e-12)


def _norms():
    return DataNorms(l1_diff=0.3, bv1=2.0, bv2=2.0, l2sq1=1.0, l2sq2=1.5, fprime_sup=1.0, fsecond_sup=1.0)


def test_improved_bound_reduces_to_data_term():
    z = PiecewiseLinearPath([0, 1], [0, 1])
    assert stability_bound_improved(_norms(), z, z, 0.0) == 0.3


def test_improved_bound_monotone_in_distance():
    z1 = PiecewiseLinearPath([0, 1], [0, 1])
    z2 = PiecewiseLinearPath([0, 0.5, 1], [0, 0.4, 0.9])
    vals = [stability_bound_improved(_norms(), z1, z2, d) for d in np.linspace(0, 2, 21)]
    assert np.all(np.diff(vals) > 0)


def test_improved_bound_not_above_sup_version():
    rng = np.random.default_rng(7)
    u = GridSolution.from_function(lambda x: np.exp(-x * x), -3, 3, 60)
    v = GridSolution.from_function(lambda x: 0.8 * np.exp(-x * x), -3, 3, 60)
    norms = data_norms(u, v, burgers())
    for _ in range(30):
        z1, z2, b1, b2 = random_pair(rng, 6)
        d = dp_distance(z1, z2, b1, b2).value
        sup = uniform_distance(z1, z2)
        gap = abs(evaluate(z1, 1.0) - evaluate(z2, 1.0))
        assert d <= sup + 1e-12
        assert stability_bound_improved(norms, z1, z2, d) <= continuous_dependence_rhs(norms, gap, sup) + 1e-12


def test_improved_bound_needs_norms():
    z = PiecewiseLinearPath([0, 1], [0, 1])
    with pytest.raises(ValueError):
        stability_bound_improved(None, z, z, 0.0)
