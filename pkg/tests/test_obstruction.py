"""Averaged comparison steps, chains, and the two obstruction reports."""

import math
from fractions import Fraction

import numpy as np
import pytest

from roundlab.cyclic import (BudgetExceeded, CycleSpace, PairClass,
                             ProductCycleSpace, SimplexClass)
from roundlab.metric import empirical_moduli
from roundlab.obstruction import (ENTRY_CAP, MC_SLICES, CircleEmbeddingMap,
                                  ConstantMap, IdentityMap, SnowflakeMap,
                                  _capped_samples, chain_classes,
                                  class_extremes, coarse_obstruction_report,
                                  euler_factor, euler_factor_exact,
                                  euler_factors, level_average,
                                  resolve_builtin_map,
                                  uniform_obstruction_report,
                                  verify_chain_inequality, verify_step_inequality)


def small_space():
    return ProductCycleSpace(4, CycleSpace(8, Fraction(1)))


# ---------------------------------------------------------------------------
# euler factor

def test_euler_factor_exact_values():
    assert euler_factor_exact(2) == Fraction(9, 16)
    assert euler_factor_exact(4) == Fraction(625, 1296)


def test_euler_factor_above_inverse_e():
    for n in (1, 2, 10, 1000, 10 ** 6):
        assert euler_factor(n) > 1.0 / math.e


def test_euler_factors_vectorized_matches_scalar():
    ns = np.array([1, 2, 3, 10, 100, 4096])
    vec = euler_factors(ns)
    for n, v in zip(ns, vec):
        assert v == pytest.approx(euler_factor(int(n)), rel=1e-14)
    assert np.all(np.diff(euler_factors(np.arange(1, 10_000))) < 0)


# ---------------------------------------------------------------------------
# maps

def test_resolve_builtin_maps():
    space = small_space()
    assert isinstance(resolve_builtin_map("builtin:identity", space), IdentityMap)
    assert isinstance(resolve_builtin_map("circle", space), CircleEmbeddingMap)
    assert isinstance(resolve_builtin_map("builtin:constant", space), ConstantMap)
    snow = resolve_builtin_map("builtin:snowflake:1/2", space)
    assert isinstance(snow, SnowflakeMap)
    assert snow.alpha == 0.5
    with pytest.raises(ValueError):
        resolve_builtin_map("builtin:moebius", space)
    with pytest.raises(ValueError):
        SnowflakeMap(space, 1.5)


def test_circle_map_chord_geometry():
    space = small_space()
    emap = CircleEmbeddingMap(space)
    # full circumference is units * quantum; chord at the antipode is 2R
    assert emap.chord(4) == pytest.approx(2 * emap.radius)
    assert emap.image_distance((0, 0, 0, 0), (4, 0, 0, 0)) == pytest.approx(
        2 * emap.radius)
    # two coordinates combine in l2
    d = emap.image_distance((0, 0, 0, 0), (1, 1, 0, 0))
    assert d == pytest.approx(math.sqrt(2) * emap.chord(1))


def test_capped_samples():
    assert _capped_samples(100, 1) == 100
    assert _capped_samples(10, 1) == MC_SLICES
    assert _capped_samples(10 ** 9, 2 ** 21) == ENTRY_CAP // 2 ** 21


# ---------------------------------------------------------------------------
# level averages

def test_level_average_exact_identity():
    space = small_space()
    emap = IdentityMap(space)
    avg = level_average(emap, PairClass(2, 2), 2.0, mode="exact")
    assert avg.mean == pytest.approx(4.0)  # constant distance 2, squared
    assert avg.count == 49152
    assert avg.stderr is None


def test_level_average_mc_matches_exact():
    space = small_space()
    emap = CircleEmbeddingMap(space)
    cls = PairClass(1, 2)
    exact = level_average(emap, cls, 2.0, mode="exact")
    mc = level_average(emap, cls, 2.0, mode="mc", samples=20_000, seed=3)
    # class-constant distance: the MC mean is exact up to float noise
    assert mc.mean == pytest.approx(exact.mean, rel=1e-9)
    assert mc.stderr < 1e-9
    assert mc.count == 20_000


def test_level_average_mc_worker_independent():
    space = small_space()
    emap = IdentityMap(space)
    cls = PairClass(1, 3)
    a = level_average(emap, cls, 1.0, mode="mc", samples=4000, seed=9, workers=1)
    b = level_average(emap, cls, 1.0, mode="mc", samples=4000, seed=9, workers=4)
    assert a.mean == b.mean
    assert a.stderr == b.stderr


def test_level_average_budget():
    space = small_space()
    emap = IdentityMap(space)
    with pytest.raises(BudgetExceeded):
        level_average(emap, PairClass(1, 2), 1.0, mode="exact", budget=100)


def test_class_extremes_constant_class():
    space = small_space()
    emap = CircleEmbeddingMap(space)
    lo, hi, used = class_extremes(emap, PairClass(1, 4), samples=2000, seed=1)
    assert lo == pytest.approx(hi)
    assert used == 2000


# ---------------------------------------------------------------------------
# averaged step and chain inequalities

def test_step_circle_p2_exact_margin():
    space = small_space()
    emap = CircleEmbeddingMap(space)
    rep = verify_step_inequality(emap, SimplexClass(1, 2, 2), 2.0, mode="exact")
    c1 = emap.chord(1)
    c2 = emap.chord(2)
    assert rep.conn.mean == pytest.approx(4 * c1 * c1, rel=1e-12)
    assert rep.edge.mean == pytest.approx(2 * c2 * c2, rel=1e-12)
    assert rep.margin == pytest.approx(4 * c1 * c1 - c2 * c2, rel=1e-12)
    assert rep.margin == pytest.approx(0.5562869376523274, abs=1e-12)
    assert rep.holds
    assert not rep.assumed_roundness  # the circle map declares roundness 2


def test_step_identity_p01_exact_margin():
    space = small_space()
    emap = IdentityMap(space)
    rep = verify_step_inequality(emap, SimplexClass(1, 2, 2), 0.1, mode="exact")
    assert rep.margin == pytest.approx(1.0 - 0.5 * 2 ** 0.1, abs=1e-12)
    assert rep.margin == pytest.approx(0.46411326873185343, abs=1e-12)
    assert rep.holds
    assert rep.assumed_roundness  # identity declares nothing


def test_step_identity_fails_at_p2():
    # sup-metric distances are class constant: delta^p vs (1-1/r)(2 delta)^p
    space = small_space()
    emap = IdentityMap(space)
    rep = verify_step_inequality(emap, SimplexClass(1, 2, 2), 2.0, mode="exact")
    assert rep.margin == pytest.approx(1.0 - 0.5 * 4.0)
    assert not rep.holds


def test_step_rejects_underdeclared_map():
    space = small_space()
    emap = CircleEmbeddingMap(space)
    with pytest.raises(ValueError):
        verify_step_inequality(emap, SimplexClass(1, 2, 2), 3.0, mode="exact")


def test_chain_classes_halving():
    chain = chain_classes(SimplexClass(1, 4, 2), 3)
    assert [(c.delta, c.support) for c in chain] == [(1, 4), (2, 2), (4, 1)]
    with pytest.raises(ValueError):
        chain_classes(SimplexClass(1, 3, 2), 2)  # support not divisible
    with pytest.raises(ValueError):
        chain_classes(SimplexClass(1, 4, 2), 0)


def test_chain_telescopes():
    # each level's edge class is the next level's connecting class
    chain = chain_classes(SimplexClass(1, 4, 2), 3)
    for a, b in zip(chain, chain[1:]):
        assert a.edge_class() == b.conn_class()


def test_chain_circle_holds():
    space = ProductCycleSpace(8, CycleSpace(32, Fraction(1)))
    emap = CircleEmbeddingMap(space)
    rep = verify_chain_inequality(emap, SimplexClass(1, 4, 2), 2, 2.0,
                                mode="mc", samples=3000, seed=11)
    assert all(s["holds"] for s in rep.steps)
    assert rep.cumulative_holds
    assert rep.factor_total == pytest.approx(0.25)
    assert len(rep.averages) == 3  # two conn levels plus the last edge


def test_chain_identity_fails():
    space = ProductCycleSpace(8, CycleSpace(32, Fraction(1)))
    emap = IdentityMap(space)
    rep = verify_chain_inequality(emap, SimplexClass(1, 4, 2), 2, 2.0,
                                mode="mc", samples=3000, seed=11)
    assert not any(s["holds"] for s in rep.steps)
    assert not rep.cumulative_holds


def test_chain_worker_independent():
    space = ProductCycleSpace(8, CycleSpace(32, Fraction(1)))
    emap = CircleEmbeddingMap(space)
    a = verify_chain_inequality(emap, SimplexClass(1, 4, 2), 2, 2.0,
                              mode="mc", samples=2000, seed=4, workers=1)
    b = verify_chain_inequality(emap, SimplexClass(1, 4, 2), 2, 2.0,
                              mode="mc", samples=2000, seed=4, workers=3)
    assert [s["margin"] for s in a.steps] == [s["margin"] for s in b.steps]
    assert a.cumulative_margin == b.cumulative_margin


# ---------------------------------------------------------------------------
# coarse obstruction

def L(samples):
    return empirical_moduli([(Fraction(d), Fraction(i)) for d, i in samples])


def test_coarse_example_table():
    moduli = L([(1, 1)] + [(2 ** k, k) for k in range(1, 9)])
    rep = coarse_obstruction_report(moduli, 1.0)
    assert rep.found
    assert rep.n == 3
    assert rep.alpha == 3.0
    assert rep.alpha_exact == "3"
    assert rep.margin == pytest.approx(3.0 / math.e - 1.0, rel=1e-12)
    assert rep.odd_n_warning
    assert [row["n"] for row in rep.scanned] == [1, 2, 3]


def test_coarse_no_growth():
    rep = coarse_obstruction_report(L([(1, 1), (2, 1), (4, 1)]), 1.0,
                                    n_range=range(1, 3))
    assert not rep.found
    assert "does not outgrow" in rep.binding_constraint


def test_coarse_rho2_undefined():
    rep = coarse_obstruction_report(L([(2, 1), (4, 2)]), 1.0)
    assert not rep.found
    assert "rho2(1) undefined" in rep.binding_constraint


def test_coarse_envelope_exhausted():
    moduli = L([(1, 1)] + [(2 ** k, k) for k in range(1, 9)])
    rep = coarse_obstruction_report(moduli, 0.1)
    assert not rep.found
    assert "exhausted" in rep.binding_constraint


def test_coarse_p_validation():
    moduli = L([(1, 1), (2, 2)])
    with pytest.raises(ValueError):
        coarse_obstruction_report(moduli, 0.0)
    with pytest.raises(ValueError):
        coarse_obstruction_report(moduli, math.inf)


# ---------------------------------------------------------------------------
# uniform obstruction

def test_uniform_identity_fails_as_predicted():
    rep = uniform_obstruction_report("builtin:identity", [2], 2.0,
                                     samples=2000, seed=5)
    e = rep.entries[0]
    assert e["sup_fine"] == 0.25  # 2^-n exactly, distances class constant
    assert e["inf_coarse"] == 1.0
    assert e["bound"] == pytest.approx(math.exp(-0.5))
    assert not e["holds"]
    assert rep.obstruction_found
    assert rep.first_violation_n == 2
    assert "cannot be a uniform embedding" in rep.conclusion


def test_uniform_constant_map_degenerate():
    rep = uniform_obstruction_report("builtin:constant", [2], 2.0,
                                     samples=1000, seed=5)
    assert not rep.obstruction_found
    assert "collapses" in rep.conclusion
    assert rep.entries[0]["inf_coarse"] == 0.0


def test_uniform_p_infinite_factor_one():
    rep = uniform_obstruction_report("builtin:identity", [2], math.inf,
                                     samples=1000, seed=5)
    assert rep.entries[0]["factor"] == 1.0
    assert rep.to_dict()["p_infinite"] is True
    assert rep.obstruction_found


def test_uniform_ladder_validation():
    with pytest.raises(ValueError):
        uniform_obstruction_report("builtin:identity", [3], 2.0, samples=64)
    with pytest.raises(ValueError):
        uniform_obstruction_report("builtin:identity", [0], 2.0, samples=64)


def test_uniform_deterministic_and_worker_independent():
    a = uniform_obstruction_report("builtin:identity", [2], 2.0,
                                   samples=1000, seed=6, workers=1)
    b = uniform_obstruction_report("builtin:identity", [2], 2.0,
                                   samples=1000, seed=6, workers=4)
    assert a.entries == b.entries
