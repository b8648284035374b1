"""Word metrics, the cyclic-product comparison, roundness probes, and the
block projection check."""

import numpy as np
import pytest

from roundlab.cayley import (CutoffExceeded, ExplicitGenerators,
                             FamilyGenerators, MStarSpace, bfs_ball,
                             block_projection_check, cayley_roundness_upper,
                             family_word_distances, projection_generators,
                             standard_basis_generators, verify_mstar_isometry,
                             word_distance)


def test_family_validation():
    with pytest.raises(ValueError):
        FamilyGenerators(0, 3)
    with pytest.raises(ValueError):
        FamilyGenerators(2, 1)
    with pytest.raises(ValueError):
        FamilyGenerators(2, 3, "zigzag")


def test_family_counts():
    merged = FamilyGenerators(4, 3, "merged")
    literal = FamilyGenerators(4, 3, "literal")
    assert merged.count() == 624
    assert literal.count() == 160
    assert len(merged.enumerate()) == 624
    assert len(literal.enumerate()) == 160
    assert merged.contains((1, -3, 0, 1))
    assert not merged.contains((2, 0, 0, 0))
    assert literal.contains((3, -3, 0, 3))
    assert literal.contains((1, 0, -1, 1))
    assert not literal.contains((1, 3, 0, 0))  # mixes units with jumps
    with pytest.raises(ValueError):
        FamilyGenerators(8, 3, "merged").enumerate()  # 390624 generators


def test_explicit_generator_validation():
    with pytest.raises(ValueError):
        ExplicitGenerators.make(2, [(1, 0)])  # inverse missing
    with pytest.raises(ValueError):
        ExplicitGenerators.make(2, [(0, 0)])
    gens = standard_basis_generators(2)
    assert gens.count() == 4
    assert gens.contains((0, -1))
    assert not gens.contains((1, 1))


def test_word_distance_explicit_bfs():
    gens = standard_basis_generators(2)
    assert word_distance((0, 0), (2, 3), gens) == 5
    assert word_distance((1, 1), (1, 1), gens) == 0
    with pytest.raises(CutoffExceeded) as exc:
        word_distance((0, 0), (2, 3), gens, cutoff=3)
    assert exc.value.lower_bound == 4


def test_word_distance_family_cutoff():
    gens = FamilyGenerators(1, 5, "merged")
    assert word_distance((0,), (7,), gens) == 3  # jump 5 plus two units
    with pytest.raises(CutoffExceeded) as exc:
        word_distance((0,), (50,), gens, cutoff=5)
    assert exc.value.lower_bound == 10


@pytest.mark.parametrize("variant", ["merged", "literal"])
def test_family_solver_matches_bfs(variant):
    gens = FamilyGenerators(3, 4, variant)
    ball = bfs_ball(gens.enumerate(), 3)
    states = np.array(list(ball), dtype=np.int64)
    depths = np.array([ball[tuple(s)] for s in states.tolist()])
    solved = family_word_distances(states, 4, variant)
    assert np.array_equal(solved, depths)


def test_family_solver_merged_vs_literal_diverge():
    # one mixed step suffices merged; literal pays for the unit separately
    d = np.array([[1, 3]], dtype=np.int64)
    assert family_word_distances(d, 3, "merged")[0] == 1
    assert family_word_distances(d, 3, "literal")[0] == 2


def test_bfs_ball_diamond():
    ball = bfs_ball(standard_basis_generators(2).enumerate(), 2)
    assert len(ball) == 13
    assert ball[(1, 1)] == 2
    with pytest.raises(ValueError):
        bfs_ball([], 2)


# ---------------------------------------------------------------------------
# cyclic-product comparison

def test_mstar_space_shape():
    space = MStarSpace(2)
    assert space.coords == 4
    assert space.period == 4
    assert space.jump == 3
    assert space.distance((1, 1, 1, 1), (1, 1, 2, 4)) == 1
    with pytest.raises(ValueError):
        MStarSpace(3)
    with pytest.raises(ValueError):
        space.distance((0, 1, 1, 1), (1, 1, 1, 1))


def test_mstar_merged_exhaustive_clean():
    rep = verify_mstar_isometry(2, mode="exhaustive", variant="merged")
    assert rep.ok
    assert rep.pairs_checked == 32640
    assert rep.mismatch_count == 0
    assert rep.max_word_distance == 2


def test_mstar_literal_exhaustive_fails():
    rep = verify_mstar_isometry(2, mode="exhaustive", variant="literal")
    assert not rep.ok
    assert rep.mismatch_count == 4848
    first = rep.mismatches[0]
    assert first == {"u": [1, 1, 1, 1], "v": [1, 1, 2, 4],
                     "cyclic": 1, "word": 2}
    assert len(rep.mismatches) <= 20


def test_mstar_exhaustive_infeasible_for_n4():
    with pytest.raises(ValueError):
        verify_mstar_isometry(4, mode="exhaustive")
    with pytest.raises(ValueError):
        verify_mstar_isometry(2, mode="jitter")


def test_mstar_sampled_clean_and_deterministic():
    a = verify_mstar_isometry(4, mode="sampled", budget=2000, seed=3)
    assert a.ok
    assert a.pairs_checked == 2000
    b = verify_mstar_isometry(4, mode="sampled", budget=2000, seed=3,
                              workers=2)
    assert a.to_dict() == b.to_dict()
    c = verify_mstar_isometry(2, mode="sampled", variant="literal",
                              budget=2000, seed=3)
    assert not c.ok  # sampling finds the literal mismatches quickly


# ---------------------------------------------------------------------------
# roundness probes

def test_roundness_z2():
    gens = standard_basis_generators(2)
    rep = cayley_roundness_upper(gens, (1, 0), (0, 1))
    assert rep.edges == (2, 2)
    assert rep.conns == (1, 1, 1, 1)
    assert rep.canonical
    assert rep.critical_p == 1.0
    assert rep.gap_at_2 == -4.0
    assert rep.witness.xs == ((0, 0), (1, 1))


def test_roundness_probe_dim4():
    gens = FamilyGenerators(4, 3, "merged")
    rep = cayley_roundness_upper(gens, (1, 1, 1, 1), (1, -1, 1, -1))
    assert rep.edges == (2, 2)
    assert rep.conns == (1, 1, 1, 1)
    assert rep.critical_p == 1.0
    assert rep.gap_at_2 == -4.0
    d = rep.to_dict()
    assert d["statement"].startswith("roundness")


def test_roundness_probe_degeneracies():
    merged2 = FamilyGenerators(2, 3, "merged")
    with pytest.raises(ValueError):
        # e1 + e2 is itself a merged generator
        cayley_roundness_upper(merged2, (1, 0), (0, 1))
    gens = standard_basis_generators(2)
    with pytest.raises(ValueError):
        cayley_roundness_upper(gens, (1, 0), (1, 0))
    with pytest.raises(ValueError):
        cayley_roundness_upper(gens, (1, 0), (-1, 0))
    with pytest.raises(ValueError):
        cayley_roundness_upper(gens, (2, 0), (0, 1))  # not a generator


# ---------------------------------------------------------------------------
# block projection

def test_projection_generators_literal_count():
    gens = projection_generators((2, 2), (3, 8), "literal")
    assert len(gens) == 96  # 8 jumps per block plus 80 unit moves
    assert all(any(g) for g in gens)
    as_set = set(gens)
    assert all(tuple(-x for x in g) in as_set for g in gens)
    with pytest.raises(ValueError):
        projection_generators((2, 2), (3,), "literal")


def test_block_projection_default_toy():
    rep = block_projection_check()
    assert rep.ok
    assert rep.mismatch_count == 0
    assert rep.states_full == 15769
    assert len(rep.block_reports) == 2
    assert all(b["generators"] == 16 for b in rep.block_reports)
    assert all(b["states_checked_in_full"] > 0 for b in rep.block_reports)


def test_block_projection_merged_toy():
    rep = block_projection_check(variant="merged", radius=2)
    assert rep.ok
    assert rep.mismatch_count == 0
