import pytest

from conglab.digraph import build_digraph
from conglab.partitions import (
    ImpossibleBranchError,
    MgState,
    NotWeakError,
    OddParityError,
    OrbitModel,
    build_group_partition,
    build_orbit_partition,
    canonical_form,
    empty_oracle,
    mg_compute,
    mg_edge_property_check,
    mg_support,
    two_coloring,
    verify_group_partition,
)
from conglab.systems import CongruenceSystem, complement, full_mask, mask_of, proper_masks
from conglab.transform import transform_to_weak_plus_selfcomp
from conglab.words import IDENTITY, Presentation, Word, enumerate_ball, multiply, parse_word

Z4 = Presentation(1, 0)


def hausdorff_parts(hausdorff):
    result = transform_to_weak_plus_selfcomp(hausdorff)
    pres = Presentation(result.system.m, result.m_bar)
    return result, pres


# -- coloring ---------------------------------------------------------------


def test_coloring_no_weak_part():
    colors = two_coloring(CongruenceSystem(2, ((0b01, 0b10),)), 0)
    assert colors == {0b01: 0, 0b10: 1}


def test_coloring_hausdorff_transformed(hausdorff):
    result, _ = hausdorff_parts(hausdorff)
    colors = two_coloring(result.system, result.m_bar)
    assert colors[mask_of([1])] == colors[mask_of([2])] == colors[mask_of([3])] == 0
    assert colors[mask_of([2, 3])] == colors[mask_of([1, 3])] == colors[mask_of([1, 2])] == 1


def test_coloring_properties(fiveset):
    colors = two_coloring(fiveset, fiveset.m)
    for mask in proper_masks(fiveset.r):
        assert colors[mask] != colors[complement(mask, fiveset.r)]
    for left, right in fiveset.congruences:
        assert colors[left] == colors[right]


def test_coloring_rejects_non_weak(hausdorff):
    with pytest.raises(NotWeakError):
        two_coloring(hausdorff, hausdorff.m)


# -- group partitions --------------------------------------------------------


def test_z4_micro_model(r2_swap):
    part = build_group_partition(r2_swap, 0, Z4, IDENTITY)
    table = {w: part.assign(w) for w in enumerate_ball(Z4, 3)}
    assert table == {
        IDENTITY: 1,
        parse_word("t1", Z4): 2,
        parse_word("t1^2", Z4): 1,
        parse_word("t1^3", Z4): 2,
    }
    assert verify_group_partition(part, 3).ok


def test_anchor_property(hausdorff):
    result, pres = hausdorff_parts(hausdorff)
    anchor = parse_word("s1^2", pres)
    part = build_group_partition(result.system, result.m_bar, pres, anchor)
    assert part.assign(IDENTITY) == part.assign(anchor)


def test_odd_parity_rejected(r2_swap):
    with pytest.raises(OddParityError):
        build_group_partition(r2_swap, 0, Z4, parse_word("t1", Z4))


def test_identity_anchor_total_on_ball(hausdorff):
    result, pres = hausdorff_parts(hausdorff)
    part = build_group_partition(result.system, result.m_bar, pres, IDENTITY)
    table = part.assignment_table(4)
    assert all(1 <= piece <= 3 for piece in table.values())


def test_verify_hausdorff_transformed(hausdorff):
    result, pres = hausdorff_parts(hausdorff)
    part = build_group_partition(result.system, result.m_bar, pres,
                                 parse_word("s1^2", pres))
    report = verify_group_partition(part, 5)
    assert report.ok and report.words_checked > 1000


def test_verify_fiveset(fiveset):
    result = transform_to_weak_plus_selfcomp(fiveset)
    pres = Presentation(5, 5)
    part = build_group_partition(result.system, result.m_bar, pres,
                                 parse_word("s1^2", pres))
    assert verify_group_partition(part, 3).ok
    assert part.assign(IDENTITY) == part.assign(parse_word("s1^2", pres))


def test_verify_mixed_s4(mixed):
    result = transform_to_weak_plus_selfcomp(mixed)
    pres = Presentation(result.system.m, result.m_bar)
    part = build_group_partition(result.system, result.m_bar, pres, IDENTITY)
    assert verify_group_partition(part, 6).ok


def test_memoized_and_fresh_assignments_agree(hausdorff):
    result, pres = hausdorff_parts(hausdorff)
    anchor = parse_word("s1^2", pres)
    first = build_group_partition(result.system, result.m_bar, pres, anchor)
    ball = list(enumerate_ball(pres, 4))
    table_forward = {w: first.assign(w) for w in ball}
    second = build_group_partition(result.system, result.m_bar, pres, anchor)
    table_backward = {w: second.assign(w) for w in reversed(ball)}
    assert table_forward == table_backward


def test_corrupted_assignment_detected(r2_swap):
    part = build_group_partition(r2_swap, 0, Z4, IDENTITY)
    part._memo[parse_word("t1^2", Z4)] = 2  # sabotage
    report = verify_group_partition(part, 3)
    assert not report.ok
    assert report.violation is not None


# -- the M recursion ----------------------------------------------------------


def test_mg_identity_and_first_step(fiveset):
    pres = Presentation(5, 5)
    state = MgState(fiveset, 1, pres, empty_oracle)
    m_id, mplus_id = mg_compute(state, IDENTITY)
    assert m_id == mplus_id == mask_of([2, 3, 4, 5])
    m_f1, _ = mg_compute(state, parse_word("s1", pres))
    assert m_f1 == mask_of([1, 3, 4, 5])


def test_mg_empty_propagates(fiveset):
    pres = Presentation(5, 5)
    state = MgState(fiveset, 1, pres, empty_oracle)
    support = mg_support(state, 40)
    dead = next(w for w in enumerate_ball(pres, 3) if w not in support and w)
    m, mplus = mg_compute(state, dead)
    assert m == 0
    for gen in range(1, 6):
        longer = multiply(Word(((gen, 1),)), dead, pres)
        if longer not in support:
            assert mg_compute(state, longer)[0] == 0


def test_mg_support_finite_and_bounded(fiveset):
    pres = Presentation(5, 5)
    state = MgState(fiveset, 1, pres, empty_oracle)
    support = mg_support(state, 40)
    from conglab.words import word_length

    assert 0 < len(support) < 1000
    assert max(word_length(w, pres) for w in support) < 32  # 2^r


def test_mg_edge_property_with_trace(fiveset):
    pres = Presentation(5, 5)
    state = MgState(fiveset, 1, pres, empty_oracle)
    graph = build_digraph(fiveset, "s2")
    report = mg_edge_property_check(state, 3, digraph=graph, link_radius=32)
    assert report.ok


def test_mg_edge_property_s4(mixed):
    result = transform_to_weak_plus_selfcomp(mixed)
    pres = Presentation(result.system.m, result.m_bar)
    state = MgState(result.system, 1, pres, empty_oracle)
    graph = build_digraph(result.system, "s4", result.m_bar)
    report = mg_edge_property_check(state, 4, digraph=graph,
                                    link_radius=1 << (result.system.r + 1))
    assert report.ok


def test_mg_corrupted_oracle_detected(fiveset):
    pres = Presentation(5, 5)

    def bad_oracle(word):
        # violates the membership equivalences: one lone word claims pieces
        return mask_of([1, 2]) if word == parse_word("s1", pres) else 0

    state = MgState(fiveset, 1, pres, bad_oracle)
    report = mg_edge_property_check(state, 2)
    assert not report.ok


def test_mg_impossible_branch_raises(r2_swap):
    pres = Presentation(1, 0)

    def full_oracle(word):
        return full_mask(2)  # claims every piece: M+ becomes full

    state = MgState(r2_swap, 1, pres, full_oracle)
    with pytest.raises(ImpossibleBranchError):
        mg_compute(state, parse_word("t1", pres))


# -- orbits -------------------------------------------------------------------


def test_canonical_form_examples(r2_swap):
    w = parse_word("t1^2", Z4)
    orbit = OrbitModel(w, Z4)
    assert canonical_form(orbit, w) == IDENTITY
    assert canonical_form(orbit, parse_word("t1", Z4)) == parse_word("t1", Z4)
    assert canonical_form(orbit, parse_word("t1^3", Z4)) == parse_word("t1", Z4)


def test_canonical_form_generic(hausdorff):
    result, pres = hausdorff_parts(hausdorff)
    w = parse_word("s1^2", pres)
    orbit = OrbitModel(w, pres)
    from conglab.words import power

    for g in enumerate_ball(pres, 3):
        rep = canonical_form(orbit, g)
        assert orbit.is_canonical(rep)
        for j in (-2, -1, 0, 1, 2):
            assert canonical_form(orbit, multiply(g, power(w, j, pres), pres)) == rep


def test_canonical_forms_distinct(hausdorff):
    result, pres = hausdorff_parts(hausdorff)
    orbit = OrbitModel(parse_word("s1^2", pres), pres)
    reps = {canonical_form(orbit, g) for g in enumerate_ball(pres, 3)}
    assert len(reps) > 1  # and all are canonical
    assert all(orbit.is_canonical(rep) for rep in reps)


def test_orbit_model_validation(r2_swap):
    with pytest.raises(ValueError):
        OrbitModel(IDENTITY, Z4)
    with pytest.raises(OddParityError):
        OrbitModel(parse_word("t1", Z4), Z4)
    pres = Presentation(1, 1)
    with pytest.raises(ValueError):
        # starts with s1 and ends with s1^-1: forbidden ending rho'
        OrbitModel(parse_word("s1 s1^-1", pres), pres)  # reduces to identity
    mix = Presentation(2, 1)
    with pytest.raises(ValueError):
        OrbitModel(parse_word("s1 t1^2 s1^-1", mix), mix)


def test_orbit_tau_square_two_points(r2_swap):
    w = parse_word("t1^2", Z4)
    orbit = OrbitModel(w, Z4)
    part = build_group_partition(r2_swap, 0, Z4, w)
    reps, check = build_orbit_partition(orbit, part, 3)
    assert check.ok
    assert reps == {IDENTITY: 1, parse_word("t1", Z4): 2}


def test_orbit_free_passthrough(r2_swap):
    part = build_group_partition(r2_swap, 0, Z4, IDENTITY)
    table, check = build_orbit_partition(None, part, 3)
    assert check.ok
    assert len(table) == 4


def test_orbit_hausdorff_fixed_word(hausdorff):
    result, pres = hausdorff_parts(hausdorff)
    w = parse_word("s1^2", pres)
    orbit = OrbitModel(w, pres)
    part = build_group_partition(result.system, result.m_bar, pres, w)
    reps, check = build_orbit_partition(orbit, part, 4)
    assert check.ok
    assert len(reps) > 10


def test_orbit_requires_matching_anchor(hausdorff):
    result, pres = hausdorff_parts(hausdorff)
    orbit = OrbitModel(parse_word("s1^2", pres), pres)
    part = build_group_partition(result.system, result.m_bar, pres, IDENTITY)
    with pytest.raises(ValueError, match="anchor"):
        build_orbit_partition(orbit, part, 3)
