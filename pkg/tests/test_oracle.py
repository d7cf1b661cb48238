import numpy as np
import pytest

from diracqca.core import make_mass, transition_matrices
from diracqca.oracle import (MAX_T, PathClass, PathString, ResourceGuardError, all_paths,
                             classify, coefficient_recount, is_forbidden,
                             kernel_bruteforce, product, skeleton, structure_check)
from diracqca.pathsum import C01, C10, kernel


def test_pathstring_tally():
    p = PathString("RRFLLFR")
    assert (p.tally.r, p.tally.l, p.tally.f) == (3, 2, 2)
    assert p.tally.d == 1 and p.t == 7
    assert p.applied == "RFLLFRR"


def test_pathstring_rejects_bad_letters():
    with pytest.raises(ValueError):
        PathString("RXF")


def test_counter_order():
    words = [p.word for p in all_paths(2)]
    assert words[:4] == ["RR", "RL", "RF", "LR"]
    assert PathString.from_index(5, 2).word == "LF"
    assert [PathString.from_index(i, 3).word for i in range(27)] == [p.word for p in all_paths(3)]


def test_product_flip_then_right():
    # h_1 = F, h_2 = R: A_R A_F, nonzero only at (row R, col L)
    mass = make_mass(0.6)
    a_r, _, a_f = transition_matrices(mass)
    got = product("RF", mass)
    np.testing.assert_array_equal(got, a_r @ a_f)
    np.testing.assert_allclose(got, 1j * mass.m * mass.n * C01.matrix(), atol=1e-16)


def test_product_rl_is_null():
    assert not product("RL", make_mass(0.6)).any()


def test_product_ff():
    mass = make_mass(0.6)
    np.testing.assert_allclose(product("FF", mass), -mass.m ** 2 * np.eye(2), atol=1e-16)


def test_product_order_matters():
    mass = make_mass(0.5)
    _, a_l, a_f = transition_matrices(mass)
    np.testing.assert_array_equal(product("LF", mass), a_l @ a_f)
    np.testing.assert_allclose(product("LF", mass), 1j * mass.m * mass.n * C10.matrix(), atol=1e-16)


@pytest.mark.parametrize("word, want", [("RRFLL", False), ("RFRLL", True), ("FFFF", False),
                                        ("LR", True), ("LFL", True), ("RFFR", False)])
def test_is_forbidden_examples(word, want):
    assert is_forbidden(word) is want


def test_forbidden_substrings_give_null():
    # containing a listed substring always kills the product
    for t in range(2, 8):
        for p in all_paths(t):
            if is_forbidden(p):
                assert not skeleton(p).any(), p.word


def test_null_words_reduce_to_forbidden_after_cancelling_flip_pairs():
    # A_F^2 = -m^2 I, so FF pairs are scalars; the complete null law is the listed
    # substrings after deleting FF pairs.  RFFL is the shortest null word missed by
    # the literal substring list.
    assert not skeleton("RFFL").any() and not is_forbidden("RFFL")
    for t in range(0, 9):
        for p in all_paths(t):
            reduced = p.word
            while "FF" in reduced:
                reduced = reduced.replace("FF", "")
            assert (not skeleton(p).any()) == is_forbidden(reduced), p.word


@pytest.mark.parametrize("word, want", [("RRFLLFR", PathClass.OMEGA_R), ("LFRFL", PathClass.OMEGA_L),
                                        ("RLF", PathClass.NULL), ("FFF", PathClass.ALL_FLIPS),
                                        ("LFR", PathClass.OMEGA_R), ("RFL", PathClass.OMEGA_L)])
def test_classify_examples(word, want):
    assert classify(word) is want


def test_kernel_bruteforce_small():
    mass = make_mass(0.6)
    a_r, a_l, a_f = transition_matrices(mass)
    k0 = kernel_bruteforce(0, mass)
    np.testing.assert_array_equal(k0[0], np.eye(2))
    k1 = kernel_bruteforce(1, mass)
    np.testing.assert_array_equal(k1[1], a_r)
    np.testing.assert_array_equal(k1[0], a_f)
    np.testing.assert_array_equal(k1[-1], a_l)
    assert kernel_bruteforce(2, mass).max_abs_diff(kernel(2, mass)) <= 1e-15


def test_kernel_bruteforce_guard():
    with pytest.raises(ResourceGuardError):
        kernel_bruteforce(MAX_T + 1, make_mass(0.5))


def test_kernel_bruteforce_matches_literal_products():
    mass = make_mass(0.45)
    t = 5
    want = np.zeros((2 * t + 1, 2, 2), dtype=complex)
    for p in all_paths(t):
        want[p.tally.d + t] += product(p, mass)
    np.testing.assert_allclose(kernel_bruteforce(t, mass).entries, want, atol=1e-15, rtol=0)


def test_kernel_bruteforce_parallel_bitwise():
    mass = make_mass(0.6)
    a = kernel_bruteforce(11, mass)
    b = kernel_bruteforce(11, mass, workers=3)
    assert a.entries.tobytes() == b.entries.tobytes()


@pytest.mark.parametrize("t", [1, 3])
def test_structure_check_clean(t):
    rep = structure_check(t, make_mass(0.6))
    assert rep.words == 3 ** t
    assert rep.violations == []


def test_structure_check_t6():
    rep = structure_check(6, make_mass(0.6))
    assert rep.violations == []


def test_channel_law_and_recount_t8():
    rep = structure_check(8, make_mass(0.3))
    assert [v for v in rep.violations if v[1] != "forbidden-substring law"] == []
    assert coefficient_recount(8, rep) == []


def test_zero_product_iff_forbidden_t_le_12():
    bad = []
    for t in range(13):
        rep = structure_check(t)
        bad += [w for w, law in rep.violations if law == "forbidden-substring law"]
    assert bad == []
