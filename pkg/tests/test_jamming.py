import math

import numpy as np
import pytest

from _instances import perturbed_instances
from perjam.framework import Contact, Kind, Tensegrity, affine_rigidity_matrix, cover_framework, rigidity_matrix
from perjam.jamming import (JammingError, affinely_rigid, bar_periodically_rigid, collectively_jammed,
                            consistency_report, cover_jammed, equilibrium_stress, lifted_strict_residual,
                            n_min, one_disk_gcd_predicate, strict_equilibrium_stress, strictly_jammed,
                            strut_rigid_direct_lp, sublattice_jammed)
from perjam.lattice import Lattice, Sublattice, enumerate_sublattices


def _flex_respects_struts(t, flex, tol=1e-9):
    rows = rigidity_matrix(t).matrix @ flex.coords()
    return all(v >= -tol for v, k in zip(rows, t.kinds) if k is Kind.STRUT)


def test_catalog_verdicts(frameworks):
    expected = {"one_disk_square": (True, False), "one_disk_triangular": (True, True),
                "dodecagon_16": (True, False)}
    for name, (col, strict) in expected.items():
        t = frameworks[name]
        assert collectively_jammed(t).jammed is col
        assert strictly_jammed(t).strict is strict


def test_square_stress_is_minus_one(square):
    assert np.allclose(equilibrium_stress(square).per_contact, [-1, -1])


def test_triangular_strict_stress(triangular):
    s = strict_equilibrium_stress(triangular)
    assert np.allclose(s.per_contact, -2 / 3, atol=1e-12)
    assert s.strict_residual(triangular) < 1e-12


def test_dodecagon_stress_certificate(dodecagon):
    v = collectively_jammed(dodecagon)
    assert v.stress.vertex_residual(dodecagon) < 1e-9
    assert v.stress.signs_ok(dodecagon)
    assert np.all(v.stress.per_contact <= -1 + 1e-9)


def test_affine_nullities(square, triangular):
    a = affinely_rigid(square)
    assert (a.rigid, a.nullity, a.trivial) == (False, 4, 3)
    assert affinely_rigid(triangular).rigid


def test_strict_square_gives_shear_flex(square):
    v = strictly_jammed(square)
    assert v.stress is not None and not v.affine.rigid
    a = v.flex.affine
    assert np.allclose(affine_rigidity_matrix(square).matrix @ v.flex.coords(), 0, atol=1e-12)
    assert abs(np.trace(a)) < 1e-12 and np.allclose(a, a.T)


def test_two_disk_chain_unjammed():
    # two disks in a row on a wide torus: the vertical direction is free
    lat = Lattice(np.array([[2.0, 0.0], [0.0, 3.0]]))
    t = Tensegrity(lat, [[0, 0], [1, 0]], (Contact(0, 1, (0, 0)), Contact(1, 0, (1, 0))))
    v = collectively_jammed(t)
    assert not v.jammed and v.flex is not None
    assert _flex_respects_struts(t, v.flex)
    assert not strut_rigid_direct_lp(t)[0]


def test_rigid_bars_but_no_stress_gives_opening_flex():
    # three edges 0 -> 1 lying in an open half-plane: bar-rigid, yet pushing apart is free
    lat = Lattice(np.array([[1.0, 1.0], [0.0, 2.0]]))
    t = Tensegrity(lat, [[0, 0], [0.1, 1.0]],
                   (Contact(0, 1, (0, 0)), Contact(0, 1, (0, -1)), Contact(0, 1, (-1, 0))))
    v = collectively_jammed(t)
    assert v.bar.rigid and not v.jammed
    assert equilibrium_stress(t) is None
    assert _flex_respects_struts(t, v.flex)
    assert np.abs(rigidity_matrix(t).matrix @ v.flex.coords()).max() > 1e-6
    assert not strut_rigid_direct_lp(t)[0]


@pytest.mark.parametrize("inst", perturbed_instances(), ids=lambda t: f"n{t.n_vertices}m{t.n_contacts}")
def test_direct_lp_matches_decomposition(inst):
    direct, flex = strut_rigid_direct_lp(inst)
    decomposed = bar_periodically_rigid(inst).rigid and equilibrium_stress(inst) is not None
    assert direct == decomposed == collectively_jammed(inst).jammed
    if not direct:
        assert _flex_respects_struts(inst, flex, 1e-7)


def test_perturbed_instances_have_both_verdicts():
    verdicts = {collectively_jammed(t).jammed for t in perturbed_instances()}
    assert verdicts == {True, False}


def test_index_12_flexing_characters(square):
    v = sublattice_jammed(square, Sublattice.from_columns((3, 2), (3, -2)))
    assert not v.jammed
    phases = [tuple(cf.character.phases) for cf in v.flexing]
    w = complex(math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3))
    for target in [(1, -1), (w, 1), (w.conjugate(), 1)]:
        assert any(np.allclose(p, target, atol=1e-8) for p in phases)


def test_real_cover_flex_is_genuine(square):
    sub = Sublattice.from_columns((3, 2), (3, -2))
    v = sublattice_jammed(square, sub)
    cover = cover_framework(square, sub)
    f = v.real_cover_flex(square)
    assert np.abs(f.coords()).max() > 0.1
    assert np.allclose(rigidity_matrix(cover).matrix @ f.coords(), 0, atol=1e-9)
    # negation closure: -f is also a flex
    assert np.allclose(rigidity_matrix(cover).matrix @ (-f).coords(), 0, atol=1e-9)


@pytest.mark.parametrize("name", ["one_disk_square", "one_disk_triangular", "dodecagon_16"])
def test_fourier_matches_brute_force_covers(frameworks, name):
    t = frameworks[name]
    base = collectively_jammed(t)
    for m in range(1, 7):
        for sub in enumerate_sublattices(2, m):
            assert sublattice_jammed(t, sub, base=base).jammed == cover_jammed(t, sub).jammed, str(sub)


def test_gcd_law(square):
    base = collectively_jammed(square)
    for m in range(1, 13):
        for sub in enumerate_sublattices(2, m):
            assert (not sublattice_jammed(square, sub, base=base).jammed) == one_disk_gcd_predicate(sub)


def test_gcd_predicate_examples():
    assert one_disk_gcd_predicate(Sublattice.diagonal(2, 1))
    assert not one_disk_gcd_predicate(Sublattice.diagonal(1, 1))
    assert one_disk_gcd_predicate(Sublattice.from_columns((3, 2), (3, -2)))
    assert not one_disk_gcd_predicate(Sublattice.from_columns((1, 1), (-1, 1)))


def test_n_min_values(frameworks):
    assert n_min(frameworks["one_disk_square"], 6).value == 2
    tri = n_min(frameworks["one_disk_triangular"], 6)
    assert tri.value is None and str(tri) == ">= 7"
    assert str(n_min(frameworks["dodecagon_16"], 6)) == ">= 7"


def test_n_min_is_thread_independent(square, dodecagon):
    for t in (square, dodecagon):
        a, b = n_min(t, 5), n_min(t, 5, threads=4)
        assert (a.value, str(a.sublattice), a.character) == (b.value, str(b.sublattice), b.character)


def test_n_min_preconditions(square):
    with pytest.raises(JammingError):
        n_min(square, 0)
    lat = Lattice(np.array([[2.0, 0.0], [0.0, 3.0]]))
    loose = Tensegrity(lat, [[0, 0], [1, 0]], (Contact(0, 1, (0, 0)), Contact(1, 0, (1, 0))))
    with pytest.raises(JammingError):
        n_min(loose, 3)


def test_sublattice_test_needs_base_jamming():
    lat = Lattice(np.array([[2.0, 0.0], [0.0, 3.0]]))
    loose = Tensegrity(lat, [[0, 0], [1, 0]], (Contact(0, 1, (0, 0)), Contact(1, 0, (1, 0))))
    v = sublattice_jammed(loose, Sublattice.diagonal(1, 1))
    assert not v.jammed and not v.base_jammed


def test_consistency_reports(frameworks):
    tri = consistency_report(frameworks["one_disk_triangular"], 6)
    assert tri.consistently_strict and tri.max_scaling_residual <= 1e-9
    sq = consistency_report(frameworks["one_disk_square"], 6)
    assert sq.collective.jammed and not sq.strict.strict and sq.n_min.value == 2
    dd = consistency_report(frameworks["dodecagon_16"], 6)
    assert dd.collective.jammed and not dd.strict.strict and str(dd.n_min) == ">= 7"


def test_lifted_strict_stress_scaling(triangular):
    s = strict_equilibrium_stress(triangular)
    for m in range(1, 5):
        for sub in enumerate_sublattices(2, m):
            moment, balance = lifted_strict_residual(triangular, sub, s)
            assert moment <= 1e-9 and balance <= 1e-9
            # rescaled by 1/m it is strict on the cover itself
            cover = cover_framework(triangular, sub)
            lifted = s.lifted(m)
            lifted.per_contact = lifted.per_contact / m
            assert lifted.strict_residual(cover) <= 1e-9


def test_bland_and_highs_stress_routes_agree(frameworks):
    for t in frameworks.values():
        a, b = equilibrium_stress(t), equilibrium_stress(t, method="highs")
        assert (a is None) == (b is None)
        if a is not None:
            assert np.abs(a.per_contact).sum() == pytest.approx(np.abs(b.per_contact).sum(), rel=1e-9)
