import numpy as np
import pytest

from perjam.edgeflex import (EdgeFlexError, PlanarityError, check_triangle_rhombus, edge_flex_signs_ok,
                             edge_to_vertex_flex, find_crossings, rotation_flex_space, rotation_to_edge_flex,
                             trace_faces, vertex_to_edge_flex)
from perjam.framework import Contact, FlexVector, Tensegrity, cover_framework
from perjam.jamming import bar_periodically_rigid
from perjam.lattice import Lattice, Sublattice, enumerate_sublattices


def test_face_census(frameworks):
    assert trace_faces(frameworks["one_disk_square"]).census() == {4: 1}
    assert trace_faces(frameworks["one_disk_triangular"]).census() == {3: 2}
    fs = trace_faces(frameworks["dodecagon_16"])
    assert fs.census() == {3: 12, 4: 5, 12: 1}
    assert fs.euler_characteristic == 0


def test_face_areas_tile_the_cell(frameworks):
    for t in frameworks.values():
        fs = trace_faces(t)
        assert sum(f.area for f in fs.faces) == pytest.approx(t.lattice.volume)


def test_crossing_detected():
    lat = Lattice(np.eye(2))
    t = Tensegrity(lat, [[0, 0]], (Contact(0, 0, (1, 0)), Contact(0, 0, (0, 1)),
                                   Contact(0, 0, (1, 1)), Contact(0, 0, (1, -1))))
    assert find_crossings(t)
    with pytest.raises(PlanarityError):
        trace_faces(t)


def test_vertex_edge_round_trip(dodecagon):
    rng = np.random.default_rng(1)
    f = FlexVector(rng.normal(size=(16, 2)))
    ef = vertex_to_edge_flex(dodecagon, f)
    back = edge_to_vertex_flex(dodecagon, ef, anchor_value=f.per_vertex[0])
    assert np.allclose(back.per_vertex, f.per_vertex)


def test_affine_round_trip(square):
    f = FlexVector(np.array([[0.3, -0.1]]), np.array([[0.0, 1.0], [1.0, 0.0]]))
    ef = vertex_to_edge_flex(square, f)
    back = edge_to_vertex_flex(square, ef, anchor_value=[0.3, -0.1], affine=f.affine)
    assert np.allclose(back.per_vertex, f.per_vertex)


def test_non_closing_edge_flex_names_face(triangular):
    ef = np.zeros((3, 2))
    ef[0] = [0.0, 1.0]
    with pytest.raises(EdgeFlexError) as info:
        edge_to_vertex_flex(triangular, ef)
    assert info.value.face is not None or info.value.tour is not None


def test_edge_flex_signs(square):
    ef = np.array([[0.0, 0.5], [-0.1, 0.0]])
    assert not edge_flex_signs_ok(square, ef)
    assert edge_flex_signs_ok(square, np.abs(ef))


@pytest.mark.parametrize("name", ["one_disk_square", "one_disk_triangular", "dodecagon_16"])
def test_rotation_space_matches_bar_rigidity(frameworks, name):
    t = frameworks[name]
    for m in range(1, 5):
        for sub in enumerate_sublattices(2, m):
            c = cover_framework(t, sub)
            fs = trace_faces(c, check_crossings=False)
            space = rotation_flex_space(c, fs)
            bar = bar_periodically_rigid(c)
            assert space.shape[1] == bar.nullity - 2
            for alpha in space.T:
                assert check_triangle_rhombus(c, alpha, fs) == []
                # every rotation vector integrates to a genuine vertex flex
                edge_to_vertex_flex(c, rotation_to_edge_flex(c, alpha), faces=fs)


def test_square_cover_rotation_vector():
    from perjam.catalog import get_packing
    from perjam.packing import detect_contacts

    t = cover_framework(detect_contacts(get_packing("one_disk_square")), Sublattice.diagonal(2, 1))
    space = rotation_flex_space(t)
    assert space.shape[1] == 1  # the two columns slide vertically past each other
    alpha = space[:, 0]
    assert check_triangle_rhombus(t, alpha) == []
    assert np.abs(alpha).max() > 0.1


def test_rhombus_violation_reported(square):
    assert check_triangle_rhombus(square, [1.0, 2.0]) == []
    cover = cover_framework(square, Sublattice.diagonal(2, 1))
    fs = trace_faces(cover)
    alpha = np.arange(cover.n_contacts, dtype=float)
    assert [v.lemma for v in check_triangle_rhombus(cover, alpha, fs)] == ["rhombus"] * len(fs.faces)
