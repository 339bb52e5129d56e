import math

import numpy as np
import pytest

from perjam.lattice import Lattice
from perjam.packing import PackingError, PeriodicPacking, ball_volume, density, detect_contacts, validate


def test_one_disk_contacts(square, triangular):
    assert square.n_contacts == 2
    assert triangular.n_contacts == 3
    assert sorted(c.offset for c in square.contacts) == [(0, 1), (1, 0)]


def test_densities():
    sq = PeriodicPacking(Lattice(np.eye(2)), [[0, 0]], [0.5])
    assert density(sq) == pytest.approx(math.pi / 4, abs=1e-15)
    tri = PeriodicPacking(Lattice(np.array([[1, 0.5], [0, math.sqrt(3) / 2]])), [[0, 0]], [0.5])
    assert density(tri) == pytest.approx(math.pi / math.sqrt(12), abs=1e-15)


def test_ball_volume():
    assert ball_volume(3, 1.0) == pytest.approx(4 * math.pi / 3)
    assert ball_volume(2, 0.5) == pytest.approx(math.pi / 4)


def test_overlap_detected():
    p = PeriodicPacking(Lattice(np.eye(2)), [[0, 0]], [0.6])
    bad = validate(p)
    assert bad and bad[0].depth == pytest.approx(0.2)
    with pytest.raises(PackingError):
        validate(p, -1.0)


def test_loose_packing_has_no_contacts():
    p = PeriodicPacking(Lattice(2 * np.eye(2)), [[0, 0]], [0.5])
    assert validate(p) == [] and detect_contacts(p).n_contacts == 0


def test_three_dimensional_cubic():
    p = PeriodicPacking(Lattice(np.eye(3)), [[0, 0, 0]], [0.5])
    assert detect_contacts(p).n_contacts == 3


def test_bad_inputs():
    with pytest.raises(PackingError):
        PeriodicPacking(Lattice(np.eye(2)), [[0, 0]], [-1.0])
    with pytest.raises(PackingError):
        PeriodicPacking(Lattice(np.eye(2)), [[0, 0, 0]], [0.5])
    with pytest.raises(PackingError):
        PeriodicPacking(Lattice(np.eye(2)), [[0, 0]], [0.5, 0.5])
