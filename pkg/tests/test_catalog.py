import math
import time

import pytest

from perjam.catalog import CatalogError, entry, get_packing, list_catalog
from perjam.edgeflex import trace_faces
from perjam.packing import density, detect_contacts, validate

S3 = math.sqrt(3)


def test_listing():
    names = [n for n, _ in list_catalog()]
    assert names == ["one_disk_square", "one_disk_triangular", "dodecagon_16"]
    descs = " ".join(d for _, d in list_catalog())
    assert "strictly jammed" in descs and "consistently" in descs


def test_unknown_name():
    with pytest.raises(CatalogError):
        get_packing("nope")


def test_dodecagon_invariants():
    p = get_packing("dodecagon_16")
    t = detect_contacts(p)
    assert (t.n_vertices, t.n_contacts) == (16, 34)
    fs = trace_faces(t)
    assert fs.census() == {3: 12, 4: 5, 12: 1} and len(fs.faces) == 18
    assert fs.euler_characteristic == 0
    assert abs(density(p) - 4 * math.pi / (6 * S3 + 11)) <= 1e-12
    g1, g2 = p.lattice.generators
    assert g1 == pytest.approx([S3 + 1, -S3 - 2])
    assert g1 @ g1 == pytest.approx(11 + 6 * S3) and abs(g1 @ g2) < 1e-12


def test_every_entry_validates():
    for name, _ in list_catalog():
        p = get_packing(name)
        assert validate(p, 1e-9) == []
        assert detect_contacts(p).n_contacts == entry(name).n_contacts


def test_load_is_fast():
    get_packing.cache_clear()
    start = time.perf_counter()
    get_packing("dodecagon_16")
    assert time.perf_counter() - start < 1.0
