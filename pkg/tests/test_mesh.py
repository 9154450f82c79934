import math

import numpy as np
import pytest

from bloch.errors import (
    InconsistentOrientation,
    InvertedOrientation,
    OpenSurface,
    ParseError,
    SubdivisionTooLarge,
)
from bloch.mesh import ellipsoid, from_arrays, icosphere, load_mesh, write_off


@pytest.mark.parametrize("s", range(5))
def test_icosphere_counts(s):
    m = icosphere(s)
    assert m.n_panels == 20 * 4**s
    assert len(m.vertices) == 10 * 4**s + 2
    np.testing.assert_allclose(np.linalg.norm(m.vertices, axis=1), 1.0, rtol=1e-14)
    assert m.closure_defect() < 1e-12


def test_icosphere_volume_converges():
    # inscribed polyhedra lose volume at second order in the panel size
    errs = [1 - icosphere(s).enclosed_volume / (4 * math.pi / 3) for s in range(7)]
    assert all(e > 0 for e in errs)
    for a, b in zip(errs[3:], errs[4:]):
        assert b / a == pytest.approx(0.25, abs=0.01)
    assert errs[4] < 2.5e-3
    assert errs[5] < 1e-3


def test_normals_point_outward():
    m = icosphere(2)
    assert np.all(np.einsum("ij,ij->i", m.panel_centroids, m.panel_normals) > 0)


def test_radius_scales():
    a, b = icosphere(2), icosphere(2, radius=3.0)
    assert b.enclosed_volume == pytest.approx(27 * a.enclosed_volume, rel=1e-13)
    assert b.total_area == pytest.approx(9 * a.total_area, rel=1e-13)


def test_subdivision_limit():
    with pytest.raises(SubdivisionTooLarge):
        icosphere(7)
    with pytest.raises(SubdivisionTooLarge):
        icosphere(-1)


def test_ellipsoid_volume():
    m = ellipsoid([1.0, 2.0, 0.5], subdivisions=4)
    assert m.enclosed_volume == pytest.approx(4 * math.pi / 3, rel=2.5e-3)
    assert m.closure_defect() < 1e-12


def test_round_trip(tmp_path):
    m = icosphere(2)
    p = tmp_path / "ball.off"
    write_off(m, p)
    back = load_mesh(p)
    np.testing.assert_array_equal(back.vertices, m.vertices)
    np.testing.assert_array_equal(back.faces, m.faces)
    assert back.name == "ball"


def test_comments_and_split_header(tmp_path):
    p = tmp_path / "tet.off"
    p.write_text(
        "OFF  # header\n# a comment line\n4 4 0\n"
        "0 0 0\n1 0 0\n0 1 0\n0 0 1\n"
        "3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n"
    )
    m = load_mesh(p)
    assert m.enclosed_volume == pytest.approx(1 / 6, rel=1e-14)


def _tet():
    v = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
    f = [[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]]
    return np.array(v, float), np.array(f)


def test_open_surface():
    v, f = _tet()
    with pytest.raises(OpenSurface):
        from_arrays(v, f[:-1])


def test_open_surface_from_file(tmp_path):
    m = icosphere(1)
    p = tmp_path / "holey.off"
    write_off(m, p)
    lines = p.read_text().splitlines()
    lines[1] = f"{len(m.vertices)} {m.n_panels - 1} 0"
    p.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(OpenSurface, match="holey.off"):
        load_mesh(p)


def test_inconsistent_orientation():
    v, f = _tet()
    f = f.copy()
    f[0] = f[0][::-1]
    with pytest.raises(InconsistentOrientation):
        from_arrays(v, f)


def test_inverted_and_auto_flip():
    v, f = _tet()
    with pytest.raises(InvertedOrientation):
        from_arrays(v, f[:, ::-1])
    m = from_arrays(v, f[:, ::-1], auto_flip=True)
    assert m.enclosed_volume == pytest.approx(1 / 6)


def test_parse_error_line_number(tmp_path):
    p = tmp_path / "bad.off"
    p.write_text("OFF\n4 4 0\n0 0 0\n1 0 0\n0 one 0\n0 0 1\n")
    with pytest.raises(ParseError, match=r"bad.off:5"):
        load_mesh(p)


def test_parse_error_quads(tmp_path):
    p = tmp_path / "quad.off"
    p.write_text("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n")
    with pytest.raises(ParseError, match=r"quad.off:7"):
        load_mesh(p)


def test_truncated_file(tmp_path):
    p = tmp_path / "short.off"
    p.write_text("OFF\n4 4 0\n0 0 0\n")
    with pytest.raises(ParseError, match="end of file"):
        load_mesh(p)


def test_arrays_are_frozen():
    m = icosphere(0)
    with pytest.raises(ValueError):
        m.panel_areas[0] = 1.0


def test_stats_keys():
    s = icosphere(1).stats()
    assert s["panels"] == 80
    assert s["closure_defect"] < 1e-12
