import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lipspec import geometry as g
from lipspec import meshing as m

from conftest import lip_triangle


def euler(mesh):
    return mesh.n_nodes - len(mesh.edges) + mesh.n_triangles


def boundary_positions_error(mesh):
    """Max distance of boundary nodes from the point at their stored parameter."""
    err = 0.0
    for (a, b), seg, (s0, s1) in zip(mesh.bnd_edges, mesh.bnd_segment, mesh.bnd_param):
        s = mesh.spec.segments[seg]
        err = max(err, np.linalg.norm(mesh.nodes[a] - s.point(s0)), np.linalg.norm(mesh.nodes[b] - s.point(s1)))
    return err


def test_coarse_diamond():
    spec = g.diamond()
    mesh = m.triangulate(spec, 1.0)
    m.check_mesh(mesh)
    assert len(mesh.boundary_nodes) >= 4
    assert np.all(mesh.areas > 0)
    for c in spec.corners:
        assert np.min(np.linalg.norm(mesh.nodes[mesh.corner_nodes] - c.vertex, axis=1)) == 0.0
    assert len(mesh.corner_nodes) == 4


def test_disk_boundary_nodes_on_circle():
    mesh = m.triangulate(g.disk(), 0.2)
    r = np.linalg.norm(mesh.nodes[mesh.boundary_nodes], axis=1)
    assert np.max(np.abs(r - 1)) <= 1e-10
    assert len(mesh.corner_nodes) == 0


def test_triangle_euler_relation():
    mesh = m.triangulate(lip_triangle(), 0.1)
    assert euler(mesh) == 1


def test_refine_counts_and_projection():
    mesh = m.triangulate(g.disk(), 0.3)
    fine = m.refine(mesh)
    assert fine.n_triangles == 4 * mesh.n_triangles
    assert fine.h == mesh.h / 2
    r = np.linalg.norm(fine.nodes[fine.boundary_nodes], axis=1)
    assert np.max(np.abs(r - 1)) <= 1e-10
    assert euler(fine) == 1


def test_refine_twice_bookkeeping():
    mesh = m.refine(m.refine(m.triangulate(g.diamond(), 0.5)))
    assert mesh.h == 0.125
    m.check_mesh(mesh)


def test_diamond_area_exact():
    mesh = m.triangulate(g.diamond(), 0.05)
    assert abs(mesh.areas.sum() - 2.0) / 2.0 <= 1e-12


def test_disk_area_deficit_second_order():
    mesh = m.triangulate(g.disk(), 0.2)
    deficits = []
    for _ in range(3):
        deficits.append(math.pi - mesh.areas.sum())
        mesh = m.refine(mesh)
    assert all(d > 0 for d in deficits)
    rates = [math.log2(deficits[i] / deficits[i + 1]) for i in range(2)]
    assert all(1.8 <= r <= 2.2 for r in rates)


@pytest.mark.parametrize("make,h", [(g.diamond, 0.05), (g.disk, 0.05), (lip_triangle, 0.03),
                                    (lambda: g.rectangle(2.0, 1.0, math.pi / 4), 0.05)])
def test_quality_and_links(make, h):
    spec = make()
    mesh = m.triangulate(spec, h)
    m.check_mesh(mesh)
    assert np.degrees(m.min_angles(mesh.nodes, mesh.triangles)).min() >= 20.0
    assert m.circumradii(mesh.nodes, mesh.triangles).max() <= h * (1 + 1e-12)
    assert boundary_positions_error(mesh) <= 1e-10 * spec.diameter
    # parameter intervals nest inside their segments and chain in order
    lengths = np.array([s.length for s in spec.segments])[mesh.bnd_segment]
    s0, s1 = mesh.bnd_param[:, 0], mesh.bnd_param[:, 1]
    assert np.all(s0 >= 0) and np.all(s1 <= lengths * (1 + 1e-14)) and np.all(s1 > s0)
    arc = s1 - s0
    assert np.all(arc <= h * (1 + 1e-12))
    long_seg = lengths > h
    assert np.all(arc[long_seg] >= h / 2 * (1 - 1e-12))
    # the boundary is one closed loop
    assert np.array_equal(mesh.bnd_edges[1:, 0], mesh.bnd_edges[:-1, 1])
    assert mesh.bnd_edges[0, 0] == mesh.bnd_edges[-1, 1]
    assert mesh.domain_hash == spec.hash


def test_deterministic():
    a = m.triangulate(lip_triangle(), 0.07)
    b = m.triangulate(lip_triangle(), 0.07)
    assert m.write_mesh(a) == m.write_mesh(b)


def test_text_roundtrip():
    spec = g.disk()
    mesh = m.triangulate(spec, 0.3)
    text = m.write_mesh(mesh)
    assert text.startswith(f"mesh v={mesh.n_nodes} t={mesh.n_triangles} b={len(mesh.bnd_edges)} h=0.29999999999999999")
    back = m.read_mesh(text, spec)
    assert np.array_equal(back.nodes, mesh.nodes)
    assert np.array_equal(back.triangles, mesh.triangles)
    assert np.array_equal(back.bnd_param, mesh.bnd_param)
    assert np.array_equal(back.bnd_corner, mesh.bnd_corner)
    assert m.write_mesh(back) == text
    with pytest.raises(m.MeshError, match="different domain"):
        m.read_mesh(text, g.diamond())
    with pytest.raises(m.MeshError, match="header"):
        m.read_mesh("n 0 0\n")


def test_budget_and_size_errors():
    with pytest.raises(m.MeshSizeError):
        m.triangulate(g.disk(), 0.001)
    with pytest.raises(m.MeshSizeError):
        m.triangulate(g.disk(), 0.1, max_nodes=50)
    with pytest.raises(m.MeshSizeError):
        m.triangulate(g.disk(), 5.0)
    with pytest.raises(m.MeshSizeError):
        m.refine(m.triangulate(g.disk(), 0.3), max_nodes=100)


@settings(max_examples=15, deadline=None)
@given(st.integers(3, 8), st.floats(0.5, 3.0), st.floats(0, 2 * math.pi), st.floats(0.08, 0.4))
def test_random_convex_polygons_mesh_cleanly(n, radius, phase, rel_h):
    spec = g.regular_polygon(n, radius, phase)
    h = rel_h * radius
    mesh = m.triangulate(spec, h)
    m.check_mesh(mesh)
    assert euler(mesh) == 1
    assert abs(mesh.areas.sum() - spec.area) <= 1e-12 * spec.area
    assert np.degrees(m.min_angles(mesh.nodes, mesh.triangles)).min() >= 20.0
    assert len(mesh.corner_nodes) == n
