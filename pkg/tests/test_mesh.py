"""Mesh generation, tagging and serialization tests."""
import numpy as np
import pytest

from axitherm.mesh import (
    BoundaryTag,
    HEARTH_CAVITY_SEGMENTS,
    Mesh,
    SubdomainPolygon,
    build_hearth_geometry,
    generate_mesh,
    hearth_mesh,
    load_mesh,
    save_mesh,
    tag_boundaries,
)

# Shoelace area of the hearth cross-section, summed over all polygons.
# Frozen from an independent hand evaluation of the vertex table.
HEARTH_AREA = 20.454675


class TestSubdomainPolygon:
    def test_shoelace_area_unit_square(self):
        p = SubdomainPolygon(1, ((0, 0), (1, 0), (1, 1), (0, 1)))
        assert p.area() == pytest.approx(1.0)

    def test_rejects_clockwise(self):
        with pytest.raises(ValueError, match="counterclockwise"):
            SubdomainPolygon(1, ((0, 0), (0, 1), (1, 1), (1, 0)))

    def test_rejects_diagonal_edge(self):
        with pytest.raises(ValueError, match="non-axis-aligned"):
            SubdomainPolygon(1, ((0, 0), (1, 1), (0, 1)))

    def test_rejects_negative_radius(self):
        with pytest.raises(ValueError, match="r < 0"):
            SubdomainPolygon(1, ((-0.5, 0), (1, 0), (1, 1), (-0.5, 1)))

    def test_contains_even_odd(self):
        p = SubdomainPolygon(1, ((0, 0), (2, 0), (2, 1), (0, 1)))
        pts = np.array([[1.0, 0.5], [3.0, 0.5], [1.0, 2.0]])
        assert list(p.contains(pts)) == [True, False, False]


class TestGenerateMesh:
    def test_positive_orientation(self, unit_square_mesh):
        assert np.all(unit_square_mesh.signed_areas() > 0)

    def test_area_conservation(self, unit_square_mesh):
        assert unit_square_mesh.signed_areas().sum() == pytest.approx(1.0)

    def test_vertices_become_nodes(self):
        poly = SubdomainPolygon(1, ((0, 0), (1, 0), (1, 1), (0.3, 1), (0, 1)))
        mesh = generate_mesh([poly], 0.5)
        for v in poly.vertices:
            d = np.linalg.norm(mesh.nodes - np.asarray(v), axis=1)
            assert d.min() < 1e-12

    def test_h_bound(self):
        poly = SubdomainPolygon(1, ((0, 0), (1, 0), (1, 1), (0, 1)))
        mesh = generate_mesh([poly], 0.3)
        assert mesh.h <= 2 * 0.3

    def test_conformity(self, unit_square_mesh):
        # every interior edge is shared by exactly two triangles
        tris = unit_square_mesh.triangles
        edges = np.concatenate(
            [tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
        key = np.sort(edges, axis=1)
        _, counts = np.unique(key, axis=0, return_counts=True)
        assert set(counts) <= {1, 2}

    def test_interface_tagging(self):
        lower = SubdomainPolygon(1, ((0, 0), (1, 0), (1, 1), (0, 1)))
        upper = SubdomainPolygon(2, ((0, 1), (1, 1), (1, 2), (0, 2)))
        mesh = generate_mesh([lower, upper], 0.5)
        iface = [e for e in mesh.boundary_edges if e[2] is BoundaryTag.INTERFACE]
        assert len(iface) > 0
        for (i, j, _) in iface:
            assert mesh.nodes[i][1] == pytest.approx(1.0)
            assert mesh.nodes[j][1] == pytest.approx(1.0)

    def test_rejects_target_h_above_feature_size(self):
        small = SubdomainPolygon(1, ((0, 0), (0.2, 0), (0.2, 0.2), (0, 0.2)))
        with pytest.raises(ValueError, match="smallest polygon extent"):
            generate_mesh([small], 0.5)

    def test_rejects_overlapping_polygons(self):
        a = SubdomainPolygon(1, ((0, 0), (1, 0), (1, 1), (0, 1)))
        b = SubdomainPolygon(2, ((0.5, 0), (1.5, 0), (1.5, 1), (0.5, 1)))
        with pytest.raises(ValueError, match="overlap"):
            generate_mesh([a, b], 0.25)

    def test_cavity_stays_unmeshed(self):
        # a C-shaped pair of blocks around a hole
        left = SubdomainPolygon(1, ((0, 0), (1, 0), (1, 3), (0, 3)))
        right = SubdomainPolygon(1, ((2, 0), (3, 0), (3, 3), (2, 3)))
        mesh = generate_mesh([left, right], 0.5)
        centroids = mesh.nodes[mesh.triangles].mean(axis=1)
        assert not np.any((centroids[:, 0] > 1) & (centroids[:, 0] < 2))

    def test_determinism(self):
        polys = build_hearth_geometry()
        a = generate_mesh(polys, 0.3)
        b = generate_mesh(polys, 0.3)
        assert np.array_equal(a.nodes, b.nodes)
        assert np.array_equal(a.triangles, b.triangles)
        assert np.array_equal(a.tri_subdomain, b.tri_subdomain)


class TestTagBoundaries:
    def test_axis_edge(self, unit_square_mesh):
        for (i, j) in unit_square_mesh.edges_with_tag(BoundaryTag.AXIS):
            assert unit_square_mesh.nodes[i][0] == 0.0
            assert unit_square_mesh.nodes[j][0] == 0.0

    def test_every_exterior_edge_tagged(self, unit_square_mesh):
        assert all(t is not None for (_, _, t) in unit_square_mesh.boundary_edges)

    def test_untaggable_edge_raises(self):
        # exterior edges at r = r_max of the *left* block are inner walls
        # unless inner segments say so; here a conflicting segment list
        # leaves them unmatched
        left = SubdomainPolygon(1, ((0, 0), (1, 0), (1, 3), (0, 3)))
        right = SubdomainPolygon(1, ((2, 0), (3, 0), (3, 3), (2, 3)))
        mesh = generate_mesh([left, right], 0.5)
        with pytest.raises(ValueError, match="untaggable"):
            tag_boundaries(mesh, [left, right],
                           inner_segments=[((1.0, 0.0), (1.0, 3.0))])

    def test_tag_multiset_stable_under_refinement(self):
        polys = build_hearth_geometry()
        tags = []
        for h in (0.4, 0.2):
            mesh = hearth_mesh(h)
            tags.append({t for (_, _, t) in mesh.boundary_edges})
        assert tags[0] == tags[1]


class TestHearthGeometry:
    def test_seven_polygons_six_subdomains(self):
        polys = build_hearth_geometry()
        assert len(polys) == 7
        assert {p.subdomain_id for p in polys} == set(range(1, 7))

    def test_total_area(self):
        polys = build_hearth_geometry()
        assert sum(p.area() for p in polys) == pytest.approx(HEARTH_AREA)

    def test_mesh_conserves_area(self):
        mesh = hearth_mesh(0.2)
        assert mesh.signed_areas().sum() == pytest.approx(HEARTH_AREA)

    def test_outer_edge_at_reference_radius(self):
        mesh = hearth_mesh(0.4)
        for (i, j) in mesh.edges_with_tag(BoundaryTag.OUTER):
            assert mesh.nodes[i][0] == pytest.approx(6.0201)
            assert mesh.nodes[j][0] == pytest.approx(6.0201)

    def test_cavity_wall_edge_is_inner(self):
        # 0.15 puts wall nodes on a 0.1 grid along y in [1.6, 2.1]
        mesh = hearth_mesh(0.15)
        inner = mesh.edges_with_tag(BoundaryTag.INNER)
        target = {(0.39, 1.8), (0.39, 1.9)}
        found = any(
            {tuple(np.round(mesh.nodes[i], 6)),
             tuple(np.round(mesh.nodes[j], 6))} == target
            for (i, j) in inner)
        assert found

    def test_inner_edges_lie_on_cavity_polyline(self):
        mesh = hearth_mesh(0.2)
        segs = [np.asarray(s, float) for s in HEARTH_CAVITY_SEGMENTS]
        for (i, j) in mesh.edges_with_tag(BoundaryTag.INNER):
            mid = 0.5 * (mesh.nodes[i] + mesh.nodes[j])
            on_any = False
            for s in segs:
                lo = s.min(axis=0) - 1e-9
                hi = s.max(axis=0) + 1e-9
                if np.all(mid >= lo) and np.all(mid <= hi):
                    on_any = True
            assert on_any, f"inner edge off the cavity wall at {mid}"

    def test_all_six_tags_present(self):
        mesh = hearth_mesh(0.1)
        tags = {t for (_, _, t) in mesh.boundary_edges}
        assert tags == set(BoundaryTag)


class TestMeshIO:
    def test_round_trip(self, tmp_path, unit_square_mesh):
        path = tmp_path / "mesh.txt"
        save_mesh(unit_square_mesh, path)
        back = load_mesh(path)
        assert np.allclose(back.nodes, unit_square_mesh.nodes)
        assert np.array_equal(back.triangles, unit_square_mesh.triangles)
        assert np.array_equal(back.tri_subdomain,
                              unit_square_mesh.tri_subdomain)
        assert back.boundary_edges == unit_square_mesh.boundary_edges
        assert back.h == pytest.approx(unit_square_mesh.h)

    def test_comments_ignored(self, tmp_path, unit_square_mesh):
        path = tmp_path / "mesh.txt"
        save_mesh(unit_square_mesh, path)
        text = "# a comment\n" + path.read_text()
        path.write_text(text)
        back = load_mesh(path)
        assert back.num_nodes == unit_square_mesh.num_nodes

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "mesh.txt"
        path.write_text("not-a-mesh\n")
        with pytest.raises(ValueError):
            load_mesh(path)
