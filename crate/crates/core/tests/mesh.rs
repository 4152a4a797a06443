use emacfem::mesh::{
    build_periodic_map, build_rect_mesh, validate_mesh, MeshViolation, PeriodicAxes, Side,
};
use emacfem::{DiagonalPattern, DomainBox, Mesh};
use proptest::prelude::*;

fn patterns() -> impl Strategy<Value = DiagonalPattern> {
    prop_oneof![Just(DiagonalPattern::Right), Just(DiagonalPattern::Left)]
}

#[test]
fn smallest_mesh() {
    let m = build_rect_mesh(1, 1, DomainBox::unit_square(), DiagonalPattern::Right).unwrap();
    assert_eq!((m.n_triangles(), m.n_vertices(), m.n_edges()), (2, 4, 5));
    assert!(validate_mesh(&m).is_valid());
}

#[test]
fn fine_mesh_size() {
    let m = build_rect_mesh(48, 48, DomainBox::unit_square(), DiagonalPattern::Right).unwrap();
    assert_eq!(m.n_triangles(), 2 * 48 * 48);
    assert!((m.h() - 2f64.sqrt() / 48.0).abs() < 1e-15);
}

#[test]
fn periodic_classes() {
    let mut m = build_rect_mesh(4, 4, DomainBox::unit_square(), DiagonalPattern::Right).unwrap();
    m.tag_periodic(PeriodicAxes::BOTH);
    let map = build_periodic_map(&m, PeriodicAxes::BOTH).unwrap();
    let classes = map.vertex_classes(m.n_vertices());
    let mut distinct = classes.clone();
    distinct.sort_unstable();
    distinct.dedup();
    // a 4x4 torus has 16 distinct vertices
    assert_eq!(distinct.len(), 16);
    let corners = [0, 4, 20, 24];
    assert!(corners.iter().all(|&c| classes[c] == classes[0]));

    let mut m = build_rect_mesh(4, 4, DomainBox::unit_square(), DiagonalPattern::Right).unwrap();
    m.tag_periodic(PeriodicAxes::X);
    let map = build_periodic_map(&m, PeriodicAxes::X).unwrap();
    assert_eq!(map.vertex_pairs.len(), 5);
    assert_eq!(map.edge_pairs.len(), 4);
}

#[test]
fn clockwise_and_duplicate_triangles_are_reported() {
    let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let m = Mesh::from_parts(v.clone(), vec![[0, 2, 1], [0, 2, 3]], DomainBox::unit_square()).unwrap();
    let r = validate_mesh(&m);
    assert!(r
        .violations
        .iter()
        .any(|e| matches!(e, MeshViolation::NonPositiveArea { triangle: 0, .. })));

    let m = Mesh::from_parts(v, vec![[0, 1, 2], [0, 1, 2], [0, 1, 2], [0, 2, 3]], DomainBox::unit_square()).unwrap();
    let r = validate_mesh(&m);
    assert!(r
        .violations
        .iter()
        .any(|e| matches!(e, MeshViolation::OverSharedEdge { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn rect_meshes_are_valid(nx in 1usize..12, ny in 1usize..12, pat in patterns(),
                             x0 in -2.0f64..2.0, w in 0.1f64..3.0, h in 0.1f64..3.0) {
        let dom = DomainBox::new(x0, x0 + w, -h / 2.0, h / 2.0).unwrap();
        let m = build_rect_mesh(nx, ny, dom, pat).unwrap();
        prop_assert!(validate_mesh(&m).is_valid());
        prop_assert_eq!(m.n_vertices(), (nx + 1) * (ny + 1));
        prop_assert_eq!(m.n_triangles(), 2 * nx * ny);
        let area: f64 = (0..m.n_triangles()).map(|t| m.signed_area(t)).sum();
        prop_assert!((area - w * h).abs() <= 1e-12 * w * h);
        let boundary = m.edges().iter().filter(|e| e.is_boundary()).count();
        prop_assert_eq!(boundary, 2 * (nx + ny));
        let left = m.edges().iter().enumerate()
            .filter(|(k, _)| m.boundary_side(*k) == Some(Side::Left)).count();
        prop_assert_eq!(left, ny);
    }

    #[test]
    fn periodic_pairs_match_positions(n in 1usize..8, pat in patterns()) {
        let mut m = build_rect_mesh(n, n, DomainBox::unit_square(), pat).unwrap();
        m.tag_periodic(PeriodicAxes::BOTH);
        let map = build_periodic_map(&m, PeriodicAxes::BOTH).unwrap();
        let v = m.vertices();
        for p in &map.vertex_pairs {
            let (a, b) = (v[p.master], v[p.slave]);
            let d = [(a[0] - b[0]).abs(), (a[1] - b[1]).abs()];
            // partners differ by one period in one coordinate
            prop_assert!(d.iter().all(|x| x.abs() < 1e-12 || (x - 1.0).abs() < 1e-12));
        }
        let classes = map.vertex_classes(m.n_vertices());
        let mut distinct = classes;
        distinct.sort_unstable();
        distinct.dedup();
        prop_assert_eq!(distinct.len(), n * n);
    }
}
