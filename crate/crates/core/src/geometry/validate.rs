use super::Mesh;
use crate::error::{Error, Result};

/// Shape-regularity summary: the area ratio `|T| / h_T^2` and the edge
/// ratios `h_e / h_T`, minimized or maximized over the mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    pub elements: usize,
    pub edges: usize,
    pub boundary_edges: usize,
    pub min_area_ratio: f64,
    pub min_edge_ratio: f64,
    pub max_edge_ratio: f64,
    pub h: f64,
}

/// Checks loop closure, orientation and edge sharing, then reports the
/// shape-regularity ratios. Any structural defect fails with every offending
/// entity listed.
pub fn validate(mesh: &Mesh) -> Result<RegularityReport> {
    let mut defects = Vec::new();

    for el in &mesh.elements {
        let n = el.edges.len();
        for i in 0..n {
            let here = el.edges[i];
            let next = el.edges[(i + 1) % n];
            if mesh.end_vertex(here) != mesh.start_vertex(next) {
                defects.push(format!(
                    "element {}: loop not closed between edges {} and {}",
                    el.id, here.edge, next.edge
                ));
            }
        }
        if !(el.area > 0.0) {
            defects.push(format!(
                "element {}: clockwise or degenerate orientation (signed area {:e})",
                el.id, el.area
            ));
        }
    }

    let mut signed_uses = vec![0i32; mesh.edges.len()];
    let mut uses = vec![0usize; mesh.edges.len()];
    for el in &mesh.elements {
        for se in &el.edges {
            uses[se.edge] += 1;
            signed_uses[se.edge] += if se.forward { 1 } else { -1 };
        }
    }
    for (i, (&n, &s)) in uses.iter().zip(&signed_uses).enumerate() {
        match n {
            0 => defects.push(format!("edge {i}: not used by any element")),
            1 => {}
            2 if s == 0 => {}
            2 => defects.push(format!("edge {i}: traversed in the same direction by both elements")),
            _ => defects.push(format!("edge {i}: shared by {n} elements")),
        }
    }

    if !defects.is_empty() {
        return Err(Error::Validation(defects));
    }

    let mut min_area_ratio = f64::INFINITY;
    let mut min_edge_ratio = f64::INFINITY;
    let mut max_edge_ratio: f64 = 0.0;
    for el in &mesh.elements {
        let h2 = el.diameter * el.diameter;
        min_area_ratio = min_area_ratio.min(el.area / h2);
        for se in &el.edges {
            let r = mesh.edges[se.edge].length / el.diameter;
            min_edge_ratio = min_edge_ratio.min(r);
            max_edge_ratio = max_edge_ratio.max(r);
        }
    }
    Ok(RegularityReport {
        elements: mesh.elements.len(),
        edges: mesh.edges.len(),
        boundary_edges: mesh.edges.iter().filter(|e| e.boundary).count(),
        min_area_ratio,
        min_edge_ratio,
        max_edge_ratio,
        h: mesh.h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Mesh, SignedEdge};
    use crate::testcases;
    use approx::assert_relative_eq;

    #[test]
    fn unit_square_ratios() {
        let r = validate(&testcases::square_mesh(1)).unwrap();
        assert_relative_eq!(r.min_area_ratio, 0.5, max_relative = 1e-14);
        assert_relative_eq!(r.min_edge_ratio, 0.5f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(r.max_edge_ratio, 0.5f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn reversed_loop_is_named() {
        let m = testcases::square_mesh(2);
        let (v, e, mut loops) = m.parts();
        let rev: Vec<SignedEdge> = loops[2]
            .iter()
            .rev()
            .map(|se| SignedEdge::new(se.edge, !se.forward))
            .collect();
        loops[2] = rev;
        let bad = Mesh::new(v, e, loops).unwrap();
        match validate(&bad) {
            Err(Error::Validation(msgs)) => {
                assert!(msgs.iter().any(|m| m.starts_with("element 2:")), "{msgs:?}");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn open_loop_detected() {
        let m = testcases::square_mesh(1);
        let (v, e, mut loops) = m.parts();
        loops[0].swap(0, 1);
        let bad = Mesh::new(v, e, loops).unwrap();
        assert!(matches!(validate(&bad), Err(Error::Validation(_))));
    }

    #[test]
    fn case1_curved_regular() {
        let m = testcases::case1_mesh(8, testcases::Variant::Curved).unwrap();
        let r = validate(&m).unwrap();
        assert!(r.min_area_ratio > 0.3, "{r:?}");
        assert!(r.min_edge_ratio > 0.5, "{r:?}");
        assert!(r.max_edge_ratio < 1.0, "{r:?}");
    }
}
