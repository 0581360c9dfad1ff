//! 2D boolean kernel for simple polygons (no holes): overlap-constrained
//! union rings and intersection areas.
//!
//! Strategy: snap all vertices and crossing points onto a shared node set
//! (1e-9 snap), split every edge at every node lying on it, classify each
//! sub-edge against the other polygon by its midpoint, then stitch the
//! selected sub-edges into closed loops. Collinear shared-edge overlaps are
//! resolved inclusively: a boundary sub-edge traversed the same way by both
//! rings is kept once, opposite traversals cancel.

use super::{GeometryError, Vec2, EPS_SNAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Inside,
    Outside,
    Boundary,
}

/// Point-in-polygon with boundary detection (crossing number for the
/// interior test, segment distance for the boundary band).
pub fn contains(ring: &[Vec2], p: &Vec2) -> Containment {
    let n = ring.len();
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        if point_on_segment(p, &a, &b) {
            return Containment::Boundary;
        }
    }
    let mut inside = false;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let t = (p.y - a.y) / (b.y - a.y);
            if p.x < a.x + t * (b.x - a.x) {
                inside = !inside;
            }
        }
    }
    if inside {
        Containment::Inside
    } else {
        Containment::Outside
    }
}

fn point_on_segment(p: &Vec2, a: &Vec2, b: &Vec2) -> bool {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 < EPS_SNAP * EPS_SNAP {
        return (p - a).norm() <= EPS_SNAP;
    }
    let t = (p - a).dot(&ab) / len2;
    if !(-1e-12..=1.0 + 1e-12).contains(&t) {
        return false;
    }
    let foot = a + ab * t.clamp(0.0, 1.0);
    (p - foot).norm() <= EPS_SNAP
}

/// Node arena with coordinate snapping.
struct Nodes {
    coords: Vec<Vec2>,
}

impl Nodes {
    fn new() -> Self {
        Self { coords: Vec::new() }
    }

    fn intern(&mut self, p: Vec2) -> usize {
        for (i, q) in self.coords.iter().enumerate() {
            if (p - q).norm() <= EPS_SNAP {
                return i;
            }
        }
        self.coords.push(p);
        self.coords.len() - 1
    }
}

#[derive(Debug, Clone, Copy)]
struct SubEdge {
    from: usize,
    to: usize,
    owner: u8, // 0 = first ring, 1 = second ring
}

/// Splits both rings at every node that lies on them and returns directed
/// sub-edges over the shared node set.
fn build_subedges(a: &[Vec2], b: &[Vec2]) -> (Nodes, Vec<SubEdge>) {
    let mut nodes = Nodes::new();
    let ring_a: Vec<usize> = a.iter().map(|p| nodes.intern(*p)).collect();
    let ring_b: Vec<usize> = b.iter().map(|p| nodes.intern(*p)).collect();

    // Crossing points between every edge pair.
    let mut extra: Vec<Vec2> = Vec::new();
    for i in 0..ring_a.len() {
        let (a0, a1) = edge_coords(&nodes, &ring_a, i);
        for j in 0..ring_b.len() {
            let (b0, b1) = edge_coords(&nodes, &ring_b, j);
            segment_crossings(&a0, &a1, &b0, &b1, &mut extra);
        }
    }
    for p in extra {
        nodes.intern(p);
    }

    let mut edges = Vec::new();
    split_ring(&nodes, &ring_a, 0, &mut edges);
    split_ring(&nodes, &ring_b, 1, &mut edges);
    (nodes, edges)
}

fn edge_coords(nodes: &Nodes, ring: &[usize], i: usize) -> (Vec2, Vec2) {
    let a = nodes.coords[ring[i]];
    let b = nodes.coords[ring[(i + 1) % ring.len()]];
    (a, b)
}

/// Appends proper crossings and collinear-overlap endpoints of the two
/// segments to `out`.
fn segment_crossings(a0: &Vec2, a1: &Vec2, b0: &Vec2, b1: &Vec2, out: &mut Vec<Vec2>) {
    let da = a1 - a0;
    let db = b1 - b0;
    let denom = da.perp(&db);
    let r = b0 - a0;
    if denom.abs() > 1e-12 {
        let t = r.perp(&db) / denom;
        let u = r.perp(&da) / denom;
        if (-1e-12..=1.0 + 1e-12).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&u) {
            out.push(a0 + da * t.clamp(0.0, 1.0));
        }
        return;
    }
    // Parallel. Check for collinear overlap; its endpoints become nodes.
    if r.perp(&da).abs() > EPS_SNAP * (1.0 + da.norm()) {
        return;
    }
    for p in [b0, b1] {
        if point_on_segment(p, a0, a1) {
            out.push(*p);
        }
    }
    for p in [a0, a1] {
        if point_on_segment(p, b0, b1) {
            out.push(*p);
        }
    }
}

fn split_ring(nodes: &Nodes, ring: &[usize], owner: u8, edges: &mut Vec<SubEdge>) {
    let n = ring.len();
    for i in 0..n {
        let from = ring[i];
        let to = ring[(i + 1) % n];
        let a = nodes.coords[from];
        let b = nodes.coords[to];
        let ab = b - a;
        let len2 = ab.norm_squared();
        // Every node on this edge becomes a split point, ordered by the
        // parameter along the edge.
        let mut cuts: Vec<(f64, usize)> = vec![(0.0, from), (1.0, to)];
        for (id, p) in nodes.coords.iter().enumerate() {
            if id == from || id == to || len2 < EPS_SNAP * EPS_SNAP {
                continue;
            }
            if point_on_segment(p, &a, &b) {
                let t = (p - a).dot(&ab) / len2;
                cuts.push((t.clamp(0.0, 1.0), id));
            }
        }
        cuts.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite parameter"));
        for w in cuts.windows(2) {
            let (_, n0) = w[0];
            let (_, n1) = w[1];
            if n0 != n1 {
                edges.push(SubEdge {
                    from: n0,
                    to: n1,
                    owner,
                });
            }
        }
    }
}

/// Selected edge set for a boolean op, ready to stitch.
fn select_edges(
    nodes: &Nodes,
    edges: &[SubEdge],
    a: &[Vec2],
    b: &[Vec2],
    keep_outside: bool,
) -> Vec<(usize, usize)> {
    let mut kept: Vec<(usize, usize)> = Vec::new();
    let mut boundary_pairs: Vec<(usize, usize)> = Vec::new();
    for e in edges {
        let mid = (nodes.coords[e.from] + nodes.coords[e.to]) * 0.5;
        let other: &[Vec2] = if e.owner == 0 { b } else { a };
        match contains(other, &mid) {
            Containment::Boundary => {
                if e.owner == 0 {
                    boundary_pairs.push((e.from, e.to));
                }
                // Owner-1 boundary edges are dropped: the owner-0 copy of a
                // same-direction overlap represents the shared boundary, an
                // opposite-direction overlap is interior and dissolves.
            }
            Containment::Outside if keep_outside => kept.push((e.from, e.to)),
            Containment::Inside if !keep_outside => kept.push((e.from, e.to)),
            _ => {}
        }
    }
    // A shared boundary edge survives only when both rings traverse it the
    // same way (interior on the same side).
    for (from, to) in boundary_pairs {
        let same_dir = edges
            .iter()
            .any(|e| e.owner == 1 && e.from == from && e.to == to);
        let opposite = edges
            .iter()
            .any(|e| e.owner == 1 && e.from == to && e.to == from);
        if same_dir || !opposite {
            kept.push((from, to));
        }
    }
    kept
}

/// Stitches directed edges into closed loops. At branch nodes the walk takes
/// the most counter-clockwise turn, which follows the outer face for CCW
/// input rings.
fn stitch_loops(nodes: &Nodes, mut edges: Vec<(usize, usize)>) -> Vec<Vec<Vec2>> {
    let mut loops = Vec::new();
    while let Some((first_from, first_to)) = edges.pop() {
        let mut ring_nodes = vec![first_from, first_to];
        let mut guard = 0;
        loop {
            guard += 1;
            if guard > 100_000 {
                break; // malformed selection; abandon this loop
            }
            let cur = *ring_nodes.last().unwrap();
            if cur == first_from {
                break;
            }
            let prev = ring_nodes[ring_nodes.len() - 2];
            let incoming = nodes.coords[cur] - nodes.coords[prev];
            let mut best: Option<(f64, usize)> = None;
            for (i, (f, t)) in edges.iter().enumerate() {
                if *f != cur {
                    continue;
                }
                let outgoing = nodes.coords[*t] - nodes.coords[cur];
                let angle = ccw_turn_angle(&incoming, &outgoing);
                if best.map_or(true, |(a, _)| angle > a) {
                    best = Some((angle, i));
                }
            }
            let Some((_, idx)) = best else {
                break; // open chain: numerical failure, drop it
            };
            let (_, to) = edges.swap_remove(idx);
            ring_nodes.push(to);
        }
        if *ring_nodes.last().unwrap() == first_from && ring_nodes.len() > 3 {
            ring_nodes.pop();
            loops.push(ring_nodes.iter().map(|&i| nodes.coords[i]).collect());
        }
    }
    loops
}

/// CCW turn angle with exact backtracking ranked worst: positive for left
/// turns, and a straight reversal maps to -pi instead of +pi so the walk
/// never doubles back while another exit exists.
fn ccw_turn_angle(incoming: &Vec2, outgoing: &Vec2) -> f64 {
    let cross = incoming.perp(outgoing);
    let dot = incoming.dot(outgoing);
    let angle = cross.atan2(dot);
    if angle >= std::f64::consts::PI - 1e-12 {
        -std::f64::consts::PI
    } else {
        angle
    }
}

fn ring_area(ring: &[Vec2]) -> f64 {
    let n = ring.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += ring[i].perp(&ring[(i + 1) % n]);
    }
    acc * 0.5
}

/// Total intersection area of two simple polygons (sum over components).
pub fn intersection_area(a: &[Vec2], b: &[Vec2]) -> f64 {
    // Cheap rejections first: disjoint bounding boxes.
    if bbox_disjoint(a, b) {
        return 0.0;
    }
    let (nodes, edges) = build_subedges(a, b);
    let kept = select_edges(&nodes, &edges, a, b, false);
    if kept.is_empty() {
        // No interior edges: either disjoint or one ring contains the other.
        return match containment_relation(a, b) {
            Some(RingRelation::AInsideB) => ring_area(a).abs(),
            Some(RingRelation::BInsideA) => ring_area(b).abs(),
            None => 0.0,
        };
    }
    stitch_loops(&nodes, kept)
        .iter()
        .map(|l| ring_area(l))
        .filter(|area| *area > 0.0)
        .sum()
}

enum RingRelation {
    AInsideB,
    BInsideA,
}

fn containment_relation(a: &[Vec2], b: &[Vec2]) -> Option<RingRelation> {
    if a.iter().all(|p| contains(b, p) != Containment::Outside) {
        return Some(RingRelation::AInsideB);
    }
    if b.iter().all(|p| contains(a, p) != Containment::Outside) {
        return Some(RingRelation::BInsideA);
    }
    None
}

/// Boundary ring of the union of two overlapping simple polygons.
pub fn union_ring(a: &[Vec2], b: &[Vec2]) -> Result<Vec<Vec2>, GeometryError> {
    if bbox_disjoint(a, b) {
        return Err(GeometryError::DisjointInputs);
    }
    if intersection_area(a, b) <= 0.0 {
        return Err(GeometryError::DisjointInputs);
    }
    match containment_relation(a, b) {
        Some(RingRelation::AInsideB) => return Ok(b.to_vec()),
        Some(RingRelation::BInsideA) => return Ok(a.to_vec()),
        None => {}
    }
    let (nodes, edges) = build_subedges(a, b);
    let kept = select_edges(&nodes, &edges, a, b, true);
    let loops = stitch_loops(&nodes, kept);
    // The outer boundary is the loop of largest magnitude area; smaller
    // loops are numerical slivers or holes, both dropped.
    loops
        .into_iter()
        .max_by(|x, y| {
            ring_area(x)
                .abs()
                .partial_cmp(&ring_area(y).abs())
                .expect("finite area")
        })
        .ok_or_else(|| GeometryError::Degenerate("union produced no closed loop".into()))
}

fn bbox_disjoint(a: &[Vec2], b: &[Vec2]) -> bool {
    let bb = |r: &[Vec2]| {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in r {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    };
    let (alo, ahi) = bb(a);
    let (blo, bhi) = bb(b);
    ahi.x < blo.x - EPS_SNAP
        || bhi.x < alo.x - EPS_SNAP
        || ahi.y < blo.y - EPS_SNAP
        || bhi.y < alo.y - EPS_SNAP
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rect(x0: f64, y0: f64, w: f64, h: f64) -> Vec<Vec2> {
        vec![
            Vec2::new(x0, y0),
            Vec2::new(x0 + w, y0),
            Vec2::new(x0 + w, y0 + h),
            Vec2::new(x0, y0 + h),
        ]
    }

    #[test]
    fn intersection_of_offset_squares() {
        let a = rect(0.0, 0.0, 1.0, 1.0);
        let b = rect(0.5, 0.0, 1.0, 1.0);
        assert_relative_eq!(intersection_area(&a, &b), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn intersection_contained() {
        let a = rect(0.25, 0.25, 0.5, 0.5);
        let b = rect(0.0, 0.0, 1.0, 1.0);
        assert_relative_eq!(intersection_area(&a, &b), 0.25, epsilon = 1e-9);
        assert_relative_eq!(intersection_area(&b, &a), 0.25, epsilon = 1e-9);
    }

    #[test]
    fn intersection_disjoint() {
        let a = rect(0.0, 0.0, 1.0, 1.0);
        let b = rect(2.0, 2.0, 1.0, 1.0);
        assert_relative_eq!(intersection_area(&a, &b), 0.0);
    }

    #[test]
    fn intersection_identical() {
        let a = rect(0.0, 0.0, 2.0, 1.0);
        assert_relative_eq!(intersection_area(&a, &a.clone()), 2.0, epsilon = 1e-9);
    }

    #[test]
    fn union_of_offset_squares_shares_collinear_edges() {
        let a = rect(0.0, 0.0, 1.0, 1.0);
        let b = rect(0.5, 0.0, 1.0, 1.0);
        let ring = union_ring(&a, &b).unwrap();
        assert_relative_eq!(ring_area(&ring).abs(), 1.5, epsilon = 1e-9);
    }

    #[test]
    fn union_identical_returns_same_area() {
        let a = rect(0.0, 0.0, 1.0, 2.0);
        let ring = union_ring(&a, &a.clone()).unwrap();
        assert_relative_eq!(ring_area(&ring).abs(), 2.0, epsilon = 1e-9);
    }

    #[test]
    fn union_contained_returns_outer() {
        let inner = rect(0.25, 0.25, 0.5, 0.5);
        let outer = rect(0.0, 0.0, 1.0, 1.0);
        let ring = union_ring(&inner, &outer).unwrap();
        assert_relative_eq!(ring_area(&ring).abs(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn union_cross_shape_is_nonconvex() {
        // Horizontal and vertical bars of a plus sign.
        let h = rect(-1.5, -0.5, 3.0, 1.0);
        let v = rect(-0.5, -1.5, 1.0, 3.0);
        let ring = union_ring(&h, &v).unwrap();
        // area = 3 + 3 - 1 overlap
        assert_relative_eq!(ring_area(&ring).abs(), 5.0, epsilon = 1e-9);
        assert_eq!(ring.len(), 12, "cross has 12 corners, none re-hulled");
    }

    #[test]
    fn union_diagonal_overlap() {
        let a = rect(0.0, 0.0, 1.0, 1.0);
        let b = rect(0.5, 0.5, 1.0, 1.0);
        let ring = union_ring(&a, &b).unwrap();
        assert_relative_eq!(ring_area(&ring).abs(), 1.75, epsilon = 1e-9);
    }
}
