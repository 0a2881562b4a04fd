//! Structured triangulations of rectangles whose perimeter is split into
//! tagged boundary regions.

use std::collections::HashMap;
use std::fmt;

use crate::{Error, Result};

pub type Point = [f64; 2];

/// Boundary region tags. Anode and cathode together form the electrode
/// surface carrying the surface current.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Anode,
    Cathode,
    Wall,
    Outer,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Anode, Region::Cathode, Region::Wall, Region::Outer];
    pub const ELECTRODES: [Region; 2] = [Region::Anode, Region::Cathode];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_electrode(self) -> bool {
        matches!(self, Region::Anode | Region::Cathode)
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::Anode => "anode",
            Region::Cathode => "cathode",
            Region::Wall => "wall",
            Region::Outer => "outer",
        }
    }

    pub fn from_name(name: &str) -> Option<Region> {
        Region::ALL.into_iter().find(|r| r.name() == name)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    pub fn name(self) -> &'static str {
        match self {
            Side::Bottom => "bottom",
            Side::Right => "right",
            Side::Top => "top",
            Side::Left => "left",
        }
    }

    pub fn from_name(name: &str) -> Option<Side> {
        Side::ALL.into_iter().find(|s| s.name() == name)
    }
}

/// A sub-interval `[from, to]` of one side, measured along the side in the
/// direction of increasing x (bottom, top) or increasing y (left, right).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideSegment {
    pub side: Side,
    pub from: f64,
    pub to: f64,
    pub region: Region,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub width: f64,
    pub height: f64,
    pub layout: Vec<SideSegment>,
}

const LAYOUT_TOL: f64 = 1e-12;

impl DomainSpec {
    pub fn new(width: f64, height: f64, layout: Vec<SideSegment>) -> Result<Self> {
        let spec = DomainSpec { width, height, layout };
        spec.validate()?;
        Ok(spec)
    }

    /// One region per whole side.
    pub fn from_sides(width: f64, height: f64, bottom: Region, right: Region, top: Region, left: Region) -> Self {
        let whole = |side: Side, region: Region| {
            let len = if matches!(side, Side::Bottom | Side::Top) {
                width
            } else {
                height
            };
            SideSegment {
                side,
                from: 0.0,
                to: len,
                region,
            }
        };
        DomainSpec {
            width,
            height,
            layout: vec![
                whole(Side::Bottom, bottom),
                whole(Side::Right, right),
                whole(Side::Top, top),
                whole(Side::Left, left),
            ],
        }
    }

    pub fn side_length(&self, side: Side) -> f64 {
        match side {
            Side::Bottom | Side::Top => self.width,
            Side::Left | Side::Right => self.height,
        }
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    /// Segments of one side sorted by start coordinate.
    pub fn segments(&self, side: Side) -> Vec<SideSegment> {
        let mut segs: Vec<SideSegment> = self.layout.iter().copied().filter(|s| s.side == side).collect();
        segs.sort_by(|a, b| a.from.total_cmp(&b.from));
        segs
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width.is_finite() && self.width > 0.0 && self.height.is_finite() && self.height > 0.0) {
            return Err(Error::InvalidLayout(format!(
                "width and height must be positive, got {} x {}",
                self.width, self.height
            )));
        }
        for side in Side::ALL {
            let len = self.side_length(side);
            let tol = LAYOUT_TOL * len.max(1.0);
            let segs = self.segments(side);
            if segs.is_empty() {
                return Err(Error::InvalidLayout(format!("{} side has no region", side.name())));
            }
            let mut cursor = 0.0;
            for seg in &segs {
                if !(seg.to > seg.from) {
                    return Err(Error::InvalidLayout(format!(
                        "empty segment [{}, {}] on the {} side",
                        seg.from,
                        seg.to,
                        side.name()
                    )));
                }
                if (seg.from - cursor).abs() > tol {
                    let what = if seg.from > cursor { "gap" } else { "overlap" };
                    return Err(Error::InvalidLayout(format!(
                        "{what} at {cursor} on the {} side",
                        side.name()
                    )));
                }
                cursor = seg.to;
            }
            if (cursor - len).abs() > tol {
                return Err(Error::InvalidLayout(format!(
                    "segments on the {} side end at {cursor}, side length is {len}",
                    side.name()
                )));
            }
        }
        Ok(())
    }

    /// Region owning the point at arclength `s` along `side`.
    pub fn region_at(&self, side: Side, s: f64) -> Region {
        let segs = self.segments(side);
        segs.iter()
            .find(|seg| s >= seg.from && s <= seg.to)
            .or(segs.last())
            .map(|seg| seg.region)
            .expect("validated layout has a segment on every side")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    /// Oriented counter-clockwise around the domain.
    pub vertices: [usize; 2],
    pub region: Region,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    width: f64,
    height: f64,
}

impl Mesh {
    /// Checked constructor. Triangles must be counter-clockwise with
    /// strictly positive area and the boundary edges must cover exactly the
    /// edges that belong to a single triangle.
    pub fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        width: f64,
        height: f64,
    ) -> Result<Self> {
        let mesh = Mesh {
            vertices,
            triangles,
            boundary_edges,
            width,
            height,
        };
        mesh.check()?;
        Ok(mesh)
    }

    fn check(&self) -> Result<()> {
        let nv = self.vertices.len();
        for (k, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("triangle {k} references a missing vertex")));
            }
            if self.signed_area(k) <= 0.0 {
                return Err(Error::InvalidMesh(format!("triangle {k} has non-positive signed area")));
            }
        }
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        if edge_count.values().any(|&c| c > 2) {
            return Err(Error::InvalidMesh("edge shared by more than two triangles".into()));
        }
        let mut outer: Vec<(usize, usize)> = edge_count.iter().filter(|(_, &c)| c == 1).map(|(&e, _)| e).collect();
        let mut tagged: Vec<(usize, usize)> = self
            .boundary_edges
            .iter()
            .map(|e| (e.vertices[0].min(e.vertices[1]), e.vertices[0].max(e.vertices[1])))
            .collect();
        outer.sort_unstable();
        tagged.sort_unstable();
        if outer != tagged {
            return Err(Error::InvalidMesh("boundary edges do not tile the perimeter".into()));
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn triangle_points(&self, k: usize) -> [Point; 3] {
        let t = self.triangles[k];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn signed_area(&self, k: usize) -> f64 {
        let [p0, p1, p2] = self.triangle_points(k);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|k| self.signed_area(k)).sum()
    }

    pub fn edge_length(&self, edge: &BoundaryEdge) -> f64 {
        let [a, b] = edge.vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        (pb[0] - pa[0]).hypot(pb[1] - pa[1])
    }

    pub fn boundary_measure(&self, region: Region) -> f64 {
        self.boundary_edges
            .iter()
            .filter(|e| e.region == region)
            .map(|e| self.edge_length(e))
            .sum()
    }

    pub fn regions_measure(&self, regions: &[Region]) -> f64 {
        regions.iter().map(|&r| self.boundary_measure(r)).sum()
    }

    pub fn perimeter(&self) -> f64 {
        self.boundary_edges.iter().map(|e| self.edge_length(e)).sum()
    }

    /// Longest triangle edge.
    pub fn max_edge_length(&self) -> f64 {
        let mut h: f64 = 0.0;
        for k in 0..self.triangles.len() {
            let p = self.triangle_points(k);
            for e in 0..3 {
                let (a, b) = (p[e], p[(e + 1) % 3]);
                h = h.max((b[0] - a[0]).hypot(b[1] - a[1]));
            }
        }
        h
    }

    /// Number of triangles incident to every undirected edge.
    pub fn edge_incidence(&self) -> HashMap<(usize, usize), usize> {
        let mut count = HashMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        count
    }
}

fn grid_index(side: &'static str, s: f64, len: f64, cells: usize) -> Result<usize> {
    let pos = s / len * cells as f64;
    let rounded = pos.round();
    if (pos - rounded).abs() > 1e-9 {
        return Err(Error::LayoutMisaligned { side, position: s });
    }
    Ok(rounded as usize)
}

/// Structured grid of `nx * ny` cells, each split along its rising diagonal.
pub fn build_rect_mesh(spec: &DomainSpec, nx: usize, ny: usize) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput(format!(
            "nx and ny must be at least 1, got {nx} x {ny}"
        )));
    }
    spec.validate()?;
    // Region per boundary edge, indexed along each side.
    let mut side_tags: HashMap<Side, Vec<Region>> = HashMap::new();
    for side in Side::ALL {
        let cells = if matches!(side, Side::Bottom | Side::Top) {
            nx
        } else {
            ny
        };
        let len = spec.side_length(side);
        let mut tags = vec![Region::Outer; cells];
        for seg in spec.segments(side) {
            let i0 = grid_index(side.name(), seg.from, len, cells)?;
            let i1 = grid_index(side.name(), seg.to, len, cells)?;
            for tag in tags.iter_mut().take(i1).skip(i0) {
                *tag = seg.region;
            }
        }
        side_tags.insert(side, tags);
    }

    let (w, h) = (spec.width, spec.height);
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([w * i as f64 / nx as f64, h * j as f64 / ny as f64]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v11, v01) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let mut edges = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        edges.push(BoundaryEdge {
            vertices: [idx(i, 0), idx(i + 1, 0)],
            region: side_tags[&Side::Bottom][i],
        });
    }
    for j in 0..ny {
        edges.push(BoundaryEdge {
            vertices: [idx(nx, j), idx(nx, j + 1)],
            region: side_tags[&Side::Right][j],
        });
    }
    for i in (0..nx).rev() {
        edges.push(BoundaryEdge {
            vertices: [idx(i + 1, ny), idx(i, ny)],
            region: side_tags[&Side::Top][i],
        });
    }
    for j in (0..ny).rev() {
        edges.push(BoundaryEdge {
            vertices: [idx(0, j + 1), idx(0, j)],
            region: side_tags[&Side::Left][j],
        });
    }
    Mesh::from_parts(vertices, triangles, edges, w, h)
}

/// Red refinement: every triangle is split into four congruent children
/// through its edge midpoints.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    let mut vertices = mesh.vertices.clone();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
        *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let (pa, pb) = (vertices[a], vertices[b]);
            vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
            vertices.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let mab = mid(a, b, &mut vertices);
        let mbc = mid(b, c, &mut vertices);
        let mca = mid(c, a, &mut vertices);
        triangles.push([a, mab, mca]);
        triangles.push([mab, b, mbc]);
        triangles.push([mca, mbc, c]);
        triangles.push([mab, mbc, mca]);
    }
    let mut edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for e in &mesh.boundary_edges {
        let [a, b] = e.vertices;
        let m = mid(a, b, &mut vertices);
        edges.push(BoundaryEdge {
            vertices: [a, m],
            region: e.region,
        });
        edges.push(BoundaryEdge {
            vertices: [m, b],
            region: e.region,
        });
    }
    Mesh {
        vertices,
        triangles,
        boundary_edges: edges,
        width: mesh.width,
        height: mesh.height,
    }
}

pub fn boundary_measure(mesh: &Mesh, region: Region) -> f64 {
    mesh.boundary_measure(region)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(bottom: Region, right: Region, top: Region, left: Region) -> DomainSpec {
        DomainSpec::from_sides(1.0, 1.0, bottom, right, top, left)
    }

    #[test]
    fn single_cell_counts() {
        let m = build_rect_mesh(&unit(Region::Wall, Region::Wall, Region::Wall, Region::Wall), 1, 1).unwrap();
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.num_triangles(), 2);
        assert!((m.area() - 1.0).abs() < 1e-15);
        assert!((m.boundary_measure(Region::Wall) - 4.0).abs() < 1e-15);
        assert_eq!(m.boundary_measure(Region::Anode), 0.0);
    }

    #[test]
    fn two_by_two_counts() {
        let m = build_rect_mesh(&unit(Region::Wall, Region::Wall, Region::Wall, Region::Wall), 2, 2).unwrap();
        assert_eq!(m.num_vertices(), 9);
        assert_eq!(m.num_triangles(), 8);
    }

    #[test]
    fn four_region_partition() {
        let spec = unit(Region::Wall, Region::Cathode, Region::Outer, Region::Anode);
        let m = build_rect_mesh(&spec, 4, 4).unwrap();
        for r in Region::ALL {
            assert!((m.boundary_measure(r) - 1.0).abs() < 1e-14, "{r}");
        }
    }

    #[test]
    fn long_sides_of_a_strip() {
        let spec = DomainSpec::from_sides(2.0, 1.0, Region::Wall, Region::Anode, Region::Wall, Region::Cathode);
        let m = build_rect_mesh(&spec, 4, 2).unwrap();
        assert!((m.boundary_measure(Region::Wall) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn misaligned_layout_is_rejected() {
        let spec = DomainSpec::new(
            1.0,
            1.0,
            vec![
                SideSegment {
                    side: Side::Bottom,
                    from: 0.0,
                    to: 0.3,
                    region: Region::Wall,
                },
                SideSegment {
                    side: Side::Bottom,
                    from: 0.3,
                    to: 1.0,
                    region: Region::Outer,
                },
                SideSegment {
                    side: Side::Right,
                    from: 0.0,
                    to: 1.0,
                    region: Region::Cathode,
                },
                SideSegment {
                    side: Side::Top,
                    from: 0.0,
                    to: 1.0,
                    region: Region::Outer,
                },
                SideSegment {
                    side: Side::Left,
                    from: 0.0,
                    to: 1.0,
                    region: Region::Anode,
                },
            ],
        )
        .unwrap();
        assert!(matches!(
            build_rect_mesh(&spec, 4, 4),
            Err(Error::LayoutMisaligned { side: "bottom", .. })
        ));
        let m = build_rect_mesh(&spec, 10, 4).unwrap();
        assert!((m.boundary_measure(Region::Wall) - 0.3).abs() < 1e-14);
    }

    #[test]
    fn gaps_and_overlaps_are_rejected() {
        let mut layout = unit(Region::Wall, Region::Wall, Region::Wall, Region::Wall).layout;
        layout[0].to = 0.5;
        assert!(matches!(
            DomainSpec::new(1.0, 1.0, layout.clone()),
            Err(Error::InvalidLayout(_))
        ));
        layout.push(SideSegment {
            side: Side::Bottom,
            from: 0.4,
            to: 1.0,
            region: Region::Outer,
        });
        assert!(matches!(
            DomainSpec::new(1.0, 1.0, layout),
            Err(Error::InvalidLayout(_))
        ));
    }

    #[test]
    fn refinement_quadruples_and_preserves_measures() {
        let spec = DomainSpec::from_sides(2.0, 0.5, Region::Wall, Region::Cathode, Region::Outer, Region::Anode);
        let m = build_rect_mesh(&spec, 1, 1).unwrap();
        let r = refine_uniform(&m);
        assert_eq!(r.num_triangles(), 8);
        assert!((r.area() - 1.0).abs() < 1e-12);
        for reg in Region::ALL {
            assert!((r.boundary_measure(reg) - m.boundary_measure(reg)).abs() < 1e-12);
        }
        let rr = refine_uniform(&r);
        assert_eq!(rr.num_triangles(), 32);
        Mesh::from_parts(
            rr.vertices().to_vec(),
            rr.triangles().to_vec(),
            rr.boundary_edges().to_vec(),
            rr.width(),
            rr.height(),
        )
        .expect("refined mesh is conforming");
    }
}
