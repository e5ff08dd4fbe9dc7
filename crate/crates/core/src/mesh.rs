//! Uniform hexahedral mesh of the unit cube and polyline fiber meshes.
//!
//! The background mesh stores only its refinement level; vertex positions are
//! derived from the integer lattice so that coordinates are exact multiples of
//! `2^-level`.

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub type Point = Vector3<f64>;

/// Largest refinement level accepted by [`HexMesh::new`].
pub const MAX_LEVEL: u32 = 8;

/// Boundary face labels of the unit cube.
///
/// `0: x=0`, `1: x=1`, `2: z=0`, `3: z=1`, `4: y=0`, `5: y=1`.
pub const FACE_LABELS: [u8; 6] = [0, 1, 2, 3, 4, 5];

/// Axis normal to a labelled face and whether it is the upper (`x_i = 1`) side.
pub fn face_axis(label: u8) -> Option<(usize, bool)> {
    match label {
        0 => Some((0, false)),
        1 => Some((0, true)),
        2 => Some((2, false)),
        3 => Some((2, true)),
        4 => Some((1, false)),
        5 => Some((1, true)),
        _ => None,
    }
}

/// Outward unit normal of a labelled face.
pub fn face_normal(label: u8) -> Option<Point> {
    face_axis(label).map(|(axis, upper)| {
        let mut n = Point::zeros();
        n[axis] = if upper { 1.0 } else { -1.0 };
        n
    })
}

/// Boundary facet: a cell face lying on `∂Ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryFacet {
    pub cell: usize,
    pub label: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HexMesh {
    level: u32,
}

impl HexMesh {
    pub fn new(level: u32) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::Capacity {
                level,
                max: MAX_LEVEL,
            });
        }
        Ok(HexMesh { level })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn cells_per_side(&self) -> usize {
        1 << self.level
    }

    /// Cell edge length.
    pub fn h(&self) -> f64 {
        1.0 / self.cells_per_side() as f64
    }

    pub fn n_vertices(&self) -> usize {
        let m = self.cells_per_side() + 1;
        m * m * m
    }

    pub fn n_cells(&self) -> usize {
        let n = self.cells_per_side();
        n * n * n
    }

    pub fn vertex_index(&self, i: usize, j: usize, k: usize) -> usize {
        let m = self.cells_per_side() + 1;
        i + m * (j + m * k)
    }

    pub fn vertex_lattice(&self, v: usize) -> [usize; 3] {
        let m = self.cells_per_side() + 1;
        [v % m, (v / m) % m, v / (m * m)]
    }

    pub fn vertex(&self, v: usize) -> Point {
        let [i, j, k] = self.vertex_lattice(v);
        let n = self.cells_per_side() as f64;
        Point::new(i as f64 / n, j as f64 / n, k as f64 / n)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.n_vertices()).map(|v| self.vertex(v))
    }

    pub fn cell_index(&self, i: usize, j: usize, k: usize) -> usize {
        let n = self.cells_per_side();
        i + n * (j + n * k)
    }

    pub fn cell_lattice(&self, c: usize) -> [usize; 3] {
        let n = self.cells_per_side();
        [c % n, (c / n) % n, c / (n * n)]
    }

    /// Lower corner of a cell.
    pub fn cell_origin(&self, c: usize) -> Point {
        let [i, j, k] = self.cell_lattice(c);
        let h = self.h();
        Point::new(i as f64 * h, j as f64 * h, k as f64 * h)
    }

    /// Vertices of a cell in tensor order: local vertex `a + 2b + 4c` sits at
    /// offset `(a, b, c)` from the cell origin.
    pub fn cell_vertices(&self, c: usize) -> [usize; 8] {
        let [i, j, k] = self.cell_lattice(c);
        let mut out = [0; 8];
        for (local, slot) in out.iter_mut().enumerate() {
            let (a, b, cc) = (local & 1, (local >> 1) & 1, (local >> 2) & 1);
            *slot = self.vertex_index(i + a, j + b, k + cc);
        }
        out
    }

    /// Facets carrying `label`, ordered by cell index.
    pub fn boundary_facets(&self, label: u8) -> Result<Vec<BoundaryFacet>> {
        let (axis, upper) =
            face_axis(label).ok_or_else(|| Error::param("face_label", format!("{label} not in 0..=5")))?;
        let n = self.cells_per_side();
        let fixed = if upper { n - 1 } else { 0 };
        let mut facets = Vec::with_capacity(n * n);
        for c in 0..self.n_cells() {
            if self.cell_lattice(c)[axis] == fixed {
                facets.push(BoundaryFacet { cell: c, label });
            }
        }
        Ok(facets)
    }

    /// Labels of the boundary faces of a cell (empty for interior cells).
    pub fn cell_face_labels(&self, c: usize) -> Vec<u8> {
        let lat = self.cell_lattice(c);
        let n = self.cells_per_side();
        FACE_LABELS
            .iter()
            .copied()
            .filter(|&label| {
                let (axis, upper) = face_axis(label).unwrap();
                lat[axis] == if upper { n - 1 } else { 0 }
            })
            .collect()
    }

    /// Finds the cell containing `x`. Points on shared facets go to the
    /// adjacent cell with the lowest index.
    pub fn locate(&self, x: &Point) -> Result<CellLocation> {
        if x.iter().any(|&c| !(0.0..=1.0).contains(&c)) {
            return Err(Error::OutOfDomain {
                x: x[0],
                y: x[1],
                z: x[2],
            });
        }
        let n = self.cells_per_side();
        let nf = n as f64;
        let mut lat = [0usize; 3];
        let mut local = [0.0; 3];
        for d in 0..3 {
            let scaled = x[d] * nf;
            // lowest cell whose closed extent contains the coordinate
            let c = (scaled.ceil() as usize).saturating_sub(1).min(n - 1);
            lat[d] = c;
            local[d] = scaled - c as f64;
        }
        Ok(CellLocation {
            cell: self.cell_index(lat[0], lat[1], lat[2]),
            local: Point::from(local),
        })
    }

    /// Maps reference coordinates of a cell to physical space.
    pub fn map_local(&self, cell: usize, local: &Point) -> Point {
        self.cell_origin(cell) + local * self.h()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellLocation {
    pub cell: usize,
    /// Reference coordinates in `[0, 1]^3`.
    pub local: Point,
}

/// Trilinear shape function values at reference coordinates, tensor order.
pub fn trilinear_values(local: &Point) -> [f64; 8] {
    let mut out = [0.0; 8];
    for (a, slot) in out.iter_mut().enumerate() {
        let mut v = 1.0;
        for d in 0..3 {
            let bit = (a >> d) & 1;
            v *= if bit == 1 { local[d] } else { 1.0 - local[d] };
        }
        *slot = v;
    }
    out
}

/// Reference-coordinate gradients of the trilinear shape functions.
pub fn trilinear_gradients(local: &Point) -> [Point; 8] {
    let mut out = [Point::zeros(); 8];
    for (a, slot) in out.iter_mut().enumerate() {
        let f: [f64; 3] = std::array::from_fn(|d| if (a >> d) & 1 == 1 { local[d] } else { 1.0 - local[d] });
        let s: [f64; 3] = std::array::from_fn(|d| if (a >> d) & 1 == 1 { 1.0 } else { -1.0 });
        *slot = Point::new(s[0] * f[1] * f[2], f[0] * s[1] * f[2], f[0] * f[1] * s[2]);
    }
    out
}

/// A fiber centerline: an open polyline inside the closed unit cube.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberCurve {
    vertices: Vec<Point>,
    /// Optional constant curvature attached to every segment, used when the
    /// polyline samples an analytic curved fiber.
    curvature: f64,
}

impl FiberCurve {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidFiber("a fiber needs at least two vertices".into()));
        }
        for (i, v) in vertices.iter().enumerate() {
            if v.iter().any(|&c| !(0.0..=1.0).contains(&c) || !c.is_finite()) {
                return Err(Error::InvalidFiber(format!(
                    "vertex {i} = ({}, {}, {}) lies outside the unit cube",
                    v[0], v[1], v[2]
                )));
            }
        }
        for (i, w) in vertices.windows(2).enumerate() {
            if (w[1] - w[0]).norm() == 0.0 {
                return Err(Error::InvalidFiber(format!("vertices {i} and {} coincide", i + 1)));
            }
        }
        Ok(FiberCurve {
            vertices,
            curvature: 0.0,
        })
    }

    pub fn segment(start: Point, end: Point) -> Result<Self> {
        Self::new(vec![start, end])
    }

    /// Polyline sampling of a planar circular arc, tagged with curvature
    /// `1/radius` so that the geometric factor sees the bent tube.
    pub fn circular_arc(
        center: Point,
        radius: f64,
        start_angle: f64,
        sweep: f64,
        segments: usize,
    ) -> Result<Self> {
        if radius <= 0.0 || segments == 0 {
            return Err(Error::InvalidFiber("arc needs positive radius and segments".into()));
        }
        let vertices = (0..=segments)
            .map(|i| {
                let phi = start_angle + sweep * i as f64 / segments as f64;
                center + Point::new(radius * phi.cos(), radius * phi.sin(), 0.0)
            })
            .collect();
        let mut curve = Self::new(vertices)?;
        curve.curvature = 1.0 / radius;
        Ok(curve)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    pub fn segment_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.vertices.windows(2).map(|w| (w[1] - w[0]).norm())
    }

    pub fn length(&self) -> f64 {
        self.segment_lengths().sum()
    }
}

/// Collection of fibers sharing one radius.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberNetwork {
    curves: Vec<FiberCurve>,
    radius: f64,
}

impl FiberNetwork {
    pub fn new(curves: Vec<FiberCurve>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::param("radius", format!("{radius} must be positive")));
        }
        Ok(FiberNetwork { curves, radius })
    }

    pub fn empty(radius: f64) -> Self {
        FiberNetwork {
            curves: Vec::new(),
            radius,
        }
    }

    pub fn curves(&self) -> &[FiberCurve] {
        &self.curves
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.curves.iter().map(FiberCurve::length).sum()
    }

    /// Fiber volume ratio `Σ π a² length_k` over the unit cube.
    pub fn volume_ratio(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius * self.total_length()
    }

    /// Private parameter intervals `I_k`, laid out consecutively with unit gaps.
    pub fn parameter_intervals(&self) -> Vec<(f64, f64)> {
        let mut start = 0.0;
        self.curves
            .iter()
            .map(|c| {
                let iv = (start, start + c.length());
                start = iv.1 + 1.0;
                iv
            })
            .collect()
    }
}

/// One straight element of a fiber mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberElement {
    /// Global fiber-node indices of the two endpoints.
    pub nodes: [usize; 2],
    pub length: f64,
    pub tangent: Point,
    pub curvature: f64,
}

/// 1D meshes of every fiber of a network, with globally numbered nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberMesh {
    pub nodes: Vec<Point>,
    pub elements: Vec<FiberElement>,
    /// Half-open element range per fiber.
    pub fiber_elements: Vec<std::ops::Range<usize>>,
    /// Half-open node range per fiber.
    pub fiber_nodes: Vec<std::ops::Range<usize>>,
    pub radius: f64,
}

impl FiberMesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_fibers(&self) -> usize {
        self.fiber_nodes.len()
    }
}

/// Subdivides every polyline segment into `2^refinements` equal elements.
pub fn build_fiber_mesh(network: &FiberNetwork, refinements: u32) -> Result<FiberMesh> {
    if refinements > 16 {
        return Err(Error::Capacity {
            level: refinements,
            max: 16,
        });
    }
    let parts = 1usize << refinements;
    let mut mesh = FiberMesh {
        nodes: Vec::new(),
        elements: Vec::new(),
        fiber_elements: Vec::with_capacity(network.len()),
        fiber_nodes: Vec::with_capacity(network.len()),
        radius: network.radius(),
    };
    for curve in network.curves() {
        let node_start = mesh.nodes.len();
        let elem_start = mesh.elements.len();
        mesh.nodes.push(curve.vertices()[0]);
        for w in curve.vertices().windows(2) {
            let (p, q) = (w[0], w[1]);
            let seg = q - p;
            let seg_len = seg.norm();
            let tangent = seg / seg_len;
            for i in 1..=parts {
                let node = if i == parts {
                    q
                } else {
                    p + seg * (i as f64 / parts as f64)
                };
                let prev = mesh.nodes.len() - 1;
                mesh.nodes.push(node);
                mesh.elements.push(FiberElement {
                    nodes: [prev, prev + 1],
                    length: seg_len / parts as f64,
                    tangent,
                    curvature: curve.curvature(),
                });
            }
        }
        mesh.fiber_nodes.push(node_start..mesh.nodes.len());
        mesh.fiber_elements.push(elem_start..mesh.elements.len());
    }
    Ok(mesh)
}
