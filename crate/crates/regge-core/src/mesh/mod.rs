//! Polytopal complexes built from simplices and tensor-product boxes.
//!
//! Cells are given by ordered vertex lists and reference-to-physical maps.
//! Lower-dimensional polytopes (faces, hinges, ..., vertices) are derived by
//! enumerating the sub-polytopes of every cell and gluing instances that
//! share the same vertices after identification. Every derived polytope keeps
//! one [`Incidence`] per containing cell, which parametrises it in that
//! cell's reference coordinates; all incidences of a polytope agree on the
//! parametrisation, so quantities from different sides can be compared
//! pointwise.

pub mod geometry;
pub mod io;
pub mod quadrature;
pub mod refine;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use geometry::{BaseMap, CellMap};
pub use quadrature::{quadrature_rule, QuadratureRule};
pub use refine::refine;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Simplex,
    Box,
}

impl Shape {
    pub fn vertex_count(self, dim: usize) -> usize {
        match self {
            Shape::Simplex => dim + 1,
            Shape::Box => 1 << dim,
        }
    }

    /// Reference coordinates of local vertex `local`: `0, e_1, .., e_n` for
    /// simplices and the binary expansion of `local` for boxes.
    pub fn ref_vertex(self, dim: usize, local: usize) -> Vec<f64> {
        match self {
            Shape::Simplex => (0..dim).map(|i| if local == i + 1 { 1.0 } else { 0.0 }).collect(),
            Shape::Box => (0..dim).map(|i| (local >> i & 1) as f64).collect(),
        }
    }

    /// Volume of the reference cell.
    pub fn ref_volume(self, dim: usize) -> f64 {
        match self {
            Shape::Simplex => 1.0 / (1..=dim).map(|k| k as f64).product::<f64>(),
            Shape::Box => 1.0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("face {face} has {count} incident cells")]
    NonManifold { face: usize, count: usize },
    #[error("cell {cell} is inverted or degenerate (Jacobian {jacobian:e})")]
    InvertedCell { cell: usize, jacobian: f64 },
    #[error("vertex {vertex} is not used by any cell")]
    DanglingFace { vertex: usize },
    #[error("polytope {polytope} is not incident to cell {cell}")]
    NotIncident { polytope: usize, cell: usize },
    #[error("hinge {hinge} does not have a manifold fan")]
    NonManifoldHinge { hinge: usize },
    #[error("unsupported cell type: {0}")]
    UnsupportedCellType(String),
    #[error("face {face} receives the same induced orientation from both sides")]
    InconsistentOrientation { face: usize },
    #[error("quadrature degree {requested} unavailable (maximum {max})")]
    DegreeUnavailable { requested: usize, max: usize },
    #[error("invalid mesh input: {0}")]
    InvalidInput(String),
    #[error("geometry map: {0}")]
    Geometry(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }
}

/// Input description of one cell.
#[derive(Debug, Clone)]
pub struct CellSpec {
    pub shape: Shape,
    pub verts: Vec<usize>,
    /// Reference map; defaults to the affine (simplex) or multilinear (box)
    /// map through the vertices.
    pub map: Option<CellMap>,
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub shape: Shape,
    pub verts: Vec<usize>,
    pub map: CellMap,
}

/// A polytope seen from one containing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Incidence {
    pub cell: usize,
    /// Local vertex indices of the cell, ascending.
    pub local: Vec<usize>,
    /// Parametrisation `ξ = origin + Σ η_j axes[j]` in cell reference coordinates.
    pub origin: Vec<f64>,
    pub axes: Vec<Vec<f64>>,
}

impl Incidence {
    pub fn to_cell(&self, eta: &[f64]) -> Vec<f64> {
        let mut xi = self.origin.clone();
        for (a, t) in self.axes.iter().zip(eta) {
            for (x, d) in xi.iter_mut().zip(a) {
                *x += t * d;
            }
        }
        xi
    }

    /// Centroid of the polytope's vertices in cell reference coordinates.
    pub fn ref_centroid(&self, shape: Shape, cell_dim: usize) -> Vec<f64> {
        centroid(shape, cell_dim, &self.local)
    }
}

#[derive(Debug, Clone)]
pub struct Polytope {
    pub dim: usize,
    pub shape: Shape,
    /// Vertex classes (after identification), ascending.
    pub verts: Vec<usize>,
    pub incidences: Vec<Incidence>,
    pub boundary: bool,
}

impl Polytope {
    pub fn incidence(&self, cell: usize) -> Option<&Incidence> {
        self.incidences.iter().find(|i| i.cell == cell)
    }

    pub fn cells(&self) -> Vec<usize> {
        self.incidences.iter().map(|i| i.cell).collect()
    }
}

/// One step of a hinge fan: cell `cell` entered through face `enter` and
/// left through face `leave`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FanEntry {
    pub cell: usize,
    pub enter: usize,
    pub leave: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HingeFan {
    pub hinge: usize,
    pub entries: Vec<FanEntry>,
    pub closed: bool,
}

#[derive(Debug, Clone)]
pub struct MeshComplex {
    dim: usize,
    ambient_dim: usize,
    vertices: Vec<Vec<f64>>,
    vertex_class: Vec<usize>,
    identify: Vec<(usize, usize)>,
    cells: Vec<Cell>,
    strata: Vec<Vec<Polytope>>,
    cell_faces: Vec<Vec<usize>>,
    fans: Vec<HingeFan>,
}

fn centroid(shape: Shape, dim: usize, local: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; dim];
    for &l in local {
        for (x, r) in c.iter_mut().zip(shape.ref_vertex(dim, l)) {
            *x += r;
        }
    }
    c.iter_mut().for_each(|x| *x /= local.len() as f64);
    c
}

/// Local vertex sets (ascending) of all `k`-dimensional sub-polytopes.
fn sub_polytopes(shape: Shape, dim: usize, k: usize) -> Vec<Vec<usize>> {
    match shape {
        Shape::Simplex => subsets(dim + 1, k + 1),
        Shape::Box => {
            let mut out = Vec::new();
            for free in subsets(dim, k) {
                let fixed: Vec<usize> = (0..dim).filter(|a| !free.contains(a)).collect();
                for bits in 0..(1usize << fixed.len()) {
                    let verts: Vec<usize> = (0..(1usize << dim))
                        .filter(|v| fixed.iter().enumerate().all(|(j, &a)| (v >> a & 1) == (bits >> j & 1)))
                        .collect();
                    out.push(verts);
                }
            }
            out
        }
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

pub(crate) fn det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 1.0;
    }
    nalgebra::DMatrix::from_fn(n, n, |i, j| m[i][j]).determinant()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Assemble a complex from vertices, cells and vertex identifications.
pub fn build_complex(
    dim: usize,
    vertices: Vec<Vec<f64>>,
    cells: Vec<CellSpec>,
    identify: &[(usize, usize)],
) -> Result<MeshComplex, MeshError> {
    if !(1..=3).contains(&dim) {
        return Err(MeshError::InvalidInput(format!("dimension {dim} not in 1..=3")));
    }
    let ambient_dim = vertices.first().map_or(dim, |v| v.len());
    if ambient_dim < dim || vertices.iter().any(|v| v.len() != ambient_dim) {
        return Err(MeshError::InvalidInput(
            "vertex coordinates have inconsistent length".into(),
        ));
    }
    if cells.is_empty() {
        return Err(MeshError::InvalidInput("no cells".into()));
    }
    let nv = vertices.len();

    let mut parent: Vec<usize> = (0..nv).collect();
    for &(a, b) in identify {
        if a >= nv || b >= nv {
            return Err(MeshError::InvalidInput(format!(
                "identification ({a}, {b}) out of range"
            )));
        }
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let roots: Vec<usize> = (0..nv).map(|v| find(&mut parent, v)).collect();
    let mut class_of_root = HashMap::new();
    let mut vertex_class = vec![0; nv];
    for v in 0..nv {
        let next = class_of_root.len();
        vertex_class[v] = *class_of_root.entry(roots[v]).or_insert(next);
    }

    let mut built = Vec::with_capacity(cells.len());
    let mut used = vec![false; nv];
    for (c, cell_input) in cells.into_iter().enumerate() {
        if cell_input.verts.len() != cell_input.shape.vertex_count(dim) {
            return Err(MeshError::InvalidInput(format!(
                "cell {c}: {:?} of dimension {dim} needs {} vertices",
                cell_input.shape,
                cell_input.shape.vertex_count(dim)
            )));
        }
        let mut classes = Vec::new();
        for &v in &cell_input.verts {
            if v >= nv {
                return Err(MeshError::InvalidInput(format!("cell {c}: vertex {v} out of range")));
            }
            used[v] = true;
            classes.push(vertex_class[v]);
        }
        classes.sort_unstable();
        if classes.windows(2).any(|w| w[0] == w[1]) {
            return Err(MeshError::InvalidInput(format!("cell {c} has identified vertices")));
        }
        let map = match cell_input.map {
            Some(m) => m,
            None => {
                let corners: Vec<Vec<f64>> = cell_input.verts.iter().map(|&v| vertices[v].clone()).collect();
                match cell_input.shape {
                    Shape::Simplex => CellMap::affine_simplex(&corners),
                    Shape::Box => CellMap::multilinear(&corners),
                }
            }
        };
        built.push(Cell {
            shape: cell_input.shape,
            verts: cell_input.verts,
            map,
        });
    }
    if let Some(v) = used.iter().position(|u| !u) {
        return Err(MeshError::DanglingFace { vertex: v });
    }

    for (c, cell) in built.iter().enumerate() {
        check_jacobian(c, cell, dim, ambient_dim)?;
    }

    let mut strata = Vec::with_capacity(dim);
    for k in 0..dim {
        strata.push(enumerate_stratum(&built, dim, k, &vertex_class, identify)?);
    }

    let mut cell_faces = vec![Vec::new(); built.len()];
    for (f, face) in strata[dim - 1].iter().enumerate() {
        if face.incidences.len() > 2 {
            return Err(MeshError::NonManifold {
                face: f,
                count: face.incidences.len(),
            });
        }
        if face.incidences.len() == 2 && face.incidences[0].cell == face.incidences[1].cell {
            return Err(MeshError::NonManifold { face: f, count: 2 });
        }
        for inc in &face.incidences {
            cell_faces[inc.cell].push(f);
        }
    }

    // Boundary flags: faces with one cell, and everything inside them.
    let mut boundary_sets: Vec<Vec<Vec<usize>>> = vec![Vec::new(); built.len()];
    for face in strata[dim - 1].iter_mut() {
        face.boundary = face.incidences.len() == 1;
        if face.boundary {
            boundary_sets[face.incidences[0].cell].push(face.incidences[0].local.clone());
        }
    }
    for stratum in strata.iter_mut().take(dim - 1) {
        for p in stratum.iter_mut() {
            p.boundary = p.incidences.iter().any(|inc| {
                boundary_sets[inc.cell]
                    .iter()
                    .any(|set| inc.local.iter().all(|l| set.contains(l)))
            });
        }
    }

    let mut complex = MeshComplex {
        dim,
        ambient_dim,
        vertices,
        vertex_class,
        identify: identify.to_vec(),
        cells: built,
        strata,
        cell_faces,
        fans: Vec::new(),
    };

    for (f, face) in complex.strata[dim - 1].iter().enumerate() {
        if face.incidences.len() == 2 {
            let a = complex.induced_orientation(f, face.incidences[0].cell)?;
            let b = complex.induced_orientation(f, face.incidences[1].cell)?;
            if a == b {
                return Err(MeshError::InconsistentOrientation { face: f });
            }
        }
    }

    if dim >= 2 {
        let mut fans = Vec::with_capacity(complex.strata[dim - 2].len());
        for h in 0..complex.strata[dim - 2].len() {
            fans.push(complex.build_fan(h)?);
        }
        complex.fans = fans;
    }
    Ok(complex)
}

fn check_jacobian(c: usize, cell: &Cell, dim: usize, ambient_dim: usize) -> Result<(), MeshError> {
    let qdeg = cell.map.degree().map_or(8, |d| (2 * d).max(2));
    let rule = QuadratureRule::new(cell.shape, dim, qdeg)?;
    let mut points = rule.points;
    points.extend((0..cell.shape.vertex_count(dim)).map(|l| {
        let v = cell.shape.ref_vertex(dim, l);
        let ctr = centroid(cell.shape, dim, &(0..cell.shape.vertex_count(dim)).collect::<Vec<_>>());
        // slightly inside each corner
        v.iter().zip(&ctr).map(|(a, b)| a + 1e-3 * (b - a)).collect()
    }));
    for p in &points {
        let jac = cell.map.jacobian(p)?;
        let value = if ambient_dim == dim {
            det(&jac)
        } else {
            let gram: Vec<Vec<f64>> = (0..dim)
                .map(|i| {
                    (0..dim)
                        .map(|j| (0..ambient_dim).map(|a| jac[a][i] * jac[a][j]).sum())
                        .collect()
                })
                .collect();
            det(&gram).max(0.0).sqrt()
        };
        if !(value > 1e-12) {
            return Err(MeshError::InvertedCell {
                cell: c,
                jacobian: value,
            });
        }
    }
    Ok(())
}

fn enumerate_stratum(
    cells: &[Cell],
    dim: usize,
    k: usize,
    vertex_class: &[usize],
    identify: &[(usize, usize)],
) -> Result<Vec<Polytope>, MeshError> {
    let direct: HashSet<(usize, usize)> = identify.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    struct Instance {
        cell: usize,
        local: Vec<usize>,
        orig: BTreeMap<usize, usize>,
    }
    let mut groups: BTreeMap<Vec<usize>, Vec<Instance>> = BTreeMap::new();
    for (c, cell) in cells.iter().enumerate() {
        for local in sub_polytopes(cell.shape, dim, k) {
            let orig: BTreeMap<usize, usize> = local
                .iter()
                .map(|&l| (vertex_class[cell.verts[l]], cell.verts[l]))
                .collect();
            let key: Vec<usize> = orig.keys().copied().collect();
            groups.entry(key).or_default().push(Instance { cell: c, local, orig });
        }
    }

    let mut out = Vec::new();
    for (key, inst) in groups {
        // Instances are the same polytope if their original vertices agree
        // everywhere, or every pair is listed as an identification.
        let m = inst.len();
        let mut parent: Vec<usize> = (0..m).collect();
        for a in 0..m {
            for b in a + 1..m {
                let pairs = key.iter().map(|v| (inst[a].orig[v], inst[b].orig[v]));
                let same = pairs.clone().all(|(x, y)| x == y);
                let glued = pairs.clone().all(|(x, y)| direct.contains(&(x.min(y), x.max(y))));
                if k == 0 || same || glued {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..m {
            let r = find(&mut parent, i);
            members.entry(r).or_default().push(i);
        }
        for (_, idx) in members {
            let shape = cells[inst[idx[0]].cell].shape;
            let incidences = idx
                .iter()
                .map(|&i| {
                    let it = &inst[i];
                    parametrise(shape, dim, it.cell, &it.local, |l| {
                        vertex_class[cells[it.cell].verts[l]]
                    })
                })
                .collect();
            out.push(Polytope {
                dim: k,
                shape,
                verts: key.clone(),
                incidences,
                boundary: false,
            });
        }
    }
    if k > 0
        && out
            .iter()
            .any(|p| p.incidences.iter().any(|i| cells[i.cell].shape != p.shape))
    {
        return Err(MeshError::UnsupportedCellType("mixed simplex/box faces".into()));
    }
    Ok(out)
}

fn parametrise(shape: Shape, dim: usize, cell: usize, local: &[usize], class: impl Fn(usize) -> usize) -> Incidence {
    let mut by_class: Vec<usize> = local.to_vec();
    by_class.sort_by_key(|&l| class(l));
    let (anchor, dirs): (usize, Vec<usize>) = match shape {
        Shape::Simplex => (by_class[0], by_class[1..].to_vec()),
        Shape::Box => {
            let anchor = by_class[0];
            let dirs = by_class
                .iter()
                .copied()
                .filter(|&l| (l ^ anchor).count_ones() == 1)
                .collect();
            (anchor, dirs)
        }
    };
    let origin = shape.ref_vertex(dim, anchor);
    let axes = dirs
        .iter()
        .map(|&l| {
            shape
                .ref_vertex(dim, l)
                .iter()
                .zip(&origin)
                .map(|(a, b)| a - b)
                .collect()
        })
        .collect();
    let mut sorted = local.to_vec();
    sorted.sort_unstable();
    Incidence {
        cell,
        local: sorted,
        origin,
        axes,
    }
}

impl MeshComplex {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Vertex class of every input vertex after identification.
    pub fn vertex_class(&self) -> &[usize] {
        &self.vertex_class
    }

    /// Vertex identification pairs as given on input.
    pub fn identifications(&self) -> &[(usize, usize)] {
        &self.identify
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> &Cell {
        &self.cells[c]
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Polytopes of dimension `k < dim`.
    pub fn polytopes(&self, k: usize) -> &[Polytope] {
        &self.strata[k]
    }

    pub fn faces(&self) -> &[Polytope] {
        &self.strata[self.dim - 1]
    }

    /// Codimension-2 polytopes; empty in dimension 1.
    pub fn hinges(&self) -> &[Polytope] {
        if self.dim >= 2 {
            &self.strata[self.dim - 2]
        } else {
            &[]
        }
    }

    pub fn cell_faces(&self, c: usize) -> &[usize] {
        &self.cell_faces[c]
    }

    pub fn count(&self, k: usize) -> usize {
        if k == self.dim {
            self.cells.len()
        } else {
            self.strata[k].len()
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..=self.dim)
            .map(|k| {
                if k % 2 == 0 {
                    self.count(k) as i64
                } else {
                    -(self.count(k) as i64)
                }
            })
            .sum()
    }

    pub fn is_closed(&self) -> bool {
        self.faces().iter().all(|f| !f.boundary)
    }

    /// Orientation of face `face` induced from `cell`, relative to the face's
    /// canonical parametrisation: positive iff (outward, face axes) is a
    /// positive basis of the cell's reference coordinates.
    pub fn induced_orientation(&self, face: usize, cell: usize) -> Result<Orientation, MeshError> {
        let f = &self.faces()[face];
        let inc = f
            .incidence(cell)
            .ok_or(MeshError::NotIncident { polytope: face, cell })?;
        let shape = self.cells[cell].shape;
        let all: Vec<usize> = (0..shape.vertex_count(self.dim)).collect();
        let cc = centroid(shape, self.dim, &all);
        let fc = inc.ref_centroid(shape, self.dim);
        let mut cols = vec![fc.iter().zip(&cc).map(|(a, b)| a - b).collect::<Vec<f64>>()];
        cols.extend(inc.axes.iter().cloned());
        let rows: Vec<Vec<f64>> = (0..self.dim).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        Ok(if det(&rows) > 0.0 {
            Orientation::Positive
        } else {
            Orientation::Negative
        })
    }

    pub fn hinge_fan(&self, hinge: usize) -> Result<&HingeFan, MeshError> {
        self.fans.get(hinge).ok_or(MeshError::NonManifoldHinge { hinge })
    }

    pub fn hinge_fans(&self) -> &[HingeFan] {
        &self.fans
    }

    /// The two faces of `cell` containing hinge `hinge`, ordered so that the
    /// turn from the first to the second is positive in the cell.
    pub fn hinge_faces_in_cell(&self, hinge: usize, cell: usize) -> Result<(usize, usize), MeshError> {
        let h = &self.hinges()[hinge];
        let inc = h
            .incidence(cell)
            .ok_or(MeshError::NotIncident { polytope: hinge, cell })?;
        let shape = self.cells[cell].shape;
        let faces: Vec<usize> = self.cell_faces[cell]
            .iter()
            .copied()
            .filter(|&f| {
                self.faces()[f]
                    .incidence(cell)
                    .is_some_and(|fi| inc.local.iter().all(|l| fi.local.contains(l)))
            })
            .collect();
        if faces.len() != 2 {
            return Err(MeshError::NonManifoldHinge { hinge });
        }
        let hc = inc.ref_centroid(shape, self.dim);
        let dir = |f: usize| -> Vec<f64> {
            let fc = self.faces()[f].incidence(cell).unwrap().ref_centroid(shape, self.dim);
            fc.iter().zip(&hc).map(|(a, b)| a - b).collect()
        };
        let mut cols = inc.axes.clone();
        cols.push(dir(faces[0]));
        cols.push(dir(faces[1]));
        let rows: Vec<Vec<f64>> = (0..self.dim).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        Ok(if det(&rows) > 0.0 {
            (faces[0], faces[1])
        } else {
            (faces[1], faces[0])
        })
    }

    fn build_fan(&self, hinge: usize) -> Result<HingeFan, MeshError> {
        let h = &self.hinges()[hinge];
        let mut entries = Vec::with_capacity(h.incidences.len());
        for inc in &h.incidences {
            let (enter, leave) = self.hinge_faces_in_cell(hinge, inc.cell)?;
            entries.push(FanEntry {
                cell: inc.cell,
                enter,
                leave,
            });
        }
        let mut by_enter: HashMap<usize, usize> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            if by_enter.insert(e.enter, i).is_some() {
                return Err(MeshError::NonManifoldHinge { hinge });
            }
        }
        let faces = self.faces();
        let boundary_start = entries.iter().position(|e| faces[e.enter].boundary);
        let start = match boundary_start {
            Some(i) => i,
            None => (0..entries.len())
                .min_by_key(|&i| (entries[i].cell, entries[i].enter))
                .ok_or(MeshError::NonManifoldHinge { hinge })?,
        };
        let mut order = vec![start];
        let mut cur = start;
        let closed;
        loop {
            let leave = entries[cur].leave;
            if faces[leave].boundary {
                closed = false;
                break;
            }
            match by_enter.get(&leave) {
                Some(&next) if next == start => {
                    closed = true;
                    break;
                }
                Some(&next) if !order.contains(&next) => {
                    order.push(next);
                    cur = next;
                }
                _ => return Err(MeshError::NonManifoldHinge { hinge }),
            }
        }
        if order.len() != entries.len() || closed == h.boundary {
            return Err(MeshError::NonManifoldHinge { hinge });
        }
        Ok(HingeFan {
            hinge,
            entries: order.into_iter().map(|i| entries[i]).collect(),
            closed,
        })
    }

    /// Physical point of polytope `p` (dimension `k`) at parameter `eta`,
    /// evaluated through the map of its first incident cell.
    pub fn polytope_point(&self, k: usize, p: usize, eta: &[f64]) -> Result<Vec<f64>, MeshError> {
        let inc = &self.strata[k][p].incidences[0];
        self.cells[inc.cell].map.point(&inc.to_cell(eta))
    }

    /// Mesh size: largest distance between vertices of a cell.
    pub fn mesh_size(&self) -> f64 {
        self.cells
            .iter()
            .flat_map(|c| {
                let v = &c.verts;
                (0..v.len()).flat_map(move |i| (i + 1..v.len()).map(move |j| (v[i], v[j])))
            })
            .map(|(a, b)| {
                self.vertices[a]
                    .iter()
                    .zip(&self.vertices[b])
                    .map(|(x, y)| (x - y).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simplex(verts: &[usize]) -> CellSpec {
        CellSpec {
            shape: Shape::Simplex,
            verts: verts.to_vec(),
            map: None,
        }
    }

    fn square_pair() -> MeshComplex {
        build_complex(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
            vec![simplex(&[0, 1, 2]), simplex(&[0, 2, 3])],
            &[],
        )
        .unwrap()
    }

    #[test]
    fn two_triangles() {
        let m = square_pair();
        let interior = m.faces().iter().filter(|f| !f.boundary).count();
        assert_eq!(interior, 1);
        assert_eq!(m.faces().len() - interior, 4);
        assert_eq!(m.hinges().len(), 4);
        assert_eq!(m.euler_characteristic(), 1);
    }

    #[test]
    fn opposite_inductions() {
        let m = square_pair();
        let f = m.faces().iter().position(|f| !f.boundary).unwrap();
        let a = m.induced_orientation(f, 0).unwrap();
        let b = m.induced_orientation(f, 1).unwrap();
        assert_ne!(a, b);
        assert!(matches!(
            m.induced_orientation(0, 7),
            Err(MeshError::NotIncident { .. })
        ));
    }

    #[test]
    fn boundary_edge_counterclockwise() {
        let m = build_complex(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![simplex(&[0, 1, 2])],
            &[],
        )
        .unwrap();
        // Edge {0,1} is parametrised from vertex 0 to 1, which is the
        // counterclockwise direction for this triangle.
        let f = m.faces().iter().position(|f| f.verts == vec![0, 1]).unwrap();
        assert_eq!(m.induced_orientation(f, 0).unwrap(), Orientation::Positive);
        let f = m.faces().iter().position(|f| f.verts == vec![0, 2]).unwrap();
        assert_eq!(m.induced_orientation(f, 0).unwrap(), Orientation::Negative);
    }

    #[test]
    fn hexagon_fan() {
        let mut verts = vec![vec![0.0, 0.0]];
        for k in 0..6 {
            let t = std::f64::consts::PI / 3.0 * k as f64;
            verts.push(vec![t.cos(), t.sin()]);
        }
        let cells = (0..6).map(|k| simplex(&[0, 1 + k, 1 + (k + 1) % 6])).collect();
        let m = build_complex(2, verts, cells, &[]).unwrap();
        let fan = m.hinge_fan(0).unwrap();
        assert!(fan.closed);
        assert_eq!(fan.entries.len(), 6);
        assert_eq!(fan.entries[0].cell, 0);
        for w in fan.entries.windows(2) {
            assert_eq!(w[0].leave, w[1].enter);
        }
        assert_eq!(fan.entries[5].leave, fan.entries[0].enter);
        // counterclockwise: cell k is followed by cell k+1
        let cells: Vec<usize> = fan.entries.iter().map(|e| e.cell).collect();
        assert_eq!(cells, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn square_corner_fan() {
        let m = build_complex(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
            vec![CellSpec {
                shape: Shape::Box,
                verts: vec![0, 1, 2, 3],
                map: None,
            }],
            &[],
        )
        .unwrap();
        assert_eq!(m.euler_characteristic(), 1);
        for h in 0..4 {
            let fan = m.hinge_fan(h).unwrap();
            assert!(!fan.closed);
            assert_eq!(fan.entries.len(), 1);
        }
    }

    #[test]
    fn torus_identification() {
        let mut verts = Vec::new();
        for j in 0..3 {
            for i in 0..3 {
                verts.push(vec![i as f64, j as f64]);
            }
        }
        let id = |i: usize, j: usize| j * 3 + i;
        let mut cells = Vec::new();
        for j in 0..2 {
            for i in 0..2 {
                cells.push(CellSpec {
                    shape: Shape::Box,
                    verts: vec![id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1)],
                    map: None,
                });
            }
        }
        let mut ident = Vec::new();
        for k in 0..3 {
            ident.push((id(0, k), id(2, k)));
            ident.push((id(k, 0), id(k, 2)));
        }
        let m = build_complex(2, verts, cells, &ident).unwrap();
        assert_eq!((m.count(0), m.count(1), m.count(2)), (4, 8, 4));
        assert_eq!(m.euler_characteristic(), 0);
        assert!(m.is_closed());
        for fan in m.hinge_fans() {
            assert!(fan.closed);
            assert_eq!(fan.entries.len(), 4);
        }
    }

    #[test]
    fn errors() {
        let v = [
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![-1.0, -1.0],
            vec![5.0, 5.0],
        ];
        let r = build_complex(2, v[..3].to_vec(), vec![simplex(&[0, 2, 1])], &[]);
        assert!(matches!(r, Err(MeshError::InvertedCell { .. })));
        let r = build_complex(2, v[..4].to_vec(), vec![simplex(&[0, 1, 2])], &[]);
        assert!(matches!(r, Err(MeshError::DanglingFace { vertex: 3 })));
        let r = build_complex(
            2,
            v[..5].to_vec(),
            vec![simplex(&[0, 1, 2]), simplex(&[1, 0, 4]), simplex(&[0, 1, 3])],
            &[],
        );
        assert!(matches!(r, Err(MeshError::NonManifold { count: 3, .. })));
    }

    #[test]
    fn tetrahedra_share_triangle() {
        let m = build_complex(
            3,
            vec![
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
                vec![0.0, 0.0, -1.0],
            ],
            vec![simplex(&[0, 1, 2, 3]), simplex(&[0, 2, 1, 4])],
            &[],
        )
        .unwrap();
        let f = m.faces().iter().position(|f| f.verts == vec![0, 1, 2]).unwrap();
        assert_eq!(m.faces()[f].cells(), vec![0, 1]);
        assert_ne!(
            m.induced_orientation(f, 0).unwrap(),
            m.induced_orientation(f, 1).unwrap()
        );
        assert_eq!(m.euler_characteristic(), 1);
        let edge = m.hinges().iter().position(|h| h.verts == vec![0, 1]).unwrap();
        let fan = m.hinge_fan(edge).unwrap();
        assert!(!fan.closed && fan.entries.len() == 2);
    }
}
