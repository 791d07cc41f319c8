//! Finite simplicial complexes with exact rational realizations, subcomplexes,
//! stars and links, skeleta, and staircase triangulations of `K x I`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{affinely_independent, barycentric};
use crate::lp::{LinearProgram, LpOutcome};
use crate::rational::{centroid, format_rational, parse_rational, Point, Rational};

/// A simplex as a sorted set of vertex indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Simplex(Vec<usize>);

impl Simplex {
    pub fn new(mut vertices: Vec<usize>) -> Simplex {
        vertices.sort_unstable();
        vertices.dedup();
        Simplex(vertices)
    }

    pub fn vertex(v: usize) -> Simplex {
        Simplex(vec![v])
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> isize {
        self.0.len() as isize - 1
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// `self` is a (not necessarily proper) face of `other`.
    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.0.iter().all(|v| other.contains_vertex(*v))
    }

    pub fn meets(&self, other: &Simplex) -> bool {
        self.0.iter().any(|v| other.contains_vertex(*v))
    }

    pub fn intersection(&self, other: &Simplex) -> Simplex {
        Simplex(
            self.0
                .iter()
                .copied()
                .filter(|v| other.contains_vertex(*v))
                .collect(),
        )
    }

    pub fn union(&self, other: &Simplex) -> Simplex {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Simplex::new(v)
    }

    pub fn with_vertex(&self, v: usize) -> Simplex {
        let mut vs = self.0.clone();
        vs.push(v);
        Simplex::new(vs)
    }

    pub fn without_vertex(&self, v: usize) -> Simplex {
        Simplex(self.0.iter().copied().filter(|&w| w != v).collect())
    }

    /// All nonempty faces including `self`.
    pub fn faces(&self) -> Vec<Simplex> {
        let n = self.0.len();
        let mut out = Vec::with_capacity((1usize << n) - 1);
        for mask in 1u64..(1u64 << n) {
            out.push(Simplex(
                (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| self.0[i])
                    .collect(),
            ));
        }
        out
    }

    /// Codimension-one faces.
    pub fn facets(&self) -> Vec<Simplex> {
        if self.0.len() <= 1 {
            return Vec::new();
        }
        (0..self.0.len())
            .map(|i| {
                let mut v = self.0.clone();
                v.remove(i);
                Simplex(v)
            })
            .collect()
    }

    /// Nonempty proper faces.
    pub fn boundary_faces(&self) -> Vec<Simplex> {
        self.faces()
            .into_iter()
            .filter(|f| f.len() < self.len())
            .collect()
    }
}

impl From<Vec<usize>> for Simplex {
    fn from(v: Vec<usize>) -> Self {
        Simplex::new(v)
    }
}

/// A set of simplexes closed under faces.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Subcomplex {
    pub simplexes: BTreeSet<Simplex>,
}

impl Subcomplex {
    pub fn empty() -> Subcomplex {
        Subcomplex::default()
    }

    /// Closure of `generators` under faces.
    pub fn closure<'a, I: IntoIterator<Item = &'a Simplex>>(generators: I) -> Subcomplex {
        let mut simplexes = BTreeSet::new();
        for s in generators {
            if simplexes.contains(s) {
                continue;
            }
            for f in s.faces() {
                simplexes.insert(f);
            }
        }
        Subcomplex { simplexes }
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.simplexes.contains(s)
    }

    pub fn len(&self) -> usize {
        self.simplexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplexes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Simplex> {
        self.simplexes.iter()
    }

    pub fn is_closed(&self) -> bool {
        self.simplexes
            .iter()
            .all(|s| s.facets().iter().all(|f| self.simplexes.contains(f)))
    }

    pub fn is_subset_of(&self, other: &Subcomplex) -> bool {
        self.simplexes.is_subset(&other.simplexes)
    }

    pub fn union(&self, other: &Subcomplex) -> Subcomplex {
        Subcomplex {
            simplexes: self.simplexes.union(&other.simplexes).cloned().collect(),
        }
    }

    pub fn intersection(&self, other: &Subcomplex) -> Subcomplex {
        Subcomplex {
            simplexes: self
                .simplexes
                .intersection(&other.simplexes)
                .cloned()
                .collect(),
        }
    }

    /// Maximal simplexes (those that are a face of no other member).
    pub fn facets(&self) -> Vec<Simplex> {
        maximal_simplexes(&self.simplexes)
    }

    pub fn dim(&self) -> isize {
        self.simplexes.iter().map(Simplex::dim).max().unwrap_or(-1)
    }

    pub fn vertex_set(&self) -> BTreeSet<usize> {
        self.simplexes
            .iter()
            .filter(|s| s.len() == 1)
            .map(|s| s.0[0])
            .collect()
    }

    pub fn count_dim(&self, d: isize) -> usize {
        self.simplexes.iter().filter(|s| s.dim() == d).count()
    }
}

pub fn maximal_simplexes(set: &BTreeSet<Simplex>) -> Vec<Simplex> {
    // A simplex is maximal iff none of its one-vertex extensions is present.
    let mut by_vertex: HashMap<usize, Vec<&Simplex>> = HashMap::new();
    for s in set {
        for &v in s.vertices() {
            by_vertex.entry(v).or_default().push(s);
        }
    }
    set.iter()
        .filter(|s| {
            let Some(&v0) = s.vertices().first() else {
                return false;
            };
            !by_vertex[&v0]
                .iter()
                .any(|t| t.len() > s.len() && s.is_face_of(t))
        })
        .cloned()
        .collect()
}

/// A finite simplicial complex with exact vertex coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Complex {
    ambient_dim: usize,
    vertices: Vec<Point>,
    simplexes: BTreeSet<Simplex>,
}

impl Complex {
    pub fn empty(ambient_dim: usize) -> Complex {
        Complex {
            ambient_dim,
            vertices: Vec::new(),
            simplexes: BTreeSet::new(),
        }
    }

    /// Builds the closure of `facets`; rejects degenerate simplexes.
    pub fn build(vertex_coords: Vec<Point>, facets: &[Vec<usize>]) -> Result<Complex> {
        Self::build_checked(vertex_coords, facets, false)
    }

    /// As [`Complex::build`], optionally also verifying that distinct simplexes
    /// have disjoint relative interiors.
    pub fn build_checked(
        vertex_coords: Vec<Point>,
        facets: &[Vec<usize>],
        check_overlaps: bool,
    ) -> Result<Complex> {
        let ambient_dim = vertex_coords.first().map_or(0, |p| p.len());
        if vertex_coords.iter().any(|p| p.len() != ambient_dim) {
            return Err(Error::InvalidInput(
                "vertex coordinates of mixed dimension".into(),
            ));
        }
        let mut gens = Vec::with_capacity(facets.len());
        for f in facets {
            for &i in f {
                if i >= vertex_coords.len() {
                    return Err(Error::VertexOutOfRange {
                        index: i,
                        count: vertex_coords.len(),
                    });
                }
            }
            let s = Simplex::new(f.clone());
            if s.len() != f.len() || s.is_empty() {
                return Err(Error::DegenerateSimplex(f.clone()));
            }
            let pts: Vec<&Point> = s.vertices().iter().map(|&v| &vertex_coords[v]).collect();
            if !affinely_independent(&pts) {
                return Err(Error::DegenerateSimplex(f.clone()));
            }
            gens.push(s);
        }
        let simplexes = Subcomplex::closure(gens.iter()).simplexes;
        let c = Complex {
            ambient_dim,
            vertices: vertex_coords,
            simplexes,
        };
        if check_overlaps {
            c.check_disjoint_interiors()?;
        }
        Ok(c)
    }

    /// Trusted constructor for internally generated complexes; `simplexes` must
    /// already be face-closed and nondegenerate.
    pub(crate) fn from_parts(
        ambient_dim: usize,
        vertices: Vec<Point>,
        simplexes: BTreeSet<Simplex>,
    ) -> Complex {
        debug_assert!(Subcomplex {
            simplexes: simplexes.clone()
        }
        .is_closed());
        Complex {
            ambient_dim,
            vertices,
            simplexes,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn coords(&self, v: usize) -> &Point {
        &self.vertices[v]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn simplexes(&self) -> &BTreeSet<Simplex> {
        &self.simplexes
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.simplexes.contains(s)
    }

    pub fn len(&self) -> usize {
        self.simplexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplexes.is_empty()
    }

    pub fn dim(&self) -> isize {
        self.simplexes.iter().map(Simplex::dim).max().unwrap_or(-1)
    }

    pub fn count_dim(&self, d: isize) -> usize {
        self.simplexes.iter().filter(|s| s.dim() == d).count()
    }

    pub fn facets(&self) -> Vec<Simplex> {
        maximal_simplexes(&self.simplexes)
    }

    pub fn as_subcomplex(&self) -> Subcomplex {
        Subcomplex {
            simplexes: self.simplexes.clone(),
        }
    }

    pub fn simplex_points(&self, s: &Simplex) -> Vec<&Point> {
        s.vertices().iter().map(|&v| &self.vertices[v]).collect()
    }

    pub fn barycenter(&self, s: &Simplex) -> Point {
        centroid(&self.simplex_points(s))
    }

    /// Point with barycentric `weights` (aligned with `s.vertices()`).
    pub fn point_in(&self, s: &Simplex, weights: &[Rational]) -> Point {
        crate::rational::combine(
            weights
                .iter()
                .zip(s.vertices().iter().map(|&v| &self.vertices[v])),
            self.ambient_dim,
        )
    }

    /// The smallest simplex containing `x`, with barycentric coordinates on it.
    pub fn locate(&self, x: &[Rational]) -> Option<(Simplex, Vec<Rational>)> {
        if x.len() != self.ambient_dim {
            return None;
        }
        for f in self.facets() {
            let pts = self.simplex_points(&f);
            let Some(l) = barycentric(&pts, x) else {
                continue;
            };
            if l.iter().any(|c| c.is_negative()) {
                continue;
            }
            let (vs, ws): (Vec<usize>, Vec<Rational>) = f
                .vertices()
                .iter()
                .zip(l)
                .filter(|(_, w)| !w.is_zero())
                .map(|(v, w)| (*v, w))
                .unzip();
            return Some((Simplex(vs), ws));
        }
        None
    }

    /// Codimension-one cofaces of each simplex.
    pub fn coface_index(&self) -> HashMap<Simplex, Vec<Simplex>> {
        let mut idx: HashMap<Simplex, Vec<Simplex>> = HashMap::new();
        for s in &self.simplexes {
            for f in s.facets() {
                idx.entry(f).or_default().push(s.clone());
            }
        }
        idx
    }

    /// All simplexes having `s` as a face (including `s`).
    pub fn cofaces_of(&self, s: &Simplex) -> Vec<Simplex> {
        self.simplexes
            .iter()
            .filter(|t| s.is_face_of(t))
            .cloned()
            .collect()
    }

    /// Checks pairwise disjointness of relative interiors by exact LP.
    pub fn check_disjoint_interiors(&self) -> Result<()> {
        let all: Vec<&Simplex> = self.simplexes.iter().collect();
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                if relative_interiors_meet(self, a, b) {
                    return Err(Error::OverlappingInteriors((*a).clone(), (*b).clone()));
                }
            }
        }
        Ok(())
    }

    /// A complex with the same coordinates and a different simplex set.
    pub fn with_simplexes(&self, simplexes: BTreeSet<Simplex>) -> Complex {
        Complex::from_parts(self.ambient_dim, self.vertices.clone(), simplexes)
    }

    /// Euclidean-free exact volume of a top-dimensional simplex scaled by d!,
    /// computed in the coordinate subspace `coords` (must have size = dim).
    pub fn scaled_volume(&self, s: &Simplex, coords: &[usize]) -> Rational {
        let pts = self.simplex_points(s);
        let base = pts[0];
        let m: Vec<Vec<Rational>> = pts[1..]
            .iter()
            .map(|p| coords.iter().map(|&c| &p[c] - &base[c]).collect())
            .collect();
        determinant(m).abs()
    }
}

pub fn determinant(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= &m[c][c];
        for r in c + 1..n {
            if m[r][c].is_zero() {
                continue;
            }
            let f = &m[r][c] / &m[c][c];
            for k in c..n {
                let t = &f * &m[c][k];
                m[r][k] -= t;
            }
        }
    }
    det
}

fn relative_interiors_meet(k: &Complex, a: &Simplex, b: &Simplex) -> bool {
    // maximize s subject to alpha_i >= s, beta_j >= s, sum alpha a_i = sum beta b_j
    let na = a.len();
    let nb = b.len();
    let n = na + nb + 1;
    let s_idx = na + nb;
    let mut lp = LinearProgram::new(n);
    let mut obj = vec![Rational::zero(); n];
    obj[s_idx] = Rational::one();
    lp.set_objective(obj);
    let mut row = vec![Rational::zero(); n];
    row[..na].fill(Rational::one());
    lp.add_eq(row, Rational::one());
    let mut row = vec![Rational::zero(); n];
    row[na..na + nb].fill(Rational::one());
    lp.add_eq(row, Rational::one());
    for c in 0..k.ambient_dim {
        let mut row = vec![Rational::zero(); n];
        for (i, &v) in a.vertices().iter().enumerate() {
            row[i] = k.vertices[v][c].clone();
        }
        for (j, &v) in b.vertices().iter().enumerate() {
            row[na + j] = -k.vertices[v][c].clone();
        }
        lp.add_eq(row, Rational::zero());
    }
    for i in 0..na + nb {
        let mut row = vec![Rational::zero(); n];
        row[i] = Rational::one();
        row[s_idx] = -Rational::one();
        lp.add_ge(row, Rational::zero());
    }
    matches!(lp.maximize(), LpOutcome::Optimal { value, .. } if value.is_positive())
}

/// Closed star and link of `s` in `k`.
pub fn star_link(k: &Complex, s: &Simplex) -> Result<(Subcomplex, Subcomplex)> {
    if !k.contains(s) {
        return Err(Error::SimplexNotFound(s.clone()));
    }
    let cofaces = k.cofaces_of(s);
    let star = Subcomplex::closure(cofaces.iter());
    let link = Subcomplex {
        simplexes: star
            .simplexes
            .iter()
            .filter(|t| !t.meets(s))
            .cloned()
            .collect(),
    };
    Ok((star, link))
}

/// All simplexes of dimension at most `d`.
pub fn skeleton(k: &Complex, d: isize) -> Subcomplex {
    Subcomplex {
        simplexes: k
            .simplexes
            .iter()
            .filter(|s| s.dim() <= d)
            .cloned()
            .collect(),
    }
}

/// Component labels on the vertices of a base complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
}

impl Partition {
    pub fn new(k: &Complex, labels: Vec<usize>) -> Result<Partition> {
        if labels.len() != k.num_vertices() {
            return Err(Error::InvalidInput(format!(
                "partition has {} labels for {} vertices",
                labels.len(),
                k.num_vertices()
            )));
        }
        for s in k.simplexes() {
            let l0 = labels[s.vertices()[0]];
            if s.vertices().iter().any(|&v| labels[v] != l0) {
                return Err(Error::PartitionMixesComponents(s.clone()));
            }
        }
        Ok(Partition { labels })
    }

    /// Labels each connected component of `k` separately.
    pub fn connected_components(k: &Complex) -> Partition {
        let n = k.num_vertices();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for s in k.simplexes().iter().filter(|s| s.len() == 2) {
            let a = find(&mut parent, s.vertices()[0]);
            let b = find(&mut parent, s.vertices()[1]);
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
        let labels = (0..n)
            .map(|v| {
                let r = find(&mut parent, v);
                let next = ids.len();
                *ids.entry(r).or_insert(next)
            })
            .collect();
        Partition { labels }
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn components(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.labels.iter().copied().collect();
        set.into_iter().collect()
    }

    pub fn count(&self) -> usize {
        self.components().len()
    }

    /// Label of a simplex (all its vertices share it).
    pub fn of_simplex(&self, s: &Simplex) -> usize {
        self.labels[s.vertices()[0]]
    }
}

/// A triangulation of `base x I` by stacked staircase prisms.
///
/// Vertex `(v, l)` of the total complex has index `l * base.num_vertices() + v`
/// and coordinates `base.coords(v) ++ [levels[l]]`.
#[derive(Clone, Debug)]
pub struct ProductComplex {
    pub base: Complex,
    pub total: Complex,
    pub levels: Vec<Rational>,
    /// Level value of each total vertex.
    pub level: Vec<Rational>,
    /// The vertical projection on vertices: total vertex -> base vertex.
    pub proj: Vec<usize>,
    pub bottom: Subcomplex,
    pub top: Subcomplex,
}

/// `K x I` with the staircase triangulation and levels {0, 1}.
pub fn staircase_product(k: &Complex) -> Result<ProductComplex> {
    layered_product(k, &[Rational::zero(), Rational::one()])
}

/// `K x I` with a staircase prism layer between consecutive `levels`.
pub fn layered_product(k: &Complex, levels: &[Rational]) -> Result<ProductComplex> {
    if k.is_empty() {
        return Err(Error::InvalidInput("product of an empty complex".into()));
    }
    if levels.len() < 2
        || !levels[0].is_zero()
        || !levels[levels.len() - 1].is_one()
        || levels.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::InvalidInput(
            "levels must increase from 0 to 1".into(),
        ));
    }
    let nb = k.num_vertices();
    let nl = levels.len();
    let mut coords = Vec::with_capacity(nb * nl);
    let mut level = Vec::with_capacity(nb * nl);
    let mut proj = Vec::with_capacity(nb * nl);
    for t in levels {
        for v in 0..nb {
            let mut p = k.coords(v).clone();
            p.push(t.clone());
            coords.push(p);
            level.push(t.clone());
            proj.push(v);
        }
    }
    let idx = |v: usize, l: usize| l * nb + v;
    let mut gens = Vec::new();
    for f in k.facets() {
        let vs = f.vertices();
        for l in 0..nl - 1 {
            for j in 0..vs.len() {
                let mut chain: Vec<usize> = vs[..=j].iter().map(|&v| idx(v, l)).collect();
                chain.extend(vs[j..].iter().map(|&v| idx(v, l + 1)));
                gens.push(Simplex::new(chain));
            }
        }
    }
    let simplexes = Subcomplex::closure(gens.iter()).simplexes;
    let total = Complex::from_parts(k.ambient_dim() + 1, coords, simplexes);
    let lift = |l: usize| Subcomplex {
        simplexes: k
            .simplexes()
            .iter()
            .map(|s| Simplex::new(s.vertices().iter().map(|&v| idx(v, l)).collect()))
            .collect(),
    };
    Ok(ProductComplex {
        base: k.clone(),
        bottom: lift(0),
        top: lift(nl - 1),
        total,
        levels: levels.to_vec(),
        level,
        proj,
    })
}

impl ProductComplex {
    pub fn base_dim(&self) -> isize {
        self.base.dim()
    }

    /// Image of a total simplex under the vertical projection.
    pub fn project(&self, s: &Simplex) -> Simplex {
        Simplex::new(s.vertices().iter().map(|&v| self.proj[v]).collect())
    }

    pub fn lift(&self, v: usize, layer: usize) -> usize {
        layer * self.base.num_vertices() + v
    }

    pub fn is_level_zero(&self, s: &Simplex) -> bool {
        s.vertices().iter().all(|&v| self.level[v].is_zero())
    }

    /// `Y x I` for a base subcomplex `Y`.
    pub fn cylinder_over(&self, y: &Subcomplex) -> Subcomplex {
        Subcomplex {
            simplexes: self
                .total
                .simplexes()
                .iter()
                .filter(|s| y.contains(&self.project(s)))
                .cloned()
                .collect(),
        }
    }

    /// `proj` and `level` are simplicial vertex maps.
    pub fn check_projections(&self) -> bool {
        self.total.simplexes().iter().all(|s| {
            let img = self.project(s);
            let lv: BTreeSet<&Rational> = s.vertices().iter().map(|&v| &self.level[v]).collect();
            let consecutive = lv.len() <= 1
                || (lv.len() == 2 && {
                    let v: Vec<&&Rational> = lv.iter().collect();
                    self.levels
                        .windows(2)
                        .any(|w| &w[0] == *v[0] && &w[1] == *v[1])
                });
            self.base.contains(&img) && consecutive
        })
    }
}

/// Checks that every vertex link is a combinatorial sphere or ball, for
/// complexes of dimension at most 3. Higher dimensions are trusted.
pub fn check_manifold(k: &Complex) -> bool {
    let d = k.dim();
    if d > 3 {
        return true;
    }
    (0..k.num_vertices())
        .filter(|&v| k.contains(&Simplex::vertex(v)))
        .all(|v| {
            let (_, link) = star_link(k, &Simplex::vertex(v)).expect("vertex present");
            link_is_sphere_or_ball(&link, d - 1)
        })
}

fn link_is_sphere_or_ball(link: &Subcomplex, d: isize) -> bool {
    let facets = link.facets();
    if facets.iter().any(|f| f.dim() != d) {
        return false;
    }
    match d {
        -1 => link.is_empty(),
        0 => (1..=2).contains(&link.len()),
        1 | 2 => {
            // Pseudo-manifold with boundary, connected, Euler characteristic 1 or 2
            // (d = 1: path or cycle; d = 2: disk or sphere).
            let mut ridge_count: HashMap<Simplex, usize> = HashMap::new();
            for f in &facets {
                for r in f.facets() {
                    *ridge_count.entry(r).or_default() += 1;
                }
            }
            if ridge_count.values().any(|&c| c > 2) {
                return false;
            }
            let sub = Complex::from_parts(0, Vec::new(), link.simplexes.clone());
            let comps = Partition::connected_components_of(&sub);
            if comps != 1 {
                return false;
            }
            let chi: isize = link
                .simplexes
                .iter()
                .map(|s| if s.dim() % 2 == 0 { 1 } else { -1 })
                .sum();
            let closed = ridge_count.values().all(|&c| c == 2);
            if d == 1 {
                (closed && chi == 0) || (!closed && chi == 1)
            } else {
                (closed && chi == 2) || (!closed && chi == 1)
            }
        }
        _ => true,
    }
}

impl Partition {
    fn connected_components_of(k: &Complex) -> usize {
        let verts: BTreeSet<usize> = k
            .simplexes()
            .iter()
            .flat_map(|s| s.vertices().to_vec())
            .collect();
        let mut parent: BTreeMap<usize, usize> = verts.iter().map(|&v| (v, v)).collect();
        fn find(p: &mut BTreeMap<usize, usize>, x: usize) -> usize {
            let mut r = x;
            while p[&r] != r {
                r = p[&r];
            }
            r
        }
        for s in k.simplexes().iter().filter(|s| s.len() == 2) {
            let a = find(&mut parent, s.vertices()[0]);
            let b = find(&mut parent, s.vertices()[1]);
            if a != b {
                parent.insert(a.max(b), a.min(b));
            }
        }
        verts.iter().filter(|&&v| find(&mut parent, v) == v).count()
    }
}

/// On-disk complex description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub ambient_dim: usize,
    pub vertices: Vec<Vec<String>>,
    pub facets: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifold: Option<bool>,
}

impl ComplexFile {
    pub fn from_complex(k: &Complex, labels: Option<&Partition>) -> ComplexFile {
        ComplexFile {
            ambient_dim: k.ambient_dim(),
            vertices: k
                .vertices()
                .iter()
                .map(|p| p.iter().map(format_rational).collect())
                .collect(),
            facets: k
                .facets()
                .into_iter()
                .map(|s| s.vertices().to_vec())
                .collect(),
            labels: labels.map(|p| p.labels().to_vec()),
            manifold: None,
        }
    }

    pub fn to_complex(&self) -> Result<Complex> {
        let coords: Vec<Point> = self
            .vertices
            .iter()
            .map(|p| {
                p.iter()
                    .map(|s| parse_rational(s).map_err(Error::Parse))
                    .collect()
            })
            .collect::<Result<_>>()?;
        if coords.iter().any(|p| p.len() != self.ambient_dim) {
            return Err(Error::Parse(
                "vertex coordinate count differs from ambient_dim".into(),
            ));
        }
        let mut k = Complex::build(coords, &self.facets)?;
        k.ambient_dim = self.ambient_dim;
        Ok(k)
    }

    pub fn partition(&self, k: &Complex) -> Result<Partition> {
        match &self.labels {
            Some(l) => Partition::new(k, l.clone()),
            None => Ok(Partition::connected_components(k)),
        }
    }
}
