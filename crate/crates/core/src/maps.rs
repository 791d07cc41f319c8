//! Simplicial and PL maps, singular sets, link-map and doodle predicates, and
//! general position (check and randomized perturbation).

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{Complex, ComplexFile, Partition, ProductComplex, Simplex, Subcomplex};
use crate::error::{Error, Result};
use crate::fiber::{bbox, boxes_meet, common_image, weighted_point};
use crate::linalg::affinely_independent;
use crate::rational::{rat, Point, Rational};

/// A vertex assignment between complexes, required to carry every source
/// simplex onto (the vertex set of) some target simplex.
#[derive(Clone, Debug)]
pub struct SimplicialMap {
    pub source: Complex,
    pub target: Complex,
    pub vertex_map: Vec<usize>,
}

impl SimplicialMap {
    pub fn new(source: Complex, target: Complex, vertex_map: Vec<usize>) -> Result<SimplicialMap> {
        if vertex_map.len() != source.num_vertices() {
            return Err(Error::InvalidInput(format!(
                "vertex map has {} entries for {} source vertices",
                vertex_map.len(),
                source.num_vertices()
            )));
        }
        for &w in &vertex_map {
            if w >= target.num_vertices() {
                return Err(Error::VertexOutOfRange {
                    index: w,
                    count: target.num_vertices(),
                });
            }
        }
        let m = SimplicialMap {
            source,
            target,
            vertex_map,
        };
        for s in m.source.simplexes() {
            if !m.target.contains(&m.image(s)) {
                return Err(Error::NotSimplicial(s.clone()));
            }
        }
        Ok(m)
    }

    pub fn image(&self, s: &Simplex) -> Simplex {
        Simplex::new(s.vertices().iter().map(|&v| self.vertex_map[v]).collect())
    }

    pub fn to_pl(&self) -> PlMap {
        PlMap {
            images: self
                .vertex_map
                .iter()
                .map(|&w| self.target.coords(w).clone())
                .collect(),
            target_dim: self.target.ambient_dim(),
            source: self.source.clone(),
        }
    }

    pub fn evaluate(&self, x: &[Rational]) -> Result<Point> {
        self.to_pl().evaluate(x)
    }
}

/// A map linear on each simplex of `source`, given by its vertex images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlMap {
    pub source: Complex,
    pub target_dim: usize,
    pub images: Vec<Point>,
}

impl PlMap {
    pub fn new(source: Complex, images: Vec<Point>) -> Result<PlMap> {
        if images.len() != source.num_vertices() {
            return Err(Error::InvalidInput(
                "one image per source vertex required".into(),
            ));
        }
        let target_dim = images.first().map_or(0, |p| p.len());
        if images.iter().any(|p| p.len() != target_dim) {
            return Err(Error::InvalidInput("images of mixed dimension".into()));
        }
        Ok(PlMap {
            source,
            target_dim,
            images,
        })
    }

    pub fn image(&self, v: usize) -> &Point {
        &self.images[v]
    }

    pub fn simplex_images(&self, s: &Simplex) -> Vec<&Point> {
        s.vertices().iter().map(|&v| &self.images[v]).collect()
    }

    /// Image of the point of `s` with barycentric `weights`.
    pub fn at(&self, s: &Simplex, weights: &[Rational]) -> Point {
        weighted_point(weights, &self.simplex_images(s))
    }

    pub fn evaluate(&self, x: &[Rational]) -> Result<Point> {
        let (s, w) = self.source.locate(x).ok_or(Error::PointOutsideComplex)?;
        Ok(self.at(&s, &w))
    }

    /// Keeps the first `k` target coordinates (the projection `P` when the
    /// target is `Q x I` and `k = dim Q`).
    pub fn truncate(&self, k: usize) -> PlMap {
        PlMap {
            source: self.source.clone(),
            target_dim: k,
            images: self.images.iter().map(|p| p[..k].to_vec()).collect(),
        }
    }

    /// `P o F` for a map into `Q x I`.
    pub fn horizontal(&self) -> PlMap {
        self.truncate(self.target_dim - 1)
    }

    /// The height `Pi o F` of a vertex.
    pub fn height(&self, v: usize) -> &Rational {
        &self.images[v][self.target_dim - 1]
    }

    pub fn is_degenerate_on(&self, s: &Simplex) -> bool {
        !affinely_independent(&self.simplex_images(s))
    }

    /// Same map on a complex with the same vertex list and fewer simplexes.
    pub fn restrict(&self, simplexes: BTreeSet<Simplex>) -> PlMap {
        PlMap {
            source: self.source.with_simplexes(simplexes),
            target_dim: self.target_dim,
            images: self.images.clone(),
        }
    }

    /// Restriction to one end `X x {t}` of a map on a product, as a map on the base.
    pub fn end_map(&self, prod: &ProductComplex, top: bool) -> PlMap {
        let layer = if top { prod.levels.len() - 1 } else { 0 };
        let images = (0..prod.base.num_vertices())
            .map(|v| self.images[prod.lift(v, layer)].clone())
            .collect();
        PlMap {
            source: prod.base.clone(),
            target_dim: self.target_dim,
            images,
        }
    }
}

/// The singular set of `g`: degenerate simplexes plus carriers of the
/// coincidence set `{a : g^-1 g(a) != a}`, closed under faces.
pub fn singular_set(g: &PlMap) -> Subcomplex {
    let k = &g.source;
    let mut gens: Vec<Simplex> = Vec::new();
    for s in k.simplexes() {
        if g.is_degenerate_on(s) {
            gens.push(s.clone());
        }
    }
    let mut sing = Subcomplex::closure(gens.iter());
    let facets: Vec<Simplex> = k
        .facets()
        .into_iter()
        .filter(|b| !sing.contains(b))
        .collect();
    let boxes: HashMap<&Simplex, (Point, Point)> = k
        .simplexes()
        .iter()
        .map(|s| (s, bbox(&g.simplex_images(s))))
        .collect();
    // Larger simplexes first so that closure prunes the smaller candidates.
    let mut cand: Vec<&Simplex> = k.simplexes().iter().collect();
    cand.sort_by_key(|s| std::cmp::Reverse(s.len()));
    for a in cand {
        if sing.contains(a) {
            continue;
        }
        let hit = facets.iter().any(|b| {
            !a.is_face_of(b)
                && boxes_meet(&boxes[a], &boxes[b])
                && common_image(&[g.simplex_images(a), g.simplex_images(b)], &[true, false])
                    .is_some()
        });
        if hit {
            sing = sing.union(&Subcomplex::closure([a]));
        }
    }
    sing
}

/// Witness of a common image point of several components.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionWitness {
    pub components: Vec<usize>,
    #[serde(with = "crate::rational::serde_points")]
    pub points: Vec<Point>,
    #[serde(with = "crate::rational::serde_point")]
    pub image: Point,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<IntersectionWitness>,
}

impl Verdict {
    fn ok() -> Verdict {
        Verdict {
            holds: true,
            witness: None,
        }
    }
}

/// Images of distinct components are pairwise disjoint.
pub fn is_link_map(f: &PlMap, part: &Partition) -> Verdict {
    is_doodle(f, part, 2)
}

/// No `l` distinct components share an image point.
pub fn is_doodle(f: &PlMap, part: &Partition, l: usize) -> Verdict {
    assert!(l >= 2, "l must be at least 2");
    let comps = part.components();
    if comps.len() < l {
        return Verdict::ok();
    }
    let facets = f.source.facets();
    let by_comp: Vec<Vec<&Simplex>> = comps
        .iter()
        .map(|&c| facets.iter().filter(|s| part.of_simplex(s) == c).collect())
        .collect();
    let boxes: HashMap<&Simplex, (Point, Point)> = facets
        .iter()
        .map(|s| (s, bbox(&f.simplex_images(s))))
        .collect();
    for combo in subsets(comps.len(), l) {
        let mut chosen: Vec<&Simplex> = Vec::with_capacity(l);
        if let Some(w) = search_tuple(f, &by_comp, &combo, &boxes, &mut chosen) {
            return Verdict {
                holds: false,
                witness: Some(IntersectionWitness {
                    components: combo.iter().map(|&i| comps[i]).collect(),
                    ..w
                }),
            };
        }
    }
    Verdict::ok()
}

fn search_tuple<'a>(
    f: &PlMap,
    by_comp: &[Vec<&'a Simplex>],
    combo: &[usize],
    boxes: &HashMap<&Simplex, (Point, Point)>,
    chosen: &mut Vec<&'a Simplex>,
) -> Option<IntersectionWitness> {
    if chosen.len() == combo.len() {
        let images: Vec<Vec<&Point>> = chosen.iter().map(|s| f.simplex_images(s)).collect();
        let w = common_image(&images, &vec![false; images.len()])?;
        let points: Vec<Point> = chosen
            .iter()
            .zip(&w)
            .map(|(s, wt)| f.source.point_in(s, wt))
            .collect();
        let image = f.at(chosen[0], &w[0]);
        return Some(IntersectionWitness {
            components: Vec::new(),
            points,
            image,
        });
    }
    for s in &by_comp[combo[chosen.len()]] {
        if chosen.iter().all(|c| boxes_meet(&boxes[c], &boxes[*s])) {
            chosen.push(s);
            if let Some(w) = search_tuple(f, by_comp, combo, boxes, chosen) {
                return Some(w);
            }
            chosen.pop();
        }
    }
    None
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
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
    rec(0, n, k, &mut cur, &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GpReport {
    pub singular_set: Subcomplex,
    pub codim_ok: bool,
    pub nondegenerate_ok: bool,
    pub offending_simplexes: Vec<Simplex>,
}

impl GpReport {
    pub fn ok(&self) -> bool {
        self.codim_ok && self.nondegenerate_ok
    }

    pub fn summary(&self) -> String {
        format!(
            "codim_ok={} nondegenerate_ok={} singular simplexes={} offending={:?}",
            self.codim_ok,
            self.nondegenerate_ok,
            self.singular_set.len(),
            self.offending_simplexes
        )
    }
}

/// Dimensions of `X` and `Q` for a map `X x I -> Q x I`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dims {
    pub n: usize,
    pub m: usize,
}

/// Conditions (codimension, nondegeneracy of `p`) on `S(P o F)`.
///
/// The source of `f` is any triangulation of `X x I` whose last coordinate is
/// the `I` factor, so `p` drops the last source coordinate.
pub fn check_general_position(f: &PlMap, dims: Dims) -> GpReport {
    let sing = singular_set(&f.horizontal());
    let host = &f.source;
    let mut max_coface: HashMap<&Simplex, isize> = HashMap::new();
    for t in host.simplexes() {
        for s in t.faces() {
            if let Some(s) = host.simplexes().get(&s) {
                let e = max_coface.entry(s).or_insert(-1);
                *e = (*e).max(t.dim());
            }
        }
    }
    let extra = dims.m as isize - dims.n as isize - 1;
    let mut offending = Vec::new();
    let mut codim_ok = true;
    let mut nondegenerate_ok = true;
    let xd = host.ambient_dim() - 1;
    for s in sing.iter() {
        let need = s.dim() + extra;
        let bad_codim = max_coface[s] < need;
        let projected: Vec<Point> = host
            .simplex_points(s)
            .iter()
            .map(|p| p[..xd].to_vec())
            .collect();
        let bad_p = !affinely_independent(&projected.iter().collect::<Vec<_>>());
        codim_ok &= !bad_codim;
        nondegenerate_ok &= !bad_p;
        if bad_codim || bad_p {
            offending.push(s.clone());
        }
    }
    GpReport {
        singular_set: sing,
        codim_ok,
        nondegenerate_ok,
        offending_simplexes: offending,
    }
}

#[derive(Clone, Debug)]
pub struct PerturbOptions {
    pub magnitude: Rational,
    pub seed: u64,
    pub budget: usize,
    /// Keep the images of `X x 0` and `X x 1` fixed.
    pub fix_boundary: bool,
}

impl PerturbOptions {
    pub fn new(magnitude: Rational, seed: u64) -> PerturbOptions {
        PerturbOptions {
            magnitude,
            seed,
            budget: 32,
            fix_boundary: false,
        }
    }
}

/// Moves the `Q`-coordinates of vertex images at random, inside the open star
/// of each original image in `q_prod.total`, until general position holds.
/// Heights are never changed.
pub fn perturb_general_position(
    f: &PlMap,
    q_prod: &ProductComplex,
    dims: Dims,
    opts: &PerturbOptions,
) -> Result<PlMap> {
    let first = check_general_position(f, dims);
    if first.ok() {
        return Ok(f.clone());
    }
    if opts.magnitude <= Rational::zero() {
        return Err(Error::PerturbationFailed {
            attempts: 0,
            detail: first.summary(),
        });
    }
    let q = q_prod.total.ambient_dim() - 1;
    let carriers: Vec<Simplex> = f
        .images
        .iter()
        .map(|p| {
            q_prod
                .total
                .locate(p)
                .map(|(s, _)| s)
                .ok_or(Error::PointOutsideComplex)
        })
        .collect::<Result<_>>()?;
    let movable: Vec<bool> = (0..f.source.num_vertices())
        .map(|v| {
            let t = f.source.coords(v).last().expect("product coordinate");
            !(opts.fix_boundary && (t.is_zero() || t.is_one()))
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    const GRAIN: i64 = 1 << 20;
    let mut last = first;
    for _ in 0..opts.budget {
        let mut images = f.images.clone();
        for v in 0..images.len() {
            if !movable[v] {
                continue;
            }
            let mut scale = opts.magnitude.clone();
            for _ in 0..16 {
                let mut p = f.images[v].clone();
                for c in p.iter_mut().take(q) {
                    *c += &scale * rat(rng.gen_range(-GRAIN..=GRAIN), GRAIN);
                }
                let in_star = q_prod
                    .total
                    .locate(&p)
                    .is_some_and(|(s, _)| carriers[v].is_face_of(&s));
                if in_star {
                    images[v] = p;
                    break;
                }
                scale /= Rational::from_integer(2.into());
            }
        }
        let g = PlMap {
            source: f.source.clone(),
            target_dim: f.target_dim,
            images,
        };
        let rep = check_general_position(&g, dims);
        if rep.ok() {
            return Ok(g);
        }
        last = rep;
    }
    Err(Error::PerturbationFailed {
        attempts: opts.budget,
        detail: last.summary(),
    })
}

/// On-disk simplicial map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapFile {
    pub source: ComplexFile,
    pub target: ComplexFile,
    pub vertex_map: Vec<usize>,
}

impl MapFile {
    pub fn to_map(&self) -> Result<SimplicialMap> {
        SimplicialMap::new(
            self.source.to_complex()?,
            self.target.to_complex()?,
            self.vertex_map.clone(),
        )
    }
}
