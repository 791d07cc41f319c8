//! Blisters around singular vertices and the sunny collapse of `X x I`.
//!
//! Only one-dimensional `X` needs blisters (codimension at least three leaves
//! the singular set zero-dimensional). Each blister is a fan of triangles
//! around a singular vertex `a`, carved out of the prism `C x I` over an edge
//! `C` of `X` at `p(a)` by stellar subdivisions of the fan edges.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::collapse::{
    certify_groups, cylindrical_collapse, greedy_collapse, top_down_key, CollapseSequence,
    CollapseState,
};
use crate::complex::{Complex, ProductComplex, Simplex, Subcomplex};
use crate::error::{Error, Result};
use crate::linalg::{barycentric, solve_unique};
use crate::maps::{check_general_position, Dims, PlMap};
use crate::rational::{lerp, rat, sub, Point, PointPair, Rational};
use crate::shadow::{overshadow_order, ShadowContext, ShadowMode};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blister {
    /// The singular vertex, as a host vertex.
    pub vertex: usize,
    /// Whether the vertex lies on `X x 1`.
    pub top: bool,
    pub j: Subcomplex,
    /// The bad face, inside `Y x I`.
    pub k: Subcomplex,
    pub l: Subcomplex,
    /// Point pairs `(z, phi(z))` fixing the blister homeomorphism.
    pub phi: Vec<PointPair>,
}

#[derive(Clone, Debug)]
pub struct BlisterSet {
    pub host: Complex,
    pub map: PlMap,
    pub labels: Vec<usize>,
    pub blisters: Vec<Blister>,
    /// Fractions of the fan edges used for the blister corners.
    pub delta: Rational,
}

fn base(p: &[Rational]) -> &[Rational] {
    &p[..p.len() - 1]
}

fn level(p: &[Rational]) -> &Rational {
    p.last().expect("product coordinate")
}

/// Stellar subdivision of `k` at `p` in the relative interior of edge `e`.
/// Returns the new complex; the new vertex is appended.
fn stellar_edge(k: &Complex, e: &Simplex, p: Point) -> Complex {
    let new = k.num_vertices();
    let mut coords = k.vertices().to_vec();
    coords.push(p);
    let mut gens: Vec<Simplex> = Vec::new();
    for s in k.simplexes() {
        if e.is_face_of(s) {
            for &u in e.vertices() {
                gens.push(s.without_vertex(u).with_vertex(new));
            }
        } else {
            gens.push(s.clone());
        }
    }
    Complex::from_parts(
        k.ambient_dim(),
        coords,
        Subcomplex::closure(gens.iter()).simplexes,
    )
}

struct Host {
    k: Complex,
    images: Vec<Point>,
    labels: Vec<usize>,
}

impl Host {
    fn insert_on_edge(&mut self, u: usize, v: usize, frac: &Rational) -> usize {
        let p = lerp(self.k.coords(u), self.k.coords(v), frac);
        let img = lerp(&self.images[u], &self.images[v], frac);
        self.k = stellar_edge(&self.k, &Simplex::new(vec![u, v]), p);
        self.images.push(img);
        self.labels.push(self.labels[u]);
        self.k.num_vertices() - 1
    }

    fn neighbours(&self, a: usize) -> Vec<usize> {
        self.k
            .simplexes()
            .iter()
            .filter(|s| s.len() == 2 && s.contains_vertex(a))
            .map(|s| s.without_vertex(a).vertices()[0])
            .collect()
    }

    /// Walks the triangles around `a` inside `region`, from edge `(a, start)`
    /// until `stop` accepts a vertex.
    fn fan(
        &self,
        a: usize,
        start: usize,
        region: &dyn Fn(&Simplex) -> bool,
        stop: &dyn Fn(usize) -> bool,
    ) -> Result<Vec<usize>> {
        let tris: Vec<&Simplex> = self
            .k
            .simplexes()
            .iter()
            .filter(|s| s.len() == 3 && s.contains_vertex(a) && region(s))
            .collect();
        let mut seq = vec![start];
        let mut prev: Option<&Simplex> = None;
        for _ in 0..=tris.len() {
            let cur = *seq.last().expect("nonempty");
            let next = tris
                .iter()
                .find(|t| t.contains_vertex(cur) && Some(**t) != prev);
            let Some(t) = next else { break };
            let z = t.without_vertex(a).without_vertex(cur).vertices()[0];
            seq.push(z);
            if stop(z) {
                return Ok(seq);
            }
            prev = Some(t);
        }
        Err(Error::BlisterConstruction(format!(
            "fan around vertex {a} does not close"
        )))
    }
}

/// Parameter along edge `(a, z)` where the segment `p -> q` crosses it.
fn crossing(a: &[Rational], z: &[Rational], p: &[Rational], q: &[Rational]) -> Option<Rational> {
    // p + s (q - p) = a + mu (z - a)
    let d1 = sub(q, p);
    let d2 = sub(z, a);
    let rows: Vec<Vec<Rational>> = (0..a.len())
        .map(|i| vec![d1[i].clone(), -d2[i].clone()])
        .collect();
    let rhs = sub(a, p);
    let sol = solve_unique(&rows, &rhs)?;
    let (s, mu) = (&sol[0], &sol[1]);
    (s > &Rational::zero()
        && s < &Rational::one()
        && mu > &Rational::zero()
        && mu < &Rational::one())
        .then(|| mu.clone())
}

/// Builds one blister for each singular vertex of `f` off `X x 0`.
pub fn build_blisters(
    xp: &ProductComplex,
    f: &PlMap,
    labels: &[usize],
    sing: &Subcomplex,
) -> Result<BlisterSet> {
    if xp.base.dim() != 1 {
        return Err(Error::BlisterConstruction(format!(
            "blisters are implemented for one-dimensional X only (dim X = {})",
            xp.base.dim()
        )));
    }
    if let Some(s) = sing.iter().find(|s| s.len() > 1) {
        return Err(Error::BlisterConstruction(format!(
            "singular simplex {s:?} is not a vertex"
        )));
    }
    let bad: Vec<usize> = sing
        .iter()
        .map(|s| s.vertices()[0])
        .filter(|&v| !xp.level[v].is_zero())
        .collect();
    let mut delta = rat(1, 4);
    let mut last_err = None;
    for _ in 0..8 {
        match try_blisters(xp, f, labels, &bad, &delta) {
            Ok(bs) => return Ok(bs),
            Err(e) => last_err = Some(e),
        }
        delta /= Rational::from_integer(2.into());
    }
    Err(last_err.unwrap_or_else(|| Error::BlisterConstruction("no attempt made".into())))
}

fn try_blisters(
    xp: &ProductComplex,
    f: &PlMap,
    labels: &[usize],
    bad: &[usize],
    delta: &Rational,
) -> Result<BlisterSet> {
    let mut h = Host {
        k: xp.total.clone(),
        images: f.images.clone(),
        labels: labels.to_vec(),
    };
    let bad_base: BTreeSet<usize> = bad.iter().map(|&v| xp.proj[v]).collect();
    let mut blisters = Vec::new();
    for &a in bad {
        let x = xp.proj[a];
        let top = xp.level[a].is_one();
        let edges: Vec<Simplex> = xp
            .base
            .simplexes()
            .iter()
            .filter(|s| s.len() == 2 && s.contains_vertex(x))
            .cloned()
            .collect();
        let c_edge = edges
            .iter()
            .find(|e| !bad_base.contains(&e.without_vertex(x).vertices()[0]))
            .or_else(|| edges.first())
            .ok_or_else(|| {
                Error::BlisterConstruction(format!("base vertex {x} lies on no edge"))
            })?;
        let c = c_edge.without_vertex(x).vertices()[0];
        let (px, pc) = (xp.base.coords(x).clone(), xp.base.coords(c).clone());
        let on_c = |q: &[Rational]| {
            barycentric(&[&px, &pc], q).is_some_and(|w| w.iter().all(|t| t >= &Rational::zero()))
        };
        let kk = h.k.clone();
        let region = |s: &Simplex| s.vertices().iter().all(|&v| on_c(base(kk.coords(v))));
        let pa = h.k.coords(a).clone();
        let nbrs = h.neighbours(a);
        let vertical = |up: bool| {
            nbrs.iter().copied().find(|&z| {
                let pz = h.k.coords(z);
                base(pz) == base(&pa) && ((level(pz) > level(&pa)) == up)
            })
        };
        let down = vertical(false)
            .ok_or_else(|| Error::BlisterConstruction(format!("no edge below vertex {a}")))?;
        // corner points: (edge endpoint, fraction)
        let fans: Vec<Vec<usize>> = if top {
            let is_top = |z: usize| level(kk.coords(z)).is_one() && base(kk.coords(z)) != base(&pa);
            vec![h.fan(a, down, &region, &is_top)?]
        } else {
            let up = vertical(true)
                .ok_or_else(|| Error::BlisterConstruction(format!("no edge above vertex {a}")))?;
            let first = h.fan(a, up, &region, &|z| z == down)?;
            vec![first[..2].to_vec(), first[1..].to_vec()]
        };
        // fractions along the fan edges: corners at delta, crossings between
        let mut rims: Vec<Vec<Rational>> = Vec::new();
        for fan in &fans {
            let p = lerp(&pa, h.k.coords(fan[0]), delta);
            let q = lerp(&pa, h.k.coords(*fan.last().expect("fan")), delta);
            let mut fr = vec![delta.clone()];
            for &z in &fan[1..fan.len() - 1] {
                let mu = crossing(&pa, h.k.coords(z), &p, &q).ok_or_else(|| {
                    Error::BlisterConstruction(format!("rim misses fan edge ({a}, {z})"))
                })?;
                fr.push(mu);
            }
            fr.push(delta.clone());
            rims.push(fr);
        }
        let mut inserted: Vec<Vec<usize>> = Vec::new();
        for (fi, fan) in fans.iter().enumerate() {
            let mut idx = Vec::new();
            for (zi, &z) in fan.iter().enumerate() {
                if fi == 1 && zi == 0 {
                    idx.push(*inserted[0].last().expect("first half inserted"));
                } else {
                    idx.push(h.insert_on_edge(a, z, &rims[fi][zi]));
                }
            }
            inserted.push(idx);
        }
        let mut j_gens = Vec::new();
        let mut l_gens = Vec::new();
        for idx in &inserted {
            for w in idx.windows(2) {
                j_gens.push(Simplex::new(vec![a, w[0], w[1]]));
                l_gens.push(Simplex::new(vec![w[0], w[1]]));
            }
        }
        let a_to = *inserted[0].last().expect("rim");
        let k_gens = if top {
            l_gens.push(Simplex::new(vec![a, a_to]));
            vec![Simplex::new(vec![a, inserted[0][0]])]
        } else {
            vec![
                Simplex::new(vec![inserted[0][0], a]),
                Simplex::new(vec![a, *inserted[1].last().expect("rim")]),
            ]
        };
        let j = Subcomplex::closure(j_gens.iter());
        let l = Subcomplex::closure(l_gens.iter());
        let k = Subcomplex::closure(k_gens.iter());
        let pa_to = h.k.coords(a_to).clone();
        let phi = if top {
            let mid = lerp(&pa, h.k.coords(inserted[0][0]), &rat(1, 2));
            vec![PointPair {
                first: mid,
                second: pa_to,
            }]
        } else {
            vec![PointPair {
                first: pa.clone(),
                second: pa_to,
            }]
        };
        blisters.push(Blister {
            vertex: a,
            top,
            j,
            k,
            l,
            phi,
        });
    }
    for (i, b) in blisters.iter().enumerate() {
        if !b.j.iter().all(|s| h.k.contains(s)) {
            return Err(Error::BlisterConstruction(format!(
                "blister {i} was cut by a later subdivision"
            )));
        }
        for b2 in &blisters[i + 1..] {
            if !b.j.intersection(&b2.j).is_empty() {
                return Err(Error::BlisterConstruction("blisters overlap".into()));
            }
        }
    }
    let map = PlMap::new(h.k.clone(), h.images)?;
    Ok(BlisterSet {
        host: h.k,
        map,
        labels: h.labels,
        blisters,
        delta: delta.clone(),
    })
}

/// `Y x I` inside a subdivided host, `Y` the vertices of the base.
fn vertical_part(host: &Complex, base_cx: &Complex) -> Subcomplex {
    let verts: BTreeSet<&[Rational]> = base_cx.vertices().iter().map(|p| p.as_slice()).collect();
    Subcomplex {
        simplexes: host
            .simplexes()
            .iter()
            .filter(|s| {
                let b = base(host.coords(s.vertices()[0]));
                verts.contains(b) && s.vertices().iter().all(|&v| base(host.coords(v)) == b)
            })
            .cloned()
            .collect(),
    }
}

fn bottom_part(host: &Complex) -> Subcomplex {
    Subcomplex {
        simplexes: host
            .simplexes()
            .iter()
            .filter(|s| {
                s.vertices()
                    .iter()
                    .all(|&v| level(host.coords(v)).is_zero())
            })
            .cloned()
            .collect(),
    }
}

/// A certified sunny collapse `X x I -> X x 0` of a (possibly blistered) host.
#[derive(Clone, Debug)]
pub struct SunnyCollapse {
    pub host: Complex,
    pub map: PlMap,
    pub labels: Vec<usize>,
    pub blisters: Vec<Blister>,
    pub seq: CollapseSequence,
}

/// Sunny collapse of `X x I` onto `X x 0` for `F` in general position, with
/// codimension at least three, in the given shadow mode.
pub fn sunny_collapse(
    xp: &ProductComplex,
    f: &PlMap,
    labels: &[usize],
    dims: Dims,
    mode: &ShadowMode,
) -> Result<SunnyCollapse> {
    if dims.m < dims.n + 3 {
        return Err(Error::CodimensionTooLow(format!(
            "m - n = {} - {} < 3",
            dims.m, dims.n
        )));
    }
    if f.source != xp.total {
        return Err(Error::InvalidInput(
            "map source is not the product complex".into(),
        ));
    }
    if xp
        .bottom
        .iter()
        .flat_map(|s| s.vertices())
        .any(|&v| !f.height(v).is_zero())
    {
        return Err(Error::InvalidInput(
            "F does not send X x 0 into Q x 0".into(),
        ));
    }
    let gp = check_general_position(f, dims);
    if !gp.ok() {
        return Err(Error::GeneralPositionFailed(gp.summary()));
    }
    let (host, map, labels, blisters, mut seq) = match xp.base.dim() {
        0 => {
            let seq = cylindrical_collapse(xp, &Subcomplex::empty())?;
            (
                xp.total.clone(),
                f.clone(),
                labels.to_vec(),
                Vec::new(),
                seq,
            )
        }
        1 => {
            let bs = build_blisters(xp, f, labels, &gp.singular_set)?;
            let ctx = ShadowContext::new(&bs.map, &bs.labels, mode.clone());
            let host = &bs.host;
            let key = top_down_key(host);
            let bottom = bottom_part(host);
            let cyl = vertical_part(host, &xp.base);
            let mut target = bottom.union(&cyl);
            for b in &bs.blisters {
                target = target.union(&b.j);
            }
            let mut seq = CollapseSequence::empty(host.as_subcomplex());
            let mut st = CollapseState::new(host.simplexes());
            let rem: BTreeSet<Simplex> = host
                .simplexes()
                .iter()
                .filter(|s| !target.contains(s))
                .cloned()
                .collect();
            seq.push_group("cylindrical", greedy_collapse(&mut st, &rem, &key)?);
            let order = overshadow_order(
                &ctx,
                &bs.blisters
                    .iter()
                    .map(|b| Simplex::vertex(b.vertex))
                    .collect::<Vec<_>>(),
            )?;
            for a in order {
                let b = bs
                    .blisters
                    .iter()
                    .find(|b| b.vertex == a.vertices()[0])
                    .expect("blister");
                let rem: BTreeSet<Simplex> =
                    b.j.iter().filter(|s| !b.l.contains(s)).cloned().collect();
                seq.push_group("blister", greedy_collapse(&mut st, &rem, &key)?);
            }
            let rem: BTreeSet<Simplex> = st
                .current()
                .iter()
                .filter(|s| !bottom.contains(s))
                .cloned()
                .collect();
            seq.push_group("recursion", greedy_collapse(&mut st, &rem, &key)?);
            (
                bs.host.clone(),
                bs.map.clone(),
                bs.labels.clone(),
                bs.blisters.clone(),
                seq,
            )
        }
        d => {
            return Err(Error::BlisterConstruction(format!(
                "sunny collapse is implemented for dim X <= 1, got {d}"
            )))
        }
    };
    let ctx = ShadowContext::new(&map, &labels, mode.clone());
    certify_groups(&ctx, &mut seq, false)?;
    Ok(SunnyCollapse {
        host,
        map,
        labels,
        blisters,
        seq,
    })
}
