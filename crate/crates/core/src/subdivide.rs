//! Derived subdivisions: barycentric, with prescribed derivation points, and the
//! lagging second derived subdivision whose points trail the map's height.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::complex::{Complex, Simplex, Subcomplex};
use crate::error::{Error, Result};
use crate::linalg::barycentric;
use crate::maps::PlMap;
use crate::rational::{centroid, lerp, rat, Point, Rational};

/// Derivation point of each simplex of dimension at least one.
pub type DerivationSchedule = BTreeMap<Simplex, Point>;

#[derive(Clone, Debug)]
pub struct DerivedComplex {
    pub original: Complex,
    pub result: Complex,
    /// Smallest original simplex containing each result simplex.
    pub carrier: HashMap<Simplex, Simplex>,
    /// For each result vertex, the original simplex it was placed in.
    pub vertex_origin: Vec<Simplex>,
}

impl DerivedComplex {
    /// `L''`: result simplexes carried by simplexes of `l`.
    pub fn induced(&self, l: &Subcomplex) -> Subcomplex {
        Subcomplex {
            simplexes: self
                .result
                .simplexes()
                .iter()
                .filter(|s| l.contains(&self.carrier[*s]))
                .cloned()
                .collect(),
        }
    }

    /// The same map expressed on the result complex.
    pub fn pull_map(&self, f: &PlMap) -> PlMap {
        let images = (0..self.result.num_vertices())
            .map(|v| {
                let c = &self.vertex_origin[v];
                let w = barycentric(&self.original.simplex_points(c), self.result.coords(v))
                    .expect("result vertex lies in its origin simplex");
                f.at(c, &w)
            })
            .collect();
        PlMap {
            source: self.result.clone(),
            target_dim: f.target_dim,
            images,
        }
    }

    /// Labels of result vertices inherited from the original vertices.
    pub fn pull_labels(&self, labels: &[usize]) -> Vec<usize> {
        self.vertex_origin
            .iter()
            .map(|c| labels[c.vertices()[0]])
            .collect()
    }

    /// Composes `self: K -> K'` with `next: K' -> K''`.
    pub fn then(&self, next: &DerivedComplex) -> DerivedComplex {
        DerivedComplex {
            original: self.original.clone(),
            result: next.result.clone(),
            carrier: next
                .carrier
                .iter()
                .map(|(s, c)| (s.clone(), self.carrier[c].clone()))
                .collect(),
            // K' vertices are looked up by index: unused coordinates have no carrier
            vertex_origin: next
                .vertex_origin
                .iter()
                .map(|c| match c.vertices() {
                    [v] => self.vertex_origin[*v].clone(),
                    _ => self.carrier[c].clone(),
                })
                .collect(),
        }
    }
}

/// Derived subdivision with the given derivation points. Original vertex `v`
/// keeps index `v`; the point of each higher simplex gets a fresh index.
pub fn derived(k: &Complex, sched: &DerivationSchedule) -> Result<DerivedComplex> {
    let mut coords: Vec<Point> = k.vertices().to_vec();
    let mut index: HashMap<&Simplex, usize> = HashMap::new();
    let mut vertex_origin: Vec<Simplex> = (0..k.num_vertices()).map(Simplex::vertex).collect();
    for s in k.simplexes() {
        if s.len() == 1 {
            index.insert(s, s.vertices()[0]);
            continue;
        }
        let p = sched
            .get(s)
            .ok_or_else(|| Error::DerivationPointOutsideInterior(s.clone()))?;
        let w = barycentric(&k.simplex_points(s), p)
            .ok_or_else(|| Error::DerivationPointOutsideInterior(s.clone()))?;
        if w.iter().any(|c| !c.is_positive()) {
            return Err(Error::DerivationPointOutsideInterior(s.clone()));
        }
        index.insert(s, coords.len());
        coords.push(p.clone());
        vertex_origin.push(s.clone());
    }
    // chains(s) = chains whose top is s, as vertex lists of the result.
    let mut by_size: Vec<&Simplex> = k.simplexes().iter().collect();
    by_size.sort_by_key(|s| s.len());
    let mut chains: HashMap<&Simplex, Vec<Vec<usize>>> = HashMap::new();
    let mut carrier = HashMap::new();
    let mut simplexes = BTreeSet::new();
    for s in by_size {
        let me = index[s];
        let mut mine = vec![vec![me]];
        for t in s.boundary_faces() {
            let t = k.simplexes().get(&t).expect("closed complex");
            for c in &chains[t] {
                let mut c = c.clone();
                c.push(me);
                mine.push(c);
            }
        }
        for c in &mine {
            let r = Simplex::new(c.clone());
            carrier.insert(r.clone(), s.clone());
            simplexes.insert(r);
        }
        chains.insert(s, mine);
    }
    Ok(DerivedComplex {
        original: k.clone(),
        result: Complex::from_parts(k.ambient_dim(), coords, simplexes),
        carrier,
        vertex_origin,
    })
}

pub fn barycentric_schedule(k: &Complex) -> DerivationSchedule {
    k.simplexes()
        .iter()
        .filter(|s| s.len() > 1)
        .map(|s| (s.clone(), k.barycenter(s)))
        .collect()
}

pub fn barycentric_subdivision(k: &Complex) -> DerivedComplex {
    derived(k, &barycentric_schedule(k)).expect("barycenters are interior")
}

/// The second derived subdivision whose derivation points lag behind the
/// height of the map, together with the data of its height functions.
#[derive(Clone, Debug)]
pub struct LaggingDerived {
    pub first: DerivedComplex,
    /// `K -> K''` with carriers in the original complex.
    pub derived: DerivedComplex,
    pub shift: Rational,
    /// `Pi F(a) + shift` at the barycenter `a` of every original simplex.
    pub center_value: HashMap<Simplex, Rational>,
}

/// Fraction `c / (c + 1)` along `a_j -> b` at which `f_{A_j}` vanishes.
pub fn lag_fraction(center: &Rational) -> Rational {
    center / (center + Rational::one())
}

pub fn lagging_second_derived(f: &PlMap, shift: &Rational) -> Result<LaggingDerived> {
    let k = &f.source;
    let first = barycentric_subdivision(k);
    let mut center_value = HashMap::new();
    for s in k.simplexes() {
        let n = s.len() as i64;
        let h: Rational = s
            .vertices()
            .iter()
            .map(|&v| f.height(v).clone())
            .sum::<Rational>()
            * rat(1, n);
        let c = h + shift;
        if !c.is_positive() {
            return Err(Error::NonPositiveCenterValue(s.clone()));
        }
        center_value.insert(s.clone(), c);
    }
    // Process K' simplexes by the dimension of their carrier, then by size, so
    // that the derivation point of B is known before that of a_j * B.
    let kp = &first.result;
    let mut order: Vec<&Simplex> = kp.simplexes().iter().filter(|s| s.len() > 1).collect();
    order.sort_by(|x, y| {
        let (cx, cy) = (&first.carrier[*x], &first.carrier[*y]);
        (cx.len(), cx, x.len(), *x).cmp(&(cy.len(), cy, y.len(), *y))
    });
    let mut sched: DerivationSchedule = BTreeMap::new();
    for t in order {
        let carrier = &first.carrier[t];
        // The barycenter a_j of the carrier is the top vertex of the chain t.
        let top = *t
            .vertices()
            .iter()
            .find(|&&v| &first.vertex_origin[v] == carrier)
            .expect("chain contains its top barycenter");
        let rest = t.without_vertex(top);
        let b = if rest.len() == 1 {
            kp.coords(rest.vertices()[0]).clone()
        } else {
            sched[&rest].clone()
        };
        let s = lag_fraction(&center_value[carrier]);
        sched.insert(t.clone(), lerp(kp.coords(top), &b, &s));
    }
    let second = derived(kp, &sched)?;
    let derived = first.then(&second);
    Ok(LaggingDerived {
        first,
        derived,
        shift: shift.clone(),
        center_value,
    })
}

/// The simplicial neighbourhood of `L''` in the result: all result simplexes
/// meeting it, with their faces.
pub fn derived_neighborhood(kpp: &DerivedComplex, l: &Subcomplex) -> Result<Subcomplex> {
    if !l.is_subset_of(&kpp.original.as_subcomplex()) || !l.is_closed() {
        return Err(Error::NotSubcomplex(
            "L is not a subcomplex of the original complex".into(),
        ));
    }
    let lpp = kpp.induced(l);
    let verts = lpp.vertex_set();
    let touching: Vec<&Simplex> = kpp
        .result
        .simplexes()
        .iter()
        .filter(|s| s.vertices().iter().any(|v| verts.contains(v)))
        .collect();
    Ok(Subcomplex::closure(touching))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PointClass {
    InL,
    InNMinusL,
    InIntNMinusL,
    Outside,
}

impl PointClass {
    pub fn in_neighborhood(self) -> bool {
        self != PointClass::Outside
    }

    pub fn in_interior(self) -> bool {
        matches!(self, PointClass::InL | PointClass::InIntNMinusL)
    }
}

impl LaggingDerived {
    /// Value of the join-linear `f_A` at a point with barycentric coordinates
    /// `w` in `A` (linear on each ray from the barycenter to the boundary).
    pub fn height_function(&self, a: &Simplex, w: &[Rational]) -> Rational {
        let n = Rational::from_integer((a.len() as i64).into());
        let min = w.iter().min().expect("nonempty").clone();
        let lambda = Rational::one() - n * min;
        let c = &self.center_value[a];
        (Rational::one() - &lambda) * c - lambda
    }

    /// Decides membership of `x` in `N(L)` and its interior by the recursive
    /// criterion on `C_x`, its barycenter and the radial point `p_x`.
    pub fn classify_point(&self, x: &[Rational], l: &Subcomplex) -> Result<PointClass> {
        let k = &self.derived.original;
        let (cx, w) = k.locate(x).ok_or(Error::PointOutsideComplex)?;
        if l.contains(&cx) {
            return Ok(PointClass::InL);
        }
        if cx.len() == 1 {
            return Ok(PointClass::Outside);
        }
        let n = Rational::from_integer((cx.len() as i64).into());
        let min = w.iter().min().expect("nonempty").clone();
        if min == Rational::one() / &n {
            // x is the barycenter, where f is positive
            return Ok(PointClass::Outside);
        }
        let lambda = Rational::one() - &n * &min;
        let center = centroid(&k.simplex_points(&cx));
        let px = crate::rational::add(
            &center,
            &crate::rational::scale(
                &crate::rational::sub(x, &center),
                &(Rational::one() / &lambda),
            ),
        );
        let fx = self.height_function(&cx, &w);
        let inner = self.classify_point(&px, l)?;
        Ok(if inner.in_interior() && fx.is_negative() {
            PointClass::InIntNMinusL
        } else if inner.in_neighborhood() && !fx.is_positive() {
            PointClass::InNMinusL
        } else {
            PointClass::Outside
        })
    }
}
