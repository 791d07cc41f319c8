//! From a collapse of `X x I` onto `X x 0` to the deformation `h_s`, the
//! reparametrization `H`, and the level-preserving map `Phi`.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blister::{sunny_collapse, SunnyCollapse};
use crate::collapse::{stabilize, CollapseSequence, Stabilized};
use crate::complex::{Complex, Partition, ProductComplex, Simplex};
use crate::error::{Error, Result};
use crate::fiber::{bbox, weighted_point};
use crate::linalg::barycentric;
use crate::maps::{
    check_general_position, is_doodle, is_link_map, perturb_general_position, Dims, GpReport,
    PerturbOptions, PlMap,
};
use crate::rational::{int, lerp, rat, Point, Rational};
use crate::shadow::{ShadowContext, ShadowMode};

/// One elementary retraction, active during `[start, end]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    pub coface: Simplex,
    pub free_face: Simplex,
    pub start: Rational,
    pub end: Rational,
    lo: Point,
    hi: Point,
}

/// `h_s`, the concatenation of the retractions of the removed balls.
#[derive(Clone, Debug)]
pub struct PLDeformation {
    pub host: Complex,
    pub stages: Vec<Stage>,
}

/// Uniform schedule: each group gets an equal share of `[0, 1]`, split evenly
/// among its steps.
pub fn collapse_to_deformation(seq: &CollapseSequence, host: &Complex) -> Result<PLDeformation> {
    let groups = seq.groups.len();
    let mut stages = Vec::with_capacity(seq.steps.len());
    for g in 0..groups {
        let range = seq.group_range(g);
        let n = range.len();
        for (i, k) in range.enumerate() {
            let step = &seq.steps[k];
            if !step.free_face.is_face_of(&step.coface)
                || step.free_face.len() + 1 != step.coface.len()
            {
                return Err(Error::InvalidSequence(format!(
                    "step {k} is not a facet pair"
                )));
            }
            if !host.contains(&step.coface) {
                return Err(Error::InvalidSequence(format!("step {k} leaves the host")));
            }
            let g0 = Rational::new((g as i64).into(), (groups as i64).into());
            let width = Rational::new(1.into(), ((groups * n) as i64).into());
            let start = &g0 + &width * int(i as i64);
            let end = &start + &width;
            let (lo, hi) = bbox(&host.simplex_points(&step.coface));
            stages.push(Stage {
                coface: step.coface.clone(),
                free_face: step.free_face.clone(),
                start,
                end,
                lo,
                hi,
            });
        }
    }
    if stages.len() != seq.steps.len() {
        return Err(Error::InvalidSequence("steps outside every group".into()));
    }
    Ok(PLDeformation {
        host: host.clone(),
        stages,
    })
}

impl PLDeformation {
    pub fn identity(host: &Complex) -> PLDeformation {
        PLDeformation {
            host: host.clone(),
            stages: Vec::new(),
        }
    }

    /// Pushes the weight of the free face onto the apex: `r(y)` for `y` in the
    /// coface, `None` outside it.
    pub fn retract(&self, st: &Stage, y: &[Rational]) -> Option<Point> {
        if y.iter().zip(&st.lo).any(|(a, b)| a < b) || y.iter().zip(&st.hi).any(|(a, b)| a > b) {
            return None;
        }
        let pts = self.host.simplex_points(&st.coface);
        let mut w = barycentric(&pts, y)?;
        if w.iter().any(|x| x < &Rational::zero()) {
            return None;
        }
        let vs = st.coface.vertices();
        let apex = vs
            .iter()
            .position(|v| !st.free_face.contains_vertex(*v))
            .expect("apex");
        let m = (0..vs.len())
            .filter(|&i| i != apex)
            .map(|i| w[i].clone())
            .min()
            .expect("free face vertex");
        if m.is_zero() {
            return Some(y.to_vec());
        }
        for (i, wi) in w.iter_mut().enumerate() {
            if i == apex {
                *wi += &m * int((vs.len() - 1) as i64);
            } else {
                *wi -= &m;
            }
        }
        Some(weighted_point(&w, &pts))
    }

    /// `h_s(y)`.
    pub fn eval(&self, y: &[Rational], s: &Rational) -> Point {
        let mut y = y.to_vec();
        for st in &self.stages {
            if &st.start >= s {
                break;
            }
            let Some(r) = self.retract(st, &y) else {
                continue;
            };
            if &st.end <= s {
                y = r;
            } else {
                let lam = (s - &st.start) / (&st.end - &st.start);
                y = lerp(&y, &r, &lam);
            }
        }
        y
    }

    /// The whole track `s -> h_s(y)`, exact: linear between stage ends.
    pub fn track(&self, y: &[Rational]) -> PlPath {
        let mut path = PlPath {
            times: vec![Rational::zero()],
            points: vec![y.to_vec()],
        };
        let mut cur = y.to_vec();
        for st in &self.stages {
            if let Some(r) = self.retract(st, &cur) {
                if r != cur {
                    path.push(st.start.clone(), cur.clone());
                    path.push(st.end.clone(), r.clone());
                    cur = r;
                }
            }
        }
        path.push(Rational::one(), cur);
        path
    }
}

/// A piecewise linear path with nondecreasing break times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlPath {
    pub times: Vec<Rational>,
    pub points: Vec<Point>,
}

impl PlPath {
    fn push(&mut self, t: Rational, p: Point) {
        if self.times.last() == Some(&t) {
            *self.points.last_mut().expect("nonempty") = p;
        } else {
            self.times.push(t);
            self.points.push(p);
        }
    }

    pub fn at(&self, t: &Rational) -> Point {
        let i = self.times.partition_point(|x| x <= t);
        if i == 0 {
            return self.points[0].clone();
        }
        if i == self.times.len() {
            return self.points[i - 1].clone();
        }
        let (t0, t1) = (&self.times[i - 1], &self.times[i]);
        lerp(
            &self.points[i - 1],
            &self.points[i],
            &((t - t0) / (t1 - t0)),
        )
    }
}

/// `H(x, t)`: the top `x x 1` pushed along `h_{2t}`, then the projection of the
/// track run backwards on `X x 0`.
pub fn reparametrize(h: &PLDeformation, x: &[Rational], t: &Rational) -> Point {
    let mut top = x.to_vec();
    top.push(Rational::one());
    let two = int(2);
    if t * &two <= Rational::one() {
        h.eval(&top, &(t * &two))
    } else {
        let mut y = h.eval(&top, &(&two - &two * t));
        *y.last_mut().expect("product coordinate") = Rational::zero();
        y
    }
}

/// `Phi(x, t) = (P F H(x, t), t)`, optionally run backwards in time.
#[derive(Clone, Debug)]
pub struct LevelMap {
    pub base: Complex,
    pub deformation: PLDeformation,
    /// `F` on the coarse product.
    pub f: PlMap,
    pub labels: Vec<usize>,
    pub f_start: PlMap,
    pub f_end: PlMap,
    pub reversed: bool,
}

/// `Phi` as written: `Phi(., 0) = f_1` and `Phi(., 1) = f_0`.
pub fn level_shift(f: &PlMap, xp: &ProductComplex, h: PLDeformation, labels: &[usize]) -> LevelMap {
    let q = f.target_dim - 1;
    LevelMap {
        base: xp.base.clone(),
        deformation: h,
        f: f.clone(),
        labels: labels.to_vec(),
        f_start: f.end_map(xp, true).truncate(q),
        f_end: f.end_map(xp, false).truncate(q),
        reversed: false,
    }
}

impl LevelMap {
    pub fn time_reversed(self) -> LevelMap {
        LevelMap {
            f_start: self.f_end,
            f_end: self.f_start,
            reversed: !self.reversed,
            ..self
        }
    }

    pub fn q_dim(&self) -> usize {
        self.f.target_dim - 1
    }

    fn paper_time(&self, t: &Rational) -> Rational {
        if self.reversed {
            Rational::one() - t
        } else {
            t.clone()
        }
    }

    /// `H(x, t)` in the delivered parametrization.
    pub fn h(&self, x: &[Rational], t: &Rational) -> Point {
        reparametrize(&self.deformation, x, &self.paper_time(t))
    }

    pub fn eval(&self, x: &[Rational], t: &Rational) -> Result<Point> {
        let y = self.h(x, t);
        let mut out = self.f.evaluate(&y)?;
        out.truncate(self.q_dim());
        out.push(t.clone());
        Ok(out)
    }

    /// For a point `x`, the path `t -> Phi(x, t)`, exact. Break times come from
    /// the track and from crossings of the coarse product's vertex levels; only
    /// valid where `F` is linear along vertical segments, i.e. `dim X = 0`.
    pub fn vertical_path(&self, x: &[Rational]) -> Result<PlPath> {
        let mut top = x.to_vec();
        top.push(Rational::one());
        let tr = self.deformation.track(&top);
        let two = int(2);
        // first half: paper time s/2; second half constant at p(h_1) on X x 0
        let mut times = Vec::new();
        let mut pts = Vec::new();
        for (s, y) in tr.times.iter().zip(&tr.points) {
            times.push(s / &two);
            pts.push(y.clone());
        }
        let mut end = tr.points.last().expect("track").clone();
        *end.last_mut().expect("product coordinate") = Rational::zero();
        times.push(Rational::one());
        pts.push(end);
        let q = self.q_dim();
        let mut path = PlPath {
            times: Vec::new(),
            points: Vec::new(),
        };
        let order: Vec<usize> = if self.reversed {
            (0..times.len()).rev().collect()
        } else {
            (0..times.len()).collect()
        };
        for i in order {
            let t = if self.reversed {
                Rational::one() - &times[i]
            } else {
                times[i].clone()
            };
            let mut img = self.f.evaluate(&pts[i])?;
            img.truncate(q);
            img.push(t.clone());
            path.push(t, img);
        }
        Ok(path)
    }
}

/// Which disjointness `Phi` must keep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HomotopyMode {
    Link,
    Doodle {
        l: usize,
    },
    Eps {
        #[serde(with = "crate::rational::serde_rat")]
        eps: Rational,
    },
}

impl HomotopyMode {
    pub fn shadow_mode(&self) -> ShadowMode {
        match self {
            HomotopyMode::Eps { eps } => ShadowMode::Eps { eps: eps.clone() },
            _ => ShadowMode::Link,
        }
    }

    /// Number of components that must not meet at one point.
    pub fn arity(&self) -> usize {
        match self {
            HomotopyMode::Doodle { l } => *l,
            _ => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoincidenceWitness {
    #[serde(with = "crate::rational::serde_points")]
    pub sources: Vec<Point>,
    #[serde(with = "crate::rational::serde_rat")]
    pub t: Rational,
    #[serde(with = "crate::rational::serde_point")]
    pub image: Point,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub level_ok: bool,
    pub endpoints_ok: bool,
    pub disjoint_ok: bool,
    /// Disjointness decided exactly rather than by sampling.
    pub exact: bool,
    pub second_half_ok: bool,
    pub track_carriers_ok: Option<bool>,
    pub eps_trace_ok: Option<bool>,
    pub eps_tuple_ok: Option<bool>,
    pub samples: usize,
    pub failures: Vec<String>,
    pub witness: Option<CoincidenceWitness>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn into_result(self) -> Result<VerifyReport> {
        if self.passed() {
            Ok(self)
        } else {
            Err(Error::VerificationFailed(format!(
                "{}; witness {:?}",
                self.failures.join("; "),
                self.witness
            )))
        }
    }
}

/// A point and time common to all `paths`, searched exactly on the common
/// refinement of their break times.
pub fn common_point(paths: &[&PlPath]) -> Option<(Rational, Point)> {
    let mut times: Vec<Rational> = paths.iter().flat_map(|p| p.times.iter().cloned()).collect();
    times.sort();
    times.dedup();
    if times.len() == 1 {
        let pts: Vec<Point> = paths.iter().map(|p| p.at(&times[0])).collect();
        return pts
            .iter()
            .all(|p| p == &pts[0])
            .then(|| (times[0].clone(), pts[0].clone()));
    }
    for w in times.windows(2) {
        let a: Vec<Point> = paths.iter().map(|p| p.at(&w[0])).collect();
        let b: Vec<Point> = paths.iter().map(|p| p.at(&w[1])).collect();
        // (a_k - a_0) + u ((b_k - a_k) - (b_0 - a_0)) = 0 for all k, coordinates
        let mut u: Option<Rational> = None;
        let mut ok = true;
        'eqs: for k in 1..paths.len() {
            for c in 0..a[0].len() {
                let c0 = &a[k][c] - &a[0][c];
                let d = (&b[k][c] - &a[k][c]) - (&b[0][c] - &a[0][c]);
                if d.is_zero() {
                    if !c0.is_zero() {
                        ok = false;
                        break 'eqs;
                    }
                    continue;
                }
                let root = -c0 / d;
                match &u {
                    Some(r) if r != &root => {
                        ok = false;
                        break 'eqs;
                    }
                    _ => u = Some(root),
                }
            }
        }
        if !ok {
            continue;
        }
        let u = u.unwrap_or_else(Rational::zero);
        if u < Rational::zero() || u > Rational::one() {
            continue;
        }
        let t = &w[0] + &u * (&w[1] - &w[0]);
        return Some((t.clone(), paths[0].at(&t)));
    }
    None
}

/// Knobs for `verify_level_map`.
#[derive(Clone, Debug)]
pub struct VerifyOptions<'a> {
    pub samples: usize,
    pub seed: u64,
    /// `F` and labels on the host of the deformation, for the carrier check.
    pub host_map: Option<(&'a PlMap, &'a [usize])>,
}

fn random_point_in(k: &Complex, rng: &mut ChaCha8Rng) -> Point {
    let all: Vec<&Simplex> = k.simplexes().iter().collect();
    let s = all[rng.gen_range(0..all.len())];
    let raw: Vec<i64> = (0..s.len()).map(|_| rng.gen_range(1..=64)).collect();
    let total: i64 = raw.iter().sum();
    let w: Vec<Rational> = raw.iter().map(|&r| rat(r, total)).collect();
    k.point_in(s, &w)
}

fn dist2(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn label_at(base: &Complex, labels: &[usize], x: &[Rational]) -> Option<usize> {
    base.locate(x).map(|(s, _)| labels[s.vertices()[0]])
}

/// Checks level preservation, endpoints and the disjointness demanded by `mode`.
pub fn verify_level_map(
    phi: &LevelMap,
    mode: &HomotopyMode,
    opts: &VerifyOptions,
) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut failures = Vec::new();
    let mut witness = None;
    let base = &phi.base;
    let q = phi.q_dim();
    let nx = base.ambient_dim();
    let mut level_ok = true;
    for _ in 0..opts.samples {
        let x = random_point_in(base, &mut rng);
        let t = rat(rng.gen_range(0..=1024), 1024);
        level_ok &= phi.eval(&x, &t)?[q] == t;
    }
    if !level_ok {
        failures.push("level not preserved".into());
    }
    let mut endpoints_ok = true;
    for v in 0..base.num_vertices() {
        let x = base.coords(v);
        let (e0, e1) = (
            phi.eval(x, &Rational::zero())?,
            phi.eval(x, &Rational::one())?,
        );
        endpoints_ok &= e0[..q] == phi.f_start.image(v)[..] && e0[q].is_zero();
        endpoints_ok &= e1[..q] == phi.f_end.image(v)[..] && e1[q].is_one();
    }
    if !endpoints_ok {
        failures.push("endpoints differ from f_start / f_end".into());
    }
    // second half: H stays on X x 0 inside the component of x
    let mut second_half_ok = true;
    for v in 0..base.num_vertices() {
        let x = base.coords(v);
        for _ in 0..4 {
            let tp = rat(rng.gen_range(513..=1024), 1024);
            let t = if phi.reversed {
                Rational::one() - &tp
            } else {
                tp
            };
            let y = phi.h(x, &t);
            second_half_ok &=
                y[nx].is_zero() && label_at(base, &phi.labels, &y[..nx]) == Some(phi.labels[v]);
        }
    }
    if !second_half_ok {
        failures.push("second half leaves X_i x 0".into());
    }
    let labels = &phi.labels;
    let arity = mode.arity();
    let exact = base.dim() <= 0;
    let mut disjoint_ok = true;
    let mut eps_tuple_ok = None;
    if exact {
        let paths: Vec<PlPath> = (0..base.num_vertices())
            .map(|v| phi.vertical_path(base.coords(v)))
            .collect::<Result<_>>()?;
        let eps = matches!(mode, HomotopyMode::Eps { .. });
        let tuples: Vec<Vec<usize>> = crate::maps::subsets(base.num_vertices(), arity)
            .into_iter()
            .filter(|t| {
                let ls: BTreeSet<usize> = t.iter().map(|&v| labels[v]).collect();
                eps || ls.len() == t.len()
            })
            .collect();
        let mut tuple_ok = true;
        for t in &tuples {
            let ps: Vec<&PlPath> = t.iter().map(|&v| &paths[v]).collect();
            let Some((time, img)) = common_point(&ps) else {
                continue;
            };
            let w = CoincidenceWitness {
                sources: t.iter().map(|&v| base.coords(v).clone()).collect(),
                t: time,
                image: img,
            };
            match mode {
                HomotopyMode::Eps { eps } => {
                    if !eps_pair_explained(phi, t, eps)? {
                        tuple_ok = false;
                        witness.get_or_insert(w);
                    }
                }
                _ => {
                    disjoint_ok = false;
                    witness.get_or_insert(w);
                }
            }
        }
        if eps {
            eps_tuple_ok = Some(tuple_ok);
            if !tuple_ok {
                failures
                    .push("a meeting of Phi tracks is not explained by F near the points".into());
            }
        }
    } else {
        // sampled: points of distinct components never land on one exact point
        for _ in 0..opts.samples.max(1) {
            let t = rat(rng.gen_range(0..=1024), 1024);
            let mut pts: Vec<(Point, Point, Option<usize>)> = Vec::new();
            for _ in 0..8 {
                let x = random_point_in(base, &mut rng);
                let img = phi.eval(&x, &t)?[..q].to_vec();
                let l = label_at(base, labels, &x);
                pts.push((x, img, l));
            }
            for (i, (x, a, lx)) in pts.iter().enumerate() {
                for (y, b, ly) in &pts[i + 1..] {
                    if lx != ly && a == b && arity == 2 {
                        disjoint_ok = false;
                        witness.get_or_insert(CoincidenceWitness {
                            sources: vec![x.clone(), y.clone()],
                            t: t.clone(),
                            image: a.clone(),
                        });
                    }
                }
            }
        }
    }
    if !disjoint_ok {
        failures.push(format!("{arity} components meet"));
    }
    let eps_trace_ok = match mode {
        HomotopyMode::Eps { eps } => {
            let bound = eps * eps / int(4);
            let mut ok = true;
            let xs: Vec<Point> = (0..base.num_vertices())
                .map(|v| base.coords(v).clone())
                .chain((0..opts.samples.min(32)).map(|_| random_point_in(base, &mut rng)))
                .collect();
            for x in xs {
                let mut top = x.clone();
                top.push(Rational::one());
                let tr = phi.deformation.track(&top);
                ok &= tr.points.iter().all(|y| dist2(&y[..nx], &x) < bound);
            }
            if !ok {
                failures.push("a track leaves the eps/2 neighbourhood of its point".into());
            }
            Some(ok)
        }
        _ => None,
    };
    let track_carriers_ok = match opts.host_map {
        Some((g, host_labels)) => {
            let ok = track_carriers_clean(
                phi,
                g,
                host_labels,
                &mode.shadow_mode(),
                &mut rng,
                opts.samples,
            )?;
            if !ok {
                failures.push("the pushed top overshadows itself".into());
            }
            Some(ok)
        }
        None => None,
    };
    Ok(VerifyReport {
        level_ok,
        endpoints_ok,
        disjoint_ok,
        exact,
        second_half_ok,
        track_carriers_ok,
        eps_trace_ok,
        eps_tuple_ok,
        samples: opts.samples,
        failures,
        witness,
    })
}

/// `F(N_eps(x_1) x I)` and `F(N_eps(x_2) x I)` meet, for vertices of a
/// zero-dimensional `X`.
fn eps_pair_explained(phi: &LevelMap, t: &[usize], eps: &Rational) -> Result<bool> {
    let base = &phi.base;
    let e2 = eps * eps;
    let near = |v: usize| -> Vec<usize> {
        (0..base.num_vertices())
            .filter(|&u| dist2(base.coords(u), base.coords(v)) < e2)
            .collect()
    };
    let (n0, n1) = (near(t[0]), near(t[1]));
    if n0.iter().any(|u| n1.contains(u)) {
        return Ok(true);
    }
    let seg = |v: usize| -> Result<(Point, Point)> {
        let mut lo = base.coords(v).clone();
        lo.push(Rational::zero());
        let mut hi = base.coords(v).clone();
        hi.push(Rational::one());
        Ok((phi.f.evaluate(&lo)?, phi.f.evaluate(&hi)?))
    };
    for &a in &n0 {
        for &b in &n1 {
            if segments_meet(&seg(a)?, &seg(b)?) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Closed segments `[p0, p1]` and `[q0, q1]` share a point.
pub fn segments_meet((p0, p1): &(Point, Point), (q0, q1): &(Point, Point)) -> bool {
    // p0 + s (p1 - p0) = q0 + u (q1 - q0)
    let mut m: Vec<Vec<Rational>> = (0..p0.len())
        .map(|c| vec![&p1[c] - &p0[c], &q0[c] - &q1[c], &q0[c] - &p0[c]])
        .collect();
    let piv = crate::linalg::rref(&mut m);
    if piv.contains(&2) {
        return false;
    }
    let (zero, one) = (Rational::zero(), Rational::one());
    let inside = |r: &Rational| r >= &zero && r <= &one;
    if piv == [0, 1] {
        return inside(&m[0][2]) && inside(&m[1][2]);
    }
    // parallel or degenerate: some endpoint lies on the other segment
    let on = |x: &Point, a: &Point, b: &Point| {
        if a == b {
            return x == a;
        }
        barycentric(&[a, b], x).is_some_and(|w| w.iter().all(inside))
    };
    on(p0, q0, q1) || on(p1, q0, q1) || on(q0, p0, p1) || on(q1, p0, p1)
}

/// Carriers of `h_s(x x 1)` for sampled `s` and `x` never link-overshadow one
/// another across components.
fn track_carriers_clean(
    phi: &LevelMap,
    g: &PlMap,
    labels: &[usize],
    mode: &ShadowMode,
    rng: &mut ChaCha8Rng,
    samples: usize,
) -> Result<bool> {
    let host = &phi.deformation.host;
    let ctx = ShadowContext::new(g, labels, mode.clone());
    let base = &phi.base;
    for _ in 0..samples.clamp(1, 8) {
        let s = rat(rng.gen_range(0..=1024), 1024);
        let mut carriers: BTreeSet<Simplex> = BTreeSet::new();
        let xs: Vec<Point> = (0..base.num_vertices())
            .map(|v| base.coords(v).clone())
            .chain((0..4).map(|_| random_point_in(base, rng)))
            .collect();
        for x in xs {
            let mut top = x;
            top.push(Rational::one());
            let y = phi.deformation.eval(&top, &s);
            let (c, _) = host.locate(&y).ok_or(Error::PointOutsideComplex)?;
            carriers.insert(c);
        }
        for a in &carriers {
            for b in &carriers {
                if a != b && ctx.may_overshadow(a, b) && ctx.overshadows(a, b, true).verdict {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Run configuration, echoed into every bundle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: HomotopyMode,
    pub seed: u64,
    #[serde(with = "crate::rational::serde_rat")]
    pub perturb_magnitude: Rational,
    #[serde(with = "crate::rational::serde_rat")]
    pub shift_constant: Rational,
    pub retry_budget: usize,
    pub verify_samples: usize,
}

impl RunConfig {
    pub fn new(mode: HomotopyMode, seed: u64) -> RunConfig {
        RunConfig {
            mode,
            seed,
            perturb_magnitude: rat(1, 16),
            shift_constant: rat(1, 100),
            retry_budget: 32,
            verify_samples: 100,
        }
    }
}

/// `F: X x I -> Q x I` on staircase products, with a partition of `X`.
#[derive(Clone, Debug)]
pub struct PipelineInput {
    pub xp: ProductComplex,
    pub qp: ProductComplex,
    pub f: PlMap,
    pub partition: Partition,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    /// `F` after the general position perturbation.
    pub f: PlMap,
    pub gp: GpReport,
    pub sunny: SunnyCollapse,
    pub stable: Stabilized,
    pub phi: LevelMap,
    pub report: VerifyReport,
}

pub fn dims_of(input: &PipelineInput) -> Dims {
    Dims {
        n: input.xp.base.dim().max(0) as usize,
        m: input.qp.base.dim().max(0) as usize,
    }
}

/// Host labels: each vertex of `X x I` gets the label of its base vertex.
pub fn lift_labels(xp: &ProductComplex, part: &Partition) -> Vec<usize> {
    xp.proj.iter().map(|&v| part.label(v)).collect()
}

/// Perturb, sunny collapse, stabilize, deform, reparametrize, shift levels, verify.
pub fn pipeline(input: &PipelineInput, cfg: &RunConfig) -> Result<PipelineOutput> {
    let dims = dims_of(input);
    if dims.m < dims.n + 3 {
        return Err(Error::CodimensionTooLow(format!(
            "m - n = {} - {} < 3",
            dims.m, dims.n
        )));
    }
    let xp = &input.xp;
    if input.f.source != xp.total {
        return Err(Error::InvalidInput("F is not defined on X x I".into()));
    }
    for (layer, want) in [(&xp.bottom, Rational::zero()), (&xp.top, Rational::one())] {
        if layer
            .vertex_set()
            .iter()
            .any(|&v| input.f.height(v) != &want)
        {
            return Err(Error::InvalidInput(format!(
                "F does not send X x {want} into Q x {want}"
            )));
        }
    }
    if let HomotopyMode::Eps { eps } = &cfg.mode {
        let bound = eps * eps / int(4);
        for s in xp.base.simplexes() {
            let vs = s.vertices();
            for (i, &a) in vs.iter().enumerate() {
                for &b in &vs[i + 1..] {
                    if dist2(xp.base.coords(a), xp.base.coords(b)) >= bound {
                        return Err(Error::InvalidInput(format!(
                            "mesh of X is not below eps/2 on {s:?}"
                        )));
                    }
                }
            }
        }
    }
    let mut opts = PerturbOptions::new(cfg.perturb_magnitude.clone(), cfg.seed);
    opts.budget = cfg.retry_budget;
    let f = perturb_general_position(&input.f, &input.qp, dims, &opts)?;
    let gp = check_general_position(&f, dims);
    let part = &input.partition;
    match &cfg.mode {
        HomotopyMode::Link => {
            let v = is_link_map(&f, &lift_partition(xp, part)?);
            if !v.holds {
                return Err(Error::InvalidInput(format!(
                    "F is not a link map: {:?}",
                    v.witness
                )));
            }
        }
        HomotopyMode::Doodle { l } => {
            let v = is_doodle(&f, &lift_partition(xp, part)?, *l);
            if !v.holds {
                return Err(Error::InvalidInput(format!(
                    "F is not a doodle: {:?}",
                    v.witness
                )));
            }
        }
        HomotopyMode::Eps { .. } => {}
    }
    let labels = lift_labels(xp, part);
    let mode = cfg.mode.shadow_mode();
    let sunny = sunny_collapse(xp, &f, &labels, dims, &mode)?;
    let stable = stabilize(
        &sunny.map,
        &sunny.labels,
        &sunny.seq,
        &mode,
        &cfg.shift_constant,
    )?;
    let h = collapse_to_deformation(&stable.seq, &stable.lag.derived.result)?;
    let phi = level_shift(&f, xp, h, part.labels()).time_reversed();
    let vopts = VerifyOptions {
        samples: cfg.verify_samples,
        seed: cfg.seed,
        host_map: Some((&stable.map, &stable.labels)),
    };
    let report = verify_level_map(&phi, &cfg.mode, &vopts)?;
    Ok(PipelineOutput {
        f,
        gp,
        sunny,
        stable,
        phi,
        report,
    })
}

pub fn lift_partition(xp: &ProductComplex, part: &Partition) -> Result<Partition> {
    Partition::new(&xp.total, lift_labels(xp, part))
}
