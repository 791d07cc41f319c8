//! Elementary collapses: replay verification, restricted greedy collapsing,
//! cylindrical collapses of staircase prisms, neighbourhood collapses in second
//! derived subdivisions, and the stabilization of sunny collapses.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::complex::{Complex, ProductComplex, Simplex, Subcomplex};
use crate::error::{Error, Result};
use crate::maps::PlMap;
use crate::rational::Rational;
use crate::shadow::{certify_step, ShadowContext, ShadowMode, SunnyCertificate};
use crate::subdivide::{
    derived_neighborhood, lagging_second_derived, DerivedComplex, LaggingDerived,
};

/// Removal of `coface` together with its free face `free_face`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ElementaryStep {
    pub coface: Simplex,
    pub free_face: Simplex,
}

/// A run of steps forming one simple collapse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub label: String,
    /// One past the index of the last step of the group.
    pub end: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<SunnyCertificate>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollapseSequence {
    pub from: Subcomplex,
    pub to: Subcomplex,
    pub steps: Vec<ElementaryStep>,
    pub groups: Vec<Group>,
}

impl CollapseSequence {
    pub fn empty(from: Subcomplex) -> CollapseSequence {
        CollapseSequence {
            to: from.clone(),
            from,
            steps: Vec::new(),
            groups: Vec::new(),
        }
    }

    /// Appends `steps` as one group and advances `to`.
    pub fn push_group(&mut self, label: &str, steps: Vec<ElementaryStep>) {
        for s in &steps {
            self.to.simplexes.remove(&s.coface);
            self.to.simplexes.remove(&s.free_face);
        }
        self.steps.extend(steps);
        self.groups.push(Group {
            label: label.to_string(),
            end: self.steps.len(),
            certificate: None,
        });
    }

    pub fn group_range(&self, g: usize) -> std::ops::Range<usize> {
        let start = if g == 0 { 0 } else { self.groups[g - 1].end };
        start..self.groups[g].end
    }

    /// `K_0 = from, K_1, ..., K_m = to` at the group boundaries.
    pub fn stages(&self) -> Vec<Subcomplex> {
        let mut cur = self.from.clone();
        let mut out = vec![cur.clone()];
        for g in 0..self.groups.len() {
            for s in &self.steps[self.group_range(g)] {
                cur.simplexes.remove(&s.coface);
                cur.simplexes.remove(&s.free_face);
            }
            out.push(cur.clone());
        }
        out
    }
}

/// A complex under collapse, with codimension-one coface sets.
#[derive(Clone, Debug)]
pub struct CollapseState {
    current: BTreeSet<Simplex>,
    up: HashMap<Simplex, BTreeSet<Simplex>>,
}

impl CollapseState {
    pub fn new(simplexes: &BTreeSet<Simplex>) -> CollapseState {
        let mut up: HashMap<Simplex, BTreeSet<Simplex>> = simplexes
            .iter()
            .map(|s| (s.clone(), BTreeSet::new()))
            .collect();
        for s in simplexes {
            for f in s.facets() {
                if let Some(set) = up.get_mut(&f) {
                    set.insert(s.clone());
                }
            }
        }
        CollapseState {
            current: simplexes.clone(),
            up,
        }
    }

    pub fn current(&self) -> &BTreeSet<Simplex> {
        &self.current
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.current.contains(s)
    }

    /// The unique proper coface of `tau`, when `tau` is free.
    pub fn free_coface(&self, tau: &Simplex) -> Option<&Simplex> {
        let up = self.up.get(tau)?;
        if up.len() != 1 {
            return None;
        }
        let sigma = up.iter().next().expect("one coface");
        self.up[sigma].is_empty().then_some(sigma)
    }

    pub fn check(&self, step: &ElementaryStep) -> std::result::Result<(), String> {
        if !self.current.contains(&step.coface) {
            return Err(format!("coface {:?} not present", step.coface));
        }
        if !self.current.contains(&step.free_face) {
            return Err(format!("face {:?} not present", step.free_face));
        }
        if step.free_face.len() + 1 != step.coface.len() || !step.free_face.is_face_of(&step.coface)
        {
            return Err(format!(
                "{:?} is not a facet of {:?}",
                step.free_face, step.coface
            ));
        }
        match self.free_coface(&step.free_face) {
            Some(s) if s == &step.coface => Ok(()),
            _ => Err(format!(
                "{:?} is not a free face of {:?}",
                step.free_face, step.coface
            )),
        }
    }

    pub fn apply(&mut self, step: &ElementaryStep) -> std::result::Result<(), String> {
        self.check(step)?;
        for s in [&step.coface, &step.free_face] {
            self.current.remove(s);
            self.up.remove(s);
            for f in s.facets() {
                if let Some(set) = self.up.get_mut(&f) {
                    set.remove(s);
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollapseCheck {
    pub ok: bool,
    pub failed_step: Option<usize>,
    pub reason: Option<String>,
}

/// Replays `seq` from `from` and checks that it ends exactly at `to`.
pub fn verify_collapse(
    seq: &CollapseSequence,
    from: &Subcomplex,
    to: &Subcomplex,
) -> CollapseCheck {
    if !from.is_closed() {
        return CollapseCheck {
            ok: false,
            failed_step: None,
            reason: Some("start is not a complex".into()),
        };
    }
    let mut st = CollapseState::new(&from.simplexes);
    for (i, step) in seq.steps.iter().enumerate() {
        if let Err(e) = st.apply(step) {
            return CollapseCheck {
                ok: false,
                failed_step: Some(i),
                reason: Some(e),
            };
        }
    }
    if st.current() != &to.simplexes {
        return CollapseCheck {
            ok: false,
            failed_step: None,
            reason: Some("replay does not end at the target".into()),
        };
    }
    CollapseCheck {
        ok: true,
        failed_step: None,
        reason: None,
    }
}

/// Collapses away exactly the simplexes of `removable`, choosing at each step
/// the free pair with the largest key.
pub fn greedy_collapse<K: Ord>(
    st: &mut CollapseState,
    removable: &BTreeSet<Simplex>,
    key: impl Fn(&Simplex) -> K,
) -> Result<Vec<ElementaryStep>> {
    let mut left: BTreeSet<Simplex> = removable
        .iter()
        .filter(|s| st.contains(s))
        .cloned()
        .collect();
    let mut steps = Vec::new();
    while !left.is_empty() {
        let best = left
            .iter()
            .filter_map(|tau| {
                let sigma = st.free_coface(tau)?;
                left.contains(sigma).then(|| (sigma.clone(), tau.clone()))
            })
            .max_by(|(s1, t1), (s2, t2)| (key(s1), s1, t1).cmp(&(key(s2), s2, t2)));
        let Some((sigma, tau)) = best else {
            return Err(Error::CollapseStuck(format!(
                "{} simplexes left, none free; e.g. {:?}",
                left.len(),
                left.iter().next()
            )));
        };
        let step = ElementaryStep {
            coface: sigma,
            free_face: tau,
        };
        st.apply(&step).map_err(Error::Internal)?;
        left.remove(&step.coface);
        left.remove(&step.free_face);
        steps.push(step);
    }
    Ok(steps)
}

/// Priority favouring big simplexes high up in the last coordinate.
pub fn top_down_key(host: &Complex) -> impl Fn(&Simplex) -> (usize, Rational) + '_ {
    move |s: &Simplex| {
        let t: Rational = s
            .vertices()
            .iter()
            .map(|&v| host.coords(v).last().expect("coords").clone())
            .sum();
        (s.len(), t / Rational::from_integer((s.len() as i64).into()))
    }
}

/// `X x I -> X x 0 u Y x I`, clearing each prism over a simplex of `X \ Y`
/// from its top face down through the staircase.
pub fn cylindrical_collapse(xp: &ProductComplex, y: &Subcomplex) -> Result<CollapseSequence> {
    let from = xp.total.as_subcomplex();
    let mut seq = CollapseSequence::empty(from.clone());
    let mut removed: Vec<Simplex> = xp
        .base
        .simplexes()
        .iter()
        .filter(|s| !y.contains(s))
        .cloned()
        .collect();
    // top simplexes first so every top face is free when its prism is cleared
    removed.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    let mut st = CollapseState::new(&from.simplexes);
    let mut steps = Vec::new();
    for c in removed {
        let vs = c.vertices();
        let d = vs.len() - 1;
        let chain = |j: usize| -> Simplex {
            let mut v: Vec<usize> = vs[..=j].iter().map(|&x| xp.lift(x, 0)).collect();
            v.extend(vs[j..].iter().map(|&x| xp.lift(x, 1)));
            Simplex::new(v)
        };
        let top = Simplex::new(vs.iter().map(|&x| xp.lift(x, 1)).collect());
        let mut face = top;
        for j in 0..=d {
            let sigma = chain(j);
            let step = ElementaryStep {
                coface: sigma.clone(),
                free_face: face.clone(),
            };
            st.apply(&step)
                .map_err(|e| Error::Internal(format!("cylindrical collapse: {e}")))?;
            steps.push(step);
            if j < d {
                face = sigma.intersection(&chain(j + 1));
            }
        }
    }
    seq.push_group("cylindrical", steps);
    let target = xp.bottom.union(&xp.cylinder_over(y));
    if seq.to != target {
        return Err(Error::Internal(
            "cylindrical collapse missed its target".into(),
        ));
    }
    Ok(seq)
}

/// `N(V) -> N(W)` in the second derived subdivision, one original elementary
/// step at a time, following the three phases of the ball-to-face argument.
pub fn neighborhood_collapse(
    kpp: &DerivedComplex,
    seq: &CollapseSequence,
) -> Result<CollapseSequence> {
    let check = verify_collapse(seq, &seq.from, &seq.to);
    if !check.ok {
        return Err(Error::InvalidSourceCollapse(
            check.reason.unwrap_or_default(),
        ));
    }
    let k = &kpp.original;
    let nbhd = |l: &Subcomplex| derived_neighborhood(kpp, l);
    let from = nbhd(&seq.from)?;
    let mut out = CollapseSequence::empty(from.clone());
    let mut st = CollapseState::new(&from.simplexes);
    let mut v = seq.from.clone();
    let key = top_down_key(&kpp.result);
    let by_carrier = {
        let mut m: HashMap<&Simplex, Vec<&Simplex>> = HashMap::new();
        for (s, c) in &kpp.carrier {
            m.entry(c).or_default().push(s);
        }
        m
    };
    for g in 0..seq.groups.len() {
        let mut steps = Vec::new();
        for step in &seq.steps[seq.group_range(g)] {
            let (c, d) = (&step.coface, &step.free_face);
            let mut w = v.clone();
            w.simplexes.remove(c);
            w.simplexes.remove(d);
            let vpp = kpp.induced(&v);
            let mut wd = w.clone();
            wd.simplexes.insert(d.clone());
            let t1 = vpp.union(&nbhd(&wd)?);
            let t2 = vpp.union(&nbhd(&w)?);
            let t3 = nbhd(&w)?;
            let mut cofaces_c: Vec<&Simplex> = k
                .simplexes()
                .iter()
                .filter(|b| c.is_face_of(b) && *b != c)
                .collect();
            cofaces_c.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
            let mut cofaces_d: Vec<&Simplex> = k
                .simplexes()
                .iter()
                .filter(|b| d.is_face_of(b) && *b != d && *b != c)
                .collect();
            cofaces_d.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
            for (bs, target) in [(cofaces_c, &t1), (cofaces_d, &t2)] {
                for b in bs {
                    let rem: BTreeSet<Simplex> = by_carrier
                        .get(b)
                        .into_iter()
                        .flatten()
                        .filter(|s| st.contains(s) && !target.contains(s))
                        .map(|s| (*s).clone())
                        .collect();
                    steps.extend(greedy_collapse(&mut st, &rem, &key)?);
                }
                steps.extend(finish_phase(&mut st, target, &key)?);
            }
            steps.extend(finish_phase(&mut st, &t3, &key)?);
            v = w;
        }
        out.push_group(&seq.groups[g].label, steps);
    }
    let to = nbhd(&seq.to)?;
    if out.to != to {
        return Err(Error::Internal("neighbourhood collapse missed N(W)".into()));
    }
    Ok(out)
}

fn finish_phase<K: Ord>(
    st: &mut CollapseState,
    target: &Subcomplex,
    key: &impl Fn(&Simplex) -> K,
) -> Result<Vec<ElementaryStep>> {
    let rem: BTreeSet<Simplex> = st
        .current()
        .iter()
        .filter(|s| !target.contains(s))
        .cloned()
        .collect();
    greedy_collapse(st, &rem, key)
}

/// A stable collapse on the lagging second derived subdivision of the host.
#[derive(Clone, Debug)]
pub struct Stabilized {
    pub lag: LaggingDerived,
    pub map: PlMap,
    pub labels: Vec<usize>,
    pub seq: CollapseSequence,
}

/// Turns a (link-)sunny collapse `from -> to` of the host of `f` into a stable
/// one on `K''`: `N(K_0) -> N(K_1) -> ... -> N(K_m) -> K_m''`.
pub fn stabilize(
    f: &PlMap,
    labels: &[usize],
    seq: &CollapseSequence,
    mode: &ShadowMode,
    shift: &Rational,
) -> Result<Stabilized> {
    let lag = lagging_second_derived(f, shift)?;
    let kpp = lag.derived.clone();
    let kpp = &kpp;
    let mut out = neighborhood_collapse(kpp, seq)?;
    let bottom = kpp.induced(&seq.to);
    let key = top_down_key(&kpp.result);
    let mut st = CollapseState::new(&out.to.simplexes);
    let rem: BTreeSet<Simplex> = out
        .to
        .iter()
        .filter(|s| !bottom.contains(s))
        .cloned()
        .collect();
    let last = greedy_collapse(&mut st, &rem, &key)?;
    out.push_group("regular neighbourhood", last);
    let map = kpp.pull_map(f);
    let labels = kpp.pull_labels(labels);
    let ctx = ShadowContext::new(&map, &labels, mode.clone());
    certify_groups(&ctx, &mut out, true)
        .map_err(|e| Error::StabilizationCertificateFailed(e.to_string()))?;
    Ok(Stabilized {
        lag,
        map,
        labels,
        seq: out,
    })
}

/// Attaches a certificate to every group; fails on the first failing group.
pub fn certify_groups(ctx: &ShadowContext, seq: &mut CollapseSequence, stable: bool) -> Result<()> {
    let stages = seq.stages();
    for g in 0..seq.groups.len() {
        let cert = certify_step(ctx, &stages[g], &stages[g + 1], stable)?;
        let pass = cert.verdict;
        let first = cert.first_violation().cloned();
        seq.groups[g].certificate = Some(cert);
        if !pass {
            return Err(Error::SunnyCertificateFailed(format!(
                "group {g} ({}): {:?}",
                seq.groups[g].label, first
            )));
        }
    }
    Ok(())
}

/// Certifies every group without attaching, returning the verdicts.
pub fn group_verdicts(
    ctx: &ShadowContext,
    seq: &CollapseSequence,
    stable: bool,
) -> Result<Vec<bool>> {
    let stages = seq.stages();
    (0..seq.groups.len())
        .map(|g| certify_step(ctx, &stages[g], &stages[g + 1], stable).map(|c| c.verdict))
        .collect()
}

/// `lsh_F K_i` is contained in `K_{i+1}` for every consecutive pair of stages.
pub fn filtration_holds(ctx: &ShadowContext, seq: &CollapseSequence) -> Vec<bool> {
    let stages = seq.stages();
    let all = ctx.f.source.simplexes();
    stages
        .windows(2)
        .map(|w| {
            let sources = w[0].facets();
            all.iter().filter(|b| !w[1].contains(b)).all(|b| {
                sources
                    .iter()
                    .all(|a| !ctx.may_overshadow(a, b) || !ctx.overshadows(a, b, true).verdict)
            })
        })
        .collect()
}
