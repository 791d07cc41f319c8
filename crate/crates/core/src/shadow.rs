//! Exact overshadowing decisions between simplexes of the source of a map
//! into `Q x I`, and sunny / stable sunny certificates for collapse steps.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::complex::{Simplex, Subcomplex};
use crate::error::{Error, Result};
use crate::fiber::{bbox, boxes_meet, fiber_program, FiberProgram};
use crate::lp::LpOutcome;
use crate::maps::PlMap;
use crate::rational::{serde_rat, Point, PointPair, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShadowMode {
    Plain,
    Link,
    Eps {
        #[serde(with = "serde_rat")]
        eps: Rational,
    },
}

impl ShadowMode {
    pub fn name(&self) -> &'static str {
        match self {
            ShadowMode::Plain => "plain",
            ShadowMode::Link => "link",
            ShadowMode::Eps { .. } => "eps",
        }
    }
}

/// A decided instance of "A overshadows B".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OvershadowFact {
    pub a: Simplex,
    pub b: Simplex,
    pub mode: ShadowMode,
    /// Whether `B` is taken as an open simplex.
    #[serde(default)]
    pub open_b: bool,
    pub verdict: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<PointPair>,
}

/// The map, the component label of each source vertex, and the mode.
pub struct ShadowContext<'a> {
    pub f: &'a PlMap,
    pub labels: &'a [usize],
    pub mode: ShadowMode,
    /// Number of leading source coordinates forming `X` (the `p` projection).
    pub x_dim: usize,
}

impl<'a> ShadowContext<'a> {
    pub fn new(f: &'a PlMap, labels: &'a [usize], mode: ShadowMode) -> ShadowContext<'a> {
        let x_dim = f.source.ambient_dim() - 1;
        ShadowContext {
            f,
            labels,
            mode,
            x_dim,
        }
    }

    fn label(&self, s: &Simplex) -> usize {
        self.labels[s.vertices()[0]]
    }

    /// Cheap exact necessary condition for `A` to overshadow `B`.
    pub fn may_overshadow(&self, a: &Simplex, b: &Simplex) -> bool {
        if self.mode == ShadowMode::Link && self.label(a) == self.label(b) {
            return false;
        }
        let q = self.f.target_dim - 1;
        let ia = self.f.simplex_images(a);
        let ib = self.f.simplex_images(b);
        let top_a = ia.iter().map(|p| &p[q]).max().expect("nonempty");
        let low_b = ib.iter().map(|p| &p[q]).min().expect("nonempty");
        if top_a <= low_b {
            return false;
        }
        let ha: Vec<Point> = ia.iter().map(|p| p[..q].to_vec()).collect();
        let hb: Vec<Point> = ib.iter().map(|p| p[..q].to_vec()).collect();
        boxes_meet(
            &bbox(&ha.iter().collect::<Vec<_>>()),
            &bbox(&hb.iter().collect::<Vec<_>>()),
        )
    }

    /// Decides whether some `a` in `A` lies strictly above some `b` in `B`
    /// (open `B` when `open_b`) under the mode's side conditions.
    pub fn overshadows(&self, a: &Simplex, b: &Simplex, open_b: bool) -> OvershadowFact {
        let mut fact = OvershadowFact {
            a: a.clone(),
            b: b.clone(),
            mode: self.mode.clone(),
            open_b,
            verdict: false,
            witness: None,
        };
        if self.mode == ShadowMode::Link && self.label(a) == self.label(b) {
            return fact;
        }
        let sides: Vec<Option<(usize, bool)>> = match &self.mode {
            ShadowMode::Eps { .. } => (0..self.x_dim)
                .flat_map(|k| [Some((k, true)), Some((k, false))])
                .collect(),
            _ => vec![None],
        };
        for side in sides {
            if let Some((wa, wb)) = self.solve(a, b, open_b, side) {
                let pa = self.f.source.point_in(a, &wa);
                let pb = self.f.source.point_in(b, &wb);
                fact.verdict = true;
                fact.witness = Some(PointPair {
                    first: pa,
                    second: pb,
                });
                break;
            }
        }
        fact
    }

    fn solve(
        &self,
        a: &Simplex,
        b: &Simplex,
        open_b: bool,
        side: Option<(usize, bool)>,
    ) -> Option<(Vec<Rational>, Vec<Rational>)> {
        let f = self.f;
        let q = f.target_dim - 1;
        let ha: Vec<Point> = f
            .simplex_images(a)
            .iter()
            .map(|p| p[..q].to_vec())
            .collect();
        let hb: Vec<Point> = f
            .simplex_images(b)
            .iter()
            .map(|p| p[..q].to_vec())
            .collect();
        let mut fp: FiberProgram =
            fiber_program(&[ha.iter().collect(), hb.iter().collect()], open_b);
        let n = fp.lp.num_vars();
        let mut gap = vec![Rational::zero(); n];
        for (i, &v) in a.vertices().iter().enumerate() {
            gap[fp.blocks[0].start + i] = f.height(v).clone();
        }
        for (j, &v) in b.vertices().iter().enumerate() {
            gap[fp.blocks[1].start + j] = -f.height(v).clone();
        }
        if let Some((k, positive)) = side {
            let ShadowMode::Eps { eps } = &self.mode else {
                unreachable!()
            };
            let sign = if positive {
                Rational::one()
            } else {
                -Rational::one()
            };
            let mut row = vec![Rational::zero(); n];
            for (i, &v) in a.vertices().iter().enumerate() {
                row[fp.blocks[0].start + i] = &sign * &f.source.coords(v)[k];
            }
            for (j, &v) in b.vertices().iter().enumerate() {
                row[fp.blocks[1].start + j] = -&sign * &f.source.coords(v)[k];
            }
            fp.lp.add_ge(row, eps.clone());
        }
        if let Some(s) = fp.slack {
            // maximize s subject to gap >= s and beta_j >= s
            fp.strict_block(1);
            let mut row = gap.clone();
            row[s] = -Rational::one();
            fp.lp.add_ge(row, Rational::zero());
            let mut obj = vec![Rational::zero(); n];
            obj[s] = Rational::one();
            fp.lp.set_objective(obj);
        } else {
            fp.lp.set_objective(gap);
        }
        match fp.lp.maximize() {
            LpOutcome::Optimal { value, x } if value.is_positive() => {
                Some((fp.weights(&x, 0), fp.weights(&x, 1)))
            }
            _ => None,
        }
    }
}

/// Combinatorial interior of `w` inside the full complex: simplexes of `w`
/// all of whose cofaces in `all` also lie in `w`.
pub fn interior(all: &BTreeSet<Simplex>, w: &Subcomplex) -> BTreeSet<Simplex> {
    let mut outside_coface: BTreeSet<Simplex> = BTreeSet::new();
    for t in all {
        if !w.contains(t) {
            for f in t.faces() {
                outside_coface.insert(f);
            }
        }
    }
    w.iter()
        .filter(|s| !outside_coface.contains(*s))
        .cloned()
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SunnyCertificate {
    pub mode: ShadowMode,
    pub stable: bool,
    /// Pairs that survived the exact prefilter and were decided by LP.
    pub checked_pairs: Vec<OvershadowFact>,
    pub verdict: bool,
}

impl SunnyCertificate {
    pub fn first_violation(&self) -> Option<&OvershadowFact> {
        self.checked_pairs.iter().find(|f| f.verdict)
    }
}

/// The simplexes `B` that must not be overshadowed by `V` for `V -> W` to be
/// sunny (open simplexes of `V \ W`) or stable sunny (closed maximal simplexes
/// of `V \ Int W`), together with whether they are taken open.
pub fn exposed_targets(
    all: &BTreeSet<Simplex>,
    v: &Subcomplex,
    w: &Subcomplex,
    stable: bool,
) -> (Vec<Simplex>, bool) {
    if stable {
        let int_w = interior(all, w);
        let rest: BTreeSet<Simplex> = v.iter().filter(|s| !int_w.contains(*s)).cloned().collect();
        (crate::complex::maximal_simplexes(&rest), false)
    } else {
        (v.iter().filter(|s| !w.contains(s)).cloned().collect(), true)
    }
}

/// Certifies `V -> W` as (stable) sunny in the context's mode.
pub fn certify_step(
    ctx: &ShadowContext,
    v: &Subcomplex,
    w: &Subcomplex,
    stable: bool,
) -> Result<SunnyCertificate> {
    if !w.is_subset_of(v) {
        return Err(Error::NotSubcomplexPair(
            "W contains simplexes outside V".into(),
        ));
    }
    if !v.is_closed() || !w.is_closed() {
        return Err(Error::NotSubcomplexPair(
            "V or W is not closed under faces".into(),
        ));
    }
    let (targets, open_b) = exposed_targets(ctx.f.source.simplexes(), v, w, stable);
    let sources = v.facets();
    let mut checked = Vec::new();
    let mut verdict = true;
    for b in &targets {
        for a in &sources {
            if !ctx.may_overshadow(a, b) {
                continue;
            }
            let fact = ctx.overshadows(a, b, open_b);
            verdict &= !fact.verdict;
            checked.push(fact);
        }
    }
    Ok(SunnyCertificate {
        mode: ctx.mode.clone(),
        stable,
        checked_pairs: checked,
        verdict,
    })
}

/// Orders `simplexes` so that overshadowing ones precede overshadowed ones,
/// preserving input order where unconstrained.
pub fn overshadow_order(ctx: &ShadowContext, simplexes: &[Simplex]) -> Result<Vec<Simplex>> {
    let n = simplexes.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if i != j
                && ctx.may_overshadow(&simplexes[i], &simplexes[j])
                && ctx.overshadows(&simplexes[i], &simplexes[j], false).verdict
            {
                succ[i].push(j);
                indeg[j] += 1;
            }
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut out = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        out.push(simplexes[i].clone());
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.insert(j);
            }
        }
    }
    if out.len() == n {
        return Ok(out);
    }
    Err(Error::OvershadowCycle(
        find_cycle(&succ, &indeg)
            .into_iter()
            .map(|i| simplexes[i].clone())
            .collect(),
    ))
}

fn find_cycle(succ: &[Vec<usize>], indeg: &[usize]) -> Vec<usize> {
    // Every remaining node has a remaining predecessor; walk predecessors.
    let n = succ.len();
    let mut pred: HashMap<usize, usize> = HashMap::new();
    for i in 0..n {
        for &j in &succ[i] {
            if indeg[i] > 0 && indeg[j] > 0 {
                pred.entry(j).or_insert(i);
            }
        }
    }
    let start = (0..n).find(|&i| indeg[i] > 0).expect("cycle exists");
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    let mut path = Vec::new();
    let mut cur = start;
    while !seen.contains_key(&cur) {
        seen.insert(cur, path.len());
        path.push(cur);
        cur = pred[&cur];
    }
    let mut cycle = path[seen[&cur]..].to_vec();
    cycle.reverse();
    cycle
}

/// Re-evaluates a witness: equal `Q`-projections and strictly ordered heights.
pub fn witness_is_sound(f: &PlMap, fact: &OvershadowFact) -> bool {
    let Some(w) = &fact.witness else {
        return !fact.verdict;
    };
    let (Ok(fa), Ok(fb)) = (f.evaluate(&w.first), f.evaluate(&w.second)) else {
        return false;
    };
    let q = f.target_dim - 1;
    fa[..q] == fb[..q] && fa[q] > fb[q]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Complex;
    use crate::rational::{int, point, rat};

    /// Source: two vertical edges over x = 0 and x = 1 (in X x I coordinates),
    /// with given images in Q x I = R^1 x I.
    fn two_edges(images: [[i64; 2]; 4], eps: Option<Rational>) -> (PlMap, Vec<usize>, ShadowMode) {
        let src = Complex::build(
            vec![
                point(&[0, 0]),
                point(&[0, 1]),
                point(&[1, 0]),
                point(&[1, 1]),
            ],
            &[vec![0, 1], vec![2, 3]],
        )
        .unwrap();
        let f = PlMap::new(src, images.iter().map(|r| point(r)).collect()).unwrap();
        let mode = eps.map_or(ShadowMode::Plain, |eps| ShadowMode::Eps { eps });
        (f, vec![0, 0, 1, 1], mode)
    }

    #[test]
    fn stacked_vertices() {
        let src = Complex::build(vec![point(&[0]), point(&[1])], &[vec![0], vec![1]]).unwrap();
        let f = PlMap::new(src, vec![vec![int(2), rat(3, 4)], vec![int(2), rat(1, 4)]]).unwrap();
        let labels = [0, 1];
        let ctx = ShadowContext::new(&f, &labels, ShadowMode::Plain);
        let ab = ctx.overshadows(&Simplex::vertex(0), &Simplex::vertex(1), false);
        assert!(ab.verdict && witness_is_sound(&f, &ab));
        assert!(
            !ctx.overshadows(&Simplex::vertex(1), &Simplex::vertex(0), false)
                .verdict
        );
    }

    #[test]
    fn disjoint_images() {
        let (f, l, m) = two_edges([[0, 0], [1, 1], [5, 0], [6, 1]], None);
        let ctx = ShadowContext::new(&f, &l, m);
        let e0 = Simplex::new(vec![0, 1]);
        let e1 = Simplex::new(vec![2, 3]);
        assert!(!ctx.overshadows(&e0, &e1, false).verdict);
        assert!(!ctx.overshadows(&e1, &e0, false).verdict);
    }

    #[test]
    fn crossing_diagonals() {
        // F(A) = (q0,0)-(q1,1), F(B) = (q0,1)-(q1,0)
        let (f, l, m) = two_edges([[0, 0], [1, 1], [0, 1], [1, 0]], None);
        let ctx = ShadowContext::new(&f, &l, m);
        let a = Simplex::new(vec![0, 1]);
        let b = Simplex::new(vec![2, 3]);
        let ab = ctx.overshadows(&a, &b, false);
        let ba = ctx.overshadows(&b, &a, false);
        assert!(ab.verdict && ba.verdict);
        assert!(witness_is_sound(&f, &ab) && witness_is_sound(&f, &ba));
        match overshadow_order(&ctx, &[a.clone(), b.clone()]) {
            Err(Error::OvershadowCycle(c)) => assert_eq!(c.len(), 2),
            other => panic!("expected a cycle, got {other:?}"),
        }
    }

    #[test]
    fn stack_order() {
        let src = Complex::build(
            vec![point(&[0]), point(&[1]), point(&[2])],
            &[vec![0], vec![1], vec![2]],
        )
        .unwrap();
        let f = PlMap::new(src, vec![point(&[0, 1]), point(&[0, 3]), point(&[0, 2])]).unwrap();
        let labels = [0, 1, 2];
        let ctx = ShadowContext::new(&f, &labels, ShadowMode::Plain);
        let vs: Vec<Simplex> = (0..3).map(Simplex::vertex).collect();
        let order = overshadow_order(&ctx, &vs).unwrap();
        assert_eq!(
            order,
            vec![Simplex::vertex(1), Simplex::vertex(2), Simplex::vertex(0)]
        );
        let g = PlMap::new(
            f.source.clone(),
            vec![point(&[0, 1]), point(&[1, 3]), point(&[2, 2])],
        )
        .unwrap();
        let ctx = ShadowContext::new(&g, &labels, ShadowMode::Plain);
        assert_eq!(overshadow_order(&ctx, &vs).unwrap(), vs);
    }

    #[test]
    fn link_mode_ignores_own_component() {
        let (f, _, _) = two_edges([[0, 0], [1, 1], [0, 1], [1, 0]], None);
        let same = [0, 0, 0, 0];
        let ctx = ShadowContext::new(&f, &same, ShadowMode::Link);
        assert!(
            !ctx.overshadows(&Simplex::new(vec![0, 1]), &Simplex::new(vec![2, 3]), false)
                .verdict
        );
    }

    #[test]
    fn eps_mode_needs_separation() {
        let (f, l, _) = two_edges([[0, 0], [1, 1], [0, 1], [1, 0]], None);
        let a = Simplex::new(vec![0, 1]);
        let b = Simplex::new(vec![2, 3]);
        let near = ShadowContext::new(&f, &l, ShadowMode::Eps { eps: rat(1, 2) });
        assert!(near.overshadows(&a, &b, false).verdict);
        let far = ShadowContext::new(&f, &l, ShadowMode::Eps { eps: int(2) });
        assert!(!far.overshadows(&a, &b, false).verdict);
    }

    #[test]
    fn certificates_on_two_points() {
        // two points of X over one Q-point: x0 x I rises to height 1, x1 x I is
        // the lower arc reaching only height 1/2 at the same Q-point.
        let src = Complex::build(
            vec![
                point(&[0, 0]),
                point(&[0, 1]),
                point(&[1, 0]),
                point(&[1, 1]),
            ],
            &[vec![0, 1], vec![2, 3]],
        )
        .unwrap();
        let f = PlMap::new(
            src.clone(),
            vec![
                point(&[0, 0]),
                vec![int(1), int(1)],
                point(&[2, 0]),
                vec![int(1), rat(1, 2)],
            ],
        )
        .unwrap();
        let labels = [0, 0, 1, 1];
        let ctx = ShadowContext::new(&f, &labels, ShadowMode::Plain);
        let all = src.as_subcomplex();
        let upper_gone = Subcomplex::closure([&Simplex::new(vec![2, 3]), &Simplex::vertex(0)]);
        let lower_gone = Subcomplex::closure([&Simplex::new(vec![0, 1]), &Simplex::vertex(2)]);
        assert!(
            certify_step(&ctx, &all, &upper_gone, false)
                .unwrap()
                .verdict
        );
        let bad = certify_step(&ctx, &all, &lower_gone, false).unwrap();
        assert!(!bad.verdict && witness_is_sound(&f, bad.first_violation().unwrap()));
        assert!(certify_step(&ctx, &all, &all, false).unwrap().verdict);
        assert!(certify_step(&ctx, &upper_gone, &all, false).is_err());
    }

    #[test]
    fn interior_of_half_path() {
        let k = Complex::build(
            vec![point(&[0]), point(&[1]), point(&[2])],
            &[vec![0, 1], vec![1, 2]],
        )
        .unwrap();
        let w = Subcomplex::closure([&Simplex::new(vec![0, 1])]);
        let int = interior(k.simplexes(), &w);
        assert_eq!(
            int,
            [Simplex::vertex(0), Simplex::new(vec![0, 1])]
                .into_iter()
                .collect()
        );
    }
}
