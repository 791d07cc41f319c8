//! Problem files and the built-in examples.

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{staircase_product, Complex, ComplexFile, Partition, ProductComplex, Simplex};
use crate::error::{Error, Result};
use crate::homotopy::{HomotopyMode, PipelineInput};
use crate::maps::{PlMap, SimplicialMap};
use crate::rational::{format_rational, int, parse_rational, rat, Point};

pub const EXAMPLES: [&str; 4] = [
    "two-points-3cube",
    "two-circles-4cube",
    "doodle-3arcs",
    "eps-embedding",
];

/// `X` (with component labels), `Q`, and `F: X x I -> Q x I` on staircase
/// products, either simplicial (`vertex_map` into `Q x I`) or by vertex images.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub x: ComplexFile,
    pub q: ComplexFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_map: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<HomotopyMode>,
}

impl ProblemFile {
    pub fn to_input(&self) -> Result<PipelineInput> {
        let x = self.x.to_complex()?;
        let q = self.q.to_complex()?;
        let partition = match &self.x.labels {
            Some(_) => self.x.partition(&x)?,
            None => Partition::connected_components(&x),
        };
        let xp = staircase_product(&x)?;
        let qp = staircase_product(&q)?;
        let f = match (&self.vertex_map, &self.images) {
            (Some(vm), None) => {
                SimplicialMap::new(xp.total.clone(), qp.total.clone(), vm.clone())?.to_pl()
            }
            (None, Some(imgs)) => {
                let pts: Vec<Point> = imgs
                    .iter()
                    .map(|p| {
                        p.iter()
                            .map(|s| parse_rational(s).map_err(Error::Parse))
                            .collect()
                    })
                    .collect::<Result<_>>()?;
                if pts.iter().any(|p| p.len() != qp.total.ambient_dim()) {
                    return Err(Error::InvalidInput(
                        "image dimension differs from Q x I".into(),
                    ));
                }
                PlMap::new(xp.total.clone(), pts)?
            }
            _ => {
                return Err(Error::InvalidInput(
                    "give exactly one of vertex_map and images".into(),
                ))
            }
        };
        Ok(PipelineInput {
            xp,
            qp,
            f,
            partition,
        })
    }

    pub fn from_input(input: &PipelineInput, mode: Option<HomotopyMode>) -> ProblemFile {
        ProblemFile {
            x: ComplexFile::from_complex(&input.xp.base, Some(&input.partition)),
            q: ComplexFile::from_complex(&input.qp.base, None),
            vertex_map: None,
            images: Some(
                input
                    .f
                    .images
                    .iter()
                    .map(|p| p.iter().map(format_rational).collect())
                    .collect(),
            ),
            mode,
        }
    }
}

/// Kuhn triangulation of `[0, side]^d` by unit cubes; vertex `(c_0, ..., c_{d-1})`
/// has index `sum c_i (side + 1)^i`.
pub fn kuhn_cube(d: usize, side: usize) -> Result<Complex> {
    let n = side + 1;
    let total = n.pow(d as u32);
    let coord = |mut v: usize| -> Vec<usize> {
        (0..d)
            .map(|_| {
                let c = v % n;
                v /= n;
                c
            })
            .collect()
    };
    let index = |c: &[usize]| c.iter().rev().fold(0, |acc, &x| acc * n + x);
    let verts: Vec<Point> = (0..total)
        .map(|v| coord(v).iter().map(|&c| int(c as i64)).collect())
        .collect();
    let mut facets = Vec::new();
    for v in 0..total {
        let c = coord(v);
        if c.iter().any(|&x| x == side) {
            continue;
        }
        for perm in permutations(d) {
            let mut cur = c.clone();
            let mut simplex = vec![index(&cur)];
            for &i in &perm {
                cur[i] += 1;
                simplex.push(index(&cur));
            }
            facets.push(simplex);
        }
    }
    Complex::build(verts, &facets)
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    if d == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(d - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, d - 1);
            out.push(q);
        }
    }
    out
}

/// Points `0, 1, ..., k-1` on a line, each its own component.
fn points(k: usize) -> Result<Complex> {
    Complex::build(
        (0..k).map(|i| vec![int(i as i64)]).collect(),
        &(0..k).map(|i| vec![i]).collect::<Vec<_>>(),
    )
}

/// Random chain `q_0 < q_1 < ... < q_k` of Kuhn-adjacent vertices of `q`.
fn monotone_chain(q: &Complex, k: usize, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    let edges: Vec<&Simplex> = q.simplexes().iter().filter(|s| s.len() == 2).collect();
    let up = |v: usize| -> Vec<usize> {
        edges
            .iter()
            .filter(|e| e.vertices()[0] == v)
            .map(|e| e.vertices()[1])
            .collect()
    };
    for _ in 0..64 {
        let mut chain = vec![rng.gen_range(0..q.num_vertices())];
        while chain.len() <= k {
            let nexts = up(*chain.last().expect("chain"));
            let Some(&n) = nexts.choose(rng) else { break };
            chain.push(n);
        }
        if chain.len() == k + 1 {
            return Some(chain);
        }
    }
    None
}

/// Arcs `(q_i, 0) -> (q_{i+1}, 1)`: consecutive arcs meet `q_{i+1}` at
/// different heights, so `P o F` is singular there and perturbation is needed.
fn braided_arcs(k: usize, seed: u64) -> Result<PipelineInput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = kuhn_cube(3, 3)?;
    let chain = monotone_chain(&q, k, &mut rng)
        .ok_or_else(|| Error::Internal("no monotone chain".into()))?;
    let x = points(k)?;
    let xp = staircase_product(&x)?;
    let qp = staircase_product(&q)?;
    let mut vm = vec![0; xp.total.num_vertices()];
    for i in 0..k {
        vm[xp.lift(i, 0)] = qp.lift(chain[i], 0);
        vm[xp.lift(i, 1)] = qp.lift(chain[i + 1], 1);
    }
    let f = SimplicialMap::new(xp.total.clone(), qp.total.clone(), vm)?.to_pl();
    let partition = Partition::connected_components(&x);
    Ok(PipelineInput {
        xp,
        qp,
        f,
        partition,
    })
}

/// Two triangle-boundary circles in `[0,1]^4`, one bottom vertex of the
/// first and one top vertex of the second sharing their `Q`-image.
fn two_circles() -> Result<PipelineInput> {
    let x = Complex::build(
        vec![
            vec![int(0), int(0)],
            vec![int(1), int(0)],
            vec![int(0), int(1)],
            vec![int(3), int(0)],
            vec![int(4), int(0)],
            vec![int(3), int(1)],
        ],
        &[
            vec![0, 1],
            vec![1, 2],
            vec![0, 2],
            vec![3, 4],
            vec![4, 5],
            vec![3, 5],
        ],
    )?;
    let xp = staircase_product(&x)?;
    let q = kuhn_cube(4, 1)?;
    let qp = staircase_product(&q)?;
    let circle = [
        [rat(1, 2), rat(1, 2)],
        [rat(3, 4), rat(1, 2)],
        [rat(1, 2), rat(3, 4)],
    ];
    let circle_b = [
        [rat(1, 2), rat(1, 2)],
        [rat(1, 4), rat(1, 2)],
        [rat(1, 2), rat(1, 4)],
    ];
    // first coordinate: at most 1/2 on the first annulus, at least 1/2 on the
    // second, equality only at the two matched vertices
    let first = [
        [rat(1, 2), rat(3, 8)],
        [rat(1, 4), rat(1, 8)],
        [rat(5, 16), rat(3, 16)],
    ];
    let first_b = [
        [rat(5, 8), rat(1, 2)],
        [rat(3, 4), rat(7, 8)],
        [rat(11, 16), rat(13, 16)],
    ];
    let mut images = vec![Vec::new(); xp.total.num_vertices()];
    for layer in 0..2 {
        let t = int(layer as i64);
        for i in 0..3 {
            let mut a = vec![
                first[i][layer].clone(),
                circle[i][0].clone(),
                circle[i][1].clone(),
            ];
            a.push(rat(1, 4) + &t / int(4));
            a.push(t.clone());
            images[xp.lift(i, layer)] = a;
            let mut b = vec![
                first_b[i][layer].clone(),
                circle_b[i][0].clone(),
                circle_b[i][1].clone(),
            ];
            b.push(&t / int(4));
            b.push(t.clone());
            images[xp.lift(i + 3, layer)] = b;
        }
    }
    let f = PlMap::new(xp.total.clone(), images)?;
    let partition = Partition::connected_components(&x);
    Ok(PipelineInput {
        xp,
        qp,
        f,
        partition,
    })
}

/// The named example for `seed`, with its natural mode.
pub fn generate(name: &str, seed: u64) -> Result<(PipelineInput, HomotopyMode)> {
    match name {
        "two-points-3cube" => Ok((braided_arcs(2, seed)?, HomotopyMode::Link)),
        "doodle-3arcs" => Ok((braided_arcs(3, seed)?, HomotopyMode::Doodle { l: 3 })),
        "eps-embedding" => Ok((braided_arcs(2, seed)?, HomotopyMode::Eps { eps: rat(1, 4) })),
        "two-circles-4cube" => Ok((two_circles()?, HomotopyMode::Link)),
        _ => Err(Error::UnknownExample(name.to_string())),
    }
}

/// `F` has no vertical degeneracy: `F(X x 0)` at height 0 and `F(X x 1)` at 1.
pub fn boundary_levels_ok(xp: &ProductComplex, f: &PlMap) -> bool {
    xp.bottom
        .vertex_set()
        .iter()
        .all(|&v| f.height(v).is_zero())
        && xp.top.vertex_set().iter().all(|&v| f.height(v).is_one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{check_general_position, is_doodle, is_link_map, singular_set};

    #[test]
    fn kuhn_counts() {
        assert_eq!(kuhn_cube(3, 3).unwrap().count_dim(3), 162);
        assert_eq!(kuhn_cube(4, 1).unwrap().count_dim(4), 24);
        assert!(kuhn_cube(2, 2).unwrap().check_disjoint_interiors().is_ok());
    }

    #[test]
    fn generated_examples_are_deterministic_and_well_formed() {
        for name in EXAMPLES {
            let (a, _) = generate(name, 42).unwrap();
            let (b, _) = generate(name, 42).unwrap();
            assert_eq!(a.f, b.f);
            assert!(boundary_levels_ok(&a.xp, &a.f), "{name}");
        }
        assert!(matches!(generate("nope", 1), Err(Error::UnknownExample(_))));
    }

    #[test]
    fn braided_arcs_need_perturbation() {
        let (inp, _) = generate("two-points-3cube", 42).unwrap();
        let dims = crate::maps::Dims { n: 0, m: 3 };
        assert!(!check_general_position(&inp.f, dims).ok());
        let lp = crate::homotopy::lift_partition(&inp.xp, &inp.partition).unwrap();
        assert!(is_link_map(&inp.f, &lp).holds);
        let (inp, _) = generate("doodle-3arcs", 7).unwrap();
        let lp = crate::homotopy::lift_partition(&inp.xp, &inp.partition).unwrap();
        assert!(is_doodle(&inp.f, &lp, 3).holds);
    }

    #[test]
    fn two_circles_have_one_coincidence() {
        let (inp, _) = generate("two-circles-4cube", 0).unwrap();
        let s = singular_set(&inp.f.horizontal());
        let u = inp.xp.lift(0, 0);
        let w = inp.xp.lift(3, 1);
        assert_eq!(
            s.simplexes,
            [Simplex::vertex(u), Simplex::vertex(w)]
                .into_iter()
                .collect()
        );
        assert!(check_general_position(&inp.f, crate::maps::Dims { n: 1, m: 4 }).ok());
        let lp = crate::homotopy::lift_partition(&inp.xp, &inp.partition).unwrap();
        assert!(is_link_map(&inp.f, &lp).holds);
    }

    #[test]
    fn problem_file_roundtrip() {
        let (inp, mode) = generate("two-circles-4cube", 0).unwrap();
        let pf = ProblemFile::from_input(&inp, Some(mode));
        let text = serde_json::to_string(&pf).unwrap();
        let back: ProblemFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_input().unwrap().f, inp.f);
    }
}
