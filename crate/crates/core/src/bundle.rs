//! Self-contained output bundles and their independent re-verification.

use serde::{Deserialize, Serialize};

use crate::blister::{build_blisters, Blister};
use crate::collapse::{verify_collapse, CollapseSequence, ElementaryStep, Group};
use crate::complex::{Complex, ComplexFile, Subcomplex};
use crate::error::{Error, Result};
use crate::fixtures::ProblemFile;
use crate::homotopy::{
    collapse_to_deformation, level_shift, verify_level_map, PipelineInput, PipelineOutput,
    RunConfig, VerifyOptions, VerifyReport,
};
use crate::homotopy::{dims_of, lift_labels};
use crate::maps::{check_general_position, PlMap};
use crate::rational::{format_rational, parse_rational, Point};
use crate::shadow::{certify_step, ShadowContext, SunnyCertificate};
use crate::subdivide::lagging_second_derived;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GpFile {
    pub codim_ok: bool,
    pub nondegenerate_ok: bool,
    pub singular_facets: Vec<Vec<usize>>,
    pub offending: Vec<Vec<usize>>,
}

/// A collapse of a host complex carrying a PL map, with its certificates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseFile {
    pub host: ComplexFile,
    pub images: Vec<Vec<String>>,
    pub labels: Vec<usize>,
    pub steps: Vec<ElementaryStep>,
    pub groups: Vec<Group>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bundle {
    pub config: RunConfig,
    pub problem: ProblemFile,
    /// Vertex images of `F` after the general position perturbation.
    pub perturbed: Vec<Vec<String>>,
    pub gp: GpFile,
    pub sunny: CollapseFile,
    #[serde(default)]
    pub blisters: Vec<Blister>,
    pub stable: CollapseFile,
    /// Level map endpoints, vertexwise, in the delivered time direction.
    pub f_start: Vec<Vec<String>>,
    pub f_end: Vec<Vec<String>>,
    pub time_reversed: bool,
    pub report: VerifyReport,
}

fn fmt_points(ps: &[Point]) -> Vec<Vec<String>> {
    ps.iter()
        .map(|p| p.iter().map(format_rational).collect())
        .collect()
}

fn parse_points(ps: &[Vec<String>]) -> Result<Vec<Point>> {
    ps.iter()
        .map(|p| {
            p.iter()
                .map(|s| parse_rational(s).map_err(Error::Parse))
                .collect()
        })
        .collect()
}

fn collapse_file(
    host: &Complex,
    map: &PlMap,
    labels: &[usize],
    seq: &CollapseSequence,
) -> CollapseFile {
    CollapseFile {
        host: ComplexFile::from_complex(host, None),
        images: fmt_points(&map.images),
        labels: labels.to_vec(),
        steps: seq.steps.clone(),
        groups: seq.groups.clone(),
    }
}

impl Bundle {
    pub fn new(input: &PipelineInput, cfg: &RunConfig, out: &PipelineOutput) -> Bundle {
        Bundle {
            config: cfg.clone(),
            problem: ProblemFile::from_input(input, Some(cfg.mode.clone())),
            perturbed: fmt_points(&out.f.images),
            gp: GpFile {
                codim_ok: out.gp.codim_ok,
                nondegenerate_ok: out.gp.nondegenerate_ok,
                singular_facets: out
                    .gp
                    .singular_set
                    .facets()
                    .iter()
                    .map(|s| s.vertices().to_vec())
                    .collect(),
                offending: out
                    .gp
                    .offending_simplexes
                    .iter()
                    .map(|s| s.vertices().to_vec())
                    .collect(),
            },
            sunny: collapse_file(
                &out.sunny.host,
                &out.sunny.map,
                &out.sunny.labels,
                &out.sunny.seq,
            ),
            blisters: out.sunny.blisters.clone(),
            stable: collapse_file(
                &out.stable.lag.derived.result,
                &out.stable.map,
                &out.stable.labels,
                &out.stable.seq,
            ),
            f_start: fmt_points(&out.phi.f_start.images),
            f_end: fmt_points(&out.phi.f_end.images),
            time_reversed: out.phi.reversed,
            report: out.report.clone(),
        }
    }
}

/// Where verification first failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection {
    pub path: String,
    pub reason: String,
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.reason)
    }
}

fn reject<T>(
    path: impl Into<String>,
    reason: impl Into<String>,
) -> std::result::Result<T, Rejection> {
    Err(Rejection {
        path: path.into(),
        reason: reason.into(),
    })
}

fn lift<T>(path: &str, r: Result<T>) -> std::result::Result<T, Rejection> {
    r.map_err(|e| Rejection {
        path: path.to_string(),
        reason: e.to_string(),
    })
}

/// Replays and re-decides everything in the bundle. `Ok` only if all of it holds.
pub fn verify_bundle(b: &Bundle) -> std::result::Result<(), Rejection> {
    let input = lift("problem", b.problem.to_input())?;
    let xp = &input.xp;
    let f = lift(
        "perturbed",
        parse_points(&b.perturbed).and_then(|p| PlMap::new(xp.total.clone(), p)),
    )?;
    if f.images
        .iter()
        .zip(&input.f.images)
        .any(|(a, c)| a.last() != c.last())
    {
        return reject("perturbed", "perturbation moved a height");
    }
    let gp = check_general_position(&f, dims_of(&input));
    if gp.codim_ok != b.gp.codim_ok || gp.nondegenerate_ok != b.gp.nondegenerate_ok {
        return reject("gp", "general position flags differ from recomputation");
    }
    if !gp.ok() {
        return reject("gp", "perturbed map is not in general position");
    }
    let mode = b.config.mode.shadow_mode();

    // sunny collapse on the (blistered) host
    let (host, hmap) = load_collapse_host("sunny", &b.sunny)?;
    let (expected, blisters) = if xp.base.dim() <= 0 {
        (xp.total.clone(), Vec::new())
    } else {
        let labels = lift_labels(xp, &input.partition);
        let set = lift(
            "sunny.host",
            build_blisters(xp, &f, &labels, &gp.singular_set),
        )?;
        (set.host, set.blisters)
    };
    if let Some(i) =
        (0..b.blisters.len().max(blisters.len())).find(|&i| b.blisters.get(i) != blisters.get(i))
    {
        return reject(format!("blisters[{i}]"), "differs from the rebuilt blister");
    }
    if ComplexFile::from_complex(&expected, None) != b.sunny.host {
        return reject("sunny.host", "differs from the blistered product");
    }
    for v in 0..host.num_vertices() {
        let want = lift("sunny.images", f.evaluate(host.coords(v)))?;
        if hmap.images[v] != want {
            return reject(format!("sunny.images[{v}]"), "image disagrees with F");
        }
    }
    if b.sunny.labels != relabel(&host, xp, &lift_labels(xp, &input.partition)) {
        return reject("sunny.labels", "labels disagree with the partition");
    }
    let bottom = Subcomplex {
        simplexes: host
            .simplexes()
            .iter()
            .filter(|s| {
                s.vertices()
                    .iter()
                    .all(|&v| host.coords(v).last().is_some_and(num_traits::Zero::is_zero))
            })
            .cloned()
            .collect(),
    };
    let seq = replay("sunny", &b.sunny, host.as_subcomplex(), &bottom)?;
    let ctx = ShadowContext::new(&hmap, &b.sunny.labels, mode.clone());
    check_certificates("sunny", &ctx, &seq, false)?;

    // stabilization on the lagging second derived subdivision
    let lag = lift(
        "stable",
        lagging_second_derived(&hmap, &b.config.shift_constant),
    )?;
    let kpp = &lag.derived;
    if ComplexFile::from_complex(&kpp.result, None) != b.stable.host {
        return reject(
            "stable.host",
            "differs from the recomputed lagging second derived subdivision",
        );
    }
    let gmap = kpp.pull_map(&hmap);
    if fmt_points(&gmap.images) != b.stable.images {
        return reject("stable.images", "differ from F on the subdivision");
    }
    if kpp.pull_labels(&b.sunny.labels) != b.stable.labels {
        return reject("stable.labels", "differ from the pulled labels");
    }
    let seq2 = replay(
        "stable",
        &b.stable,
        kpp.result.as_subcomplex(),
        &kpp.induced(&bottom),
    )?;
    let ctx2 = ShadowContext::new(&gmap, &b.stable.labels, mode);
    check_certificates("stable", &ctx2, &seq2, true)?;

    // the level map
    let h = lift("stable", collapse_to_deformation(&seq2, &kpp.result))?;
    let mut phi = level_shift(&f, xp, h, input.partition.labels());
    if b.time_reversed {
        phi = phi.time_reversed();
    }
    if fmt_points(&phi.f_start.images) != b.f_start || fmt_points(&phi.f_end.images) != b.f_end {
        return reject("f_start", "endpoint maps differ from F at the ends");
    }
    let opts = VerifyOptions {
        samples: b.config.verify_samples,
        seed: b.config.seed,
        host_map: Some((&gmap, &b.stable.labels)),
    };
    let report = lift("report", verify_level_map(&phi, &b.config.mode, &opts))?;
    if report != b.report {
        return reject("report", "differs from the recomputed verification report");
    }
    if !report.passed() {
        return reject("report", report.failures.join("; "));
    }
    Ok(())
}

fn load_collapse_host(
    path: &str,
    c: &CollapseFile,
) -> std::result::Result<(Complex, PlMap), Rejection> {
    let host = lift(&format!("{path}.host"), c.host.to_complex())?;
    let pts = lift(&format!("{path}.images"), parse_points(&c.images))?;
    let map = lift(&format!("{path}.images"), PlMap::new(host.clone(), pts))?;
    if c.labels.len() != host.num_vertices() {
        return reject(format!("{path}.labels"), "one label per vertex required");
    }
    Ok((host, map))
}

/// Labels of host vertices read off the coarse product by location.
fn relabel(host: &Complex, xp: &crate::complex::ProductComplex, coarse: &[usize]) -> Vec<usize> {
    (0..host.num_vertices())
        .map(|v| {
            xp.total
                .locate(host.coords(v))
                .map_or(usize::MAX, |(s, _)| coarse[s.vertices()[0]])
        })
        .collect()
}

fn replay(
    path: &str,
    c: &CollapseFile,
    from: Subcomplex,
    to: &Subcomplex,
) -> std::result::Result<CollapseSequence, Rejection> {
    let mut prev = 0;
    for (g, grp) in c.groups.iter().enumerate() {
        if grp.end < prev || grp.end > c.steps.len() {
            return reject(
                format!("{path}.groups[{g}].end"),
                "group boundaries out of order",
            );
        }
        prev = grp.end;
    }
    if prev != c.steps.len() {
        return reject(format!("{path}.groups"), "groups do not cover the steps");
    }
    let seq = CollapseSequence {
        from: from.clone(),
        to: to.clone(),
        steps: c.steps.clone(),
        groups: c.groups.clone(),
    };
    let check = verify_collapse(&seq, &from, to);
    if !check.ok {
        let at = check
            .failed_step
            .map_or(String::new(), |i| format!(".steps[{i}]"));
        return reject(format!("{path}{at}"), check.reason.unwrap_or_default());
    }
    Ok(seq)
}

fn check_certificates(
    path: &str,
    ctx: &ShadowContext,
    seq: &CollapseSequence,
    stable: bool,
) -> std::result::Result<(), Rejection> {
    let stages = seq.stages();
    for (g, grp) in seq.groups.iter().enumerate() {
        let gp = format!("{path}.groups[{g}].certificate");
        let Some(stored) = &grp.certificate else {
            return reject(gp, "missing");
        };
        let fresh: SunnyCertificate =
            lift(&gp, certify_step(ctx, &stages[g], &stages[g + 1], stable))?;
        if stored.stable != stable || stored.mode != fresh.mode {
            return reject(gp, "wrong mode or stability flag");
        }
        if stored.checked_pairs.len() != fresh.checked_pairs.len() {
            return reject(
                format!("{gp}.checked_pairs"),
                "pair list differs from the exposed targets",
            );
        }
        for (i, (s, f)) in stored
            .checked_pairs
            .iter()
            .zip(&fresh.checked_pairs)
            .enumerate()
        {
            let fp = format!("{gp}.checked_pairs[{i}]");
            if s.a != f.a || s.b != f.b || s.open_b != f.open_b {
                return reject(fp, "different simplex pair");
            }
            if s.verdict != f.verdict {
                return reject(format!("{fp}.verdict"), "verdict re-decides differently");
            }
            if s.witness.is_some() != s.verdict
                || s.witness
                    .as_ref()
                    .is_some_and(|_| !crate::shadow::witness_is_sound(ctx.f, s))
            {
                return reject(
                    format!("{fp}.witness"),
                    "witness does not certify the verdict",
                );
            }
        }
        if stored.verdict != fresh.verdict {
            return reject(
                format!("{gp}.verdict"),
                "group verdict re-decides differently",
            );
        }
        if !fresh.verdict {
            return reject(format!("{gp}.verdict"), "group is not sunny");
        }
    }
    Ok(())
}

/// Reads a bundle, mapping syntax errors to `Parse`.
pub fn parse_bundle(text: &str) -> Result<Bundle> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}
