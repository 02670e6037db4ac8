use std::path::Path;

use mixtopo::oracle::{default_points, AGREEMENT_TOL};
use mixtopo::write::{bands_json, curvature_csv, pi_csv, profile_csv, triangle_csv};
use mixtopo::{
    analyze_pair, analyze_pair_at, elevation_profile, fit_em, full_topography_with, grid_modes, linkage_graph_with,
    load_csv, load_model, multistart_ascent, pi_curve, q_zeroes, simplex_grid_elevation, special_case_analysis,
    verify_report, EmOptions, Error, GridSpec, Mixture, ProfileAxis, TopoOptions, TopographyReport,
};
use nalgebra::DVector;
use serde_json::{json, Value};

use crate::args::{
    AnalyzeArgs, Command, ContourArgs, CurvatureArgs, ElevationArgs, FitArgs, LinkageArgs, ModelArg, OracleArgs,
    PairArg, PiArgs, XAxis,
};
use crate::output::{atomic_write, plural, write_json, write_with};
use crate::svg::{line_plot, ternary_contour, LinePlot};
use crate::Failure;

type Outcome = Result<String, Failure>;

const CONTOUR_LEVELS: usize = 12;

pub fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Validate(a) => validate(&a),
        Command::Analyze(a) => analyze(&a),
        Command::Elevation(a) => elevation(&a),
        Command::Pi(a) => pi(&a),
        Command::Curvature(a) => curvature(&a),
        Command::Contour(a) => contour(&a),
        Command::Linkage(a) => linkage(&a),
        Command::Fit(a) => fit(&a),
        Command::Oracle(a) => oracle(&a),
    }
}

fn load(a: &ModelArg) -> Result<Mixture, Failure> {
    Ok(load_model(&a.model)?)
}

/// 0-based pair from the 1-based flag; two-component models default to (1, 2).
fn resolve_pair(arg: &PairArg, m: &Mixture) -> Result<(usize, usize), Failure> {
    let k = m.k();
    let (i, j) = match arg.pair.as_deref() {
        Some(&[i, j]) => (i, j),
        Some(_) => return Err(Failure::Usage("--pair takes two indices".into())),
        None if k == 2 => (1, 2),
        None => {
            return Err(Failure::Usage(format!(
                "--pair is required for a mixture with {k} components"
            )))
        }
    };
    if i == j || !(1..=k).contains(&i) || !(1..=k).contains(&j) {
        return Err(Error::InvalidArgument(format!("pair ({i}, {j}) must be two distinct indices in 1..={k}")).into());
    }
    Ok((i - 1, j - 1))
}

fn pair_label((i, j): (usize, usize)) -> String {
    format!("{{{},{}}}", i + 1, j + 1)
}

fn write_svg(path: Option<&Path>, render: impl FnOnce() -> String) -> Result<(), Failure> {
    if let Some(p) = path {
        atomic_write(p, render().as_bytes())?;
    }
    Ok(())
}

fn validate(a: &ModelArg) -> Outcome {
    let m = load(a)?;
    Ok(format!(
        "valid: {} in dimension {}",
        plural(m.k(), "component"),
        m.dim()
    ))
}

fn report_json(r: &TopographyReport) -> Result<Value, Failure> {
    let mut v = serde_json::to_value(r).map_err(Error::from)?;
    if let Some(b) = &r.bands {
        v["bands"] = bands_json(b);
    }
    Ok(v)
}

fn topo_summary(r: &TopographyReport) -> String {
    let mut s = format!("{}, {}", plural(r.mode_count, "mode"), plural(r.saddle_count, "saddle"));
    if r.local_min_count > 0 {
        s.push_str(&format!(", {}", plural(r.local_min_count, "local minimum")));
    }
    if r.heuristic {
        s.push_str(" (heuristic search)");
    }
    s
}

fn analyze(a: &AnalyzeArgs) -> Outcome {
    let m = load(&a.model)?;
    let opts = TopoOptions {
        resolution: a.resolution,
        n_starts: a.starts,
        seed: a.seed,
    };
    let report = full_topography_with(&m, &opts)?;
    let verification = verify_report(&m, &report);
    if let Some(out) = &a.out {
        write_json(
            out,
            &json!({ "report": report_json(&report)?, "verification": verification }),
        )?;
    }
    let summary = topo_summary(&report);
    if !verification.all_passed {
        let failed: Vec<&str> = verification
            .checks
            .iter()
            .filter(|c| !c.passed && !c.skipped)
            .map(|c| c.name.as_str())
            .collect();
        return Err(Failure::Numerical(format!(
            "{summary}; verification failed: {}",
            failed.join(", ")
        )));
    }
    Ok(summary)
}

/// The pair as a two-component mixture at its renormalized weights.
fn pair_mixture(m: &Mixture, (i, j): (usize, usize)) -> Result<Mixture, Failure> {
    if m.k() == 2 && (i, j) == (0, 1) {
        return Ok(m.clone());
    }
    let (wi, wj) = (m.weights()[i], m.weights()[j]);
    if wi + wj <= 0.0 {
        return Err(Error::ZeroWeightPair { i: i + 1, j: j + 1 }.into());
    }
    Ok(m.pair(i, j, wj / (wi + wj))?)
}

/// Strict local maxima of a sampled curve, runs of equal values counted once.
fn count_peaks(values: &[f64]) -> usize {
    let mut runs: Vec<f64> = values.to_vec();
    runs.dedup();
    (0..runs.len())
        .filter(|&k| {
            let left = k == 0 || runs[k - 1] < runs[k];
            let right = k + 1 == runs.len() || runs[k + 1] < runs[k];
            left && right
        })
        .count()
}

fn elevation(a: &ElevationArgs) -> Outcome {
    let m = load(&a.model)?;
    let pair = resolve_pair(&a.pair, &m)?;
    let pm = pair_mixture(&m, pair)?;
    let axis = match a.x_axis {
        XAxis::Alpha => ProfileAxis::Alpha,
        XAxis::Arclength => ProfileAxis::Arclength,
    };
    let samples = elevation_profile(&pm, a.samples, axis)?;
    write_with(a.csv.as_deref(), |b| profile_csv(b, &samples))?;
    write_svg(a.svg.as_deref(), || {
        let points: Vec<(f64, f64)> = samples.iter().map(|s| (s.position, s.h)).collect();
        let title = format!("elevation along the ridgeline of pair {}", pair_label(pair));
        line_plot(&LinePlot {
            title: &title,
            x_label: match a.x_axis {
                XAxis::Alpha => "alpha",
                XAxis::Arclength => "arclength",
            },
            y_label: "h",
            points: &points,
            guides: &[],
        })
    })?;
    let log_h: Vec<f64> = samples.iter().map(|s| s.log_h).collect();
    let length = samples.last().map_or(0.0, |s| s.arclength);
    Ok(format!(
        "pair {}: {} of h over {} samples, ridgeline length {length:.6}",
        pair_label(pair),
        plural(count_peaks(&log_h), "local maximum"),
        samples.len()
    ))
}

fn pi(a: &PiArgs) -> Outcome {
    let m = load(&a.model)?;
    let pair = resolve_pair(&a.pair, &m)?;
    let (i, j) = pair;
    let report = if a.equal_weights {
        analyze_pair_at(&m, i, j, 0.5)?
    } else {
        analyze_pair(&m, i, j)?
    };
    if let Some(out) = &a.bands {
        let mut v = bands_json(&report.bands);
        v["pi_pair"] = json!(report.pi_pair);
        v["mode_count"] = json!(report.mode_count);
        v["crossings"] = serde_json::to_value(&report.crossings).map_err(Error::from)?;
        write_json(out, &v)?;
    }
    if a.csv.is_some() || a.svg.is_some() {
        let curve = pi_curve(&m, i, j, a.samples)?;
        write_with(a.csv.as_deref(), |b| pi_csv(b, &curve))?;
        write_svg(a.svg.as_deref(), || {
            let title = format!("pi-function of pair {}", pair_label(pair));
            line_plot(&LinePlot {
                title: &title,
                x_label: "alpha",
                y_label: "pi",
                points: &curve.samples,
                guides: &[report.pi_pair],
            })
        })?;
    }
    let modes: Vec<String> = report.bands.bands.iter().map(|b| b.modes.to_string()).collect();
    Ok(format!(
        "pair {} at pi = {}: {}, {}; modes per band {}",
        pair_label(pair),
        report.pi_pair,
        plural(report.crossings.len(), "crossing"),
        plural(report.mode_count, "mode"),
        modes.join("/")
    ))
}

fn curvature(a: &CurvatureArgs) -> Outcome {
    let m = load(&a.model)?;
    let pair = resolve_pair(&a.pair, &m)?;
    let (i, j) = pair;
    let special = special_case_analysis(&m, i, j)?;
    let zeroes = q_zeroes(&m, i, j)?;
    if let Some(out) = &a.out {
        write_json(
            out,
            &json!({ "pair": [i + 1, j + 1], "special_case": special, "q_zeroes": zeroes }),
        )?;
    }
    if a.csv.is_some() || a.svg.is_some() {
        let evals = mixtopo::curvature::curvature_curve(&m, i, j, a.samples)?;
        write_with(a.csv.as_deref(), |b| curvature_csv(b, &evals))?;
        write_svg(a.svg.as_deref(), || {
            let points: Vec<(f64, f64)> = evals.iter().map(|e| (e.alpha, e.q)).collect();
            let title = format!("q(alpha), sign of the curvature, pair {}", pair_label(pair));
            line_plot(&LinePlot {
                title: &title,
                x_label: "alpha",
                y_label: "q",
                points: &points,
                guides: &[0.0],
            })
        })?;
    }
    let case = match special.case {
        mixtopo::SpecialCase::EqualVariance => "equal covariances",
        mixtopo::SpecialCase::ProportionalVariance => "proportional covariances",
        mixtopo::SpecialCase::General => "general covariances",
    };
    Ok(format!(
        "pair {}: {case}, q has {} sign changes; {}",
        pair_label(pair),
        zeroes.crossings.len(),
        if special.unimodal_for_all_pi {
            "unimodal for every weight"
        } else {
            "multimodal for some weights"
        }
    ))
}

fn contour(a: &ContourArgs) -> Outcome {
    let m = load(&a.model)?;
    let grid = simplex_grid_elevation(&m, a.resolution)?;
    write_with(a.csv.as_deref(), |b| triangle_csv(b, &grid))?;
    write_svg(a.svg.as_deref(), || ternary_contour(&grid, CONTOUR_LEVELS))?;
    Ok(format!(
        "{} grid nodes at resolution {}, {} local maxima of h",
        grid.nodes.len(),
        grid.resolution,
        grid.local_maxima().count()
    ))
}

fn linkage(a: &LinkageArgs) -> Outcome {
    let m = load(&a.model)?;
    let g = linkage_graph_with(&m, a.tau, a.equal_weights)?;
    let one_based = |b: &[usize]| b.iter().map(|n| n + 1).collect::<Vec<_>>();
    if let Some(out) = &a.out {
        let edges: Vec<Value> = g
            .edges
            .iter()
            .map(|e| json!({ "i": e.i + 1, "j": e.j + 1, "reason": e.reason, "saddle_ratio": e.saddle_ratio }))
            .collect();
        let pairs: Vec<Value> = g
            .pairs
            .iter()
            .map(|p| {
                json!({
                    "pair": [p.pair.0 + 1, p.pair.1 + 1],
                    "pi_pair": p.pi_pair,
                    "mode_count": p.mode_count,
                    "saddle_ratio": p.saddle_ratio,
                })
            })
            .collect();
        let blocks: Vec<Vec<usize>> = g.supercomponents.iter().map(|b| one_based(b)).collect();
        write_json(
            out,
            &json!({
                "nodes": one_based(&g.nodes),
                "edges": edges,
                "supercomponents": blocks,
                "tau": g.tau,
                "pairs": pairs,
            }),
        )?;
    }
    if let Some(dot) = &a.dot {
        atomic_write(dot, g.to_dot().as_bytes())?;
    }
    let blocks: Vec<String> = g
        .supercomponents
        .iter()
        .map(|b| {
            format!(
                "{{{}}}",
                one_based(b).iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
            )
        })
        .collect();
    Ok(format!(
        "{}, {}, {}: {}",
        plural(g.nodes.len(), "component"),
        plural(g.edges.len(), "edge"),
        plural(g.supercomponents.len(), "supercomponent"),
        blocks.join(" ")
    ))
}

fn fit(a: &FitArgs) -> Outcome {
    if a.k == 0 || a.seeds == 0 || a.max_iter == 0 || a.tol.is_nan() || a.tol <= 0.0 {
        return Err(Failure::Usage(
            "--k, --seeds, --max-iter and --tol must be positive".into(),
        ));
    }
    let data = load_csv(&a.data, !a.no_header)?;
    let opts = EmOptions {
        k: a.k,
        n_seeds: a.seeds,
        seed: a.seed,
        max_iter: a.max_iter,
        tol: a.tol,
    };
    let fit = fit_em(&data, &opts)?;
    if let Some(out) = &a.out {
        write_json(
            out,
            &serde_json::to_value(fit.mixture.to_model_file()).map_err(Error::from)?,
        )?;
    }
    Ok(format!(
        "fitted {} to {} rows: log-likelihood {:.6} after {} iterations ({}), restart {}",
        plural(a.k, "component"),
        data.n(),
        fit.log_likelihood,
        fit.iterations,
        if fit.converged { "converged" } else { "iteration limit" },
        fit.seed_index
    ))
}

fn max_gap(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    a.iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

fn oracle(a: &OracleArgs) -> Outcome {
    let m = load(&a.model)?;
    let d = m.dim();
    let (method, modes) = if d <= 3 {
        let points = a.points.unwrap_or_else(|| default_points(d));
        let spec = GridSpec::default_for(&m, points);
        (json!({ "grid_points": points }), grid_modes(&m, &spec)?)
    } else {
        (
            json!({ "starts": a.starts, "seed": a.seed }),
            multistart_ascent(&m, a.starts, a.seed),
        )
    };
    let opts = TopoOptions {
        resolution: a.resolution,
        n_starts: a.starts,
        seed: a.seed,
    };
    let report = full_topography_with(&m, &opts)?;
    let ours: Vec<DVector<f64>> = report.modes().map(|c| c.x.clone()).collect();
    let theirs: Vec<DVector<f64>> = modes.iter().map(|o| o.x.clone()).collect();
    let distance = if ours.is_empty() && theirs.is_empty() {
        0.0
    } else {
        max_gap(&ours, &theirs).max(max_gap(&theirs, &ours))
    };
    let agree = ours.len() == theirs.len() && distance <= AGREEMENT_TOL;
    if let Some(out) = &a.out {
        write_json(
            out,
            &json!({
                "search": method,
                "oracle_modes": modes,
                "topography_mode_count": ours.len(),
                "max_distance": distance,
                "tolerance": AGREEMENT_TOL,
                "agree": agree,
            }),
        )?;
    }
    let summary = format!(
        "oracle {}, topography {}, max distance {distance:.3e}",
        plural(theirs.len(), "mode"),
        plural(ours.len(), "mode")
    );
    if !agree {
        return Err(Failure::Numerical(format!("{summary}: disagree")));
    }
    Ok(format!("{summary}: agree"))
}
