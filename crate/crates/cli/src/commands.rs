//! One function per subcommand: read parameters, run the experiment, write
//! its files into the staging directory.

use std::path::Path;

use serde_json::json;
use walklab::cartan::{density_convergence, growth_contraction_sweep, lyapunov_estimate};
use walklab::empirical::{atom_detect, frequency_box, median_window, real_marginal_invariance, weyl_sum, EmpiricalMeasure};
use walklab::fiber::{
    drift_demo, fiber_equidistribution, law_of_angles, BasePoint, DriftParams, FiberContext, Partition, WindowSpec,
};
use walklab::llt::{joint_llt_estimate, llt_1d_check, stationary_flag, LatticeDist};
use walklab::model::{ExactPoint, StateXT, TorusPoint, WalkConfig};
use walklab::orbits::{block_orbit_components, rational_orbit, stationarity_residual};
use walklab::report::{
    angle_rows, drift_rows, format_frequency, write_csv, write_json, write_records, DensityCsvRow, LyapunovRow, WeylRow,
};
use walklab::rng::derive_seed;
use walklab::walk::{drift_certify_search, heavy_tail_diagnostic, return_tail, simulate, DriftOutcome, GridSpec, DEFAULT_CAP};
use walklab::{Error, Result};

use crate::params::Params;

pub const SUBCOMMANDS: &[&str] = &[
    "simulate",
    "orbit",
    "lyapunov",
    "cartan-check",
    "tail",
    "certify",
    "llt1d",
    "jointllt",
    "angles",
    "drift",
    "equidist",
    "weyl",
];

/// Everything a command needs. Files go to `dir`; their names are returned.
pub struct Ctx<'a> {
    pub cfg: &'a WalkConfig,
    pub params: &'a mut Params,
    pub seed: u64,
    pub dir: &'a Path,
}

pub fn run(name: &str, ctx: &mut Ctx) -> Result<Vec<String>> {
    match name {
        "simulate" => cmd_simulate(ctx),
        "orbit" => cmd_orbit(ctx),
        "lyapunov" => cmd_lyapunov(ctx),
        "cartan-check" => cmd_cartan_check(ctx),
        "tail" => cmd_tail(ctx),
        "certify" => cmd_certify(ctx),
        "llt1d" => cmd_llt1d(ctx),
        "jointllt" => cmd_jointllt(ctx),
        "angles" => cmd_angles(ctx),
        "drift" => cmd_drift(ctx),
        "equidist" => cmd_equidist(ctx),
        "weyl" => cmd_weyl(ctx),
        other => Err(Error::Config(format!("unknown subcommand {other:?}"))),
    }
}

fn default_start(dim: usize) -> Vec<f64> {
    (0..dim).map(|i| (0.1234 + 0.4444 * i as f64).fract()).collect()
}

fn float_start(ctx: &mut Ctx) -> Result<StateXT> {
    let x: Vec<f64> = ctx.params.get("x", default_start(ctx.cfg.dim))?;
    let t: f64 = ctx.params.get("t", 0.0)?;
    if x.len() != ctx.cfg.dim {
        return Err(Error::DimensionMismatch { expected: ctx.cfg.dim, found: x.len() });
    }
    Ok(StateXT::new(TorusPoint::float(&x), t))
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn cmd_simulate(ctx: &mut Ctx) -> Result<Vec<String>> {
    let start = float_start(ctx)?;
    let steps: usize = ctx.params.get("steps", 1000)?;
    let tr = simulate(ctx.cfg, &start, steps, ctx.seed)?;
    let d = ctx.cfg.dim;
    let mut header = vec!["step".to_string()];
    header.extend((0..d).map(|i| format!("x{i}")));
    header.extend(["t".to_string(), "letter".to_string()]);
    let mut rows = Vec::with_capacity(steps + 1);
    for (k, s) in tr.states.iter().enumerate() {
        let mut r = vec![k.to_string()];
        r.extend(s.x.to_f64().into_iter().map(fmt));
        r.push(fmt(s.t));
        r.push(if k == 0 { String::new() } else { tr.word.letters[k - 1].to_string() });
        rows.push(r);
    }
    write_records(&ctx.dir.join("trajectory.csv"), &header, &rows)?;
    Ok(vec!["trajectory.csv".into()])
}

fn parse_fraction(s: &str) -> Result<(i64, i64)> {
    let bad = || Error::Config(format!("cannot parse coordinate {s:?} as p/q"));
    match s.split_once('/') {
        Some((p, q)) => Ok((p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?)),
        None => Ok((s.trim().parse().map_err(|_| bad())?, 1)),
    }
}

fn cmd_orbit(ctx: &mut Ctx) -> Result<Vec<String>> {
    let mut default = vec!["1/4".to_string()];
    default.resize(ctx.cfg.dim, "0".to_string());
    let x: Vec<String> = ctx.params.get("x", default)?;
    let m: u64 = ctx.params.get("m", 2)?;
    let fr = x.iter().map(|s| parse_fraction(s)).collect::<Result<Vec<_>>>()?;
    let p = ExactPoint::from_fractions(&fr)?;
    let orbit = rational_orbit(&p, ctx.cfg)?;
    let residual = stationarity_residual(&orbit, ctx.cfg)?;
    let components = if ctx.cfg.int_chi().is_some() { Some(block_orbit_components(&p, ctx.cfg, m)?) } else { None };
    let out = json!({
        "x": x,
        "size": orbit.len(),
        "points": orbit.to_fractions(),
        "stationarity_residual": residual.to_string(),
        "block_modulus": m,
        "components": components,
    });
    write_json(&ctx.dir.join("orbit.json"), &out)?;
    Ok(vec!["orbit.json".into()])
}

fn cmd_lyapunov(ctx: &mut Ctx) -> Result<Vec<String>> {
    let n: usize = ctx.params.get("n", 10_000)?;
    let replicas: usize = ctx.params.get("replicas", 100)?;
    let density_n: Vec<usize> = ctx.params.get("density_n", vec![5, 10, 20, 40])?;
    let density_replicas: usize = ctx.params.get("density_replicas", 500)?;
    let est = lyapunov_estimate(ctx.cfg, n, replicas, ctx.seed)?;
    let conv = density_convergence(ctx.cfg, &density_n, density_replicas, derive_seed(ctx.seed, 0xDE))?;
    let row = LyapunovRow { n, replicas, lambda_hat: est.lambda_hat, ci_lo: est.ci.lo(), ci_hi: est.ci.hi() };
    write_csv(&ctx.dir.join("lyapunov.csv"), &[row])?;
    let rows: Vec<DensityCsvRow> =
        conv.rows.iter().map(|r| DensityCsvRow { n: r.n, median: r.median, rate: conv.rate }).collect();
    write_csv(&ctx.dir.join("density_convergence.csv"), &rows)?;
    Ok(vec!["lyapunov.csv".into(), "density_convergence.csv".into()])
}

fn cmd_cartan_check(ctx: &mut Ctx) -> Result<Vec<String>> {
    let samples: usize = ctx.params.get("samples", 10_000)?;
    let max_len: usize = ctx.params.get("max_len", 30)?;
    let sweep = growth_contraction_sweep(ctx.cfg, samples, max_len, ctx.seed)?;
    write_csv(&ctx.dir.join("growth.csv"), &[sweep])?;
    Ok(vec!["growth.csv".into()])
}

fn cmd_tail(ctx: &mut Ctx) -> Result<Vec<String>> {
    let kmax: u64 = ctx.params.get("kmax", 10_000)?;
    let replicas: usize = ctx.params.get("replicas", 100_000)?;
    let cap: u64 = ctx.params.get("cap", DEFAULT_CAP)?;
    let fit: (u64, u64) = ctx.params.get("fit", (100, 10_000))?;
    let heavy: bool = ctx.params.get("heavy", false)?;
    let heavy_n: Vec<usize> = ctx.params.get("heavy_n", vec![1000, 10_000, 100_000])?;
    let tail = return_tail(ctx.cfg, kmax, replicas, ctx.seed, cap, fit)?;
    write_csv(&ctx.dir.join("return_tail.csv"), &tail.rows)?;
    let mut files = vec!["return_tail.csv".to_string()];
    let mut summary = json!({
        "slope": tail.slope,
        "samples": tail.samples,
        "censored": tail.censored,
        "cap": tail.cap,
        "fit_window": tail.fit_window,
    });
    if heavy {
        let h = heavy_tail_diagnostic(ctx.cfg, &heavy_n, derive_seed(ctx.seed, 0x4E), cap)?;
        write_csv(&ctx.dir.join("heavy_tail.csv"), &h.rows)?;
        files.push("heavy_tail.csv".into());
        summary["tail_exponent"] = json!(h.tail_exponent);
        summary["heavy_censored"] = json!(h.censored);
    }
    write_json(&ctx.dir.join("tail.json"), &summary)?;
    files.push("tail.json".into());
    Ok(files)
}

fn cmd_certify(ctx: &mut Ctx) -> Result<Vec<String>> {
    let delta: f64 = ctx.params.get("delta", 0.1)?;
    let k_max: usize = ctx.params.get("k_max", 8)?;
    let target: f64 = ctx.params.get("target", 0.95)?;
    let samples: usize = ctx.params.get("replicas", 2000)?;
    let d = GridSpec::default();
    let grid = GridSpec {
        points: ctx.params.get("grid_points", d.points)?,
        min_log2: ctx.params.get("min_log2", d.min_log2)?,
        bits: ctx.params.get("bits", d.bits)?,
        far_radius: ctx.params.get("far_radius", d.far_radius)?,
        cap: ctx.params.get("cap", d.cap)?,
    };
    let search = drift_certify_search(ctx.cfg, delta, k_max, target, &grid, samples, ctx.seed)?;
    write_csv(&ctx.dir.join("certificate.csv"), search.outcome.points())?;
    let summary = match &search.outcome {
        DriftOutcome::Certificate(c) => json!({
            "certified": true, "delta": c.delta, "k": c.k, "a": c.a, "c": c.c,
            "confidence": c.confidence, "attempts": search.attempts,
        }),
        DriftOutcome::Failure(f) => json!({
            "certified": false, "delta": f.delta, "k": f.k, "a": f.a, "c": f.c,
            "violating": f.violating, "attempts": search.attempts,
        }),
    };
    write_json(&ctx.dir.join("certificate.json"), &summary)?;
    Ok(vec!["certificate.csv".into(), "certificate.json".into()])
}

fn cmd_llt1d(ctx: &mut Ctx) -> Result<Vec<String>> {
    let n_list: Vec<usize> = ctx.params.get("n_list", vec![100, 1000, 10_000])?;
    let dist = LatticeDist::from_config(ctx.cfg)?;
    let rows = llt_1d_check(&dist, &n_list)?;
    write_csv(&ctx.dir.join("llt1d.csv"), &rows)?;
    Ok(vec!["llt1d.csv".into()])
}

fn cmd_jointllt(ctx: &mut Ctx) -> Result<Vec<String>> {
    let n_list: Vec<usize> = ctx.params.get("n_list", vec![100, 200, 400])?;
    let replicas: usize = ctx.params.get("replicas", 100_000)?;
    let u: (f64, f64) = ctx.params.get("u", (-1.0, 1.0))?;
    let i: (f64, f64) = ctx.params.get("i", (-0.5, 0.5))?;
    let lambda: Option<f64> = ctx.params.get("lambda", None)?;
    let lambda = match lambda {
        Some(l) => l,
        None => {
            let n: usize = ctx.params.get("lyapunov_n", 10_000)?;
            let r: usize = ctx.params.get("lyapunov_replicas", 100)?;
            lyapunov_estimate(ctx.cfg, n, r, derive_seed(ctx.seed, 0x1A))?.lambda_hat
        }
    };
    let xi = stationary_flag(ctx.cfg, ctx.seed)?;
    let est = joint_llt_estimate(ctx.cfg, u, i, &n_list, replicas, ctx.seed, lambda, &xi)?;
    write_csv(&ctx.dir.join("jointllt.csv"), &est.rows)?;
    let summary = json!({ "lambda_hat": lambda, "variation": est.variation(&n_list), "u": u, "i": i });
    write_json(&ctx.dir.join("jointllt.json"), &summary)?;
    Ok(vec!["jointllt.csv".into(), "jointllt.json".into()])
}

fn window(ctx: &mut Ctx) -> Result<WindowSpec> {
    let d = WindowSpec::default_for(ctx.cfg);
    let u: Vec<(f64, f64)> = ctx.params.get("u", d.u)?;
    let i: (f64, f64) = ctx.params.get("i", d.i)?;
    WindowSpec::new(ctx.cfg, u, i)
}

fn cmd_angles(ctx: &mut Ctx) -> Result<Vec<String>> {
    let n: usize = ctx.params.get("n", 30)?;
    let accepted: usize = ctx.params.get("replicas", 2000)?;
    let uncond: usize = ctx.params.get("unconditioned", 20_000)?;
    let budget: u64 = ctx.params.get("budget", 10_000_000)?;
    let lookahead: usize = ctx.params.get("lookahead", 200)?;
    let candidates: usize = ctx.params.get("base_candidates", 64)?;
    let w = window(ctx)?;
    let base = BasePoint::central(ctx.cfg, n + lookahead, n, lookahead, candidates, derive_seed(ctx.seed, 0xBA5E))?;
    let fc = FiberContext::new(ctx.cfg, &base, n, lookahead)?;
    let laws = law_of_angles(&fc, &w, accepted, uncond, ctx.seed, budget)?;
    write_csv(&ctx.dir.join("angles.csv"), &angle_rows(&laws))?;
    let summary = json!({
        "n": n, "distance": laws.distance, "accepted": laws.accepted, "draws": laws.draws,
        "exhausted": laws.exhausted, "gap_dropped": laws.gap_dropped,
    });
    write_json(&ctx.dir.join("angles.json"), &summary)?;
    Ok(vec!["angles.csv".into(), "angles.json".into()])
}

fn cmd_drift(ctx: &mut Ctx) -> Result<Vec<String>> {
    let d = DriftParams::default();
    let p = DriftParams {
        u_norm: ctx.params.get("u_norm", d.u_norm)?,
        directions: ctx.params.get("directions", d.directions)?,
        decades: ctx.params.get("decades", d.decades)?,
        per_direction: ctx.params.get("replicas", d.per_direction)?,
        eps1: ctx.params.get("eps1", d.eps1)?,
        eps2: ctx.params.get("eps2", d.eps2)?,
        max_n: ctx.params.get("max_n", d.max_n)?,
        lookahead: ctx.params.get("lookahead", d.lookahead)?,
        budget: ctx.params.get("budget", d.budget)?,
        pilot_directions: ctx.params.get("pilot_directions", d.pilot_directions)?,
        pilot_per_direction: ctx.params.get("pilot_per_direction", d.pilot_per_direction)?,
    };
    let w = window(ctx)?;
    let base = BasePoint::random(ctx.cfg, p.max_n + p.lookahead, derive_seed(ctx.seed, 0xBA5E));
    let demo = drift_demo(ctx.cfg, &base, &w, &p, ctx.seed)?;
    write_csv(&ctx.dir.join("drift.csv"), &drift_rows(&demo))?;
    let summary = json!({
        "c_const": demo.c_const, "pilot_samples": demo.pilot_samples, "samples": demo.records.len(),
        "within_fraction": demo.within_fraction, "delta_hat": demo.delta_hat,
        "n_p_min": demo.n_p_min, "n_p_max": demo.n_p_max, "aborted": demo.aborted,
    });
    write_json(&ctx.dir.join("drift.json"), &summary)?;
    Ok(vec!["drift.csv".into(), "drift.json".into()])
}

fn cmd_equidist(ctx: &mut Ctx) -> Result<Vec<String>> {
    let n_list: Vec<usize> = ctx.params.get("n_list", vec![20, 40, 80])?;
    let u_cells: usize = ctx.params.get("u_cells", 4)?;
    let i_cells: usize = ctx.params.get("i_cells", 1)?;
    let accepted: usize = ctx.params.get("replicas", 4000)?;
    let budget: u64 = ctx.params.get("budget", 10_000_000)?;
    let lookahead: usize = ctx.params.get("lookahead", 200)?;
    let candidates: usize = ctx.params.get("base_candidates", 64)?;
    let w = window(ctx)?;
    let n_max = n_list.iter().copied().max().ok_or_else(|| Error::Config("n_list is empty".into()))?;
    let n_mid = n_list[n_list.len() / 2];
    let base = BasePoint::central(ctx.cfg, n_max + lookahead, n_mid, lookahead, candidates, derive_seed(ctx.seed, 0xBA5E))?;
    let contexts = n_list.iter().map(|&n| FiberContext::new(ctx.cfg, &base, n, lookahead)).collect::<Result<Vec<_>>>()?;
    let r = fiber_equidistribution(&contexts, &w, Partition { u_cells, i_cells }, accepted, ctx.seed, budget)?;
    write_csv(&ctx.dir.join("equidist.csv"), &r.rows)?;
    write_json(&ctx.dir.join("equidist.json"), &json!({ "accepted": r.accepted, "l1_diffs": r.l1_diffs }))?;
    Ok(vec!["equidist.csv".into(), "equidist.json".into()])
}

fn cmd_weyl(ctx: &mut Ctx) -> Result<Vec<String>> {
    let start = float_start(ctx)?;
    let steps: usize = ctx.params.get("steps", 100_000)?;
    let burn_in: usize = ctx.params.get("burn_in", 1000)?;
    let r: i64 = ctx.params.get("r", 3)?;
    let shifts: Vec<f64> = ctx.params.get("shifts", vec![1.0, 2.0])?;
    let half: f64 = ctx.params.get("half_window", 60.0)?;
    let bins: usize = ctx.params.get("bins", 6)?;
    let radius: f64 = ctx.params.get("atom_radius", 0.02)?;
    let threshold: f64 = ctx.params.get("atom_threshold", 0.05)?;
    let tr = simulate(ctx.cfg, &start, burn_in + steps, ctx.seed)?;
    let m = EmpiricalMeasure::uniform(tr.states[burn_in + 1..].to_vec());
    let rows: Vec<WeylRow> = frequency_box(ctx.cfg.dim, r)
        .iter()
        .map(|k| {
            let z = weyl_sum(&m, k);
            WeylRow { k: format_frequency(k), re: z.re, im: z.im, abs: z.norm() }
        })
        .collect();
    write_csv(&ctx.dir.join("weyl.csv"), &rows)?;
    let inv = real_marginal_invariance(&m, &shifts, median_window(&m, half), bins)?;
    write_csv(&ctx.dir.join("marginal.csv"), &inv.rows)?;
    let atoms = atom_detect(&m, radius, threshold)?;
    let d = ctx.cfg.dim;
    let mut header: Vec<String> = (0..d).map(|i| format!("center{i}")).collect();
    header.push("mass".into());
    let arows: Vec<Vec<String>> = atoms
        .iter()
        .map(|a| a.center.iter().map(|&c| fmt(c)).chain(std::iter::once(fmt(a.mass))).collect())
        .collect();
    write_records(&ctx.dir.join("atoms.csv"), &header, &arows)?;
    Ok(vec!["weyl.csv".into(), "marginal.csv".into(), "atoms.csv".into()])
}
