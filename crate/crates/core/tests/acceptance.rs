//! Acceptance run: every criterion at its stated size and tolerance, one
//! PASS/FAIL line each. Exits nonzero if any criterion fails.
//!
//! `ACCEPTANCE_ONLY=3,11` restricts the run to the listed criteria.

use std::path::Path;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use walklab::cartan::{density_convergence, growth_contraction_sweep, lyapunov_estimate};
use walklab::empirical::{frequency_box, median_window, real_marginal_invariance, weyl_sum, EmpiricalMeasure};
use walklab::fiber::{drift_demo, law_of_angles, BasePoint, DriftParams, FiberContext, WindowSpec};
use walklab::llt::{joint_llt_estimate, llt_1d_check, return_time_dp, stationary_flag, LatticeDist};
use walklab::model::{ExactPoint, FractionPair, StateXT, TorusPoint, WalkConfig};
use walklab::orbits::{block_orbit_components, rational_orbit, BlockVertex};
use walklab::report::{angle_rows, drift_rows, write_csv, WeylRow};
use walklab::walk::{drift_certify_search, heavy_tail_diagnostic, return_tail, simulate, DriftOutcome, GridSpec, DEFAULT_CAP};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn fp(p: &str, q: &str) -> FractionPair {
    FractionPair(p.into(), q.into())
}

fn c1_growth(cfg: &WalkConfig) -> Outcome {
    let s = growth_contraction_sweep(cfg, 10_000, 30, 101).unwrap();
    outcome(
        s.violations() == 0 && s.checked + s.no_gap == 10_000,
        format!("checked {} (no gap {}), violations {}", s.checked, s.no_gap, s.violations()),
    )
}

fn c2_atomic(cfg: &WalkConfig) -> Outcome {
    let x = ExactPoint::from_fractions(&[(1, 4), (0, 1)]).unwrap();
    let orbit = rational_orbit(&x, cfg).unwrap();
    let expect = vec![vec![fp("1", "4"), fp("0", "1")], vec![fp("1", "4"), fp("1", "2")]];
    let orbit_ok = orbit.to_fractions() == expect;
    let comps = block_orbit_components(&x, cfg, 2).unwrap();
    let v = |p: &Vec<FractionPair>, level| BlockVertex { point: p.clone(), level };
    let home = comps.iter().find(|c| c.contains(&v(&expect[0], 0))).unwrap();
    let comp_ok = comps.len() == 2 && *home == vec![v(&expect[0], 0), v(&expect[1], 1)];
    outcome(orbit_ok && comp_ok, format!("orbit size {}, {} parity components", orbit.len(), comps.len()))
}

fn c3_return_oracle(cfg: &WalkConfig) -> Outcome {
    let tail = return_tail(cfg, 20, 100_000, 103, DEFAULT_CAP, (1, 20)).unwrap();
    let dp = return_time_dp(&LatticeDist::from_config(cfg).unwrap(), 20).unwrap();
    let mut worst: f64 = 0.0;
    for r in &tail.rows {
        let width = r.ci_hi - r.ci_lo;
        worst = worst.max((r.p_hat - dp.survival(r.k as usize)).abs() / width);
    }
    let exact = dp.exact.as_ref().unwrap();
    let half = BigRational::new(1.into(), 2.into());
    let eighth = BigRational::new(1.into(), 8.into());
    let exact_ok = exact[0] == half && exact[1] == eighth;
    outcome(
        worst <= 3.0 && tail.rows.len() == 20 && exact_ok,
        format!("max |MC − DP| = {worst:.2} CI widths over k ≤ 20; P(τ=1) = {}, P(τ=2) = {}", exact[0], exact[1]),
    )
}

fn c4_tail(cfg: &WalkConfig) -> Outcome {
    let tail = return_tail(cfg, 10_000, 100_000, 104, 10_000_000, (100, 10_000)).unwrap();
    let slope = tail.slope.unwrap_or(f64::NAN);
    outcome((slope + 0.5).abs() <= 0.1, format!("slope {slope:.3}, censored {}", tail.censored))
}

fn c5_llt1d(cfg: &WalkConfig) -> Outcome {
    let rows = llt_1d_check(&LatticeDist::from_config(cfg).unwrap(), &[10_000]).unwrap();
    let r = &rows[0];
    let oracle = 1.0 / std::f64::consts::PI.sqrt();
    let rel = (r.scaled - oracle).abs() / oracle;
    outcome(rel <= 0.01, format!("√n·P(S_n=0) = {:.6} vs 1/√π, rel err {rel:.2e}", r.scaled))
}

fn c6_lyapunov(cfg: &WalkConfig) -> Outcome {
    let a = lyapunov_estimate(cfg, 10_000, 100, 106).unwrap();
    let b = lyapunov_estimate(cfg, 10_000, 100, 206).unwrap();
    let width = a.ci.width().max(b.ci.width());
    let agree = (a.lambda_hat - b.lambda_hat).abs() <= 2.0 * width;
    outcome(
        a.lambda_hat > 0.0 && a.ci.lo() > 0.0 && b.ci.lo() > 0.0 && agree,
        format!(
            "λ̂ = {:.4} [{:.4}, {:.4}] and {:.4} [{:.4}, {:.4}]",
            a.lambda_hat,
            a.ci.lo(),
            a.ci.hi(),
            b.lambda_hat,
            b.ci.lo(),
            b.ci.hi()
        ),
    )
}

fn c7_density(cfg: &WalkConfig) -> Outcome {
    let d = density_convergence(cfg, &[5, 10, 20, 40], 500, 107).unwrap();
    let rate = d.rate.unwrap_or(f64::NAN);
    let medians: Vec<String> = d.rows.iter().map(|r| format!("{:.2e}", r.median)).collect();
    outcome(rate > 0.0, format!("ε̂ = {rate:.3}, medians {}", medians.join(" ")))
}

fn c8_heavy(cfg: &WalkConfig) -> Outcome {
    let h = heavy_tail_diagnostic(cfg, &[1000, 10_000, 100_000], 108, DEFAULT_CAP).unwrap();
    let means: Vec<f64> = h.rows.iter().map(|r| r.truncated_mean).collect();
    let grows = means.windows(2).all(|w| w[1] >= 1.2 * w[0]);
    let expo = h.tail_exponent.unwrap_or(f64::NAN);
    outcome(
        grows && (0.35..=0.65).contains(&expo),
        format!("truncated means {:.2} → {:.2} → {:.2}, tail exponent {expo:.3}", means[0], means[1], means[2]),
    )
}

fn c9_certificate(cfg: &WalkConfig) -> Outcome {
    let grid = GridSpec::default();
    let s = drift_certify_search(cfg, 0.1, 8, 0.95, &grid, 2000, 109).unwrap();
    match &s.outcome {
        DriftOutcome::Certificate(c) => {
            let all = c.points.len() == 64 && c.points.iter().all(|p| p.ucb <= (c.a * p.u_value + c.c) * (1.0 + 1e-12));
            outcome(
                c.delta <= 0.1 && c.k <= 8 && c.a <= 0.95 && c.c.is_finite() && all,
                format!("δ = {}, k = {}, a = {:.3}, C = {:.3}, {} grid points", c.delta, c.k, c.a, c.c, c.points.len()),
            )
        }
        DriftOutcome::Failure(f) => outcome(false, format!("no certificate: a = {:.3}, {} violating", f.a, f.violating.len())),
    }
}

fn c10_joint_llt(cfg: &WalkConfig) -> Outcome {
    let ns = [100, 200, 400];
    let lambda = lyapunov_estimate(cfg, 10_000, 100, 110).unwrap().lambda_hat;
    let xi = stationary_flag(cfg, 110).unwrap();
    let est = joint_llt_estimate(cfg, (-1.0, 1.0), (-0.5, 0.5), &ns, 1_000_000, 110, lambda, &xi).unwrap();
    let var = est.variation(&ns);
    let off = joint_llt_estimate(cfg, (-1.0, 1.0), (0.25, 0.75), &ns, 1_000_000, 210, lambda, &xi).unwrap();
    let zero = off.rows.iter().all(|r| r.p_hat == 0.0);
    let scaled: Vec<String> = est.rows.iter().map(|r| format!("{:.4}", r.scaled)).collect();
    outcome(var < 0.25 && zero, format!("n·p̂ = {}, variation {var:.3}; off-lattice window zero: {zero}", scaled.join(" ")))
}

fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

fn angles_run(cfg: &WalkConfig, seed: u64) -> walklab::fiber::AngleLaws {
    let (n, lookahead) = (30, 200);
    let base = BasePoint::central(cfg, n + lookahead, n, lookahead, 64, seed).unwrap();
    let ctx = FiberContext::new(cfg, &base, n, lookahead).unwrap();
    law_of_angles(&ctx, &WindowSpec::default_for(cfg), 2000, 20_000, seed, 10_000_000).unwrap()
}

fn c11_angles(cfg: &WalkConfig) -> Outcome {
    let laws = angles_run(cfg, 111);
    let kuiper = laws.distance.unwrap_or(f64::NAN);
    let ks = ks_distance(&laws.angle_cond, &laws.angle_uncond);
    outcome(
        ks <= 0.1 && kuiper <= 0.1 && laws.accepted >= 1000,
        format!("KS {ks:.3}, Kuiper {kuiper:.3}, accepted {} of {} draws", laws.accepted, laws.draws),
    )
}

fn drift_run(cfg: &WalkConfig, seed: u64) -> walklab::fiber::DriftDemo {
    let p = DriftParams::default();
    let base = BasePoint::random(cfg, p.max_n + p.lookahead, seed);
    drift_demo(cfg, &base, &WindowSpec::default_for(cfg), &p, seed).unwrap()
}

fn c12_drift(cfg: &WalkConfig) -> Outcome {
    let d = drift_run(cfg, 112);
    let delta = d.delta_hat.unwrap_or(f64::NAN);
    outcome(
        d.within_fraction >= 0.9 && delta > 0.0,
        format!(
            "{} samples, {:.1}% within ±ln C (C = {:.2}), δ̂ = {delta:.3}, n_p in [{}, {}]",
            d.records.len(),
            100.0 * d.within_fraction,
            d.c_const,
            d.n_p_min,
            d.n_p_max
        ),
    )
}

fn weyl_run(cfg: &WalkConfig, seed: u64) -> (Vec<WeylRow>, walklab::empirical::MarginalInvariance) {
    let start = StateXT::new(TorusPoint::float(&[0.1234, 0.5678]), 0.0);
    let burn_in = 1000;
    let tr = simulate(cfg, &start, burn_in + 100_000, seed).unwrap();
    let m = EmpiricalMeasure::uniform(tr.states[burn_in + 1..].to_vec());
    let rows = frequency_box(2, 3)
        .iter()
        .map(|k| {
            let z = weyl_sum(&m, k);
            WeylRow { k: format!("{k:?}"), re: z.re, im: z.im, abs: z.norm() }
        })
        .collect();
    let inv = real_marginal_invariance(&m, &[1.0, 2.0], median_window(&m, 60.0), 6).unwrap();
    (rows, inv)
}

fn c13_equidist(cfg: &WalkConfig) -> Outcome {
    let (rows, inv) = weyl_run(cfg, 113);
    let worst = rows.iter().map(|r| r.abs).fold(0.0, f64::max);
    outcome(
        rows.len() == 48 && worst <= 0.02 && inv.max_discrepancy <= 0.1,
        format!("max |W_k| = {worst:.4} over {} frequencies, marginal discrepancy {:.3}", rows.len(), inv.max_discrepancy),
    )
}

fn identical<T: serde::Serialize>(dir: &Path, name: &str, a: &[T], b: &[T]) -> bool {
    let (pa, pb) = (dir.join(format!("{name}-a.csv")), dir.join(format!("{name}-b.csv")));
    write_csv(&pa, a).unwrap();
    write_csv(&pb, b).unwrap();
    std::fs::read(pa).unwrap() == std::fs::read(pb).unwrap()
}

fn c14_reproducible(cfg: &WalkConfig) -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let mut checked = Vec::new();
    let mut ok = true;
    let mut check = |name: &str, same: bool| {
        ok &= same;
        checked.push(format!("{name}:{}", if same { "ok" } else { "FAIL" }));
    };
    let g = |s| growth_contraction_sweep(cfg, 10_000, 30, s).unwrap();
    check("growth", identical(dir, "growth", &[g(101)], &[g(101)]));
    let t = |s| return_tail(cfg, 20, 100_000, s, DEFAULT_CAP, (1, 20)).unwrap().rows;
    check("return_tail", identical(dir, "tail", &t(103), &t(103)));
    let l = || llt_1d_check(&LatticeDist::from_config(cfg).unwrap(), &[10_000]).unwrap();
    check("llt1d", identical(dir, "llt", &l(), &l()));
    let d = |s| density_convergence(cfg, &[5, 10, 20, 40], 500, s).unwrap().rows;
    check("density", identical(dir, "density", &d(107), &d(107)));
    check("angles", identical(dir, "angles", &angle_rows(&angles_run(cfg, 111)), &angle_rows(&angles_run(cfg, 111))));
    check("drift", identical(dir, "drift", &drift_rows(&drift_run(cfg, 112)), &drift_rows(&drift_run(cfg, 112))));
    let (wa, ma) = weyl_run(cfg, 113);
    let (wb, mb) = weyl_run(cfg, 113);
    check("weyl", identical(dir, "weyl", &wa, &wb));
    check("marginal", identical(dir, "marginal", &ma.rows, &mb.rows));
    let other = identical(dir, "weyl-seed", &wa, &weyl_run(cfg, 114).0);
    check("other-seed-differs", !other);
    outcome(ok, checked.join(" "))
}

type Criterion = fn(&WalkConfig) -> Outcome;

fn main() {
    let criteria: [(usize, &str, Criterion, u64); 14] = [
        (1, "growth/contraction inequalities", c1_growth, 30),
        (2, "atomic orbit and parity components", c2_atomic, 1),
        (3, "return-time Monte Carlo vs exact DP", c3_return_oracle, 60),
        (4, "return-time tail exponent", c4_tail, 600),
        (5, "one-dimensional local limit", c5_llt1d, 30),
        (6, "Lyapunov positivity and stability", c6_lyapunov, 120),
        (7, "density-point convergence", c7_density, 120),
        (8, "heavy tail of the induced walk", c8_heavy, 600),
        (9, "drift certificate", c9_certificate, 900),
        (10, "joint local limit scaling", c10_joint_llt, 1200),
        (11, "law of angles", c11_angles, 600),
        (12, "exponential drift", c12_drift, 900),
        (13, "equidistribution of a trajectory", c13_equidist, 120),
        (14, "reproducibility", c14_reproducible, 1800),
    ];
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let cfg = WalkConfig::reference();
    let mut failed = Vec::new();
    for (id, name, f, budget) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let out = f(&cfg);
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let pass = out.pass && in_time;
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.1}s of {budget}s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64()
        );
        if !pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
