//! End-to-end acceptance checks. Each test prints one PASS/FAIL line to
//! stderr (bypassing the test harness capture) and then asserts.

#[path = "../../core/tests/common/oracle.rs"]
mod oracle;

use std::io::Write;
use std::time::{Duration, Instant};

use irs_swipt::correlation::{build_matrix, CorrelationMatrix, CorrelationModel};
use irs_swipt::metrics::{
    average_harvested_energy, outage_fullcorr_equal, outage_fullcorr_random,
    outage_fullcorr_random_with_tolerance, outage_gamma_approx, outage_uncorrelated_exact,
};
use irs_swipt::moments::{
    analytic_moments, moments_equal, moments_optimal, moments_random, moments_uniform,
    OptimalCorrelation,
};
use irs_swipt::montecarlo::{McEstimate, Simulator};
use irs_swipt::specfun::{bessel_k, ln_bessel_k, ln_gamma, reg_lower_inc_gamma};
use irs_swipt::{MomentPair, PhaseConfig, PhaseMode, SystemParams};
use irs_swipt_cli::{run_sweep, Preset, ResultRow, SweepSpec};

const TRIALS: u64 = 1_000_000;

fn report(id: u32, title: &str, failures: &[String], elapsed: Duration, budget: Option<Duration>) {
    let over_budget = budget.filter(|b| elapsed > *b);
    let passed = failures.is_empty() && over_budget.is_none();
    let verdict = if passed { "PASS" } else { "FAIL" };
    let mut line = format!(
        "acceptance {id} {verdict}: {title} ({:.2} s",
        elapsed.as_secs_f64()
    );
    if let Some(b) = budget {
        line.push_str(&format!(", budget {} s", b.as_secs()));
    }
    line.push(')');
    if !failures.is_empty() {
        let shown: Vec<&str> = failures.iter().take(6).map(String::as_str).collect();
        line.push_str(&format!(
            "; {} violation(s): {}",
            failures.len(),
            shown.join("; ")
        ));
        if failures.len() > shown.len() {
            line.push_str("; ...");
        }
    }
    writeln!(std::io::stderr().lock(), "{line}").unwrap();
    assert!(passed, "{line}");
}

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        (got / want - 1.0).abs()
    }
}

#[test]
fn criterion_1_corollary_equivalence() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for m in 2..=12 {
        for step in 0..=10 {
            let rho = step as f64 / 10.0;
            let r = build_matrix(&CorrelationModel::Uniform { rho }, m).unwrap();
            for (mode, general) in [
                (PhaseMode::Random, moments_random(&r)),
                (PhaseMode::Equal, moments_equal(&r)),
            ] {
                let closed = moments_uniform(mode, m, rho).unwrap();
                for (name, g, c) in [
                    ("mu1", general.mu1, closed.mu1),
                    ("mu2", general.mu2, closed.mu2),
                ] {
                    let e = rel_err(g, c);
                    if e > 1e-9 {
                        failures.push(format!("{mode} M={m} rho={rho} {name}: rel {e:.1e}"));
                    }
                }
            }
        }
    }
    report(
        1,
        "general sums vs uniform closed forms, M 2..12, rho 0..1, rel 1e-9",
        &failures,
        start.elapsed(),
        Some(Duration::from_secs(10)),
    );
}

#[test]
fn criterion_2_boundary_moments() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut check = |label: String, got: MomentPair, mu1: f64, mu2: f64| {
        if got.mu1 != mu1 || got.mu2 != mu2 {
            failures.push(format!(
                "{label}: ({}, {}) vs ({mu1}, {mu2})",
                got.mu1, got.mu2
            ));
        }
    };
    for m in 1..=10usize {
        let mf = m as f64;
        let zero = build_matrix(&CorrelationModel::Uniform { rho: 0.0 }, m).unwrap();
        let one = build_matrix(&CorrelationModel::Uniform { rho: 1.0 }, m).unwrap();
        let uncorrelated = (mf, 2.0 * mf * (mf + 1.0));
        for mode in [PhaseMode::Random, PhaseMode::Equal] {
            check(
                format!("{mode} rho=0 M={m} sums"),
                analytic_moments(mode, &zero).unwrap(),
                uncorrelated.0,
                uncorrelated.1,
            );
            check(
                format!("{mode} rho=0 M={m} closed"),
                moments_uniform(mode, m, 0.0).unwrap(),
                uncorrelated.0,
                uncorrelated.1,
            );
        }
        let equal_full = (mf * mf, 4.0 * mf.powi(4));
        check(
            format!("equal rho=1 M={m} sums"),
            moments_equal(&one),
            equal_full.0,
            equal_full.1,
        );
        check(
            format!("equal rho=1 M={m} closed"),
            moments_uniform(PhaseMode::Equal, m, 1.0).unwrap(),
            equal_full.0,
            equal_full.1,
        );
        let random_full = (mf, 4.0 * mf * (2.0 * mf - 1.0));
        check(
            format!("random rho=1 M={m} sums"),
            moments_random(&one),
            random_full.0,
            random_full.1,
        );
        check(
            format!("random rho=1 M={m} closed"),
            moments_uniform(PhaseMode::Random, m, 1.0).unwrap(),
            random_full.0,
            random_full.1,
        );
    }
    report(
        2,
        "boundary moments, exact equality for M <= 10",
        &failures,
        start.elapsed(),
        None,
    );
}

/// Closed-form moments for a simulated cell.
fn closed_moments(mode: PhaseMode, r: &CorrelationMatrix) -> MomentPair {
    if mode == PhaseMode::Optimal {
        let c = if r.is_identity() {
            OptimalCorrelation::Uncorrelated
        } else {
            OptimalCorrelation::FullyCorrelated
        };
        return moments_optimal(r.dim(), c);
    }
    analytic_moments(mode, r).unwrap()
}

#[test]
fn criterion_3_monte_carlo_vs_closed_forms() {
    let start = Instant::now();
    let params = SystemParams::default();
    let mut failures = Vec::new();
    let mut checks = 0;
    let mut seed = 300;
    let mut expect = |label: &str, what: &str, est: McEstimate, exact: f64, sigmas: f64| {
        checks += 1;
        if !est.within(exact, sigmas) {
            failures.push(format!(
                "{label} {what}: MC {:.5} vs {:.5} ({:.1} SE)",
                est.value,
                exact,
                est.z_score(exact)
            ));
        }
    };
    for n in 2..=4usize {
        let m = n * n;
        let models = [
            CorrelationModel::Identity,
            CorrelationModel::Uniform { rho: 0.5 },
            CorrelationModel::Uniform { rho: 1.0 },
            CorrelationModel::ExponentialLinear { rho: 0.5 },
            CorrelationModel::ExponentialGrid {
                rho: 0.5,
                n_side: n,
            },
        ];
        for model in &models {
            let r = build_matrix(model, m).unwrap();
            let boundary = r.is_identity()
                || matches!(model, CorrelationModel::Uniform { rho } if *rho == 1.0);
            for mode in [PhaseMode::Random, PhaseMode::Equal, PhaseMode::Optimal] {
                if mode == PhaseMode::Optimal && !boundary {
                    continue;
                }
                seed += 1;
                let summary = Simulator::new(PhaseConfig::from(mode), &r)
                    .unwrap()
                    .run(Some(&params), TRIALS, seed)
                    .unwrap();
                let label = format!("{mode} {model} M={m}");
                let moments = closed_moments(mode, &r);
                expect(&label, "mu1", summary.mu1(), moments.mu1, 5.0);
                expect(&label, "mu2", summary.mu2(), moments.mu2, 5.0);
                expect(
                    &label,
                    "energy",
                    summary.avg_energy(),
                    average_harvested_energy(&moments, &params),
                    5.0,
                );

                let exact = if r.is_identity() && mode != PhaseMode::Optimal {
                    Some(("prop1", outage_uncorrelated_exact(m, &params).unwrap()))
                } else if boundary && !r.is_identity() {
                    Some(match mode {
                        PhaseMode::Random => ("prop2", outage_fullcorr_random(m, &params).unwrap()),
                        _ => ("prop3", outage_fullcorr_equal(m, &params).unwrap()),
                    })
                } else {
                    None
                };
                if let Some((name, p)) = exact {
                    expect(&label, &format!("{name} outage"), summary.outage(), p, 3.0);
                }
            }
        }
    }
    let title = format!("{checks} MC checks, 1e6 trials, 5 SE moments/energy, 3 SE outage");
    report(
        3,
        &title,
        &failures,
        start.elapsed(),
        Some(Duration::from_secs(600)),
    );
}

#[test]
fn criterion_4_gamma_approximation_band() {
    let start = Instant::now();
    let params = SystemParams::default();
    let mut failures = Vec::new();
    let mut worst = (0.0f64, String::new());
    let mut track = |label: String, gap: f64| {
        if gap > worst.0 {
            worst = (gap, label.clone());
        }
        if gap > 0.05 {
            failures.push(format!("{label}: |gap| {gap:.4}"));
        }
    };
    for n in 2..=8usize {
        let m = n * n;
        let approx =
            outage_gamma_approx(&moments_random(&CorrelationMatrix::identity(m)), &params).unwrap();
        let exact = outage_uncorrelated_exact(m, &params).unwrap();
        track(format!("rho=0 N={n} vs exact"), (approx - exact).abs());
    }
    for n in 2..=8usize {
        let m = n * n;
        let model = CorrelationModel::ExponentialLinear { rho: 0.5 };
        let r = build_matrix(&model, m).unwrap();
        for mode in [PhaseMode::Random, PhaseMode::Equal] {
            let approx =
                outage_gamma_approx(&analytic_moments(mode, &r).unwrap(), &params).unwrap();
            let mc = Simulator::new(PhaseConfig::from(mode), &r)
                .unwrap()
                .run(Some(&params), TRIALS, 400 + n as u64)
                .unwrap()
                .outage();
            track(
                format!("{mode} rho=0.5 N={n} vs MC"),
                (approx - mc.value).abs(),
            );
        }
    }
    let title = format!(
        "gamma approximation within 0.05 (largest gap {:.4} at {})",
        worst.0, worst.1
    );
    report(4, &title, &failures, start.elapsed(), None);
}

fn analytic_rows(preset: Preset) -> Vec<ResultRow> {
    run_sweep(&SweepSpec {
        analytic_only: true,
        ..preset.spec()
    })
    .unwrap()
}

fn value(rows: &[ResultRow], mode: PhaseMode, rho: f64, n: usize) -> Option<f64> {
    rows.iter()
        .find(|r| r.phase_mode == mode && r.rho == Some(rho) && r.n_side == Some(n))
        .and_then(|r| r.analytic_value)
}

#[test]
fn criterion_5_fig1_orderings() {
    let start = Instant::now();
    let rows = analytic_rows(Preset::Fig1);
    let mut failures = Vec::new();
    let rhos = [0.0, 0.5, 1.0];
    for n in 2..=8 {
        for rho in [0.5, 1.0] {
            let (eq, rnd) = (
                value(&rows, PhaseMode::Equal, rho, n),
                value(&rows, PhaseMode::Random, rho, n),
            );
            match (eq, rnd) {
                (Some(e), Some(r)) if e >= r => {}
                other => failures.push(format!("equal >= random at rho={rho} N={n}: {other:?}")),
            }
        }
        for mode in [PhaseMode::Random, PhaseMode::Equal, PhaseMode::Optimal] {
            let present: Vec<f64> = rhos
                .iter()
                .filter_map(|&rho| value(&rows, mode, rho, n))
                .collect();
            let (Some(lo), Some(hi)) = (value(&rows, mode, 0.0, n), value(&rows, mode, 1.0, n))
            else {
                failures.push(format!("{mode} N={n}: missing boundary rows"));
                continue;
            };
            if present.iter().any(|&v| v < lo) {
                failures.push(format!("{mode} N={n}: rho=0 is not the minimum"));
            }
            if present.iter().any(|&v| v > hi) {
                failures.push(format!("{mode} N={n}: rho=1 is not the maximum"));
            }
        }
    }
    let gap = |n| {
        let base = value(&rows, PhaseMode::Random, 0.0, n).unwrap();
        (value(&rows, PhaseMode::Random, 0.5, n).unwrap() - base) / base
    };
    let (g2, g8) = (gap(2), gap(8));
    if g8 >= g2 {
        failures.push(format!(
            "random rho=0.5 gap N=8 {g8:.4} not below N=2 {g2:.4}"
        ));
    }
    let title =
        format!("fig1 orderings; random rho=0.5 relative gap {g2:.4} at N=2, {g8:.4} at N=8");
    report(5, &title, &failures, start.elapsed(), None);
}

#[test]
fn criterion_6_fig2_orderings() {
    let start = Instant::now();
    let rows = analytic_rows(Preset::Fig2);
    let mut failures = Vec::new();
    for n in 2..=8 {
        for mode in [PhaseMode::Random, PhaseMode::Equal, PhaseMode::Optimal] {
            let (Some(uncorrelated), Some(full)) =
                (value(&rows, mode, 0.0, n), value(&rows, mode, 1.0, n))
            else {
                failures.push(format!("{mode} N={n}: missing rows"));
                continue;
            };
            let ok = match mode {
                PhaseMode::Equal => full < uncorrelated,
                _ => uncorrelated < full,
            };
            if !ok {
                failures.push(format!(
                    "{mode} N={n}: rho=0 {uncorrelated:.4}, rho=1 {full:.4}"
                ));
            }
        }
    }
    report(
        6,
        "fig2 orderings between uncorrelated and fully correlated outage",
        &failures,
        start.elapsed(),
        None,
    );
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
}

#[test]
fn criterion_7_special_functions() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst = [0.0f64; 4];
    for x in log_grid(1e-3, 1e2, 400) {
        for order in [0, 1] {
            let e = rel_err(bessel_k(order, x).unwrap(), oracle::bessel_k(order, x));
            worst[0] = worst[0].max(e);
            if e > 1e-10 {
                failures.push(format!("K_{order}({x:.4e}) rel {e:.1e}"));
            }
        }
    }
    for order in 2..=64u32 {
        for x in log_grid(0.01, 50.0, 40) {
            let e = ((ln_bessel_k(order, x).unwrap() - oracle::ln_bessel_k(order, x)).exp() - 1.0)
                .abs();
            worst[1] = worst[1].max(e);
            if e > 1e-10 {
                failures.push(format!("K_{order}({x:.4e}) rel {e:.1e}"));
            }
        }
    }
    for x in log_grid(1e-3, 1e3, 400) {
        let expected = oracle::ln_gamma(x);
        let e = (ln_gamma(x).unwrap() - expected).abs() / expected.abs().max(1.0);
        worst[2] = worst[2].max(e);
        if e > 1e-12 {
            failures.push(format!("lnGamma({x:.4e}) err {e:.1e}"));
        }
    }
    for a in [
        0.05, 0.2, 0.5, 1.0, 1.5, 2.5, 4.0, 7.0, 12.0, 25.0, 50.0, 80.0,
    ] {
        for x in log_grid(1e-3, 200.0, 80) {
            let e = (reg_lower_inc_gamma(a, x).unwrap() - oracle::reg_lower_inc_gamma(a, x)).abs();
            worst[3] = worst[3].max(e);
            if e > 1e-12 {
                failures.push(format!("P({a}, {x:.4e}) abs {e:.1e}"));
            }
        }
    }
    let title = format!(
        "specfun vs quadrature oracles; worst K0/K1 {:.1e}, K_2..64 {:.1e}, lnGamma {:.1e}, P(a,x) {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    );
    report(
        7,
        &title,
        &failures,
        start.elapsed(),
        Some(Duration::from_secs(30)),
    );
}

#[test]
fn criterion_8_quadrature_self_consistency() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for m in [1usize, 2, 4, 9, 16, 25, 36, 49, 64, 100] {
        for tau in [0.1, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let p = SystemParams {
                rate_threshold: tau,
                ..Default::default()
            };
            let loose = outage_fullcorr_random_with_tolerance(m, &p, 1e-9).unwrap();
            let tight = outage_fullcorr_random_with_tolerance(m, &p, 1e-12).unwrap();
            let d = (loose - tight).abs();
            worst = worst.max(d);
            if d >= 1e-8 {
                failures.push(format!("M={m} tau={tau}: {d:.1e}"));
            }
        }
        for tau in [0.0, 1e-12, 1e-15] {
            let p = SystemParams {
                rate_threshold: tau,
                ..Default::default()
            };
            let v = outage_fullcorr_random(m, &p).unwrap();
            if v > 1e-9 {
                failures.push(format!("M={m} tau={tau}: limit {v:.1e}"));
            }
        }
    }
    let title = format!("fully correlated random-phase quadrature, tol 1e-9 vs 1e-12 (worst {worst:.1e}); xi -> 0 limit");
    report(8, &title, &failures, start.elapsed(), None);
}
