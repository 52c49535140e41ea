//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line with the measured quantity and its tolerance.
//!
//! Run with `cargo test -p slepian-core --test acceptance -- --nocapture`
//! to see the lines.

use std::time::Instant;

use rand::Rng;

use slepian_core::apps::{
    crossing_prob_is, crossing_prob_plain, power_under_shift, CrossingSpec, PowerMethod, TestStat,
};
use slepian_core::grid::{SampledFunction, Support, TimeGrid};
use slepian_core::oracle::{
    condition_a_residual, empirical_covariance, fd_norm_sq, mc_expectation, mc_expectation_from,
    qp_min_norm, CovMatrix,
};
use slepian_core::rkhs::{KernelElement, SourceFunction, Variant};
use slepian_core::simulate::{slepian_cov, RngStream, Sampler, SamplerKind};

fn grid(m: usize, p: f64) -> TimeGrid {
    TimeGrid::new(m, p).unwrap()
}

fn report(criterion: &str, pass: bool, detail: std::fmt::Arguments<'_>, t0: Instant) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!(
        "{verdict} {criterion}: {detail} [{:.2}s]",
        t0.elapsed().as_secs_f64()
    );
    assert!(pass, "{criterion}: {detail}");
}

/// Criterion 1: closed-form corrected norm equals the QP infimum for the
/// constant source at p = 0.6, m = 400, with the paper-variant value 1/p
/// larger reported alongside.
#[test]
fn criterion_1_norm_oracle_agreement() {
    let t0 = Instant::now();
    let g = grid(400, 0.6);
    let src = SourceFunction::new(SampledFunction::constant(g, Support::Unit, 1.0)).unwrap();
    let corrected = src.norm_sq(Variant::Corrected);
    let paper = src.norm_sq(Variant::Paper);
    let qp = qp_min_norm(&src).unwrap().value;

    let pass = (corrected - 0.9).abs() <= 1e-12
        && (corrected - qp).abs() <= 1e-6
        && (paper - 1.5).abs() <= 1e-12
        && (paper - corrected / 0.6).abs() <= 1e-12
        && t0.elapsed().as_secs_f64() < 1.0;
    report(
        "criterion 1 (norm oracle agreement)",
        pass,
        format_args!("corrected={corrected:.12} qp={qp:.12} paper={paper:.12}"),
        t0,
    );
}

/// Criterion 2: for seeded random sources at p in {0.5, 0.6, 0.75}, m = 400,
/// the minimal generator is feasible to 1e-10 and attains the QP value to
/// 1e-6.
#[test]
fn criterion_2_minimizer_correctness() {
    let t0 = Instant::now();
    let mut worst_feas = 0.0f64;
    let mut worst_gap = 0.0f64;
    for (pi, p) in [0.5, 0.6, 0.75].into_iter().enumerate() {
        let g = grid(400, p);
        for trial in 0..20u64 {
            let mut rng = RngStream::new(900 + pi as u64, trial).rng();
            let cells: Vec<f64> = (0..g.m()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let f = SampledFunction::new(g, Support::Unit, cells).unwrap();
            let src = SourceFunction::new(f.clone()).unwrap();
            let fstar = src.min_norm_generator();

            // max |lag difference of s_{f*} - lag difference of s_f| at the
            // window nodes
            let d_f = f.cumulative().unwrap().lag_difference().unwrap();
            let d_star = fstar.cumulative().unwrap().lag_difference().unwrap();
            let feas = d_f
                .values()
                .iter()
                .zip(d_star.values())
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
            worst_feas = worst_feas.max(feas);

            let qp = qp_min_norm(&src).unwrap().value;
            worst_gap = worst_gap.max((fstar.l2_norm_sq() - qp).abs());
        }
    }
    let pass = worst_feas <= 1e-10 && worst_gap <= 1e-6 && t0.elapsed().as_secs_f64() < 10.0;
    report(
        "criterion 2 (minimizer correctness)",
        pass,
        format_args!("max feasibility residual={worst_feas:.3e} max |norm - qp|={worst_gap:.3e}"),
        t0,
    );
}

/// Criterion 3: the finite-dimensional quadratic form for the constant
/// shift (c=1, p=0.5) is nondecreasing over m = 64, 256, 1024 and within 1%
/// of 2.0 at m = 1024; the finite-dimensional log likelihood ratio matches
/// the closed-form corrected log density to 1e-2 over 200 sampled paths.
#[test]
fn criterion_3_finite_dimensional_convergence() {
    let t0 = Instant::now();
    let coarse = grid(64, 0.5);
    let h = KernelElement::constant(coarse, 1.0);

    let mut values = Vec::new();
    for m in [64usize, 256, 1024] {
        let g = grid(m, 0.5);
        values.push(fd_norm_sq(&h, &g).unwrap());
    }
    let monotone = values.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    let limit_ok = (values[2] - 2.0).abs() <= 0.01 * 2.0;

    let fine = grid(1024, 0.5);
    let h_fine = KernelElement::constant(fine, 1.0);
    let cov = CovMatrix::new(fine).unwrap();
    let h_nodes = h_fine.node_values();
    let sampler = Sampler::new(SamplerKind::Diff, fine).unwrap();
    let mut max_gap = 0.0f64;
    for j in 0..200u64 {
        let w = sampler.sample(RngStream::new(30, j));
        let fd = cov.log_lr(&h_nodes, w.values());
        let closed = h_fine
            .log_density(&w, Variant::Corrected)
            .unwrap()
            .log_density;
        max_gap = max_gap.max((fd - closed).abs());
    }
    let lr_ok = max_gap < 1e-2;

    let pass = monotone && limit_ok && lr_ok && t0.elapsed().as_secs_f64() < 30.0;
    report(
        "criterion 3 (finite-dimensional convergence)",
        pass,
        format_args!(
            "fd norms={values:?} (target 2.0), max |fd_log_lr - log_density|={max_gap:.3e}"
        ),
        t0,
    );
}

/// Criterion 4: condition A at p = 0.6, source f = 1, n = 1e5, m = 260
/// (the resolution closest to 256 that carries p = 0.6 on-grid). Corrected
/// constants: every node residual within 3 standard errors. Paper-variant
/// constants: a uniform offset within 10% of 0.3873 and above 10 standard
/// errors.
#[test]
fn criterion_4_condition_a() {
    let t0 = Instant::now();
    let g = grid(260, 0.6);
    let src = SourceFunction::new(SampledFunction::constant(g, Support::Unit, 1.0)).unwrap();
    let h = src.to_kernel();
    let sampler = Sampler::new(SamplerKind::Diff, g).unwrap();
    let n = 100_000;

    let corrected = condition_a_residual(&h, Variant::Corrected, n, 401, &sampler).unwrap();
    let corrected_ok = corrected.all_within(3.0);

    let paper = condition_a_residual(&h, Variant::Paper, n, 401, &sampler).unwrap();
    let offset = paper.mean_residual();
    let expected_offset = h.c() / 2.0; // 0.3873
    let offset_ok = (offset - expected_offset).abs() <= 0.1 * expected_offset;
    let detectable = paper
        .residuals
        .iter()
        .all(|e| e.mean.abs() > 10.0 * e.std_error);

    let pass = corrected_ok && offset_ok && detectable && t0.elapsed().as_secs_f64() < 60.0;
    report(
        "criterion 4 (condition A)",
        pass,
        format_args!(
            "corrected max residual={:.4e} (max 3*SE={:.4e}); paper offset={offset:.4} vs {expected_offset:.4}",
            corrected.max_abs_residual(),
            3.0 * corrected.max_std_error()
        ),
        t0,
    );
}

/// Criterion 5: Var(z) matches the corrected squared norm within 3 standard
/// errors for a constant, a pure-density, and a mixed shift at n = 1e5.
#[test]
fn criterion_5_representer_isometry() {
    let t0 = Instant::now();
    let g = grid(100, 0.6);
    let sampler = Sampler::new(SamplerKind::Diff, g).unwrap();
    let n = 100_000;

    let shifts = [
        ("c-only", KernelElement::constant(g, 1.0)),
        (
            "g-only",
            KernelElement::new(g, 0.0, SampledFunction::constant(g, Support::Window, 1.0))
                .unwrap(),
        ),
        (
            "mixed",
            KernelElement::new(
                g,
                0.5,
                SampledFunction::from_midpoints(g, Support::Window, |t| 1.2 * t),
            )
            .unwrap(),
        ),
    ];

    let mut pass = true;
    let mut detail = String::new();
    for (name, h) in &shifts {
        let target = h.norm_sq(Variant::Corrected);
        // E[z] = 0 exactly, so Var(z) is estimated by the mean of z^2.
        let est = mc_expectation(
            &sampler,
            |w| {
                let z = h.z(w, Variant::Corrected).unwrap();
                z * z
            },
            n,
            501,
        )
        .unwrap();
        let ok = (est.mean - target).abs() <= 3.0 * est.std_error;
        pass &= ok;
        detail.push_str(&format!(
            "{name}: Var(z)={:.4} vs |h|^2={target:.4} (3SE={:.4}); ",
            est.mean,
            3.0 * est.std_error
        ));
    }
    let pass = pass && t0.elapsed().as_secs_f64() < 60.0;
    report(
        "criterion 5 (representer isometry)",
        pass,
        format_args!("{detail}"),
        t0,
    );
}

/// Criterion 6: the density normalizes (`E[exp(log density)] = 1`) and the
/// change of measure moves expectations of `w(1)`, the node maximum, and
/// the crossing indicator at u = 1 within 3 combined standard errors, at
/// p = 0.5, tilt c = 1, n = 1e5.
#[test]
fn criterion_6_density_normalization_and_change_of_measure() {
    let t0 = Instant::now();
    let g = grid(64, 0.5);
    let h = KernelElement::constant(g, 1.0);
    let sampler = Sampler::new(SamplerKind::Diff, g).unwrap();
    let n = 100_000;

    let norm_est = mc_expectation(
        &sampler,
        |w| h.log_density(w, Variant::Corrected).unwrap().log_density.exp(),
        n,
        601,
    )
    .unwrap();
    let norm_ok = (norm_est.mean - 1.0).abs() <= 3.0 * norm_est.std_error;

    type Phi = fn(&slepian_core::grid::SampledPath) -> f64;
    let phis: [(&str, Phi); 3] = [
        ("w(1)", |w| w.last()),
        ("max", |w| w.max_value()),
        ("1{max>=1}", |w| if w.max_value() >= 1.0 { 1.0 } else { 0.0 }),
    ];

    let mut pass = norm_ok;
    let mut detail = format!("E[Z]={:.4} (3SE={:.4}); ", norm_est.mean, 3.0 * norm_est.std_error);
    for (name, phi) in phis {
        let shifted = mc_expectation_from(
            &sampler,
            |w| phi(&h.shift(w).unwrap()),
            n,
            601,
            0,
        )
        .unwrap();
        let reweighted = mc_expectation_from(
            &sampler,
            |w| phi(w) * h.log_density(w, Variant::Corrected).unwrap().log_density.exp(),
            n,
            601,
            n as u64,
        )
        .unwrap();
        let combined = (shifted.std_error.powi(2) + reweighted.std_error.powi(2)).sqrt();
        let ok = (shifted.mean - reweighted.mean).abs() <= 3.0 * combined;
        pass &= ok;
        detail.push_str(&format!(
            "{name}: {:.4} vs {:.4} (3SE={:.4}); ",
            shifted.mean,
            reweighted.mean,
            3.0 * combined
        ));
    }
    let pass = pass && t0.elapsed().as_secs_f64() < 120.0;
    report(
        "criterion 6 (density normalization, change of measure)",
        pass,
        format_args!("{detail}"),
        t0,
    );
}

/// Criterion 7: both samplers reproduce the covariance matrix entrywise to
/// 0.02 at n = 1e5, m = 128, p = 0.5; the time-scaling covariance identity
/// holds analytically and empirically.
#[test]
fn criterion_7_sampler_equivalence() {
    let t0 = Instant::now();
    let g = grid(128, 0.5);
    let n = 100_000;
    let cov = CovMatrix::new(g).unwrap();

    let mut max_dev = [0.0f64; 2];
    for (i, kind) in [SamplerKind::Diff, SamplerKind::Exact].into_iter().enumerate() {
        let sampler = Sampler::new(kind, g).unwrap();
        let emp = empirical_covariance(&sampler, n, 701 + i as u64).unwrap();
        max_dev[i] = (&emp - cov.sigma()).abs().max();
    }
    let cov_ok = max_dev[0] < 0.02 && max_dev[1] < 0.02;

    // time-scaling identity, analytically on the covariance function
    let mut analytic_ok = true;
    for b in [1.25f64, 2.0] {
        let p = 1.0 / b;
        for u in [0.0, 0.3, 0.8] {
            if u > b - 1.0 {
                continue;
            }
            let lhs = (1.0f64 - u).max(0.0);
            let rhs = slepian_cov(p, p + u / b, p).unwrap();
            analytic_ok &= (lhs - rhs).abs() <= 1e-12;
        }
    }

    // and empirically on scaled unit-lag paths
    use slepian_core::simulate::{scale_slepian, UnitLagPath};
    let gs = grid(32, 0.5);
    let lag = 8usize;
    let u = lag as f64 * (1.0 / gs.p()) / gs.m() as f64;
    let expected = (1.0f64 - u).max(0.0);
    let ns = 100_000;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for j in 0..ns {
        let x = UnitLagPath::sample(gs, RngStream::new(702, j as u64));
        let y = scale_slepian(&x).unwrap();
        let prod = y.value(0) * y.value(lag);
        sum += prod;
        sum_sq += prod * prod;
    }
    let mean = sum / ns as f64;
    let se = ((sum_sq / ns as f64 - mean * mean) / ns as f64).sqrt();
    let empirical_ok = (mean - expected).abs() <= 3.0 * se;

    let pass = cov_ok && analytic_ok && empirical_ok;
    report(
        "criterion 7 (sampler equivalence)",
        pass,
        format_args!(
            "max |emp cov - sigma|: diff={:.4}, exact={:.4} (max 0.02); scaled cov {mean:.4} vs {expected:.4} (3SE={:.4})",
            max_dev[0],
            max_dev[1],
            3.0 * se
        ),
        t0,
    );
}

/// Criterion 8: importance sampling agrees with plain Monte Carlo on the
/// crossing probability; direct and reweighted power agree; the zero shift
/// recovers the nominal level.
#[test]
fn criterion_8_applications_consistency() {
    let t0 = Instant::now();
    let g = grid(64, 0.5);
    let n = 100_000;

    let tilt = KernelElement::constant(g, 1.0);
    let plain = crossing_prob_plain(&CrossingSpec::new(1.0, g, None, n, 801).unwrap()).unwrap();
    let is = crossing_prob_is(
        &CrossingSpec::new(1.0, g, Some(tilt.clone()), n, 802).unwrap(),
        Variant::Corrected,
    )
    .unwrap();
    let combined = (plain.std_error.powi(2) + is.std_error.powi(2)).sqrt();
    let crossing_ok = (plain.mean - is.mean).abs() <= 3.0 * combined;

    let power = power_under_shift(
        &tilt,
        TestStat::SupNorm,
        0.05,
        n,
        803,
        PowerMethod::Both,
        Variant::Corrected,
    )
    .unwrap();
    let (direct, reweighted) = (power.direct.unwrap(), power.reweighted.unwrap());
    let comb_power = (direct.std_error.powi(2) + reweighted.std_error.powi(2)).sqrt();
    let power_ok = (direct.mean - reweighted.mean).abs() <= 3.0 * comb_power;

    let null = power_under_shift(
        &KernelElement::zero(g),
        TestStat::SupNorm,
        0.05,
        n,
        804,
        PowerMethod::Direct,
        Variant::Corrected,
    )
    .unwrap()
    .direct
    .unwrap();
    let level_ok = (null.mean - 0.05).abs() <= 3.0 * null.std_error.max(1e-12);

    let pass = crossing_ok && power_ok && level_ok;
    report(
        "criterion 8 (applications consistency)",
        pass,
        format_args!(
            "crossing plain={:.4} IS={:.4} (3SE={:.4}); power direct={:.4} reweighted={:.4} (3SE={:.4}); size={:.4} vs 0.05",
            plain.mean, is.mean, 3.0 * combined,
            direct.mean, reweighted.mean, 3.0 * comb_power,
            null.mean
        ),
        t0,
    );
}

/// Criterion 9: estimates are bitwise identical across worker counts.
#[test]
fn criterion_9_reproducibility_across_workers() {
    let t0 = Instant::now();
    let g = grid(64, 0.5);
    let h = KernelElement::constant(g, 1.0);
    let n = 20_000;

    let run_all = |threads: usize| -> Vec<u64> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let sampler = Sampler::new(SamplerKind::Diff, g).unwrap();
                let mut bits = Vec::new();
                let mc = mc_expectation(&sampler, |w| w.last() * w.last(), n, 901).unwrap();
                bits.push(mc.mean.to_bits());
                bits.push(mc.std_error.to_bits());

                let cond =
                    condition_a_residual(&h, Variant::Corrected, n, 902, &sampler).unwrap();
                bits.push(cond.max_abs_residual().to_bits());

                let spec = CrossingSpec::new(1.0, g, Some(h.clone()), n, 903).unwrap();
                bits.push(crossing_prob_plain(&spec).unwrap().mean.to_bits());
                bits.push(
                    crossing_prob_is(&spec, Variant::Corrected)
                        .unwrap()
                        .mean
                        .to_bits(),
                );

                let power = power_under_shift(
                    &h,
                    TestStat::SupNorm,
                    0.05,
                    n,
                    904,
                    PowerMethod::Both,
                    Variant::Corrected,
                )
                .unwrap();
                bits.push(power.critical.to_bits());
                bits.push(power.direct.unwrap().mean.to_bits());
                bits.push(power.reweighted.unwrap().mean.to_bits());

                let emp = empirical_covariance(&sampler, 5000, 905).unwrap();
                bits.push(emp[(3, 7)].to_bits());
                bits
            })
    };

    let one = run_all(1);
    let four = run_all(4);
    let eight = run_all(8);
    let pass = one == four && four == eight;
    report(
        "criterion 9 (reproducibility across workers)",
        pass,
        format_args!("{} quantities bitwise identical across 1/4/8 workers", one.len()),
        t0,
    );
}
