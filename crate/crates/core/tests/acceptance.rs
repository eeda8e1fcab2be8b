//! Acceptance suite: one test per advertised guarantee, each printing a
//! PASS/FAIL line with the measured numbers.
//!
//! Run with `cargo test -p gaussian-nm --test acceptance -- --nocapture`
//! to see the per-criterion lines on success too.

use std::f64::consts::PI;

use gaussian_nm::channel::{devectorize, vectorize, CovarianceState, GaussianChannel};
use gaussian_nm::divisibility::{intermediate_map, negativity_rate, nm_matrix, total_nm, ChannelFamily};
use gaussian_nm::linalg::RealMatrix;
use gaussian_nm::models::ohmic::{ohmic_qbm_family_parts, OhmicBath};
use gaussian_nm::models::{
    damping_family, damping_nm_closed_form, ode_oracle, qbm_f_closed_form, qbm_family,
    DampingModel, OdeGenerator, QbmModel,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn verdict(criterion: &str, failures: &[String], detail: String) {
    if failures.is_empty() {
        println!("ACCEPTANCE {criterion}: PASS — {detail}");
    } else {
        println!("ACCEPTANCE {criterion}: FAIL — {detail}");
        for f in failures.iter().take(10) {
            println!("    {f}");
        }
        panic!("{criterion} failed with {} violation(s)", failures.len());
    }
}

fn cos_damping_model() -> DampingModel {
    DampingModel::new(0.1, |t: f64| t.cos()).unwrap()
}

#[test]
fn criterion_1_damping_sign() {
    // F(t) > 0 exactly on (π/2, 3π/2) up to a 1e-3 boundary band, F < 1e-8
    // elsewhere, for γ(t) = cos t, α = 0.1.
    let fam = damping_family(&cos_damping_model(), 2.0 * PI + 0.1).unwrap();
    let mut failures = Vec::new();
    let n = 629;
    for i in 0..n {
        let t = 2.0 * PI * i as f64 / (n - 1) as f64;
        if (t - PI / 2.0).abs() <= 1e-3 || (t - 3.0 * PI / 2.0).abs() <= 1e-3 {
            continue;
        }
        let f = negativity_rate(&fam, t, None).unwrap().big_f;
        let inside = t > PI / 2.0 && t < 3.0 * PI / 2.0;
        if inside && !(f > 0.0) {
            failures.push(format!("expected F > 0 at t = {t:.4}, got {f:.3e}"));
        }
        if !inside && !(f < 1e-8) {
            failures.push(format!("expected F < 1e-8 at t = {t:.4}, got {f:.3e}"));
        }
    }
    verdict("1 (damping sign criterion)", &failures, format!("{n} grid points, band 1e-3"));
}

#[test]
fn criterion_2_damping_measure() {
    // N over [0, 2π] = 0.4 within 1e-3 relative, and it matches the
    // closed-form quadrature route.
    let model = cos_damping_model();
    let fam = damping_family(&model, 2.0 * PI + 0.1).unwrap();
    let report = total_nm(&fam, 0.0, 2.0 * PI, 201, None).unwrap();
    let closed = damping_nm_closed_form(&model, 0.0, 2.0 * PI).unwrap();
    let mut failures = Vec::new();
    if !((report.total - 0.4).abs() / 0.4 < 1e-3) {
        failures.push(format!("pipeline total {:.6} differs from 0.4 beyond 1e-3 relative", report.total));
    }
    if !((closed - 0.4).abs() / 0.4 < 1e-6) {
        failures.push(format!("closed-form total {closed:.8} differs from 0.4"));
    }
    verdict(
        "2 (damping measure)",
        &failures,
        format!("pipeline N = {:.6}, closed form N = {:.6}", report.total, closed),
    );
}

#[test]
fn criterion_3_qbm_closed_form_equivalence() {
    // Ten randomized smooth coefficient pairs: pipeline F(t) matches
    // ½(|Δ-γ| + |Δ+γ|) - Δ within 1e-4 relative on a 200-point grid,
    // outside a 1e-3·max(F) guard band around the rate kinks (where any
    // finite-ε extraction is first-order biased by construction).
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = Vec::new();
    let mut worst_rel: f64 = 0.0;
    for pair in 0..10 {
        let a0 = rng.random_range(-0.3..0.5);
        let a1 = rng.random_range(0.1..0.5);
        let w1 = rng.random_range(0.5..2.0);
        let p1 = rng.random_range(0.0..2.0 * PI);
        let b0 = rng.random_range(0.1..0.6);
        let b1 = rng.random_range(0.05..0.4);
        let w2 = rng.random_range(0.5..2.0);
        let p2 = rng.random_range(0.0..2.0 * PI);
        let gamma = move |t: f64| a0 + a1 * (w1 * t + p1).cos();
        let delta = move |t: f64| b0 + b1 * (w2 * t + p2).sin();
        let model = QbmModel::new(1.0, move |t| (gamma(t), delta(t))).unwrap();
        let fam = qbm_family(&model, 8.1).unwrap();

        let cf: Vec<f64> = (0..200)
            .map(|i| {
                let t = 8.0 * i as f64 / 199.0;
                qbm_f_closed_form(gamma(t), delta(t))
            })
            .collect();
        let max_cf = cf.iter().copied().fold(0.0f64, f64::max);
        if max_cf < 1e-12 {
            // Markovian draw (Δ ≥ |γ| throughout): the pipeline must agree
            // that the rate vanishes.
            for (i, _) in cf.iter().enumerate() {
                let t = 8.0 * i as f64 / 199.0;
                let pipe = negativity_rate(&fam, t, None).unwrap().big_f;
                if pipe > 1e-10 {
                    failures.push(format!("pair {pair} t = {t:.3}: expected F = 0, pipeline {pipe:.3e}"));
                }
            }
            continue;
        }
        for (i, &cf_t) in cf.iter().enumerate() {
            let t = 8.0 * i as f64 / 199.0;
            if cf_t <= 1e-3 * max_cf {
                continue;
            }
            let pipe = negativity_rate(&fam, t, None).unwrap().big_f;
            let rel = (pipe - cf_t).abs() / cf_t;
            worst_rel = worst_rel.max(rel);
            if rel > 1e-4 {
                failures.push(format!(
                    "pair {pair} t = {t:.3}: pipeline {pipe:.6e} vs closed form {cf_t:.6e} (rel {rel:.2e})"
                ));
            }
        }
    }

    // CP-matrix eigenvalues agree with the first-order expansion
    // ν ≈ (Δ∓γ)ε, with residual shrinking like ε².
    for _ in 0..3 {
        let g = rng.random_range(0.3..0.6);
        let d = rng.random_range(0.05..0.25);
        let model = QbmModel::new(1.3, move |_| (g, d)).unwrap();
        let fam = qbm_family(&model, 2.0).unwrap();
        let bound = 8.0 * (g.abs() + d.abs() + 1.0).powi(2);
        let mut residuals = Vec::new();
        for &eps in &[1e-3, 5e-4, 2.5e-4] {
            let spectrum = nm_matrix(&fam, 1.0, eps).unwrap().eigenvalues();
            let mut first_order = [(d - g) * eps, (d + g) * eps];
            first_order.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let r = (spectrum.values()[0] - first_order[0])
                .abs()
                .max((spectrum.values()[1] - first_order[1]).abs());
            if r > bound * eps * eps {
                failures.push(format!(
                    "eigenvalue expansion residual {r:.3e} exceeds C·eps² = {:.3e} at eps = {eps:.1e}",
                    bound * eps * eps
                ));
            }
            residuals.push(r);
        }
        let ratio = residuals[0] / residuals[2].max(1e-300);
        if !(8.0..32.0).contains(&ratio) {
            failures.push(format!("residuals {residuals:?} do not scale like eps² (ratio {ratio:.2})"));
        }
    }
    verdict(
        "3 (QBM closed-form equivalence)",
        &failures,
        format!("10 coefficient pairs x 200 points, worst relative error {worst_rel:.3e}"),
    );
}

#[test]
fn criterion_4_ohmic_high_temperature() {
    // x = 0.1 has a nonempty non-Markovian window that coincides with
    // {τ : Δ(τ) < 0}; window length and the measure strictly decrease
    // across x ∈ {0.1, 0.2, 0.3}. All three on a common grid over [0, 45].
    let mut failures = Vec::new();
    let mut extents = Vec::new();
    let mut totals = Vec::new();
    for &x in &[0.1, 0.2, 0.3] {
        let bath = OhmicBath::high_temperature(x);
        let (fam, coeffs) = ohmic_qbm_family_parts(&bath, 46.0).unwrap();
        let report = total_nm(&fam, 0.0, 45.0, 1501, None).unwrap();
        // The window threshold sits just above the damping-coefficient
        // scale: then F > tol_w forces Δ < 0 and Δ < -tol_w forces F > tol_w,
        // so the two windows must agree pointwise on the grid.
        let max_gamma = report
            .grid
            .iter()
            .map(|&t| coeffs.gamma_at(t).abs())
            .fold(0.0f64, f64::max);
        let tol_w = 1.05 * max_gamma;
        let mut window_points = 0usize;
        for s in &report.samples {
            let d = coeffs.delta_at(s.t);
            if s.big_f > tol_w {
                window_points += 1;
                if d >= 0.0 {
                    failures.push(format!("x = {x}: F = {:.3e} > tol at τ = {:.3} but Δ = {d:.3e} >= 0", s.big_f, s.t));
                }
            }
            if d < -tol_w && s.big_f <= tol_w {
                failures.push(format!("x = {x}: Δ = {d:.3e} < 0 at τ = {:.3} but F = {:.3e}", s.t, s.big_f));
            }
        }
        if x == 0.1 && window_points == 0 {
            failures.push("x = 0.1: non-Markovian window is empty".into());
        }
        extents.push(report.window_extent(tol_w));
        totals.push(report.total);
    }
    if !(extents[0] > extents[1] && extents[1] > extents[2]) {
        failures.push(format!("window lengths not strictly decreasing: {extents:?}"));
    }
    if !(totals[0] > totals[1] && totals[1] > totals[2]) {
        failures.push(format!("measures not strictly decreasing: {totals:?}"));
    }
    verdict(
        "4 (Ohmic high-T regime)",
        &failures,
        format!("window lengths {extents:?}, measures {totals:?}"),
    );
}

#[test]
fn criterion_5_ohmic_low_temperature() {
    // At low temperature a non-Markovian window exists with Δ > 0 and
    // Δ < γ inside it, for at least one x ≥ 1 in {1.0, 2.0}.
    let mut witnesses = Vec::new();
    for &x in &[1.0, 2.0] {
        let bath = OhmicBath::low_temperature(x);
        let (fam, coeffs) = ohmic_qbm_family_parts(&bath, 41.0).unwrap();
        let report = total_nm(&fam, 0.0, 40.0, 801, None).unwrap();
        let count = report
            .samples
            .iter()
            .filter(|s| {
                let d = coeffs.delta_at(s.t);
                let g = coeffs.gamma_at(s.t);
                s.big_f > 1e-8 && d > 0.0 && d < g
            })
            .count();
        if count > 0 {
            witnesses.push((x, count));
        }
    }
    let failures = if witnesses.is_empty() {
        vec!["no x in {1.0, 2.0} shows a window with Δ > 0 and Δ < γ".to_string()]
    } else {
        Vec::new()
    };
    verdict(
        "5 (Ohmic low-T regime)",
        &failures,
        format!("witnesses (x, grid points with F > 0, 0 < Δ < γ): {witnesses:?}"),
    );
}

#[test]
fn criterion_6_asymptotic_markovianity() {
    // Every bundled regime becomes and stays Markovian: F(τ) < 1e-6 for all
    // grid τ beyond a finite reported τ*.
    let cases: [(OhmicBath, &str, f64); 6] = [
        (OhmicBath::high_temperature(0.1), "high x=0.1", 60.0),
        (OhmicBath::high_temperature(0.2), "high x=0.2", 20.0),
        (OhmicBath::high_temperature(0.3), "high x=0.3", 20.0),
        (OhmicBath::low_temperature(0.2), "low x=0.2", 70.0),
        (OhmicBath::low_temperature(1.0), "low x=1.0", 140.0),
        (OhmicBath::low_temperature(2.0), "low x=2.0", 200.0),
    ];
    let mut failures = Vec::new();
    let mut stars = Vec::new();
    for (bath, label, horizon) in cases {
        let fam = gaussian_nm::models::ohmic_qbm_family(&bath, horizon + 1.0).unwrap();
        let report = total_nm(&fam, 0.0, horizon, 1401, None).unwrap();
        match report.markovian_tail_start(1e-6) {
            Some(tau_star) if tau_star < 0.9 * horizon => {
                let tail_ok = report
                    .samples
                    .iter()
                    .filter(|s| s.t > tau_star)
                    .all(|s| s.big_f < 1e-6);
                if !tail_ok {
                    failures.push(format!("{label}: F ≥ 1e-6 recurs after τ* = {tau_star:.2}"));
                }
                stars.push(format!("{label}: τ* = {tau_star:.2}"));
            }
            other => failures.push(format!("{label}: no Markovian tail inside [0, {horizon}] (τ* = {other:?})")),
        }
    }
    verdict("6 (asymptotic Markovianity)", &failures, stars.join(", "));
}

#[test]
fn criterion_7_structural_suites() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut failures = Vec::new();

    let random_channel = |rng: &mut ChaCha8Rng, n: usize| {
        let d = 2 * n;
        let x = RealMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        let a = RealMatrix::from_fn(d, d, |_, _| rng.random_range(-0.5..0.5));
        GaussianChannel::new(x, &a * a.transpose()).unwrap()
    };
    let random_state = |rng: &mut ChaCha8Rng, n: usize| {
        let d = 2 * n;
        let a = RealMatrix::from_fn(d, d, |_, _| rng.random_range(-0.5..0.5));
        CovarianceState::new(RealMatrix::identity(d, d) * 0.5 + &a * a.transpose()).unwrap()
    };

    // (a) Composition homomorphism on 100 random channel pairs at 1e-12.
    for k in 0..100 {
        let n = 1 + k % 2;
        let c1 = random_channel(&mut rng, n);
        let c2 = random_channel(&mut rng, n);
        let lhs = c2.compose(&c1).unwrap().to_augmented();
        let rhs = c2.to_augmented().compose(&c1.to_augmented()).unwrap();
        let scale = lhs.matrix().amax().max(1.0);
        if (lhs.matrix() - rhs.matrix()).amax() > 1e-12 * scale {
            failures.push(format!("homomorphism violated on pair {k}"));
        }
    }

    // (b) vectorize/devectorize round trip is exact.
    for _ in 0..20 {
        let s = random_state(&mut rng, 2);
        let round = devectorize(&vectorize(&s), 2).unwrap();
        if round.sigma() != s.sigma() {
            failures.push("vectorize/devectorize round trip not exact".into());
        }
    }

    // (c) Semigroup families have zero measure within 1e-9.
    let const_damping = damping_family(&DampingModel::new(0.2, |_| 1.0).unwrap(), 10.0).unwrap();
    let rot = ChannelFamily::from_fn(1, 10.0, |t| {
        let r = RealMatrix::from_row_slice(2, 2, &[t.cos(), t.sin(), -t.sin(), t.cos()]);
        GaussianChannel::new(r, RealMatrix::zeros(2, 2)).unwrap()
    })
    .unwrap();
    for (label, fam) in [("constant damping", &const_damping), ("rotation", &rot)] {
        let total = total_nm(fam, 0.0, 8.0, 161, None).unwrap().total;
        if total.abs() > 1e-9 {
            failures.push(format!("{label} semigroup: N = {total:.3e} > 1e-9"));
        }
    }

    // (d) Channel/ODE-oracle agreement at 1e-6 for both bundled models.
    let damping_model = DampingModel::new(0.12, |t: f64| 0.8 + 0.5 * (1.3 * t).cos()).unwrap();
    let damping = damping_family(&damping_model, 4.0).unwrap();
    let qbm_model =
        QbmModel::new(1.8, |t: f64| (0.3 * (0.9 * t).cos(), 0.25 + 0.1 * (0.7 * t).sin())).unwrap();
    let qbm = qbm_family(&qbm_model, 4.0).unwrap();
    for k in 0..20 {
        let s = random_state(&mut rng, 1);
        let t = 0.2 + 3.5 * (k as f64) / 19.0;
        let via_channel = damping.eval(t).unwrap().apply(&s).unwrap();
        let via_ode = ode_oracle(OdeGenerator::Damping(&damping_model), &s, t, 2000).unwrap();
        let err = (via_channel.sigma() - via_ode.sigma()).amax();
        if err > 1e-6 {
            failures.push(format!("damping channel/ODE mismatch {err:.3e} at t = {t:.2}"));
        }
        let via_channel = qbm.eval(t).unwrap().apply(&s).unwrap();
        let via_ode = ode_oracle(OdeGenerator::Qbm(&qbm_model), &s, t, 2000).unwrap();
        let err = (via_channel.sigma() - via_ode.sigma()).amax();
        if err > 1e-6 {
            failures.push(format!("QBM channel/ODE mismatch {err:.3e} at t = {t:.2}"));
        }
    }

    // (e) Near-singular X: complete-depolarization example at condition ~1e13
    // still yields the intermediate map to 1e-6 relative, with a warning.
    let depol = damping_family(&DampingModel::new(1.0, |_| 1.0).unwrap(), 40.0).unwrap();
    let imap = intermediate_map(&depol, 30.0, 0.1).unwrap();
    let expected = RealMatrix::identity(2, 2) * (-0.1f64).exp();
    let rel = (imap.channel.x() - &expected).amax() / expected.amax();
    if rel > 1e-6 {
        failures.push(format!("near-singular intermediate map off by {rel:.3e} relative"));
    }
    if !(imap.x_condition_number > 1e12 && imap.x_condition_number < 1e14) {
        failures.push(format!("condition number {:.3e} not in the expected ~1e13 range", imap.x_condition_number));
    }
    if !imap.is_ill_conditioned() {
        failures.push("ill-conditioning warning not raised".into());
    }

    verdict(
        "7 (structural suites)",
        &failures,
        "homomorphism x100, round trip, semigroup nulls, ODE agreement, near-singular inverse".to_string(),
    );
}
