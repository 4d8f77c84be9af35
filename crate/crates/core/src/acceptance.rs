//! Acceptance runners A1-A8, shared by `chifield validate` and the
//! `acceptance` test target.
//!
//! Each runner returns an [`Outcome`] rather than panicking, so a failing
//! criterion is reported alongside the others.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::analytic::{
    ec_density_a1, ec_sum_product, gaussian_pdf, gaussian_tail, hermite, hermite_tail_ratio, lk_sphere_circle,
    maxima_density_sphere, normal_radius, spherical_hessian_model, HessianModel2D,
    PowerSpectrum, SignVariant,
};
use crate::critcount::{
    default_depth, hessian_covariance_oracle, simulate_counts, CovarianceOracleReport, OracleSource, PixelGrid,
    SimulationPlan,
};
use crate::ensembles::{sample_chi, sample_wishart, HessianSampler};
use crate::error::Result;
use crate::fieldsim::{gauss_legendre, geodesic_fd, normalize, synth_sphere, PlanarKind};
use crate::kacrice::{
    estimate_a1_a2, estimate_dk, expected_critical_points, run_batches, CountFormulaInput, HessianLaw, MCEstimate,
};
use crate::rng::RngStream;

pub const ALL: [&str; 8] = ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8"];
pub const QUICK: [&str; 4] = ["A1", "A2", "A3", "A5"];

/// `Full` runs every criterion at its stated sample sizes; `Quick` shrinks
/// the Monte Carlo sizes for a desk check and skips runtime limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Quick,
    Full,
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: String,
    pub pass: bool,
    pub summary: String,
    pub details: Vec<String>,
    pub seconds: f64,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} [{:.1} s]",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.summary,
            self.seconds
        )
    }
}

/// Runs one criterion. Unknown ids and library errors become failing outcomes.
pub fn run(id: &str, scale: Scale, seed: u64) -> Outcome {
    let start = Instant::now();
    let res = match id {
        "A1" => a1(scale, seed),
        "A2" => a2(scale, seed),
        "A3" => a3(scale, seed),
        "A4" => a4(scale, seed),
        "A5" => a5(scale, seed),
        "A6" => a6(scale, seed),
        "A7" => a7(scale, seed),
        "A8" => a8(scale, seed),
        _ => Ok(Verdict::fail(format!("unknown criterion {id:?}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let v = res.unwrap_or_else(|e| Verdict::fail(format!("error: {e}")));
    let limit = match (scale, id) {
        (Scale::Full, "A1") => Some(5.0),
        (Scale::Full, "A2") => Some(60.0),
        (Scale::Full, "A4") => Some(1800.0),
        _ => None,
    };
    let mut details = v.details;
    let in_time = limit.is_none_or(|l| seconds < l);
    if let Some(l) = limit {
        details.push(format!("runtime {seconds:.2} s (limit {l} s)"));
    }
    Outcome { id: id.to_string(), pass: v.pass && in_time, summary: v.summary, details, seconds }
}

pub fn run_all(ids: &[&str], scale: Scale, seed: u64) -> Vec<Outcome> {
    ids.iter().map(|id| run(id, scale, seed)).collect()
}

struct Verdict {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Verdict {
    fn fail(summary: String) -> Self {
        Self { pass: false, summary, details: Vec::new() }
    }
}

fn sized(scale: Scale, full: u64, quick: u64) -> u64 {
    match scale {
        Scale::Full => full,
        Scale::Quick => quick,
    }
}

fn berry() -> Result<HessianModel2D> {
    HessianModel2D::new(0.5, 0.5)
}

fn fmt_est(e: &MCEstimate) -> String {
    if e.value != 0.0 && e.value.abs() < 1e-3 {
        format!("{:.4e} +- {:.2e}", e.value, e.std_error)
    } else {
        format!("{:.6} +- {:.2e}", e.value, e.std_error)
    }
}

/// Mean and standard error of a sample.
fn mean_se(xs: impl Iterator<Item = f64>) -> (f64, f64, usize) {
    let v: Vec<f64> = xs.collect();
    let n = v.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, 0);
    }
    let m = v.iter().sum::<f64>() / n as f64;
    let var = if n > 1 { v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    (m, (var / n as f64).sqrt(), n)
}

fn a1(_scale: Scale, seed: u64) -> Result<Verdict> {
    let [est] = run_batches(1_000_000, RngStream::new(seed, 1), |rng| [sample_chi(4, rng).powi(-2)])?;
    let pass = est.within(0.5, 3.0);
    Ok(Verdict {
        pass,
        summary: format!("E[1/chi_4^2] = {} vs 0.5", fmt_est(&est)),
        details: Vec::new(),
    })
}

fn a2(scale: Scale, seed: u64) -> Result<Verdict> {
    let law = HessianLaw::from_model(&berry()?)?;
    let n = sized(scale, 10_000_000, 1_000_000);
    let mut pass = true;
    let mut details = Vec::new();
    for (i, t) in [0.0, 1.0, 2.0, 3.0].into_iter().enumerate() {
        let (a1, _) = estimate_a1_a2(2, t, &law, n, RngStream::new(seed, 20 + i as u64))?;
        let target = ec_density_a1(t, &berry()?);
        let ok = a1.within(target, 3.0);
        pass &= ok;
        details.push(format!(
            "t={t}: a1 = {} target {target:.6} ({:.2} SE) {}",
            fmt_est(&a1),
            (a1.value - target) / a1.std_error,
            if ok { "ok" } else { "off" }
        ));
    }
    Ok(Verdict { pass, summary: format!("Berry a1 vs (H2(t)+0)phi(t) at t=0..3, n={n}"), details })
}

fn a3(scale: Scale, seed: u64) -> Result<Verdict> {
    let model = berry()?;
    let law = HessianLaw::from_model(&model)?;
    let n = sized(scale, 10_000_000, 1_000_000);
    let mut pass = true;
    let mut details = Vec::new();
    let mut a2s = Vec::new();
    for (i, (t, band)) in [(3.0, 0.02f64), (4.0, 0.005)].into_iter().enumerate() {
        let s = RngStream::new(seed, 30 + i as u64);
        let d = estimate_dk(2, t, &law, n, s)?;
        let (_, a2) = estimate_a1_a2(2, t, &law, n, s)?;
        a2s.push(a2);
        let closed = ec_density_a1(t, &model);
        let ratio = d.value / closed;
        let tol = band.max(3.0 * d.relative_se());
        let ok = (ratio - 1.0).abs() <= tol;
        pass &= ok;
        details.push(format!(
            "t={t}: D = {} ratio {ratio:.5} (tolerance {tol:.4}) a2 = {} {}",
            fmt_est(&d),
            fmt_est(&a2),
            if ok { "ok" } else { "off" }
        ));
    }
    let decay = a2s[1].value.abs() <= a2s[0].value.abs() * (-2f64).exp();
    pass &= decay;
    details.push(format!(
        "|a2(4)| = {:.3e} vs |a2(3)| e^-2 = {:.3e} {}",
        a2s[1].value.abs(),
        a2s[0].value.abs() * (-2f64).exp(),
        if decay { "ok" } else { "off" }
    ));
    Ok(Verdict { pass, summary: format!("D/A1 at t=3,4 and decay of a2, n={n}"), details })
}

fn sphere_oracle(n: u64, seed: u64) -> Result<CovarianceOracleReport> {
    hessian_covariance_oracle(&OracleSource::Sphere(PowerSpectrum::single(2)?), n, RngStream::new(seed, 50))
}

/// The single-l=2 sphere oracle places c - sigma^2 at the corrected value and
/// away from the printed one.
fn adjudicates(report: &CovarianceOracleReport, r2: f64) -> bool {
    let e = &report.est_c_minus_sigma2;
    e.within(1.0 / r2, 3.0) && !e.within(-1.0 / (r2 * r2), 3.0)
}

fn a4(scale: Scale, seed: u64) -> Result<Verdict> {
    let spec = PowerSpectrum::single(6)?;
    let r = normal_radius(&spec);
    let ts = [2.5, 3.0];
    let plan = SimulationPlan {
        k: 2,
        thresholds: ts.to_vec(),
        realizations: sized(scale, 300, 60),
        depth: default_depth(6),
        pixel_grid: None,
    };
    let runs = simulate_counts(&spec, &plan, RngStream::new(seed, 40))?;
    let mut pass = true;
    let mut details = vec![format!("l=6, r^2 = {:.3}, {} realizations, depth {}", r * r, runs.len(), plan.depth)];
    let mut band_25 = (0.0, 0.0);
    for (j, &t) in ts.iter().enumerate() {
        let (m, se, _) = mean_se(runs.iter().map(|c| c.maxima[j] as f64));
        let target = maxima_density_sphere(r, t, SignVariant::Corrected);
        let tol = (0.1 * target).max(3.0 * se);
        let ok = (m - target).abs() <= tol;
        pass &= ok;
        if j == 0 {
            band_25 = (m, se);
        }
        details.push(format!(
            "t={t}: mean maxima {m:.3} +- {se:.3} vs {target:.3} (tolerance {tol:.3}) {}",
            if ok { "ok" } else { "off" }
        ));
    }
    let printed = maxima_density_sphere(r, 2.5, SignVariant::PaperText);
    let outside = (printed - band_25.0).abs() > 3.0 * band_25.1;
    let oracle = sphere_oracle(sized(scale, 20_000, 10_000), seed)?;
    let adj = adjudicates(&oracle, 3.0);
    details.push(format!(
        "printed -2 variant {printed:.3} {} the 3 SE band at t=2.5; oracle c-sigma^2 = {} ({} +1/3 vs -1/9)",
        if outside { "outside" } else { "inside" },
        fmt_est(&oracle.est_c_minus_sigma2),
        if adj { "selects" } else { "does not select" }
    ));
    pass &= outside || adj;
    Ok(Verdict { pass, summary: "maxima of f_2 above t on S^2 vs (2r^2 H2(t)+2) sqrt(2pi) phi(t)".into(), details })
}

fn a5(scale: Scale, seed: u64) -> Result<Verdict> {
    let n = sized(scale, 20_000, 10_000);
    let check = |r: &CovarianceOracleReport, target: [f64; 4]| {
        let e = [&r.est_var_h1, &r.est_cov_h13, &r.est_var_h2, &r.est_e_h1_gamma];
        e.iter().zip(target).all(|(e, t)| e.within(t, 3.0))
    };
    let line = |name: &str, r: &CovarianceOracleReport| {
        format!(
            "{name}: var h1 {}, cov h1h3 {}, var h2 {}, E h1 gamma {}, FD {:.1e}",
            fmt_est(&r.est_var_h1),
            fmt_est(&r.est_cov_h13),
            fmt_est(&r.est_var_h2),
            fmt_est(&r.est_e_h1_gamma),
            r.fd_max_discrepancy
        )
    };
    let mut details = Vec::new();

    let bf = hessian_covariance_oracle(&OracleSource::Planar(PlanarKind::BargmannFock), n, RngStream::new(seed, 51))?;
    let bf_ok = check(&bf, [2.0, 2.0 / 3.0, 2.0 / 3.0, -1.0]);
    details.push(line("bargmann-fock", &bf));
    details.push(format!(
        "bargmann-fock vs (2, 2/3, 2/3, -1): {}; vs (3, 1, 1, -1): {}",
        if bf_ok { "ok" } else { "off" },
        if check(&bf, [3.0, 1.0, 1.0, -1.0]) { "ok" } else { "off" }
    ));

    let berry = hessian_covariance_oracle(&OracleSource::Planar(PlanarKind::Berry), n, RngStream::new(seed, 52))?;
    let berry_ok = check(&berry, [1.5, 0.5, 0.5, -1.0]);
    details.push(line("berry", &berry));
    details.push(format!("berry vs (3/2, 1/2, 1/2, -1): {}", if berry_ok { "ok" } else { "off" }));

    let sph = sphere_oracle(n, seed)?;
    let e = &sph.est_c_minus_sigma2;
    let sph_ok = e.within(1.0 / 9.0, 3.0);
    details.push(line("sphere l=2", &sph));
    details.push(format!(
        "sphere l=2 c-sigma^2 = {} vs +1/9: {}; vs +1/r^2 = 1/3: {}; vs -1/r^4 = -1/9: {}",
        fmt_est(e),
        if sph_ok { "ok" } else { "off" },
        if e.within(1.0 / 3.0, 3.0) { "ok" } else { "off" },
        if e.within(-1.0 / 9.0, 3.0) { "ok" } else { "off" }
    ));
    let status = |b: bool| if b { "pass" } else { "fail" };
    Ok(Verdict {
        pass: bf_ok && berry_ok && sph_ok,
        summary: format!(
            "Hessian covariance oracle, n={n}: bargmann-fock {}, berry {}, sphere {}",
            status(bf_ok),
            status(berry_ok),
            status(sph_ok)
        ),
        details,
    })
}

fn a6(scale: Scale, seed: u64) -> Result<Verdict> {
    let spec = PowerSpectrum::single(4)?;
    let r = normal_radius(&spec);
    let t = 2.0;
    let model = spherical_hessian_model(&spec, SignVariant::Corrected)?;
    let mut input = CountFormulaInput::isotropic(4, t, 4.0 * PI * r * r, &model)?;
    let formula = expected_critical_points(&input, 1 << 22, RngStream::new(seed, 60))?;
    input.variant = SignVariant::PaperText;
    let printed = expected_critical_points(&input, 1 << 22, RngStream::new(seed, 60))?;
    let plan = SimulationPlan {
        k: 4,
        thresholds: vec![t],
        realizations: sized(scale, 200, 50),
        depth: default_depth(4),
        pixel_grid: None,
    };
    let runs = simulate_counts(&spec, &plan, RngStream::new(seed, 61))?;
    let (m, se, n) = mean_se(runs.iter().map(|c| c.above[0] as f64));
    let rel = (m - formula.value).abs() / formula.value;
    Ok(Verdict {
        pass: rel <= 0.1,
        summary: format!("critical points of f_4 above 2 on S^2 (l=4): simulated {m:.3} vs formula {:.3}", formula.value),
        details: vec![
            format!("simulated mean {m:.3} +- {se:.3} over {n} realizations, depth {}", plan.depth),
            format!("formula {} (relative gap {rel:.4}, tolerance 0.1)", fmt_est(&formula)),
            format!("printed factorized form {}", fmt_est(&printed)),
        ],
    })
}

fn a7(scale: Scale, seed: u64) -> Result<Verdict> {
    let spec = PowerSpectrum::single(6)?;
    let r = normal_radius(&spec);
    let t = 3.0;
    let plan = SimulationPlan {
        k: 2,
        thresholds: vec![t],
        realizations: sized(scale, 300, 40),
        depth: default_depth(6),
        pixel_grid: Some(match scale {
            Scale::Full => PixelGrid::new(2048, 4096),
            Scale::Quick => PixelGrid::new(1024, 2048),
        }),
    };
    let runs = simulate_counts(&spec, &plan, RngStream::new(seed, 70))?;
    let degenerate = runs.iter().filter(|c| c.signed_ec[0].is_none()).count();
    let (m, se, n) = mean_se(runs.iter().filter_map(|c| c.signed_ec[0]).map(|x| x as f64));
    let target = ec_sum_product(&lk_sphere_circle(r), t);
    let mean_ok = (m - target).abs() <= 3.0 * se;
    let agree = runs
        .iter()
        .filter(|c| matches!((c.signed_ec[0], &c.pixel_ec), (Some(a), Some(p)) if a == p[0]))
        .count();
    let frac = agree as f64 / runs.len() as f64;
    let pix_ok = frac >= 0.99;
    Ok(Verdict {
        pass: mean_ok && pix_ok && degenerate == 0,
        summary: format!("signed EC of f_2 at t=3 (l=6): {m:.3} vs {target:.3}, pixel agreement {:.1}%", 100.0 * frac),
        details: vec![
            format!("mean signed EC {m:.4} +- {se:.4} over {n} realizations ({degenerate} with degenerate points)"),
            format!("Lipschitz-Killing sum {target:.4} ({:.2} SE)", (m - target) / se),
            format!(
                "pixel EC ({}x{}) agrees in {agree}/{} realizations",
                plan.pixel_grid.unwrap().n_theta,
                plan.pixel_grid.unwrap().n_phi,
                runs.len()
            ),
        ],
    })
}

/// `int_t^inf H_{n+1}(x) phi(x) dx` by composite Gauss-Legendre on `[t, t + 40]`.
fn hermite_tail_integral(n: i32, t: f64) -> f64 {
    let (nodes, weights) = gauss_legendre(40);
    let h = 0.25;
    (0..160)
        .map(|i| {
            let a = t + i as f64 * h;
            nodes
                .iter()
                .zip(&weights)
                .map(|(x, w)| {
                    let y = a + 0.5 * h * (x + 1.0);
                    0.5 * h * w * hermite((n + 1) as u32, y) * gaussian_pdf(y)
                })
                .sum::<f64>()
        })
        .sum()
}

fn a8(scale: Scale, seed: u64) -> Result<Verdict> {
    let mut details = Vec::new();
    let mut pass = true;
    let mut record = |name: &str, ok: bool, what: String| {
        pass &= ok;
        details.push(format!("{name}: {what} {}", if ok { "ok" } else { "off" }));
    };

    // Hermite tail identity, including the n = -1 convention
    let mut worst: f64 = 0.0;
    for n in -1..=6 {
        for t in [-1.5, 0.0, 0.5, 1.0, 2.0, 3.5] {
            let lhs = hermite_tail_integral(n, t);
            let rhs = if n < 0 { hermite_tail_ratio(t) * gaussian_pdf(t) } else { hermite(n as u32, t) * gaussian_pdf(t) };
            worst = worst.max((lhs - rhs).abs());
        }
    }
    let psi_ok = (hermite_tail_ratio(1.0) * gaussian_pdf(1.0) - gaussian_tail(1.0)).abs() < 1e-15;
    record("hermite tail identity", worst < 1e-8 && psi_ok, format!("max error {worst:.2e}"));

    // Wishart mean k I
    let (k, m) = (5u32, 3usize);
    let n = sized(scale, 200_000, 50_000);
    let est: [MCEstimate; 6] = run_batches(n, RngStream::new(seed, 80), |rng| {
        let a = sample_wishart(k, m, rng);
        [a.get(0, 0), a.get(1, 1), a.get(2, 2), a.get(0, 1), a.get(0, 2), a.get(1, 2)]
    })?;
    let targets = [5.0, 5.0, 5.0, 0.0, 0.0, 0.0];
    let ok = est.iter().zip(targets).all(|(e, t)| e.within(t, 3.0));
    record(
        "wishart mean",
        ok,
        format!("A(5,3) diagonal {:.4} {:.4} {:.4}", est[0].value, est[1].value, est[2].value),
    );

    // E[H gamma] = -I for a flat and a spherical model
    let models = [berry()?, spherical_hessian_model(&PowerSpectrum::single(3)?, SignVariant::Corrected)?];
    for (i, model) in models.iter().enumerate() {
        let s = HessianSampler::new(*model)?;
        let est: [MCEstimate; 3] = run_batches(n, RngStream::new(seed, 81 + i as u64), |rng| {
            let (h, g) = s.sample_pair(rng);
            [h.a11 * g, h.a12 * g, h.a22 * g]
        })?;
        let ok = est.iter().zip([-1.0, 0.0, -1.0]).all(|(e, t)| e.within(t, 3.0));
        record(
            "E[H gamma] = -I",
            ok,
            format!("sigma^2 {:.3}, c {:.3}: {:.4} {:.4} {:.4}", model.sigma2(), model.c(), est[0].value, est[1].value, est[2].value),
        );
    }

    // rotation invariance of the sampled covariance
    let s = HessianSampler::new(HessianModel2D::new(0.4, 0.8)?)?;
    let (c, sn) = ((PI / 7.0).cos(), (PI / 7.0).sin());
    let est: [MCEstimate; 4] = run_batches(n, RngStream::new(seed, 83), |rng| {
        let (h, _) = s.sample_pair(rng);
        let r11 = c * c * h.a11 + 2.0 * c * sn * h.a12 + sn * sn * h.a22;
        let r22 = sn * sn * h.a11 - 2.0 * c * sn * h.a12 + c * c * h.a22;
        let r12 = -c * sn * h.a11 + (c * c - sn * sn) * h.a12 + c * sn * h.a22;
        // differences of second moments, rotated minus original
        [r11 * r11 - h.a11 * h.a11, r11 * r22 - h.a11 * h.a22, r12 * r12 - h.a12 * h.a12, r11 * r12 - h.a11 * h.a12]
    })?;
    record(
        "rotation invariance",
        est.iter().all(|e| e.within(0.0, 3.0)),
        format!("moment differences {:.1e} {:.1e} {:.1e} {:.1e}", est[0].value, est[1].value, est[2].value, est[3].value),
    );

    // analytic vs finite-difference derivatives, 100 points per realization
    let spec = PowerSpectrum::new((0..=8).map(|l| (l, 1.0 / (1.0 + l as f64))).collect())?;
    let mut rng = RngStream::new(seed, 84).rng();
    let (mut wg, mut wh): (f64, f64) = (0.0, 0.0);
    for rep in 0..3 {
        let f = synth_sphere(&spec, RngStream::new(seed, 85 + rep))?;
        for _ in 0..100 {
            let p = normalize(std::array::from_fn(|_| crate::ensembles::normal(&mut rng)));
            let j = f.eval_unit(p);
            for (a, b) in [(1.0, 0.0), (0.0, 1.0), (0.6, 0.8)] {
                let e: [f64; 3] = std::array::from_fn(|i| a * j.frame[0][i] + b * j.frame[1][i]);
                let (d1, d2) = geodesic_fd(|q| f.value(q), p, e, 1e-4, 1e-3);
                wg = wg.max((d1 - (a * j.grad[0] + b * j.grad[1])).abs());
                wh = wh.max((d2 - (a * a * j.hess.a11 + 2.0 * a * b * j.hess.a12 + b * b * j.hess.a22)).abs());
            }
        }
    }
    record("derivatives", wg < 1e-6 && wh < 1e-6, format!("gradient {wg:.1e}, Hessian {wh:.1e}"));

    // bitwise determinism
    let law = HessianLaw::from_model(&berry()?)?;
    let s = RngStream::new(seed, 86);
    let d1 = estimate_dk(2, 2.0, &law, 200_000, s)?;
    let d2 = estimate_dk(2, 2.0, &law, 200_000, s)?;
    let f1 = synth_sphere(&spec, s)?;
    let f2 = synth_sphere(&spec, s)?;
    let plan = SimulationPlan { k: 2, thresholds: vec![1.5], realizations: 3, depth: 4, pixel_grid: None };
    let c1 = simulate_counts(&spec, &plan, s)?;
    let c2 = simulate_counts(&spec, &plan, s)?;
    let same = d1.value.to_bits() == d2.value.to_bits()
        && d1.std_error.to_bits() == d2.std_error.to_bits()
        && f1.coeffs().iter().zip(f2.coeffs()).all(|(a, b)| a.to_bits() == b.to_bits())
        && c1 == c2;
    record("determinism", same, "repeated runs with a fixed seed".into());

    Ok(Verdict { pass, summary: "invariant suite".into(), details })
}
