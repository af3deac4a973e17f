//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs with `cargo test -p blowup-core --test acceptance`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use blowup_core::bounds::{
    tau_star_general, tau_star_scaled, theta_general, theta_one, theta_two, SecondThreshold,
};
use blowup_core::fbm::{derive_seed, fbm_covariance};
use blowup_core::model::{classify_regime, coupled_noise_matrix, Regime};
use blowup_core::montecarlo::NONEXPLOSION_UPPER;
use blowup_core::pde::BlowupStatus;
use blowup_core::stable::{build_profile, density, p_unit_origin};
use blowup_core::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(id: usize, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            o.pass = false;
            o.detail
                .push_str(&format!("; runtime limit {}s exceeded", limit.as_secs()));
        }
    }
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!(
        "{tag} [{id:>2}] {name} ({:.2}s): {}",
        took.as_secs_f64(),
        o.detail
    );
    o.pass
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn scaled(c1: f64, c2: f64, psi: SpatialFunction) -> InitialData {
    InitialData::Scaled { c1, c2, psi }
}

fn params(alpha: f64, hurst: f64, beta: f64, gamma: [f64; 2], k: f64) -> ModelParams {
    ModelParams {
        alpha,
        d: 1,
        hurst,
        beta1: beta,
        beta2: beta,
        gamma1: gamma[0],
        gamma2: gamma[1],
        k: [[k, k], [k, k]],
    }
}

const TOL_PROFILE: f64 = 1e-8;

fn stable_oracles() -> Outcome {
    type Closed = fn(f64) -> f64;
    let cases: [(f64, usize, Closed); 3] = [
        (2.0, 1, |r| (-r * r / 4.0).exp() / (2.0 * PI.sqrt())),
        (1.0, 1, |r| 1.0 / (PI * (1.0 + r * r))),
        (2.0, 2, |r| (-r * r / 4.0).exp() / (4.0 * PI)),
    ];
    let mut worst = 0.0f64;
    for (alpha, d, exact) in cases {
        let prof = match build_profile(alpha, d, 5.0, 200) {
            Ok(p) => p,
            Err(e) => return outcome(false, format!("build_profile({alpha}, {d}) failed: {e}")),
        };
        for (r, p) in prof.r_nodes.iter().zip(&prof.p1_values) {
            worst = worst.max(rel(*p, exact(*r)));
        }
        worst = worst.max(rel(p_unit_origin(alpha, d), exact(0.0)));
    }
    outcome(
        worst <= TOL_PROFILE,
        format!("max relative error {worst:.2e} (tol {TOL_PROFILE:.0e})"),
    )
}

const TOL_SCALING: f64 = 1e-8;
/// Slack for inequalities that hold with equality at `x = 0`.
const TOL_ORDER: f64 = 1e-12;

fn stable_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut scaling = 0.0f64;
    let (mut time_fail, mut prod_fail, mut prod_checked, mut radial_fail) = (0, 0, 0, 0);
    for alpha in [1.0, 1.5, 2.0] {
        for d in [1usize, 2] {
            let prof = match default_profile(alpha, d) {
                Ok(p) => p,
                Err(e) => return outcome(false, format!("profile ({alpha}, {d}) failed: {e}")),
            };
            radial_fail += prof.p1_values.windows(2).filter(|w| w[1] > w[0]).count();
            let q = d as f64 / alpha;
            let point = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                (0..d).map(|_| rng.random_range(-4.0..4.0)).collect()
            };
            for _ in 0..10_000 {
                let t: f64 = rng.random_range(0.1..4.0);
                let s: f64 = rng.random_range(0.1..4.0);
                let x = point(&mut rng);
                let y = point(&mut rng);
                let r: f64 = rng.random_range(2.0..6.0);

                let lhs = density(&prof, t * s, &x).unwrap();
                let xs: Vec<f64> = x.iter().map(|v| v * t.powf(-1.0 / alpha)).collect();
                let rhs = t.powf(-q) * density(&prof, s, &xs).unwrap();
                scaling = scaling.max(rel(lhs, rhs));

                let (hi, lo) = (t.max(s), t.min(s));
                if density(&prof, hi, &x).unwrap()
                    < (lo / hi).powf(q) * density(&prof, lo, &x).unwrap() * (1.0 - TOL_ORDER)
                {
                    time_fail += 1;
                }

                if prof.origin(t) <= 1.0 {
                    prod_checked += 1;
                    let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| (a - b) / r).collect();
                    let left = density(&prof, t, &z).unwrap();
                    let right = density(&prof, t, &x).unwrap() * density(&prof, t, &y).unwrap();
                    if left < right * (1.0 - TOL_ORDER) {
                        prod_fail += 1;
                    }
                }
            }
        }
    }
    let pass = scaling <= TOL_SCALING
        && time_fail == 0
        && prod_fail == 0
        && radial_fail == 0
        && prod_checked > 0;
    outcome(
        pass,
        format!(
            "scaling max rel {scaling:.1e}; time monotonicity failures {time_fail}; product failures {prod_fail}/{prod_checked}; radial increases {radial_fail}"
        ),
    )
}

fn tau_star_oracle() -> Outcome {
    // H = 1/2 with gamma = |k_i|^2 / 2 makes the common drift vanish
    let p = params(2.0, 0.5, 1.0, [1.0, 1.0], 1.0);
    let derived = derive_constants(&p);
    let init = scaled(1.0, 1.0, SpatialFunction::Constant { value: 1.0 });
    let paths = FbmPathPair::zeros(TimeGrid::new(4.0, 40_000).unwrap(), 0.5);
    let p10 = p_unit_origin(2.0, 1);
    match tau_star_scaled(&paths, &p, &derived, &init, p10) {
        Ok(ts) => {
            let t = ts.time.time().unwrap_or(f64::INFINITY);
            outcome(
                (t - PI).abs() <= 1e-3,
                format!(
                    "tau_star = {t:.9}, |tau_star - pi| = {:.2e}",
                    (t - PI).abs()
                ),
            )
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn fbm_statistics() -> Outcome {
    let n = 512;
    let n_paths = 10_000;
    let grid = TimeGrid::new(1.0, n).unwrap();
    let pairs = [(32, 32), (64, 256), (256, 256), (100, 400), (512, 512)];
    let mut worst_z = 0.0f64;
    let mut acf = f64::NAN;
    for h in [0.5, 0.6, 0.75] {
        let sampler = FbmSampler::new(h, grid, SamplerMethod::Auto).unwrap();
        let paths: Vec<FbmPathPair> = (0..n_paths)
            .into_par_iter()
            .map(|i| sampler.sample(derive_seed(99, i as u64)))
            .collect();
        for &(a, b) in &pairs {
            let prods: Vec<f64> = paths.iter().map(|p| p.b1[a] * p.b1[b]).collect();
            let mean = prods.iter().sum::<f64>() / n_paths as f64;
            let var = prods.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n_paths - 1) as f64;
            let se = (var / n_paths as f64).sqrt();
            let exact = fbm_covariance(h, grid.node(a), grid.node(b));
            worst_z = worst_z.max((mean - exact).abs() / se);
        }
        if h == 0.5 {
            let per_path: Vec<f64> = paths
                .iter()
                .map(|p| {
                    let inc: Vec<f64> = p.b1.windows(2).map(|w| w[1] - w[0]).collect();
                    let m = inc.iter().sum::<f64>() / n as f64;
                    let num: f64 = inc.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
                    let den: f64 = inc.iter().map(|v| (v - m).powi(2)).sum();
                    num / den
                })
                .collect();
            acf = per_path.iter().sum::<f64>() / n_paths as f64;
        }
    }
    let acf_tol = 3.0 / (n as f64).sqrt();
    outcome(
        worst_z <= 3.0 && acf.abs() < acf_tol,
        format!("max |z| over 15 covariances {worst_z:.2} (tol 3); mean lag-1 autocorrelation at H=1/2 {acf:.2e} (tol {acf_tol:.3})"),
    )
}

fn chained_ordering() -> Outcome {
    let p = params(2.0, 0.75, 1.0, [1.0, 1.0], 0.5);
    let derived = derive_constants(&p);
    let init = scaled(
        1.0,
        1.0,
        SpatialFunction::Bump {
            radius: 1.0,
            height: 1.0,
        },
    );
    let profile = default_profile(2.0, 1).unwrap();
    let ctx = BoundsContext::new(&p, &derived, &init, &profile, None).unwrap();
    let sampler = FbmSampler::new(
        0.75,
        TimeGrid::new(25.0, 2500).unwrap(),
        SamplerMethod::Auto,
    )
    .unwrap();
    let results: Vec<Result<BlowupBounds, BoundsError>> = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            compute_bounds(
                &sampler.sample(derive_seed(5, i)),
                &p,
                &derived,
                &init,
                &ctx,
                BoundsOptions::default(),
            )
        })
        .collect();
    let (mut both, mut violations, mut errors) = (0, 0, 0);
    for r in &results {
        match r {
            Ok(b) => {
                if let (Some(StoppingTime::At(ts)), Some(up)) = (b.tau_star, b.tau_upper) {
                    both += 1;
                    if ts > up {
                        violations += 1;
                    }
                }
            }
            Err(_) => errors += 1,
        }
    }
    outcome(
        violations == 0 && both > 0 && errors == 0,
        format!("{both}/1000 paths with both bounds finite, {violations} ordering violations, {errors} errors"),
    )
}

fn reduction_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let sampler = FbmSampler::new(
        0.75,
        TimeGrid::new(10.0, 1000).unwrap(),
        SamplerMethod::Auto,
    )
    .unwrap();
    let (mut lower_cmp, mut upper_cmp, mut mismatches, mut skipped) = (0, 0, 0, 0);
    for i in 0..100u64 {
        let beta2: f64 = rng.random_range(0.5..1.5);
        let beta1 = if i % 2 == 0 {
            beta2
        } else {
            beta2 + rng.random_range(0.1..1.0)
        };
        let rho = [rng.random_range(0.2..1.2), rng.random_range(0.2..1.2)];
        let k = match coupled_noise_matrix(rho[0], rho[1], beta1, beta2) {
            Ok(k) => k,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let gamma = rng.random_range(0.5..2.0);
        let alpha = rng.random_range(0.8..2.0);
        let p = ModelParams {
            alpha,
            d: 1,
            hurst: 0.75,
            beta1,
            beta2,
            gamma1: gamma,
            gamma2: gamma,
            k,
        };
        let derived = derive_constants(&p);
        assert!(derived.coupling_ok);
        let c1 = rng.random_range(0.5..2.0);
        let init = scaled(
            c1,
            c1 * rng.random_range(1.0..2.0),
            SpatialFunction::Bump {
                radius: 1.0,
                height: 1.0,
            },
        );
        let p10 = p_unit_origin(alpha, 1);
        let r0 = (2.0 * p10).powf(alpha);
        let ctx = BoundsContext::from_masses(
            &p,
            &derived,
            p10,
            r0,
            rng.random_range(0.05..1.0),
            rng.random_range(0.05..1.0),
        )
        .unwrap();
        let paths = sampler.sample(derive_seed(6, i));

        let a = tau_star_scaled(&paths, &p, &derived, &init, p10);
        let b = tau_star_general(&paths, &p, &derived, &init, p10, SecondThreshold::Symmetric);
        lower_cmp += 1;
        if a != b {
            mismatches += 1;
        }
        let specific = if beta1 == beta2 {
            theta_one(&paths, &p, &derived, &ctx)
        } else {
            theta_two(&paths, &p, &derived, &ctx)
        };
        if let Ok(s) = specific {
            upper_cmp += 1;
            match theta_general(&paths, &p, &derived, &ctx) {
                Ok(g) if g.time().map(f64::to_bits) == s.time().map(f64::to_bits) => {}
                _ => mismatches += 1,
            }
        }
    }
    outcome(
        mismatches == 0 && lower_cmp > 0 && upper_cmp > 0,
        format!("{lower_cmp} lower and {upper_cmp} upper comparisons, {mismatches} bitwise mismatches, {skipped} configs without exact coupling"),
    )
}

fn montecarlo_reproducibility() -> Outcome {
    // k12 = -N1 + 2 N2 = -1
    let p = params(2.0, 0.75, 1.0, [3.0, 1.0], 1.0);
    let config = EnsembleConfig {
        n_paths: 1000,
        grid: TimeGrid::new(40.0, 4000).unwrap(),
        master_seed: 7,
        params: p,
        init: scaled(
            20.0,
            20.0,
            SpatialFunction::Indicator {
                radius: 1.0,
                height: 1.0,
            },
        ),
        query_times: vec![5.0, 10.0, 20.0],
        r0: None,
        confidence: 0.95,
        t_max: None,
        sampler: SamplerMethod::Auto,
        second_threshold: SecondThreshold::Shared,
        sup_norm_estimate: Default::default(),
        zero_noise: false,
    };
    let profile = default_profile(2.0, 1).unwrap();
    let ens = match Ensemble::new(config, &profile) {
        Ok(e) => e,
        Err(e) => return outcome(false, format!("ensemble setup failed: {e}")),
    };
    let json = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| ens.run())
            .map(|(s, _)| (serde_json::to_string(&s).unwrap(), s))
    };
    let (one, summary) = match json(1) {
        Ok(v) => v,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    let (eight, _) = json(8).unwrap();
    let identical = one == eight;
    let in_range = summary.probabilities.iter().all(|e| {
        (0.0..=1.0).contains(&e.estimate) && 0.0 <= e.ci_lo && e.ci_lo <= e.ci_hi && e.ci_hi <= 1.0
    });
    let upper: Vec<f64> = summary
        .probabilities
        .iter()
        .filter(|e| e.name == NONEXPLOSION_UPPER)
        .map(|e| e.estimate)
        .collect();
    let monotone = upper.len() == 3 && upper.windows(2).all(|w| w[1] <= w[0]);
    outcome(
        identical && in_range && monotone,
        format!(
            "1 vs 8 workers byte-identical: {identical} ({} bytes); estimates in [0,1]: {in_range}; P-upper at t=5,10,20 = {upper:?}",
            one.len()
        ),
    )
}

/// Classical RK4 on the spatially constant system with steps shrinking as
/// the solution grows; returns the time `max u` first exceeds `m`.
fn coupled_ode_blowup(gamma: [f64; 2], beta: [f64; 2], u0: [f64; 2], m: f64) -> f64 {
    let f = |u: [f64; 2]| {
        [
            gamma[0] * u[0] + u[1].max(0.0).powf(1.0 + beta[0]),
            gamma[1] * u[1] + u[0].max(0.0).powf(1.0 + beta[1]),
        ]
    };
    let (mut t, mut u) = (0.0, u0);
    while u[0].max(u[1]) < m {
        let scale = u[0].max(u[1]).max(1.0);
        let h = 1e-4 / scale.powf(beta[0].max(beta[1]));
        let add = |u: [f64; 2], k: [f64; 2], c: f64| [u[0] + c * k[0], u[1] + c * k[1]];
        let k1 = f(u);
        let k2 = f(add(u, k1, h / 2.0));
        let k3 = f(add(u, k2, h / 2.0));
        let k4 = f(add(u, k3, h));
        u = [
            u[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            u[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        t += h;
    }
    t
}

fn pde_ode_oracle() -> Outcome {
    let grid = TorusGrid::new(1, 10.0, 8).unwrap();
    let paths = FbmPathPair::zeros(TimeGrid::new(2.0, 200).unwrap(), 0.75);
    let solve = |p: &ModelParams, init: &InitialData| {
        let cfg = SolverConfig {
            dt: 1e-4,
            t_end: 2.0,
            ..Default::default()
        };
        solve_until_blowup(grid, init, &paths, p, &derive_constants(p), &cfg).unwrap()
    };
    let unit = scaled(1.0, 1.0, SpatialFunction::Constant { value: 1.0 });
    let mut lines = Vec::new();
    let mut pass = true;
    for (gamma, exact) in [(0.0, 1.0), (1.0, 2f64.ln())] {
        let mut p = params(1.5, 0.75, 1.0, [gamma, gamma], 0.0);
        p.k = [[0.0; 2]; 2];
        let rep = solve(&p, &unit);
        let tau = rep.tau_num.unwrap_or(f64::INFINITY);
        let err = (tau - exact).abs() / exact;
        pass &= rep.status == BlowupStatus::BlowUp && rep.resolved && err <= 0.02;
        lines.push(format!(
            "gamma={gamma}: tau_num {tau:.5} vs {exact:.5} (rel {err:.1e})"
        ));
    }
    // asymmetric coupled case against an independent RK4 integration
    let p = ModelParams {
        alpha: 1.5,
        d: 1,
        hurst: 0.75,
        beta1: 1.5,
        beta2: 1.0,
        gamma1: 0.5,
        gamma2: 0.2,
        k: [[0.0; 2]; 2],
    };
    let init = InitialData::General {
        f1: SpatialFunction::Constant { value: 1.0 },
        f2: SpatialFunction::Constant { value: 0.8 },
    };
    let rep = solve(&p, &init);
    let tau = rep.tau_num.unwrap_or(f64::INFINITY);
    let exact = coupled_ode_blowup([0.5, 0.2], [1.5, 1.0], [1.0, 0.8], 1e8);
    let err = (tau - exact).abs() / exact;
    pass &= err <= 0.01;
    lines.push(format!(
        "coupled: tau_num {tau:.5} vs RK4 {exact:.5} (rel {err:.1e}, tol 1e-2)"
    ));
    outcome(pass, lines.join("; "))
}

/// Fraction of paths with finite `theta` on the pinned horizon
/// `r0 + (10 / k12)(1 + ln(1 + threshold))`.
fn finite_theta_fraction(k: f64) -> (ModelParams, f64, f64) {
    let p = params(2.0, 0.75, 1.0, [2.0, 1.5], k);
    let derived = derive_constants(&p);
    let init = scaled(
        1.0,
        1.0,
        SpatialFunction::Indicator {
            radius: 1.0,
            height: 1.0,
        },
    );
    let profile = default_profile(2.0, 1).unwrap();
    let ctx = BoundsContext::new(&p, &derived, &init, &profile, None).unwrap();
    let thr = blowup_core::bounds::theta_one_threshold(p.beta1, ctx.e0);
    let horizon = ctx.r0 + 10.0 / derived.k12_drift.abs() * (1.0 + (1.0 + thr).ln());
    let steps = (horizon / 0.01).ceil() as usize;
    let sampler = FbmSampler::new(
        0.75,
        TimeGrid::new(horizon, steps).unwrap(),
        SamplerMethod::Auto,
    )
    .unwrap();
    let finite = (0..1000u64)
        .into_par_iter()
        .filter(|&i| {
            theta_one(&sampler.sample(derive_seed(9, i)), &p, &derived, &ctx)
                .map(|t| t.is_finite())
                .unwrap_or(false)
        })
        .count();
    (p, horizon, finite as f64 / 1000.0)
}

fn regime_soft_check() -> Outcome {
    // the drift k12 s must dominate |rho| B(s) ~ s^H on the horizon, so the
    // check runs with moderate noise; unit noise is reported alongside
    let (p, horizon, frac) = finite_theta_fraction(0.5);
    let derived = derive_constants(&p);
    let regime = classify_regime(&p, &derived).regime;
    let (_, _, unit) = finite_theta_fraction(1.0);
    outcome(
        regime == Regime::AlmostSureBlowup && frac >= 0.99,
        format!(
            "k12 = {}, regime {regime:?}, horizon {horizon:.2}; finite theta on {:.1}% of 1000 paths at k_ij = 0.5 (need 99%), {:.1}% at k_ij = 1",
            derived.k12_drift,
            100.0 * frac,
            100.0 * unit
        ),
    )
}

fn brownian_substitution() -> Outcome {
    let brownian = params(2.0, 0.5, 1.0, [2.0, 2.0], 1.0);
    // Gamma_i = gamma_i - |k_i|^2 / 2 = 1 on the H > 1/2 branch
    let shifted = brownian.with_drifts(1.0, 1.0, 0.75);
    let init = scaled(
        1.0,
        1.5,
        SpatialFunction::Bump {
            radius: 1.0,
            height: 1.0,
        },
    );
    let profile = default_profile(2.0, 1).unwrap();
    let sampler =
        FbmSampler::new(0.5, TimeGrid::new(10.0, 2000).unwrap(), SamplerMethod::Auto).unwrap();
    let bounds = |p: &ModelParams, paths: &FbmPathPair| {
        let derived = derive_constants(p);
        let ctx = BoundsContext::new(p, &derived, &init, &profile, None).unwrap();
        compute_bounds(paths, p, &derived, &init, &ctx, BoundsOptions::default()).unwrap()
    };
    let t = |s: Option<StoppingTime>| s.and_then(|s| s.time()).unwrap_or(f64::NAN);
    let mut worst = 0.0f64;
    let mut compared = 0;
    for i in 0..20u64 {
        let paths = sampler.sample(derive_seed(10, i));
        let (a, b) = (bounds(&brownian, &paths), bounds(&shifted, &paths));
        let fields = [
            (t(a.tau_star), t(b.tau_star)),
            (t(a.theta), t(b.theta)),
            (
                a.tau_upper.unwrap_or(f64::NAN),
                b.tau_upper.unwrap_or(f64::NAN),
            ),
            (a.r1, b.r1),
            (a.r2, b.r2),
        ];
        for (x, y) in fields {
            if x.is_nan() && y.is_nan() {
                continue;
            }
            compared += 1;
            worst = worst.max(if x.is_nan() || y.is_nan() {
                f64::INFINITY
            } else {
                rel(x, y)
            });
        }
    }
    outcome(
        worst <= 1e-12 && compared > 0,
        format!(
            "{compared} quantities over 20 paths, max relative difference {worst:.1e} (tol 1e-12)"
        ),
    )
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run(
            1,
            "stable-density closed forms",
            Some(secs(10)),
            stable_oracles,
        ),
        run(
            2,
            "stable-density property suite",
            Some(secs(30)),
            stable_properties,
        ),
        run(
            3,
            "deterministic tau_star oracle",
            Some(secs(5)),
            tau_star_oracle,
        ),
        run(4, "fBm sampler statistics", Some(secs(120)), fbm_statistics),
        run(
            5,
            "chained ordering tau_star <= tau_upper",
            Some(secs(120)),
            chained_ordering,
        ),
        run(
            6,
            "general/coupled reduction bitwise",
            None,
            reduction_equivalence,
        ),
        run(
            7,
            "Monte Carlo reproducibility",
            None,
            montecarlo_reproducibility,
        ),
        run(8, "PDE ODE oracle", Some(secs(60)), pde_ode_oracle),
        run(
            9,
            "positive k12 gives finite theta",
            None,
            regime_soft_check,
        ),
        run(10, "H=1/2 drift substitution", None, brownian_substitution),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
