//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smch::analysis::{certify, diagnostics};
use smch::characteristics::{
    advect, mbar_closed_form, mbar_ode_residual, qx_closed_form, qx_finite_difference, HistoryFlow,
};
use smch::checks::limit_check;
use smch::dynamics::{m_rhs, u_rhs_nonlocal, ModelParams, SolutionState};
use smch::integrator::{run, step_rk4, Cadence, NullSink, RunOutcome, RunStatus, StepperConfig};
use smch::picard::{run_picard, PicardConfig};
use smch::scenario::{
    build_initial_m, load_snapshot, parse_scenario, save_snapshot, LimitCheckConfig,
    NdjsonSink,
};
use smch::spectral::{build_partition, DEFAULT_SMOOTHING};
use smch::{Field, GridSpec, Spectral};

struct Outcome {
    passed: bool,
    summary: String,
}

impl Outcome {
    fn new(passed: bool, summary: impl Into<String>) -> Self {
        Self {
            passed,
            summary: summary.into(),
        }
    }
}

fn check(label: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Outcome::new(false, format!("panicked: {msg}"))
    });
    println!(
        "[{}] {label}: {} ({:.2}s)",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.summary,
        start.elapsed().as_secs_f64()
    );
    outcome.passed
}

fn within(start: Instant, limit: Duration) -> bool {
    start.elapsed() < limit
}

/// Sum of a few Gaussians with support well inside `|x| < L/2`.
fn seam_decayed(g: GridSpec, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(0.5..1.2), rng.gen_range(-3.0..3.0)))
        .collect();
    Field::from_fn(g, |x| bumps.iter().map(|&(a, w, c)| a * (-((x - c) / w).powi(2)).exp()).sum())
}

fn band_limited(g: GridSpec, seed: u64, kmax: usize) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64, f64)> = (0..=kmax)
        .map(|j| (g.wavenumber(j), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    Field::from_fn(g, |x| modes.iter().map(|&(k, a, ph)| a * (k * x + ph).cos()).sum())
}

fn gaussian(g: GridSpec, amp: f64, width: f64) -> Field {
    Field::from_fn(g, |x| amp * (-(x / width).powi(2)).exp())
}

fn green_identities() -> Outcome {
    let start = Instant::now();
    let g = GridSpec::new(1024, 20.0).unwrap();
    let sp = Spectral::new(g);
    let mut worst = [0.0f64; 3];
    for seed in 0..20 {
        let f = seam_decayed(g, 100 + seed);
        assert!(f.seam_max() < 1e-12);
        let plus = sp.convolve_p_plus(&f).unwrap();
        let minus = sp.convolve_p_minus(&f).unwrap();
        let p = sp.convolve_p(&f).unwrap();
        let px = sp.convolve_p_x(&f).unwrap();
        let pxx = sp.derivative(&sp.derivative(&p).unwrap()).unwrap();
        worst[0] = worst[0].max((&(&plus + &minus) - &p).max_abs());
        worst[1] = worst[1].max((&(&minus - &plus) - &px).max_abs());
        worst[2] = worst[2].max((&pxx - &(&p - &f)).max_abs());
    }
    let ok = worst.iter().all(|&e| e < 1e-9) && within(start, Duration::from_secs(5));
    Outcome::new(
        ok,
        format!(
            "p=p+ + p- {:.1e}, p_x=p- - p+ {:.1e}, p_xx=p-f {:.1e} (tol 1e-9, < 5 s)",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn helmholtz_round_trip() -> Outcome {
    let g = GridSpec::new(1024, 20.0).unwrap();
    let sp = Spectral::new(g);
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let f = band_limited(g, 200 + seed, 40);
        let u = sp.helmholtz_solve(&f).unwrap();
        let back = &u - &sp.derivative(&sp.derivative(&u).unwrap()).unwrap();
        worst = worst.max((&back - &f).max_abs() / f.max_abs());
    }
    Outcome::new(worst < 1e-10, format!("max relative error {worst:.1e} (tol 1e-10)"))
}

fn littlewood_paley() -> Outcome {
    let g = GridSpec::new(1024, 20.0).unwrap();
    let sp = Spectral::new(g);
    let part = build_partition(g, DEFAULT_SMOOTHING).unwrap();
    let residual = part.unity_residual();
    let mut recon = 0.0f64;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for seed in 0..10 {
        let f = band_limited(g, 300 + seed, 400);
        let sum = (-1..=part.max_q()).fold(Field::zeros(g), |acc, q| &acc + &part.block(&sp, &f, q).unwrap());
        recon = recon.max((&sum - &f).max_abs() / f.max_abs());
        let ratio = part.besov_norm(&sp, &f, 0.0, 2.0, 2.0).unwrap() / f.l2_norm();
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    let bound = 1.0 / 3f64.sqrt();
    let ok = residual < 1e-12 && recon < 1e-10 && lo >= bound - 1e-12 && hi <= 1.0 + 1e-12;
    Outcome::new(
        ok,
        format!(
            "unity residual {residual:.1e} (tol 1e-12), reconstruction {recon:.1e} (tol 1e-10), \
             B0_22/L2 in [{lo:.4}, {hi:.4}] (allowed [{bound:.4}, 1])"
        ),
    )
}

/// The Gaussian run shared by the conservation and characteristic criteria.
fn gaussian_run() -> (Spectral, RunOutcome, Duration) {
    let g = GridSpec::new(1024, 20.0).unwrap();
    let sp = Spectral::new(g);
    let s0 = SolutionState::from_momentum(&sp, 0.0, gaussian(g, 1.0, 2.0)).unwrap();
    let cadence = Cadence {
        record_every: 1,
        history_every: 1,
    };
    let start = Instant::now();
    let mut records = Vec::new();
    let out = run(
        &sp,
        &s0,
        &StepperConfig::fixed(1e-3, 1.0),
        &ModelParams::sine(),
        &cadence,
        &mut records,
    )
    .unwrap();
    (sp, out, start.elapsed())
}

fn conservation(out: &RunOutcome, elapsed: Duration) -> Outcome {
    let h0 = out.history[0].h1;
    let drift = out
        .history
        .iter()
        .map(|r| ((r.h1 - h0) / h0).abs())
        .fold(0.0, f64::max);
    let ok = out.status == RunStatus::ReachedTEnd && drift < 1e-8 && elapsed < Duration::from_secs(30);
    Outcome::new(
        ok,
        format!(
            "{} after {} steps, max relative H1 drift {drift:.1e} (tol 1e-8), run {:.1}s (< 30 s)",
            out.status.as_str(),
            out.steps,
            elapsed.as_secs_f64()
        ),
    )
}

const SEEDS: [f64; 5] = [-2.0, -0.5, 0.0, 1.0, 2.5];

fn characteristic_identities(sp: &Spectral, out: &RunOutcome) -> (Outcome, Outcome) {
    let flow = HistoryFlow::new(sp, &out.fields, ModelParams::sine());
    let times = out.fields.times();
    let bundle = advect(&SEEDS, &flow, &times).unwrap();
    let fd = qx_finite_difference(&SEEDS, &flow, &times, 1e-3).unwrap();
    let qx = qx_closed_form(&bundle);
    let m0: Vec<f64> = bundle.mbar.iter().map(|m| m[0]).collect();
    let mb = mbar_closed_form(&bundle, &m0).unwrap();
    let (mut qx_err, mut mb_err, mut recip, mut flips) = (0.0f64, 0.0f64, 0.0f64, 0usize);
    for s in 0..SEEDS.len() {
        for i in 0..times.len() {
            qx_err = qx_err.max((qx[s][i] - fd[s][i]).abs() / fd[s][i].abs());
            mb_err = mb_err.max((mb[s][i] - bundle.mbar[s][i]).abs() / bundle.mbar[s][i].abs());
            recip = recip.max((qx[s][i] * mb[s][i] / m0[s] - 1.0).abs());
            if bundle.mbar[s][i].signum() != m0[s].signum() {
                flips += 1;
            }
        }
    }
    let identities = Outcome::new(
        qx_err < 1e-4 && mb_err < 1e-5 && recip < 1e-6 && flips == 0,
        format!(
            "q_x formula vs FD {qx_err:.1e} (tol 1e-4), mbar formula vs field {mb_err:.1e} (tol 1e-5), \
             reciprocity {recip:.1e} (tol 1e-6), sign flips {flips}"
        ),
    );
    let residual = mbar_ode_residual(&bundle).unwrap().into_iter().fold(0.0, f64::max);
    let scale = bundle
        .mbar
        .iter()
        .zip(&bundle.big_mbar)
        .flat_map(|(m, b)| m.iter().zip(b).map(|(m, b)| (m * b).abs()))
        .fold(0.0, f64::max);
    let dt = times[1] - times[0];
    let ode = Outcome::new(
        residual < 1e-4 * scale,
        format!(
            "residual {residual:.1e} vs 1e-4*max|mbar*Mbar| = {:.1e} at output dt {dt:.0e}",
            1e-4 * scale
        ),
    );
    (identities, ode)
}

fn formulation_consistency() -> Outcome {
    let g = GridSpec::new(1024, 20.0).unwrap();
    let sp = Spectral::new(g);
    let params = ModelParams::sine();
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let s = SolutionState::from_momentum(&sp, 0.0, seam_decayed(g, 400 + seed)).unwrap();
        let via_m = sp.helmholtz_solve(&m_rhs(&sp, &s, &params).unwrap()).unwrap();
        let direct = u_rhs_nonlocal(&sp, &s, &params).unwrap();
        worst = worst.max((&direct - &via_m).max_abs() / via_m.max_abs());
    }
    Outcome::new(worst < 1e-7, format!("max relative disagreement {worst:.1e} (tol 1e-7)"))
}

fn mch_limit() -> Outcome {
    let start = Instant::now();
    let g = GridSpec::new(1024, 20.0).unwrap();
    let sp = Spectral::new(g);
    let profile = gaussian(g, 1.0, 2.0);
    let cfg = LimitCheckConfig {
        epsilons: vec![0.2, 0.1, 0.05],
        ..LimitCheckConfig::default()
    };
    let rep = limit_check(&sp, &profile, 0.0, &cfg).unwrap();
    let slope = rep.fitted_order.unwrap_or(f64::NAN);
    let cubic = limit_check(
        &sp,
        &profile,
        0.0,
        &LimitCheckConfig {
            epsilons: vec![0.4],
            ..cfg.clone()
        },
    )
    .unwrap();
    let gain = cubic.rows[0].sup_diff_mch / cubic.rows[0].sup_diff_cubic;
    let diffs: Vec<String> = rep.rows.iter().map(|r| format!("{:.2e}", r.sup_diff_mch)).collect();
    let ok = slope >= 6.0 && gain > 5.0 && within(start, Duration::from_secs(120));
    Outcome::new(
        ok,
        format!(
            "sup differences [{}], slope {slope:.2} (>= 6); cubic gain at eps 0.4 {gain:.1} (> 5)",
            diffs.join(", ")
        ),
    )
}

/// `‖u‖_{H³}` from the spectral coefficients.
fn h3_norm(sp: &Spectral, u: &Field) -> f64 {
    let c = sp.coefficients(u).unwrap();
    let two_l = sp.grid().length();
    c.iter()
        .zip(sp.k())
        .map(|(c, k)| (1.0 + k * k).powi(3) * c.norm_sqr() * two_l)
        .sum::<f64>()
        .sqrt()
}

fn picard_contraction() -> Outcome {
    let start = Instant::now();
    let g = GridSpec::new(1024, 20.0).unwrap();
    let sp = Spectral::new(g);
    let unit = gaussian(g, 1.0, 2.0);
    let scale = 0.1 / h3_norm(&sp, &sp.helmholtz_solve(&unit).unwrap());
    let m0 = unit.scale(scale);
    let cfg = PicardConfig {
        iterations: 8,
        horizon: 0.5,
        ..PicardConfig::default()
    };
    let rep = run_picard(&sp, &m0, &cfg).unwrap();
    let s0 = SolutionState::from_momentum(&sp, 0.0, m0.clone()).unwrap();
    let direct = run(
        &sp,
        &s0,
        &StepperConfig::fixed(cfg.dt, cfg.horizon),
        &ModelParams::sine(),
        &Cadence {
            record_every: 10,
            history_every: 1,
        },
        &mut NullSink,
    )
    .unwrap();
    let frames = direct.fields.frames();
    let iterate = &rep.final_iterate;
    let aligned = frames.len() == iterate.frames.len()
        && frames.iter().zip(&iterate.times).all(|(f, t)| (f.t - t).abs() < 1e-12);
    let gap = frames
        .iter()
        .zip(&iterate.frames)
        .map(|(f, m)| (&f.m - m).l2_norm())
        .fold(0.0, f64::max);
    let diffs: Vec<String> = rep.differences.iter().map(|d| format!("{d:.1e}")).collect();
    let ok = aligned && rep.rho < 1.0 && gap < 1e-4 && within(start, Duration::from_secs(180));
    Outcome::new(
        ok,
        format!(
            "|u0|_H3 = {:.3}, d_l = [{}], rho {:.2e} (< 1), sup-L2 gap to solver {gap:.1e} (tol 1e-4)",
            h3_norm(&sp, &s0.u),
            diffs.join(", "),
            rep.rho
        ),
    )
}

fn breaking() -> Outcome {
    let g = GridSpec::new(32768, 4.0).unwrap();
    let sp = Spectral::new(g);
    let width = 0.015;
    let amp = 1.5 / (width * PI.sqrt());
    let s0 = SolutionState::from_momentum(&sp, 0.0, gaussian(g, amp, width)).unwrap();
    let cert = certify(&sp, &s0, 1.0).unwrap();

    let cfg = StepperConfig {
        dt_init: 1e-4,
        t_end: 3.0 * cert.xi.max(0.1),
        max_m_inf: 2000.0,
        // the steepening front rings across the grid shortly before detection;
        // the seam warning still fires and is reported below
        seam_abort: None,
        ..StepperConfig::default()
    };
    let mut records = Vec::new();
    let out = run(
        &sp,
        &s0,
        &cfg,
        &ModelParams::sine(),
        &Cadence {
            record_every: 1,
            history_every: 0,
        },
        &mut records,
    )
    .unwrap();
    let final_rec = diagnostics(&sp, &out.final_state, records.last().unwrap().blowup_integral).unwrap();
    let min_2m = 2.0 * records.iter().map(|r| r.min_big_m).fold(final_rec.min_big_m, f64::min);
    let t_end = out.final_state.t;
    // increments of the blow-up integral over the first and last tenth of the run
    let integral_at = |t: f64| {
        let i = records.partition_point(|r| r.t <= t).max(1) - 1;
        records[i].blowup_integral
    };
    let first = integral_at(0.1 * t_end) - integral_at(0.0);
    let last = integral_at(t_end) - integral_at(0.9 * t_end);
    let accelerating = last > first;

    let mirror_g = GridSpec::new(1024, 20.0).unwrap();
    let mirror_sp = Spectral::new(mirror_g);
    let mirror = SolutionState::from_momentum(&mirror_sp, 0.0, Field::from_fn(mirror_g, |_| 1.0)).unwrap();
    let mirror_cert = certify(&mirror_sp, &mirror, 1.0).unwrap();

    let in_window = out.status == RunStatus::BlowupDetected && t_end <= 3.0 * cert.xi;
    let ok = cert.fires
        && out.status == RunStatus::BlowupDetected
        && min_2m < -1e3
        && accelerating
        && !mirror_cert.fires;
    Outcome::new(
        ok,
        format!(
            "certificate fires={} (xi {:.3e}, A {:.2e}, h {:.2e}); run {} at t {t_end:.4e}, \
             min 2M {min_2m:.2e} (< -1e3), integral increments first/last tenth {first:.2e}/{last:.2e}; \
             mirror fires={}; window t <= 3xi {} (reported only); seam: {}",
            cert.fires,
            cert.xi,
            cert.a_xi,
            cert.h_xi,
            out.status.as_str(),
            mirror_cert.fires,
            if in_window { "holds" } else { "missed" },
            out.warnings.first().map_or("clean", String::as_str)
        ),
    )
}

fn integrator_order() -> Outcome {
    let g = GridSpec::new(256, 20.0).unwrap();
    let sp = Spectral::new(g);
    let s0 = SolutionState::from_momentum(&sp, 0.0, gaussian(g, 1.0, 2.0)).unwrap();
    let params = ModelParams::sine();
    let solve = |dt: f64| {
        let steps = (1.0 / dt).round() as usize;
        (0..steps).fold(s0.clone(), |s, _| step_rk4(&sp, &s, dt, &params).unwrap()).m
    };
    let sols: Vec<Field> = [0.1, 0.05, 0.025].iter().map(|&dt| solve(dt)).collect();
    let e1 = (&sols[0] - &sols[1]).max_abs();
    let e2 = (&sols[1] - &sols[2]).max_abs();
    let ratio = e1 / e2;
    Outcome::new(
        (ratio - 16.0).abs() <= 1.6,
        format!("step-doubling errors {e1:.2e} -> {e2:.2e}, ratio {ratio:.2} (16 +- 10%)"),
    )
}

fn determinism() -> Outcome {
    let doc = r#"{
        "grid": {"n": 512, "half_length": 20},
        "initial_data": {"kind": "gaussian_bump", "amplitude": 1, "width": 2},
        "stepper": {"t_end": 1.0, "dt_init": 0.01, "adaptive": false}
    }"#;
    let scenario = parse_scenario(doc).unwrap();
    let g = scenario.grid_spec().unwrap();
    let sp = Spectral::new(g);
    let m0 = build_initial_m(&scenario.initial_data, g).unwrap().m;
    let s0 = SolutionState::from_momentum(&sp, 0.0, m0).unwrap();
    let stream = |state: &SolutionState, cfg: &StepperConfig| {
        let mut sink = NdjsonSink::new(Vec::new());
        let out = run(&sp, state, cfg, &scenario.model, &scenario.outputs.cadence(), &mut sink).unwrap();
        (sink.0.into_inner(), out)
    };
    let (a, full) = stream(&s0, &scenario.stepper);
    let (b, _) = stream(&s0, &scenario.stepper);
    let identical = !a.is_empty() && a == b;

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.smch");
    save_snapshot(&full.final_state, &path).unwrap();
    let loaded = load_snapshot(&path).unwrap();
    let bitwise = loaded.t.to_bits() == full.final_state.t.to_bits()
        && loaded
            .m
            .values()
            .iter()
            .zip(full.final_state.m.values())
            .all(|(x, y)| x.to_bits() == y.to_bits());

    let half = StepperConfig {
        t_end: 0.5,
        ..scenario.stepper
    };
    let (_, first_leg) = stream(&s0, &half);
    let mid = dir.path().join("mid.smch");
    save_snapshot(&first_leg.final_state, &mid).unwrap();
    let resumed_start = load_snapshot(&mid).unwrap();
    let (_, resumed) = stream(&resumed_start, &scenario.stepper);
    let resume_gap = (&resumed.final_state.m - &full.final_state.m).max_abs();
    Outcome::new(
        identical && bitwise && resume_gap < 1e-9,
        format!(
            "NDJSON identical {identical} ({} bytes), snapshot bit-identical {bitwise}, \
             resumed vs uninterrupted {resume_gap:.1e} (tol 1e-9)",
            a.len()
        ),
    )
}

fn main() -> ExitCode {
    let mut passed = Vec::new();
    passed.push(check("1 Green's-function identities", green_identities));
    passed.push(check("2 Helmholtz round trip", helmholtz_round_trip));
    passed.push(check("3 Littlewood-Paley partition", littlewood_paley));
    let (sp, out, elapsed) = gaussian_run();
    passed.push(check("4 H1 conservation", || conservation(&out, elapsed)));
    let (ids, ode) = characteristic_identities(&sp, &out);
    passed.push(check("5 characteristic identities", || ids));
    passed.push(check("6 ODE along characteristics", || ode));
    drop(out);
    passed.push(check("7 formulation consistency", formulation_consistency));
    passed.push(check("8 mCH limit", mch_limit));
    passed.push(check("9 Picard contraction", picard_contraction));
    passed.push(check("10 breaking end-to-end", breaking));
    passed.push(check("11 integrator order", integrator_order));
    passed.push(check("12 determinism and persistence", determinism));
    let failures = passed.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failures} failed", passed.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
