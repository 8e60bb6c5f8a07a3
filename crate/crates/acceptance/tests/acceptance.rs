//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

use std::fs;
use std::path::Path;

use num_rational::BigRational;
use rand::Rng;
use serde_json::json;

use holder_lab::catalog::registry::{build_map, names, MapSpec};
use holder_lab::catalog::scalar_orbit::{banach_alpha_gt1_iterate, PowerRule};
use holder_lab::catalog::{
    affine_cube, c0_family_with_breadth, deficiency, goebel_kirk, hyperconvex, l1_ball_composite,
    l1_ball_radius, lambda_scale, norming, renormed_l1, retraction_map, shift_simplex, KappaRule,
    SequenceRule,
};
use holder_lab::domain::DEFAULT_BREADTH;
use holder_lab::experiment::{run, RunOptions};
use holder_lab::retraction::{
    iota_mu_q, iota_mu_q_exact, l1_sphere_retract, q_map, RetractionSpec,
};
use holder_lab::rng::{derive_seed, rng_from};
use holder_lab::verify::{
    check_asymptotic_profile, check_invariance, check_uniform_profile, estimate_displacement,
    estimate_holder_ratio, estimate_ratio, oracle_compare, orbit, sample_point, DisplacementStrategy,
    Extreme, PairMode, RatioOptions, RELATIVE_SLACK,
};
use holder_lab::{Map, NormKind, Seq};

const SEED: u64 = 0x5eed_0001;
const PAIRS: usize = 10_000;

type Outcome = (bool, String);

fn random_points(map: &Map, count: usize, seed: u64) -> Vec<Seq> {
    let canon = map.domain.canonical_points();
    (0..count).map(|i| sample_point(&map.domain, &canon, seed, canon.len() + i)).collect()
}

fn oracle_norming() -> Outcome {
    let t: Map = norming(0.5).unwrap();
    let mut worst = 0.0f64;
    for x in random_points(&t, 100, SEED) {
        worst = worst.max(oracle_compare(&t, &x, 50).unwrap().max_deviation);
    }
    (worst <= 1e-12, format!("max deviation {worst:.3e} over 100 starts, n <= 50"))
}

fn oracle_hyperconvex() -> Outcome {
    let t: Map = hyperconvex(4, 0.5).unwrap();
    let mut starts = t.domain.canonical_points();
    starts.extend(random_points(&t, 100, SEED));
    let tails = starts.iter().filter(|x| x.tail() != 0.0).count();
    let mut worst = 0.0f64;
    for x in &starts {
        worst = worst.max(oracle_compare(&t, x, 10).unwrap().max_deviation);
    }
    (
        worst <= 1e-12 && tails > 0,
        format!("max deviation {worst:.3e} over {} starts ({tails} with a tail), n <= 10", starts.len()),
    )
}

fn lambda_scaling() -> Outcome {
    let base: Map = hyperconvex(4, 0.5).unwrap();
    let mut worst_excess = f64::NEG_INFINITY;
    for lambda in [0.5, 0.9] {
        let f: Map = lambda_scale(base.clone(), lambda).unwrap();
        for x in random_points(&f, 100, SEED) {
            let o = orbit(&f, &x, 31).unwrap();
            for (n, d) in o.displacements.iter().enumerate() {
                worst_excess = worst_excess.max(d - lambda.powi(n as i32));
            }
        }
    }
    let est = estimate_displacement(&base, DisplacementStrategy::LambdaScaling, 10_000, SEED).unwrap();
    (
        worst_excess <= 1e-12 && est.upper < 1e-3,
        format!("max excess over lambda^n {worst_excess:.3e}; chained estimate {:.3e}", est.upper),
    )
}

fn c0_displacement() -> Outcome {
    let mut ok = true;
    let mut parts = vec![];
    for alpha in [0.5, 0.9, 0.99] {
        let t: Map = c0_family_with_breadth(0.5, 0.25, alpha, 64).unwrap();
        let x: Seq = Seq::from_dense(&(1..=64).map(|i| 0.5f64.powi(i)).collect::<Vec<_>>(), 0.0);
        let d = x.sup_dist(&t.apply(&x).unwrap());
        let bound = 0.5 * (1.0 - alpha) / (std::f64::consts::E * alpha);
        ok &= d <= bound + 1e-12;
        if alpha == 0.9 {
            ok &= (d - 0.01859).abs() < 1e-5 && (bound - 0.02043).abs() < 1e-5;
        }
        parts.push(format!("a={alpha}: {d:.5} <= {bound:.5}"));
    }
    (ok, parts.join("; "))
}

fn deficiency_displacement() -> Outcome {
    let t: Map = deficiency(2.0, 0.5).unwrap();
    let s = estimate_displacement(&t, DisplacementStrategy::SampleMin, 10_000, SEED).unwrap().upper;
    let o = estimate_displacement(&t, DisplacementStrategy::OrbitMin, 1000, SEED).unwrap().upper;
    (s <= 0.125 && o <= 0.125, format!("sample_min {s:.5}, orbit_min {o:.5}, bound 0.125"))
}

fn holder_soundness() -> Outcome {
    let mut ok = true;
    let mut parts = vec![];
    for name in ["prus", "norming", "baseline_c", "shift_simplex", "hyperconvex", "c0_family", "affine_cube", "renormed_l1"] {
        let t = build_map(&MapSpec::named(name), DEFAULT_BREADTH).unwrap();
        let est = estimate_holder_ratio(&t, PAIRS, SEED, 1).unwrap();
        let claimed = t.claims.holder_constant;
        ok &= est.value <= claimed * (1.0 + RELATIVE_SLACK);
        parts.push(format!("{name} {:.4}/{claimed:.4}", est.value));
    }
    let n: Map = norming(0.5).unwrap();
    let lip = estimate_ratio(&n, RatioOptions { exponent: Some(1.0), ..RatioOptions::holder(PAIRS, SEED, 1) })
        .unwrap()
        .value;
    ok &= lip <= 0.5f64.sqrt() * (1.0 + RELATIVE_SLACK);
    parts.push(format!("norming lipschitz {lip:.4}/0.7071"));
    (ok, parts.join(", "))
}

fn uniform_profiles() -> Outcome {
    let n_list = [1, 2, 5, 10, 20];
    let s: Map = shift_simplex(1.0, 0.5, 0.5).unwrap();
    let cube: Map = affine_cube(0.125, SequenceRule::Harmonic, 0.5, 0.5).unwrap();
    let ps = check_uniform_profile(&s, &n_list, PAIRS, SEED).unwrap();
    let pc = check_uniform_profile(&cube, &n_list, PAIRS, SEED).unwrap();
    let mut ok = ps.iter().chain(&pc).all(|p| p.holds());
    // The shift is an ℓ₁ isometry, so each ratio is ‖x-y‖^(1-α) <= λ.
    for p in &ps {
        let (x, y) = &p.measured.witness;
        let d = x.dist(y, NormKind::l1()).unwrap();
        ok &= (p.measured.value - d.powf(0.5)).abs() <= 1e-12 * d.powf(0.5);
        ok &= p.measured.value <= 0.5 * (1.0 + RELATIVE_SLACK);
    }
    let worst = |v: &[holder_lab::verify::ProfilePoint<f64>]| v.iter().map(|p| p.measured.value).fold(0.0, f64::max);
    (ok, format!("shift_simplex max {:.4}/0.5, affine_cube max {:.4}/0.5", worst(&ps), worst(&pc)))
}

fn asymptotic_profile() -> Outcome {
    let t: Map = goebel_kirk(0.5).unwrap();
    let kappa_ok = (1..=20).all(|n| {
        let k: f64 = KappaRule::GoebelKirk.kappa(n);
        (k - (n as f64 + 1.0) / n as f64).abs() <= 1e-14
    });
    let pts = check_asymptotic_profile(&t, 20, PAIRS, SEED).unwrap();
    let worst = pts
        .iter()
        .map(|p| p.measured.value / p.bound)
        .fold(0.0, f64::max);
    (
        kappa_ok && pts.iter().all(|p| p.holds()),
        format!("kappa_n = (n+1)/n: {kappa_ok}; worst measured/bound {worst:.4} over n <= 20"),
    )
}

fn isometry() -> Outcome {
    let t: Map = renormed_l1(0.5).unwrap();
    let base = RatioOptions { exponent: Some(1.0), mode: PairMode::Independent, ..RatioOptions::holder(PAIRS, SEED, 1) };
    let hi = estimate_ratio(&t, base).unwrap().value;
    let lo = estimate_ratio(&t, RatioOptions { extreme: Extreme::Min, ..base }).unwrap().value;
    let dev = (hi - 1.0).max(1.0 - lo);
    (dev <= 1e-12, format!("ratios in [{lo}, {hi}]"))
}

fn retraction_constants() -> Outcome {
    let mut ok = true;
    let mut parts = vec![];
    let specs = [
        RetractionSpec::Radial { r: 0.5, norm: serde_json::from_value(json!("sup")).unwrap() },
        RetractionSpec::Radial { r: 0.5, norm: serde_json::from_value(json!({"lp": 2.0})).unwrap() },
        RetractionSpec::Abs,
        RetractionSpec::PositivePart,
        RetractionSpec::Clamp { r: 1.0 },
        RetractionSpec::L1Sphere { r: 0.5 },
    ];
    for spec in specs {
        let m = retraction_map::<f64>(spec).unwrap();
        let est = estimate_holder_ratio(&m, PAIRS, SEED, 1).unwrap();
        let claimed = spec.tag().claimed_lipschitz;
        ok &= est.value <= claimed * (1.0 + RELATIVE_SLACK);
        parts.push(format!("{} {:.3}/{claimed}", spec.tag().name, est.value));
    }

    // Q on the annulus r/2 <= ‖x‖₁ <= r.
    let r = 0.5;
    let ball = retraction_map::<f64>(RetractionSpec::L1Sphere { r }).unwrap();
    let to_annulus = |x: &Seq, s: f64| {
        let n = x.norm(NormKind::l1()).unwrap();
        if n == 0.0 {
            Seq::from_dense(&[s], 0.0)
        } else {
            x.scale(s / n)
        }
    };
    let mut q_ratio = 0.0f64;
    for i in 0..PAIRS {
        let mut rng = rng_from(derive_seed(SEED, 99, i as u64));
        let pts = random_points(&ball, 2, derive_seed(SEED, 98, i as u64));
        let x = to_annulus(&pts[0], r * (0.5 + 0.5 * rng.random::<f64>()));
        let y = if rng.random_bool(0.5) {
            to_annulus(&pts[1], r * (0.5 + 0.5 * rng.random::<f64>()))
        } else {
            let t = 10f64.powf(-6.0 * rng.random::<f64>());
            let y = Seq::axpy(1.0 - t, &x, t, &pts[1]);
            let n = y.norm(NormKind::l1()).unwrap();
            to_annulus(&y, n.clamp(r / 2.0, r))
        };
        let d = x.dist(&y, NormKind::l1()).unwrap();
        let in_annulus = |v: &Seq| v.norm(NormKind::l1()).unwrap() >= r / 2.0;
        if d < 1e-13 || !in_annulus(&x) || !in_annulus(&y) {
            continue;
        }
        let dq = q_map(&x, r).unwrap().dist(&q_map(&y, r).unwrap(), NormKind::l1()).unwrap();
        q_ratio = q_ratio.max(dq / d);
    }
    ok &= q_ratio <= 3.0 * (1.0 + RELATIVE_SLACK);
    parts.push(format!("Q {q_ratio:.3}/3"));

    // Lands on the sphere and fixes it.
    let mut sphere_err = 0.0f64;
    for x in random_points(&ball, 2000, SEED) {
        let y = l1_sphere_retract(&x, r).unwrap();
        sphere_err = sphere_err.max((y.norm(NormKind::l1()).unwrap() - r).abs());
        sphere_err = sphere_err.max(l1_sphere_retract(&y, r).unwrap().dist(&y, NormKind::l1()).unwrap());
    }
    ok &= sphere_err <= 1e-12;
    parts.push(format!("sphere error {sphere_err:.1e}"));

    let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let exact = iota_mu_q_exact(&[(1, q(3, 5)), (2, q(3, 10))], &q(1, 1)).unwrap();
    let exact_ok = exact.iota == 2 && exact.mu == q(1, 3) && exact.q == vec![(2, q(1, 10))];
    let float = iota_mu_q(&Seq::from_dense(&[0.6, 0.3], 0.0), 1.0).unwrap();
    ok &= exact_ok && float.iota == 2;
    parts.push(format!(
        "worked example exact {exact_ok}, f64 mu-1/3 = {:.1e}",
        float.mu - 1.0 / 3.0
    ));
    (ok, parts.join(", "))
}

fn invariance_all() -> Outcome {
    let mut failed = vec![];
    for name in names() {
        let t = build_map(&MapSpec::named(name), DEFAULT_BREADTH).unwrap();
        let out = check_invariance(&t, 10_000, SEED).unwrap();
        if out.failures > 0 {
            let w = out.witness.unwrap();
            failed.push(format!("{name} ({} of {} fail, e.g. x = {}: {})", out.failures, out.checked, w.x, w.violation.constraint));
        }
    }
    let n = names().len();
    if failed.is_empty() {
        (true, format!("{n} constructions"))
    } else {
        (false, format!("{} of {n} fail: {}", failed.len(), failed.join("; ")))
    }
}

fn witness_families() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    let s: Map = shift_simplex(1.0, 0.5, 0.5).unwrap();
    let mass = 0.5f64.powf(2.0) / 2.0;
    let r: f64 = l1_ball_radius(0.5, 0.5);
    let comp: Map = l1_ball_composite(0.5, 0.5).unwrap();
    for n in 1..=50usize {
        for (t, m) in [(&s, mass), (&comp, r)] {
            let x = Seq::from_dense(&vec![m / n as f64; n], 0.0);
            let d = x.dist(&t.apply(&x).unwrap(), NormKind::l1()).unwrap();
            let err = (d - 2.0 * m / n as f64).abs();
            worst = worst.max(err);
            ok &= err <= 1e-14;
        }
    }
    let cube: Map = affine_cube(0.125, SequenceRule::Harmonic, 0.5, 0.5).unwrap();
    let mut cube_exact = true;
    // Harmonic weights are β_n = 1/(n+1), so r β_(m+1) = r/(m+2).
    for m in 1..=50usize {
        let x = Seq::from_dense(&vec![0.125; m], 0.0);
        let d = x.sup_dist(&cube.apply(&x).unwrap());
        cube_exact &= d == 0.125 / (m + 2) as f64;
    }
    ok &= cube_exact;
    (ok, format!("max |d - 2r/n| {worst:.1e}; affine_cube r b_(m+1) exact: {cube_exact}"))
}

fn alpha_gt1() -> Outcome {
    let o = banach_alpha_gt1_iterate(PowerRule::HALF_SQUARE, 0.5, 0.5, 2.0, 10).unwrap();
    let rho = &o.limit_distances;
    let recursion = rho[0] == 0.5 && rho.windows(2).all(|w| w[1] == w[0] * w[0] / 2.0);
    let reached = o.limit_reached_at;
    (
        recursion && reached.is_some_and(|k| k <= 7),
        format!("rho_(k+1) = rho_k^2/2: {recursion}; rho < 1e-15 at k = {reached:?}"),
    )
}

fn strip_timing(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.contains("\"generated_at\"") && !l.contains("\"runtime_ms\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "schema_version": 1,
        "name": "det",
        "map": {"name": "hyperconvex", "params": {"N": 4, "alpha": 0.5}},
        "checks": [
            {"kind": "invariance", "samples": 2000},
            {"kind": "holder_ratio", "pairs": 2000},
            {"kind": "oracle_compare", "n_max": 10, "samples": 20},
            {"kind": "displacement", "strategy": "sample_min", "budget": 500},
            {"kind": "uniform_profile", "n_list": [1, 3], "pairs": 500}
        ],
        "seed": 11
    });
    let path = dir.path().join("det.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let mut reports = vec![];
    for (i, threads) in [None, None, Some(1)].into_iter().enumerate() {
        let out = dir.path().join(format!("out{i}"));
        let opts = RunOptions { out: Some(out.clone()), ..Default::default() };
        let go = || run(&path, &opts).unwrap();
        let outcome = match threads {
            None => go(),
            Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(go),
        };
        reports.push((strip_timing(&outcome.report_path), fs::read(&outcome.summary_path).unwrap()));
    }
    let same = reports.windows(2).all(|w| w[0] == w[1]);
    (same, format!("3 runs (one single-threaded), {} report bytes each", reports[0].0.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 14] = [
        ("closed-form iterates of the norming map", oracle_norming),
        ("closed-form iterates of the hyperconvex map", oracle_hyperconvex),
        ("lambda-scaling displacement decay and chained estimate", lambda_scaling),
        ("c0 family displacement bound", c0_displacement),
        ("deficiency map displacement bound", deficiency_displacement),
        ("Hölder constant soundness", holder_soundness),
        ("uniform profiles", uniform_profiles),
        ("asymptotic profile", asymptotic_profile),
        ("isometry under max(|x+|, |x-|)", isometry),
        ("retraction constants", retraction_constants),
        ("invariance of every construction", invariance_all),
        ("approximate fixed point witness families", witness_families),
        ("alpha > 1 scalar iteration", alpha_gt1),
        ("determinism", determinism),
    ];
    let mut failed = vec![];
    for (i, (name, f)) in criteria.iter().enumerate() {
        let started = std::time::Instant::now();
        let (ok, detail) = f();
        println!(
            "{} {:>2} {name}: {detail} [{:.2}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            started.elapsed().as_secs_f64()
        );
        if !ok {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
    } else {
        println!("acceptance: {} of {} criteria fail: {failed:?}", failed.len(), criteria.len());
        std::process::exit(1);
    }
}
