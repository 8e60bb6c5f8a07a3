//! Independent oracles for derived constants, and published constants
//! checked against the source document shipped with the repository.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use holder_lab::catalog::scalar_orbit::{banach_alpha_gt1_iterate, PowerRule};
use holder_lab::catalog::{
    c0_family_with_breadth, deficiency, goebel_kirk, hyperconvex, l1_ball_radius, lambda_scale, norming, prus,
    shift_simplex, KappaRule,
};
use holder_lab::verify::{orbit, sample_point};
use holder_lab::{Map, Seq};

const DOCUMENT: &str = include_str!("../../../paper.md");

fn document_has(fragment: &str) {
    assert!(DOCUMENT.contains(fragment), "document lacks {fragment:?}");
}

/// `sup_{0<t<1} t^a |ln t|` by grid search.
fn grid_sup(alpha: f64) -> f64 {
    let step = 1e-6;
    (1..1_000_000).map(|k| k as f64 * step).map(|t| t.powf(alpha) * t.ln().abs()).fold(0.0, f64::max)
}

#[test]
fn log_power_sup_matches_closed_form() {
    for alpha in [0.5, 0.9, 0.99] {
        let closed = 1.0 / (std::f64::consts::E * alpha);
        assert!((grid_sup(alpha) - closed).abs() < 1e-9, "alpha {alpha}");
    }
}

#[test]
fn c0_witness_against_bound() {
    for alpha in [0.5, 0.9, 0.99] {
        let t: Map = c0_family_with_breadth(0.5, 0.25, alpha, 64).unwrap();
        // ‖x* - T x*‖ for x* = Σ 2^-i e_i, coordinate by coordinate.
        let mut direct = 0.0f64;
        for i in 1..=64 {
            let image = if i == 1 { 0.5 } else { 0.5 * 0.5f64.powi(i - 1).powf(alpha) };
            direct = direct.max((0.5f64.powi(i) - image).abs());
        }
        direct = direct.max(0.5 * 0.5f64.powi(64).powf(alpha));
        let x = Seq::from_dense(&(1..=64).map(|i| 0.5f64.powi(i)).collect::<Vec<_>>(), 0.0);
        let lib = x.sup_dist(&t.apply(&x).unwrap());
        assert!((lib - direct).abs() <= 1e-15);
        let bound = 0.5 * (1.0 - alpha) * grid_sup(alpha);
        assert!(lib <= bound + 1e-9);
        assert!((t.claims.displacement_bound.unwrap() - bound).abs() < 1e-9);
        if alpha == 0.9 {
            assert!((lib - 0.018_59).abs() < 1e-5, "{lib}");
            assert!((bound - 0.020_44).abs() < 1e-5, "{bound}");
        }
    }
}

#[test]
fn kappa_telescopes() {
    let mut prod = BigRational::one();
    for n in 1..=200u32 {
        if n >= 2 {
            let i = BigRational::from_integer(n.into());
            prod *= BigRational::one() - (i.clone() * i).recip();
        }
        let two = BigRational::from_integer(2.into());
        let exact = two * &prod;
        let expected = BigRational::new((n + 1).into(), n.into());
        assert_eq!(exact, expected);
        let k: f64 = KappaRule::GoebelKirk.kappa(n as usize);
        assert!((k - expected.to_f64().unwrap()).abs() < 1e-14);
    }
}

/// The displayed form of `F^(n+1)(x)`, built densely from the first `len`
/// coordinates of `x`.
fn hyperconvex_iterate(n_big: f64, alpha: f64, x: &Seq, n: usize, len: usize) -> (Vec<f64>, f64) {
    let (t1, t2) = (x.at(1), x.at(2));
    let mut head = vec![];
    for k in (0..=n).rev() {
        head.push(1.0 / n_big);
        head.push(t2 * (t1 / n_big.powi(k as i32)).powf(alpha));
    }
    head.extend((1..=len).map(|i| x.at(i)));
    (head, x.tail())
}

#[test]
fn hyperconvex_displayed_iterates() {
    let t: Map = hyperconvex(4, 0.5).unwrap();
    let canon = t.domain.canonical_points();
    let mut starts = canon.clone();
    starts.extend((0..50).map(|i| sample_point(&t.domain, &canon, 17, canon.len() + i)));
    for x in &starts {
        let len = x.last_index() + 1;
        let mut y = x.clone();
        for n in 0..=10 {
            y = t.apply(&y).unwrap();
            let (head, tail) = hyperconvex_iterate(4.0, 0.5, x, n, len);
            let expected = Seq::from_dense(&head, tail);
            assert!(y.sup_dist(&expected) <= 1e-15, "n = {n}, x = {x}");
        }
    }
}

#[test]
fn norming_displayed_iterates() {
    let t: Map = norming(0.5).unwrap();
    let canon = t.domain.canonical_points();
    for i in 0..40 {
        let x = sample_point(&t.domain, &canon, 3, i);
        let phi = x.at(1);
        let mut y = x.clone();
        for n in 1..=50 {
            y = t.apply(&y).unwrap();
            let s: f64 = (1..=n).map(|i| 0.5f64.powi(i)).sum::<f64>() + phi * phi / 2f64.powi(n);
            let expected = Seq::from_dense(&[s.sqrt()], 0.0);
            assert!(y.sup_dist(&expected) <= 1e-15, "n = {n}");
        }
    }
}

#[test]
fn scalar_model_converges_quadratically() {
    let o = banach_alpha_gt1_iterate(PowerRule::HALF_SQUARE, 0.5, 0.5, 2.0, 8).unwrap();
    let mut rho = 0.5f64;
    for (k, &d) in o.limit_distances.iter().enumerate() {
        assert_eq!(d, rho, "k = {k}");
        rho = rho * rho / 2.0;
    }
    // 2^-1, 2^-3, 2^-7, 2^-15, 2^-31, 2^-63
    assert_eq!(o.limit_distances[5], 2f64.powi(-63));
    assert_eq!(o.limit_reached_at, Some(5));
}

#[test]
fn published_prus_orbit() {
    document_has("T^n(0,0,\\dots)=(1, \\dots, 1, 0,0, \\dots)$ with $1$ in the first $n$ coordinates");
    let t: Map = prus(0.5).unwrap();
    let o = orbit(&t, &Seq::zero(), 12).unwrap();
    for (n, p) in o.points.iter().enumerate() {
        assert_eq!(*p, Seq::from_dense(&vec![1.0; n], 0.0));
    }
}

#[test]
fn published_norming_contraction() {
    document_has("when $\\alpha=1/2$ the mapping $T$ given in part {\\it{(2)}} above is $\\sqrt{2}/2$-contractive");
    let t: Map = norming(0.5).unwrap();
    assert_eq!(t.claims.classical_lipschitz, Some(2f64.sqrt() / 2.0));
}

#[test]
fn published_deficiency_bound() {
    document_has("\\mathrm{d}(T, K)\\leq (1/2)^{\\frac{2-\\alpha}{1-\\alpha}}");
    document_has("$(2\\lambda)^{1-\\alpha} 2^{2-\\alpha}\\leq 1$");
    let t: Map = deficiency(2.0, 0.5).unwrap();
    assert_eq!(t.claims.displacement_bound, Some(0.125));
    let lambda: f64 = t.params["lambda"].as_f64().unwrap();
    assert!(((2.0 * lambda).powf(0.5) * 2f64.powf(1.5) - 1.0).abs() < 1e-15);
}

#[test]
fn published_hyperconvex_constraint_and_decay() {
    document_has("since $2\\leq N^\\alpha$");
    document_has("\\| F^n_\\lambda (x) - F^{n+1}_\\lambda(x)\\|_\\infty \\leq \\lambda^n");
    document_has("\\leq \\varepsilon + (1- \\lambda)^\\alpha");
    let err = hyperconvex::<f64>(2, 0.5).err().unwrap().to_string();
    assert!(err.contains("2 <= N^alpha"), "{err}");
    let f: Map = lambda_scale(hyperconvex(4, 0.5).unwrap(), 0.9).unwrap();
    assert_eq!(f.claims.displacement_decay, Some(0.9));
}

#[test]
fn published_kappa_rule() {
    document_has("$A_i = (1-1/i^2)$ and $\\kappa_n = 2\\prod_{i=2}^n A_i$");
    document_has("\\| T^n(x) - T^n(y)\\| \\leq \\kappa_n 2^{1-\\alpha} \\| x - y\\|^\\alpha");
    let t: Map = goebel_kirk(0.5).unwrap();
    assert!((t.claims.asymptotic_bound(2).unwrap() - 1.5 * 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn published_c0_displacement_form() {
    document_has("\\mathrm{d}(T_\\alpha, K) \\leq (1 - \\alpha)\\sup_{0< t<1}t^\\alpha |\\ln t|");
    document_has("T_\\alpha\\Bigg(  \\sum_{i=1}^\\infty t_i x_i\\Bigg) = (1-\\delta)x_1 + \\sum_{i=1}^\\infty (1-\\delta )t^\\alpha_i x_{i+1}");
}

#[test]
fn shift_simplex_mass_and_constant() {
    // The ℓ1 shift is isometric, and ‖x - y‖₁ <= 2 mass = λ^(1/(1-α)), so
    // ‖x - y‖^(1-α) <= λ.
    let t: Map = shift_simplex(1.0, 0.5, 0.5).unwrap();
    let x = Seq::from_dense(&[0.125], 0.0);
    let y = Seq::from_dense(&[0.0, 0.125], 0.0);
    let d: f64 = x.dist(&y, holder_lab::NormKind::l1()).unwrap();
    assert_eq!(d, 0.25);
    let fx = t.apply(&x).unwrap();
    let fy = t.apply(&y).unwrap();
    assert_eq!(fx.dist(&fy, holder_lab::NormKind::l1()).unwrap() / d.sqrt(), 0.5);
}

#[test]
fn l1_ball_radius_formula() {
    for (alpha, lambda) in [(0.5, 0.5), (0.25, 0.9), (0.81, 0.3)] {
        let theta: f64 = f64::sqrt(alpha);
        let r: f64 = l1_ball_radius(alpha, lambda);
        // 4r = (λ / 8^θ)^(1/(1-θ))  <=>  8^θ (4r)^(1-θ) = λ
        assert!((8f64.powf(theta) * (4.0 * r).powf(1.0 - theta) - lambda).abs() < 1e-14);
    }
}
