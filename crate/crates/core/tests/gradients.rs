//! Analytic gradients against central finite differences.

use foops::merit::{estimate_smoothness, h_grad_x, h_grad_y, h_value, merit_eval, InnerMethod};
use foops::penalty::phi_gamma;
use foops::{fd, problems, MOProblem, MeritConfig, PenaltyConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_points(q: usize, n: usize, lo: f64, hi: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..q).map(|_| rng.gen_range(lo..hi)).collect()).collect()
}

fn bundled() -> Vec<MOProblem> {
    vec![
        problems::example1(1).0,
        problems::example1(3).0,
        problems::example1(20).0,
        problems::fig2(),
        problems::quadratic_pair(),
        problems::example2().0,
    ]
}

#[test]
fn jacobians_match_finite_differences() {
    for p in bundled() {
        for x in random_points(p.dim(), 20, -1.5, 1.5, 11) {
            let fd = fd::jacobian(|z| p.objectives(z), &x, fd::default_step(&x));
            let an = p.jacobian(&x);
            for (a, b) in an.iter().zip(&fd) {
                let err = fd::relative_error(a, b, 1e-3);
                assert!(err < 1e-4, "{}: jacobian rel err {err} at {x:?}", p.name());
            }
        }
    }
}

#[test]
fn preference_gradient_matches_finite_differences() {
    let (p, r) = problems::example1(3);
    let p = p.with_preference(&r).unwrap();
    for x in random_points(3, 5, -1.0, 1.0, 5) {
        let fd = fd::gradient(|z| p.f0(z), &x, fd::default_step(&x));
        let err = fd::relative_error(&p.grad_f0(&x), &fd, 1e-6);
        assert!(err < 1e-4, "f0 rel err {err} at {x:?}");
    }
}

#[test]
fn h_gradients_match_finite_differences() {
    let cfg = MeritConfig::new(1.0, 0.1).unwrap();
    let p = problems::example1(3).0;
    let pts = random_points(3, 20, -1.0, 1.0, 3);
    for pair in pts.chunks(2) {
        let (x, y) = (&pair[0], &pair[1]);
        let gy = fd::gradient(|z| h_value(&cfg, &p, x, z), y, fd::default_step(y));
        let gx = fd::gradient(|z| h_value(&cfg, &p, z, y), x, fd::default_step(x));
        assert!(fd::relative_error(&h_grad_y(&cfg, &p, x, y), &gy, 1e-6) < 1e-4);
        assert!(fd::relative_error(&h_grad_x(&cfg, &p, x, y), &gx, 1e-6) < 1e-4);
    }
}

fn certified(cfg: &MeritConfig, p: &MOProblem, box_half_width: f64) -> InnerMethod {
    let lo = vec![-box_half_width; p.dim()];
    let hi = vec![box_half_width; p.dim()];
    let est = estimate_smoothness(p, &lo, &hi, 500, 1).unwrap();
    InnerMethod::pgd(0.9 * est.inner_step(cfg))
}

fn check_merit_gradient(p: &MOProblem, cfg: &MeritConfig, points: &[Vec<f64>]) {
    let inner = certified(cfg, p, 1.0);
    for x in points {
        let eval = merit_eval(cfg, p, x, x, &inner).unwrap();
        assert!(eval.inner_converged, "{}: inner solve did not converge at {x:?}", p.name());
        let h = 1e-5;
        let fd = fd::gradient(
            |z| merit_eval(cfg, p, z, &eval.y_star, &inner).unwrap().value,
            x,
            h,
        );
        let err = fd::relative_error(&eval.grad, &fd, 1e-6);
        assert!(err < 1e-3, "{}: grad v rel err {err} at {x:?}", p.name());
    }
}

#[test]
fn merit_gradient_example1() {
    let cfg = MeritConfig::new(1.0, 0.01).unwrap().with_inner(1e-10, 200_000);
    let p = problems::example1(3).0;
    check_merit_gradient(&p, &cfg, &random_points(3, 10, -1.0, 1.0, 21));
}

#[test]
fn merit_gradient_fig2() {
    // l = 2 exceeds the weak-convexity modulus of the Fig. 2 objectives.
    let cfg = MeritConfig::new(2.0, 0.01).unwrap().with_inner(1e-10, 200_000);
    let p = problems::fig2();
    check_merit_gradient(&p, &cfg, &random_points(1, 10, -1.5, 1.5, 22));
}

#[test]
fn penalty_gradient_matches_finite_differences() {
    let mcfg = MeritConfig::new(1.0, 0.01).unwrap().with_inner(1e-10, 200_000);
    let (p, r) = problems::example1(3);
    let p = p.with_preference(&r).unwrap();
    let inner = certified(&mcfg, &p, 1.0);
    for pcfg in [PenaltyConfig::constant(1.0, 0.7), PenaltyConfig::constant(2.0, 0.7)] {
        for x in random_points(3, 10, -1.0, 1.0, 31) {
            let eval = phi_gamma(&pcfg, &p, &mcfg, &x, 0.7, &x, &inner).unwrap();
            let y = eval.merit.y_star.clone();
            let fd = fd::gradient(
                |z| phi_gamma(&pcfg, &p, &mcfg, z, 0.7, &y, &inner).unwrap().value,
                &x,
                1e-5,
            );
            let err = fd::relative_error(&eval.grad, &fd, 1e-6);
            assert!(err < 1e-3, "theta {}: grad phi rel err {err} at {x:?}", pcfg.theta);
        }
    }
}
