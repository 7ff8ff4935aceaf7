use walsh_spider::formulas::{
    eval_i_quadrature, eval_j, eval_k, eval_l_majorant, eval_q, eval_q_asymptotic, eval_r,
    eval_return_prob,
};
use walsh_spider::{PenaltyParams, Ray, RaySpace};

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

const SIGNS: [f64; 6] = [-1.0, -0.3, 0.0, 0.25, 0.4, 1.0];

#[test]
fn i_matches_double_integral_reference() {
    // Independent double integral over (|Y_t|, L_t) with mpmath at 30 digits.
    let cases = [
        (-1.0, -0.5, 0.5, 1.0, 0.264_719_140_168_690_5),
        (0.5, -1.0, 0.0, 2.0, 0.935_842_547_164_723_7),
        (-0.3, 0.4, 1.0, 3.0, 0.712_235_610_911_237_8),
        (0.7, 0.7, 0.2, 1.5, 3.703_358_958_124_861_5),
        (0.0, 0.0, 1.0, 2.0, 0.479_500_122_186_953_5),
        (0.0, -2.0, 0.3, 4.0, 0.180_589_251_413_435_3),
        (1.2, 0.1, 2.0, 0.5, 0.006_334_015_001_002_272),
    ];
    for (b, g, x, t, want) in cases {
        let got = eval_i_quadrature(b, g, x, t).unwrap().value;
        assert!(
            rel(got, want) < 1e-8,
            "I({b},{g},{x},{t}) = {got}, want {want}"
        );
    }
}

#[test]
fn majorants_dominate() {
    for b in SIGNS {
        for x in [0.0, 0.5, 2.0] {
            for t in [0.5, 2.0, 10.0] {
                let j = eval_j(b, x, t).unwrap().value;
                let l = eval_l_majorant(b, x, t).unwrap().value;
                assert!(j <= l * (1.0 + 1e-12), "J > L at ({b},{x},{t})");
                for g in SIGNS {
                    let i = eval_i_quadrature(b, g, x, t).unwrap().value;
                    let k = eval_k(b, g, x, t).unwrap().value;
                    assert!(i <= k * (1.0 + 1e-9), "I={i} > K={k} at ({b},{g},{x},{t})");
                }
            }
        }
    }
}

/// Horizon at which the majorant is within 5% of the exact value. Rows with a
/// negative or zero top exponent converge at rate `t^(-1/2)`. Positive rows
/// converge fast once `top^2 t` is large. For `top >= 0.5`, `t = 50` is
/// enough. Smaller exponents need `top^2 t >= 50`; at `t = 50` the gap
/// reaches 12% for `(beta, gamma) = (0, 0.25)`.
fn equivalence_horizon(top: f64) -> f64 {
    if top <= 0.0 {
        1e4
    } else {
        f64::max(50.0, 50.0 / (top * top))
    }
}

#[test]
fn majorants_are_large_time_equivalents() {
    for b in SIGNS {
        for g in SIGNS {
            let t = equivalence_horizon(b.max(g));
            for x in [0.0, 1.0] {
                let i = eval_i_quadrature(b, g, x, t).unwrap().value;
                let k = eval_k(b, g, x, t).unwrap().value;
                assert!(rel(k, i) < 0.05, "K/I = {} at ({b},{g},{x},{t})", k / i);
            }
        }
        let t = equivalence_horizon(b);
        let j = eval_j(b, 1.0, t).unwrap().value;
        let l = eval_l_majorant(b, 1.0, t).unwrap().value;
        assert!(rel(l, j) < 0.05, "L/J = {} at ({b},{t})", l / j);
    }
}

#[test]
fn small_positive_exponents_are_slow_at_fifty() {
    let k = eval_k(0.0, 0.25, 1.0, 50.0).unwrap().value;
    let i = eval_i_quadrature(0.0, 0.25, 1.0, 50.0).unwrap().value;
    assert!(k / i > 1.1, "K/I = {}", k / i);
}

#[test]
fn i_is_monotone_in_both_exponents() {
    for x in [0.0, 0.7] {
        let mut prev = 0.0;
        for b in SIGNS {
            let v = eval_i_quadrature(b, -0.5, x, 2.0).unwrap().value;
            assert!(v > prev);
            prev = v;
        }
        let mut prev = 0.0;
        for g in SIGNS {
            let v = eval_i_quadrature(-0.5, g, x, 2.0).unwrap().value;
            assert!(v > prev);
            prev = v;
        }
    }
}

fn spider(mu: &[f64], alpha: &[f64], gamma: f64) -> (RaySpace, PenaltyParams) {
    (
        RaySpace::new(mu.to_vec()).unwrap(),
        PenaltyParams::new(alpha.to_vec(), gamma).unwrap(),
    )
}

#[test]
fn normaliser_equivalent_holds_in_every_regime() {
    let cases = [
        (&[0.3, 0.7][..], &[0.5, -1.0][..], 1.0, 50.0),
        (&[0.3, 0.7][..], &[1.0, -0.5][..], 0.3, 50.0),
        // Tied rows converge like 1 / (gamma^2 t).
        (&[0.3, 0.7][..], &[0.4, 0.4][..], 0.4, 1000.0),
        (&[0.3, 0.7][..], &[0.4, 0.2][..], 0.4, 2000.0),
        (&[0.3, 0.7][..], &[0.0, -1.0][..], 0.0, 1e4),
        (&[0.3, 0.7][..], &[-0.5, -1.0][..], 0.0, 1e4),
        (&[0.2, 0.3, 0.5][..], &[0.0, 0.0, -1.0][..], -1.0, 1e4),
        (&[0.5, 0.5][..], &[-1.0, -2.0][..], -1.0, 1e4),
    ];
    for (mu, alpha, gamma, t) in cases {
        let (space, params) = spider(mu, alpha, gamma);
        for k in space.rays() {
            for x in [0.0, 0.8] {
                let r = eval_r(&space, &params, x, k, t).unwrap().value;
                let q = eval_q(&space, &params, x, k, t).unwrap().value;
                let qa = eval_q_asymptotic(&space, &params, x, k, t).unwrap().value;
                assert!(r <= q * (1.0 + 1e-9));
                assert!(
                    rel(qa, r) < 0.05,
                    "Q_asym/R = {} for {alpha:?} {gamma} x={x} {k:?}",
                    qa / r
                );
            }
        }
    }
}

#[test]
fn return_probability() {
    assert_eq!(eval_return_prob(0.7, 0.0).unwrap(), 1.0);
    assert!(eval_return_prob(0.7, -1.0).is_err());
    // Tilted motion: exp(-a y) / cosh(a y), with complement tanh(a y).
    for (a, y) in [(0.5, 2.0), (1.3, 0.2), (0.1, 40.0)] {
        let v = eval_return_prob(a, y).unwrap();
        assert!((v - (-a * y).exp() / (a * y).cosh()).abs() < 1e-15);
        assert!((1.0 - v - (a * y).tanh()).abs() < 1e-15);
    }
    assert!(eval_return_prob(-0.5, 1.0).is_err());
}

#[test]
fn unrepresentable_values_are_reported_as_overflow() {
    let (space, params) = spider(&[0.3, 0.7], &[0.5, -1.0], 1.0);
    let err = eval_r(&space, &params, 0.0, Ray(0), 3000.0).unwrap_err();
    assert!(matches!(err, walsh_spider::Error::Overflow(_)), "{err}");
}
