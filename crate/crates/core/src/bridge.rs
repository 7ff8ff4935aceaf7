//! Exact conditional laws of a Brownian bridge over one grid step.
//!
//! Given the endpoints of a Brownian motion over a step of length `h`, the
//! path in between is a Brownian bridge whatever the drift. Two functionals
//! of that bridge have simple closed-form tails, so they can be sampled by
//! inversion:
//!
//! * the maximum of a bridge from `0` to `b`:
//!   `P(max >= m) = exp(-2 m (m - b) / h)` for `m >= max(0, b)`;
//! * the local time at zero of a bridge from `u` to `v`:
//!   `P(L >= l) = exp(-((l + |u| + |v|)^2 - (u - v)^2) / (2h))` for `l > 0`,
//!   with an atom at zero of mass `1 - exp(-(|u||v| + uv) / h)`.

use rand::Rng;
use rand_distr::StandardNormal;

/// Uniform draw on `(0, 1]`, safe to take logarithms of.
pub(crate) fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

pub(crate) fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Maximum of a Brownian bridge from `0` to `increment` over duration `h`,
/// sampled from the uniform `u in (0, 1]`.
pub fn bridge_max_from_uniform(increment: f64, h: f64, u: f64) -> f64 {
    0.5 * (increment + (increment * increment - 2.0 * h * u.ln()).sqrt())
}

pub fn sample_bridge_max<R: Rng + ?Sized>(increment: f64, h: f64, rng: &mut R) -> f64 {
    bridge_max_from_uniform(increment, h, open_uniform(rng))
}

/// Probability that a Brownian bridge from `u` to `v` over duration `h`
/// visits zero.
pub fn bridge_hits_zero_probability(u: f64, v: f64, h: f64) -> f64 {
    if u * v <= 0.0 {
        1.0
    } else {
        (-2.0 * u * v / h).exp()
    }
}

/// Local time at zero accumulated by a Brownian bridge from `u` to `v` over
/// duration `h`, sampled from the uniform `w in (0, 1]`.
pub fn bridge_local_time_from_uniform(u: f64, v: f64, h: f64, w: f64) -> f64 {
    let a = u.abs() + v.abs();
    let d = u - v;
    let s = d * d - 2.0 * h * w.ln();
    if s <= a * a {
        0.0
    } else {
        s.sqrt() - a
    }
}

pub fn sample_bridge_local_time<R: Rng + ?Sized>(u: f64, v: f64, h: f64, rng: &mut R) -> f64 {
    bridge_local_time_from_uniform(u, v, h, open_uniform(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn bridge_max_dominates_endpoints() {
        for &(b, u) in &[(1.0, 1.0), (-2.0, 1.0), (0.3, 0.5), (-0.1, 1e-300)] {
            let m = bridge_max_from_uniform(b, 0.7, u);
            assert!(m >= 0.0 && m >= b, "{m} {b}");
        }
        // u = 1 is the conditional minimum of the maximum.
        assert_eq!(bridge_max_from_uniform(1.5, 1.0, 1.0), 1.5);
        assert_eq!(bridge_max_from_uniform(-1.5, 1.0, 1.0), 0.0);
    }

    #[test]
    fn bridge_max_tail_matches_formula() {
        // Tail at level m of a bridge 0 -> b, checked by brute-force sampling.
        let (b, h, m): (f64, f64, f64) = (0.4, 1.0, 1.0);
        let exact = (-2.0 * m * (m - b) / h).exp();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let n = 200_000;
        let hits = (0..n)
            .filter(|_| sample_bridge_max(b, h, &mut rng) >= m)
            .count();
        let p = hits as f64 / n as f64;
        assert!((p - exact).abs() < 4.0 * (exact * (1.0 - exact) / n as f64).sqrt());
    }

    #[test]
    fn bridge_max_matches_fine_random_walk() {
        // Independent oracle: maximum over a fine discretisation of the bridge.
        let (b, h) = (-0.3, 1.0);
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let n = 4_000;
        let k = 4_000;
        let dt = h / k as f64;
        let mut fine = 0.0;
        for _ in 0..n {
            let mut w = vec![0.0; k + 1];
            for j in 1..=k {
                w[j] = w[j - 1] + dt.sqrt() * normal(&mut rng);
            }
            let end = w[k];
            let mx = (0..=k)
                .map(|j| w[j] - (j as f64 / k as f64) * (end - b))
                .fold(f64::MIN, f64::max);
            fine += mx;
        }
        fine /= n as f64;
        let mut exact = 0.0;
        for _ in 0..n {
            exact += sample_bridge_max(b, h, &mut rng);
        }
        exact /= n as f64;
        // Discretisation biases the walk maximum low by about 0.58 sqrt(dt).
        assert!(
            (exact - fine - 0.5826 * dt.sqrt()).abs() < 0.03,
            "{exact} {fine}"
        );
    }

    #[test]
    fn bridge_local_time_atom_matches_hitting_probability() {
        let (u, v, h) = (0.5, 0.8, 1.0);
        let p_hit = bridge_hits_zero_probability(u, v, h);
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let n = 200_000;
        let positive = (0..n)
            .filter(|_| sample_bridge_local_time(u, v, h, &mut rng) > 0.0)
            .count();
        let p = positive as f64 / n as f64;
        assert!((p - p_hit).abs() < 4.0 * (p_hit * (1.0 - p_hit) / n as f64).sqrt());
        assert_eq!(bridge_hits_zero_probability(0.5, -0.1, 1.0), 1.0);
    }

    #[test]
    fn bridge_local_time_from_zero_is_rayleigh() {
        // Bridge 0 -> 0 over [0, h]: L^2 is exponential with mean 2h.
        let h = 2.0;
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let n = 100_000;
        let mean_sq: f64 = (0..n)
            .map(|_| sample_bridge_local_time(0.0, 0.0, h, &mut rng).powi(2))
            .sum::<f64>()
            / n as f64;
        assert!((mean_sq - 2.0 * h).abs() < 4.0 * 2.0 * h / (n as f64).sqrt());
    }
}
