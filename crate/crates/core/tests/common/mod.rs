//! Shared oracles and profile generators for the integration tests.
#![allow(dead_code)]

use ergoflow::presets::RadialProfile;
use ergoflow::Branch;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Root scan: `n` uniform cells, plain bisection on each sign change.
pub fn scan_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..=n {
        let x1 = lo + (hi - lo) * i as f64 / n as f64;
        let f1 = f(x1);
        if f0.is_finite() && f1.is_finite() && f0 * f1 < 0.0 {
            let (mut a, mut b, mut fa) = (x0, x1, f0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = f(m);
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if (fm < 0.0) == (fa < 0.0) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            out.push(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    out
}

/// Acoustic `(dρ/dt, ρ dφ/dt)` written directly in the conjugate-multiplied
/// form, which has no vanishing denominator inside the ergoregion.
pub fn acoustic_oracle(branch: Branch, a: f64, b: f64) -> (f64, f64) {
    let q = a * a + b * b;
    let s = (q - 1.0).sqrt();
    let sg = match branch {
        Branch::Plus => 1.0,
        Branch::Minus => -1.0,
    };
    (s * (a * s + sg * b) / q, s * (b * s - sg * a) / q)
}

pub fn ergo(p: &RadialProfile, rho: f64) -> f64 {
    let (a, b) = (p.a(rho), p.b(rho));
    a * a + b * b - 1.0
}

/// Ergosphere radii of a profile by a 10⁶-cell scan.
pub fn oracle_ergospheres(p: &RadialProfile) -> Vec<f64> {
    scan_roots(|r| ergo(p, r), p.rho_lo, p.rho_hi, 1_000_000)
}

/// Zeros of the radial speed of one family strictly inside the ergoregion.
pub fn oracle_horizons(p: &RadialProfile, branch: Branch) -> Vec<f64> {
    let e = oracle_ergospheres(p);
    assert_eq!(e.len(), 2, "profile must have two ergospheres");
    let pad = 1e-9 * (e[1] - e[0]);
    scan_roots(|r| acoustic_oracle(branch, p.a(r), p.b(r)).0, e[0] + pad, e[1] - pad, 200_000)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// `B > 0` throughout.
    SwirlCcw,
    /// `B < 0` throughout.
    SwirlCw,
    /// `B` changes sign from positive to negative between the two roots of `A = −1`.
    Reversing,
}

pub const SCENARIOS: [Scenario; 3] = [Scenario::SwirlCcw, Scenario::SwirlCw, Scenario::Reversing];

impl Scenario {
    /// Expected `(plus, minus)` horizon counts.
    pub fn counts(self) -> (usize, usize) {
        match self {
            Scenario::SwirlCcw => (2, 0),
            Scenario::SwirlCw => (0, 2),
            Scenario::Reversing => (1, 1),
        }
    }
}

/// A random quadratic profile with `A = −1` at `ρ₁ ∈ [1.5, 2.5]` and
/// `ρ₂ = ρ₁ + w`, `w ∈ [0.5, 1.5]`, and exactly two ergospheres.
/// Returns the profile and the two roots of `A = −1`.
pub fn random_profile(s: Scenario, rng: &mut ChaCha8Rng) -> (RadialProfile, [f64; 2]) {
    loop {
        let rho1 = rng.gen_range(1.5..2.5);
        let w: f64 = rng.gen_range(0.5..1.5);
        let kappa = rng.gen_range(1.0..3.0);
        let c = rho1 + 0.5 * w;
        let gap = 0.25 * w * w;
        let (b0, b1) = match s {
            Scenario::SwirlCcw => (rng.gen_range(0.2..0.8), 0.0),
            Scenario::SwirlCw => (-rng.gen_range(0.2..0.8), 0.0),
            Scenario::Reversing => {
                let slope = rng.gen_range(0.3..1.0);
                let shift = rng.gen_range(-0.3..0.3) * 0.5 * w;
                (slope * shift, -slope)
            }
        };
        let p = RadialProfile::quadratic_family(c, kappa, gap, b0, b1, 0.9).unwrap();
        let roots = [c - 0.5 * w, c + 0.5 * w];
        let b_ok = match s {
            Scenario::Reversing => p.b(roots[0]) > 0.05 && p.b(roots[1]) < -0.05,
            _ => true,
        };
        if b_ok && oracle_ergospheres_coarse(&p) == 2 {
            return (p, roots);
        }
    }
}

fn oracle_ergospheres_coarse(p: &RadialProfile) -> usize {
    scan_roots(|r| ergo(p, r), p.rho_lo, p.rho_hi, 20_000).len()
}
