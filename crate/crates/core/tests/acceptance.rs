//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line to
//! the real stdout (bypassing the harness capture) and then asserts.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use common::{acoustic_oracle, oracle_horizons, random_profile, Scenario, SCENARIOS};
use ergoflow::flow::{integrate, spiral_rate, Direction, IntegrationOptions, SpiralRate, Termination};
use ergoflow::horizon::{
    census, characteristic_transit_check, find_ergospheres, find_radial_horizons, BoundaryBehavior, BoundaryId,
    CensusOptions, CensusReport, ErgoregionAnnulus, ErgosphereClass, HorizonError,
};
use ergoflow::metric::zero_energy_field;
use ergoflow::presets::acoustic::conjugate_products;
use ergoflow::presets::{
    acoustic, gordon_vortex, kerr_axial, kerr_equatorial, KerrParams, RadialClosedForm, RadialProfile, VortexParams,
};
use ergoflow::{Branch, InverseMetricField, SpatialPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: u32, ok: bool, elapsed: Duration, detail: &str) {
    let line = format!(
        "criterion {n}: {} ({:.2} s) {detail}\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(ok, "criterion {n} failed: {detail}");
}

fn kerr() -> KerrParams {
    KerrParams::new(1.0, 0.8).unwrap()
}

fn rel_err(x: [f64; 2], y: [f64; 2]) -> f64 {
    let d = (x[0] - y[0]).hypot(x[1] - y[1]);
    d / x[0].hypot(x[1]).max(y[0].hypot(y[1])).max(f64::MIN_POSITIVE)
}

#[test]
fn criterion_01_kerr_equatorial_horizons() {
    let t0 = Instant::now();
    let p = kerr();
    let (field, cf) = kerr_equatorial(p).unwrap();
    let rep = census(&field, Some(&cf), &CensusOptions::default()).unwrap();
    let disc = (p.m * p.m - p.a * p.a).sqrt();
    let expect = [(p.m - disc), (p.m + disc)].map(|r| (r * r + p.a * p.a).sqrt());
    let radii: Vec<f64> = rep.horizons_plus.iter().map(|h| h.radius).collect();
    let err = if radii.len() == 2 { (radii[0] - expect[0]).abs().max((radii[1] - expect[1]).abs()) } else { f64::NAN };
    let el = t0.elapsed();
    let ok = radii.len() == 2 && err < 1e-8 && rep.horizons_minus.is_empty() && el.as_secs_f64() < 10.0;
    verdict(1, ok, el, &format!("plus radii {radii:?}, max error {err:e}, minus count {}", rep.horizons_minus.len()));
}

#[test]
fn criterion_02_minus_family_is_monotone() {
    let t0 = Instant::now();
    let (field, cf) = kerr_equatorial(kerr()).unwrap();
    let inner = kerr().a;
    let outer = kerr().outer_ergosphere_rho();
    let lo = cf.domain().0;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bad = Vec::new();
    for _ in 0..100 {
        let rho = rng.gen_range(lo..outer);
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let tr =
            integrate(&field, Branch::Minus, SpatialPoint::polar(rho, phi), Direction::Forward, &Default::default())
                .unwrap();
        let monotone = tr.samples.windows(2).all(|w| w[1].point.x1 < w[0].point.x1);
        let exited = match tr.termination {
            Termination::ExitedErgoregion { point } => (point.x1 - inner).abs() < 1e-5,
            _ => false,
        };
        if !(monotone && exited) {
            bad.push((rho, phi, tr.termination.label()));
        }
    }
    let el = t0.elapsed();
    verdict(2, bad.is_empty() && el.as_secs_f64() < 30.0, el, &format!("100 seeds, failures {bad:?}"));
}

#[test]
fn criterion_03_acoustic_horizon_counts() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for s in SCENARIOS {
        for i in 0..20 {
            let (prof, _) = random_profile(s, &mut rng);
            let (field, cf) = acoustic(prof.clone());
            let rep = match census(&field, Some(&cf), &CensusOptions::default()) {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("{s:?}#{i}: {e}"));
                    continue;
                }
            };
            let counts = (rep.horizons_plus.len(), rep.horizons_minus.len());
            if counts != s.counts() {
                failures.push(format!("{s:?}#{i}: counts {counts:?}"));
                continue;
            }
            for br in Branch::BOTH {
                let oracle = oracle_horizons(&prof, br);
                if oracle.len() != rep.horizons(br).len() {
                    failures.push(format!("{s:?}#{i}: oracle count {} for {br}", oracle.len()));
                    continue;
                }
                for (h, o) in rep.horizons(br).iter().zip(&oracle) {
                    worst = worst.max((h.radius - o).abs());
                }
            }
        }
    }
    let el = t0.elapsed();
    let ok = failures.is_empty() && worst < 1e-8 && el.as_secs_f64() < 120.0;
    verdict(3, ok, el, &format!("60 profiles, max root error {worst:e}, failures {failures:?}"));
}

#[test]
fn criterion_04_orientation_on_plus_horizons() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for s in [Scenario::SwirlCcw, Scenario::Reversing] {
        for _ in 0..10 {
            let (prof, _) = random_profile(s, &mut rng);
            let (field, cf) = acoustic(prof.clone());
            let rep = census(&field, Some(&cf), &CensusOptions::default()).unwrap();
            for h in &rep.horizons_plus {
                let b = prof.b(h.radius);
                if b <= 0.0 {
                    continue;
                }
                let opts = IntegrationOptions { max_time: 1.0, stagnation_window: 1_000_000, ..Default::default() };
                let tr = integrate(&field, Branch::Plus, SpatialPoint::polar(h.radius, 0.0), Direction::Forward, &opts)
                    .unwrap();
                let last = tr.samples.last().unwrap();
                let measured = last.point.x2 / last.t;
                let expect = b / h.radius;
                worst = worst.max((measured / expect - 1.0).abs());
                checked += 1;
            }
        }
    }
    let el = t0.elapsed();
    verdict(4, checked > 0 && worst < 1e-6, el, &format!("{checked} horizons, max relative error {worst:e}"));
}

/// Symmetric presets with a closed form, for the cross-method check.
fn symmetric_cases() -> Vec<(String, Box<dyn InverseMetricField>, Box<dyn RadialClosedForm>)> {
    let mut out: Vec<(String, Box<dyn InverseMetricField>, Box<dyn RadialClosedForm>)> = Vec::new();
    for spin in [0.8, 1.0] {
        let (f, cf) = kerr_equatorial(KerrParams::new(1.0, spin).unwrap()).unwrap();
        out.push((format!("kerr a={spin}"), Box::new(f), Box::new(cf)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for s in SCENARIOS {
        for i in 0..3 {
            let (p, _) = random_profile(s, &mut rng);
            let (f, cf) = acoustic(p);
            out.push((format!("{s:?}#{i}"), Box::new(f), Box::new(cf)));
        }
    }
    let (f, cf) = acoustic(RadialProfile::quadratic_family(2.0, 2.0, 0.0, 0.5, 0.0, 0.9).unwrap());
    out.push(("double root".into(), Box::new(f), Box::new(cf)));
    out
}

#[test]
fn criterion_05_cross_method_equivalence() {
    let t0 = Instant::now();
    let opts = CensusOptions::default();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let cases = symmetric_cases();
    for (name, f, cf) in &cases {
        let by_cf = census(f.as_ref(), Some(cf.as_ref()), &opts);
        let by_map = census(f.as_ref(), None, &opts);
        let (a, b) = match (by_cf, by_map) {
            (Ok(a), Ok(b)) => (a, b),
            (a, b) => {
                failures.push(format!("{name}: {:?} / {:?}", a.err(), b.err()));
                continue;
            }
        };
        for br in Branch::BOTH {
            let (x, y) = (a.horizons(br), b.horizons(br));
            if x.len() != y.len() {
                failures.push(format!("{name} {br}: {} vs {}", x.len(), y.len()));
                continue;
            }
            for (h, g) in x.iter().zip(y) {
                worst = worst.max((h.radius - g.radius).abs());
                if h.multiplicity != g.multiplicity {
                    failures.push(format!("{name} {br}: multiplicity {} vs {}", h.multiplicity, g.multiplicity));
                }
            }
        }
    }
    let el = t0.elapsed();
    verdict(
        5,
        failures.is_empty() && worst < 1e-8,
        el,
        &format!("{} presets, max radius difference {worst:e}, failures {failures:?}", cases.len()),
    );
}

#[test]
fn criterion_06_spiral_rate_dichotomy() {
    let t0 = Instant::now();
    let (field, cf) = acoustic(RadialProfile::quadratic_family(2.0, 2.0, 0.25, 0.5, 0.0, 0.9).unwrap());
    let opts = IntegrationOptions { max_step: 0.05, ..Default::default() };
    let tr = integrate(&field, Branch::Plus, SpatialPoint::polar(2.0, 0.0), Direction::Forward, &opts).unwrap();
    let h = 1e-6;
    let lambda = (cf.rho_speed(Branch::Plus, 1.5 + h) - cf.rho_speed(Branch::Plus, 1.5 - h)) / (2.0 * h);
    let simple = spiral_rate(&tr, 1.5);
    let simple_ok = matches!(simple, Ok(SpiralRate::Exponential { rate, .. }) if (rate / lambda - 1.0).abs() < 0.15);

    let (field, _) = acoustic(RadialProfile::quadratic_family(2.0, 2.0, 0.0, 0.5, 0.0, 0.9).unwrap());
    let tr =
        integrate(&field, Branch::Plus, SpatialPoint::polar(1.8, 0.0), Direction::Forward, &Default::default()).unwrap();
    let double = spiral_rate(&tr, 2.0);
    let double_ok = matches!(double, Ok(SpiralRate::Power { exponent, .. }) if (exponent + 1.0).abs() < 0.15);
    let el = t0.elapsed();
    verdict(
        6,
        simple_ok && double_ok && el.as_secs_f64() < 60.0,
        el,
        &format!("simple {simple:?} vs linearization {lambda}; double {double:?}"),
    );
}

#[test]
fn criterion_07_extremal_merge() {
    let t0 = Instant::now();
    let mut rows = Vec::new();
    for spin in [0.5, 0.9, 0.99, 0.999, 0.9999, 1.0] {
        let (_, cf) = kerr_equatorial(KerrParams::new(1.0, spin).unwrap()).unwrap();
        let annulus = find_ergospheres(&cf, cf.domain()).unwrap();
        let h = find_radial_horizons(&cf, Branch::Plus, &annulus).unwrap();
        rows.push((spin, h.len(), h.iter().map(|r| r.multiplicity).collect::<Vec<_>>()));
    }
    let ok = rows.iter().all(|(s, n, m)| if *s < 1.0 { *n == 2 && m == &[1, 1] } else { *n == 1 && m == &[2] });
    verdict(7, ok, t0.elapsed(), &format!("(spin, count, multiplicities) {rows:?}"));
}

#[test]
fn criterion_08_characteristic_ergospheres() {
    let t0 = Instant::now();
    let field = kerr_axial(kerr()).unwrap();
    let rep = census(&field, None, &CensusOptions::default()).unwrap();
    let b = &rep.boundary_behavior;
    let characteristic = b.inner_class == ErgosphereClass::Characteristic
        && b.outer_class == ErgosphereClass::Characteristic
        && BoundaryId::BOTH
            .iter()
            .all(|&w| Branch::BOTH.iter().all(|&br| b.behavior(w, br) == BoundaryBehavior::Characteristic));
    let no_horizons = rep.horizons_plus.is_empty() && rep.horizons_minus.is_empty();
    let level = |p: SpatialPoint| field.radius(p);
    let transit = characteristic_transit_check(&field, &rep.annulus, Some(&level), &Default::default()).unwrap();
    let el = t0.elapsed();
    let summary: Vec<String> =
        transit.families.iter().map(|f| format!("{}: {:?} -> {:?}", f.branch, f.from, f.to)).collect();
    verdict(
        8,
        characteristic && no_horizons && transit.opposite_transit,
        el,
        &format!(
            "characteristic {characteristic}, zero horizons {no_horizons}, transit {summary:?}, opposite {}",
            transit.opposite_transit
        ),
    );
}

#[test]
fn criterion_09_generic_and_closed_form_agree() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: Vec<(String, f64)> = Vec::new();

    // presets with a radial closed form
    let mut radial: Vec<(String, Box<dyn InverseMetricField>, Box<dyn RadialClosedForm>)> = Vec::new();
    let (f, cf) = kerr_equatorial(kerr()).unwrap();
    radial.push(("kerr-equatorial".into(), Box::new(f), Box::new(cf)));
    for s in SCENARIOS {
        let (p, _) = random_profile(s, &mut rng);
        let (f, cf) = acoustic(p);
        radial.push((format!("acoustic {s:?}"), Box::new(f), Box::new(cf)));
    }
    for (name, f, cf) in &radial {
        let ErgoregionAnnulus::Radial { rho_minus, rho_plus } = find_ergospheres(cf.as_ref(), cf.domain()).unwrap()
        else {
            unreachable!()
        };
        let mut w = 0.0f64;
        let mut n = 0;
        while n < 1000 {
            let rho = rng.gen_range(rho_minus..rho_plus);
            let x = SpatialPoint::polar(rho, rng.gen_range(0.0..std::f64::consts::TAU));
            if f.eval(x).unwrap().delta() > -1e-6 {
                continue;
            }
            for br in Branch::BOTH {
                let v = zero_energy_field(f.as_ref(), x, br).unwrap();
                w = w.max(rel_err(v, [cf.rho_speed(br, rho), cf.phi_speed(br, rho)]));
            }
            n += 1;
        }
        worst.push((name.clone(), w));
    }

    // Cartesian presets reduce to the acoustic form with a time rescaling
    let axial = kerr_axial(kerr()).unwrap();
    let (rm, rp) = kerr().horizon_radii();
    let mut w = 0.0f64;
    let mut n = 0;
    while n < 1000 {
        let r = rng.gen_range(rm..rp);
        let th = rng.gen_range(0.0..std::f64::consts::TAU);
        let x = SpatialPoint::new((r * r + 0.64).sqrt() * th.sin(), r * th.cos());
        let Ok(c) = axial.coefficients(x) else { continue };
        if axial.eval(x).unwrap().delta() > -1e-6 {
            continue;
        }
        let sk = c.k.sqrt();
        for br in Branch::BOTH {
            let v = zero_energy_field(&axial, x, br).unwrap();
            let (a, b) = acoustic_oracle(br, -sk * c.b_rho, -sk * c.b_z);
            w = w.max(rel_err(v, [a / sk, b / sk]));
        }
        n += 1;
    }
    worst.push(("kerr-axial".into(), w));

    let vp = VortexParams::default();
    let vortex = gordon_vortex(vp).unwrap();
    let root_k = (vp.n * vp.n - 1.0).sqrt();
    let mut w = 0.0f64;
    let mut n = 0;
    while n < 1000 {
        let rho = rng.gen_range(0.05..3.0);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let x = SpatialPoint::new(rho * phi.cos(), rho * phi.sin());
        if vortex.eval(x).unwrap().delta() > -1e-6 {
            continue;
        }
        let (br_, bp_) = vp.polar_beta(rho);
        let gamma = 1.0 - br_ * br_ - bp_ * bp_;
        let (s, c) = phi.sin_cos();
        for br in Branch::BOTH {
            let v = zero_energy_field(&vortex, x, br).unwrap();
            let frame = [c * v[0] + s * v[1], -s * v[0] + c * v[1]];
            let (a, b) = acoustic_oracle(br, root_k * gamma * br_, root_k * gamma * bp_);
            w = w.max(rel_err(frame, [a / (root_k * gamma), b / (root_k * gamma)]));
        }
        n += 1;
    }
    worst.push(("gordon-vortex".into(), w));

    let mut ident = 0.0f64;
    let mut n = 0;
    while n < 10_000 {
        let a: f64 = rng.gen_range(-4.0..4.0);
        let b: f64 = rng.gen_range(-4.0..4.0);
        if a * a + b * b <= 1.0 {
            continue;
        }
        let s = (a * a + b * b - 1.0).sqrt();
        let scales = [(a * s).abs().max(b.abs()).powi(2), (a * b).abs().max(s).powi(2)];
        for ((lhs, rhs), sc) in conjugate_products(a, b).into_iter().zip(scales) {
            ident = ident.max((lhs - rhs).abs() / sc.max(1.0));
        }
        n += 1;
    }
    let field_ok = worst.iter().all(|(_, w)| *w < 1e-10);
    verdict(
        9,
        field_ok && ident < 1e-12,
        t0.elapsed(),
        &format!("max relative field error per preset {worst:?}; identity error {ident:e}"),
    );
}

#[test]
fn criterion_10_existence_check_never_fires() {
    let t0 = Instant::now();
    let mut runs = 0;
    let mut fired = Vec::new();
    let mut record = |name: &str, r: Result<CensusReport, HorizonError>| {
        runs += 1;
        if let Err(HorizonError::ConsistencyFailure(m)) = r {
            fired.push(format!("{name}: {m}"));
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for s in SCENARIOS {
        for _ in 0..20 {
            let (p, _) = random_profile(s, &mut rng);
            let (f, cf) = acoustic(p);
            record("acoustic", census(&f, Some(&cf), &CensusOptions::default()));
        }
    }
    for (name, f, cf) in symmetric_cases() {
        record(&name, census(f.as_ref(), Some(cf.as_ref()), &CensusOptions::default()));
        record(&name, census(f.as_ref(), None, &CensusOptions::default()));
    }
    record("gordon-vortex", census(&gordon_vortex(VortexParams::default()).unwrap(), None, &CensusOptions::default()));
    record("kerr-axial", census(&kerr_axial(kerr()).unwrap(), None, &CensusOptions::default()));
    verdict(10, fired.is_empty(), t0.elapsed(), &format!("{runs} censuses, firings {fired:?}"));
}
