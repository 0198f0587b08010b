mod common;

use std::f64::consts::PI;

use common::{oracle_horizons, random_profile, scan_roots, Scenario, SCENARIOS};
use ergoflow::flow::{integrate, spiral_rate, Direction, IntegrationOptions, SpiralRate, Termination};
use ergoflow::horizon::{
    census, find_ergospheres, find_radial_horizons, CensusOptions, ErgoregionAnnulus, HorizonError, HorizonKind,
    Orientation,
};
use ergoflow::presets::{
    acoustic, gordon_vortex, kerr_equatorial, KerrParams, ProfileFn, RadialClosedForm, RadialProfile, VortexParams,
};
use ergoflow::{Branch, SpatialPoint};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn randomized_acoustic_profiles_match_scan_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for s in SCENARIOS {
        for _ in 0..20 {
            let (prof, roots) = random_profile(s, &mut rng);
            let (field, cf) = acoustic(prof.clone());
            let rep = census(&field, Some(&cf), &CensusOptions::default()).unwrap();
            let (np, nm) = s.counts();
            assert_eq!(rep.horizons_plus.len(), np, "{s:?} {prof:?}");
            assert_eq!(rep.horizons_minus.len(), nm, "{s:?} {prof:?}");
            for br in Branch::BOTH {
                let oracle = oracle_horizons(&prof, br);
                let found: Vec<f64> = rep.horizons(br).iter().map(|h| h.radius).collect();
                assert_eq!(found.len(), oracle.len());
                for (f, o) in found.iter().zip(&oracle) {
                    assert!((f - o).abs() < 1e-8, "{f} vs {o}");
                    assert!(roots.iter().any(|r| (f - r).abs() < 1e-8));
                }
            }
        }
    }
}

#[test]
fn swirl_sign_fixes_family_and_orientation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (p, _) = random_profile(Scenario::SwirlCcw, &mut rng);
    let (f, cf) = acoustic(p);
    let rep = census(&f, Some(&cf), &CensusOptions::default()).unwrap();
    assert!(rep.horizons_plus.iter().all(|h| h.orientation == Orientation::Ccw));

    let (p, _) = random_profile(Scenario::SwirlCw, &mut rng);
    let (f, cf) = acoustic(p);
    let rep = census(&f, Some(&cf), &CensusOptions::default()).unwrap();
    assert!(rep.horizons_minus.iter().all(|h| h.orientation == Orientation::Cw));
}

#[test]
fn reversing_the_radial_flow_swaps_black_and_white() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for s in SCENARIOS {
        let (p, _) = random_profile(s, &mut rng);
        let (f, cf) = acoustic(p.clone());
        let (fd, cfd) = acoustic(p.negated_a());
        let opts = CensusOptions::default();
        let rep = census(&f, Some(&cf), &opts).unwrap();
        let dual = census(&fd, Some(&cfd), &opts).unwrap();
        for br in Branch::BOTH {
            let a = rep.horizons(br);
            let b = dual.horizons(br.other());
            assert_eq!(a.len(), b.len());
            for (h, d) in a.iter().zip(b) {
                assert!((h.radius - d.radius).abs() < 1e-10);
                assert_eq!(h.orientation, d.orientation);
                assert_eq!(h.kind.flipped(), d.kind);
            }
        }
    }
}

#[test]
fn sin_squared_profile_ergospheres_match_dense_scan() {
    let a = ProfileFn::custom(|r: f64| -(0.5 + r.sin().powi(2)));
    let prof = RadialProfile::new(a, ProfileFn::Constant(0.0), 0.3, 2.8).unwrap();
    let (_, cf) = acoustic(prof.clone());
    let ErgoregionAnnulus::Radial { rho_minus, rho_plus } = find_ergospheres(&cf, (0.3, 2.8)).unwrap() else {
        panic!("expected a radial annulus")
    };
    let oracle = scan_roots(|r| common::ergo(&prof, r), 0.3, 2.8, 1_000_000);
    assert_eq!(oracle.len(), 2);
    assert!((rho_minus - oracle[0]).abs() < 1e-10);
    assert!((rho_plus - oracle[1]).abs() < 1e-10);
    assert!((rho_minus - PI / 4.0).abs() < 1e-10 && (rho_plus - 3.0 * PI / 4.0).abs() < 1e-10);
    assert!(cf.ergo_function(0.5 * (rho_minus + rho_plus)) > 0.0);
}

#[test]
fn uniform_supersonic_flow_is_out_of_scope() {
    let prof = RadialProfile::new(ProfileFn::Constant(-1.25), ProfileFn::Constant(0.0), 0.5, 3.0).unwrap();
    let (f, cf) = acoustic(prof);
    let err = census(&f, Some(&cf), &CensusOptions::default()).unwrap_err();
    assert!(matches!(err, HorizonError::WrongRootCount { found: 0 }));
}

#[test]
fn kerr_horizons_merge_at_extremal_spin() {
    let mut counts = Vec::new();
    for spin in [0.5, 0.9, 0.99, 1.0] {
        let p = KerrParams::new(1.0, spin).unwrap();
        let (_, cf) = kerr_equatorial(p).unwrap();
        let annulus = find_ergospheres(&cf, cf.domain()).unwrap();
        let h = find_radial_horizons(&cf, Branch::Plus, &annulus).unwrap();
        let disc = (1.0 - spin * spin).sqrt();
        let expect: Vec<f64> = if disc > 0.0 {
            vec![p.equatorial_rho(1.0 - disc), p.equatorial_rho(1.0 + disc)]
        } else {
            vec![p.equatorial_rho(1.0)]
        };
        assert_eq!(h.len(), expect.len());
        for (rec, e) in h.iter().zip(&expect) {
            assert!((rec.radius - e).abs() < 1e-8, "spin {spin}: {} vs {e}", rec.radius);
        }
        counts.push(h.len());
        if spin == 1.0 {
            assert_eq!(h[0].multiplicity, 2);
        } else {
            assert!(h.iter().all(|r| r.multiplicity == 1));
        }
        assert!(find_radial_horizons(&cf, Branch::Minus, &annulus).unwrap().is_empty());
    }
    assert_eq!(counts, [2, 2, 2, 1]);
}

#[test]
fn gordon_vortex_horizons_match_acoustic_oracle() {
    let params = VortexParams::default();
    let field = gordon_vortex(params).unwrap();
    let root_k = (params.n * params.n - 1.0).sqrt();
    let rho_speed = |br: Branch, r: f64| {
        let (bp, bf) = params.polar_beta(r);
        let g = 1.0 - bp * bp - bf * bf;
        let (a, b) = (root_k * g * bp, root_k * g * bf);
        if a * a + b * b <= 1.0 {
            return f64::NAN;
        }
        common::acoustic_oracle(br, a, b).0
    };
    let opts = CensusOptions { seeds_radial: 4, seeds_angular: 4, ..Default::default() };
    let rep = census(&field, None, &opts).unwrap();
    for br in Branch::BOTH {
        let oracle = scan_roots(|r| rho_speed(br, r), 0.01, 5.0, 500_000);
        let found = rep.horizons(br);
        assert_eq!(found.len(), oracle.len(), "{br}: {found:?} vs {oracle:?}");
        for (h, o) in found.iter().zip(&oracle) {
            let poly = h.polyline.as_ref().unwrap();
            for q in poly {
                assert!((q[0].hypot(q[1]) - o).abs() < 1e-7);
            }
            assert!((h.radius - o).abs() < 1e-8, "{} vs {o}", h.radius);
        }
    }
}

#[test]
fn plus_trajectory_settles_on_inner_root_forward_and_outer_backward() {
    let (field, _) = acoustic(RadialProfile::quadratic_family(2.0, 2.0, 0.25, 0.5, 0.0, 0.9).unwrap());
    let opts = IntegrationOptions { max_step: 0.05, ..Default::default() };
    let seed = SpatialPoint::polar(2.0, 0.0);
    for (dir, root) in [(Direction::Forward, 1.5), (Direction::Backward, 2.5)] {
        let tr = integrate(&field, Branch::Plus, seed, dir, &opts).unwrap();
        let Termination::Stagnated { limit_estimate } = tr.termination else {
            panic!("{dir}: {}", tr.termination)
        };
        assert!((limit_estimate.x1 - root).abs() < 1e-6, "{dir}: {}", limit_estimate.x1);
        assert!(tr.winding * dir.sign() > 0.0);
    }
}

#[test]
fn spiral_rate_distinguishes_simple_and_double_roots() {
    let (field, cf) = acoustic(RadialProfile::quadratic_family(2.0, 2.0, 0.25, 0.5, 0.0, 0.9).unwrap());
    let opts = IntegrationOptions { max_step: 0.05, ..Default::default() };
    let tr = integrate(&field, Branch::Plus, SpatialPoint::polar(2.0, 0.0), Direction::Forward, &opts).unwrap();
    let h = 1e-6;
    let lambda = (cf.rho_speed(Branch::Plus, 1.5 + h) - cf.rho_speed(Branch::Plus, 1.5 - h)) / (2.0 * h);
    match spiral_rate(&tr, 1.5).unwrap() {
        SpiralRate::Exponential { rate, .. } => assert!((rate / lambda - 1.0).abs() < 0.15, "{rate} vs {lambda}"),
        other => panic!("{other:?}"),
    }

    let (field, _) = acoustic(RadialProfile::quadratic_family(2.0, 2.0, 0.0, 0.5, 0.0, 0.9).unwrap());
    let tr =
        integrate(&field, Branch::Plus, SpatialPoint::polar(1.8, 0.0), Direction::Forward, &Default::default()).unwrap();
    match spiral_rate(&tr, 2.0).unwrap() {
        SpiralRate::Power { exponent, .. } => assert!((exponent + 1.0).abs() < 0.15, "{exponent}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn black_kind_for_simple_swirl_profile() {
    let (f, cf) = acoustic(RadialProfile::quadratic_family(2.0, 2.0, 0.25, 0.5, 0.0, 0.9).unwrap());
    let rep = census(&f, Some(&cf), &CensusOptions::default()).unwrap();
    assert!(rep.horizons_plus.iter().all(|h| h.kind == HorizonKind::Black));
}
