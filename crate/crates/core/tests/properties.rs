//! Randomized invariants over the two reference scenarios.

use mpd_core::coeffs::{coeffs_at, plane1_coeffs};
use mpd_core::coherence::coherence_diameter;
use mpd_core::histories::{history_weight, plane_budget, prob_slit_set, Event, HistorySpec, Superposition};
use mpd_core::lgi::{
    ambiguous_joint_probs, best_signs, compare_routes, lgi_closed_form, optimize_signs, ClosedFormTerms,
    SignAssignment, ROUTE_TOLERANCE,
};
use mpd_core::quadrature::QuadratureGrid;
use mpd_core::{Constants, LgiGeometry, PathIndex, PhysicalSetup, QpiGeometry};
use proptest::prelude::*;

fn lgi_geometry() -> impl Strategy<Value = LgiGeometry> {
    (
        prop::sample::select(vec![7.0, 11.0]),
        1u32..=1000,
        1u32..=10,
        1u32..=10,
        1u32..=80,
        prop::sample::select(vec![0.1, 0.2]),
        prop::sample::select(vec![0.1, 0.2]),
    )
        .prop_map(|(delta_x, ds, b1, b2, s0, t01, t12)| LgiGeometry {
            delta_x,
            ds: f64::from(ds),
            beta1: 5.0 * f64::from(b1),
            beta2: 10.0 * f64::from(b2),
            sigma0: 10.0 * f64::from(s0),
            t01,
            t12,
        })
}

/// Light reaches the first plane's slits, so Γ_c is finite.
fn normalizable(g: &LgiGeometry, k: &Constants) -> bool {
    let t = ambiguous_joint_probs(&g.setup(), k, &QuadratureGrid::default()).unwrap();
    t.plane1.iter().sum::<f64>() > 1e-12
}

/// p̂(i, î) = Σ_a D[i][a]·p^A(a, î), with D written out.
fn inferred(t: &mpd_core::lgi::AmbiguousTable) -> [[f64; 4]; 3] {
    let j = t.joint();
    let d = [[0.5, 0.5, -0.5], [0.5, -0.5, 0.5], [-0.5, 0.5, 0.5]];
    std::array::from_fn(|i| std::array::from_fn(|o| (0..3).map(|a| d[i][a] * j[a][o]).sum()))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 50, ..ProptestConfig::default() })]

    #[test]
    fn routes_agree_on_random_configurations(g in lgi_geometry(), n in 0usize..128) {
        let k = Constants::reference();
        prop_assume!(normalizable(&g, &k));
        let s = g.setup();
        let grid = QuadratureGrid::default();
        for signs in [SignAssignment::from_index(n), optimize_signs(&s, &k, &grid).unwrap().signs] {
            let c = compare_routes(&s, &k, &grid, signs).unwrap();
            prop_assert!(c.ka_rel() <= ROUTE_TOLERANCE, "K_A {} vs {}", c.closed_form.ka, c.quadrature.ka);
            prop_assert!(c.kv_rel() <= ROUTE_TOLERANCE, "K_V {} vs {}", c.closed_form.kv, c.quadrature.kv);
        }
    }

    #[test]
    fn kv_is_at_least_one_and_gamma_normalizes(g in lgi_geometry()) {
        let k = Constants::reference();
        prop_assume!(normalizable(&g, &k));
        let t = ambiguous_joint_probs(&g.setup(), &k, &QuadratureGrid::default()).unwrap();
        prop_assert!((t.gamma_c * t.plane1.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for signs in SignAssignment::all() {
            let r = t.evaluate(signs);
            prop_assert!(r.kv >= 1.0);
            prop_assert!(r.signaling.iter().all(|s| s.is_finite()));
            prop_assert_eq!(r.violation, r.ka - r.kv);
        }
    }

    #[test]
    fn optimizer_returns_enumerated_argmax(g in lgi_geometry()) {
        let k = Constants::reference();
        prop_assume!(normalizable(&g, &k));
        let terms = ClosedFormTerms::new(&g.setup(), &k).unwrap();
        let best = best_signs(|s| terms.evaluate(s));
        // Independent re-scan over raw indices.
        let mut scan = (0usize, f64::NEG_INFINITY);
        for n in 0..128 {
            let v = terms.evaluate(SignAssignment::from_index(n)).violation;
            if v > scan.1 {
                scan = (n, v);
            }
        }
        prop_assert_eq!(best.signs.index(), scan.0);
        prop_assert_eq!(best.violation, scan.1);
    }

    #[test]
    fn sign_flip_pairs_linear_and_bilinear_parts(g in lgi_geometry(), n in 0usize..128) {
        let k = Constants::reference();
        prop_assume!(normalizable(&g, &k));
        let s = g.setup();
        let terms = ClosedFormTerms::new(&s, &k).unwrap();
        let table = ambiguous_joint_probs(&s, &k, &QuadratureGrid::default()).unwrap();
        let (p, ds) = (inferred(&table), table.signaling());
        let q = SignAssignment::from_index(n);
        let f = q.negated();
        prop_assert_eq!(f.index(), 127 - n);
        prop_assert_eq!(f.negated(), q);
        // Negation flips the terms linear in the signs and keeps the q₁·q₂ terms.
        let (q1, q2) = (q.q1.map(f64::from), q.q2.map(f64::from));
        let mut linear = 0.0;
        let mut bilinear = 0.0;
        for i in 0..3 {
            for o in 0..4 {
                linear += (q1[i] - q2[o]) * p[i][o];
                bilinear += q1[i] * q2[o] * p[i][o];
            }
        }
        linear -= (0..4).map(|o| q2[o] * ds[o]).sum::<f64>();
        let (ka, kf) = (terms.ka(q), terms.ka(f));
        prop_assert!((0.5 * (ka - kf) - linear).abs() <= 1e-9, "{} vs {}", 0.5 * (ka - kf), linear);
        prop_assert!((0.5 * (ka + kf) - bilinear).abs() <= 1e-9, "{} vs {}", 0.5 * (ka + kf), bilinear);
    }

    #[test]
    fn joint_mass_scaling_leaves_probabilities_unchanged(
        g in lgi_geometry(),
        scale in prop::sample::select(vec![1e-3, 0.5, 2.0, 1e3]),
    ) {
        let k = Constants::reference();
        prop_assume!(normalizable(&g, &k));
        let grid = QuadratureGrid::default();
        let a = ambiguous_joint_probs(&g.setup(), &k, &grid).unwrap();
        let b = ambiguous_joint_probs(&g.setup(), &k.rescaled(scale), &grid).unwrap();
        let flat = |t: &mpd_core::lgi::AmbiguousTable| {
            let mut v = t.plane1.to_vec();
            v.extend(t.joint_raw.iter().flatten());
            v.extend(t.all_open_raw);
            v
        };
        for (x, y) in flat(&a).iter().zip(flat(&b)) {
            prop_assert!(rel(y, *x) <= 1e-12 || (x - y).abs() <= 1e-300, "{x} vs {y}");
        }
    }

    #[test]
    fn free_propagation_conserves_norm(t in 0.1f64..1.0, sigma0 in 10.0f64..800.0) {
        let k = Constants::reference();
        let mut s = QpiGeometry::default().setup();
        s.sigma0 = sigma0;
        s.times[0] = t;
        let c = plane1_coeffs(&s, &k).unwrap();
        let psi = Superposition::new(&c, &s, &[PathIndex::default()]).unwrap();
        prop_assert!((psi.norm(&QuadratureGrid::default()) - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn mirrored_setup_mirrors_intensity(g in lgi_geometry(), x in -500.0f64..500.0) {
        let k = Constants::reference();
        let s = g.setup();
        let m = s.mirrored();
        for plane in 0..2 {
            let (c, cm) = (coeffs_at(&s, &k, plane).unwrap(), coeffs_at(&m, &k, plane).unwrap());
            let paths = s.paths_to(plane);
            let a = Superposition::new(&c, &s, &paths).unwrap().intensity(x);
            let b = Superposition::new(&cm, &m, &paths).unwrap().intensity(-x);
            prop_assert!(rel(b, a) <= 1e-12 || a < 1e-290, "{a} vs {b}");
        }
    }

    #[test]
    fn coherence_diameter_grows_with_time(sigma in 5.0f64..800.0, t in 0.0f64..2.0, dt in 0.0f64..1.0) {
        let k = Constants::reference();
        prop_assert!(coherence_diameter(t + dt, sigma, &k) >= coherence_diameter(t, sigma, &k));
    }
}

fn scenario_setups() -> Vec<PhysicalSetup> {
    let mut v: Vec<PhysicalSetup> = [7.0, 11.0]
        .iter()
        .flat_map(|&delta_x| {
            [(0.1, 0.1), (0.2, 0.2), (0.2, 0.1)].map(|(t01, t12)| {
                LgiGeometry { delta_x, ds: 46.0, beta1: 15.0, beta2: 30.0, sigma0: 130.0, t01, t12 }.setup()
            })
        })
        .collect();
    v.push(QpiGeometry::default().setup());
    v
}

#[test]
fn every_plane_is_complete() {
    let k = Constants::reference();
    let grid = QuadratureGrid::default();
    for s in scenario_setups() {
        for plane in 0..s.planes.len() {
            let all = s.paths_to(plane);
            let mut sets = vec![all.clone()];
            sets.extend(all.iter().map(|p| vec![p.clone()]));
            for paths in sets {
                let b = plane_budget(&s, &k, &grid, &paths, plane).unwrap();
                assert!(b.defect().abs() <= 1e-9, "plane {plane}: defect {:e}", b.defect());
            }
        }
    }
}

#[test]
fn halving_the_step_is_stable() {
    let k = Constants::reference();
    let (coarse, fine) = (QuadratureGrid::default(), QuadratureGrid::default().with_step(0.5));
    for s in scenario_setups() {
        for plane in 0..s.planes.len() {
            for slit in 0..s.planes[plane].slit_count() {
                let h = HistorySpec::new(vec![Event::Projection { plane, slit }]);
                let a = history_weight(&s, &k, &coarse, &h).unwrap().weight;
                let b = history_weight(&s, &k, &fine, &h).unwrap().weight;
                assert!(rel(a, b) < 1e-6, "plane {plane} slit {slit}: {a} vs {b}");
            }
            let h = HistorySpec::new(vec![Event::Measurement { plane }]);
            let a = history_weight(&s, &k, &coarse, &h).unwrap().weight;
            let b = history_weight(&s, &k, &fine, &h).unwrap().weight;
            assert!(rel(a, b) < 1e-6, "plane {plane} detector: {a} vs {b}");
        }
    }
}

#[test]
fn closed_form_matches_chained_history_weight() {
    let k = Constants::reference();
    let grid = QuadratureGrid::default();
    let s = LgiGeometry::ds_sweep_reference(46.0).setup();
    let h = HistorySpec::new(vec![Event::Projection { plane: 0, slit: 0 }, Event::Projection { plane: 1, slit: 0 }]);
    let w = history_weight(&s, &k, &grid, &h).unwrap().weight;
    let direct = prob_slit_set(&s, &k, &grid, &[PathIndex::new(vec![0])], 1, &[0]).unwrap();
    assert!((w - direct).abs() <= 1e-10);
    assert!(lgi_closed_form(&s, &k, SignAssignment::from_index(0)).is_ok());
}

/// Incoherent sum over the two-plane history family: measured on plane 1,
/// or through slit i and then one of the plane-2 outcomes.
fn history_family_total(s: &PhysicalSetup) -> (f64, f64) {
    let k = Constants::reference();
    let grid = QuadratureGrid::default();
    let w = |events| history_weight(s, &k, &grid, &HistorySpec::new(events)).unwrap().weight;
    let mut total = w(vec![Event::Measurement { plane: 0 }]);
    let mut overlap = plane_budget(s, &k, &grid, &[PathIndex::default()], 0).unwrap().cross_residual;
    for i in 0..3 {
        for j in 0..3 {
            total += w(vec![Event::Projection { plane: 0, slit: i }, Event::Projection { plane: 1, slit: j }]);
        }
        total += w(vec![Event::Projection { plane: 0, slit: i }, Event::Measurement { plane: 1 }]);
        overlap += plane_budget(s, &k, &grid, &[PathIndex::new(vec![i])], 1).unwrap().cross_residual;
    }
    (total, overlap)
}

#[test]
fn history_family_sums_to_one() {
    let g = LgiGeometry { delta_x: 11.0, ..LgiGeometry::ds_sweep_reference(46.0) };
    let (total, overlap) = history_family_total(&g.setup());
    assert!((total - 1.0).abs() <= 1e-6, "total {total}");
    assert!((total + overlap - 1.0).abs() <= 1e-9);
}

#[test]
fn history_family_misses_only_slit_overlap() {
    // At Δx = 7 the overlap is ~1e-6 and is the whole deficit.
    let (total, overlap) = history_family_total(&LgiGeometry::ds_sweep_reference(46.0).setup());
    assert!(overlap > 1e-7);
    assert!((total + overlap - 1.0).abs() <= 1e-9, "total {total} overlap {overlap}");
}
