//! Reference-scenario checks for the ambiguous-measurement table, the
//! interference search and the coherence bounds.

use mpd_core::coeffs::coeffs_at;
use mpd_core::coherence::{check_lgi_coherence, check_qpi_coherence, coherence_diameter, temporal_coherence_length};
use mpd_core::histories::{plane_budget, prob_slit_set};
use mpd_core::lgi::{ambiguous_joint_probs, conversion_matrix, AMBIGUOUS_PAIRS};
use mpd_core::qpi::{best_candidate, find_destructive, margins, qpi_probabilities, SearchRanges};
use mpd_core::quadrature::QuadratureGrid;
use mpd_core::{Constants, LgiGeometry, PathIndex, QpiGeometry};

fn plane1_pair_probs(g: &LgiGeometry) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let k = Constants::reference();
    let grid = QuadratureGrid::default();
    let s = g.setup();
    let src = [PathIndex::default()];
    let single = std::array::from_fn(|i| prob_slit_set(&s, &k, &grid, &src, 0, &[i]).unwrap());
    let pairs = AMBIGUOUS_PAIRS.map(|p| prob_slit_set(&s, &k, &grid, &src, 0, &p).unwrap());
    let overlap = AMBIGUOUS_PAIRS.map(|p| pairs_overlap(g, p));
    (single, pairs, overlap)
}

/// 2∫g_a·g_b·|Ψ|² on the first plane, by quadrature of the product directly.
fn pairs_overlap(g: &LgiGeometry, [a, b]: [usize; 2]) -> f64 {
    let k = Constants::reference();
    let s = g.setup();
    let c = coeffs_at(&s, &k, 0).unwrap();
    let (xa, xb, beta) = (s.planes[0].slit_centers[a], s.planes[0].slit_centers[b], g.beta1);
    let gain = |x0: f64, x: f64| (-(x - x0).powi(2) / (2.0 * beta * beta)).exp();
    let lo = xa.min(xb) - 10.0 * beta;
    let hi = xa.max(xb) + 10.0 * beta;
    let n = ((hi - lo) / 0.25) as usize;
    let f = |x: f64| 2.0 * gain(xa, x) * gain(xb, x) * c.amplitude(&[], x).norm_sqr();
    let h = (hi - lo) / n as f64;
    (0..=n).map(|i| f(lo + i as f64 * h) * if i == 0 || i == n { 0.5 } else { 1.0 }).sum::<f64>() * h
}

#[test]
fn conversion_matrix_recovers_single_slits_up_to_overlap() {
    for g in
        [LgiGeometry::ds_sweep_reference(46.0), LgiGeometry { delta_x: 11.0, ..LgiGeometry::ds_sweep_reference(46.0) }]
    {
        let (single, pairs, overlap) = plane1_pair_probs(&g);
        let d = conversion_matrix();
        for i in 0..3 {
            let inferred: f64 = (0..3).map(|a| d[i][a] * pairs[a]).sum();
            let expected: f64 = single[i] + (0..3).map(|a| d[i][a] * overlap[a]).sum::<f64>();
            assert!((inferred - expected).abs() <= 1e-12, "slit {i}: {inferred} vs {expected}");
        }
    }
}

#[test]
fn ambiguous_identity_holds_for_separated_slits() {
    let g = LgiGeometry { delta_x: 11.0, ..LgiGeometry::ds_sweep_reference(46.0) };
    let (single, pairs, _) = plane1_pair_probs(&g);
    assert!((single[0] - 0.5 * (pairs[0] + pairs[1] - pairs[2])).abs() <= 1e-8);
}

#[test]
fn table_rows_sum_to_pair_norms() {
    let k = Constants::reference();
    let grid = QuadratureGrid::default();
    for g in
        [LgiGeometry::ds_sweep_reference(46.0), LgiGeometry { delta_x: 11.0, ..LgiGeometry::ds_sweep_reference(120.0) }]
    {
        let s = g.setup();
        let t = ambiguous_joint_probs(&s, &k, &grid).unwrap();
        let src = [PathIndex::default()];
        let mut full = 0.0;
        for (a, pair) in AMBIGUOUS_PAIRS.iter().enumerate() {
            let p1 = prob_slit_set(&s, &k, &grid, &src, 0, pair).unwrap();
            let paths: Vec<PathIndex> = pair.iter().map(|&i| PathIndex::new(vec![i])).collect();
            let cross = plane_budget(&s, &k, &grid, &paths, 1).unwrap().cross_residual;
            let row: f64 = t.joint_raw[a].iter().sum();
            assert!((row + cross - p1).abs() <= 1e-9, "pair {a}: {row} + {cross} vs {p1}");
            full += row + cross;
        }
        let pa: f64 = AMBIGUOUS_PAIRS.iter().map(|p| prob_slit_set(&s, &k, &grid, &src, 0, p).unwrap()).sum();
        assert!((full - pa).abs() <= 1e-9);
    }
}

#[test]
fn single_path_history_is_the_slit_projection() {
    let k = Constants::reference();
    let grid = QuadratureGrid::default();
    let s = QpiGeometry::default().setup();
    let only = prob_slit_set(&s, &k, &grid, &[PathIndex::new(vec![1])], 1, &[0]).unwrap();
    let r = qpi_probabilities(&s, &k, &grid, 140.0, 143.0).unwrap();
    assert!((r.probs.p12_21 - only).abs() <= 1e-12 * only, "{} vs {only}", r.probs.p12_21);
}

#[test]
fn first_inequality_holds_everywhere() {
    let k = Constants::reference();
    let grid = QuadratureGrid::default();
    let s = QpiGeometry::default().setup();
    for (x21, x31) in [(0.0, 0.0), (60.0, -300.0), (250.0, 400.0), (500.0, 800.0)] {
        assert!(qpi_probabilities(&s, &k, &grid, x21, x31).unwrap().verdicts[0]);
    }
}

#[test]
fn constructive_margin_at_optimum_matches_second_verdict() {
    let k = Constants::reference();
    let grid = QuadratureGrid::default();
    let s = QpiGeometry::default().setup();
    let r = qpi_probabilities(&s, &k, &grid, 140.0, 143.0).unwrap();
    assert!(r.constructive_margin > 0.0 && r.probs.p12_121 > r.probs.p12_21);
    let (c, d) = margins(&s, &k, 140.0, 143.0).unwrap();
    assert_eq!((c, d), (r.constructive_margin, r.destructive_margin));
}

#[test]
fn halving_the_search_step_moves_optimum_at_most_one_micron() {
    let k = Constants::reference();
    let s = QpiGeometry::default().setup();
    let coarse = best_candidate(&find_destructive(&s, &SearchRanges::default(), &k).unwrap()).unwrap();
    let mut fine = SearchRanges::default();
    fine.x21.step = 0.5;
    fine.x31.step = 0.5;
    let fine = best_candidate(&find_destructive(&s, &fine, &k).unwrap()).unwrap();
    assert!((coarse.x21 - fine.x21).abs() <= 1.0, "{} vs {}", coarse.x21, fine.x21);
    assert!((coarse.x31 - fine.x31).abs() <= 1.0, "{} vs {}", coarse.x31, fine.x31);
}

#[test]
fn qpi_coherence_over_target_band() {
    let k = Constants::reference();
    let s = QpiGeometry::default().setup();
    let mut ranges = SearchRanges::default();
    ranges.x21.start = 140.0;
    ranges.x21.stop = 170.0;
    let found = find_destructive(&s, &ranges, &k).unwrap();
    assert_eq!(found.len(), 31);
    for c in found {
        let r = check_qpi_coherence(&QpiGeometry::default().with_slits(c.x21, c.x31), &k);
        assert!(r.all_feasible(), "x21 = {}: {:?}", c.x21, r);
        assert_eq!(r, check_qpi_coherence(&QpiGeometry::default().with_slits(c.x21, c.x31), &k));
    }
}

#[test]
fn sim2_setup_diameters() {
    let k = Constants::reference();
    let r = check_qpi_coherence(&QpiGeometry::default(), &k);
    // 2(4 + √2)·25
    assert!((r.checks[0].d_setup - 270.710678118655).abs() < 1e-9);
    assert!((r.checks[0].dc - 607.0).abs() <= 3.0);
    assert_eq!(r.checks[0].dc, coherence_diameter(0.5, 200.0, &k));
}

#[test]
fn sim1_d2_extends_d1_by_second_plane_reach() {
    let k = Constants::reference();
    let g = LgiGeometry { delta_x: 11.0, ds: 46.0, beta1: 5.0, beta2: 30.0, sigma0: 150.0, t01: 0.1, t12: 0.1 };
    let r = check_lgi_coherence(&g, &k);
    let reach = 11.0 + std::f64::consts::SQRT_2;
    assert!((r.checks[0].d_setup - 2.0 * (46.0 + reach * 5.0)).abs() < 1e-12);
    assert!((r.checks[1].d_setup - r.checks[0].d_setup - 2.0 * reach * 30.0).abs() < 1e-12);
}

#[test]
fn temporal_coherence_length_identities() {
    // n_r = 1, λ = 650 nm, Δλ = 1 nm; c·√(2 ln2/π)·λ²/(c·Δλ) with c in m/s.
    let c = 2.99792458e8;
    let (lambda, dl) = (650e-9, 1e-9);
    let oracle = c * (2.0 * std::f64::consts::LN_2 / std::f64::consts::PI).sqrt() * lambda * lambda / (c * dl);
    let got = temporal_coherence_length(dl, lambda, 1.0).unwrap();
    assert!((got - oracle).abs() <= 1e-15 * oracle);
    // A few-kHz single-mode laser: Δλ = λ²Δf/c gives Δt = Δl/c well above 1 µs.
    let df = 3e3;
    let dt = temporal_coherence_length(lambda * lambda * df / c, lambda, 1.0).unwrap() / c;
    assert!(dt > 1e-6, "Δt = {dt}");
}
