use std::f64::consts::PI;

use proptest::prelude::*;
use toplab::heat::{decay_lower_bound_l2, heat_evolve, HeatParams};
use toplab::signal::{fourier_coefficients, norms, sign_changes, DEFAULT_DEAD_BAND};
use toplab::topo::{conjugate_signal, lemma4_witness, winding_number, Sign, SignedInterval, DEFAULT_WINDING_MARGIN};
use toplab::{FourierSeries, PeriodicSignal};

const N: usize = 512;

/// Coefficient pairs for modes `0..len`.
fn series(max_modes: usize) -> impl Strategy<Value = FourierSeries> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..max_modes).prop_map(|c| {
        let mut s = FourierSeries::zeros(c.len() - 1);
        for (k, (a, b)) in c.into_iter().enumerate() {
            s.set(k, a, b);
        }
        s
    })
}

fn nonzero(s: &FourierSeries) -> bool {
    s.parseval_energy() > 1e-6
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_matches_sampled_energy(s in series(40)) {
        let f = s.synthesize(N).unwrap();
        let l2 = norms(&f).l2;
        prop_assert!((l2 * l2 - s.parseval_energy()).abs() <= 1e-10 * (1.0 + l2 * l2));
        let back = fourier_coefficients(&f, s.cutoff()).unwrap();
        for k in 0..=s.cutoff() {
            prop_assert!((back.sine(k) - s.sine(k)).abs() < 1e-10);
            prop_assert!((back.cosine(k) - s.cosine(k)).abs() < 1e-10);
        }
    }

    #[test]
    fn norms_are_ordered(s in series(40)) {
        let nm = norms(&s.synthesize(N).unwrap());
        let tau = 2.0 * PI;
        prop_assert!(nm.l1 <= tau.sqrt() * nm.l2 * (1.0 + 1e-12));
        prop_assert!(nm.l2 <= tau.sqrt() * nm.linf * (1.0 + 1e-12));
    }

    #[test]
    fn sign_changes_are_even(samples in prop::collection::vec(-1.0f64..1.0, 8..200)) {
        let f = PeriodicSignal::new(samples).unwrap();
        prop_assert_eq!(sign_changes(&f, DEFAULT_DEAD_BAND) % 2, 0);
    }

    #[test]
    fn sign_changes_bound_winding(s in series(12)) {
        prop_assume!(nonzero(&s));
        let f = s.synthesize(N).unwrap();
        // near-degenerate curves are rejected rather than miscounted
        if let Ok(w) = winding_number(&f, DEFAULT_WINDING_MARGIN) {
            prop_assert!(w >= 0);
            prop_assert!(sign_changes(&f, DEFAULT_DEAD_BAND) >= 2 * w as usize);
        }
    }

    #[test]
    fn conjugate_is_an_isometry_off_the_mean(s in series(40)) {
        let f = s.synthesize(N).unwrap();
        let g = conjugate_signal(&f);
        let mean = f.mean();
        let centered = f.map(|v| v - mean).unwrap();
        let (a, b) = (norms(&g).l2, norms(&centered).l2);
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b));
        // applying it twice negates the centered signal
        let gg = conjugate_signal(&g);
        let diff = gg.combine(1.0, &centered, 1.0).unwrap();
        prop_assert!(diff.max_abs() <= 1e-10 * (1.0 + centered.max_abs()));
    }

    #[test]
    fn heat_flow_is_a_contracting_semigroup(s in series(30), t1 in 0.01f64..1.0, t2 in 0.01f64..1.0) {
        let f = s.synthesize(N).unwrap();
        let p1 = HeatParams::new(t1).unwrap();
        let p2 = HeatParams::new(t2).unwrap();
        let two_steps = heat_evolve(&heat_evolve(&f, &p1), &p2);
        let one_step = heat_evolve(&f, &HeatParams::new(t1 + t2).unwrap());
        let diff = two_steps.combine(1.0, &one_step, -1.0).unwrap();
        prop_assert!(diff.max_abs() <= 1e-12 * (1.0 + f.max_abs()));
        prop_assert!(norms(&one_step).l2 <= norms(&f).l2 * (1.0 + 1e-12));
    }

    #[test]
    fn l2_decay_bound_holds(s in series(40)) {
        prop_assume!(nonzero(&s));
        let b = decay_lower_bound_l2(&s.synthesize(N).unwrap(), 1.0).unwrap();
        prop_assert!(b.holds(1e-12), "{:?}", b);
    }

    #[test]
    fn lemma4_witness_meets_its_bound(cuts in prop::collection::vec(0.05f64..1.0, 1..6), first_positive: bool) {
        let mut x = -1.0;
        let mut intervals = Vec::new();
        for (j, w) in cuts.iter().enumerate() {
            let sign = if (j % 2 == 0) == first_positive { Sign::Positive } else { Sign::Negative };
            intervals.push(SignedInterval::new(x, x + w, sign));
            x += w;
        }
        let wit = lemma4_witness(&intervals).unwrap();
        let norm: f64 = wit.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        prop_assert!(wit.pairing.abs() >= wit.lower_bound * (1.0 - 1e-9));
        prop_assert!(wit.determinant != 0.0);
    }
}
