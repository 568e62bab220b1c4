use perclat_core::coupling::{p_hat, CoupledBondRealization, Embedding};
use perclat_core::gobp::{survival_probability, BondModel};
use perclat_core::{FieldLabel, PerturbationField, Site};
use proptest::prelude::*;

proptest! {
    #[test]
    fn embedding_round_trip(dstar in 1usize..=4, t in 0u64..500, raw in proptest::collection::vec(0i64..200, 4)) {
        let emb = Embedding::for_spatial(dstar).unwrap();
        let mut w: Vec<i64> = raw[..dstar].to_vec();
        // Clamp into the cone |w| <= t.
        let mut budget = t as i64;
        for c in &mut w {
            *c = (*c).min(budget);
            budget -= *c;
        }
        let w = Site::new(&w).unwrap();
        let z = emb.embed(t, &w).unwrap();
        prop_assert!(z.is_nonnegative());
        prop_assert_eq!(z.l1_norm(), t as i64);
        prop_assert_eq!(emb.unembed(&z).unwrap(), (t, w));
    }

    #[test]
    fn fields_are_pure_functions(seed in any::<u64>(), x in -1000i64..1000, y in -1000i64..1000, l in 0.1f64..10.0) {
        let z = Site::new(&[x, y]).unwrap();
        let a = PerturbationField::new(seed, l, FieldLabel::X).unwrap();
        let b = PerturbationField::new(seed, l, FieldLabel::X).unwrap();
        prop_assert_eq!(a.offset(&z), b.offset(&z));
        for i in 0..2 {
            prop_assert!(a.offset(&z).get(i).abs() <= l);
        }
    }

    #[test]
    fn bonds_are_monotone_in_amplitude(seed in any::<u64>(), x in -50i64..50, y in -50i64..50, axis in 0usize..2, l in 0.5f64..4.0, dl in 0.0f64..2.0) {
        // Offsets scale with L from the same uniforms, so opening is monotone.
        let z = Site::new(&[x, y]).unwrap();
        let lo = CoupledBondRealization::for_trial(seed, 0, l).unwrap();
        let hi = CoupledBondRealization::for_trial(seed, 0, l + dl).unwrap();
        prop_assert!(!lo.open_along(&z, axis) || hi.open_along(&z, axis));
    }
}

#[test]
fn coupled_survival_matches_bernoulli_at_effective_p() {
    // Bonds of the coupled field are i.i.d. Bernoulli(p̂), so both survival
    // curves estimate the same quantity.
    for (l, dstar) in [(1.2, 1), (1.5, 2), (0.9, 3)] {
        let p = p_hat(l).unwrap();
        let c = survival_probability(BondModel::Coupled { amplitude: l }, dstar, 20, 4000, 1).unwrap();
        let b = survival_probability(BondModel::Bernoulli { p }, dstar, 20, 4000, 2).unwrap();
        assert!(c.interval().overlaps(&b.interval()), "L={l}: {c:?} vs {b:?}");
    }
}
