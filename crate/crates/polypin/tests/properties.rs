//! Property tests for the spec'd invariants.

use polypin::free_energy::{free_energy, ModelParams};
use polypin::polymer::PolymerInstance;
use polypin::renewal::RenewalModel;
use polypin::rng::stream;
use polypin::srw::{hitting_law, k_fold_hitting, InterfaceSpec};
use proptest::prelude::*;

fn even_t() -> impl Strategy<Value = u32> {
    (1u32..=12).prop_map(|k| 2 * k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hitting_mass_conserved(t in even_t(), half in 8usize..200) {
        let h = 2 * half;
        let law = hitting_law(InterfaceSpec::finite(t).unwrap(), h).unwrap();
        let mut total = 0.0;
        for m in 1..=half {
            let q = law.q_at(2 * m);
            prop_assert!((0.0..=1.0).contains(&q));
            total += q;
        }
        prop_assert!((total + law.tail_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k_fold_convolution_is_associative(t in even_t(), k1 in 1u32..4, k2 in 1u32..4) {
        let h = 128usize;
        let a = k_fold_hitting(InterfaceSpec::finite(t).unwrap(), k1, h, false).unwrap();
        let b = k_fold_hitting(InterfaceSpec::finite(t).unwrap(), k2, h, false).unwrap();
        let c = k_fold_hitting(InterfaceSpec::finite(t).unwrap(), k1 + k2, h, false).unwrap();
        for m in 0..=h / 2 {
            let mut conv = 0.0;
            for j in 0..=m {
                conv += a.mass_slice()[j] * b.mass_slice()[m - j];
            }
            prop_assert!((conv - c.mass_slice()[m]).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_law_couples_with_infinite_below_t(t in even_t()) {
        let h = 64usize.max(t as usize * 2);
        let h = h + h % 2;
        let fin = hitting_law(InterfaceSpec::finite(t).unwrap(), h).unwrap();
        let inf = hitting_law(InterfaceSpec::Infinite, h).unwrap();
        for n in (2..t as usize).step_by(2) {
            prop_assert_eq!(fin.q_at(n), inf.q_at(n));
        }
    }

    #[test]
    fn mass_function_is_supermultiplicative(t in even_t(), delta in 0.01f64..1.5) {
        let model = RenewalModel::build(ModelParams::new(t, delta).unwrap(), 512).unwrap();
        for m in (2..=256usize).step_by(14) {
            for n in (2..=(512 - m)).step_by(22) {
                let lhs = model.u_at(m + n);
                let rhs = model.u_at(m) * model.u_at(n);
                prop_assert!(lhs >= rhs - 1e-12, "u({}) = {lhs} < {rhs}", m + n);
            }
        }
    }

    #[test]
    fn tilted_exponent_is_positive(t in even_t(), delta in 1e-4f64..2.0) {
        let fe = free_energy(ModelParams::new(t, delta).unwrap(), 1e-13).unwrap();
        prop_assert!(fe.phi <= 0.0);
        prop_assert!(fe.g + fe.phi > 0.0);
        prop_assert!(fe.gamma > 0.0 && fe.gamma < std::f64::consts::PI / t as f64);
    }

    #[test]
    fn gap_law_dominates_switch_part(t in even_t(), delta in 0.0f64..2.0) {
        let model = RenewalModel::build(ModelParams::new(t, delta).unwrap(), 256).unwrap();
        for n in (2..=256).step_by(2) {
            prop_assert!(2.0 * model.f1_at(n) <= model.f_at(n) + 1e-15);
            prop_assert!(model.u_at(n) >= model.f_at(n) - 1e-15);
        }
    }

    #[test]
    fn sampled_skeletons_always_valid(t in even_t(), delta in 0.0f64..1.0, seed in any::<u64>()) {
        let n = 64usize;
        let inst = PolymerInstance::build(ModelParams::new(t, delta).unwrap(), n).unwrap();
        for i in 0..8 {
            let mut rng = stream(seed, i);
            let sk = inst.sample_skeleton(&mut rng);
            prop_assert!(sk.validate(t, n).is_ok());
        }
    }
}
