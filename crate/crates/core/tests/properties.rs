//! Randomized structural properties of the building blocks.

mod common;

use common::*;
use free_transmission::discretization::{format_field, parse_field};
use free_transmission::operators::{pucci_minus, pucci_plus, OperatorJson};
use free_transmission::prelude::*;
use free_transmission::regularization::{assemble_g, build_h, clamp_profile};
use proptest::prelude::*;

fn matrix2() -> impl Strategy<Value = SymMatrix> {
    (-20.0..20.0f64, -20.0..20.0f64, -20.0..20.0f64).prop_map(|(a, b, c)| SymMatrix::new2(a, b, c))
}

fn field(grid: Grid) -> impl Strategy<Value = GridFunction> {
    prop::collection::vec(-1.0..1.0f64, grid.len())
        .prop_map(move |v| GridFunction::new(grid, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn operators_are_pucci_elliptic(kind in 0..5usize, seed in any::<u64>(), m in matrix2(), n in matrix2()) {
        let op = random_operator(KINDS[kind], 2, &mut rng(seed));
        let d = op.value(&m) - op.value(&n);
        let diff = m - n;
        prop_assert!(pucci_minus(&diff, e12()) - 1e-9 <= d);
        prop_assert!(d <= pucci_plus(&diff, e12()) + 1e-9);
    }

    #[test]
    fn operator_json_round_trip(kind in 0..5usize, seed in any::<u64>()) {
        let op = random_operator(KINDS[kind], 2, &mut rng(seed));
        let text = serde_json::to_string(&op).unwrap();
        let back: OperatorSpec = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &op);
        prop_assert_eq!(OperatorJson::from_spec(&back).kind, OperatorJson::from_spec(&op).kind);
    }

    #[test]
    fn clamp_profile_is_monotone(a in -1.0..1.0f64, b in -1.0..1.0f64, eps in 1e-4..1.0f64) {
        let (lo, hi) = (a.min(b), a.max(b));
        let (p, q) = (clamp_profile(lo, eps).unwrap(), clamp_profile(hi, eps).unwrap());
        prop_assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q));
        prop_assert!(p <= q);
    }

    #[test]
    fn build_h_is_monotone_and_contracting(
        v in field(Grid::square(-1.0, 1.0, 9).unwrap()),
        bump in prop::collection::vec(0.0..0.5f64, 81),
        eps in 0.01..1.0f64,
        extend_zero in any::<bool>(),
    ) {
        let w = GridFunction::new(*v.grid(), v.values().iter().zip(&bump).map(|(a, b)| a + b).collect()).unwrap();
        let hv = build_h(&v, eps, extend_zero).unwrap();
        let hw = build_h(&w, eps, extend_zero).unwrap();
        for (a, b) in hv.values().iter().zip(hw.values()) {
            prop_assert!((0.0..=1.0).contains(a));
            prop_assert!(a <= &(b + 1e-12));
        }
        prop_assert!(hv.max_abs_diff(&hw) <= v.max_abs_diff(&w) / (2.0 * eps) + 1e-12);
    }

    #[test]
    fn assembled_operator_interpolates(
        v in field(Grid::square(-1.0, 1.0, 7).unwrap()),
        eps in 0.05..1.0f64,
        seed in any::<u64>(),
        m in matrix2(),
        node in 0..49usize,
    ) {
        let mut r = rng(seed);
        let f1 = random_operator("bellman", 2, &mut r);
        let f2 = random_operator("isaacs", 2, &mut r);
        let op = assemble_g(build_h(&v, eps, true).unwrap(), &f1, &f2).unwrap();
        let (a, b) = (f1.value(&m), f2.value(&m));
        let g = op.eval(node, &m);
        prop_assert!(a.min(b) - 1e-9 <= g && g <= a.max(b) + 1e-9);
    }

    #[test]
    fn field_text_round_trip(v in field(Grid::new(&[-0.5, 1.0], &[1.5, 1.125], &[5, 4]).unwrap())) {
        let back = parse_field(&format_field(&v)).unwrap();
        prop_assert_eq!(back.grid(), v.grid());
        prop_assert_eq!(back.values(), v.values());
    }
}
