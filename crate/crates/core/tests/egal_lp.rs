mod common;

use common::{mallows_profiles, tied_profiles};
use num::{BigRational, ToPrimitive};
use proptest::prelude::*;
use randassign::egal_lp::{oev_grid_oracle, solve_oeef, solve_oev};
use randassign::mechanisms::{ps, rsd_exact};
use randassign::model::{check_envy_free, check_feasible, egalitarian_value};
use randassign::{ExactProfile, Profile};

const TOL: f64 = 1e-9;

fn small_profiles() -> impl Strategy<Value = Profile> {
    prop_oneof![
        (1usize..=3, 1usize..=3),
        (1usize..=6, Just(1usize)),
        (Just(1usize), 1usize..=6)
    ]
    .prop_filter("n*m <= 6", |(n, m)| n * m <= 6)
    .prop_flat_map(|(n, m)| {
        prop::collection::vec(prop::collection::vec(0u32..20, m), n).prop_map(|rows| {
            Profile::new(
                rows.into_iter()
                    .map(|mut r| {
                        r[0] += 1;
                        r.into_iter().map(|x| x as f64 / 4.0).collect()
                    })
                    .collect(),
            )
            .unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn optimum_is_sandwiched(v in prop_oneof![mallows_profiles(6), tied_profiles(5)]) {
        let n = v.n() as f64;
        let oev = solve_oev(&v).unwrap();
        let oeef = solve_oeef(&v).unwrap();
        prop_assert!(check_feasible(&oev.allocation).is_empty());
        prop_assert!(check_feasible(&oeef.allocation).is_empty());
        prop_assert!((egalitarian_value(&v, &oev.allocation).unwrap() - oev.value).abs() <= TOL);
        prop_assert!((egalitarian_value(&v, &oeef.allocation).unwrap() - oeef.value).abs() <= TOL);
        prop_assert!(check_envy_free(&v, &oeef.allocation).unwrap());
        prop_assert!(oev.value <= 1.0 + TOL);
        prop_assert!(oeef.value <= oev.value + TOL);
        prop_assert!(oeef.value >= 1.0 / n - TOL);
        let ev_ps = egalitarian_value(&v, &ps(&v).allocation).unwrap();
        let ev_rsd = egalitarian_value(&v, &rsd_exact(&v).unwrap().allocation).unwrap();
        prop_assert!(oeef.value >= ev_ps - TOL);
        prop_assert!(oev.value >= ev_rsd - TOL);
    }

    #[test]
    fn optimum_ignores_row_scale(v in mallows_profiles(5), scales in prop::collection::vec(0.01f64..100.0, 5)) {
        let w = Profile::new(v.rows().iter().zip(&scales).map(|(r, s)| r.iter().map(|x| x * s).collect()).collect()).unwrap();
        prop_assert!((solve_oev(&v).unwrap().value - solve_oev(&w).unwrap().value).abs() <= 1e-8);
        prop_assert!((solve_oeef(&v).unwrap().value - solve_oeef(&w).unwrap().value).abs() <= 1e-8);
    }

    #[test]
    fn grid_oracle_brackets_optimum(v in small_profiles()) {
        let oev = solve_oev(&v).unwrap().value;
        let grid = oev_grid_oracle(&v, 0.05).unwrap();
        prop_assert!(grid <= oev + TOL, "grid {} above lp {}", grid, oev);
        prop_assert!(oev - grid <= 0.05 * (v.n() * v.m()) as f64);
    }

    #[test]
    fn float_and_exact_solvers_agree(v in small_profiles()) {
        let exact = ExactProfile::new(
            v.rows().iter().map(|r| r.iter().map(|&x| BigRational::from_float(x).unwrap()).collect()).collect(),
        ).unwrap();
        let q = solve_oev(&exact).unwrap();
        prop_assert!((q.value.to_f64().unwrap() - solve_oev(&v).unwrap().value).abs() <= TOL);
        prop_assert!(check_feasible(&q.allocation).is_empty());
        prop_assert_eq!(egalitarian_value(&exact, &q.allocation).unwrap(), q.value);
        let q = solve_oeef(&exact).unwrap();
        prop_assert!((q.value.to_f64().unwrap() - solve_oeef(&v).unwrap().value).abs() <= TOL);
        prop_assert!(check_envy_free(&exact, &q.allocation).unwrap());
    }
}

#[test]
fn single_precision_solver_runs() {
    let v = randassign::Profile32::new(vec![vec![2.0, 1.0, 0.0], vec![2.0, 0.0, 1.0]]).unwrap();
    assert!((solve_oev(&v).unwrap().value - 2.0 / 3.0).abs() < 1e-4);
}
