//! End-to-end flows through the public API on small instances.

use num_traits::Zero;

use zeta_forms::asymptotics::growth_constants;
use zeta_forms::criterion::{dimension_claim, gamma_from_divisors};
use zeta_forms::kernel::BigRational;
use zeta_forms::linear_forms::{
    build_instance, expansion_residual, partial_fractions, rho_coefficients, series_sn,
    verify_arithmetic,
};
use zeta_forms::params::{baseline_c, constant_c, ParamSet};
use zeta_forms::presets;
use zeta_forms::search::{search, SearchConfig, Strategy};
use zeta_forms::step_phi::varpi_for;
use zeta_forms::Error;

#[test]
fn smallest_shape_beats_baseline() {
    let p = presets::theorem1();
    let (_, w) = varpi_for(&p, 96).unwrap();
    let c = constant_c(&p, &w).unwrap();
    assert!(c.lower() > baseline_c(96).upper());
}

#[test]
fn series_matches_zeta_expansion_for_several_n() {
    let p = ParamSet::new(6, vec![0, 1], 4).with_r(2);
    for n in 1..=6 {
        let inst = build_instance(&p, n).unwrap();
        let rho = rho_coefficients(&partial_fractions(&inst).unwrap()).unwrap();
        let s_n = series_sn(&inst, 96).unwrap();
        let res = expansion_residual(&s_n, &rho, 96).unwrap();
        assert!(res.contains(&BigRational::zero()), "n = {n}: {res}");
    }
}

#[test]
fn integrality_for_three_deltas() {
    // s = 6, J = 3; the check needs n > 36
    let p = ParamSet::new(10, vec![0, 1, 2], 6).with_r(1);
    let rep = verify_arithmetic(&p, 37).unwrap();
    assert!(rep.passed(), "{rep:?}");
}

#[test]
fn small_instances_fail_the_sign_precondition() {
    // s = J = 2: closed-form α applies, but the ϖ adjustment makes α̂ positive
    let p = ParamSet::new(20, vec![0, 1], 2).with_r(1);
    let gc = growth_constants(&p, 96).unwrap();
    assert!(gc.alpha_certified && gc.x0.is_some());
    assert!(gc.alpha.is_negative() && gc.alpha_hat.is_positive());
    assert!(matches!(
        dimension_claim(&p, 96, 5),
        Err(Error::SignPrecondition(_))
    ));
    // two divisor factors D_{20n}, so c stops at 2
    assert_eq!(gamma_from_divisors(&p).gamma, 40);
}

#[test]
fn exhaustive_search_finds_the_smallest_shape() {
    let cfg = SearchConfig {
        m_max: 6,
        delta_max: 1,
        j_max: 2,
        strategy: Strategy::Exhaustive,
        precision_bits: 96,
        finalists: 3,
    };
    let rep = search(&cfg).unwrap();
    let best = rep.best().unwrap();
    assert_eq!((best.key.m, best.key.deltas.clone()), (6, vec![0, 1]));
    assert!((best.normalized().to_f64() - 1.009388).abs() < 1e-5);
}
