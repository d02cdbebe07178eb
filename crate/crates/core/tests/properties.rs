use proptest::prelude::*;

use screening_core::anthro::{AdiposeCoefficients, PAT_AGE_RANGE_YEARS};
use screening_core::reference::{weight_band, Environment, ReferenceEntry, ReferenceTable};
use screening_core::{
    active_body_mass, body_density, classify_bmi, compute_bmi, evaluate, pat_fraction, sum_folds,
    BodyMetrics, DomainError, EvaluationResult, PrincipalClass, Sex, SkinfoldSet,
};

const CUT_POINTS: [f64; 11] = [
    16.0, 17.0, 18.5, 23.0, 25.0, 27.5, 30.0, 32.5, 35.0, 37.5, 40.0,
];

fn sex() -> impl Strategy<Value = Sex> {
    prop_oneof![Just(Sex::Male), Just(Sex::Female)]
}

fn folds() -> impl Strategy<Value = SkinfoldSet> {
    proptest::array::uniform7(3.0f64..40.0).prop_map(|v| SkinfoldSet::new(v).unwrap())
}

fn metrics() -> impl Strategy<Value = BodyMetrics> {
    (1.0f64..2.1, 20.0f64..140.0, 5u32..=25)
        .prop_map(|(h, w, a)| BodyMetrics::new(h, w, a).unwrap())
}

/// The five operations composed by hand.
fn pipeline(m: &BodyMetrics, f: &SkinfoldSet, sex: Sex) -> Result<EvaluationResult, DomainError> {
    let bmi = compute_bmi(m.weight, m.height)?;
    let bmi_class = classify_bmi(bmi)?;
    let fold_sum = sum_folds(f)?;
    if !(PAT_AGE_RANGE_YEARS.0..=PAT_AGE_RANGE_YEARS.1).contains(&m.age) {
        return Ok(EvaluationResult {
            bmi,
            fold_sum,
            body_density: None,
            pat: None,
            abm: None,
            bmi_class,
            pat_supported: false,
        });
    }
    let bd = body_density(fold_sum, m.age, sex)?;
    let pat = pat_fraction(bd, m.age, sex)?;
    let abm = active_body_mass(m.weight, pat)?;
    Ok(EvaluationResult {
        bmi,
        fold_sum,
        body_density: Some(bd),
        pat: Some(pat),
        abm: Some(abm),
        bmi_class,
        pat_supported: true,
    })
}

#[test]
fn cut_points_belong_to_upper_interval() {
    for cut in CUT_POINTS {
        let c = classify_bmi(cut).unwrap();
        assert_eq!(c.additional.interval().0, cut, "cut {cut}");
        let below = classify_bmi(cut - 1e-9).unwrap();
        assert_eq!(below.additional.interval().1, cut, "cut {cut}");
    }
}

#[test]
fn sweep_nesting_and_flags() {
    // 0.01 steps over [10, 45]; integer index avoids accumulated drift.
    for i in 1000..=4500 {
        let bmi = f64::from(i) / 100.0;
        let c = classify_bmi(bmi).unwrap();
        let (plo, phi) = c.principal.interval();
        let (alo, ahi) = c.additional.interval();
        assert!(
            plo <= bmi && bmi < phi,
            "{bmi} outside principal {:?}",
            c.principal
        );
        assert!(
            alo <= bmi && bmi < ahi,
            "{bmi} outside additional {:?}",
            c.additional
        );
        assert!(plo <= alo && ahi <= phi, "{bmi}: additional not nested");
        assert_eq!(c.additional.principal(), c.principal);
        assert_eq!(c.underweight, bmi < 18.5);
        assert_eq!(c.overweight, bmi >= 25.0);
        assert_eq!(c.obese, bmi >= 30.0);
        assert!(!c.obese || c.overweight);
        assert!(!(c.underweight && c.overweight));
    }
}

#[test]
fn principal_intervals_tile_the_positive_axis() {
    let mut upper = 0.0;
    for class in PrincipalClass::ALL {
        let (lo, hi) = class.interval();
        assert_eq!(lo, upper);
        upper = hi;
    }
    assert_eq!(upper, f64::INFINITY);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn bmi_monotone(w in 5.5f64..299.0, h in 0.55f64..2.45, dw in 1e-6f64..1.0, dh in 1e-6f64..0.04) {
        let base = compute_bmi(w, h).unwrap();
        prop_assert!(compute_bmi(w + dw, h).unwrap() > base);
        prop_assert!(compute_bmi(w, h + dh).unwrap() < base);
    }

    #[test]
    fn classification_is_total(bmi in 0.01f64..200.0) {
        let c = classify_bmi(bmi).unwrap();
        let hits = PrincipalClass::ALL
            .iter()
            .filter(|p| { let (lo, hi) = p.interval(); lo <= bmi && bmi < hi })
            .count();
        prop_assert_eq!(hits, 1);
        let (lo, hi) = c.principal.interval();
        prop_assert!(lo <= bmi && bmi < hi);
    }

    #[test]
    fn density_decreases_in_fold_sum(f in 0.1f64..299.0, df in 1e-3f64..1.0, age in 8u32..=18, s in sex()) {
        let f2 = (f + df).min(300.0);
        prop_assert!(body_density(f2, age, s).unwrap() < body_density(f, age, s).unwrap());
    }

    #[test]
    fn density_decreases_in_age(f in 0.1f64..300.0, age in 8u32..18, s in sex()) {
        prop_assert!(body_density(f, age + 1, s).unwrap() < body_density(f, age, s).unwrap());
    }

    #[test]
    fn pat_decreases_in_density(bd in 0.91f64..1.19, d in 1e-6f64..0.009, age in 8u32..=18, s in sex()) {
        prop_assert!(pat_fraction(bd + d, age, s).unwrap() < pat_fraction(bd, age, s).unwrap());
    }

    #[test]
    fn child_band_sexes_agree(bd in 0.901f64..1.199, age in 8u32..=12) {
        prop_assert_eq!(
            pat_fraction(bd, age, Sex::Male).unwrap(),
            pat_fraction(bd, age, Sex::Female).unwrap()
        );
        prop_assert_eq!(
            AdiposeCoefficients::for_age_sex(age, Sex::Male),
            AdiposeCoefficients::for_age_sex(age, Sex::Female)
        );
    }

    #[test]
    fn mass_is_conserved(w in 5.5f64..299.0, pat in 0.0f64..0.999) {
        let abm = active_body_mass(w, pat).unwrap();
        prop_assert!((abm + w * pat - w).abs() <= 1e-9 * w);
    }

    #[test]
    fn evaluate_matches_hand_pipeline(m in metrics(), f in folds(), s in sex()) {
        prop_assert_eq!(evaluate(&m, &f, s), pipeline(&m, &f, s));
        if let Ok(r) = evaluate(&m, &f, s) {
            prop_assert_eq!(r.pat_supported, r.pat.is_some());
            prop_assert_eq!(r.pat.is_some(), r.abm.is_some());
            if let (Some(pat), Some(abm)) = (r.pat, r.abm) {
                prop_assert!((abm + m.weight * pat - m.weight).abs() <= 1e-9 * m.weight);
            }
        }
    }

    #[test]
    fn band_thresholds_symmetric(mean in 10.0f64..120.0, frac in 0.01f64..0.49) {
        let e = ReferenceEntry::new(12, Sex::Female, Environment::Rural, mean, mean * frac).unwrap();
        let t = e.thresholds();
        prop_assert!(t[0] < t[1] && t[1] < t[2] && t[2] < t[3]);
        prop_assert!(((t[2] - e.mean) - e.sd).abs() < 1e-12);
        prop_assert!(((e.mean - t[1]) - e.sd).abs() < 1e-12);
    }

    #[test]
    fn band_is_monotone(mean in 10.0f64..120.0, frac in 0.01f64..0.49, w in 1.0f64..200.0, dw in 0.0f64..50.0) {
        let e = ReferenceEntry::new(12, Sex::Male, Environment::Urban, mean, mean * frac).unwrap();
        prop_assert!(weight_band(w + dw, &e).level >= weight_band(w, &e).level);
    }

    #[test]
    fn reference_table_roundtrips(
        cells in proptest::collection::btree_map(
            (8u32..19, any::<bool>(), any::<bool>()),
            (10.0f64..120.0, 0.01f64..0.49),
            0..20,
        )
    ) {
        let mut text = String::from("age,sex,environment,mean_kg,sd_kg\n");
        for ((age, male, urban), (mean, frac)) in &cells {
            text.push_str(&format!(
                "{age},{},{},{mean},{}\n",
                if *male { "M" } else { "F" },
                if *urban { "urban" } else { "rural" },
                mean * frac
            ));
        }
        let table = ReferenceTable::load(text.as_bytes()).unwrap();
        prop_assert_eq!(table.len(), cells.len());
        let mut buf = Vec::new();
        table.write(&mut buf).unwrap();
        prop_assert_eq!(ReferenceTable::load(buf.as_slice()).unwrap(), table);
    }
}
