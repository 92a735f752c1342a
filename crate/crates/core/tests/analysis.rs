use oncosim::analysis::{
    compare, frequency_timing_matrix, line_frequencies, survival_summary, welch_t_test, write_heatmap, write_lines,
    PatientCourse, SurvivalSample,
};
use oncosim::data_pipeline::DrugCombination;
use oncosim::Error;
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

fn sample(label: &str, v: &[f64]) -> SurvivalSample {
    SurvivalSample::new(label, v.to_vec())
}

/// Two-sided Welch p-value through an independent t-distribution implementation.
fn oracle_welch(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let stats = |x: &[f64]| {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n - 1.0);
        (n, m, v)
    };
    let (na, ma, va) = stats(a);
    let (nb, mb, vb) = stats(b);
    let se2 = va / na + vb / nb;
    let t = (ma - mb) / se2.sqrt();
    let df = se2.powi(2) / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let p = 2.0 * (1.0 - StudentsT::new(0.0, 1.0, df).unwrap().cdf(t.abs()));
    (t, df, p)
}

#[test]
fn welch_fixture_matches_oracle() {
    let a = [1.0, 2.0, 3.0, 4.0, 5.0];
    let b = [2.0, 3.0, 4.0, 5.0, 6.0];
    let r = welch_t_test(&sample("a", &a), &sample("b", &b)).unwrap();
    let (t, df, p) = oracle_welch(&a, &b);
    assert!((r.t - -1.0).abs() < 1e-12 && (r.t - t).abs() < 1e-12);
    assert!((r.df - 8.0).abs() < 1e-12 && (r.df - df).abs() < 1e-12);
    assert!((r.p - p).abs() < 1e-6, "{} vs {p}", r.p);
    assert!((r.p - 0.3466).abs() < 1e-4);
}

#[test]
fn identical_samples_give_p_one() {
    let a = [3.0, 9.0, 14.0, 2.0];
    let r = welch_t_test(&sample("a", &a), &sample("b", &a)).unwrap();
    assert_eq!(r.t, 0.0);
    assert!((r.p - 1.0).abs() < 1e-12);
}

#[test]
fn degenerate_samples_rejected() {
    assert!(matches!(
        welch_t_test(&sample("a", &[1.0]), &sample("b", &[1.0, 2.0])),
        Err(Error::DegenerateSample(_))
    ));
    assert!(matches!(
        welch_t_test(&sample("a", &[4.0, 4.0]), &sample("b", &[7.0, 7.0, 7.0])),
        Err(Error::DegenerateSample(_))
    ));
}

#[test]
fn comparison_reports_means() {
    let c = compare(&sample("first", &[1.0, 2.0, 3.0]), &sample("last", &[10.0, 12.0, 14.0])).unwrap();
    assert_eq!(c.pair, ["first".to_string(), "last".to_string()]);
    assert_eq!((c.mean_a, c.mean_b), (2.0, 12.0));
    assert!(c.t < 0.0 && c.p < 0.05);
}

#[test]
fn summary_examples() {
    let s = survival_summary(&[5.0]).unwrap();
    assert_eq!((s.mean, s.median, s.sd), (5.0, 5.0, 0.0));
    assert!(s.outliers.is_empty());

    let hundred: Vec<f64> = (1..=100).map(f64::from).collect();
    let s = survival_summary(&hundred).unwrap();
    assert!((s.q1 - 25.75).abs() < 1e-12);
    assert!((s.q3 - 75.25).abs() < 1e-12);
    assert!((s.median - 50.5).abs() < 1e-12);
    assert_eq!((s.whisker_low, s.whisker_high), (1.0, 100.0));

    let mut more = hundred.clone();
    more.push(1000.0);
    let t = survival_summary(&more).unwrap();
    assert_eq!(t.outliers.len(), s.outliers.len() + 1);
    assert_eq!(t.outliers, vec![1000.0]);

    assert!(matches!(survival_summary(&[]), Err(Error::EmptySample)));
}

fn combo(s: &str) -> DrugCombination {
    s.parse().unwrap()
}

fn course(id: &str, months: &[&str]) -> PatientCourse {
    PatientCourse { id: id.into(), months: months.iter().map(|m| combo(m)).collect() }
}

const A: &str = "carboplatin+paclitaxel";
const B: &str = "gemcitabine";
const C: &str = "topotecan";

fn fixture_courses() -> Vec<PatientCourse> {
    vec![
        course("1", &[A, A, A, A, "NONE"]),
        course("2", &[B, B, "NONE", A]),
        course("3", &[A, C, C, C, C, C, C]),
        course("4", &["NONE", "NONE"]),
    ]
}

#[test]
fn heatmap_fixture_hand_values() {
    let m = frequency_timing_matrix(&fixture_courses(), 3);
    assert_eq!(m.interval_starts, vec![0, 3, 6]);
    let names: Vec<String> = m.rows.iter().map(|r| r.combination.to_string()).collect();
    assert_eq!(names, vec![A, C, B]);
    assert_eq!(m.rows[0].counts, vec![4, 2, 0]);
    assert_eq!(m.rows[1].counts, vec![2, 3, 1]);
    assert_eq!(m.rows[2].counts, vec![2, 0, 0]);
    assert_eq!(m.total_count(), 14);

    let r2 = std::f64::consts::SQRT_2;
    let r14 = 14f64.sqrt();
    let expected = [
        [r2, 1.0 / r14, -1.0 / r2],
        [-1.0 / r2, 4.0 / r14, r2],
        [-1.0 / r2, -5.0 / r14, -1.0 / r2],
    ];
    for (row, exp) in m.rows.iter().zip(&expected) {
        for (k, e) in exp.iter().enumerate() {
            assert!((row.z[k] - e).abs() < 1e-12, "{} col {k}: {} vs {e}", row.combination, row.z[k]);
            assert!((row.z_clamped[k] - e.clamp(0.0, 3.0)).abs() < 1e-12);
        }
    }

    let mut csv = Vec::new();
    write_heatmap(&mut csv, &m).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "combination,interval_start_month,count,z,z_clamped");
    assert_eq!(text.lines().count(), 1 + 9);
}

#[test]
fn single_combination_and_flat_columns() {
    let m = frequency_timing_matrix(&[course("1", &[B, B, B, B])], 2);
    assert_eq!(m.rows.len(), 1);
    assert_eq!(m.rows[0].counts, vec![2, 2]);
    assert!(m.rows[0].z.iter().all(|z| *z == 0.0));

    let m = frequency_timing_matrix(&[course("1", &[A, A]), course("2", &[B, B])], 3);
    assert_eq!(m.rows.iter().map(|r| r.z[0]).collect::<Vec<_>>(), vec![0.0, 0.0]);
}

#[test]
fn line_table_fixture() {
    let shares = line_frequencies(&fixture_courses(), 6);
    let get = |k: usize, c: &str| {
        shares.iter().find(|s| s.line_index == k && s.combination == c).map(|s| s.percent)
    };
    assert!((get(1, A).unwrap() - 200.0 / 3.0).abs() < 1e-9);
    assert!((get(1, B).unwrap() - 100.0 / 3.0).abs() < 1e-9);
    assert_eq!(get(2, A), Some(50.0));
    assert_eq!(get(2, C), Some(50.0));
    assert!(shares.iter().all(|s| s.line_index <= 2));

    let mut csv = Vec::new();
    write_lines(&mut csv, &shares).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().next().unwrap(), "line_index,combination,percent");
}

#[test]
fn uniform_first_line_and_untreated_patients() {
    let courses = vec![course("1", &[A, B]), course("2", &[A]), course("3", &["NONE"])];
    let shares = line_frequencies(&courses, 6);
    let first: Vec<_> = shares.iter().filter(|s| s.line_index == 1).collect();
    assert_eq!(first.len(), 1);
    assert_eq!((first[0].combination.as_str(), first[0].percent), (A, 100.0));
    assert!(line_frequencies(&[course("x", &["NONE", "NONE"])], 6).is_empty());
}

fn arb_courses() -> impl Strategy<Value = Vec<PatientCourse>> {
    let month = prop::sample::select(vec!["NONE", A, B, C, "docetaxel"]);
    prop::collection::vec(prop::collection::vec(month, 1..40), 1..12).prop_map(|cs| {
        cs.into_iter()
            .enumerate()
            .map(|(i, ms)| course(&i.to_string(), &ms))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn welch_matches_oracle_and_is_antisymmetric(
        a in prop::collection::vec(0.0f64..100.0, 2..30),
        b in prop::collection::vec(0.0f64..100.0, 2..30),
        shift in -50.0f64..50.0,
    ) {
        let (sa, sb) = (sample("a", &a), sample("b", &b));
        let ab = welch_t_test(&sa, &sb).unwrap();
        let ba = welch_t_test(&sb, &sa).unwrap();
        prop_assert_eq!(ab.t, -ba.t);
        prop_assert_eq!(ab.p, ba.p);
        let (t, df, p) = oracle_welch(&a, &b);
        prop_assert!((ab.t - t).abs() < 1e-9 * t.abs().max(1.0));
        prop_assert!((ab.df - df).abs() < 1e-9 * df);
        prop_assert!((ab.p - p).abs() < 1e-6, "{} vs {}", ab.p, p);
        let shifted = |v: &[f64]| v.iter().map(|x| x + shift).collect::<Vec<_>>();
        let s = welch_t_test(&sample("a", &shifted(&a)), &sample("b", &shifted(&b))).unwrap();
        prop_assert!((s.t - ab.t).abs() < 1e-9 * ab.t.abs().max(1.0));
        prop_assert!((s.p - ab.p).abs() < 1e-9);
    }

    #[test]
    fn summary_ignores_order(mut v in prop::collection::vec(0.0f64..200.0, 1..60), seed in any::<u64>()) {
        let before = survival_summary(&v).unwrap();
        let n = v.len();
        v.rotate_left((seed % n as u64) as usize);
        v.reverse();
        prop_assert_eq!(survival_summary(&v).unwrap(), before.clone());
        prop_assert!(before.q1 <= before.median && before.median <= before.q3);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= before.whisker_low && before.whisker_high <= hi);
        prop_assert!(before.outliers.iter().all(|o| *o < before.whisker_low || *o > before.whisker_high));
    }

    #[test]
    fn heatmap_conserves_counts_and_bounds_scores(courses in arb_courses(), width in 1u32..6) {
        let m = frequency_timing_matrix(&courses, width);
        let treated: u64 = courses
            .iter()
            .map(|c| c.months.iter().filter(|x| !x.is_no_treatment()).count() as u64)
            .sum();
        prop_assert_eq!(m.total_count(), treated);
        for r in &m.rows {
            prop_assert!(!r.combination.is_no_treatment());
            prop_assert!(r.z_clamped.iter().all(|z| (0.0..=3.0).contains(z)));
        }
        for w in m.rows.windows(2) {
            prop_assert!(w[0].total() >= w[1].total());
        }
    }

    #[test]
    fn each_line_sums_to_one_hundred(courses in arb_courses()) {
        let shares = line_frequencies(&courses, 6);
        for k in 1..=6 {
            let in_line: Vec<_> = shares.iter().filter(|s| s.line_index == k).collect();
            let reached = courses.iter().filter(|c| c.lines().len() >= k).count();
            if reached == 0 {
                prop_assert!(in_line.is_empty());
            } else {
                let total: f64 = in_line.iter().map(|s| s.percent).sum();
                prop_assert!((total - 100.0).abs() < 1e-6);
            }
        }
    }
}
