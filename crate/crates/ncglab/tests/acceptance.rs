//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured values once its assertions hold. Run with
//! `cargo test -p ncglab --test acceptance -- --nocapture` to see them.

use std::time::Instant;

use ncglab::dixmier::{self, default_schedule};
use ncglab::forms;
use ncglab::kcycle::{fractional_commutator_ratio, power_identity_residual, regularity_profile};
use ncglab::models::{
    build_circle, build_counterexample, circle_expected_trace, expected_form_defect, probes,
    CircleSpec, CounterexampleSpec, SignMatch,
};
use ncglab::operator::{c64, commutator, multiply, Operator};
use ncglab::rng::Rng64;
use ncglab::spectral::check_weyl_holder;
use num_complex::Complex64;

fn re(x: f64) -> Complex64 {
    c64(x, 0.0)
}

fn spec(lambda: f64, mu: f64, d: f64, n: usize) -> CounterexampleSpec {
    CounterexampleSpec { lambda, mu, d, n }
}

/// Criterion 1: baseline estimators on the counting-spectrum inverse at n = 8192:
/// increment lands on 1.000 +- 1e-3, ratio within 9% (its log-scale bias),
/// in under a second on the diagonal path.
#[test]
fn criterion_01_dixmier_baseline() {
    let started = Instant::now();
    let n = 8192;
    let b_inv =
        Operator::diagonal_real(&(1..=n).map(|k| 1.0 / k as f64).collect::<Vec<_>>());
    let schedule = default_schedule(n);
    let est = dixmier::dixmier_positive(&b_inv, &schedule).unwrap();
    let increment = est.value_re();
    let ratio = est.table.last().unwrap().ratio.re;
    let elapsed = started.elapsed();
    assert!((increment - 1.0).abs() <= 1e-3, "increment {increment}");
    assert!((ratio - 1.0).abs() <= 0.09, "ratio {ratio}");
    assert!(!est.omega_dependent);
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 01 PASS - dixmier baseline: increment {increment:.6}, ratio {ratio:.4}, {elapsed:?}"
    );
}

/// Criterion 2: closed forms of the generated elements at n = 64 on the dense path,
/// all residuals at most 1e-12, in under a second.
#[test]
fn criterion_02_closed_form_exactness() {
    let started = Instant::now();
    let model = build_counterexample(&spec(1.0, 2.0, 1.0, 64)).unwrap();
    let a = model.a.to_dense();
    let a_star = model.a_star.to_dense();
    let d_op = model.kcycle.dirac().to_dense();
    let mut worst: f64 = 0.0;
    // x_ij^k closed forms against dense brute-force products
    for i in 1..=2 {
        for j in 1..=2 {
            for k in 0..=3 {
                let closed = model.element(i, j, k).unwrap().to_dense();
                let brute = model.element_bruteforce(i, j, k).unwrap().to_dense();
                worst = worst.max(closed.max_abs_diff(&brute));
            }
        }
    }
    // a^2 = 0 exactly
    let a2 = multiply(&a, &a).unwrap();
    worst = worst.max(a2.max_abs_entry());
    // [D, x_ij^k]: one of the two sign candidates matches exactly
    for i in 1..=2 {
        for j in 1..=2 {
            for k in 0..=3 {
                let check = model.generator_commutator_residual(i, j, k).unwrap();
                let best = check.residual_plus.min(check.residual_minus);
                worst = worst.max(best);
                assert!(check.matched != SignMatch::Neither, "x_{i}{j}^{k}");
            }
        }
    }
    // double commutator closed form, dense route
    let da = commutator(&d_op, &a).unwrap();
    let da_star = commutator(&d_op, &a_star).unwrap();
    let double = commutator(&da, &da_star).unwrap();
    let expect = ncglab::operator::kron(
        &Operator::diagonal_real(&[1.0, -1.0]),
        &Operator::identity(64),
    )
    .to_dense()
    .scale(re(-1.0));
    worst = worst.max(double.max_abs_diff(&expect));
    let elapsed = started.elapsed();
    assert!(worst <= 1e-12, "worst residual {worst:.3e}");
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("ACCEPTANCE 02 PASS - closed forms exact: worst residual {worst:.2e}, {elapsed:?}");
}

/// Criterion 3: hypertrace behavior on the counterexample: the commutator-vanishing
/// estimate is below 1e-3 at n = 4096 and at least halves when n
/// quadruples; 20 seed-fixed bounded probes stay below defect 0.02 with a
/// decreasing trend across the schedule.
#[test]
fn criterion_03_hypertrace_and_commutator_vanishing() {
    let model = build_counterexample(&spec(1.0, 2.0, 1.0, 4096)).unwrap();
    let schedule = model.schedule();
    let est = model
        .kcycle
        .commutator_vanishing(&model.a, &schedule)
        .unwrap();
    let small_n = est.value_re();
    assert!(small_n.abs() <= 1e-3, "estimate {small_n}");
    assert!(small_n > 0.0);

    let model4 = build_counterexample(&spec(1.0, 2.0, 1.0, 16384)).unwrap();
    let est4 = model4
        .kcycle
        .commutator_vanishing(&model4.a, &model4.schedule())
        .unwrap();
    let large_n = est4.value_re();
    assert!(
        large_n <= small_n / 2.0,
        "no 2x decay: {small_n} -> {large_n}"
    );

    // 20 seed-fixed random contractions
    let dim = model.kcycle.dim();
    let mut max_defect: f64 = 0.0;
    for idx in 0..20u64 {
        let mut rng = Rng64::new(1000 + idx);
        let t = if idx % 2 == 0 {
            probes::block_contraction(dim / 2, &mut rng)
        } else {
            probes::circulant_unitary(dim, &mut rng)
        };
        let defect = model
            .kcycle
            .hypertrace_defect(&model.a, &t, &schedule)
            .unwrap();
        let value = defect.value.norm();
        let first = defect.table.first().unwrap().increment.norm();
        let last = defect.table.last().unwrap().increment.norm();
        assert!(value <= 0.02, "probe {idx}: defect {value}");
        assert!(
            last <= 0.6 * first + 1e-9,
            "probe {idx}: no decreasing trend ({first} -> {last})"
        );
        max_defect = max_defect.max(value);
    }
    println!(
        "ACCEPTANCE 03 PASS - commutator vanishing {small_n:.2e} -> {large_n:.2e}, max probe defect {max_defect:.2e}"
    );
}

/// Criterion 4: trace-defect survey at L = 2, n = 8192: max defect 0.5 +- 5e-3 for
/// weights (1, 2), witnessed by the D-commutator pair; at most 1e-3 for
/// (1, -1) and (1, 1); at least 10x separation; under 30 s.
#[test]
fn criterion_04_trace_defect_survey() {
    let started = Instant::now();
    let model = build_counterexample(&spec(1.0, 2.0, 1.0, 8192)).unwrap();
    let schedule = model.schedule();
    let report = forms::trace_defect_survey(&model.kcycle, 2, &schedule).unwrap();
    assert!(
        (report.max_defect - 0.5).abs() <= 5e-3,
        "max defect {}",
        report.max_defect
    );
    // the witness is the D-commutator pair; [D,a]* = -[D,a*], so the two
    // spellings denote the same operators up to sign and either may win
    // the (deterministic) scan
    let witness = report.worst_pair.clone();
    let acceptable = [
        ("[D,a]".to_string(), "[D,a]*".to_string()),
        ("[D,a]".to_string(), "[D,a*]".to_string()),
    ];
    assert!(
        acceptable.contains(&witness),
        "unexpected witness {witness:?}"
    );
    let expected = expected_form_defect(&spec(1.0, 2.0, 1.0, 8192)).abs();
    assert!((report.max_defect - expected).abs() <= 5e-3);

    let mut clean_max: f64 = 0.0;
    for (lambda, mu) in [(1.0, -1.0), (1.0, 1.0)] {
        let m = build_counterexample(&spec(lambda, mu, 1.0, 8192)).unwrap();
        let r = forms::trace_defect_survey(&m.kcycle, 2, &m.schedule()).unwrap();
        assert!(
            r.max_defect <= 1e-3,
            "({lambda},{mu}): max defect {}",
            r.max_defect
        );
        clean_max = clean_max.max(r.max_defect);
    }
    // the survey separates the failing model from the regular ones 10x over
    assert!(report.max_defect >= 10.0 * clean_max.max(1e-8));
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 04 PASS - survey: defect {:.4} via {:?}, regular models <= {clean_max:.2e}, {elapsed:?}",
        report.max_defect, witness
    );
}

/// Criterion 5: Hoelder: the trace-level inequality is an equality (within 1%) on
/// the power family, and the finite-N Weyl-Hoelder inequality holds on
/// 1000 random pairs of dimension <= 32 with slack 1e-10.
#[test]
fn criterion_05_holder() {
    let n = 8192;
    for (p, q) in [(2.0, 2.0), (1.5, 3.0)] {
        let a = Operator::diagonal_real(
            &(1..=n).map(|k| (k as f64).powf(-1.0 / p)).collect::<Vec<_>>(),
        );
        let b = Operator::diagonal_real(
            &(1..=n).map(|k| (k as f64).powf(-1.0 / q)).collect::<Vec<_>>(),
        );
        let rep = dixmier::holder_check(&a, &b, p, q, &default_schedule(n)).unwrap();
        assert!(rep.holds);
        assert!(
            (rep.lhs - rep.rhs).abs() <= 0.01 * rep.rhs.max(1e-9),
            "p={p}: lhs {} rhs {}",
            rep.lhs,
            rep.rhs
        );
    }

    let mut rng = Rng64::new(505);
    let mut violations = 0usize;
    for _ in 0..1000 {
        let dim = 2 + rng.next_usize(31);
        let rand_op = |rng: &mut Rng64| {
            let entries: Vec<Complex64> =
                (0..dim * dim).map(|_| rng.next_complex_box()).collect();
            Operator::from_entries(dim, entries).unwrap()
        };
        let a = rand_op(&mut rng);
        let b = rand_op(&mut rng);
        let report = check_weyl_holder(&a, &b, 3.0, 1.5).unwrap();
        if !report.holds {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
    println!("ACCEPTANCE 05 PASS - Hoelder: equality family within 1%, 0/1000 Weyl violations");
}

/// Criterion 6: resolvent power identity: relative residual <= 1e-9 over 200 fuzzed
/// (H, a, k <= 6, dim <= 24) instances with spectra in [1, 2].
#[test]
fn criterion_06_power_identity() {
    let mut rng = Rng64::new(606);
    let mut worst: f64 = 0.0;
    for trial in 0..200 {
        let dim = 2 + rng.next_usize(23);
        let mut entries = vec![re(0.0); dim * dim];
        for i in 0..dim {
            for j in (i + 1)..dim {
                let z = rng.next_complex_box();
                entries[i * dim + j] = z;
                entries[j * dim + i] = z.conj();
            }
            entries[i * dim + i] = re(rng.next_range(-1.0, 1.0));
        }
        let h0 = Operator::from_entries(dim, entries).unwrap();
        // spectrum into [1, 2]
        let norm = h0.operator_norm().max(1e-12);
        let h = h0
            .scale(re(0.5 / norm))
            .add_scaled(&Operator::identity(dim), re(1.5));
        let a_entries: Vec<Complex64> =
            (0..dim * dim).map(|_| rng.next_complex_box()).collect();
        let a = Operator::from_entries(dim, a_entries).unwrap();
        let k = 1 + (trial % 6) as u32;
        let residual = power_identity_residual(&h, &a, k).unwrap();
        worst = worst.max(residual);
    }
    assert!(worst <= 1e-9, "worst residual {worst:.3e}");
    println!("ACCEPTANCE 06 PASS - power identity: worst residual {worst:.2e} over 200 instances");
}

/// Criterion 7: fractional commutator ratio at r = 1/2 stays within a factor 2 of
/// its smallest-truncation value across sizes 2^8 .. 2^14.
#[test]
fn criterion_07_fractional_commutator_ratio() {
    let family: Vec<_> = (8..=14)
        .map(|e| {
            let m = build_counterexample(&spec(1.0, 2.0, 1.0, 1usize << e)).unwrap();
            (m.kcycle, m.a)
        })
        .collect();
    let report = fractional_commutator_ratio(&family, 0.5).unwrap();
    assert!(!report.vacuous);
    assert!(report.bounded, "rows {:?}", report.rows);
    let first = report.rows.first().unwrap().ratio;
    let max = report
        .rows
        .iter()
        .map(|r| r.ratio)
        .fold(0.0f64, f64::max);
    assert!(max <= 2.0 * first);
    println!(
        "ACCEPTANCE 07 PASS - fractional ratio r=1/2: first {first:.4}, max {max:.4} across 2^8..2^14"
    );
}

/// Criterion 8: regularity diagnostic: ||delta^2(a)|| grows >= 4x across the sweep
/// when |lambda| != |mu| and vanishes when |lambda| = |mu|; exactly the
/// former is flagged as failing order-2 smoothness.
#[test]
fn criterion_08_regularity_diagnostic() {
    let dims: Vec<usize> = (8..=14).map(|e| 1usize << e).collect();
    let family: Vec<_> = dims
        .iter()
        .map(|&n| {
            let m = build_counterexample(&spec(1.0, 2.0, 1.0, n)).unwrap();
            (m.kcycle, m.a)
        })
        .collect();
    let growing = regularity_profile(&family, 2).unwrap();
    assert!(growing.non_order_two());
    let first = growing.rows.first().unwrap().delta_norms[1];
    let last = growing.rows.last().unwrap().delta_norms[1];
    assert!(last >= 4.0 * first, "{first} -> {last}");

    let family: Vec<_> = dims
        .iter()
        .map(|&n| {
            let m = build_counterexample(&spec(1.0, -1.0, 1.0, n)).unwrap();
            (m.kcycle, m.a)
        })
        .collect();
    let flat = regularity_profile(&family, 2).unwrap();
    assert!(!flat.non_order_two());
    for row in &flat.rows {
        assert!(row.delta_norms[1] <= 1e-12);
    }
    println!(
        "ACCEPTANCE 08 PASS - regularity: delta^2 grows {first} -> {last} for (1,2), vanishes for (1,-1)"
    );
}

/// Criterion 9: circle instance: the trace estimate of the multiplication operator
/// recovers 2 * f^(0) within 2% at M = 8192 for three trigonometric
/// polynomials, and hypertrace defects of bounded probes stay below 0.01.
#[test]
fn criterion_09_circle_trace() {
    let m = 8192;
    let cases: Vec<(&str, Vec<Complex64>)> = vec![
        ("1", vec![re(1.0)]),
        ("1+cos", vec![re(0.5), re(1.0), re(0.5)]),
        (
            "2+sin2",
            vec![c64(0.0, 0.5), re(0.0), re(2.0), re(0.0), c64(0.0, -0.5)],
        ),
    ];
    let mut values = Vec::new();
    for (name, fourier) in &cases {
        let spec = CircleSpec::new(fourier.clone(), m);
        let model = build_circle(&spec).unwrap();
        let schedule = model.schedule();
        let est = model.kcycle.phi(&model.m_f, &schedule).unwrap();
        let expected = circle_expected_trace(&spec);
        assert!(
            (est.value.re - expected).abs() <= 0.02 * expected.abs(),
            "{name}: {} vs {expected}",
            est.value.re
        );
        assert!(est.value.im.abs() <= 1e-9);
        values.push((name.to_string(), est.value.re, expected));
    }
    // hypertrace probes on the middle case
    let spec = CircleSpec::new(cases[1].1.clone(), m);
    let model = build_circle(&spec).unwrap();
    let schedule = model.schedule();
    let dim = model.kcycle.dim();
    let mut max_defect: f64 = 0.0;
    for idx in 0..8u64 {
        let mut rng = Rng64::new(909 + idx);
        let t = if idx % 2 == 0 {
            probes::banded_contraction(dim, 8, &mut rng)
        } else {
            probes::circulant_unitary(dim, &mut rng)
        };
        let defect = model
            .kcycle
            .hypertrace_defect(&model.m_f, &t, &schedule)
            .unwrap();
        max_defect = max_defect.max(defect.value.norm());
    }
    assert!(max_defect <= 0.01, "max defect {max_defect}");
    println!(
        "ACCEPTANCE 09 PASS - circle: {:?}, max hypertrace defect {max_defect:.2e}",
        values
    );
}

/// Criterion 10: flow derivative: the finite difference of the evolution at
/// t = 1e-4 matches i * delta(a) within 1e-3 relative, on models of
/// dimension <= 64.
#[test]
fn criterion_10_flow_derivative() {
    let t = 1e-4;
    let mut worst: f64 = 0.0;
    // two-block model at dimension 32
    let model = build_counterexample(&spec(1.0, 2.0, 1.0, 16)).unwrap();
    let fd = model
        .kcycle
        .evolve(&model.a, t)
        .unwrap()
        .add_scaled(&model.a, re(-1.0))
        .scale(re(1.0 / t));
    let exact = model.kcycle.delta(&model.a).unwrap().scale(c64(0.0, 1.0));
    worst = worst.max(fd.max_abs_diff(&exact) / exact.max_abs_entry());
    // circle model at dimension 64
    let cspec = CircleSpec::new(vec![re(0.5), re(1.0), re(0.5)], 32);
    let circle = build_circle(&cspec).unwrap();
    let fd = circle
        .kcycle
        .evolve(&circle.m_f, t)
        .unwrap()
        .add_scaled(&circle.m_f, re(-1.0))
        .scale(re(1.0 / t));
    let exact = circle
        .kcycle
        .delta(&circle.m_f)
        .unwrap()
        .scale(c64(0.0, 1.0));
    worst = worst.max(fd.max_abs_diff(&exact) / exact.max_abs_entry());
    assert!(worst <= 1e-3, "relative error {worst:.3e}");
    println!("ACCEPTANCE 10 PASS - flow derivative: worst relative error {worst:.2e}");
}
