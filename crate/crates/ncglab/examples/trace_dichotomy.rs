//! The trace-property dichotomy of the two-block model, end to end:
//! build the model at a pair of weight choices, survey the commutation
//! defects of the trace functional, and compare against the closed form.
//!
//! Run with `cargo run --release --example trace_dichotomy`.

use ncglab::forms::trace_defect_survey;
use ncglab::models::{build_counterexample, expected_form_defect, CounterexampleSpec};

fn main() {
    let n = 4096;
    for (lambda, mu) in [(1.0, 2.0), (1.0, -1.0)] {
        let spec = CounterexampleSpec {
            lambda,
            mu,
            d: 1.0,
            n,
        };
        let model = build_counterexample(&spec).unwrap();
        let schedule = model.schedule();
        let survey = trace_defect_survey(&model.kcycle, 2, &schedule).unwrap();
        let expected = expected_form_defect(&spec).abs();
        println!(
            "weights ({lambda:+.0}, {mu:+.0}):  max defect {:.6}  (closed form {:.6})  -> trace property {}",
            survey.max_defect,
            expected,
            if survey.max_defect < 1e-3 { "holds" } else { "FAILS" },
        );
        if survey.max_defect >= 1e-3 {
            println!(
                "    witnessed by phi([{}, {}])",
                survey.worst_pair.0, survey.worst_pair.1
            );
        }
    }
}
