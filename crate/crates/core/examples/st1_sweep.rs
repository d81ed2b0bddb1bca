//! Fits the concentration rate of the truncated family above the threshold.

use fractrunc::lab::verify_st1;
use fractrunc::{ExperimentPlan, Params};

fn main() -> fractrunc::Result<()> {
    let params = Params::new(1, 0.3, 2.0, 0.0)?;
    let report = verify_st1(&ExperimentPlan::standard(params, vec![1.6, 2.0]))?;
    for line in report.summary_lines() {
        println!("{line}");
    }
    println!("verdict: {}", report.verdict.as_str());
    Ok(())
}
