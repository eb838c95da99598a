//! Deliberately corrupt a fixture and watch the targeted check fail.
//!
//!     cargo run --example mutations

use slantlab::theorem_checks::{run_suite, Mutation, Status, SuiteConfig, SuiteTarget};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for m in Mutation::ALL {
        let target = match m {
            Mutation::PerturbSecondFundamentalForm => "geodesic",
            _ => "pointwise:2",
        };
        let mut config = SuiteConfig::new(SuiteTarget::catalog(target, 2)?);
        config.points = 10;
        config.mutation = Some(m);
        let report = run_suite(&config)?;
        let hits = report.check(m.targeted_check());
        let failed = hits.iter().filter(|r| r.status == Status::Fail).count();
        println!(
            "{:<34} {:<10} {:<34} failed at {failed}/{} points ({} failures overall)",
            m.name(),
            target,
            m.targeted_check(),
            hits.len(),
            report.summary.totals.fail
        );
    }
    Ok(())
}
