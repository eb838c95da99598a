//! Run the full identity suite on a catalog fixture, write JSON and CSV
//! reports and read the JSON back.
//!
//!     cargo run --example verify_suite -- kslant:3 40

use slantlab::theorem_checks::{read_report, run_suite, write_csv, write_json, SuiteConfig, SuiteTarget};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let id = args.next().unwrap_or_else(|| "pointwise:2".into());
    let points = args.next().map(|p| p.parse()).transpose()?.unwrap_or(25);

    let mut config = SuiteConfig::new(SuiteTarget::catalog(&id, 2)?);
    config.points = points;
    let report = run_suite(&config)?;
    print!("{}", report.render_summary());
    for a in &report.evidence.angles {
        println!("{}: mean angle {:.10}, stddev {:.2e}", a.distribution, a.mean, a.stddev);
    }

    let dir = std::env::temp_dir();
    let json = dir.join("slantlab_report.json");
    write_json(&report, &mut std::fs::File::create(&json)?)?;
    write_csv(&report, &mut std::fs::File::create(dir.join("slantlab_report.csv"))?)?;
    assert_eq!(read_report(&json)?, report);
    println!("reports written to {}", dir.display());
    std::process::exit(report.exit_code());
}
