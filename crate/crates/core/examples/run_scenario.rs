//! Running a builtin scenario from its default config and inspecting the
//! report without touching the filesystem.

use hlab::runner::{builtin_scenarios, default_config, run};

fn main() -> hlab::Result<()> {
    for s in builtin_scenarios() {
        println!("{:<18} {}", s.name, s.summary);
    }
    let mut cfg = default_config("avakumovic")?;
    cfg.space.sizes = vec![32, 64];
    let report = run(&cfg)?;
    for c in &report.checks {
        println!(
            "{} {} = {:.3e} (threshold {:.1e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    print!("{}", report.csv_string()?);
    Ok(())
}
