use std::path::PathBuf;

use clap::Args;
use wbctl_core::model::ChainConfig;
use wbctl_core::selftest::run_suite;

use crate::failure::Failure;

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Chain description TOML (default: the built-in 3+7 platform and arm).
    #[arg(long)]
    chain: Option<PathBuf>,
    /// Random states per check.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

pub fn execute(args: &SelftestArgs) -> Result<(), Failure> {
    let config = match &args.chain {
        Some(path) => ChainConfig::load(path)?,
        None => ChainConfig::default_arm(),
    };
    let results = run_suite(&config, args.samples, args.seed);
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("{tag} {}: {}", r.name, r.detail);
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    println!("{} of {} checks passed", results.len() - failed.len(), results.len());
    match failed.as_slice() {
        [] => Ok(()),
        ["chain is valid"] => Err(Failure::Input(format!("invalid chain: {}", results[0].detail))),
        names => Err(Failure::Numerical(format!("failed checks: {}", names.join(", ")))),
    }
}
