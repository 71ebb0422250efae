use std::fs::{self, File};
use std::io::BufWriter;

use wbctl_core::sim::{run, summarize, write_trace_csv_columns};
use wbctl_core::Scenario;

use crate::failure::{io_failure, Failure};
use crate::RunArgs;

pub fn execute(mut scenario: Scenario, args: &RunArgs) -> Result<(), Failure> {
    for o in &args.overrides {
        scenario = scenario.apply_override(o)?;
    }
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    log::info!("running `{}` for {} s", scenario.name, scenario.duration);
    let trace = run(&scenario)?;
    let summary = summarize(&scenario, &trace)?;

    fs::create_dir_all(&args.out).map_err(|e| io_failure(&args.out, e))?;
    let trace_path = args.out.join("trace.csv");
    let file = File::create(&trace_path).map_err(|e| io_failure(&trace_path, e))?;
    write_trace_csv_columns(&trace, &args.columns, BufWriter::new(file))?;
    let summary_path = args.out.join("summary.json");
    let file = File::create(&summary_path).map_err(|e| io_failure(&summary_path, e))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &summary)
        .map_err(|e| io_failure(&summary_path, e))?;

    println!(
        "{}: {} samples, buttons {:?} -> {}, {}",
        scenario.name,
        trace.records.len(),
        summary.button_sequence,
        trace_path.display(),
        summary_path.display()
    );
    match &trace.truncated {
        Some(reason) => Err(Failure::Numerical(format!(
            "simulation stopped at t = {:.3} s: {reason}",
            trace.events.last().map_or(0.0, |e| e.t)
        ))),
        None => Ok(()),
    }
}
