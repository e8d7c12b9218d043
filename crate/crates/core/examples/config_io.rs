//! Parse a run configuration, march it and round-trip the outputs.

use wns::config::RawConfig;
use wns::io::{read_series_csv, read_snapshot, write_series_csv, write_snapshot};
use wns::solver::march;

const CONFIG: &str = "
# shear layer on the small grid
[grid]
preset = small
alpha = 1
[solver]
nu = 1
p = 16
t_end = 0.2
[initial]
kind = shear
width = 0.5
amplitude = 0.3
";

fn main() -> wns::Result<()> {
    let run = RawConfig::parse(CONFIG)?.resolve()?;
    print!("{}", run.echo());
    let u0 = run.initial.build(&run.solver.grid)?;
    let out = march(&u0, &run.solver)?;

    let dir = std::env::temp_dir().join("wns-config-io");
    std::fs::create_dir_all(&dir).map_err(|e| wns::WnsError::Io { path: dir.clone(), source: e })?;
    let csv = dir.join("norms.csv");
    write_series_csv(&csv, &out.series)?;
    let snap = dir.join("final.wnsf");
    write_snapshot(&snap, &out.final_state)?;

    let series = read_series_csv(&csv)?;
    let state = read_snapshot(&snap)?;
    println!("\n{} samples read back, final ||u||_p = {:.6e}", series.len(), series.lp_norms[series.len() - 1]);
    println!("snapshot at t = {} with div norm {:.2e}, in {}", state.t, state.div_norm, dir.display());
    Ok(())
}
