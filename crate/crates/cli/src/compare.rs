use std::path::PathBuf;

use anyhow::{Context, Result};
use balkit::iofmt::{self, AnyRom};
use balkit::metrics;
use balkit::system::Difference;
use balkit::{Error, TransferFunction};
use clap::Args;

use crate::args::{label, Grid};

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Full-order system manifest.
    #[arg(long)]
    system: PathBuf,
    /// ROM files to compare.
    #[arg(required = true, num_args = 1..)]
    roms: Vec<PathBuf>,
    /// Frequency grid `lo:hi:count`.
    #[arg(long, default_value = "1e-3:1e3:400")]
    grid: Grid,
    /// Output CSV: omega, FOM response, one error column per ROM.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: CompareArgs) -> Result<()> {
    let fom = iofmt::load_system(&args.system)?;
    let mut roms: Vec<(String, AnyRom)> = Vec::new();
    for path in &args.roms {
        let rom = iofmt::load_rom(path).with_context(|| format!("loading ROM {}", path.display()))?;
        if (rom.outputs(), rom.inputs()) != (fom.p(), fom.m()) {
            return Err(Error::Dimension(format!(
                "{} is {}x{} but the system is {}x{}",
                path.display(),
                rom.outputs(),
                rom.inputs(),
                fom.p(),
                fom.m()
            ))
            .into());
        }
        let mut name = label(path);
        if roms.iter().any(|(n, _)| *n == name) {
            name = format!("{name}_{}", roms.len());
        }
        roms.push((name, rom));
    }

    let grid = args.grid.nodes()?;
    let mut columns = vec![grid.clone(), metrics::freq_response(&fom, &grid)?];
    for (_, rom) in &roms {
        columns.push(metrics::freq_response(&Difference::new(&fom, rom)?, &grid)?);
    }
    let rows: Vec<Vec<f64>> = (0..grid.len())
        .map(|k| columns.iter().map(|c| c[k]).collect())
        .collect();
    let header: Vec<String> = ["omega".to_string(), "fom".to_string()]
        .into_iter()
        .chain(roms.iter().map(|(n, _)| format!("err_{n}")))
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    iofmt::write_table(&args.out, &header, &rows)?;

    let Grid { lo, hi, count } = args.grid;
    let norm = metrics::hinf_grid_at(&fom, lo, hi, count, true)?;
    println!("{:<20} {:<10} {:>4} {:>12} {:>12}", "model", "method", "r", "rel_hinf", "omega_peak");
    for (name, rom) in &roms {
        let err = metrics::hinf_grid_at(&Difference::new(&fom, rom)?, lo, hi, count, true)?;
        println!(
            "{:<20} {:<10} {:>4} {:>12.4e} {:>12.4e}",
            name,
            rom.method().as_str(),
            rom.order(),
            err.value / norm.value,
            err.omega
        );
    }
    Ok(())
}
