use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use balkit::gramian::AdiOptions;
use balkit::iofmt;
use balkit::metrics;
use balkit::quadrature::{self, Flavor, QuadratureRule};
use balkit::reduce::{self, FactorMode, Order};
use balkit::system::{heat_1d, random_stable, Difference};
use balkit::{Error, TransferFunction};
use clap::{Args, Subcommand};

use crate::args::{list, Grid};

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(subcommand)]
    suite: Suite,
}

#[derive(Subcommand, Debug)]
enum Suite {
    /// Dense against low-rank SPA on 1D heat models of growing size.
    HeatScaling(HeatArgs),
    /// Deviation of quadrature ROMs from intrusive ones as nodes are added.
    QuadConvergence(QuadArgs),
    /// Relative H∞ errors of BT and SPA on user-supplied benchmark matrices.
    PaperTables(TableArgs),
}

#[derive(Args, Debug)]
struct HeatArgs {
    // spelled out so clap reads one comma-separated value instead of repeats
    #[arg(long, value_parser = list::<usize>, default_value = "100,400,1600,6400")]
    sizes: std::vec::Vec<usize>,
    #[arg(long, default_value_t = 6)]
    order: usize,
    /// Largest n for which the dense solver is run.
    #[arg(long, default_value_t = 1600)]
    dense_max: usize,
    #[arg(long, default_value_t = 1e-10)]
    adi_tol: f64,
    #[arg(long, default_value = "1e-3:1e3:400")]
    grid: Grid,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct QuadArgs {
    #[arg(long, default_value_t = 30)]
    n: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    order: usize,
    /// Nodes per side.
    #[arg(long, value_parser = list::<usize>, default_value = "20,40,80,160")]
    np: std::vec::Vec<usize>,
    #[arg(long, default_value_t = 1e-3)]
    lo: f64,
    #[arg(long, default_value_t = 1e3)]
    hi: f64,
    #[arg(long, default_value = "1e-3:1e3:400")]
    grid: Grid,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TableArgs {
    /// Manifest of the benchmark matrices.
    #[arg(long)]
    system: Option<PathBuf>,
    #[arg(long, value_parser = list::<usize>, default_value = "18")]
    orders: std::vec::Vec<usize>,
    #[arg(long, default_value = "1e-2:1e4:2000")]
    grid: Grid,
    #[arg(long)]
    lowrank: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: BenchArgs) -> Result<()> {
    match args.suite {
        Suite::HeatScaling(a) => heat_scaling(a),
        Suite::QuadConvergence(a) => quad_convergence(a),
        Suite::PaperTables(a) => tables(a),
    }
}

fn hinf(tf: &dyn TransferFunction, g: Grid) -> Result<f64> {
    Ok(metrics::hinf_grid(tf, g.lo, g.hi, g.count, true)?)
}

fn deviation(a: &dyn TransferFunction, b: &dyn TransferFunction, g: Grid) -> Result<f64> {
    hinf(&Difference::new(a, b)?, g)
}

fn emit(header: &[&str], rows: &[Vec<f64>], out: Option<&PathBuf>) -> Result<()> {
    println!("{}", header.iter().map(|h| format!("{h:>14}")).collect::<String>());
    for row in rows {
        let line: String = row
            .iter()
            .map(|&x| {
                if x.is_nan() {
                    format!("{:>14}", "-")
                } else if x.fract() == 0.0 && x.abs() < 1e9 {
                    format!("{x:>14}")
                } else {
                    format!("{x:>14.4e}")
                }
            })
            .collect();
        println!("{line}");
    }
    if let Some(path) = out {
        iofmt::write_table(path, header, rows)?;
    }
    Ok(())
}

fn heat_scaling(a: HeatArgs) -> Result<()> {
    let opts = AdiOptions::with_tol(a.adi_tol);
    let order = Order::Fixed(a.order);
    let mut rows = Vec::new();
    for &n in &a.sizes {
        let sys = heat_1d(n)?;
        let t = Instant::now();
        let f = reduce::gramian_factors(&sys, &FactorMode::LowRank(opts))?;
        let low = reduce::spa_from_factors(&sys, &f, order)?;
        let t_low = t.elapsed().as_secs_f64();
        let (t_dense, dev) = if n <= a.dense_max {
            let t = Instant::now();
            let dense = reduce::spa(&sys, order, &FactorMode::Dense)?;
            let t_dense = t.elapsed().as_secs_f64();
            (t_dense, deviation(&dense, &low, a.grid)? / hinf(&sys, a.grid)?)
        } else {
            (f64::NAN, f64::NAN)
        };
        rows.push(vec![
            n as f64,
            t_dense,
            t_low,
            f.u.ncols() as f64,
            f.l.ncols() as f64,
            dev,
        ]);
    }
    emit(&["n", "dense_s", "lowrank_s", "rank_p", "rank_q", "rel_deviation"], &rows, a.out.as_ref())
}

fn quad_convergence(a: QuadArgs) -> Result<()> {
    let sys = random_stable(a.n, 1, 1, a.seed)?;
    let order = Order::Fixed(a.order);
    let f = reduce::gramian_factors(&sys, &FactorMode::Dense)?;
    let bt = reduce::bt_from_factors(&sys, &f, order)?;
    let spa = reduce::spa_from_factors(&sys, &f, order)?;
    let scale = hinf(&sys, a.grid)?;
    let mut rows = Vec::new();
    for &np in &a.np {
        let rule = QuadratureRule::interleaved(&quadrature::log_nodes(a.lo, a.hi, 2 * np)?, true)?;
        let qb = quadrature::reduce_data(&quadrature::data_from_system(&sys, &rule, Flavor::Bt)?, order)?;
        let qs = quadrature::reduce_data(&quadrature::data_from_system(&sys, &rule, Flavor::Spa)?, order)?;
        rows.push(vec![
            np as f64,
            deviation(&qb, &bt, a.grid)? / scale,
            deviation(&qs, &spa, a.grid)? / scale,
        ]);
    }
    emit(&["np", "quadbt_dev", "quadspa_dev"], &rows, a.out.as_ref())
}

fn tables(a: TableArgs) -> Result<()> {
    let path = a.system.ok_or_else(|| {
        Error::MissingData(
            "benchmark matrices are not bundled; fetch them (e.g. the LA building model from the SLICOT \
             or MOR-Wiki collections), write a manifest and pass --system"
                .into(),
        )
    })?;
    let sys = iofmt::load_system(&path)?;
    let mode = if a.lowrank {
        FactorMode::LowRank(AdiOptions::default())
    } else {
        FactorMode::Dense
    };
    let f = reduce::gramian_factors(&sys, &mode)?;
    let norm = hinf(&sys, a.grid)?;
    let mut rows = Vec::new();
    for &r in &a.orders {
        let bt = reduce::bt_from_factors(&sys, &f, Order::Fixed(r))?;
        let spa = reduce::spa_from_factors(&sys, &f, Order::Fixed(r))?;
        rows.push(vec![
            r as f64,
            deviation(&sys, &bt, a.grid)? / norm,
            deviation(&sys, &spa, a.grid)? / norm,
        ]);
    }
    emit(&["r", "bt_rel_hinf", "spa_rel_hinf"], &rows, a.out.as_ref())
}
