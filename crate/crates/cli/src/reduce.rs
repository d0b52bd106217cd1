use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use balkit::gramian::{AdiOptions, HankelData};
use balkit::iofmt;
use balkit::metrics;
use balkit::quadrature::{self, Flavor, QuadData, QuadratureRule};
use balkit::reduce::{self, FactorMode, Order};
use balkit::samples::{self, FeedthroughSource, SampleKind, SampleSet};
use balkit::{linalg, Error, ReducedModel};
use clap::{Args, ValueEnum};
use log::warn;
use serde_json::{json, Value};

use crate::args::{write_json, Grid};
use crate::usage;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Bt,
    Spa,
    SpaDirect,
    Quadbt,
    Quadspa,
}

impl MethodArg {
    fn is_quadrature(self) -> bool {
        matches!(self, MethodArg::Quadbt | MethodArg::Quadspa)
    }
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Reduced order.
    #[arg(long, required_unless_present = "tol", conflicts_with = "tol")]
    order: Option<usize>,
    /// Pick the smallest order whose tail bound is within this fraction of
    /// the total.
    #[arg(long)]
    tol: Option<f64>,
    /// System manifest (JSON naming the Matrix Market files).
    #[arg(long, required_unless_present = "samples", conflicts_with = "samples")]
    system: Option<PathBuf>,
    /// Transfer-function samples (CSV with a JSON sidecar).
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Derivative samples for nodes shared by both sides (quadspa only).
    #[arg(long, requires = "samples")]
    derivatives: Option<PathBuf>,
    /// One node range split alternately between the two sides.
    #[arg(long, conflicts_with_all = ["nodes_c", "nodes_o"])]
    nodes: Option<Grid>,
    /// Controllability nodes `lo:hi:count`.
    #[arg(long, requires = "nodes_o")]
    nodes_c: Option<Grid>,
    /// Observability nodes `lo:hi:count`.
    #[arg(long, requires = "nodes_c")]
    nodes_o: Option<Grid>,
    /// Low-rank ADI Gramian factors instead of dense solves.
    #[arg(long)]
    lowrank: bool,
    /// Relative residual target for ADI.
    #[arg(long, default_value_t = 1e-10, requires = "lowrank")]
    adi_tol: f64,
    /// Transform quadrature data to real arithmetic before reducing.
    #[arg(long)]
    realify: bool,
    /// Output ROM file.
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
}

const DEFAULT_NODES: Grid = Grid {
    lo: 1e-3,
    hi: 1e3,
    count: 160,
};

pub fn run(args: ReduceArgs) -> Result<()> {
    let order = match (args.order, args.tol) {
        (Some(r), _) => Order::Fixed(r),
        (None, Some(t)) => Order::Tolerance(t),
        (None, None) => unreachable!("clap enforces one of --order and --tol"),
    };
    if args.method.is_quadrature() {
        if args.lowrank {
            return Err(usage("--lowrank applies to the intrusive methods only"));
        }
    } else {
        if args.samples.is_some() {
            return Err(usage("the intrusive methods need a realization; pass --system"));
        }
        if args.realify || args.nodes.is_some() || args.nodes_c.is_some() {
            return Err(usage("--realify and node ranges apply to the quadrature methods only"));
        }
    }
    let report = if args.method.is_quadrature() {
        run_quadrature(&args, order)?
    } else {
        run_intrusive(&args, order)?
    };
    if let Some(path) = &args.report {
        write_json(path, &report)?;
    }
    Ok(())
}

fn run_intrusive(args: &ReduceArgs, order: Order) -> Result<Value> {
    let start = Instant::now();
    let path = args.system.as_ref().expect("checked by clap");
    let sys = iofmt::load_system(path)?;
    let t_load = start.elapsed().as_secs_f64();

    let mode = if args.lowrank {
        FactorMode::LowRank(AdiOptions::with_tol(args.adi_tol))
    } else {
        FactorMode::Dense
    };
    let t = Instant::now();
    let f = reduce::gramian_factors(&sys, &mode)?;
    let t_factor = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let sigma = HankelData::new(&f, sys.e())?.sigma;
    let rom = match args.method {
        MethodArg::Bt => reduce::bt_from_factors(&sys, &f, order)?,
        MethodArg::Spa => reduce::spa_from_factors(&sys, &f, order)?,
        MethodArg::SpaDirect => {
            let r = match order {
                Order::Fixed(r) => r,
                Order::Tolerance(tol) => reduce::order_from_tolerance(&sigma, tol)?,
            };
            reduce::spa_direct_from_factors(&sys, &f, r)?
        }
        _ => unreachable!(),
    };
    let t_reduce = t.elapsed().as_secs_f64();
    iofmt::save_rom(&args.out, &rom)?;

    let r = rom.order();
    Ok(json!({
        "method": rom.method.as_str(),
        "n": sys.n(),
        "inputs": sys.m(),
        "outputs": sys.p(),
        "r": r,
        "hankel_singular_values": sigma,
        "error_bound": if r < sigma.len() { metrics::bt_bound(&sigma, r)? } else { 0.0 },
        "gramians": {
            "exact": f.exact,
            "residual_p": f.residual_p,
            "residual_q": f.residual_q,
            "rank_p": f.u.ncols(),
            "rank_q": f.l.ncols(),
            "adi_iterations": f.iterations.map(|(p, q)| json!([p, q])),
        },
        "timings": {
            "load_s": t_load,
            "factor_s": t_factor,
            "reduce_s": t_reduce,
            "total_s": start.elapsed().as_secs_f64(),
        },
        "notes": rom.notes,
        "out": args.out,
    }))
}

/// Trapezoid weights on each side; a side with a single node gets unit
/// weight, which is harmless since a common scale on one side does not
/// change the ROM.
fn rule_from(nodes_c: Vec<f64>, nodes_o: Vec<f64>) -> Result<QuadratureRule> {
    let side = |nodes: &[f64]| -> Result<Vec<f64>> {
        if nodes.len() == 1 {
            return Ok(vec![1.0]);
        }
        Ok(quadrature::trapezoid_weights(nodes, true)?
            .into_iter()
            .map(f64::sqrt)
            .collect())
    };
    let (wc, wo) = (side(&nodes_c)?, side(&nodes_o)?);
    Ok(QuadratureRule::new(nodes_c, wc, nodes_o, wo, true)?)
}

fn split(nodes: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let c = nodes.iter().step_by(2).copied().collect();
    let o = nodes.iter().skip(1).step_by(2).copied().collect();
    (c, o)
}

fn build_rule(args: &ReduceArgs, available: Option<&[f64]>) -> Result<QuadratureRule> {
    let (c, o) = match (args.nodes_c, args.nodes_o, args.nodes) {
        (Some(c), Some(o), _) => (c.nodes()?, o.nodes()?),
        (_, _, Some(g)) => split(&g.nodes()?),
        _ => match available {
            Some(nodes) => {
                let mut sorted = nodes.to_vec();
                sorted.sort_by(f64::total_cmp);
                split(&sorted)
            }
            None => split(&DEFAULT_NODES.nodes()?),
        },
    };
    if c.is_empty() || o.is_empty() {
        return Err(Error::MissingData("both node sides need at least one node".into()).into());
    }
    rule_from(c, o)
}

fn strictly_proper(set: SampleSet) -> Result<SampleSet> {
    match set.kind {
        SampleKind::StrictlyProper => Ok(set),
        SampleKind::RawH => {
            let d = match &set.d {
                Some(d) => d.clone(),
                None => {
                    let est = samples::estimate_feedthrough(FeedthroughSource::Samples(&set))?;
                    warn!(
                        "no feedthrough in the sidecar; estimated from the highest node (imaginary residue {:.2e})",
                        est.uncertainty
                    );
                    est.d
                }
            };
            Ok(set.to_strictly_proper(&d)?)
        }
        other => Err(Error::InvalidArgument(format!("quadbt needs raw or strictly proper samples, got {other}")).into()),
    }
}

fn zero_shifted(set: SampleSet) -> Result<SampleSet> {
    match set.kind {
        SampleKind::ZeroShifted => Ok(set),
        SampleKind::RawH => {
            let h0 = set.h0.clone().ok_or_else(|| {
                Error::MissingData("quadspa needs H(0) in the sample sidecar (field H0); it is not extrapolated".into())
            })?;
            Ok(set.to_zero_shifted(&h0)?)
        }
        other => Err(Error::InvalidArgument(format!("quadspa needs raw or zero-shifted samples, got {other}")).into()),
    }
}

fn data_singular_values(data: &QuadData) -> Result<Vec<f64>> {
    let mut s = linalg::singular_values(&data.n)?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

fn run_quadrature(args: &ReduceArgs, order: Order) -> Result<Value> {
    let start = Instant::now();
    let flavor = if args.method == MethodArg::Quadbt {
        Flavor::Bt
    } else {
        Flavor::Spa
    };
    let (data, rule, source) = if let Some(path) = &args.system {
        let sys = iofmt::load_system(path)?;
        let rule = build_rule(args, None)?;
        let data = quadrature::data_from_system(&sys, &rule, flavor)?;
        (data, rule, json!({ "system": path, "n": sys.n() }))
    } else {
        let path = args.samples.as_ref().expect("checked by clap");
        let set = iofmt::load_samples(path).with_context(|| format!("loading samples {}", path.display()))?;
        let rule = build_rule(args, Some(&set.nodes))?;
        let data = match flavor {
            Flavor::Bt => {
                let sp = strictly_proper(set)?;
                quadrature::quadbt_data(&sp, &sp, &rule)?
            }
            Flavor::Spa => {
                let zs = zero_shifted(set)?;
                let deriv = match &args.derivatives {
                    Some(p) => Some(iofmt::load_samples(p)?),
                    None => None,
                };
                quadrature::quadspa_data(&zs, &zs, &rule, deriv.as_ref())?
            }
        };
        (data, rule, json!({ "samples": path }))
    };
    let t_data = start.elapsed().as_secs_f64();

    let t = Instant::now();
    let sv = data_singular_values(&data)?;
    let (r, retained, notes, imag) = if args.realify {
        let imag = quadrature::imag_residue(&quadrature::pair_transformed(&data)?);
        let rom = quadrature::reduce_data(&quadrature::realify(&data)?, order)?;
        iofmt::save_rom(&args.out, &rom)?;
        (rom.order(), rom.hankel_used.clone(), rom.notes.clone(), Some(imag))
    } else {
        let rom: ReducedModel<_> = quadrature::reduce_data(&data, order)?;
        iofmt::save_rom(&args.out, &rom)?;
        (rom.order(), rom.hankel_used.clone(), rom.notes.clone(), None)
    };
    let t_reduce = t.elapsed().as_secs_f64();

    Ok(json!({
        "method": if flavor == Flavor::Bt { "quadbt" } else { "quadspa" },
        "source": source,
        "inputs": data.inputs(),
        "outputs": data.outputs(),
        "r": r,
        "nodes_c": rule.nodes_c.len(),
        "nodes_o": rule.nodes_o.len(),
        "data_singular_values": sv,
        "retained": retained,
        "realified": args.realify,
        "imag_residue": imag,
        "timings": {
            "data_s": t_data,
            "reduce_s": t_reduce,
            "total_s": start.elapsed().as_secs_f64(),
        },
        "notes": notes,
        "out": args.out,
    }))
}
