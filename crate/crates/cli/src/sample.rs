use std::path::PathBuf;

use anyhow::Result;
use balkit::iofmt;
use balkit::linalg;
use balkit::samples;
use clap::Args;

use crate::args::Grid;
use crate::usage;

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// System manifest.
    #[arg(long)]
    system: PathBuf,
    /// Sample nodes `lo:hi:count`.
    #[arg(long)]
    nodes: Grid,
    /// Write derivative samples instead of transfer-function values.
    #[arg(long)]
    derivative: bool,
    /// Leave D and H(0) out of the sidecar.
    #[arg(long, conflicts_with = "derivative")]
    bare: bool,
    /// Output CSV; the sidecar goes next to it with a .json extension.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: SampleArgs) -> Result<()> {
    let sidecar = iofmt::sidecar_path(&args.out);
    if sidecar == args.system {
        return Err(usage(format!(
            "the sidecar {} would overwrite the system manifest; pick another output name",
            sidecar.display()
        )));
    }
    let sys = iofmt::load_system(&args.system)?;
    let nodes = args.nodes.nodes()?;
    let set = if args.derivative {
        samples::sample_tf_derivative(&sys, &nodes)?
    } else {
        let mut set = samples::sample_tf(&sys, &nodes)?;
        if args.bare {
            set.d = None;
        } else {
            set.h0 = Some(linalg::to_complex(&sys.dc_moment()?));
        }
        set
    };
    iofmt::save_samples(&args.out, &set)?;
    Ok(())
}
