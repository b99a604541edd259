use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use stirling_gamma::dpm::simulate_four_component_data;
use stirling_gamma::sbm::simulate_networks;

use crate::args::{SimulateArgs, SimulateCommand};
use crate::error::CliResult;
use crate::io::{Output, Table};

pub fn run(cmd: &SimulateCommand, out: &Output) -> CliResult<()> {
    match cmd {
        SimulateCommand::Mixture(a) => mixture(a, out),
        SimulateCommand::Networks(a) => networks(a, out),
    }
}

fn mixture(args: &SimulateArgs, out: &Output) -> CliResult<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let data = simulate_four_component_data(args.n, &mut rng)?;
    let mut t = Table::headerless();
    for i in 0..data.len() {
        t.row(data.point(i));
    }
    let path = out.write("data.csv", &t.finish())?;
    out!(
        "{}",
        json!({ "file": path, "n": data.len(), "dim": data.dim() })
    );
    Ok(())
}

fn networks(args: &SimulateArgs, out: &Output) -> CliResult<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (data, truth) = simulate_networks(args.n, &mut rng)?;
    let n = data.num_nodes();
    let mut files = Vec::new();
    for s in 0..data.num_networks() {
        let mut t = Table::headerless();
        for row in data.adjacency(s).chunks(n) {
            t.row(row);
        }
        files.push(out.write(&format!("network_{}.csv", s + 1), &t.finish())?);
    }
    let truth_path = out.write("truth.csv", &format!("{}\n", truth.to_csv_line()))?;
    out!(
        "{}",
        json!({ "networks": files, "truth": truth_path, "n": n, "blocks": truth.k(), "block_sizes": truth.sizes() })
    );
    Ok(())
}
