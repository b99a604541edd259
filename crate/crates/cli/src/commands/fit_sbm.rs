use serde_json::json;
use stirling_gamma::diagnostics::{
    adjusted_rand_index, coclustering_matrix, least_squares_partition,
};
use stirling_gamma::sbm::{run_multinetwork_chains, NetworkData, SbmConfig, SbmPrior};
use stirling_gamma::Partition;

use super::{ess, expected_clusters, mean, mode_of, pooled_histogram};
use crate::args::FitSbmArgs;
use crate::error::{CliError, CliResult};
use crate::io::{matrix_csv, read_network, read_partition, Output, Table};
use crate::manifest::Manifest;
use crate::prior::parse_sbm_prior;

fn load(args: &FitSbmArgs) -> CliResult<NetworkData> {
    let mut n = None;
    let mut mats = Vec::new();
    for path in &args.networks {
        let f = read_network(path, args.nodes.or(n))?;
        for w in &f.warnings {
            eprintln!("warning: {w}");
        }
        if let Some(n0) = n {
            if f.n != n0 {
                return Err(CliError::input(
                    path,
                    format!("has {} nodes, earlier networks have {n0}", f.n),
                ));
            }
        }
        n = Some(f.n);
        mats.push(f.adjacency);
    }
    Ok(NetworkData::new(n.expect("at least one network"), mats)?)
}

pub fn run(args: &FitSbmArgs, out: &Output, manifest: &mut Manifest) -> CliResult<()> {
    let data = load(args)?;
    let (n, nn) = (data.num_nodes(), data.num_networks());
    let prior = parse_sbm_prior(&args.prior, n)?;
    let truth = args.truth.as_deref().map(read_partition).transpose()?;
    if let (Some(t), Some(path)) = (&truth, &args.truth) {
        if t.n() != n {
            return Err(CliError::input(
                path,
                format!("has {} labels for {n} nodes", t.n()),
            ));
        }
    }
    if args.chain.chains == 0 {
        return Err(CliError::Usage("--chains must be at least 1".into()));
    }
    let defaults = SbmConfig::default();
    let cfg = SbmConfig {
        iterations: args.chain.iterations.unwrap_or(defaults.iterations),
        burn_in: args.chain.burn_in.unwrap_or(defaults.burn_in),
        thin: args.chain.thin,
        // Draws are pooled across chains below.
        store_partitions: true,
        coclustering: false,
        ..defaults
    };
    manifest.resolve("nodes", n);
    manifest.resolve("networks", nn);
    manifest.resolve("prior", prior);
    manifest.resolve("config", cfg);

    let traces = run_multinetwork_chains(
        &data,
        &prior,
        &cfg,
        truth.as_ref(),
        args.chain.seed,
        args.chain.chains,
    )?;

    let mut header = vec!["iteration".to_string()];
    header.extend((1..=nn).map(|s| format!("k_{s}")));
    header.extend((1..=nn).map(|s| format!("alpha_{s}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    for (c, tr) in traces.iter().enumerate() {
        let mut t = Table::new(&header);
        for (i, it) in tr.iterations.iter().enumerate() {
            let mut cells = vec![it.to_string()];
            cells.extend((0..nn).map(|s| tr.num_clusters[s][i].to_string()));
            cells.extend((0..nn).map(|s| tr.alpha[s][i].to_string()));
            t.row(&cells);
        }
        out.write(&format!("trace_chain{c}.csv"), &t.finish())?;
        if args.chain.store_partitions {
            for s in 0..nn {
                let mut p = Table::headerless();
                for x in &tr.partitions.as_ref().expect("stored")[s] {
                    p.line(&x.to_csv_line());
                }
                out.write(
                    &format!("partitions_chain{c}_network{}.csv", s + 1),
                    &p.finish(),
                )?;
            }
        }
    }

    let mut hists = Vec::new();
    let mut points: Vec<Partition> = Vec::new();
    let mut networks = Vec::new();
    for s in 0..nn {
        let draws: Vec<Partition> = traces
            .iter()
            .flat_map(|t| t.partitions.as_ref().expect("stored")[s].iter().cloned())
            .collect();
        let cocl = coclustering_matrix(&draws);
        out.write(
            &format!("coclustering_network{}.csv", s + 1),
            &matrix_csv(&cocl, n),
        )?;
        let point = least_squares_partition(&draws, &cocl).expect("retained draws");
        let hist = pooled_histogram(traces.iter().map(|t| &t.num_clusters[s][..]), n);
        let ks: Vec<f64> = traces
            .iter()
            .flat_map(|t| t.num_clusters[s].iter().map(|&k| k as f64))
            .collect();
        let alphas: Vec<f64> = traces
            .iter()
            .flat_map(|t| t.alpha[s].iter().copied())
            .collect();
        let chain_ess: Vec<serde_json::Value> = traces
            .iter()
            .map(|t| ess(&t.alpha[s], args.chain.ess.into()))
            .collect();
        let mut entry = json!({
            "network": s + 1,
            "mode_clusters": mode_of(&hist),
            "mean_clusters": mean(&ks),
            "point_estimate_clusters": point.k(),
            "mean_alpha": mean(&alphas),
            "ess_alpha": chain_ess,
        });
        if let Some(t) = &truth {
            let aris: Vec<f64> = traces
                .iter()
                .map(|tr| tr.mean_ari.as_ref().expect("truth given")[s])
                .collect();
            entry["mean_ari"] = json!(mean(&aris));
            entry["point_estimate_ari"] = json!(adjusted_rand_index(&point, t)?);
        }
        networks.push(entry);
        hists.push(hist);
        points.push(point);
    }

    let kmax = hists
        .iter()
        .filter_map(|h| h.iter().rposition(|&p| p > 0.0))
        .max()
        .map_or(1, |i| i + 1);
    let mut header = vec!["k".to_string()];
    header.extend((1..=nn).map(|s| format!("network_{s}")));
    let mut h = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for k in 0..kmax {
        let mut cells = vec![(k + 1).to_string()];
        cells.extend(hists.iter().map(|hs| hs[k].to_string()));
        h.row(&cells);
    }
    out.write("kn_histograms.csv", &h.finish())?;

    let mut pe = Table::headerless();
    points.iter().for_each(|p| pe.line(&p.to_csv_line()));
    out.write("point_estimates.csv", &pe.finish())?;

    let prior_json = match prior {
        SbmPrior::Fixed { alpha } => json!({
            "kind": "fixed",
            "alpha": alpha,
            "expected_clusters": expected_clusters(alpha, n)?,
        }),
        SbmPrior::Independent { params } => {
            json!({ "kind": "independent", "a": params.a(), "b": params.b(), "m": params.m() })
        }
        SbmPrior::Pooled { params } => {
            json!({ "kind": "pooled", "a": params.a(), "b": params.b(), "m": params.m() })
        }
    };
    let mut summary = json!({
        "nodes": n,
        "prior": prior_json,
        "chains": traces.len(),
        "draws_per_chain": traces[0].iterations.len(),
        "networks": networks,
    });
    if truth.is_some() {
        let all: Vec<f64> = summary["networks"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| e["mean_ari"].as_f64().unwrap())
            .collect();
        summary["mean_ari"] = json!(mean(&all));
    }
    out.write_json("summary.json", &summary)?;
    out!("{summary}");
    Ok(())
}
