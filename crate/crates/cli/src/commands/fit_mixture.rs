use serde_json::json;
use stirling_gamma::dpm::{run_chains, Dataset, MixtureConfig, NiwParams, PrecisionPrior};

use super::{ess, expected_clusters, mean, mode_of, pooled_histogram};
use crate::args::FitMixtureArgs;
use crate::error::{CliError, CliResult};
use crate::io::{matrix_csv, read_points, Output, Table};
use crate::manifest::Manifest;
use crate::prior::parse_mixture_prior;

fn niw(args: &FitMixtureArgs, dim: usize) -> CliResult<NiwParams> {
    let mean0 = match &args.mean0 {
        None => vec![0.0; dim],
        Some(s) => s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("--mean0: {t:?} is not a number")))
            })
            .collect::<CliResult<Vec<_>>>()?,
    };
    if mean0.len() != dim {
        return Err(CliError::Usage(format!(
            "--mean0 has {} entries for {dim}-dimensional data",
            mean0.len()
        )));
    }
    let mut scale0 = vec![0.0; dim * dim];
    for i in 0..dim {
        scale0[i * dim + i] = args.scale0;
    }
    Ok(NiwParams::new(
        mean0,
        args.kappa0,
        args.nu0.unwrap_or(dim as f64 + 2.0),
        scale0,
    )?)
}

pub fn run(args: &FitMixtureArgs, out: &Output, manifest: &mut Manifest) -> CliResult<()> {
    let (dim, values) = read_points(&args.data)?;
    let data = Dataset::new(dim, values)?;
    let n = data.len();
    let prior = parse_mixture_prior(&args.prior, n)?;
    let niw = niw(args, dim)?;
    let defaults = MixtureConfig::default();
    let cfg = MixtureConfig {
        iterations: args.chain.iterations.unwrap_or(defaults.iterations),
        burn_in: args.chain.burn_in.unwrap_or(defaults.burn_in),
        thin: args.chain.thin,
        store_partitions: args.chain.store_partitions,
        ..defaults
    };
    if args.chain.chains == 0 {
        return Err(CliError::Usage("--chains must be at least 1".into()));
    }
    manifest.resolve("n", n);
    manifest.resolve("dim", dim);
    manifest.resolve("prior", prior);
    manifest.resolve("niw", &niw);
    manifest.resolve("config", cfg);

    let traces = run_chains(
        &data,
        &niw,
        &prior,
        &cfg,
        args.chain.seed,
        args.chain.chains,
    )?;

    let mut chains = Vec::new();
    let mut cocl = vec![0.0; n * n];
    let mut ek_all = Vec::new();
    for (c, tr) in traces.iter().enumerate() {
        let mut t = Table::new(&["iteration", "k", "alpha"]);
        for ((it, k), a) in tr.iterations.iter().zip(&tr.num_clusters).zip(&tr.alpha) {
            t.line(&format!("{it},{k},{a}"));
        }
        out.write(&format!("trace_chain{c}.csv"), &t.finish())?;
        if let Some(parts) = &tr.partitions {
            let mut p = Table::headerless();
            parts.iter().for_each(|x| p.line(&x.to_csv_line()));
            out.write(&format!("partitions_chain{c}.csv"), &p.finish())?;
        }
        if let Some(m) = &tr.coclustering {
            cocl.iter_mut()
                .zip(m)
                .for_each(|(a, b)| *a += b / traces.len() as f64);
        }
        let ks: Vec<f64> = tr.num_clusters.iter().map(|&k| k as f64).collect();
        let ek = tr
            .alpha
            .iter()
            .map(|&a| expected_clusters(a, n))
            .collect::<CliResult<Vec<_>>>()?;
        chains.push(json!({
            "chain": c,
            "draws": tr.iterations.len(),
            "mean_clusters": mean(&ks),
            "mean_alpha": mean(&tr.alpha),
            "ess_clusters": ess(&ks, args.chain.ess.into()),
            "ess_alpha": ess(&tr.alpha, args.chain.ess.into()),
        }));
        ek_all.extend(ek);
    }
    out.write("coclustering.csv", &matrix_csv(&cocl, n))?;

    let hist = pooled_histogram(traces.iter().map(|t| &t.num_clusters[..]), n);
    let kmax = hist.iter().rposition(|&p| p > 0.0).map_or(1, |i| i + 1);
    let mut h = Table::new(&["k", "frequency"]);
    for (i, p) in hist[..kmax].iter().enumerate() {
        h.line(&format!("{},{p}", i + 1));
    }
    out.write("kn_histogram.csv", &h.finish())?;

    let all_k: Vec<f64> = traces
        .iter()
        .flat_map(|t| t.num_clusters.iter().map(|&k| k as f64))
        .collect();
    let all_alpha: Vec<f64> = traces
        .iter()
        .flat_map(|t| t.alpha.iter().copied())
        .collect();
    let prior_json = match prior {
        PrecisionPrior::Fixed { alpha } => json!({ "kind": "fixed", "alpha": alpha }),
        PrecisionPrior::StirlingGamma { params } => {
            json!({ "kind": "sg", "a": params.a(), "b": params.b(), "m": params.m() })
        }
    };
    let summary = json!({
        "n": n,
        "dim": dim,
        "prior": prior_json,
        "chains": chains,
        "posterior": {
            "mode_clusters": mode_of(&hist),
            "mean_clusters": mean(&all_k),
            "mean_alpha": mean(&all_alpha),
            "mean_expected_clusters": mean(&ek_all),
        },
    });
    out.write_json("summary.json", &summary)?;
    out!("{summary}");
    Ok(())
}
