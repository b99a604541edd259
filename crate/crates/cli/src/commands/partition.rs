use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use stirling_gamma::partition::{
    kn_pmf_dp_with, kn_pmf_sgp_with, negbin_limit_pmf, poisson_limit_pmf, sample_partition_crp,
    ClusterCountPmf,
};
use stirling_gamma::special::StirlingTable;
use stirling_gamma::{StirlingGammaParams, StirlingGammaSampler};

use crate::args::{KnPmfArgs, LimitsArgs, PartitionCommand, PartitionPrior, PartitionSampleArgs};
use crate::error::{CliError, CliResult};
use crate::io::{Output, Table};

pub fn run(cmd: &PartitionCommand, out: &Output) -> CliResult<()> {
    match cmd {
        PartitionCommand::KnPmf(a) => kn_pmf(a, out),
        PartitionCommand::Sample(a) => sample(a, out),
        PartitionCommand::Limits(a) => limits(a, out),
    }
}

enum Law {
    Dp(f64),
    Sgp(StirlingGammaParams),
}

fn law(p: &PartitionPrior) -> CliResult<Law> {
    if p.dp {
        let alpha = p
            .alpha
            .ok_or_else(|| CliError::Usage("--dp needs --alpha".into()))?;
        return Ok(Law::Dp(alpha));
    }
    match (p.a, p.b, p.m) {
        (Some(a), Some(b), Some(m)) => Ok(Law::Sgp(StirlingGammaParams::new(a, b, m)?)),
        _ => Err(CliError::Usage(
            "give --dp --alpha, or --a, --b and --m".into(),
        )),
    }
}

fn summary(pmf: &ClusterCountPmf) -> serde_json::Value {
    json!({
        "n": pmf.n(),
        "mean": pmf.mean(),
        "variance": pmf.variance(),
        "mode": pmf.mode(),
        "total": pmf.total(),
    })
}

fn kn_pmf(args: &KnPmfArgs, out: &Output) -> CliResult<()> {
    let table = StirlingTable::with_cap(args.stirling_cap);
    let pmf = match law(&args.prior)? {
        Law::Dp(alpha) => kn_pmf_dp_with(&table, alpha, args.n)?,
        Law::Sgp(p) => kn_pmf_sgp_with(&table, &p, args.n)?,
    };
    out.write("kn_pmf.csv", &pmf.to_csv())?;
    out!("{}", summary(&pmf));
    Ok(())
}

fn sample(args: &PartitionSampleArgs, out: &Output) -> CliResult<()> {
    let law = law(&args.prior)?;
    let smp = match &law {
        Law::Sgp(p) => Some(StirlingGammaSampler::new(*p)?),
        Law::Dp(_) => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut parts = Table::headerless();
    let mut draws = Table::new(&["draw", "alpha", "k"]);
    let mut total_k = 0usize;
    for i in 1..=args.count {
        let alpha = match (&law, &smp) {
            (Law::Dp(a), _) => *a,
            (_, Some(s)) => s.sample(&mut rng)?,
            _ => unreachable!(),
        };
        let p = sample_partition_crp(alpha, args.n, &mut rng)?;
        total_k += p.k();
        parts.line(&p.to_csv_line());
        draws.row(&[i.to_string(), alpha.to_string(), p.k().to_string()]);
    }
    out.write("partitions.csv", &parts.finish())?;
    out.write("draws.csv", &draws.finish())?;
    out!(
        "{}",
        json!({ "count": args.count, "n": args.n, "mean_clusters": total_k as f64 / args.count.max(1) as f64 })
    );
    Ok(())
}

/// Powers of ten from the first one above a/b, then m itself.
fn ladder(location: f64, m: u64) -> Vec<u64> {
    let mut v = Vec::new();
    let mut x = 10u64;
    while x < m {
        if x as f64 > location {
            v.push(x);
        }
        x *= 10;
    }
    v.push(m);
    v
}

fn limits(args: &LimitsArgs, out: &Output) -> CliResult<()> {
    let p = StirlingGammaParams::new(args.params.a, args.params.b, args.params.m)?;
    let (a, b, lambda) = (p.a(), p.b(), args.lambda);
    poisson_limit_pmf(lambda, 1)?;
    let ms = ladder(p.location(), p.m());
    let table = StirlingTable::with_cap(p.m() as usize);
    let mut tv = Table::new(&["m", "tv_negative_binomial", "tv_poisson"]);
    let mut rows = Vec::new();
    let mut last = None;
    for &m in &ms {
        let sgp = kn_pmf_sgp_with(&table, &StirlingGammaParams::new(a, b, m)?, m as usize)?;
        let dp = kn_pmf_dp_with(&table, lambda / (m as f64).ln(), m as usize)?;
        let tv_nb = sgp.tv_distance_to(|k| negbin_limit_pmf(a, b, k).unwrap_or(0.0));
        let tv_po = dp.tv_distance_to(|k| poisson_limit_pmf(lambda, k).unwrap_or(0.0));
        tv.row(&[m as f64, tv_nb, tv_po]);
        rows.push(json!({ "m": m, "tv_negative_binomial": tv_nb, "tv_poisson": tv_po }));
        last = Some((sgp, dp));
    }
    let (sgp, dp) = last.expect("ladder ends at m");
    let mut pmfs = Table::new(&["k", "sgp", "negative_binomial", "dp", "poisson"]);
    for k in 1..=sgp.n() {
        let cells = [
            sgp.pmf(k),
            negbin_limit_pmf(a, b, k)?,
            dp.pmf(k),
            poisson_limit_pmf(lambda, k)?,
        ];
        if cells.iter().all(|&c| c < 1e-300) {
            break;
        }
        pmfs.line(&format!(
            "{k},{},{},{},{}",
            cells[0], cells[1], cells[2], cells[3]
        ));
    }
    out.write("limits_tv.csv", &tv.finish())?;
    out.write("limits_pmf.csv", &pmfs.finish())?;
    out!(
        "{}",
        json!({ "a": a, "b": b, "lambda": lambda, "ladder": rows })
    );
    Ok(())
}
