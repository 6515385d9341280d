//! Synthetic-universe generation for demos and acceptance runs: several
//! independent cointegrated pools side by side, with a group file mapping
//! each pool's assets to its own group.

use anyhow::Result;
use nalgebra::DMatrix;

use meanrev::synth::{gen_cointegrated, SynthSpec};
use meanrev::timeseries::SamplePath;

/// Generates `pools` independent cointegrated panels of `n_per_pool` assets
/// each. Pool i uses seed `seed + i` and labels `p{i}_a{j}`; the group file
/// pairs map every asset to group `g{i}`.
pub fn generate_universe(
    pools: usize,
    n_per_pool: usize,
    t_len: usize,
    ar_coeffs: &[f64],
    noise_sd: f64,
    seed: u64,
) -> Result<(SamplePath, Vec<(String, String)>)> {
    anyhow::ensure!(pools >= 1, "need at least one pool");
    let mut values = DMatrix::zeros(t_len, pools * n_per_pool);
    let mut labels = Vec::with_capacity(pools * n_per_pool);
    let mut groups = Vec::with_capacity(pools * n_per_pool);
    for pool in 0..pools {
        let spec = SynthSpec::isotropic(
            n_per_pool,
            t_len,
            ar_coeffs.to_vec(),
            noise_sd,
            seed + pool as u64,
        );
        let (path, _) = gen_cointegrated(&spec)?;
        for j in 0..n_per_pool {
            let col = pool * n_per_pool + j;
            for t in 0..t_len {
                values[(t, col)] = path.values()[(t, j)];
            }
            let label = format!("p{pool}_a{j}");
            groups.push((label.clone(), format!("g{pool}")));
            labels.push(label);
        }
    }
    let path = SamplePath::new(values, labels, None)?;
    Ok((path, groups))
}

pub fn write_groups_csv<W: std::io::Write>(writer: W, pairs: &[(String, String)]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["asset_label", "group_label"])?;
    for (asset, group) in pairs {
        wtr.write_record([asset, group])?;
    }
    wtr.flush()?;
    Ok(())
}
