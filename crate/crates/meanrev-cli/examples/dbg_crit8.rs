use meanrev::backtest::intercept_slope;
use meanrev_cli::config::ExperimentConfig;
use meanrev_cli::experiment::run_experiment;
use meanrev_cli::gen::{generate_universe, write_groups_csv};
use meanrev_cli::report::{read_cells_csv, CellRow};
use std::collections::BTreeMap;
use std::time::Instant;

fn cell_slope(rows: &[&CellRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.cost, r.sharpe)).collect();
    intercept_slope(&pts).unwrap().1
}

fn main() {
    for seed in [1u64, 2, 3] {
        let t = Instant::now();
        let dir = std::env::temp_dir().join(format!("crit8_{seed}"));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        let (path, groups) = generate_universe(10, 10, 255, &[0.1, 0.3], 0.02, seed).unwrap();
        path.write_csv(std::fs::File::create(dir.join("data.csv")).unwrap()).unwrap();
        write_groups_csv(std::fs::File::create(dir.join("groups.csv")).unwrap(), &groups).unwrap();
        let mut config = ExperimentConfig::default();
        config.data = dir.join("data.csv");
        config.groups = Some(dir.join("groups.csv"));
        config.out_dir = dir.join("out");
        config.window_count = 1;
        config.pool_n_min = 8;
        config.pool_n_max = 10;
        config.max_candidates = 1;
        config.keep_best = 10;
        let artifacts = run_experiment(&config).unwrap();
        let rows = read_cells_csv(&artifacts.cells).unwrap();

        // (a) per-estimator pooled curve monotone?
        let mut pooled: BTreeMap<String, BTreeMap<u64, (f64, usize)>> = BTreeMap::new();
        for r in &rows {
            let e = pooled.entry(r.estimator.clone()).or_default();
            let entry = e.entry(r.cost.to_bits()).or_insert((0.0, 0));
            entry.0 += r.sharpe;
            entry.1 += 1;
        }
        let mut monotone_ok = true;
        for (est, by_cost) in &pooled {
            let mut curve: Vec<(f64, f64)> = by_cost
                .iter()
                .map(|(bits, (sum, count))| (f64::from_bits(*bits), sum / *count as f64))
                .collect();
            curve.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in curve.windows(2) {
                if w[1].1 > w[0].1 + 1e-9 {
                    println!("  seed {seed}: {est} curve increases at cost {}: {} -> {}", w[1].0, w[0].1, w[1].1);
                    monotone_ok = false;
                }
            }
        }

        // (b) per-pool slopes
        let mut wins = 0;
        let mut pools: Vec<usize> = rows.iter().map(|r| r.pool).collect();
        pools.sort_unstable();
        pools.dedup();
        for &pool in &pools {
            let pca: Vec<&CellRow> = rows.iter().filter(|r| r.pool == pool && r.estimator == "pca").collect();
            let pca_slope = cell_slope(&pca);
            // sparse cells at u = 0.3: group by (estimator, nu)
            let mut groups2: BTreeMap<(String, String), Vec<&CellRow>> = BTreeMap::new();
            for r in rows.iter().filter(|r| {
                r.pool == pool
                    && r.sparsity_fraction == Some(0.3)
                    && r.estimator != "pca"
            }) {
                groups2
                    .entry((r.estimator.clone(), format!("{:?}", r.nu_fraction)))
                    .or_default()
                    .push(r);
            }
            let slopes: Vec<f64> = groups2.values().map(|v| cell_slope(v)).collect();
            let mean_sparse = slopes.iter().sum::<f64>() / slopes.len() as f64;
            if mean_sparse > pca_slope {
                wins += 1;
            }
            println!("  seed {seed} pool {pool}: pca_slope={pca_slope:.2} mean_sparse={mean_sparse:.2} {}", if mean_sparse > pca_slope {"WIN"} else {"loss"});
        }
        println!("seed {seed}: monotone(a)={monotone_ok} wins(b)={wins}/10 elapsed={:?}", t.elapsed());
    }
}
