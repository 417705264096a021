use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use vlf::eval::{
    evaluate_model, kde2, kde_csv, pca2, table_csv, table_markdown, BucketStat, FdeBucketTable,
    N_BUCKETS,
};
use vlf::features::Standardizer;
use vlf::fed::{comm_cost, round_log_csv, run_federation, Algorithm, SiloHandle};
use vlf::ingest::{clean_dataset, compute_stats, parse_ais_csv_path, write_trajectories_ndjson};
use vlf::nn::{deserialize_params, fit, history_csv, serialize_params, ModelParams};

use crate::config::{safe_name, silo_seed, RunConfig};
use crate::data::{apply_all, assemble, raw_windows, PreparedData};
use crate::error::CliError;

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("encoding {}: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}

fn read_model(path: &Path) -> Result<ModelParams, CliError> {
    let bytes =
        fs::read(path).map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    Ok(deserialize_params(&bytes)?)
}

fn read_standardizer(path: &Path) -> Result<Standardizer, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("parsing {}: {e}", path.display())))
}

fn require_dataset(cfg: &RunConfig) -> Result<&Path, CliError> {
    cfg.dataset
        .as_deref()
        .ok_or_else(|| CliError::Config("no dataset path configured (set \"dataset\")".into()))
}

/// Pools per-silo bucket tables into one, weighting each bucket's mean by
/// its sample count.
fn merge_tables(tables: &[FdeBucketTable]) -> FdeBucketTable {
    let mut counts = [0usize; N_BUCKETS];
    let mut sums = [0.0f64; N_BUCKETS];
    for t in tables {
        for (k, b) in t.buckets.iter().enumerate() {
            if let Some(b) = b {
                counts[k] += b.n;
                sums[k] += b.fde * b.n as f64;
            }
        }
    }
    FdeBucketTable {
        buckets: std::array::from_fn(|k| {
            (counts[k] > 0).then(|| BucketStat {
                n: counts[k],
                fde: sums[k] / counts[k] as f64,
            })
        }),
    }
}

pub fn preprocess(cfg: &RunConfig) -> Result<(), CliError> {
    let dataset = require_dataset(cfg)?;
    let (records, rows_skipped) = parse_ais_csv_path(dataset, &cfg.schema)?;
    let (trajs, report) = clean_dataset(records, &cfg.cleaning)?;
    let stats = compute_stats(&trajs)?;

    let out = &cfg.out_dir;
    let path = out.join("trajectories.ndjson");
    let mut file = fs::File::create(&path)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", path.display())))?;
    write_trajectories_ndjson(&mut file, &trajs)?;
    write_json(&out.join("stats.json"), &stats)?;
    write_json(
        &out.join("report.json"),
        &json!({ "csv_rows_skipped": rows_skipped, "pipeline": report }),
    )?;
    println!(
        "preprocess: {} records -> {} trajectories ({} skipped csv rows)",
        report.records_in,
        trajs.len(),
        rows_skipped
    );
    Ok(())
}

pub fn train(cfg: &RunConfig) -> Result<(), CliError> {
    let dataset = require_dataset(cfg)?;
    let prepared = assemble(dataset, &cfg.windowing)?;
    let dims = cfg.model.dims(prepared.vocab);
    let outcome = fit(&prepared.train, &prepared.val, dims, &cfg.train)?;

    let out = &cfg.out_dir;
    write_bytes(&out.join("model.bin"), &serialize_params(&outcome.params))?;
    write_json(&out.join("standardizer.json"), &prepared.standardizer)?;
    write_text(&out.join("history.csv"), &history_csv(&outcome.history))?;
    let test_fde = if prepared.test.is_empty() {
        None
    } else {
        let table = evaluate_model(&outcome.params, &prepared.test, &prepared.standardizer)?;
        write_text(&out.join("fde.csv"), &table_csv(&table))?;
        write_text(&out.join("fde.md"), &table_markdown(&table))?;
        table.overall()
    };
    write_json(
        &out.join("summary.json"),
        &json!({
            "windows": {
                "train": prepared.train.len(),
                "val": prepared.val.len(),
                "test": prepared.test.len(),
            },
            "vocab": dims.vocab,
            "parameters": outcome.params.param_count(),
            "best_epoch": outcome.best_epoch,
            "best_val_loss": outcome.best_val_loss,
            "test_fde_m": test_fde,
        }),
    )?;
    match test_fde {
        Some(fde) => println!(
            "train: best epoch {} (val loss {:.4}), test FDE {:.1} m",
            outcome.best_epoch, outcome.best_val_loss, fde
        ),
        None => println!(
            "train: best epoch {} (val loss {:.4}), no test windows",
            outcome.best_epoch, outcome.best_val_loss
        ),
    }
    Ok(())
}

/// Builds the configured silos: prepares each dataset, writes its
/// standardizer next to the other artifacts, and returns the handles in
/// config order together with the widest inferred vocabulary.
fn build_silos(cfg: &RunConfig) -> Result<(Vec<SiloHandle>, usize), CliError> {
    let mut handles = Vec::with_capacity(cfg.silos.len());
    let mut vocab = 1usize;
    for spec in &cfg.silos {
        let prepared: PreparedData = assemble(&spec.dataset, &cfg.windowing)?;
        vocab = vocab.max(prepared.vocab);
        write_json(
            &cfg.out_dir.join(format!("standardizer_{}.json", safe_name(&spec.id))),
            &prepared.standardizer,
        )?;
        handles.push(SiloHandle::new(
            spec.id.clone(),
            prepared.train,
            prepared.val,
            prepared.test,
            prepared.standardizer,
            silo_seed(cfg.seed, spec),
        )?);
    }
    Ok((handles, vocab))
}

/// Test-split table for one silo under the given parameters, or None when
/// the silo has no test windows.
fn silo_table(h: &SiloHandle, params: &ModelParams) -> Result<Option<FdeBucketTable>, CliError> {
    if h.test_count() == 0 {
        return Ok(None);
    }
    Ok(Some(h.test_fde_table(params)?))
}

pub fn federate(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.silos.len() < 2 {
        return Err(CliError::Config(format!(
            "federate needs at least two silos, got {}",
            cfg.silos.len()
        )));
    }
    let out = &cfg.out_dir;
    let (handles, vocab) = build_silos(cfg)?;
    let dims = cfg.model.dims(vocab);
    let outcome = run_federation(&handles, dims, &cfg.fed, cfg.seed)?;
    write_bytes(&out.join("global.bin"), &serialize_params(&outcome.global))?;
    write_text(&out.join("rounds.csv"), &round_log_csv(&outcome.rounds))?;

    let mut silo_rows = Vec::with_capacity(handles.len());
    let mut global_tables = Vec::new();
    for h in &handles {
        let name = safe_name(h.id());
        let global_table = silo_table(h, &outcome.global)?;
        if let Some(t) = &global_table {
            write_text(&out.join(format!("fde_global_{name}.csv")), &table_csv(t))?;
        }
        let personalized = h.personalize(&outcome.global, &cfg.fed)?;
        write_bytes(
            &out.join(format!("personalized_{name}.bin")),
            &serialize_params(&personalized.params),
        )?;
        let personal_table = silo_table(h, &personalized.params)?;
        if let Some(t) = &personal_table {
            write_text(&out.join(format!("fde_personalized_{name}.csv")), &table_csv(t))?;
        }
        silo_rows.push(json!({
            "id": h.id(),
            "train_windows": h.sample_count(),
            "test_windows": h.test_count(),
            "global_fde_m": global_table.as_ref().and_then(|t| t.overall()),
            "personalized_fde_m": personal_table.as_ref().and_then(|t| t.overall()),
            "personalize_best_epoch": personalized.best_epoch,
        }));
        global_tables.extend(global_table);
    }
    let pooled = merge_tables(&global_tables);
    write_text(&out.join("fde_global_pooled.csv"), &table_csv(&pooled))?;

    let sweep = sweep_mu(cfg, &handles, dims)?;
    write_json(
        &out.join("summary.json"),
        &json!({
            "fed": cfg.fed,
            "silos": silo_rows,
            "pooled_global_fde_m": pooled.overall(),
            "final_global_val_loss": outcome.rounds.last().map(|r| r.global_val_loss),
            "mu_sweep": sweep,
        }),
    )?;
    println!(
        "federate: {} rounds over {} silos, pooled global FDE {}",
        outcome.rounds.len(),
        handles.len(),
        pooled
            .overall()
            .map_or("n/a".into(), |f| format!("{f:.1} m")),
    );
    Ok(())
}

/// Reruns the federation once per configured proximal weight and tabulates
/// final validation loss and pooled test FDE against mu.
fn sweep_mu(
    cfg: &RunConfig,
    handles: &[SiloHandle],
    dims: vlf::nn::ModelDims,
) -> Result<Vec<serde_json::Value>, CliError> {
    if cfg.mu_sweep.is_empty() {
        return Ok(Vec::new());
    }
    let mut rows = Vec::with_capacity(cfg.mu_sweep.len());
    let mut csv = String::from("mu,global_val_loss,fde_m\n");
    for (i, &mu) in cfg.mu_sweep.iter().enumerate() {
        let mut fc = cfg.fed;
        fc.algorithm = Algorithm::FedProx;
        fc.mu_prox = mu;
        let outcome = run_federation(handles, dims, &fc, cfg.seed)?;
        let dir = cfg.out_dir.join("sweep").join(format!("mu_{i}_{mu}"));
        fs::create_dir_all(&dir)
            .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
        write_bytes(&dir.join("global.bin"), &serialize_params(&outcome.global))?;
        write_text(&dir.join("rounds.csv"), &round_log_csv(&outcome.rounds))?;
        let mut tables = Vec::new();
        for h in handles {
            tables.extend(silo_table(h, &outcome.global)?);
        }
        let pooled = merge_tables(&tables);
        write_text(&dir.join("fde.csv"), &table_csv(&pooled))?;
        let val = outcome.rounds.last().map(|r| r.global_val_loss);
        let fde = pooled.overall();
        csv.push_str(&format!(
            "{mu},{},{}\n",
            val.map_or(String::new(), |v| v.to_string()),
            fde.map_or(String::new(), |v| v.to_string()),
        ));
        rows.push(json!({ "mu": mu, "global_val_loss": val, "fde_m": fde }));
    }
    write_text(&cfg.out_dir.join("sweep.csv"), &csv)?;
    Ok(rows)
}

pub fn personalize(cfg: &RunConfig, model_path: &Path) -> Result<(), CliError> {
    if cfg.silos.is_empty() {
        return Err(CliError::Config("personalize needs at least one silo".into()));
    }
    let global = read_model(model_path)?;
    let out = &cfg.out_dir;
    let (handles, _) = build_silos(cfg)?;
    let mut silo_rows = Vec::with_capacity(handles.len());
    for h in &handles {
        let name = safe_name(h.id());
        let before = silo_table(h, &global)?;
        let outcome = h.personalize(&global, &cfg.fed)?;
        write_bytes(
            &out.join(format!("personalized_{name}.bin")),
            &serialize_params(&outcome.params),
        )?;
        let after = silo_table(h, &outcome.params)?;
        if let Some(t) = &after {
            write_text(&out.join(format!("fde_personalized_{name}.csv")), &table_csv(t))?;
        }
        silo_rows.push(json!({
            "id": h.id(),
            "global_fde_m": before.as_ref().and_then(|t| t.overall()),
            "personalized_fde_m": after.as_ref().and_then(|t| t.overall()),
            "best_epoch": outcome.best_epoch,
            "best_val_loss": outcome.best_val_loss,
        }));
    }
    write_json(&out.join("summary.json"), &json!({ "silos": silo_rows }))?;
    println!("personalize: fine-tuned {} silos from {}", handles.len(), model_path.display());
    Ok(())
}

pub fn evaluate(
    cfg: &RunConfig,
    model_path: &Path,
    standardizer_path: &Path,
) -> Result<(), CliError> {
    let dataset = require_dataset(cfg)?;
    let params = read_model(model_path)?;
    let standardizer = read_standardizer(standardizer_path)?;
    let raw = raw_windows(dataset, &cfg.windowing)?;
    let windows = apply_all(&standardizer, &raw);
    let table = evaluate_model(&params, &windows, &standardizer)?;

    let out = &cfg.out_dir;
    write_text(&out.join("fde.csv"), &table_csv(&table))?;
    write_text(&out.join("fde.md"), &table_markdown(&table))?;
    let pca = pca2(&raw)?;
    write_json(&out.join("pca.json"), &pca)?;
    write_json(
        &out.join("summary.json"),
        &json!({
            "windows": raw.len(),
            "fde_m": table.overall(),
            "pca_explained": pca.explained,
        }),
    )?;
    println!(
        "evaluate: {} windows, FDE {}",
        raw.len(),
        table.overall().map_or("n/a".into(), |f| format!("{f:.1} m")),
    );
    Ok(())
}

pub fn commcost(cfg: &RunConfig) -> Result<(), CliError> {
    let c = cfg.comm;
    let report = comm_cost(c.dataset_bytes, c.model_msg_bytes, c.param_bytes, c.n_silos, c.rounds)?;
    let centralized = u64::try_from(report.centralized_bytes)
        .map_err(|_| CliError::Numeric("centralized byte count exceeds u64".into()))?;
    let federated = u64::try_from(report.federated_bytes)
        .map_err(|_| CliError::Numeric("federated byte count exceeds u64".into()))?;
    write_json(
        &cfg.out_dir.join("comm.json"),
        &json!({
            "centralized_bytes": centralized,
            "federated_bytes": federated,
            "centralized_gib": report.centralized_gib(),
            "federated_gib": report.federated_gib(),
            "reduction_percent": report.reduction_percent(),
        }),
    )?;
    println!(
        "commcost: centralized {:.2} GiB, federated {:.2} GiB, reduction {:.1}%",
        report.centralized_gib(),
        report.federated_gib(),
        report.reduction_percent(),
    );
    Ok(())
}

pub fn diagnose(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.silos.is_empty() {
        return Err(CliError::Config("diagnose needs at least one silo".into()));
    }
    let out = &cfg.out_dir;
    let mut silo_rows = Vec::with_capacity(cfg.silos.len());
    for spec in &cfg.silos {
        let windows = raw_windows(&spec.dataset, &cfg.windowing)?;
        let points: Vec<[f64; 2]> = windows.iter().map(|w| w.label).collect();
        let map = kde2(&points, &cfg.kde)?;
        write_text(&out.join(format!("kde_{}.csv", safe_name(&spec.id))), &kde_csv(&map))?;
        silo_rows.push(json!({ "id": spec.id, "n_points": points.len() }));
    }
    write_json(
        &out.join("summary.json"),
        &json!({ "grid": { "nx": cfg.kde.nx, "ny": cfg.kde.ny }, "silos": silo_rows }),
    )?;
    println!("diagnose: density maps for {} silos", cfg.silos.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(entries: &[(usize, Option<(usize, f64)>)]) -> FdeBucketTable {
        let mut t = FdeBucketTable {
            buckets: std::array::from_fn(|_| None),
        };
        for &(k, stat) in entries {
            t.buckets[k] = stat.map(|(n, fde)| BucketStat { n, fde });
        }
        t
    }

    #[test]
    fn merge_weights_by_sample_count() {
        let a = table(&[(0, Some((2, 10.0))), (3, Some((1, 30.0)))]);
        let b = table(&[(0, Some((6, 50.0)))]);
        let m = merge_tables(&[a, b]);
        let b0 = m.buckets[0].unwrap();
        assert_eq!(b0.n, 8);
        assert!((b0.fde - 40.0).abs() < 1e-12);
        let b3 = m.buckets[3].unwrap();
        assert_eq!(b3.n, 1);
        assert!((b3.fde - 30.0).abs() < 1e-12);
        assert!(m.buckets[1].is_none());
    }

    #[test]
    fn merge_of_nothing_is_empty() {
        let m = merge_tables(&[]);
        assert!(m.buckets.iter().all(|b| b.is_none()));
        assert_eq!(m.overall(), None);
    }
}
