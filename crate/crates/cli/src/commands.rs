use std::path::{Path, PathBuf};

use log::{info, warn};
use serde_json::json;

use lsdr_core::embedding::nearest_neighbour_scale;
use lsdr_core::indices::{
    knn_metrics, pca_reduce, tractable_consistency_index, trustability_from, trustability_index,
    DimReducer, IdentityReducer, PcaReducer, TciOptions,
};
use lsdr_core::io::{column_names, read_csv_path, write_csv_path};
use lsdr_core::pipeline::generate;
use lsdr_core::pipeline::Fallback;
use lsdr_core::{lsdr, DatasetSpec, Family, IndexReport, LsdrReducer, Matrix};

use crate::args::{Algo, GenerateArgs, GlobalArgs, IndexAlgo, IndexArgs, ReduceArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::plot::{gnuplot_script, plot_table};

fn read_points(path: &Path) -> CliResult<Matrix> {
    Ok(read_csv_path(path).map_err(|e| CliError::at(path, e))?.data)
}

fn write_matrix(
    path: &Path,
    data: &Matrix,
    header: &[String],
    comments: &[String],
) -> CliResult<()> {
    write_csv_path(path, data, Some(header), comments).map_err(|e| CliError::at(path, e))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::at(path, e.into()))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn check_fallback(global: &GlobalArgs, fallback: Option<Fallback>) -> CliResult<()> {
    match fallback {
        Some(fb) if global.strict => Err(CliError::fallback(format!(
            "LSDR fell back to MDS on all points: {}",
            fb.describe()
        ))),
        Some(fb) => {
            warn!("LSDR fell back to MDS on all points: {}", fb.describe());
            Ok(())
        }
        None => Ok(()),
    }
}

/// Writes the dataset CSV; returns the manifest path.
pub fn run_generate(args: &GenerateArgs, m: &mut RunManifest) -> CliResult<PathBuf> {
    let family: Family = args.family.parse()?;
    let spec = DatasetSpec {
        family,
        n: args.n,
        p: args.p,
        noise: args.noise,
        clusters: args.clusters,
        separation: args.separation,
        gaps: args.gaps.clone(),
        turns: args.turns,
        seed: args.seed,
    };
    let data = generate(&spec)?;
    let p = data.points.cols();
    info!("generated {} x {p} {family} points", args.n);
    write_matrix(
        &args.out,
        &data.points,
        &column_names("x", p),
        &[format!(
            "family={family} n={} p={p} seed={}",
            args.n, args.seed
        )],
    )?;
    m.dataset = Some(serde_json::to_value(&spec)?);
    m.config = json!({ "family": family, "p": p, "noise": spec.noise() });
    m.outputs.push(args.out.clone());
    Ok(args
        .manifest
        .clone()
        .unwrap_or_else(|| args.out.with_extension("manifest.json")))
}

pub fn run_reduce(
    global: &GlobalArgs,
    args: &ReduceArgs,
    m: &mut RunManifest,
) -> CliResult<PathBuf> {
    let x = read_points(&args.input)?;
    let (n, p) = x.shape();
    m.input = Some(args.input.clone());
    if args.dump_graph && args.algo != Algo::Lsdr {
        return Err(CliError::usage("--dump-graph needs --algo lsdr"));
    }
    let prefix = match &args.prefix {
        Some(s) => s.clone(),
        None => match args.algo {
            Algo::Lsdr => "lsdr".to_string(),
            Algo::Pca => "pca".to_string(),
        },
    };
    std::fs::create_dir_all(&args.out_dir).map_err(|e| CliError::at(&args.out_dir, e.into()))?;
    let out = |suffix: &str| args.out_dir.join(format!("{prefix}_{suffix}"));

    let (y, skeletal) = match args.algo {
        Algo::Pca => {
            m.config = json!({ "algorithm": "pca", "d": args.d });
            (pca_reduce(&x, args.d)?.coords, Vec::new())
        }
        Algo::Lsdr => {
            let cfg = args.lsdr.config(args.d, args.seed);
            m.config = serde_json::to_value(&cfg)?;
            let res = lsdr(&x, &cfg)?;
            check_fallback(global, res.fallback)?;
            info!(
                "{} skeletal points, {} graph edges",
                res.skeleton.skeletal_points.len(),
                res.graph.edges.len()
            );
            let path = out("skeleton.json");
            write_text(&path, &(res.skeleton.to_json()? + "\n"))?;
            m.outputs.push(path);
            if args.dump_graph {
                let path = out("graph.txt");
                write_text(&path, &res.graph.to_edge_list())?;
                m.outputs.push(path);
            }
            let skeletal = if res.fallback.is_some() {
                Vec::new()
            } else {
                res.skeleton.skeletal_points.clone()
            };
            (res.embedding.coords, skeletal)
        }
    };
    let d = y.cols();

    let path = out("embedding.csv");
    write_matrix(
        &path,
        &y,
        &column_names("y", d),
        &[format!(
            "algorithm={prefix} input={} n={n} p={p} d={d} seed={}",
            file_name(&args.input),
            args.seed
        )],
    )?;
    m.outputs.push(path);

    let (table, header) = plot_table(&x, &y, &skeletal);
    let data_path = out("plot.csv");
    write_matrix(&data_path, &table, &header, &[])?;
    let script_path = out("plot.gp");
    let script = gnuplot_script(
        &file_name(&data_path),
        &format!("{prefix}_plot.png"),
        p,
        d,
        &format!("{prefix}: {}", file_name(&args.input)),
    );
    write_text(&script_path, &script)?;
    m.outputs.push(data_path);
    m.outputs.push(script_path);
    Ok(out("manifest.json"))
}

pub fn run_index(global: &GlobalArgs, args: &IndexArgs, m: &mut RunManifest) -> CliResult<PathBuf> {
    if !(args.ti || args.tci || args.knn.is_some()) {
        return Err(CliError::usage(
            "nothing to compute; pass --ti, --tci or --knn",
        ));
    }
    let x = read_points(&args.input)?;
    let (n, p) = x.shape();
    m.input = Some(args.input.clone());

    let mut lsdr_bandwidth = None;
    let (name, y, reducer): (String, Matrix, Option<Box<dyn DimReducer>>) =
        match (&args.embedding, args.algo) {
            (Some(path), _) => {
                let y = read_points(path)?;
                if y.rows() != n {
                    return Err(CliError::usage(format!(
                        "embedding has {} rows but the input has {n}",
                        y.rows()
                    )));
                }
                if args.d.is_some_and(|d| d != y.cols()) {
                    return Err(CliError::usage("--d disagrees with the embedding width"));
                }
                ("embedding".into(), y, None)
            }
            (None, None) => {
                return Err(CliError::usage("pass --algo or --embedding"));
            }
            (None, Some(IndexAlgo::Identity)) => {
                if args.d.is_some_and(|d| d != p) {
                    return Err(CliError::usage(format!("identity needs d = p = {p}")));
                }
                (
                    "identity".into(),
                    x.clone(),
                    Some(Box::new(IdentityReducer)),
                )
            }
            (None, Some(IndexAlgo::Pca)) => {
                let d = args.d.unwrap_or(p);
                (
                    "pca".into(),
                    pca_reduce(&x, d)?.coords,
                    Some(Box::new(PcaReducer)),
                )
            }
            (None, Some(IndexAlgo::Lsdr)) => {
                let d = args
                    .d
                    .ok_or_else(|| CliError::usage("--d is required for --algo lsdr"))?;
                let cfg = args.lsdr.config(d, args.seed);
                m.config = json!({ "lsdr": cfg });
                let res = lsdr(&x, &cfg)?;
                check_fallback(global, res.fallback)?;
                lsdr_bandwidth = res.bandwidth;
                (
                    "lsdr".into(),
                    res.embedding.coords,
                    Some(Box::new(LsdrReducer::new(cfg))),
                )
            }
        };
    let d = y.cols();
    let mut report = IndexReport::new(name.clone(), dataset_name(&args.input), n, p, d);

    if args.ti {
        let ti = match &reducer {
            None if d == p => trustability_from(&x, &y)?,
            None => {
                return Err(CliError::usage(format!(
                    "the trustability index needs a {p}-column embedding"
                )))
            }
            Some(_) if name == "lsdr" => {
                return Err(CliError::usage(
                    "the trustability index needs d = p, which LSDR does not produce",
                ))
            }
            Some(r) => trustability_index(r.as_ref(), &x)?,
        };
        report = report.with_ti(ti);
    }

    let mut tci_settings = serde_json::Value::Null;
    if args.tci {
        let r = reducer
            .as_ref()
            .ok_or_else(|| CliError::usage("the consistency index needs --algo"))?;
        let bandwidth = args
            .tci_bandwidth
            .or(lsdr_bandwidth)
            .unwrap_or_else(|| nearest_neighbour_scale(&x));
        let mut opts = TciOptions::new(d, bandwidth);
        opts.subsample = Some(args.transforms);
        opts.seed = args.seed;
        tci_settings = json!({
            "d": d,
            "bandwidth": bandwidth,
            "transforms": args.transforms,
            "seed": args.seed,
        });
        let tci = tractable_consistency_index(r.as_ref(), &x, &opts).map_err(|e| {
            let mut err = CliError::from(e);
            err.message = format!("consistency index: {}", err.message);
            err
        })?;
        if tci.transforms_failed > 0 {
            warn!("{} transforms failed", tci.transforms_failed);
        }
        report.tci = Some(tci);
    }

    if let Some(k) = args.knn {
        report.knn = Some(knn_metrics(&x, &y, k)?);
    }

    let mut config = match m.config.take() {
        serde_json::Value::Object(o) => o,
        _ => serde_json::Map::new(),
    };
    config.insert("algorithm".into(), json!(name));
    config.insert("d".into(), json!(d));
    config.insert("ti".into(), json!(args.ti));
    config.insert("tci".into(), tci_settings);
    config.insert("knn".into(), json!(args.knn));
    m.config = serde_json::Value::Object(config);

    let prefix = args.prefix.clone().unwrap_or(name);
    std::fs::create_dir_all(&args.out_dir).map_err(|e| CliError::at(&args.out_dir, e.into()))?;
    let out = |suffix: &str| args.out_dir.join(format!("{prefix}_{suffix}"));
    let json_path = out("index.json");
    write_text(&json_path, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    let csv_path = out("index.csv");
    write_text(
        &csv_path,
        &format!("{}\n{}\n", IndexReport::CSV_HEADER, report.csv_row()),
    )?;
    m.outputs.push(json_path);
    m.outputs.push(csv_path);
    Ok(out("index_manifest.json"))
}
