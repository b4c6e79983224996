use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use hardest::coco::{
    annotations_to_coco, detections_to_coco, load_annotations, load_detections,
    validate_class_scores,
};
use hardest::estimators::{estimate_dataset, HardnessReport, Method, SamplerConfig};
use hardest::matching::{match_detections, MatchConfig};
use hardest::metrics::{
    confidence_histogram, correlation_matrix, cumulative_hardness_curve, hardness_histogram,
    mauroc, ndcg, sensitivity_sweep, variance_histogram,
};
use hardest::model::{apply_class_remap, filter_positive, IngestMode};
use hardest::query::{parse_query, parse_query_file, standard_queries, BoundQuery};
use hardest::synth::{generate, SynthConfig};
use hardest::{ClassRemap, Dataset, ScoreMode};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{num, opt, write_tables, Table};

fn load_dataset(input: &InputArgs) -> Result<Dataset> {
    ensure!(
        (0.0..=1.0).contains(&input.floor),
        "score floor {} outside [0, 1]",
        input.floor
    );
    let mut dataset = match (&input.annotations, &input.images) {
        (Some(path), _) => load_annotations(path)?,
        (None, Some(path)) => load_annotations(path)?.without_ground_truth(),
        (None, None) => bail!("image metadata required: pass --annotations or --images"),
    };
    dataset.score_mode = input.score_mode;
    let pools = load_detections(&input.detections, input.floor)?;
    let mode = if input.lenient {
        IngestMode::Lenient
    } else {
        IngestMode::Strict
    };
    dataset
        .attach_detections(pools, mode)
        .with_context(|| format!("loading {}", input.detections.display()))?;
    if dataset.score_mode == ScoreMode::Softmax {
        validate_class_scores(&dataset)?;
    }
    if let Some(remap) = &input.remap {
        let remap = if remap.eq_ignore_ascii_case("nuimages") {
            ClassRemap::nuimages_two_class()
        } else {
            let text = std::fs::read_to_string(remap)
                .with_context(|| format!("cannot read remap file {remap}"))?;
            ClassRemap::from_json_str(&text)?
        };
        dataset = apply_class_remap(&dataset, &remap)?;
    }
    log::info!("loaded {} images", dataset.images.len());
    Ok(dataset)
}

fn require_annotations(dataset: &Dataset, command: &str) -> Result<()> {
    ensure!(
        dataset.has_ground_truth(),
        "`{command}` requires ground truth: pass --annotations"
    );
    Ok(())
}

fn load_queries(args: &QueryArgs, dataset: &Dataset) -> Result<Vec<(String, BoundQuery)>> {
    let mut parsed = Vec::new();
    for text in &args.query {
        let expr = parse_query(text).with_context(|| format!("in query `{text}`"))?;
        parsed.push((text.trim().to_string(), expr));
    }
    if let Some(path) = &args.query_file {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read query file {}", path.display()))?;
        let named = parse_query_file(&text).with_context(|| format!("in {}", path.display()))?;
        parsed.extend(named.into_iter().map(|q| (q.name, q.expr)));
    }
    if parsed.is_empty() {
        parsed = standard_queries();
    }
    parsed
        .into_iter()
        .map(|(name, expr)| {
            let bound = expr
                .bind(&dataset.classes)
                .with_context(|| format!("in query `{name}`"))?;
            Ok((name, bound))
        })
        .collect()
}

fn sampler_config(args: &SamplerArgs) -> SamplerConfig {
    SamplerConfig {
        num_samples: args.samples,
        eta: args.eta,
        seed: args.seed,
        matching: MatchConfig {
            tau: args.iou_threshold,
            matcher: args.matcher,
            crowd: args.crowd_policy,
        },
        clip_boxes: args.clip_boxes,
    }
}

fn echo(args: &impl Serialize) -> Result<Value> {
    Ok(serde_json::to_value(args)?)
}

fn truths(report: &HardnessReport) -> Result<Vec<(u64, f64)>> {
    report
        .truths()
        .context("ground-truth hardness missing from report")
}

pub fn rank(args: &RankArgs) -> Result<()> {
    let dataset = load_dataset(&args.input)?;
    let queries = load_queries(&args.queries, &dataset)?;
    let config = sampler_config(&args.sampler);
    let reports = estimate_dataset(&dataset, &queries, args.method, &config)?;
    let with_gt = dataset.has_ground_truth();

    let mut report_table = Table::new(
        "report",
        &[
            "image_id", "method", "query_text", "estimate", "std_error", "gt_hardness", "N",
            "eta", "tau", "seed",
        ],
    );
    let mut rank_table = Table::new(
        "rank",
        &["query", "rank", "image_id", "estimate", "std_error", "gt"],
    );
    let mut hist_table = Table::new("histogram", &["query", "bin_lo", "bin_hi", "count"]);
    let mut hist_summary = Vec::new();
    let mut summary = Table::new("summary", &["query", "method", "ndcg", "dcg", "dcg_gt"]);
    let mut curve = Table::new("curve", &["query", "budget", "cumulative", "diagonal"]);

    for ((name, _), report) in queries.iter().zip(&reports) {
        for row in &report.rows {
            report_table.push(vec![
                row.image_id.to_string(),
                report.method.to_string(),
                report.query_text.clone(),
                num(row.estimate),
                opt(row.std_error),
                opt(row.gt_hardness),
                config.num_samples.to_string(),
                num(config.eta),
                num(config.matching.tau),
                config.seed.to_string(),
            ]);
        }
        let mut ordered: Vec<_> = report.rows.iter().collect();
        ordered.sort_by(|a, b| {
            b.estimate
                .total_cmp(&a.estimate)
                .then(a.image_id.cmp(&b.image_id))
        });
        for (i, row) in ordered.iter().enumerate() {
            rank_table.push(vec![
                name.clone(),
                (i + 1).to_string(),
                row.image_id.to_string(),
                num(row.estimate),
                opt(row.std_error),
                opt(row.gt_hardness),
            ]);
        }

        let values: Vec<f64> = report.rows.iter().map(|r| r.estimate).collect();
        let hist = hardness_histogram(&values, args.bins, args.integer_bins);
        for b in &hist.bins {
            hist_table.push(vec![name.clone(), num(b.lo), num(b.hi), b.count.to_string()]);
        }
        hist_summary.push(json!({
            "query": name,
            "zero_count": hist.zero_count,
            "total": hist.total,
            "mean": hist.mean,
        }));

        if with_gt {
            let est = report.estimates();
            let gt = truths(report)?;
            let r = ndcg(&est, &gt)?;
            summary.push(vec![
                name.clone(),
                report.method.to_string(),
                num(r.ndcg),
                num(r.dcg),
                num(r.dcg_gt),
            ]);
            for p in cumulative_hardness_curve(&est, &gt)? {
                curve.push(vec![
                    name.clone(),
                    p.budget.to_string(),
                    num(p.cumulative),
                    num(p.diagonal),
                ]);
            }
        }
    }
    hist_table.extra = Value::Array(hist_summary);

    let mut tables = vec![report_table, rank_table, hist_table];
    if with_gt {
        tables.push(summary);
        tables.push(curve);
    }
    write_tables(&args.output.output_dir, "rank", &echo(args)?, &tables)
}

fn ratio_label(r: f64) -> String {
    format!("auroc_{r}")
}

pub fn classify(args: &ClassifyArgs) -> Result<()> {
    let dataset = load_dataset(&args.input)?;
    require_annotations(&dataset, "classify")?;
    let queries = load_queries(&args.queries, &dataset)?;
    let config = sampler_config(&args.sampler);
    let reports = estimate_dataset(&dataset, &queries, args.method, &config)?;

    let mut header = vec!["query".to_string(), "method".to_string()];
    header.extend(args.hard_ratios.iter().map(|&r| ratio_label(r)));
    header.push("mauroc".into());
    let mut table = Table::with_header("classify", header);
    let mut thresholds = Table::new(
        "thresholds",
        &["query", "ratio", "t_hard", "num_hard", "num_images", "auroc"],
    );

    for ((name, _), report) in queries.iter().zip(&reports) {
        let result = mauroc(&report.estimates(), &truths(report)?, &args.hard_ratios)?;
        let mut row = vec![name.clone(), report.method.to_string()];
        for c in &result.per_ratio {
            row.push(opt(c.auroc));
            thresholds.push(vec![
                name.clone(),
                num(c.ratio),
                num(c.t_hard),
                c.num_hard.to_string(),
                report.rows.len().to_string(),
                opt(c.auroc),
            ]);
        }
        row.push(opt(result.mauroc));
        table.push(row);
    }
    write_tables(&args.output.output_dir, "classify", &echo(args)?, &[table, thresholds])
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let dataset = load_dataset(&args.input)?;
    require_annotations(&dataset, "evaluate")?;
    let queries = load_queries(&args.queries, &dataset)?;
    let config = sampler_config(&args.sampler);
    let methods = [Method::Ss, Method::Entropy, Method::Ds];

    let mut ndcg_table = Table::new("ndcg", &["query", "ss", "entropy", "ds"]);
    let mut mauroc_table = Table::new("mauroc", &["query", "ss", "entropy", "ds"]);
    let per_method: Vec<Vec<HardnessReport>> = methods
        .iter()
        .map(|&m| estimate_dataset(&dataset, &queries, m, &config))
        .collect::<hardest::Result<_>>()?;

    for (i, (name, _)) in queries.iter().enumerate() {
        let mut n_row = vec![name.clone()];
        let mut m_row = vec![name.clone()];
        for reports in &per_method {
            let est = reports[i].estimates();
            let gt = truths(&reports[i])?;
            n_row.push(num(ndcg(&est, &gt)?.ndcg));
            m_row.push(opt(mauroc(&est, &gt, &args.hard_ratios)?.mauroc));
        }
        ndcg_table.push(n_row);
        mauroc_table.push(m_row);
    }
    write_tables(
        &args.output.output_dir,
        "evaluate",
        &echo(args)?,
        &[ndcg_table, mauroc_table],
    )
}

pub fn correlate(args: &CorrelateArgs) -> Result<()> {
    let dataset = load_dataset(&args.input)?;
    let queries = load_queries(&args.queries, &dataset)?;
    ensure!(queries.len() >= 2, "`correlate` needs at least two queries");
    let config = sampler_config(&args.sampler);
    let reports = estimate_dataset(&dataset, &queries, args.method, &config)?;
    let columns: Vec<Vec<f64>> = reports
        .iter()
        .map(|r| r.rows.iter().map(|row| row.estimate).collect())
        .collect();
    let matrix = correlation_matrix(&columns);

    let mut header = vec!["query".to_string()];
    header.extend(queries.iter().map(|(n, _)| n.clone()));
    let mut table = Table::with_header("correlation", header);
    for ((name, _), row) in queries.iter().zip(&matrix) {
        let mut out = vec![name.clone()];
        out.extend(row.iter().map(|&v| opt(v)));
        table.push(out);
    }
    write_tables(&args.output.output_dir, "correlate", &echo(args)?, &[table])
}

pub fn sensitivity(args: &SensitivityArgs) -> Result<()> {
    let dataset = load_dataset(&args.input)?;
    require_annotations(&dataset, "sensitivity")?;
    let queries = load_queries(&args.queries, &dataset)?;
    let config = sampler_config(&args.sampler);
    let mut table = Table::new(
        "sensitivity",
        &[
            "query", "num_samples", "repeats", "ndcg_mean", "ndcg_std", "mauroc_mean",
            "estimate_std",
        ],
    );
    for query in &queries {
        let rows = sensitivity_sweep(
            &dataset,
            query,
            &config,
            &args.sample_counts,
            args.repeats,
            &args.hard_ratios,
        )?;
        for r in rows {
            table.push(vec![
                query.0.clone(),
                r.num_samples.to_string(),
                r.repeats.to_string(),
                opt(r.ndcg_mean),
                opt(r.ndcg_std),
                opt(r.mauroc_mean),
                num(r.estimate_std),
            ]);
        }
    }
    write_tables(&args.output.output_dir, "sensitivity", &echo(args)?, &[table])
}

pub fn diagnostics(args: &DiagnosticsArgs) -> Result<()> {
    let dataset = load_dataset(&args.input)?;
    let config = sampler_config(&args.sampler);
    let mut tables = Vec::new();

    let mut variance = Table::new("variance", &["bin_lo", "bin_hi", "count"]);
    for b in variance_histogram(&dataset, args.bins) {
        variance.push(vec![num(b.lo), num(b.hi), b.count.to_string()]);
    }
    tables.push(variance);

    if dataset.has_ground_truth() {
        let mut confidence = Table::new("confidence", &["bin_lo", "bin_hi", "count", "precision"]);
        for b in confidence_histogram(&dataset, config.eta, &config.matching, args.bins) {
            confidence.push(vec![num(b.lo), num(b.hi), b.count.to_string(), opt(b.precision)]);
        }
        tables.push(confidence);

        let queries = load_queries(&args.queries, &dataset)?;
        let reports = estimate_dataset(&dataset, &queries, Method::Gt, &config)?;
        let mut hardness = Table::new("hardness", &["query", "bin_lo", "bin_hi", "count"]);
        let mut summary = Vec::new();
        for ((name, _), report) in queries.iter().zip(&reports) {
            let values: Vec<f64> = report.rows.iter().map(|r| r.estimate).collect();
            let hist = hardness_histogram(&values, args.bins, args.integer_bins);
            for b in &hist.bins {
                hardness.push(vec![name.clone(), num(b.lo), num(b.hi), b.count.to_string()]);
            }
            summary.push(json!({
                "query": name,
                "zero_count": hist.zero_count,
                "total": hist.total,
                "mean": hist.mean,
            }));
        }
        hardness.extra = Value::Array(summary);
        tables.push(hardness);
    } else {
        log::info!("no annotations: skipping confidence and hardness histograms");
    }
    write_tables(&args.output.output_dir, "diagnostics", &echo(args)?, &tables)
}

pub fn matching(args: &MatchArgs) -> Result<()> {
    let dataset = load_dataset(&args.input)?;
    require_annotations(&dataset, "match")?;
    let config = sampler_config(&args.sampler);
    let class_name = |id| dataset.classes.name(id).unwrap_or("").to_string();
    let mut table = Table::new(
        "match",
        &["image_id", "kind", "det_index", "gt_index", "iou", "class"],
    );
    for image in &dataset.images {
        let positives = filter_positive(&image.detections, config.eta);
        let gts = image.ground_truths.as_deref().unwrap_or_default();
        let m = match_detections(&positives, gts, &config.matching);
        let id = image.image_id.to_string();
        for p in &m.tp_pairs {
            table.push(vec![
                id.clone(),
                "tp".into(),
                p.det.to_string(),
                p.gt.to_string(),
                num(p.iou),
                class_name(positives[p.det].class_id),
            ]);
        }
        for &d in &m.fp_indices {
            table.push(vec![
                id.clone(),
                "fp".into(),
                d.to_string(),
                String::new(),
                String::new(),
                class_name(positives[d].class_id),
            ]);
        }
        for &g in &m.fn_indices {
            table.push(vec![
                id.clone(),
                "fn".into(),
                String::new(),
                g.to_string(),
                String::new(),
                class_name(gts[g].class_id),
            ]);
        }
    }
    write_tables(&args.output.output_dir, "match", &echo(args)?, &[table])
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let path = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    serde_json::to_writer(&mut tmp, value)?;
    tmp.persist(&path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        num_images: args.num_images,
        seed: args.seed,
        max_detections: args.max_detections,
        num_classes: args.num_classes,
        jitter: args.jitter,
        miss_rate: args.miss_rate,
        binary_scores: args.binary_scores,
        ..Default::default()
    };
    let dataset = generate(&cfg)?;
    let dir = &args.output.output_dir;
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    write_json(dir, "annotations.json", &annotations_to_coco(&dataset))?;
    write_json(dir, "detections.json", &detections_to_coco(&dataset))?;
    write_json(dir, "synth.json", &cfg)?;
    Ok(())
}
