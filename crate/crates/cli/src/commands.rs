use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use platewise::dataprep::{kept_frames, prepare, Extent, PrepReport};
use platewise::evaluation::report::{
    consumed_detail_csv, importance_csv, importance_markdown, importance_svg, read_manual_csv, table2_csv,
    table2_markdown, table3, ManualEstimate, Table2Row, Table3,
};
use platewise::evaluation::{
    consumed_weight, kfold_evaluate, permutation_importance, view_angle_experiment, ConsumedWeight, EvalError,
    ImportanceReport, ViewAngleResult,
};
use platewise::features::table::{read_csv, write_csv, FeatureRow};
use platewise::features::{awr_samples, calibrate_awr, extract_frame, plate_aspect_ratio, AwrTable, FeatureError};
use platewise::regression::{Dataset, FeatureSubset, ModelKind, ModelSpec, TrainedModel};
use platewise::rng::sub_rng;
use platewise::session::{load_session, resolve_relative, Device, FrameEntry, MealSession, SessionManifest};
use platewise::synthgen::{generate_dataset, generate_sessions, generate_view_angle_data, reference_awr, write_sessions};

use crate::config::{AwrSource, PipelineConfig};
use crate::output::{Format, Header, Writer};
use crate::{
    Cli, Command, ConsumedArgs, ExtractArgs, ImportanceArgs, InvariantViolation, PrepArgs, SessionArgs, SynthArgs,
    SynthKind, TrainEvalArgs, ViewAngleArgs,
};

struct Ctx {
    cfg: PipelineConfig,
    formats: Vec<Format>,
    writer: Writer,
}

impl Ctx {
    fn formats_or(&self, default: &[Format]) -> Vec<Format> {
        if self.formats.is_empty() {
            default.to_vec()
        } else {
            self.formats.clone()
        }
    }
}

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = PipelineConfig::load(cli.config.as_deref())?.with_seed(cli.seed);
    let cfg = apply_flags(cfg, &cli.command)?;
    cfg.validate()?;
    let header = Header::new(cli.command.name(), &cfg, &cli.command, cfg.seed);
    let mut formats = cli.format.clone();
    formats.sort();
    formats.dedup();
    let mut ctx = Ctx { writer: Writer::new(&cli.out, header)?, cfg, formats };
    match &cli.command {
        Command::Prep(a) => cmd_prep(&mut ctx, a),
        Command::Extract(a) => cmd_extract(&mut ctx, a),
        Command::CalibrateAwr(a) => cmd_calibrate(&mut ctx, a),
        Command::TrainEval(a) => cmd_train_eval(&mut ctx, a),
        Command::Importance(a) => cmd_importance(&mut ctx, a),
        Command::ReportConsumed(a) => cmd_report_consumed(&mut ctx, a),
        Command::ViewAngle(a) => cmd_view_angle(&mut ctx, a),
        Command::Synth(a) => cmd_synth(&mut ctx, a),
    }?;
    for p in &ctx.writer.written {
        log::info!("wrote {}", p.display());
    }
    Ok(())
}

/// Folds command flags into the configuration so the header hash and the
/// run see the same values.
fn apply_flags(mut cfg: PipelineConfig, cmd: &Command) -> anyhow::Result<PipelineConfig> {
    match cmd {
        Command::Prep(a) => {
            if let Some(f) = a.np_threshold_frac {
                cfg.prep.np_threshold = Extent::Fraction(f);
            }
            if let Some(p) = a.np_threshold_px {
                cfg.prep.np_threshold = Extent::Pixels(p);
            }
            if let Some(f) = a.edge_width_frac {
                cfg.prep.edge_width = Extent::Fraction(f);
            }
            if let Some(p) = a.edge_width_px {
                cfg.prep.edge_width = Extent::Pixels(p);
            }
            if let Some(o) = a.edge_overlap {
                cfg.prep.edge_overlap_threshold = o;
            }
        }
        Command::Extract(ExtractArgs { awr: Some(p), .. }) | Command::ReportConsumed(ConsumedArgs { awr: Some(p), .. }) => {
            cfg.awr = AwrSource::File(p.clone());
        }
        Command::TrainEval(a) => {
            if !a.models.is_empty() {
                cfg.models = a.models.clone();
                cfg.specs.clear();
            }
            if !a.subsets.is_empty() {
                cfg.subsets = a.subsets.clone();
                cfg.specs.clear();
            }
            if let Some(k) = a.k {
                cfg.eval.k = k;
            }
            if let Some(e) = a.epsilon {
                cfg.eval.epsilon = e;
            }
            cfg.eval.group_by_session |= a.group_by_session;
        }
        Command::Importance(a) => {
            if let Some(m) = a.repeats {
                cfg.eval.m_repeats = m;
            }
            if let Some(e) = a.epsilon {
                cfg.eval.epsilon = e;
            }
        }
        Command::Synth(a) => {
            if let Some(n) = a.n {
                match a.kind {
                    SynthKind::Dataset => cfg.synth.dataset.n_samples = n,
                    SynthKind::Sessions => cfg.synth.sessions.n_sessions = n,
                    SynthKind::ViewAngle => cfg.synth.view_angle.n_samples = n,
                }
            }
            if let Some(s) = a.noise {
                cfg.synth.dataset.noise = s;
            }
        }
        _ => {}
    }
    Ok(cfg)
}

fn load_sessions(args: &SessionArgs) -> anyhow::Result<Vec<(PathBuf, MealSession)>> {
    let mut paths = args.manifests.clone();
    if let Some(dir) = &args.sessions_dir {
        let mut found: Vec<PathBuf> = std::fs::read_dir(dir)
            .with_context(|| format!("reading sessions directory {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path().join("manifest.json")))
            .filter(|p| p.is_file())
            .collect();
        found.sort();
        paths.extend(found);
    }
    ensure!(!paths.is_empty(), "no sessions given (use --manifest or --sessions-dir)");
    paths
        .into_iter()
        .map(|p| {
            let s = load_session(&p).with_context(|| format!("loading session {}", p.display()))?;
            Ok((p, s))
        })
        .collect()
}

fn resolve_awr(cfg: &PipelineConfig, sessions: &[(PathBuf, MealSession)]) -> anyhow::Result<AwrTable> {
    match &cfg.awr {
        AwrSource::File(p) => Ok(AwrTable::read(p)?),
        AwrSource::Calibrate => calibrate_from_sessions(cfg, sessions).map(|(t, _)| t),
    }
}

#[derive(Serialize)]
struct CalibrationEntry {
    food: String,
    awr_g_per_cm2: f64,
    samples: usize,
}

fn calibrate_from_sessions(
    cfg: &PipelineConfig,
    sessions: &[(PathBuf, MealSession)],
) -> anyhow::Result<(AwrTable, Vec<CalibrationEntry>)> {
    let mut samples = Vec::new();
    for (_, s) in sessions {
        let report = prepare(&s.frames, &cfg.prep)?;
        samples.extend(awr_samples(s, &kept_frames(&s.frames, &report), cfg.plate_diameter_cm));
    }
    ensure!(!samples.is_empty(), "no weighed food observations to calibrate from");
    let table = calibrate_awr(&samples).context("calibrating area-to-weight ratios")?;
    let entries = table
        .values
        .iter()
        .map(|(&food, &v)| CalibrationEntry {
            food: food.name().to_string(),
            awr_g_per_cm2: v,
            samples: samples.iter().filter(|s| s.food == food && s.area_cm2 > 0.0).count(),
        })
        .collect();
    Ok((table, entries))
}

fn check_partition(report: &PrepReport, n_frames: usize) -> anyhow::Result<()> {
    let total = report.kept.len() + report.dropped_no_container.len() + report.dropped_incomplete.len();
    if total != n_frames {
        return Err(InvariantViolation(format!("prep report covers {total} of {n_frames} frames")).into());
    }
    Ok(())
}

fn cmd_prep(ctx: &mut Ctx, a: &PrepArgs) -> anyhow::Result<()> {
    let session = load_session(&a.manifest).with_context(|| format!("loading session {}", a.manifest.display()))?;
    let report = prepare(&session.frames, &ctx.cfg.prep)?;
    check_partition(&report, session.frames.len())?;

    let csv = || {
        let mut s = String::from("frame,status,container_pixels,edge_overlap\n");
        for f in &report.frames {
            let status = if report.kept.contains(&f.index) {
                "kept"
            } else if report.dropped_no_container.contains(&f.index) {
                "no_container"
            } else {
                "incomplete"
            };
            let overlap = f.edge_overlap.map_or(String::new(), |o| o.to_string());
            s += &format!("{},{status},{},{overlap}\n", f.index, f.container_pixels);
        }
        s
    };
    let md = || {
        format!(
            "| Frames | Kept | No container | Clipped |\n|---|---|---|---|\n| {} | {} | {} | {} |\n",
            session.frames.len(),
            report.kept.len(),
            report.dropped_no_container.len(),
            report.dropped_incomplete.len()
        )
    };
    let formats = ctx.formats_or(&[Format::Json]);
    ctx.writer.report("prep_report", &formats, csv, md, &report)?;

    // Filtered manifest; mask paths are made absolute so it can live anywhere.
    let manifest = SessionManifest::read(&a.manifest)?;
    let frames = manifest
        .frames
        .iter()
        .filter(|f| report.is_kept(f.index))
        .map(|f| {
            let path = resolve_relative(&a.manifest, &f.mask);
            let abs = path.canonicalize().with_context(|| format!("resolving {}", path.display()))?;
            Ok(FrameEntry { mask: abs, ..f.clone() })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let kept = SessionManifest { frames, ..manifest };
    let path = ctx.writer.out.join("manifest.kept.json");
    kept.write(&path)?;
    ctx.writer.written.push(path);
    Ok(())
}

fn cmd_extract(ctx: &mut Ctx, a: &ExtractArgs) -> anyhow::Result<()> {
    let sessions = load_sessions(&a.sessions)?;
    let awr = resolve_awr(&ctx.cfg, &sessions)?;
    let mut rows = Vec::new();
    for (_, s) in &sessions {
        let report = prepare(&s.frames, &ctx.cfg.prep)?;
        for frame in kept_frames(&s.frames, &report) {
            let observations = match extract_frame(frame, &awr) {
                Ok(o) => o,
                Err(e @ FeatureError::DegeneratePlate { .. }) => {
                    log::warn!("session {}: frame {} skipped: {e}", s.session_id, frame.frame_index);
                    continue;
                }
                Err(e) => {
                    return Err(e).with_context(|| format!("session {} frame {}", s.session_id, frame.frame_index))
                }
            };
            for o in observations {
                rows.push(FeatureRow {
                    session: s.session_id.clone(),
                    frame: frame.frame_index,
                    food: o.food,
                    features: o.features,
                    weight_g: s.ground_truth(o.food, frame.phase),
                });
            }
        }
    }
    ensure!(!rows.is_empty(), "no food observations in the kept frames");
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows)?;
    ctx.writer.csv("features.csv", &String::from_utf8(buf)?)?;
    ctx.writer.raw("awr.json", &awr.to_json())?;
    Ok(())
}

fn cmd_calibrate(ctx: &mut Ctx, a: &SessionArgs) -> anyhow::Result<()> {
    let sessions = load_sessions(a)?;
    let (table, entries) = calibrate_from_sessions(&ctx.cfg, &sessions)?;
    ctx.writer.raw("awr.json", &table.to_json())?;
    let csv = || {
        let mut s = String::from("food,awr_g_per_cm2,samples\n");
        for e in &entries {
            s += &format!("{},{:.6},{}\n", e.food, e.awr_g_per_cm2, e.samples);
        }
        s
    };
    let md = || {
        let mut s = String::from("| Food | AWR (g/cm²) | Samples |\n|---|---|---|\n");
        for e in &entries {
            s += &format!("| {} | {:.3} | {} |\n", e.food, e.awr_g_per_cm2, e.samples);
        }
        s
    };
    let formats = ctx.formats_or(&[Format::Csv]);
    ctx.writer.report("awr_report", &formats, csv, md, &entries)
}

fn read_features(path: &Path) -> anyhow::Result<Vec<FeatureRow>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_csv(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn read_dataset(path: &Path) -> anyhow::Result<Dataset> {
    let rows = read_features(path)?;
    Dataset::from_rows(&rows).with_context(|| format!("{}: feature table needs a weight_g column", path.display()))
}

fn parse_subset(s: &str) -> anyhow::Result<FeatureSubset> {
    FeatureSubset::parse(s).with_context(|| format!("unknown feature subset `{s}` (frr, frr-ft, full)"))
}

fn subset_slug(s: &FeatureSubset) -> String {
    match s {
        FeatureSubset::Frr => "frr".into(),
        FeatureSubset::FrrFt => "frr-ft".into(),
        FeatureSubset::Full => "full".into(),
        FeatureSubset::Columns(c) => format!("cols{}", c.iter().map(|i| format!("-{i}")).collect::<String>()),
    }
}

fn model_specs(cfg: &PipelineConfig) -> anyhow::Result<Vec<ModelSpec>> {
    if !cfg.specs.is_empty() {
        return Ok(cfg.specs.clone());
    }
    let mut specs = Vec::new();
    for s in &cfg.subsets {
        let subset = parse_subset(s)?;
        for m in &cfg.models {
            let spec = ModelSpec::from_short_name(m, subset.clone(), cfg.seed)
                .with_context(|| format!("unknown model `{m}` (rf, et, gb, mlp, svr, dt, ensemble)"))?;
            specs.push(spec);
        }
    }
    Ok(specs)
}

fn check_row(row: &Table2Row) -> anyhow::Result<()> {
    let finite = [row.mae, row.rmse, row.accuracy_pct].iter().all(|v| v.is_finite());
    if !finite || !(0.0..=100.0).contains(&row.accuracy_pct) || row.mae > row.rmse + 1e-9 {
        return Err(InvariantViolation(format!("implausible metrics for {} / {}", row.classifier, row.features)).into());
    }
    Ok(())
}

fn cmd_train_eval(ctx: &mut Ctx, a: &TrainEvalArgs) -> anyhow::Result<()> {
    let data = read_dataset(&a.features)?;
    let design = data.design();
    let specs = model_specs(&ctx.cfg)?;
    let mut rows = Vec::with_capacity(specs.len() + 1);
    for spec in &specs {
        log::info!("cross-validating {spec}");
        let cv = kfold_evaluate(&design, spec, &ctx.cfg.eval).with_context(|| format!("evaluating {spec}"))?;
        let row = Table2Row::from_cv(spec, &cv);
        check_row(&row)?;
        rows.push(row);
    }
    let baseline = ModelSpec::new(ModelKind::MedianBaseline, FeatureSubset::FrrFt, ctx.cfg.seed);
    let cv = kfold_evaluate(&design, &baseline, &ctx.cfg.eval)?;
    let mut row = Table2Row::from_cv(&baseline, &cv);
    row.features = "FT".into();
    row.n_features = platewise::category::FOOD_COUNT;
    check_row(&row)?;
    rows.push(row);

    let formats = ctx.formats_or(&[Format::Csv, Format::Md]);
    ctx.writer.report("table2", &formats, || table2_csv(&rows), || table2_markdown(&rows), &rows)?;

    if let Some(dir) = &a.save_models {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for spec in specs.iter().chain([&baseline]) {
            let model = platewise::regression::fit(spec, &data).with_context(|| format!("fitting {spec}"))?;
            let path = dir.join(format!("{}_{}.json", spec.kind.short_name(), subset_slug(&spec.feature_subset)));
            model.save(&path)?;
            ctx.writer.written.push(path);
        }
    }
    Ok(())
}

fn cmd_importance(ctx: &mut Ctx, a: &ImportanceArgs) -> anyhow::Result<()> {
    ensure!(
        a.test_fraction > 0.0 && a.test_fraction < 1.0,
        "--test-fraction must be in (0, 1), got {}",
        a.test_fraction
    );
    let data = read_dataset(&a.features)?;
    let mut design = data.design();
    let seed = ctx.cfg.seed;
    let mut subset = parse_subset(&a.subset)?;
    if a.noise_feature {
        let mut rng = sub_rng(seed, &[0x4015e]);
        let noise: Vec<f64> = (0..design.n_rows()).map(|_| rng.random::<f64>()).collect();
        design = design.with_column(&noise)?;
        let mut cols = subset.indices();
        cols.push(design.n_cols() - 1);
        subset = FeatureSubset::Columns(cols);
    }
    let spec = ModelSpec::from_short_name(&a.model, subset, seed).with_context(|| format!("unknown model `{}`", a.model))?;
    let mut order: Vec<usize> = (0..design.n_rows()).collect();
    order.shuffle(&mut sub_rng(seed, &[0x5117]));
    let n_test = ((design.n_rows() as f64 * a.test_fraction).round() as usize).clamp(1, design.n_rows() - 1);
    let (mut test_idx, mut train_idx) = (order[..n_test].to_vec(), order[n_test..].to_vec());
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    let train = design.select(&train_idx);
    let test = design.select(&test_idx);
    let model = platewise::regression::fit_design(&spec, &train).with_context(|| format!("fitting {spec}"))?;

    let formats = ctx.formats_or(&[Format::Csv, Format::Md]);
    for (name, split) in [("test", &test), ("train", &train)] {
        let report = permutation_importance(&model, split, &ctx.cfg.eval)?;
        check_importance(&report)?;
        let stem = format!("importance_{name}");
        ctx.writer.report(&stem, &formats, || importance_csv(&report), || importance_markdown(&report), &report)?;
        let title = format!("{} permutation importance ({name} split)", spec.label());
        ctx.writer.raw(&format!("{stem}.svg"), &importance_svg(&report, &title))?;
    }
    Ok(())
}

fn check_importance(report: &ImportanceReport) -> anyhow::Result<()> {
    let shares: f64 = report.features.iter().filter_map(|f| f.share_pct).sum();
    let any_positive = report.features.iter().any(|f| f.share_pct.is_some());
    if any_positive && (shares - 100.0).abs() > 1e-6 {
        return Err(InvariantViolation(format!("importance shares sum to {shares}")).into());
    }
    Ok(())
}

#[derive(Serialize)]
struct SkippedSession {
    session: String,
    reason: String,
}

#[derive(Serialize)]
struct ConsumedReport<'a> {
    table3: &'a Table3,
    results: &'a [ConsumedWeight],
    skipped: &'a [SkippedSession],
}

fn cmd_report_consumed(ctx: &mut Ctx, a: &ConsumedArgs) -> anyhow::Result<()> {
    let model = TrainedModel::load(&a.model).with_context(|| format!("loading model {}", a.model.display()))?;
    let sessions = load_sessions(&a.sessions)?;
    let awr = resolve_awr(&ctx.cfg, &sessions)?;
    let manual: Vec<ManualEstimate> = match &a.manual {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            read_manual_csv(BufReader::new(f)).with_context(|| format!("reading {}", p.display()))?
        }
        None => Vec::new(),
    };
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for (_, s) in &sessions {
        match consumed_weight(s, &model, &ctx.cfg.prep, &awr) {
            Ok(r) => results.extend(r),
            Err(e @ EvalError::NoUsableFrames(_)) => {
                log::warn!("session {}: {e}", s.session_id);
                skipped.push(SkippedSession { session: s.session_id.clone(), reason: e.to_string() });
            }
            Err(e) => return Err(e).with_context(|| format!("session {}", s.session_id)),
        }
    }
    let t3 = table3(&results, &manual);
    let formats = ctx.formats_or(&[Format::Csv, Format::Md]);
    let body = ConsumedReport { table3: &t3, results: &results, skipped: &skipped };
    ctx.writer.report("table3", &formats, || t3.to_csv(), || t3.to_markdown(), &body)?;
    ctx.writer.csv("consumed_detail.csv", &consumed_detail_csv(&results))?;
    Ok(())
}

fn read_view_angle_csv(path: &Path) -> anyhow::Result<Vec<(f64, Device)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    ensure!(header == ["par", "device"], "{}: expected header par,device", path.display());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let par: f64 = rec[0]
            .parse()
            .ok()
            .filter(|p: &f64| p.is_finite())
            .with_context(|| format!("{} line {line}: bad par `{}`", path.display(), &rec[0]))?;
        let device = Device::parse(&rec[1])
            .with_context(|| format!("{} line {line}: unknown device `{}`", path.display(), &rec[1]))?;
        out.push((par, device));
    }
    Ok(out)
}

fn view_angle_csv(data: &[(f64, Device)]) -> String {
    let mut s = String::from("par,device\n");
    for (p, d) in data {
        s += &format!("{p},{d}\n");
    }
    s
}

fn cmd_view_angle(ctx: &mut Ctx, a: &ViewAngleArgs) -> anyhow::Result<()> {
    let mut data = Vec::new();
    if let Some(p) = &a.data {
        data = read_view_angle_csv(p)?;
    }
    if !a.sessions.manifests.is_empty() || a.sessions.sessions_dir.is_some() {
        for (_, s) in load_sessions(&a.sessions)? {
            let report = prepare(&s.frames, &ctx.cfg.prep)?;
            for f in kept_frames(&s.frames, &report) {
                match plate_aspect_ratio(&f.mask) {
                    Ok(g) => data.push((g.par(), f.device)),
                    Err(e) => log::warn!("session {}: frame {} skipped: {e}", s.session_id, f.frame_index),
                }
            }
        }
    }
    if data.is_empty() {
        bail!("no data (use --data or session manifests)");
    }
    let result: ViewAngleResult = view_angle_experiment(&data, ctx.cfg.seed)?;
    let csv = || format!("accuracy,n_train,n_test\n{:.6},{},{}\n", result.accuracy, result.n_train, result.n_test);
    let md = || {
        format!(
            "| Accuracy (%) | Train | Test |\n|---|---|---|\n| {:.2} | {} | {} |\n",
            100.0 * result.accuracy,
            result.n_train,
            result.n_test
        )
    };
    let formats = ctx.formats_or(&[Format::Json]);
    ctx.writer.report("view_angle", &formats, csv, md, &result)
}

fn cmd_synth(ctx: &mut Ctx, a: &SynthArgs) -> anyhow::Result<()> {
    let true_awr = AwrTable::configured(reference_awr())?;
    match a.kind {
        SynthKind::Dataset => {
            let cfg = &ctx.cfg.synth.dataset;
            let synth = generate_dataset(cfg)?;
            let mut rows = Vec::with_capacity(synth.dataset.len());
            let mut samples = synth.dataset.samples.iter();
            for t in &synth.truths {
                for s in samples.by_ref().take(t.foods.len()) {
                    rows.push(FeatureRow {
                        session: s.session_id.clone(),
                        frame: t.frame_index,
                        food: s.food,
                        features: s.features,
                        weight_g: Some(s.weight_g),
                    });
                }
            }
            let mut buf = Vec::new();
            write_csv(&mut buf, &rows)?;
            ctx.writer.csv("features.csv", &String::from_utf8(buf)?)?;
            ctx.writer.json("truth.json", &synth.truths)?;
        }
        SynthKind::Sessions => {
            let sessions = generate_sessions(&ctx.cfg.synth.sessions)?;
            let dir = ctx.writer.out.join("sessions");
            let paths = write_sessions(&sessions, &dir)?;
            ctx.writer.written.extend(paths);
            let mut s = String::from("session,food,estimated_consumed_g,assessor\n");
            for (_, t) in &sessions {
                for f in &t.foods {
                    s += &format!("{},{},{},truth\n", t.session_id, f.food.name(), f.consumed_g);
                }
            }
            ctx.writer.csv("consumed_truth.csv", &s)?;
        }
        SynthKind::ViewAngle => {
            let v = &ctx.cfg.synth.view_angle;
            let data = generate_view_angle_data(v.n_samples, v.aim_tilt_deg, v.ebutton_tilt_deg, ctx.cfg.seed)?;
            ctx.writer.csv("view_angle.csv", &view_angle_csv(&data))?;
        }
    }
    ctx.writer.raw("awr_true.json", &true_awr.to_json())?;
    Ok(())
}
