use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use oncosim::agents::{
    restrict_actions, EpsilonSchedule, NccnRegimens, DEFAULT_MIN_COUNT, DEFAULT_NCCN_REGIMENS,
};
use oncosim::analysis::{
    compare, courses_from_periods, courses_from_trajectories, frequency_timing_matrix,
    line_frequencies, survival_summary, write_heatmap, write_lines, Comparison, SurvivalSample,
    SurvivalSummary, DEFAULT_INTERVAL_MONTHS, DEFAULT_MAX_LINES,
};
use oncosim::data_pipeline::{
    build_treatment_periods, empirical_distributions, filter_cohort, read_clinical,
    read_drug_lines, read_periods, standardize_lines, write_clinical, write_drug_lines,
    write_periods, ClinicalRecord, DrugCombination, EmpiricalDemographics, FilterReport,
    StandardizationReport, StandardizationTable, UnknownDrugPolicy,
};
use oncosim::mdp_env::{ActionSet, Dynamics, Environment, TrajectoryRecord, DEFAULT_HORIZON_CAP};
use oncosim::survival::{fit_death_model, fit_recurrence_model, CoxModel};
use oncosim::synth::{generate_cohort, GroundTruth};
use oncosim::trainer::{
    build_agent, evaluate_parallel, read_metrics, AgentKind, FileSink, TrainCheckpoint,
    TrainConfig, Trainer, CHECKPOINT_DIR, DEFAULT_CHECKPOINT_PERIOD, DEFAULT_FLUSH_EVERY,
    DEFAULT_WINDOW, FINAL_CHECKPOINT_FILE, METRICS_FILE, TRAJECTORIES_FILE,
};
use oncosim::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::config::{ConfigFile, Resolver};
use crate::manifest::{io_err, OutputDir, RunManifest};
use crate::{Cli, Command, EvaluateArgs, FitArgs, IngestArgs, ReportArgs, SynthArgs, TrainArgs};

pub const RUN_CONFIG_FILE: &str = "run_config.json";
pub const SAMPLE_FILE: &str = "survival_sample.json";

struct Globals {
    seed: Option<u64>,
    force: bool,
    out: Option<PathBuf>,
}

impl Globals {
    fn out_dir(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let file = ConfigFile::load(cli.config.as_deref())?;
    let g = Globals {
        seed: cli.seed,
        force: cli.force,
        out: cli.out,
    };
    let mut r = Resolver::new(&file);
    match cli.command {
        Command::Synth(a) => synth(&g, &mut r, a),
        Command::Ingest(a) => ingest(&g, &mut r, a),
        Command::Fit(a) => fit(&g, &mut r, a),
        Command::Train(a) => train(&g, &mut r, a),
        Command::Evaluate(a) => evaluate(&g, &mut r, a),
        Command::Report(a) => report(&g, &mut r, a),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| io_err(path, e))
}

fn label(path: &Path) -> String {
    path.display().to_string()
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(open(path)?)?)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn synth(g: &Globals, r: &mut Resolver, a: SynthArgs) -> Result<()> {
    let seed = r.get("seed", g.seed, 0)?;
    let n = r.get("patients", a.patients, 500usize)?;
    if n < 1 {
        return Err(Error::Config("patients must be >= 1".into()));
    }
    let files = ["clinical.csv", "drug_lines.csv", "ground_truth.json"];
    let out = OutputDir::prepare(&g.out_dir("synth"), &files, g.force)?;
    let manifest = RunManifest::begin("synth", Some(seed), &[])?;
    let cohort = generate_cohort(seed, n, &GroundTruth::default())?;
    out.write(files[0], &csv_bytes(|w| write_clinical(w, &cohort.clinical))?)?;
    out.write(files[1], &csv_bytes(|w| write_drug_lines(w, &cohort.drug_lines))?)?;
    out.write_json(files[2], &cohort.ground_truth)?;
    manifest.finish(&out.path, r.resolved.clone(), &files.map(String::from))
}

#[derive(Debug, Serialize)]
struct IngestReport {
    patients_read: usize,
    drug_lines_read: usize,
    standardization: StandardizationReport,
    filter: FilterReport,
    patients_kept: usize,
    drug_lines_kept: usize,
    periods: usize,
}

fn ingest(g: &Globals, r: &mut Resolver, a: IngestArgs) -> Result<()> {
    let clinical_path: PathBuf = r.require("clinical", a.clinical.map(PathDisplay))?.0;
    let lines_path: PathBuf = r.require("drug_lines", a.drug_lines.map(PathDisplay))?.0;
    let table_path = r.opt("standardization", a.standardization.map(PathDisplay))?.map(|p| p.0);
    let policy = match r.get("unknown_drugs", a.unknown_drugs, "drop".to_string())?.as_str() {
        "drop" => UnknownDrugPolicy::Drop,
        "strict" => UnknownDrugPolicy::Strict,
        other => {
            return Err(Error::Config(format!(
                "unknown_drugs must be drop or strict, got '{other}'"
            )))
        }
    };
    let files = ["periods.csv", "cohort.csv", "demographics.json", "filter_report.json"];
    let out = OutputDir::prepare(&g.out_dir("ingest"), &files, g.force)?;
    let mut inputs: Vec<&Path> = vec![&clinical_path, &lines_path];
    if let Some(p) = &table_path {
        inputs.push(p);
    }
    let manifest = RunManifest::begin("ingest", None, &inputs)?;

    let clinical = read_clinical(&label(&clinical_path), open(&clinical_path)?)?;
    let lines = read_drug_lines(&label(&lines_path), open(&lines_path)?)?;
    let table = match &table_path {
        Some(p) => StandardizationTable::from_tsv(&label(p), open(p)?)?,
        None => StandardizationTable::shipped(),
    };
    let (standardized, std_report) = standardize_lines(&lines, &table, policy)?;
    let cohort = filter_cohort(&clinical, &standardized);
    let periods = build_treatment_periods(&cohort.clinical, &cohort.lines)?;
    let demographics = if cohort.clinical.is_empty() {
        None
    } else {
        Some(empirical_distributions(&cohort.clinical)?)
    };

    out.write(files[0], &csv_bytes(|w| write_periods(w, &periods))?)?;
    out.write(files[1], &csv_bytes(|w| write_clinical(w, &cohort.clinical))?)?;
    out.write_json(files[2], &demographics)?;
    out.write_json(
        files[3],
        &IngestReport {
            patients_read: clinical.len(),
            drug_lines_read: lines.len(),
            standardization: std_report,
            filter: cohort.report,
            patients_kept: cohort.clinical.len(),
            drug_lines_kept: cohort.lines.len(),
            periods: periods.len(),
        },
    )?;
    manifest.finish(&out.path, r.resolved.clone(), &files.map(String::from))
}

/// `PathBuf` with the `Display`/`FromStr` pair the resolver needs.
#[derive(Debug, Clone)]
struct PathDisplay(PathBuf);

impl std::fmt::Display for PathDisplay {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0.display())
    }
}

impl FromStr for PathDisplay {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(PathDisplay(PathBuf::from(s)))
    }
}

fn path_setting(r: &mut Resolver, key: &str, flag: Option<PathBuf>) -> Result<PathBuf> {
    Ok(r.require(key, flag.map(PathDisplay))?.0)
}

fn fit(g: &Globals, r: &mut Resolver, a: FitArgs) -> Result<()> {
    let data = path_setting(r, "data", a.data)?;
    let (periods_path, cohort_path) = (data.join("periods.csv"), data.join("cohort.csv"));
    let files = ["death_model.json", "recurrence_model.json"];
    let out = OutputDir::prepare(&g.out_dir("models"), &files, g.force)?;
    let manifest = RunManifest::begin("fit", None, &[&periods_path, &cohort_path])?;

    let periods = read_periods(&label(&periods_path), open(&periods_path)?)?;
    let clinical = read_clinical(&label(&cohort_path), open(&cohort_path)?)?;
    let death = fit_death_model(&periods, &clinical)?;
    let recurrence = fit_recurrence_model(&periods, &clinical)?;
    for (name, model) in [("death", &death), ("recurrence", &recurrence)] {
        log::info!(
            "{name} model: {} coefficients, log-likelihood {:.4} after {} iterations",
            model.beta.len(),
            model.diagnostics.log_likelihood,
            model.diagnostics.iterations
        );
    }
    for (file, model) in files.iter().zip([&death, &recurrence]) {
        let mut buf = Vec::new();
        model.to_json_writer(&mut buf)?;
        out.write(file, &buf)?;
    }
    manifest.finish(&out.path, r.resolved.clone(), &files.map(String::from))
}

/// Resolved training setup, echoed as `run_config.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunConfig {
    data: String,
    models: String,
    regimens: Option<String>,
    train: TrainConfig,
}

fn load_model(path: &Path) -> Result<CoxModel> {
    CoxModel::from_json_reader(open(path)?)
}

fn build_simulation(data: &Path, models: &Path, restricted: bool, min_count: usize, horizon_cap: u32) -> Result<Environment> {
    let periods_path = data.join("periods.csv");
    let periods = read_periods(&label(&periods_path), open(&periods_path)?)?;
    let demographics: Option<EmpiricalDemographics> = read_json(&data.join("demographics.json"))?;
    let demographics = demographics.ok_or(Error::EmptyCohort)?;
    let death = load_model(&models.join("death_model.json"))?;
    let recurrence = load_model(&models.join("recurrence_model.json"))?;
    let levels = death
        .schema
        .treatment_levels()
        .ok_or_else(|| Error::Config("death model has no treatment covariate".into()))?;
    let combos = levels
        .iter()
        .map(|s| s.parse::<DrugCombination>().unwrap_or_else(|e| match e {}))
        .filter(|c| !c.is_no_treatment());
    let mut actions = ActionSet::new(combos);
    if restricted {
        let restriction = restrict_actions(&actions, &periods, min_count);
        log::info!(
            "restricted action set: {} of {} actions",
            restriction.action_set.len(),
            actions.len()
        );
        actions = restriction.action_set;
    }
    let env = Environment::new(
        Dynamics::Cox {
            death: Arc::new(death),
            recurrence: Arc::new(recurrence),
        },
        actions,
        demographics,
    )
    .with_horizon_cap(horizon_cap);
    env.validate()?;
    Ok(env)
}

fn load_regimens(path: Option<&Path>) -> Result<NccnRegimens> {
    match path {
        Some(p) => NccnRegimens::parse(&label(p), open(p)?),
        None => NccnRegimens::parse("nccn_regimens.txt", DEFAULT_NCCN_REGIMENS.as_bytes()),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleDoc {
    label: String,
    seed: u64,
    episodes: usize,
    mean: Option<f64>,
    values: Vec<u32>,
}

fn sample_doc(label: &str, seed: u64, values: Vec<u32>) -> SampleDoc {
    SampleDoc {
        label: label.to_string(),
        seed,
        episodes: values.len(),
        mean: (!values.is_empty())
            .then(|| values.iter().map(|&v| v as f64).sum::<f64>() / values.len() as f64),
        values,
    }
}

fn train(g: &Globals, r: &mut Resolver, a: TrainArgs) -> Result<()> {
    let data = path_setting(r, "data", a.data)?;
    let models = path_setting(r, "models", a.models)?;
    let regimens_path = r.opt("regimens", a.regimens.map(PathDisplay))?.map(|p| p.0);
    let defaults = TrainConfig::default();
    let dd = defaults.dqn;
    let eps_start = r.get("epsilon_start", a.epsilon_start, dd.epsilon.start)?;
    let eps_min = r.get("epsilon_min", a.epsilon_min, dd.epsilon.min)?;
    let eps_round = r.get("epsilon_floor_round", a.epsilon_floor_round, 50_000)?;
    let agent_kind = AgentKind::from_str(&r.get("agent", a.agent, AgentKind::Dqn.to_string())?)?;
    let mut config = TrainConfig {
        rounds: r.get("rounds", a.rounds, defaults.rounds)?,
        seed: r.get("seed", g.seed, 0)?,
        checkpoint_period: r.get("checkpoint_period", a.checkpoint_period, DEFAULT_CHECKPOINT_PERIOD)?,
        window: r.get("window", a.window, DEFAULT_WINDOW)?,
        agent: agent_kind,
        restricted: r.get("restricted", a.restricted, false)?,
        min_count: r.get("min_count", a.min_count, DEFAULT_MIN_COUNT)?,
        flush_every: r.get("flush_every", a.flush_every, DEFAULT_FLUSH_EVERY)?,
        horizon_cap: r.get("horizon_cap", a.horizon_cap, DEFAULT_HORIZON_CAP)?,
        checkpoint_replay: r.get("checkpoint_replay", a.checkpoint_replay, true)?,
        dqn: dd,
    };
    config.dqn.hidden_width = r.get("hidden_width", a.hidden_width, dd.hidden_width)?;
    config.dqn.hidden_layers = r.get("hidden_layers", a.hidden_layers, dd.hidden_layers)?;
    config.dqn.learning_rate = r.get("learning_rate", a.learning_rate, dd.learning_rate)?;
    config.dqn.gamma = r.get("gamma", a.gamma, dd.gamma)?;
    config.dqn.batch_size = r.get("batch_size", a.batch_size, dd.batch_size)?;
    config.dqn.replay_capacity = r.get("replay_capacity", a.replay_capacity, dd.replay_capacity)?;
    config.dqn.target_sync = r.get("target_sync", a.target_sync, dd.target_sync)?;
    if eps_round < 1 || !(eps_min > 0.0) || !(eps_start >= eps_min) {
        return Err(Error::Config(
            "epsilon schedule needs 0 < epsilon_min <= epsilon_start and epsilon_floor_round >= 1".into(),
        ));
    }
    config.dqn.epsilon = EpsilonSchedule::reaching_floor_at(eps_start, eps_min, eps_round);
    config.validate()?;
    let eval_episodes = r.get("eval_episodes", a.eval_episodes, 0usize)?;
    let threads = r.get("parallel_eval", a.parallel_eval, 1usize)?;

    let files = [METRICS_FILE, TRAJECTORIES_FILE, FINAL_CHECKPOINT_FILE, RUN_CONFIG_FILE, SAMPLE_FILE, CHECKPOINT_DIR];
    let out = OutputDir::prepare(&g.out_dir("run"), &files, g.force)?;
    let ckpt_dir = out.file(CHECKPOINT_DIR);
    if ckpt_dir.exists() {
        fs::remove_dir_all(&ckpt_dir).map_err(|e| io_err(&ckpt_dir, e))?;
    }
    for stale in [SAMPLE_FILE] {
        let p = out.file(stale);
        if p.exists() {
            fs::remove_file(&p).map_err(|e| io_err(&p, e))?;
        }
    }
    let inputs = [
        data.join("periods.csv"),
        data.join("demographics.json"),
        models.join("death_model.json"),
        models.join("recurrence_model.json"),
    ];
    let mut input_refs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    if let Some(p) = &regimens_path {
        input_refs.push(p);
    }
    let manifest = RunManifest::begin("train", Some(config.seed), &input_refs)?;

    let env = build_simulation(&data, &models, config.restricted, config.min_count, config.horizon_cap)?;
    let regimens = match config.agent {
        AgentKind::Nccn => Some(load_regimens(regimens_path.as_deref())?),
        _ => None,
    };
    out.write_json(
        RUN_CONFIG_FILE,
        &RunConfig {
            data: data.display().to_string(),
            models: models.display().to_string(),
            regimens: regimens_path.as_ref().map(|p| p.display().to_string()),
            train: config.clone(),
        },
    )?;
    let agent = build_agent(&config, &env, regimens.as_ref())?;
    let mut sink = FileSink::create(&out.path, config.flush_every)?;
    let mut trainer = Trainer::new(config.clone(), &env, agent)?;
    let checkpoint = trainer.run(&mut sink)?;
    drop(sink);
    log::info!(
        "trained {} rounds; cumulative mean survival {:.3} months",
        config.rounds,
        checkpoint.metrics.cma()
    );

    let mut written: Vec<String> = [METRICS_FILE, TRAJECTORIES_FILE, FINAL_CHECKPOINT_FILE, RUN_CONFIG_FILE]
        .map(String::from)
        .to_vec();
    if ckpt_dir.exists() {
        let mut names: Vec<String> = fs::read_dir(&ckpt_dir)
            .map_err(|e| io_err(&ckpt_dir, e))?
            .filter_map(|e| e.ok())
            .map(|e| format!("{CHECKPOINT_DIR}/{}", e.file_name().to_string_lossy()))
            .collect();
        names.sort();
        written.extend(names);
    }
    if eval_episodes > 0 {
        let values = evaluate_parallel(&checkpoint, &env, eval_episodes, config.seed, threads)?;
        out.write_json(SAMPLE_FILE, &sample_doc("evaluation", config.seed, values))?;
        written.push(SAMPLE_FILE.to_string());
    }
    manifest.finish(&out.path, r.resolved.clone(), &written)
}

fn evaluate(g: &Globals, r: &mut Resolver, a: EvaluateArgs) -> Result<()> {
    let run = path_setting(r, "run", a.run)?;
    let n = r.get("episodes", a.episodes, 1000usize)?;
    let seed = r.get("seed", g.seed, 0)?;
    let threads = r.get("parallel_eval", a.parallel_eval, 1usize)?;
    let out = OutputDir::prepare(&g.out_dir("evaluation"), &[SAMPLE_FILE], g.force)?;
    let (ckpt_path, cfg_path) = (run.join(FINAL_CHECKPOINT_FILE), run.join(RUN_CONFIG_FILE));
    let manifest = RunManifest::begin("evaluate", Some(seed), &[&ckpt_path, &cfg_path])?;

    let run_config: RunConfig = read_json(&cfg_path)?;
    let checkpoint = TrainCheckpoint::from_json_reader(open(&ckpt_path)?)?;
    let t = &run_config.train;
    let env = build_simulation(
        Path::new(&run_config.data),
        Path::new(&run_config.models),
        t.restricted,
        t.min_count,
        t.horizon_cap,
    )?;
    let values = evaluate_parallel(&checkpoint, &env, n, seed, threads)?;
    out.write_json(SAMPLE_FILE, &sample_doc("evaluation", seed, values))?;
    manifest.finish(&out.path, r.resolved.clone(), &[SAMPLE_FILE.to_string()])
}

#[derive(Debug, Serialize)]
struct LabeledSummary {
    label: String,
    summary: SurvivalSummary,
}

/// Reads trajectories whose round is at least `min_round`, line by line.
fn read_trajectories_from(path: &Path, min_round: u64) -> Result<Vec<TrajectoryRecord>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TrajectoryRecord = serde_json::from_str(&line).map_err(|e| Error::Schema {
            path: label(path),
            line: i as u64 + 1,
            message: e.to_string(),
        })?;
        if rec.round >= min_round {
            out.push(rec);
        }
    }
    Ok(out)
}

fn clinician_sample(clinical: &[ClinicalRecord]) -> SurvivalSample {
    SurvivalSample::new(
        "clinicians",
        clinical
            .iter()
            .map(|c| c.overall_survival_days as f64 / 30.0)
            .collect(),
    )
}

fn report(g: &Globals, r: &mut Resolver, a: ReportArgs) -> Result<()> {
    let run = path_setting(r, "run", a.run)?;
    let data = r.opt("data", a.data.map(PathDisplay))?.map(|p| p.0);
    let run_window = read_json::<RunConfig>(&run.join(RUN_CONFIG_FILE))
        .map(|c| c.train.window)
        .ok();
    let window = r.get("window", a.window, run_window.unwrap_or(DEFAULT_WINDOW))?;
    let interval = r.get("interval_months", a.interval_months, DEFAULT_INTERVAL_MONTHS)?;
    let max_lines = r.get("max_lines", a.max_lines, DEFAULT_MAX_LINES)?;
    let scope = r.get("report_rounds", a.report_rounds, "last".to_string())?;
    if window < 1 || interval < 1 {
        return Err(Error::Config("window and interval_months must be >= 1".into()));
    }
    if scope != "last" && scope != "all" {
        return Err(Error::Config(format!("report_rounds must be last or all, got '{scope}'")));
    }

    let mut files = vec!["comparison.json", "summary.json", "heatmap.csv", "lines.csv"];
    if data.is_some() {
        files.extend(["heatmap_clinicians.csv", "lines_clinicians.csv"]);
    }
    let out = OutputDir::prepare(&g.out_dir("report"), &files, g.force)?;

    let run_manifest = RunManifest::load(&run)?;
    run_manifest.verify_output(&run, METRICS_FILE)?;
    run_manifest.verify_output(&run, TRAJECTORIES_FILE)?;
    let mut inputs = vec![run.join(METRICS_FILE), run.join(TRAJECTORIES_FILE)];
    if let Some(d) = &data {
        inputs.extend([d.join("periods.csv"), d.join("cohort.csv")]);
    }
    inputs.extend(a.samples.iter().cloned());
    let manifest = RunManifest::begin(
        "report",
        None,
        &inputs.iter().map(PathBuf::as_path).collect::<Vec<_>>(),
    )?;

    let metrics = read_metrics(open(&run.join(METRICS_FILE))?)?;
    let n = metrics.len();
    let w = window.min(n / 2);
    let months = |rows: &[oncosim::trainer::MetricsRow]| -> Vec<u32> {
        rows.iter().map(|m| m.survival_months).collect()
    };
    let first = SurvivalSample::from_months("first_window", &months(&metrics[..w]));
    let last = SurvivalSample::from_months("last_window", &months(&metrics[n - w..]));

    let mut samples = vec![first.clone(), last.clone()];
    let mut clinical_courses = None;
    if let Some(d) = &data {
        let periods_path = d.join("periods.csv");
        let cohort_path = d.join("cohort.csv");
        let clinical = read_clinical(&label(&cohort_path), open(&cohort_path)?)?;
        let periods = read_periods(&label(&periods_path), open(&periods_path)?)?;
        samples.push(clinician_sample(&clinical));
        clinical_courses = Some(courses_from_periods(&periods));
    }
    for p in &a.samples {
        let doc: SampleDoc = read_json(p)?;
        samples.push(SurvivalSample::from_months(doc.label, &doc.values));
    }

    let mut comparisons: Vec<Comparison> = Vec::new();
    for other in samples.iter().filter(|s| s.label != last.label) {
        match compare(&last, other) {
            Ok(c) => comparisons.push(c),
            Err(e) => log::warn!("skipping comparison {} vs {}: {e}", last.label, other.label),
        }
    }
    let summaries: Vec<LabeledSummary> = samples
        .iter()
        .filter_map(|s| {
            survival_summary(&s.values).ok().map(|summary| LabeledSummary {
                label: s.label.clone(),
                summary,
            })
        })
        .collect();

    let min_round = if scope == "last" { (n - w) as u64 } else { 0 };
    let trajectories = read_trajectories_from(&run.join(TRAJECTORIES_FILE), min_round)?;
    let courses = courses_from_trajectories(&trajectories);
    let heatmap = frequency_timing_matrix(&courses, interval);
    let lines = line_frequencies(&courses, max_lines);

    out.write_json("comparison.json", &comparisons)?;
    out.write_json("summary.json", &summaries)?;
    out.write("heatmap.csv", &csv_bytes(|w| write_heatmap(w, &heatmap))?)?;
    out.write("lines.csv", &csv_bytes(|w| write_lines(w, &lines))?)?;
    if let Some(courses) = &clinical_courses {
        let m = frequency_timing_matrix(courses, interval);
        out.write("heatmap_clinicians.csv", &csv_bytes(|w| write_heatmap(w, &m))?)?;
        let l = line_frequencies(courses, max_lines);
        out.write("lines_clinicians.csv", &csv_bytes(|w| write_lines(w, &l))?)?;
    }
    manifest.finish(
        &out.path,
        r.resolved.clone(),
        &files.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
    )
}
