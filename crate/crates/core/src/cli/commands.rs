use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{pick, pick_list, resolve_out_dir, FileConfig, InputsSection};
use super::{
    AttackArgs, Cli, CliError, Command, EvalArgs, InputArgs, Outcome, ReportArgs, ScoreArgs, SelectionArgs,
    SimulateArgs, SweepArgs, TheoryArgs, ValidateArgs,
};
use crate::attacks::{
    read_scores, score_records, write_scores, AttackError, AttackKind, AttackParams, ScoreRow,
    SelectionConfig,
};
use crate::metrics::{
    evaluate, sweep, write_eval_csv, write_roc_csv, write_sweep_csv, EvalReport, MetricsError, SweepGrid,
    DEFAULT_FPR_TARGETS,
};
use crate::provenance::Provenance;
use crate::theory::{
    generate_synthetic, run_theory_validation, SyntheticTraceSpec, TheoryError, TheoryReport,
};
use crate::trace::{
    join_samples, read_labels, read_texts, write_labels, JoinOutcome, Label, SampleRecord, TokenTrace,
    TraceFileHeader, TraceReader, Variant,
};

struct Context {
    file: FileConfig,
    out_dir: PathBuf,
    seed: Option<u64>,
}

impl Context {
    fn out_path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

pub(super) fn execute(cli: Cli) -> Result<Outcome, CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let out_dir = resolve_out_dir(cli.out_dir, file.out_dir.clone());
    let seed = cli.seed.or(file.seed);
    let ctx = Context { file, out_dir, seed };
    match cli.command {
        Command::Validate(args) => validate(&ctx, args),
        Command::Score(args) => score(&ctx, args),
        Command::Eval(args) => eval(&ctx, args),
        Command::Sweep(args) => run_sweep(&ctx, args),
        Command::Simulate(args) => simulate(&ctx, args),
        Command::Theory(args) => theory(&ctx, args),
        Command::Report(args) => report(&ctx, args),
    }
}

// ---------------------------------------------------------------- inputs

#[derive(Debug, Clone, Serialize)]
struct ResolvedInputs {
    target: PathBuf,
    reference: PathBuf,
    variants: Vec<PathBuf>,
    labels: Option<PathBuf>,
    texts: Option<PathBuf>,
    join_tolerance: f64,
}

impl ResolvedInputs {
    fn resolve(args: InputArgs, file: &InputsSection) -> Result<Self, CliError> {
        let required = |flag: Option<PathBuf>, fallback: &Option<PathBuf>, name: &str| {
            flag.or_else(|| fallback.clone()).ok_or_else(|| {
                CliError::usage(format!("missing --{name} (or [inputs].{name} in the config)"))
            })
        };
        let join_tolerance = pick(args.join_tolerance, file.join_tolerance, 0.0);
        if !(0.0..=1.0).contains(&join_tolerance) {
            return Err(CliError::usage(format!(
                "join tolerance must lie in [0, 1], got {join_tolerance}"
            )));
        }
        Ok(Self {
            target: required(args.target, &file.target, "target")?,
            reference: required(args.reference, &file.reference, "reference")?,
            variants: pick_list(args.variants, Some(file.variants.clone()), Vec::new()),
            labels: args.labels.or_else(|| file.labels.clone()),
            texts: args.texts.or_else(|| file.texts.clone()),
            join_tolerance,
        })
    }

    fn paths(&self) -> impl Iterator<Item = &Path> {
        [&self.target, &self.reference]
            .into_iter()
            .chain(&self.variants)
            .chain(self.labels.iter())
            .chain(self.texts.iter())
            .map(PathBuf::as_path)
    }
}

struct Loaded {
    join: JoinOutcome,
    texts: Option<BTreeMap<String, String>>,
}

impl Loaded {
    fn outcome(&self, tolerance: f64) -> Outcome {
        if self.join.summary.issue_fraction() > tolerance {
            Outcome::Warnings
        } else {
            Outcome::Clean
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))
}

fn read_traces(path: &Path) -> Result<(TraceFileHeader, Vec<TokenTrace>), CliError> {
    let context = |e: crate::trace::TraceError| CliError::data(format!("{}: {e}", path.display()));
    let mut reader = TraceReader::new(open(path)?).map_err(context)?;
    let mut traces = Vec::new();
    for trace in &mut reader {
        traces.push(trace.map_err(context)?);
    }
    Ok((reader.header().clone(), traces))
}

fn load_label_map(path: &Option<PathBuf>) -> Result<BTreeMap<String, Label>, CliError> {
    match path {
        Some(p) => read_labels(open(p)?).map_err(|e| CliError::data(format!("{}: {e}", p.display()))),
        None => Ok(BTreeMap::new()),
    }
}

fn load(inputs: &ResolvedInputs) -> Result<Loaded, CliError> {
    let (target_header, target) = read_traces(&inputs.target)?;
    let (reference_header, reference) = read_traces(&inputs.reference)?;
    if target_header.tokenizer_id != reference_header.tokenizer_id {
        return Err(CliError::data(format!(
            "target and reference use different tokenizers ('{}' vs '{}')",
            target_header.tokenizer_id, reference_header.tokenizer_id
        )));
    }
    let labels = load_label_map(&inputs.labels)?;
    let mut join = join_samples(target, reference, &labels).map_err(|e| CliError::data(e.to_string()))?;
    for path in &inputs.variants {
        let (header, traces) = read_traces(path)?;
        if header.tokenizer_id != target_header.tokenizer_id {
            return Err(CliError::data(format!(
                "{}: tokenizer '{}' differs from the target's '{}'",
                path.display(),
                header.tokenizer_id,
                target_header.tokenizer_id
            )));
        }
        join.attach_variants(traces)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    }
    let texts = match &inputs.texts {
        Some(p) => Some(read_texts(open(p)?).map_err(|e| CliError::data(format!("{}: {e}", p.display())))?),
        None => None,
    };
    eprintln!("join: {}", join.summary);
    Ok(Loaded { join, texts })
}

fn selection(args: &SelectionArgs, file: &FileConfig) -> SelectionConfig {
    let base = SelectionConfig::default();
    SelectionConfig {
        min_k: pick(args.min_k, file.selection.min_k, base.min_k),
        max_k: pick(args.max_k, file.selection.max_k, base.max_k),
        alpha: pick(args.alpha, file.selection.alpha, base.alpha),
        strategy: pick(args.strategy, file.selection.strategy, base.strategy),
    }
}

fn attack_params(
    sel: &SelectionArgs,
    args: &AttackArgs,
    file: &FileConfig,
) -> Result<AttackParams, CliError> {
    let base = AttackParams::default();
    let params = AttackParams {
        selection: selection(sel, file),
        min_k_pp_percent: pick(
            args.min_k_pp_percent,
            file.attacks.min_k_pp_percent,
            base.min_k_pp_percent,
        ),
        pac_k_tokens: pick(args.pac_k_tokens, file.attacks.pac_k_tokens, base.pac_k_tokens),
        pac_n_aug: pick(args.pac_n_aug, file.attacks.pac_n_aug, base.pac_n_aug),
    };
    params.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(params)
}

/// Attacks to run: the explicit list if one was given, otherwise every
/// attack whose inputs are present for all records.
fn resolve_attacks(
    requested: Vec<AttackKind>,
    file: Option<Vec<AttackKind>>,
    loaded: &Loaded,
    params: &AttackParams,
) -> Vec<AttackKind> {
    let explicit = pick_list(requested, file, Vec::new());
    let mut attacks: Vec<AttackKind> = if explicit.is_empty() {
        let records = &loaded.join.records;
        let every = |f: &dyn Fn(&SampleRecord) -> bool| !records.is_empty() && records.iter().all(f);
        AttackKind::ALL
            .into_iter()
            .filter(|kind| match kind {
                AttackKind::Zlib => loaded.texts.is_some(),
                AttackKind::Lowercase => every(&|r| r.target_variant(Variant::Lowercase).is_some()),
                AttackKind::Pac => every(&|r| {
                    (0..params.pac_n_aug as u32).all(|j| r.target_variant(Variant::Augmented(j)).is_some())
                }),
                _ => true,
            })
            .collect()
    } else {
        explicit
    };
    attacks.sort();
    attacks.dedup();
    attacks
}

fn attack_error(e: AttackError) -> CliError {
    match e {
        AttackError::InvalidParameter(_) => CliError::usage(e.to_string()),
        _ => CliError::data(e.to_string()),
    }
}

fn metrics_error(e: MetricsError) -> CliError {
    match e {
        MetricsError::InvalidFprTarget(_) => CliError::usage(e.to_string()),
        MetricsError::AucSelfCheck { .. } => CliError::internal(e.to_string()),
        MetricsError::Attack(inner) => attack_error(inner),
        _ => CliError::data(e.to_string()),
    }
}

fn theory_error(e: TheoryError) -> CliError {
    match e {
        TheoryError::InvalidParameter(_) => CliError::usage(e.to_string()),
        _ => CliError::internal(e.to_string()),
    }
}

struct Scored {
    rows: Vec<ScoreRow>,
    config: serde_json::Value,
    outcome: Outcome,
}

fn score_from_traces(
    ctx: &Context,
    inputs: InputArgs,
    sel: &SelectionArgs,
    attack_args: AttackArgs,
) -> Result<Scored, CliError> {
    let inputs = ResolvedInputs::resolve(inputs, &ctx.file.inputs)?;
    let params = attack_params(sel, &attack_args, &ctx.file)?;
    let loaded = load(&inputs)?;
    let attacks = resolve_attacks(
        attack_args.attacks,
        ctx.file.attacks.enabled.clone(),
        &loaded,
        &params,
    );
    let rows = score_records(&loaded.join.records, &attacks, &params, loaded.texts.as_ref())
        .map_err(attack_error)?;
    Ok(Scored {
        rows,
        config: json!({ "inputs": inputs, "params": params, "attacks": attacks }),
        outcome: loaded.outcome(inputs.join_tolerance),
    })
}

// --------------------------------------------------------------- outputs

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::usage(format!("cannot create directory {}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", path.display())))
}

fn write_failed(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::internal(format!("failed writing {}: {e}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::internal(e.to_string()))?;
    out.write_all(b"\n")
        .and_then(|_| out.flush())
        .map_err(write_failed(path))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_reader(open(path)?).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

/// Refuses to write over any of the run's input files.
fn guard_inputs<'a>(output: &Path, inputs: impl IntoIterator<Item = &'a Path>) -> Result<(), CliError> {
    let Ok(out) = output.canonicalize() else {
        return Ok(());
    };
    for input in inputs {
        if input.canonicalize().is_ok_and(|p| p == out) {
            return Err(CliError::usage(format!(
                "output {} would overwrite an input",
                output.display()
            )));
        }
    }
    Ok(())
}

// -------------------------------------------------------------- commands

fn validate(_ctx: &Context, args: ValidateArgs) -> Result<Outcome, CliError> {
    if args.traces.is_empty() && args.labels.is_none() && args.texts.is_none() {
        return Err(CliError::usage(
            "nothing to validate; pass trace files, --labels or --texts",
        ));
    }
    let mut errors = 0usize;
    for path in &args.traces {
        let problems = validate_trace_file(path)?;
        errors += problems.len();
        for p in &problems {
            println!("{}: {p}", path.display());
        }
    }
    for (path, kind) in [(&args.labels, "labels"), (&args.texts, "texts")] {
        let Some(path) = path else { continue };
        let result = if kind == "labels" {
            read_labels(open(path)?).map(|m| m.len())
        } else {
            read_texts(open(path)?).map(|m| m.len())
        };
        match result {
            Ok(n) => println!("{}: ok ({n} {kind})", path.display()),
            Err(e) => {
                errors += 1;
                println!("{}: {e}", path.display());
            }
        }
    }
    if errors > 0 {
        return Err(CliError::data(format!("validation found {errors} error(s)")));
    }
    Ok(Outcome::Clean)
}

/// Collects every problem in one trace file rather than stopping at the first.
fn validate_trace_file(path: &Path) -> Result<Vec<String>, CliError> {
    let mut reader = match TraceReader::new(open(path)?) {
        Ok(r) => r,
        Err(e) => return Ok(vec![e.to_string()]),
    };
    let max_length = reader.header().max_length;
    let mut problems = Vec::new();
    let mut seen = BTreeSet::new();
    let mut count = 0u64;
    for item in &mut reader {
        match item {
            Ok(trace) => {
                count += 1;
                if trace.token_ids.len() as u64 > max_length {
                    problems.push(format!(
                        "sample '{}': {} tokens exceed header max_length {max_length}",
                        trace.sample_id,
                        trace.token_ids.len()
                    ));
                }
                if !seen.insert((trace.sample_id.clone(), trace.variant)) {
                    problems.push(format!(
                        "duplicate sample '{}' for variant {:?}",
                        trace.sample_id, trace.variant
                    ));
                }
            }
            Err(crate::trace::TraceError::Io(e)) => {
                problems.push(format!("read failure: {e}"));
                break;
            }
            Err(e) => problems.push(e.to_string()),
        }
    }
    if problems.is_empty() {
        println!("{}: ok ({count} traces)", path.display());
    }
    Ok(problems)
}

fn score(ctx: &Context, args: ScoreArgs) -> Result<Outcome, CliError> {
    let ScoreArgs {
        inputs,
        selection,
        attacks,
        output,
    } = args;
    let output = output.unwrap_or_else(|| ctx.out_path("scores.csv"));
    let input_paths = ResolvedInputs::resolve(inputs.clone(), &ctx.file.inputs)?;
    guard_inputs(&output, input_paths.paths())?;

    let scored = score_from_traces(ctx, inputs, &selection, attacks)?;
    let provenance =
        Provenance::for_config(&json!({ "command": "score", "config": scored.config }), ctx.seed);
    let mut out = create(&output)?;
    write_scores(&mut out, &scored.rows, Some(&provenance.header_line()))
        .and_then(|_| out.flush())
        .map_err(write_failed(&output))?;
    println!("wrote {} score rows to {}", scored.rows.len(), output.display());
    Ok(scored.outcome)
}

fn relabel(rows: &mut [ScoreRow], labels: &BTreeMap<String, Label>) {
    for row in rows {
        if let Some(&label) = labels.get(&row.score.sample_id) {
            row.label = label;
        }
    }
}

fn eval(ctx: &Context, args: EvalArgs) -> Result<Outcome, CliError> {
    let EvalArgs {
        scores,
        inputs,
        selection,
        attacks,
        fpr,
    } = args;
    let fpr_targets = pick_list(
        fpr,
        ctx.file.metrics.fpr_targets.clone(),
        DEFAULT_FPR_TARGETS.to_vec(),
    );
    if let Some(bad) = fpr_targets.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return Err(CliError::usage(format!(
            "FPR targets must lie in (0, 1), got {bad}"
        )));
    }

    let scored = match scores.or_else(|| ctx.file.inputs.scores.clone()) {
        Some(path) => {
            let mut rows =
                read_scores(open(&path)?).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
            let labels_path = inputs.labels.clone().or_else(|| ctx.file.inputs.labels.clone());
            relabel(&mut rows, &load_label_map(&labels_path)?);
            Scored {
                rows,
                config: json!({ "scores": path, "labels": labels_path }),
                outcome: Outcome::Clean,
            }
        }
        None => score_from_traces(ctx, inputs, &selection, attacks)?,
    };

    let config = json!({ "command": "eval", "config": scored.config, "fpr_targets": fpr_targets });
    let provenance = Provenance::for_config(&config, ctx.seed);
    let mut report = evaluate(&scored.rows, &fpr_targets).map_err(metrics_error)?;
    report.provenance = Some(provenance.clone());
    report.config = config;

    let json_path = ctx.out_path("eval_report.json");
    write_json(&json_path, &report)?;
    let csv_path = ctx.out_path("eval.csv");
    let mut out = create(&csv_path)?;
    write_eval_csv(&mut out, &report)
        .and_then(|_| out.flush())
        .map_err(write_failed(&csv_path))?;
    for attack in &report.attacks {
        let Some(curve) = &attack.roc else { continue };
        let path = ctx.out_path(&format!("roc_{}.csv", attack.attack.name()));
        let mut out = create(&path)?;
        write_roc_csv(&mut out, curve, Some(&provenance))
            .and_then(|_| out.flush())
            .map_err(write_failed(&path))?;
    }
    print!("{}", render_eval_table(&report));
    println!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(scored.outcome)
}

fn run_sweep(ctx: &Context, args: SweepArgs) -> Result<Outcome, CliError> {
    let inputs = ResolvedInputs::resolve(args.inputs, &ctx.file.inputs)?;
    let base = selection(&args.selection, &ctx.file);
    let section = &ctx.file.sweep;
    let grid = SweepGrid {
        alphas: pick_list(args.alphas, section.alphas.clone(), vec![base.alpha]),
        min_ks: pick_list(args.min_ks, section.min_ks.clone(), vec![base.min_k]),
        max_ks: pick_list(args.max_ks, section.max_ks.clone(), vec![base.max_k]),
        strategies: pick_list(args.strategies, section.strategies.clone(), vec![base.strategy]),
        margins: pick_list(args.margins, section.margins.clone(), vec![0.0]),
    };
    let points = grid.points().map_err(|e| CliError::usage(e.to_string()))?;
    if points.is_empty() {
        return Err(CliError::usage(
            "sweep grid is empty (every max_k is below every min_k)",
        ));
    }
    let output = ctx.out_path("sweep.csv");
    guard_inputs(&output, inputs.paths())?;

    let loaded = load(&inputs)?;
    let rows = sweep(&loaded.join.records, &points).map_err(metrics_error)?;
    let provenance = Provenance::for_config(
        &json!({ "command": "sweep", "inputs": inputs, "grid": grid }),
        ctx.seed,
    );
    let mut out = create(&output)?;
    write_sweep_csv(&mut out, &rows, Some(&provenance))
        .and_then(|_| out.flush())
        .map_err(write_failed(&output))?;
    println!("wrote {} sweep rows to {}", rows.len(), output.display());
    Ok(loaded.outcome(inputs.join_tolerance))
}

#[derive(Serialize, Deserialize)]
struct SimulateManifest {
    provenance: Provenance,
    spec: SyntheticTraceSpec,
}

fn simulate(ctx: &Context, args: SimulateArgs) -> Result<Outcome, CliError> {
    let mut spec = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("cannot read spec {}: {e}", path.display())))?;
            toml::from_str(&text)
                .map_err(|e| CliError::usage(format!("invalid spec {}: {e}", path.display())))?
        }
        None => ctx.file.simulate.clone().unwrap_or_default(),
    };
    spec.n_per_class = pick(args.n_per_class, None, spec.n_per_class);
    spec.member_uplift = pick(args.member_uplift, None, spec.member_uplift);
    spec.nonmember_uplift = pick(args.nonmember_uplift, None, spec.nonmember_uplift);
    spec.seed = pick(ctx.seed, None, spec.seed);

    let data = generate_synthetic(&spec).map_err(theory_error)?;
    let target = ctx.out_path("target.jsonl");
    let mut out = create(&target)?;
    data.write_target(&mut out)
        .and_then(|_| out.flush())
        .map_err(write_failed(&target))?;
    let reference = ctx.out_path("reference.jsonl");
    let mut out = create(&reference)?;
    data.write_reference(&mut out)
        .and_then(|_| out.flush())
        .map_err(write_failed(&reference))?;
    let labels = ctx.out_path("labels.jsonl");
    let mut out = create(&labels)?;
    write_labels(&mut out, &data.labels)
        .and_then(|_| out.flush())
        .map_err(write_failed(&labels))?;
    let manifest = SimulateManifest {
        provenance: Provenance::for_config(&spec, Some(spec.seed)),
        spec,
    };
    write_json(&ctx.out_path("simulate_manifest.json"), &manifest)?;
    println!(
        "wrote {} samples per class to {}",
        manifest.spec.n_per_class,
        ctx.out_dir.display()
    );
    Ok(Outcome::Clean)
}

#[derive(Serialize, Deserialize)]
struct TheoryOutput {
    provenance: Provenance,
    report: TheoryReport,
}

fn theory(ctx: &Context, args: TheoryArgs) -> Result<Outcome, CliError> {
    let mut cfg = ctx.file.theory.clone().unwrap_or_default();
    cfg.n_trials = pick(args.n_trials, None, cfg.n_trials);
    cfg.seed = pick(ctx.seed, None, cfg.seed);
    if cfg.n_trials == 0 {
        return Err(CliError::usage("n_trials must be >= 1"));
    }
    let report = run_theory_validation(&cfg).map_err(theory_error)?;
    let output = TheoryOutput {
        provenance: Provenance::for_config(&cfg, Some(cfg.seed)),
        report,
    };
    let path = ctx.out_path("theory_report.json");
    write_json(&path, &output)?;
    print!("{}", render_theory_summary(&output.report));
    println!("wrote {}", path.display());
    if output.report.all_passed {
        Ok(Outcome::Clean)
    } else {
        eprintln!("theory: at least one check failed; see {}", path.display());
        Ok(Outcome::Warnings)
    }
}

fn report(ctx: &Context, args: ReportArgs) -> Result<Outcome, CliError> {
    let eval_path = args.eval.unwrap_or_else(|| ctx.out_path("eval_report.json"));
    let eval: EvalReport = read_json(&eval_path)?;
    let mut md = String::from("# Membership inference audit\n\n");
    if let Some(p) = &eval.provenance {
        let _ = writeln!(md, "`{}`\n", p.header_line());
    }
    md.push_str(&render_eval_table(&eval));
    if let Some(path) = &args.theory {
        let theory: TheoryOutput = read_json(path)?;
        md.push_str("\n## Theory validation\n\n");
        md.push_str(&render_theory_summary(&theory.report));
    }
    let output = ctx.out_path("report.md");
    guard_inputs(
        &output,
        [eval_path.as_path()].into_iter().chain(args.theory.as_deref()),
    )?;
    let mut out = create(&output)?;
    out.write_all(md.as_bytes())
        .and_then(|_| out.flush())
        .map_err(write_failed(&output))?;
    print!("{md}");
    Ok(Outcome::Clean)
}

// ------------------------------------------------------------- rendering

fn render_eval_table(report: &EvalReport) -> String {
    let mut s = String::from("| Attack | AUC |");
    for t in &report.fpr_targets {
        let _ = write!(s, " TPR@FPR={t} |");
    }
    s.push_str(" Members | Nonmembers | Unknown |\n|---|---|");
    s.push_str(&"---|".repeat(report.fpr_targets.len() + 3));
    s.push('\n');
    for a in &report.attacks {
        let _ = write!(s, "| {} | {:.4} |", a.attack.display_name(), a.auc);
        for t in &a.tpr_at_fpr {
            let _ = write!(s, " {:.4} |", t.tpr);
        }
        let _ = writeln!(
            s,
            " {} | {} | {} |",
            a.n_members, a.n_nonmembers, a.excluded_unknown
        );
    }
    s
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn render_theory_summary(r: &TheoryReport) -> String {
    let cells_ok = r.hoeffding.iter().filter(|c| c.passed).count();
    let power_ok = r.sample_complexity.iter().filter(|c| c.passed).count();
    let dominance_ok = r.threshold_dominance.iter().filter(|d| d.passed()).count();
    let selection = &r.selection_optimality;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "- concentration bounds: {cells_ok}/{} cells within bound ({})",
        r.hoeffding.len(),
        pass(cells_ok == r.hoeffding.len())
    );
    let _ = writeln!(
        s,
        "- sample complexity: {power_ok}/{} gaps reach the required power ({})",
        r.sample_complexity.len(),
        pass(power_ok == r.sample_complexity.len())
    );
    let _ = writeln!(
        s,
        "- selection optimality: {} counterexamples in {} instances ({})",
        selection.counterexamples,
        selection.instances,
        pass(selection.counterexamples == 0)
    );
    let _ = writeln!(
        s,
        "- threshold dominance: {dominance_ok}/{} worlds without violations ({})",
        r.threshold_dominance.len(),
        pass(dominance_ok == r.threshold_dominance.len())
    );
    s
}
