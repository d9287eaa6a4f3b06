//! One function per subcommand.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use capeval_core::corpus::io::{to_jsonl, write_corpus};
use capeval_core::corpus::{generate_synthetic, leave_one_year_out, SynthConfig};
use capeval_core::fusion::{apply_fusion, fit_fusion, FusionData};
use capeval_core::learned::{
    export_pairs, import_external_scores, pair_records, score_pairs, train_baseline,
    training_pairs, BaselineScorer,
};
use capeval_core::metaeval::{
    align_samples, caption_rho_or_zero, correlation_table, per_reference_correlations,
    shuffle_experiment, williams_matrix, CaptionScorer, Level,
};
use capeval_core::metrics::{scores_to_jsonl, write_scores, Metric, ScoreMatrix};
use capeval_core::qualitative::{
    render_cloud, top_pairs, word_frequencies, CloudConfig, Side,
};
use capeval_core::textproc::StopWords;
use serde::Serialize;
use serde_json::json;

use crate::inputs::{load_corpus, load_human, load_human_as, score_matrices};
use crate::{
    BaselineArgs, Cli, Command, CorrelateArgs, ExportArgs, FuseArgs, ImportArgs, LevelArg, Mode,
    ScoreArgs, ShuffleArgs, SideArg, SynthArgs, WilliamsArgs, WordcloudArgs,
};

pub fn run(cli: &Cli) -> Result<()> {
    let out = match &cli.command {
        Command::Synth(a) => &a.out.out,
        Command::Score(a) => &a.out.out,
        Command::Correlate(a) => &a.out.out,
        Command::Williams(a) => &a.out.out,
        Command::Fuse(a) => &a.out.out,
        Command::Shuffle(a) => &a.out.out,
        Command::Wordcloud(a) => &a.out.out,
        Command::ExportPairs(a) => &a.out.out,
        Command::ImportScores(a) => &a.out.out,
        Command::Baseline(a) => &a.out.out,
    };
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let config = json!({
        "command": cli.command,
        "threads": rayon::current_num_threads(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    save(out, "run_config.json", &pretty(&config))?;
    match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Score(a) => score(a),
        Command::Correlate(a) => correlate(a),
        Command::Williams(a) => williams(a),
        Command::Fuse(a) => fuse(a),
        Command::Shuffle(a) => shuffle(a),
        Command::Wordcloud(a) => wordcloud(a),
        Command::ExportPairs(a) => export(a),
        Command::ImportScores(a) => import(a),
        Command::Baseline(a) => baseline(a),
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn save(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn levels(arg: LevelArg) -> Vec<Level> {
    match arg {
        LevelArg::System => vec![Level::System],
        LevelArg::Caption => vec![Level::Caption],
        LevelArg::Both => vec![Level::System, Level::Caption],
    }
}

fn level_name(level: Level) -> &'static str {
    match level {
        Level::System => "system",
        Level::Caption => "caption",
    }
}

fn synth(a: &SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        n_videos: a.videos,
        n_systems: a.systems,
        n_refs: a.refs,
        quality_spread: a.quality_spread,
        seed: a.seed,
        n_years: a.years,
        n_annotators: a.annotators,
        annotations_per_item: a.annotations_per_item,
        bad_annotators: a.bad_annotators,
        ..SynthConfig::default()
    };
    let (corpus, anns) = generate_synthetic(&cfg)?;
    write_corpus(&a.out.out, &corpus, &anns)?;
    eprintln!(
        "wrote {} videos, {} captions, {} annotations",
        corpus.num_videos(),
        corpus.num_candidates(),
        anns.len()
    );
    Ok(())
}

fn score(a: &ScoreArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus, Mode::Sa)?;
    let selection = Metric::parse_selection(&a.metrics)?;
    let (matrices, warnings) = capeval_core::metrics::score_all(&corpus, &selection)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    write_scores(&a.out.out.join("scores.jsonl"), &matrices)?;
    Ok(())
}

fn correlate(a: &CorrelateArgs) -> Result<()> {
    let data = load_human(&a.corpus, &a.human)?;
    let matrices = score_matrices(&a.source, &data.corpus)?;
    let refs: Vec<&ScoreMatrix> = matrices.iter().collect();
    let mut tables = Vec::new();
    for level in levels(a.level) {
        let table = correlation_table(&data.corpus, &refs, &data.human, level)
            .with_context(|| format!("{} level", level_name(level)))?;
        save(&a.out.out, &format!("correlation_{}.tsv", level_name(level)), &table.to_tsv())?;
        tables.push(table);
    }
    save(&a.out.out, "correlation.json", &pretty(&tables))?;
    let missing = align_samples(&refs, &data.human, Level::Caption)?.missing;
    if !missing.is_empty() {
        eprintln!("warning: {} captions lack a metric or human score and were left out", missing.len());
    }
    if a.per_reference {
        let mut tsv = String::from("metric\treference\trho\tn\n");
        for m in &matrices {
            if m.entries().keys().all(|k| k.ref_id.is_none()) {
                continue;
            }
            for (r, rep) in per_reference_correlations(m, &data.human)? {
                tsv.push_str(&format!("{}\t{r}\t{:.4}\t{}\n", m.metric(), rep.rho, rep.n));
            }
        }
        save(&a.out.out, "per_reference.tsv", &tsv)?;
    }
    Ok(())
}

fn williams(a: &WilliamsArgs) -> Result<()> {
    let data = load_human(&a.corpus, &a.human)?;
    let matrices = score_matrices(&a.source, &data.corpus)?;
    let mut all = Vec::new();
    for level in levels(a.level) {
        for year in data.corpus.years() {
            let in_year = |v: &str| data.corpus.year_of(v) == Some(year);
            let subs: Vec<ScoreMatrix> = matrices
                .iter()
                .map(|m| m.filtered(|k| in_year(&k.video_id)))
                .collect();
            let refs: Vec<&ScoreMatrix> = subs.iter().collect();
            let human = data.human.filtered(|v, _| in_year(v));
            let samples = align_samples(&refs, &human, level)?;
            let matrix = williams_matrix(&samples)
                .with_context(|| format!("{} level, year {year}", level_name(level)))?;
            save(
                &a.out.out,
                &format!("williams_{}_{year}.tsv", level_name(level)),
                &matrix.to_tsv(),
            )?;
            all.push(json!({"level": level, "year": year, "matrix": matrix}));
        }
    }
    save(&a.out.out, "williams.json", &pretty(&all))?;
    Ok(())
}

fn fuse(a: &FuseArgs) -> Result<()> {
    if let Some(mode) = a.human.mode {
        if mode != a.target {
            bail!("conflicting flags: --mode {mode:?} and --target {:?}", a.target);
        }
    }
    let data = load_human_as(&a.corpus, &a.human, a.target)?;
    let matrices = score_matrices(&a.source, &data.corpus)?;
    let refs: Vec<&ScoreMatrix> = matrices.iter().collect();
    let rows = FusionData::from_matrices(&data.corpus, &refs, &data.human)?;
    let (model, report) = fit_fusion(&rows, a.seed)?;
    if report.clamped > 0 {
        eprintln!("warning: {} test values fell outside the training range and were clamped", report.clamped);
    }
    model.save(&a.out.out.join("fusion_model.json"))?;
    save(&a.out.out, "fusion_report.tsv", &report.to_tsv())?;
    save(&a.out.out, "fusion_report.json", &pretty(&report))?;
    save(&a.out.out, "fusion_weights.txt", &model.weights_table())?;
    let (fused, _) = apply_fusion(&model, &refs)?;
    write_scores(&a.out.out.join("fused_scores.jsonl"), &[fused])?;
    Ok(())
}

fn shuffle(a: &ShuffleArgs) -> Result<()> {
    let data = load_human(&a.corpus, &a.human)?;
    let metrics = Metric::parse_selection(&a.metrics)?;
    let model = match &a.baseline_model {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Some(serde_json::from_str::<BaselineScorer>(&text).context("parsing baseline model")?)
        }
        None => None,
    };
    let mut scorers: Vec<&dyn CaptionScorer> = metrics.iter().map(|m| m as &dyn CaptionScorer).collect();
    if let Some(m) = &model {
        scorers.push(m);
    }
    let report = shuffle_experiment(&data.corpus, &data.human, &scorers, a.seed)?;
    save(&a.out.out, "shuffle.tsv", &report.to_tsv())?;
    save(&a.out.out, "shuffle.json", &pretty(&report))?;
    Ok(())
}

fn wordcloud(a: &WordcloudArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus, Mode::Sa)?;
    let matrices = score_matrices(&a.source, &corpus)?;
    let stopwords = match &a.stopwords {
        Some(p) => StopWords::from_file(p)?,
        None => StopWords::english(),
    };
    let side = match a.side {
        SideArg::Candidate => Side::Candidate,
        SideArg::Reference => Side::Reference,
        SideArg::Both => Side::Both,
    };
    for m in &matrices {
        let (pairs, warnings) = top_pairs(m, &corpus, a.top_k)?;
        for w in warnings {
            eprintln!("warning: {w}");
        }
        let table = word_frequencies(m.metric(), &pairs, &stopwords, side);
        save(&a.out.out, &format!("freq_{}.tsv", m.metric()), &table.to_tsv())?;
        if table.is_empty() {
            eprintln!("warning: {}: only stop-words in the top pairs, no cloud drawn", m.metric());
            continue;
        }
        render_cloud(
            &table,
            &a.out.out.join(format!("cloud_{}.svg", m.metric())),
            &CloudConfig::default(),
        )?;
    }
    Ok(())
}

fn export(a: &ExportArgs) -> Result<()> {
    let path = a.out.out.join("pairs.jsonl");
    let Some(assessments) = &a.assessments else {
        if a.held_out_year.is_some() {
            bail!("--held-out-year needs --assessments");
        }
        let corpus = load_corpus(&a.corpus, a.mode.unwrap_or(Mode::Sa))?;
        export_pairs(&corpus, None, &path)?;
        return Ok(());
    };
    let human_args = crate::HumanArgs {
        assessments: assessments.clone(),
        mode: a.mode,
        relax_min_annotations: a.relax_min_annotations,
        human_floor: capeval_core::corpus::DEFAULT_HUMAN_FLOOR,
        degraded_ceiling: capeval_core::corpus::DEFAULT_DEGRADED_CEILING,
    };
    let data = load_human(&a.corpus, &human_args)?;
    let human = match &a.held_out_year {
        Some(year) => {
            let split = leave_one_year_out(&data.corpus, &data.human, year)?;
            eprintln!("{} training captions share text with {year} and get null targets", split.excluded);
            split.train.1
        }
        None => data.human,
    };
    let records = pair_records(&data.corpus, Some(&human));
    fs::write(&path, to_jsonl(&records)).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn import(a: &ImportArgs) -> Result<()> {
    let corpus = load_corpus(&a.corpus, Mode::Sa)?;
    let matrices = import_external_scores(&a.scores, &corpus)
        .with_context(|| format!("validating {}", a.scores.display()))?;
    let list: Vec<ScoreMatrix> = matrices.into_values().collect();
    save(&a.out.out, "scores.jsonl", &scores_to_jsonl(&list))?;
    for m in &list {
        eprintln!("{}: {} scores, full coverage", m.metric(), m.len());
    }
    Ok(())
}

fn baseline(a: &BaselineArgs) -> Result<()> {
    let data = load_human(&a.corpus, &a.human)?;
    let (train_corpus, train_human, eval_corpus, eval_human) = match &a.held_out_year {
        Some(year) => {
            let split = leave_one_year_out(&data.corpus, &data.human, year)?;
            (split.train.0, split.train.1, split.test.0, split.test.1)
        }
        None => (data.corpus.clone(), data.human.clone(), data.corpus.clone(), data.human.clone()),
    };
    let (pairs, targets) = training_pairs(&train_corpus, &train_human);
    let scorer = train_baseline(&pairs, &targets, a.lambda)?;
    let zero = BaselineScorer::constant(scorer.bias);
    let trained_rho = caption_rho_or_zero(&score_pairs(&scorer, &eval_corpus), &eval_human)?;
    let zero_rho = caption_rho_or_zero(&score_pairs(&zero, &eval_corpus), &eval_human)?;
    save(&a.out.out, "baseline_model.json", &pretty(&scorer))?;
    write_scores(&a.out.out.join("scores.jsonl"), &[score_pairs(&scorer, &data.corpus)])?;
    let report = format!(
        "scorer\tcaption_rho\ntrained\t{trained_rho:.4}\nzero_weight\t{zero_rho:.4}\n"
    );
    save(&a.out.out, "baseline_report.tsv", &report)?;
    Ok(())
}
