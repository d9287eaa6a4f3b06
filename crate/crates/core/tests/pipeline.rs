use capeval_core::corpus::io::{load_corpus, write_corpus};
use capeval_core::corpus::{
    filter_annotators, generate_synthetic, leave_one_year_out, standardize, AssessmentMode,
    DatasetTag, StandardizeOptions, SynthConfig,
};
use capeval_core::fusion::{apply_fusion, fit_fusion, FusionData, FusionModel};
use capeval_core::learned::{export_pairs, import_external_scores, pair_records};
use capeval_core::metaeval::{correlation_table, Level};
use capeval_core::metrics::{read_scores, score_all, write_scores, Metric, ScoreMatrix};

fn config(n_videos: usize) -> SynthConfig {
    SynthConfig { n_videos, seed: 11, ..SynthConfig::default() }
}

#[test]
fn corpus_files_round_trip() {
    let (c, anns) = generate_synthetic(&config(30)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path(), &c, &anns).unwrap();
    let (back, back_anns) = load_corpus(
        &dir.path().join("captions.jsonl"),
        &dir.path().join("references.jsonl"),
        &dir.path().join("assessments.jsonl"),
        DatasetTag::Synthetic,
    )
    .unwrap();
    assert_eq!(back.caption_records(), c.caption_records());
    assert_eq!(back.reference_records(), c.reference_records());
    assert_eq!(back_anns, anns);
}

#[test]
fn scores_survive_a_file_round_trip() {
    let (c, _) = generate_synthetic(&config(30)).unwrap();
    let (ms, _) = score_all(&c, &Metric::ALL).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scores.jsonl");
    write_scores(&path, &ms).unwrap();
    let back = read_scores(&path).unwrap();
    for m in &ms {
        assert_eq!(&back[m.metric()], m);
    }
}

#[test]
fn exported_pairs_scored_externally_import_cleanly() {
    let (c, anns) = generate_synthetic(&config(20)).unwrap();
    let kept = filter_annotators(&anns, 50.0, 50.0).unwrap().kept;
    let h = standardize(&kept, &StandardizeOptions::new(AssessmentMode::Sa)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.jsonl");
    export_pairs(&c, Some(&h), &pairs).unwrap();

    // Stand-in external scorer: candidate length over reference length.
    let text = std::fs::read_to_string(&pairs).unwrap();
    let mut out = String::new();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["target"].is_number());
        let len = |k: &str| v[k].as_str().unwrap().split_whitespace().count() as f64;
        let row = serde_json::json!({
            "metric": "external",
            "video_id": v["video_id"],
            "ref_id": v["ref_id"],
            "system_id": v["system_id"],
            "score": len("candidate") / len("reference"),
        });
        out.push_str(&row.to_string());
        out.push('\n');
    }
    let scores = dir.path().join("scores.jsonl");
    std::fs::write(&scores, out).unwrap();
    let imported = import_external_scores(&scores, &c).unwrap();
    assert_eq!(imported["external"].len(), pair_records(&c, None).len());
    let m: &ScoreMatrix = &imported["external"];
    let table = correlation_table(&c, &[m], &h, Level::Caption).unwrap();
    assert_eq!(table.reports.len(), c.years().len());
}

#[test]
fn held_out_year_has_no_training_overlap() {
    let (c, anns) = generate_synthetic(&config(60)).unwrap();
    let kept = filter_annotators(&anns, 50.0, 50.0).unwrap().kept;
    let h = standardize(&kept, &StandardizeOptions::new(AssessmentMode::Sa)).unwrap();
    let split = leave_one_year_out(&c, &h, "2018").unwrap();
    let (train_c, train_h) = &split.train;
    let (test_c, _) = &split.test;
    assert!(train_c.years().iter().all(|y| *y != "2018"));
    assert_eq!(test_c.years().into_iter().collect::<Vec<_>>(), vec!["2018"]);
    let test_texts: std::collections::BTreeSet<&str> = test_c.candidates().map(|(_, t)| t).collect();
    for (v, s) in train_h.entries().keys() {
        assert!(!test_texts.contains(train_c.candidate(v, s).unwrap()));
    }
}

#[test]
fn saved_fusion_model_reproduces_scores() {
    let (c, anns) = generate_synthetic(&config(60)).unwrap();
    let kept = filter_annotators(&anns, 50.0, 50.0).unwrap().kept;
    let h = standardize(&kept, &StandardizeOptions::new(AssessmentMode::Sa)).unwrap();
    let (ms, _) = score_all(&c, &Metric::ALL).unwrap();
    let refs: Vec<&ScoreMatrix> = ms.iter().collect();
    let data = FusionData::from_matrices(&c, &refs, &h).unwrap();
    let (model, _) = fit_fusion(&data, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    model.save(&path).unwrap();
    let back = FusionModel::load(&path).unwrap();
    assert_eq!(back, model);
    assert_eq!(apply_fusion(&back, &refs).unwrap(), apply_fusion(&model, &refs).unwrap());
}
