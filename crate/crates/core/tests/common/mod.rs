#![allow(dead_code)]

use std::path::PathBuf;

use mop_core::config::PipelineConfig;
use mop_core::corpus::{load_corpus_dir, Document};
use mop_core::evaluation::{labeled_instances, read_gold, GoldRecord};
use mop_core::extraction::Pipeline;
use mop_core::filter::{FeatureKind, Instance, LabeledExample};

pub fn desk() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("resources/desk")
}

pub fn desk_docs() -> Vec<Document> {
    load_corpus_dir(&desk().join("corpus")).unwrap()
}

pub fn desk_gold() -> Vec<GoldRecord> {
    read_gold(&std::fs::read_to_string(desk().join("gold.jsonl")).unwrap()).unwrap()
}

pub fn default_pipeline() -> Pipeline {
    PipelineConfig::default().build_pipeline().unwrap()
}

pub fn desk_instances() -> Vec<Instance> {
    labeled_instances(&default_pipeline(), &desk_docs(), &desk_gold()).unwrap()
}

pub fn desk_examples(kind: FeatureKind, width: usize) -> Vec<LabeledExample> {
    desk_instances().iter().map(|i| i.example(kind, width).unwrap()).collect()
}
