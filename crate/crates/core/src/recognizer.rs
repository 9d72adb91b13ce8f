//! Per-cluster classifiers: one perceptron for each stroke-count cluster,
//! with samples routed by their stroke count.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{TokenFeatures, CLUSTER_COUNT};
use crate::ink::{InkSample, Token};
use crate::mlp::{self, ClusterModel, Example, TrainConfig};
use crate::pipeline::{analyze, PipelineConfig, SampleAnalysis};
use crate::segmentation::{CriticalPoint, DirectionLength};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

/// SplitMix64 step; derives independent seeds for folds, iterations and clusters.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub label: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: String,
    pub confidence: f64,
    pub cluster_id: u8,
    /// Output activation of every class in the cluster, in model order.
    pub scores: Vec<ClassScore>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recognizer {
    pub config: PipelineConfig,
    /// Indexed by `cluster_id - 1`; `None` where training had no samples.
    pub clusters: Vec<Option<ClusterModel>>,
}

impl Recognizer {
    /// Trains one model per populated cluster from analyzed samples. Each
    /// cluster's initialization and shuffling are seeded from
    /// `config.train.seed` and the cluster id.
    pub fn train(analyses: &[SampleAnalysis], config: &PipelineConfig) -> Result<Self> {
        config.validate().map_err(Error::Config)?;
        let clusters = (1..=CLUSTER_COUNT as u8)
            .into_par_iter()
            .map(|cluster_id| {
                let members: Vec<&SampleAnalysis> = analyses
                    .iter()
                    .filter(|a| a.group.cluster_id == cluster_id)
                    .collect();
                if members.is_empty() {
                    return Ok(None);
                }
                train_cluster(cluster_id, &members, config).map(Some)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config: *config,
            clusters,
        })
    }

    pub fn train_samples(samples: &[InkSample], config: &PipelineConfig) -> Result<Self> {
        let analyses = analyze_all(samples, config)?;
        Self::train(&analyses, config)
    }

    pub fn cluster(&self, cluster_id: u8) -> Option<&ClusterModel> {
        self.clusters
            .get(usize::from(cluster_id).checked_sub(1)?)
            .and_then(Option::as_ref)
    }

    pub fn classify(&self, analysis: &SampleAnalysis) -> Result<Prediction> {
        let cluster_id = analysis.group.cluster_id;
        let cm = self.cluster(cluster_id).ok_or(Error::NoModel(cluster_id))?;
        let outputs = cm.model.forward(&analysis.encoded.to_reals())?;
        let (best, confidence) = mlp::argmax_confidence(&outputs);
        Ok(Prediction {
            label: cm.class_labels[best].clone(),
            confidence,
            cluster_id,
            scores: cm
                .class_labels
                .iter()
                .zip(&outputs)
                .map(|(label, &score)| ClassScore {
                    label: label.clone(),
                    score,
                })
                .collect(),
        })
    }

    /// Runs the full pipeline on a raw sample and classifies it.
    pub fn recognize(&self, sample: &InkSample) -> Result<Recognition> {
        let analysis = analyze(sample, &self.config)?;
        let prediction = self.classify(&analysis)?;
        Ok(Recognition::new(&analysis, prediction))
    }

    pub fn manifest(&self) -> ModelManifest {
        ModelManifest {
            version: MANIFEST_VERSION,
            seed: self.config.train.seed,
            config: self.config,
            clusters: self
                .clusters
                .iter()
                .flatten()
                .map(|cm| ManifestEntry {
                    cluster_id: cm.cluster_id,
                    file: cluster_file_name(cm.cluster_id),
                    class_labels: cm.class_labels.clone(),
                    layer_sizes: cm.model.layer_sizes,
                })
                .collect(),
        }
    }

    /// Writes one model file per trained cluster plus `manifest.json`.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            context: format!("creating {}", dir.display()),
            source,
        })?;
        for cm in self.clusters.iter().flatten() {
            let path = dir.join(cluster_file_name(cm.cluster_id));
            write(&path, &mlp::save_model(cm))?;
        }
        let mut manifest = serde_json::to_vec_pretty(&self.manifest()).expect("manifest serializes");
        manifest.push(b'\n');
        write(&dir.join(MANIFEST_FILE), &manifest)
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let manifest: ModelManifest = serde_json::from_slice(&read(&path)?).map_err(|e| Error::Format {
            what: "model manifest",
            message: e.to_string(),
        })?;
        if manifest.version != MANIFEST_VERSION {
            return Err(Error::Format {
                what: "model manifest",
                message: format!("unsupported version {}", manifest.version),
            });
        }
        let mut clusters = vec![None; CLUSTER_COUNT];
        for entry in &manifest.clusters {
            let cm = mlp::load_model(&read(&dir.join(&entry.file))?)?;
            if cm.cluster_id != entry.cluster_id
                || cm.class_labels != entry.class_labels
                || !(1..=CLUSTER_COUNT as u8).contains(&cm.cluster_id)
            {
                return Err(Error::Format {
                    what: "model manifest",
                    message: format!("{} disagrees with the manifest", entry.file),
                });
            }
            let slot = usize::from(cm.cluster_id) - 1;
            clusters[slot] = Some(cm);
        }
        Ok(Self {
            config: manifest.config,
            clusters,
        })
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Io {
        context: format!("reading {}", path.display()),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io {
        context: format!("writing {}", path.display()),
        source,
    })
}

pub fn cluster_file_name(cluster_id: u8) -> String {
    format!("cluster_{cluster_id}.json")
}

fn train_cluster(
    cluster_id: u8,
    members: &[&SampleAnalysis],
    config: &PipelineConfig,
) -> Result<ClusterModel> {
    let labels: Vec<String> = members
        .iter()
        .map(|a| a.sample.label.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let examples: Vec<Example> = members
        .iter()
        .map(|a| {
            let class = labels.binary_search(&a.sample.label).expect("label collected above");
            let mut target = vec![0.0; labels.len()];
            target[class] = 1.0;
            Example {
                input: a.encoded.to_reals(),
                target,
            }
        })
        .collect();
    let seed = derive_seed(config.train.seed, u64::from(cluster_id));
    let model = mlp::init_weights(
        [config.layout().width(), config.hidden, labels.len()],
        config.train.learning_rate,
        config.lambda,
        seed,
    )?;
    let train = TrainConfig {
        seed: derive_seed(seed, 0),
        ..config.train
    };
    let outcome = mlp::train(model, &examples, &train)?;
    Ok(ClusterModel {
        cluster_id,
        class_labels: labels,
        model: outcome.model,
    })
}

pub fn analyze_all(samples: &[InkSample], config: &PipelineConfig) -> Result<Vec<SampleAnalysis>> {
    samples
        .par_iter()
        .map(|s| analyze(s, config).map_err(Error::from))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub cluster_id: u8,
    pub file: String,
    pub class_labels: Vec<String>,
    pub layer_sizes: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub version: u32,
    pub seed: u64,
    pub config: PipelineConfig,
    pub clusters: Vec<ManifestEntry>,
}

/// Segmentation detail of one stroke in a recognition result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeDetail {
    pub direction: DirectionLength,
    pub window: usize,
    pub too_short: bool,
    pub critical_points: Vec<CriticalPoint>,
    pub tokens: Vec<Token>,
    pub features: Vec<TokenFeatures>,
}

/// Full recognition output: prediction plus the intermediate structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recognition {
    pub label: String,
    pub confidence: f64,
    pub cluster_id: u8,
    pub token_count: usize,
    pub strokes: Vec<StrokeDetail>,
    pub scores: Vec<ClassScore>,
}

impl Recognition {
    pub fn new(analysis: &SampleAnalysis, prediction: Prediction) -> Self {
        Self {
            label: prediction.label,
            confidence: prediction.confidence,
            cluster_id: prediction.cluster_id,
            token_count: analysis.token_count(),
            strokes: analysis
                .strokes
                .iter()
                .zip(&analysis.features)
                .map(|(seg, feats)| StrokeDetail {
                    direction: seg.direction,
                    window: seg.scan.window,
                    too_short: seg.scan.too_short,
                    critical_points: seg.scan.points.clone(),
                    tokens: seg.tokens.clone(),
                    features: feats.clone(),
                })
                .collect(),
            scores: prediction.scores,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ_and_repeat() {
        assert_eq!(derive_seed(42, 3), derive_seed(42, 3));
        assert_ne!(derive_seed(42, 3), derive_seed(42, 4));
        assert_ne!(derive_seed(42, 3), derive_seed(43, 3));
    }

    #[test]
    fn missing_cluster_is_reported() {
        let r = Recognizer {
            config: PipelineConfig::default(),
            clusters: vec![None; CLUSTER_COUNT],
        };
        assert!(r.cluster(0).is_none());
        assert!(r.cluster(5).is_none());
        let s = InkSample::new(
            "x",
            vec![crate::ink::Stroke::from_xy(&[(0.0, 0.0), (1.0, 0.0)]).unwrap()],
        )
        .unwrap();
        assert!(matches!(r.recognize(&s), Err(Error::NoModel(1))));
    }
}
