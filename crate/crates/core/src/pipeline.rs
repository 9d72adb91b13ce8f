//! The in-process recognition pipeline: smoothing, segmentation, features
//! and encoding for one sample.

use serde::{Deserialize, Serialize};

use crate::features::{
    encode, group_of, token_features, EncodedVector, EncodingLayout, FeatureError,
    StrokeCountGroup, TokenFeatures, DEFAULT_MAX_TOKENS,
};
use crate::ink::InkSample;
use crate::mlp::TrainConfig;
use crate::preprocess::{smooth_sample, PreprocessConfig};
use crate::segmentation::{segment_stroke, StrokeSegmentation, DEFAULT_WINDOW_FRACTION};

pub const DEFAULT_HIDDEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub window_fraction: f64,
    pub smoothing_passes: u32,
    pub max_tokens: usize,
    pub hidden: usize,
    pub lambda: f64,
    pub train: TrainConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            window_fraction: DEFAULT_WINDOW_FRACTION,
            smoothing_passes: 1,
            max_tokens: DEFAULT_MAX_TOKENS,
            hidden: DEFAULT_HIDDEN,
            lambda: 1.0,
            train: TrainConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.window_fraction > 0.0 && self.window_fraction < 1.0) {
            return Err(format!("window fraction must lie in (0, 1), got {}", self.window_fraction));
        }
        if self.smoothing_passes == 0 {
            return Err("smoothing passes must be at least 1".into());
        }
        if self.max_tokens == 0 || self.hidden == 0 {
            return Err("max tokens and hidden width must be positive".into());
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(format!("sigmoid slope must be positive, got {}", self.lambda));
        }
        self.train.validate().map_err(|e| e.to_string())
    }

    pub fn preprocess(&self) -> PreprocessConfig {
        PreprocessConfig {
            passes: self.smoothing_passes,
        }
    }

    pub fn layout(&self) -> EncodingLayout {
        EncodingLayout::new(self.max_tokens)
    }
}

/// Everything the pipeline derives from one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleAnalysis {
    /// The smoothed sample.
    pub sample: InkSample,
    pub strokes: Vec<StrokeSegmentation>,
    /// Token features per stroke, parallel to `strokes`.
    pub features: Vec<Vec<TokenFeatures>>,
    pub encoded: EncodedVector,
    pub group: StrokeCountGroup,
}

impl SampleAnalysis {
    pub fn token_count(&self) -> usize {
        self.strokes.iter().map(|s| s.tokens.len()).sum()
    }
}

/// Segments and featurizes an already-smoothed sample.
pub fn analyze_smoothed(sample: InkSample, config: &PipelineConfig) -> Result<SampleAnalysis, FeatureError> {
    let strokes: Vec<StrokeSegmentation> = sample
        .strokes()
        .iter()
        .enumerate()
        .map(|(i, s)| segment_stroke(s, i, config.window_fraction))
        .collect();
    let features = featurize_segmented(&sample, &strokes)?;
    let flat: Vec<TokenFeatures> = features.iter().flatten().copied().collect();
    let encoded = encode(&flat, config.layout());
    let group = group_of(&sample);
    Ok(SampleAnalysis {
        sample,
        strokes,
        features,
        encoded,
        group,
    })
}

/// Token features for a sample whose strokes are already segmented.
pub fn featurize_segmented(
    sample: &InkSample,
    strokes: &[StrokeSegmentation],
) -> Result<Vec<Vec<TokenFeatures>>, FeatureError> {
    sample
        .strokes()
        .iter()
        .zip(strokes)
        .map(|(stroke, seg)| {
            seg.tokens
                .iter()
                .map(|t| token_features(t, stroke, &seg.direction))
                .collect()
        })
        .collect()
}

pub fn analyze(sample: &InkSample, config: &PipelineConfig) -> Result<SampleAnalysis, FeatureError> {
    analyze_smoothed(smooth_sample(sample, &config.preprocess()), config)
}
