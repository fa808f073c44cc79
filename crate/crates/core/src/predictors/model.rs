//! Trained trace predictors and their JSON persistence.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    linreg_fit, mlp_train, trace_to_features, DenseLayer, FeatureVector, LinRegModel, MlpConfig,
    MlpModel, Normalizer, Predictor, PredictorError,
};
use crate::sssp::Trace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelParams {
    Average {
        value: f64,
    },
    Linreg {
        coefficients: Vec<f64>,
        intercept: f64,
    },
    Mlp {
        layers: Vec<DenseLayer>,
    },
}

/// A learned predictor bundled with the normalizer of its training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub i0: usize,
    pub normalizer: Option<Normalizer>,
    #[serde(flatten)]
    pub params: ModelParams,
}

impl TrainedModel {
    /// Fits a normalizer and a linear regression on raw feature vectors.
    pub fn fit_linreg(
        features: &[FeatureVector],
        targets: &[f64],
        i0: usize,
    ) -> Result<Self, PredictorError> {
        let normalizer = Normalizer::fit(features)?;
        let xs = features
            .iter()
            .map(|f| normalizer.apply(f).map(|v| v.0))
            .collect::<Result<Vec<_>, _>>()?;
        let LinRegModel {
            coefficients,
            intercept,
        } = linreg_fit(&xs, targets)?;
        Ok(Self {
            i0,
            normalizer: Some(normalizer),
            params: ModelParams::Linreg {
                coefficients,
                intercept,
            },
        })
    }

    /// Fits a normalizer and trains a network on raw feature vectors.
    ///
    /// `on_epoch` receives each intermediate model already wrapped with the
    /// normalizer, so callers can evaluate it on raw held-out data.
    pub fn fit_mlp<F>(
        features: &[FeatureVector],
        targets: &[f64],
        i0: usize,
        cfg: &MlpConfig,
        mut on_epoch: F,
    ) -> Result<Self, PredictorError>
    where
        F: FnMut(usize, &TrainedModel),
    {
        let normalizer = Normalizer::fit(features)?;
        let xs = features
            .iter()
            .map(|f| normalizer.apply(f).map(|v| v.0))
            .collect::<Result<Vec<_>, _>>()?;
        let wrap = |m: &MlpModel| TrainedModel {
            i0,
            normalizer: Some(normalizer.clone()),
            params: ModelParams::Mlp {
                layers: m.layers.clone(),
            },
        };
        let model = mlp_train(&xs, targets, cfg, |epoch, m| on_epoch(epoch, &wrap(m)))?;
        Ok(wrap(&model))
    }

    pub fn kind(&self) -> &'static str {
        match self.params {
            ModelParams::Average { .. } => "average",
            ModelParams::Linreg { .. } => "linreg",
            ModelParams::Mlp { .. } => "mlp",
        }
    }

    /// Prediction from an already flattened, not yet normalised feature vector.
    pub fn predict_features(&self, fv: &FeatureVector) -> Result<f64, PredictorError> {
        if fv.len() != 2 * self.i0 {
            return Err(PredictorError::FeatureLength {
                expected: 2 * self.i0,
                found: fv.len(),
            });
        }
        let z = match &self.normalizer {
            Some(n) => n.apply(fv)?,
            None => fv.clone(),
        };
        let y = match &self.params {
            ModelParams::Average { value } => *value,
            ModelParams::Linreg {
                coefficients,
                intercept,
            } => {
                if coefficients.len() != z.len() {
                    return Err(PredictorError::FeatureLength {
                        expected: coefficients.len(),
                        found: z.len(),
                    });
                }
                intercept
                    + coefficients
                        .iter()
                        .zip(&z.0)
                        .map(|(c, v)| c * v)
                        .sum::<f64>()
            }
            ModelParams::Mlp { layers } => {
                let net = MlpModel {
                    layers: layers.clone(),
                };
                if net.input_dim() != z.len() {
                    return Err(PredictorError::FeatureLength {
                        expected: net.input_dim(),
                        found: z.len(),
                    });
                }
                net.forward(&z.0)
            }
        };
        if y.is_nan() {
            Err(PredictorError::NotANumber)
        } else {
            Ok(y)
        }
    }

    pub fn validate(&self) -> Result<(), PredictorError> {
        if self.i0 == 0 {
            return Err(PredictorError::Format("i0 must be positive".into()));
        }
        let dim = 2 * self.i0;
        if let Some(n) = &self.normalizer {
            if n.mean.len() != dim || n.std.len() != dim {
                return Err(PredictorError::Format(format!(
                    "normalizer width differs from 2*i0 = {dim}"
                )));
            }
            if n.std.iter().any(|s| s.is_nan() || *s <= 0.0) {
                return Err(PredictorError::Format(
                    "normalizer std must be positive".into(),
                ));
            }
        }
        match &self.params {
            ModelParams::Average { value } if !value.is_finite() => {
                Err(PredictorError::Format("average must be finite".into()))
            }
            ModelParams::Linreg { coefficients, .. } if coefficients.len() != dim => {
                Err(PredictorError::Format(format!(
                    "{} coefficients for {dim} features",
                    coefficients.len()
                )))
            }
            ModelParams::Mlp { layers } => {
                let net = MlpModel {
                    layers: layers.clone(),
                };
                net.validate()?;
                if net.input_dim() != dim {
                    return Err(PredictorError::Format(format!(
                        "network input width {} differs from {dim}",
                        net.input_dim()
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn to_json(&self) -> Result<String, PredictorError> {
        serde_json::to_string_pretty(self).map_err(|e| PredictorError::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, PredictorError> {
        let model: Self =
            serde_json::from_str(text).map_err(|e| PredictorError::Format(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), PredictorError> {
        std::fs::write(path, self.to_json()?)
            .map_err(|e| PredictorError::Format(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, PredictorError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PredictorError::Format(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

impl Predictor for TrainedModel {
    fn predict(&self, trace: &Trace) -> Result<f64, PredictorError> {
        self.predict_features(&trace_to_features(trace, self.i0)?)
    }
}
