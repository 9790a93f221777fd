//! Targets of the experiments and their factor decompositions.

use std::sync::Arc;

use mcfusion::model::{inverse_logit, make_power_decomposition, BetaLogit, Gaussian, Quartic, SubPosterior};

use crate::config::{ExperimentConfig, Target};
use crate::error::{config_error, Result};

pub fn factors(config: &ExperimentConfig) -> Result<Vec<Arc<dyn SubPosterior>>> {
    let c = config.c;
    Ok(match config.target {
        Target::Quartic => make_power_decomposition(&Quartic::new(1.0), c)?,
        Target::Beta52 => make_power_decomposition(&BetaLogit::new(5.0, 2.0)?, c)?,
        Target::Gaussian => make_power_decomposition(&Gaussian::new(vec![0.0], vec![1.0])?, c)?,
        Target::Custom => {
            let Some(f) = &config.custom else {
                return config_error("custom target without factors");
            };
            let mut out: Vec<Arc<dyn SubPosterior>> = Vec::with_capacity(f.means.len());
            for (&m, &p) in f.means.iter().zip(&f.precisions) {
                out.push(Arc::new(Gaussian::new(vec![m], vec![p])?));
            }
            out
        }
    })
}

/// The fused density itself, for direct sampling.
pub fn target_density(config: &ExperimentConfig) -> Result<Arc<dyn SubPosterior>> {
    Ok(match config.target {
        Target::Quartic => Arc::new(Quartic::new(1.0)),
        Target::Beta52 => Arc::new(BetaLogit::new(5.0, 2.0)?),
        Target::Gaussian => Arc::new(Gaussian::new(vec![0.0], vec![1.0])?),
        Target::Custom => {
            let Some(f) = &config.custom else {
                return config_error("custom target without factors");
            };
            let precision: f64 = f.precisions.iter().sum();
            let mean = f.means.iter().zip(&f.precisions).map(|(m, p)| m * p).sum::<f64>() / precision;
            Arc::new(Gaussian::new(vec![mean], vec![precision])?)
        }
    })
}

/// Maps a fused draw to the scale results are reported on (the Beta
/// example is simulated on the logit scale).
pub fn to_target_scale(target: Target, y: f64) -> f64 {
    match target {
        Target::Beta52 => inverse_logit(y),
        _ => y,
    }
}

pub const GRID_POINTS: usize = 401;

/// Fixed KDE grid on the reported scale.
pub fn kde_grid(config: &ExperimentConfig) -> Vec<f64> {
    let (lo, hi) = match config.target {
        Target::Quartic => (-3.0, 3.0),
        Target::Beta52 => (0.0, 1.0),
        Target::Gaussian => (-5.0, 5.0),
        Target::Custom => match &config.custom {
            Some(f) => {
                let precision: f64 = f.precisions.iter().sum();
                let mean = f.means.iter().zip(&f.precisions).map(|(m, p)| m * p).sum::<f64>() / precision;
                let sd = precision.sqrt().recip();
                (mean - 6.0 * sd, mean + 6.0 * sd)
            }
            None => (-5.0, 5.0),
        },
    };
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    (0..GRID_POINTS).map(|i| lo + step * i as f64).collect()
}
