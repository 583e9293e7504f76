use serde::{Deserialize, Serialize};

use super::GraphError;
use crate::rng::SplitMix64;

/// Train / validation / test fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl SplitRatios {
    pub const fn new(train: f64, validation: f64, test: f64) -> Self {
        Self {
            train,
            validation,
            test,
        }
    }

    /// 60/20/20, the node classification partition.
    pub const NODE_CLASSIFICATION: Self = Self::new(0.6, 0.2, 0.2);
    /// 80/10/10, the link prediction partition.
    pub const LINK_PREDICTION: Self = Self::new(0.8, 0.1, 0.1);

    fn validate(&self) -> Result<(), GraphError> {
        let r = [self.train, self.validation, self.test];
        let all_positive = r.iter().all(|x| x.is_finite() && *x > 0.0);
        if !all_positive || (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(GraphError::RatioSumInvalid(r));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split<T> {
    pub seed: u64,
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
}

impl<T> Split<T> {
    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.validation.len(), self.test.len())
    }
}

/// Shuffles the ids with a SplitMix64-driven Fisher–Yates pass, then slices:
/// validation and test take `floor(n * ratio)` items each, train takes the
/// rest, so rounding remainders land in train.
pub fn split_dataset<T: Clone>(sample_ids: &[T], ratios: SplitRatios, seed: u64) -> Result<Split<T>, GraphError> {
    ratios.validate()?;
    let n = sample_ids.len();
    let mut order = sample_ids.to_vec();
    SplitMix64::new(seed).shuffle(&mut order);

    let count = |r: f64| ((n as f64) * r + 1e-9).floor() as usize;
    let n_val = count(ratios.validation);
    let n_test = count(ratios.test);
    let n_train = n - n_val - n_test;

    let test = order.split_off(n_train + n_val);
    let validation = order.split_off(n_train);
    Ok(Split {
        seed,
        train: order,
        validation,
        test,
    })
}
