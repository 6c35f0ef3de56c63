//! Label conventions shared by the classifiers: the public API speaks
//! `{0, 1}`, the margin-based internals speak `{-1, +1}`.

use crate::error::{Error, Result};

/// Maps `{0, 1}` labels to `{-1, +1}`, requiring both classes to appear.
pub(crate) fn signed_labels(y: &[u8]) -> Result<Vec<i8>> {
    if y.is_empty() {
        return Err(Error::Data("label vector is empty".into()));
    }
    if let Some(pos) = y.iter().position(|&v| v > 1) {
        return Err(Error::Data(format!("label at row {pos} is {}, expected 0 or 1", y[pos])));
    }
    if !y.contains(&0) || !y.contains(&1) {
        return Err(Error::Data("training labels must include both classes".into()));
    }
    Ok(y.iter().map(|&v| if v == 1 { 1 } else { -1 }).collect())
}
