use super::LayerSpec;
use crate::egonet::Direction;
use crate::error::{Error, Result};

/// Per-layer update-encouragement proportions, innermost first.
pub const LAYER_UPDATE_SHARE: [f64; 3] = [0.176, 0.243, 0.279];
pub const LAYER_TARGETED_SHARE: [f64; 3] = [0.553, 0.531, 0.498];

// (alter count mean, frequency mean) per layer
const REVIEWER_K2: [(f64, f64); 2] = [(9.08, 7.01), (50.30, 1.26)];
const REVIEWER_K3: [(f64, f64); 3] = [(3.89, 8.66), (14.76, 3.25), (40.73, 0.97)];
const AUTHOR_K2: [(f64, f64); 2] = [(11.48, 6.77), (59.40, 1.26)];
const AUTHOR_K3: [(f64, f64); 3] = [(4.72, 8.38), (17.997, 3.11), (48.16, 1.02)];

/// Observed layer means for reviewers (`Outgoing`) or authors
/// (`Incoming`), with both SDs set to `cv` times the mean.
///
/// Two-layer plans take the inner and outer label proportions.
pub fn preset_layers(direction: Direction, k: usize, cv: f64) -> Result<Vec<LayerSpec>> {
    let means: &[(f64, f64)] = match (direction, k) {
        (Direction::Outgoing, 2) => &REVIEWER_K2,
        (Direction::Outgoing, 3) => &REVIEWER_K3,
        (Direction::Incoming, 2) => &AUTHOR_K2,
        (Direction::Incoming, 3) => &AUTHOR_K3,
        _ => return Err(Error::InvalidArgument(format!("no preset for k = {k}"))),
    };
    if !(0.0..1.0 / 3.0).contains(&cv) {
        return Err(Error::InvalidArgument(format!("cv must lie in [0, 1/3), got {cv}")));
    }
    let label_rows: &[usize] = if k == 2 { &[0, 2] } else { &[0, 1, 2] };
    Ok(means
        .iter()
        .zip(label_rows)
        .map(|(&(n, f), &row)| LayerSpec::new(n, cv * n, f, cv * f).with_labels(LAYER_UPDATE_SHARE[row], LAYER_TARGETED_SHARE[row]))
        .collect())
}
