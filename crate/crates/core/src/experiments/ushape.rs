use alloc::vec::Vec;

use super::ExperimentError;
use crate::phonology::Phoneme;

/// Development of one verb across recorded epochs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MicroUshape {
    /// Epochs at which correctness differs from the previous snapshot.
    pub change_points: Vec<usize>,
    /// Epochs at which the output string differs from the previous one.
    pub output_changes: Vec<usize>,
    /// Incorrect runs with a correct snapshot on both sides.
    pub excursions: usize,
    /// At least one correct, incorrect, correct excursion.
    pub flagged: bool,
}

/// Change points of a correctness history, as indices of the snapshot
/// that differs from its predecessor.
pub fn status_changes(correct: &[bool]) -> Vec<usize> {
    (1..correct.len()).filter(|&i| correct[i] != correct[i - 1]).collect()
}

/// Micro U-shape analysis of `snapshots`, each an `(epoch, output)` pair,
/// against the gold form. Snapshots must be in epoch order.
pub fn detect_micro_ushape(gold: &[Phoneme], snapshots: &[(usize, Vec<Phoneme>)]) -> Result<MicroUshape, ExperimentError> {
    if snapshots.len() < 2 {
        return Err(ExperimentError::TooFew {
            needed: 2,
            found: snapshots.len(),
        });
    }
    let correct: Vec<bool> = snapshots.iter().map(|(_, out)| out == gold).collect();
    let change_points = status_changes(&correct).into_iter().map(|i| snapshots[i].0).collect();
    let output_changes = (1..snapshots.len())
        .filter(|&i| snapshots[i].1 != snapshots[i - 1].1)
        .map(|i| snapshots[i].0)
        .collect();

    // Count incorrect runs that follow a correct snapshot and end in one.
    let mut excursions = 0;
    let mut seen_correct = false;
    let mut in_dip = false;
    for &c in &correct {
        if c {
            if in_dip {
                excursions += 1;
            }
            seen_correct = true;
            in_dip = false;
        } else if seen_correct {
            in_dip = true;
        }
    }
    Ok(MicroUshape {
        change_points,
        output_changes,
        excursions,
        flagged: excursions > 0,
    })
}

/// The deepest drop-and-recovery in an accuracy curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MacroUshape {
    /// Index of the peak before the dip, of the dip, and of the recovery.
    pub peak: usize,
    pub trough: usize,
    pub recovery: usize,
    /// Smaller of the fall and the subsequent rise.
    pub depth: f64,
    pub detected: bool,
}

/// Looks for a fall of more than `tolerance` followed by a rise of more
/// than `tolerance`. Returns `None` for curves shorter than three points.
pub fn detect_macro_ushape(curve: &[f64], tolerance: f64) -> Option<MacroUshape> {
    if curve.len() < 3 {
        return None;
    }
    let mut best: Option<MacroUshape> = None;
    let mut peak = 0;
    for trough in 1..curve.len() - 1 {
        if curve[trough - 1] > curve[peak] {
            peak = trough - 1;
        }
        let recovery = (trough + 1..curve.len())
            .max_by(|&a, &b| curve[a].total_cmp(&curve[b]).then(b.cmp(&a)))
            .expect("non-empty range");
        let depth = (curve[peak] - curve[trough]).min(curve[recovery] - curve[trough]);
        if best.is_none_or(|b| depth > b.depth) {
            best = Some(MacroUshape {
                peak,
                trough,
                recovery,
                depth,
                detected: depth > tolerance,
            });
        }
    }
    best
}
