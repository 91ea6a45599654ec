//! Evaluation metrics: joint distance between tracks and boundary recovery.

use crate::data::{InteractionSequence, JointId, Skeleton};
use crate::error::{Error, Result};
use crate::model::SubEventParse;

/// Mean Euclidean distance over frames `t0+1..=T` and `joints`.
pub fn avg_joint_distance(synth: &[Skeleton], gt: &[Skeleton], joints: &[JointId], t0: usize) -> Result<f64> {
    if synth.len() != gt.len() {
        return Err(Error::precondition(format!(
            "track lengths differ: {} vs {}",
            synth.len(),
            gt.len()
        )));
    }
    if joints.is_empty() || t0 >= synth.len() {
        return Err(Error::precondition("no frames or joints to evaluate"));
    }
    let mut sum = 0.0;
    for (a, b) in synth[t0..].iter().zip(&gt[t0..]) {
        for &j in joints {
            sum += a[j].distance(b[j]);
        }
    }
    Ok(sum / ((synth.len() - t0) * joints.len()) as f64)
}

/// Agent-2 joint distance between a synthesized and a ground-truth sequence
/// over the modeled joints.
pub fn sequence_distance(synth: &InteractionSequence, gt: &InteractionSequence, t0: usize) -> Result<f64> {
    let a: Vec<Skeleton> = synth.frames.iter().map(|f| f.agent2.clone()).collect();
    let b: Vec<Skeleton> = gt.frames.iter().map(|f| f.agent2.clone()).collect();
    avg_joint_distance(&a, &b, &JointId::MODELED, t0)
}

/// Fraction of ground-truth internal boundaries matched one-to-one, greedily
/// by closeness, by a predicted boundary within `tol` frames. A ground truth
/// without internal boundaries counts as fully recovered.
pub fn boundary_recovery(pred: &SubEventParse, gt: &SubEventParse, tol: u32) -> Result<f64> {
    if pred.t_len() != gt.t_len() {
        return Err(Error::precondition("parses cover different lengths"));
    }
    let truth = gt.boundaries();
    if truth.is_empty() {
        return Ok(1.0);
    }
    let predicted = pred.boundaries();
    let mut pairs: Vec<(u32, usize, usize)> = Vec::new();
    for (i, &g) in truth.iter().enumerate() {
        for (j, &p) in predicted.iter().enumerate() {
            let d = g.abs_diff(p);
            if d <= tol {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort();
    let mut used_g = vec![false; truth.len()];
    let mut used_p = vec![false; predicted.len()];
    let mut matched = 0usize;
    for (_, i, j) in pairs {
        if !used_g[i] && !used_p[j] {
            used_g[i] = true;
            used_p[j] = true;
            matched += 1;
        }
    }
    Ok(matched as f64 / truth.len() as f64)
}
