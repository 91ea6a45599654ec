//! Dynamic-programming decoding of the most probable sub-event parse.
//!
//! `b(s, t)` is the best log posterior of frames `1..=t` whose last sub-event
//! has label `s`. A segment `[t', t]` labeled `s` adds its likelihood, its
//! duration prior and either a transition from the previous label or, when
//! `t' = 1`, the uniform start anchor. Consecutive labels must differ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    duration_log_prior, motion_log_potential, segment_log_likelihood, spatial_log_potential,
    InteractionModel, SceneTrack, SubEventParse,
};
use crate::stats::Distribution;

/// Upper bound on segment length during decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentCap {
    /// `ceil(3 · exp(μ_s + σ_s))` frames per sub-event type.
    #[default]
    DurationPrior,
    /// No cap; the decoded parse is the exact MAP.
    Unrestricted,
}

/// Length cap for sub-event type `s` under the model's duration prior.
pub fn segment_cap(model: &InteractionModel, s: u32) -> u32 {
    match model.potentials.durations[s as usize - 1] {
        Distribution::LogNormal { mu, sigma } => {
            let v = (3.0 * (mu + sigma).exp()).ceil();
            if v >= f64::from(u32::MAX) {
                u32::MAX
            } else {
                (v as u32).max(1)
            }
        }
        _ => u32::MAX,
    }
}

/// m(s', t', s, t): one segment's contribution. `prev = None` marks the first
/// segment, which takes ln(1/|S|) in place of a transition.
pub fn segment_score(
    track: &SceneTrack,
    model: &InteractionModel,
    prev: Option<u32>,
    s: u32,
    segment: (u32, u32),
) -> Result<f64> {
    let (t1, t2) = segment;
    match prev {
        None if t1 != 1 => {
            return Err(Error::precondition("only the segment starting at frame 1 has no predecessor"))
        }
        Some(p) if p == s => return Err(Error::precondition("consecutive sub-events share a label")),
        _ => {}
    }
    let pot = &model.potentials;
    let link = match prev {
        None => -(pot.num_subevents() as f64).ln(),
        Some(p) => pot.log_transition(p, s),
    };
    Ok(segment_log_likelihood(track, segment, &model.grouping, pot, s)?
        + duration_log_prior(t2 - t1 + 1, s, pot)
        + link)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpResult {
    pub parse: SubEventParse,
    /// Equals `parse_graph_log_prob` of `parse`, category prior included.
    pub log_posterior: f64,
}

/// Table of per-frame spatial and per-span motion scores.
struct Scores {
    /// `spatial[s - 1][t - 1]`
    spatial: Vec<Vec<f64>>,
    /// `motion[s - 1][t1 - 1][len - 1]`, for `len <= cap`
    motion: Vec<Vec<Vec<f64>>>,
}

fn precompute(track: &SceneTrack, model: &InteractionModel, caps: &[u32]) -> Result<Scores> {
    let t_len = track.len();
    let pot = &model.potentials;
    let mut spatial = Vec::new();
    let mut motion = Vec::new();
    for s in 1..=pot.num_subevents() as u32 {
        let sp = (1..=t_len)
            .map(|t| spatial_log_potential(track, (t, t), &model.grouping, pot, s))
            .collect::<Result<Vec<f64>>>()?;
        spatial.push(sp);
        let cap = caps[s as usize - 1];
        let mut per_start = Vec::with_capacity(t_len as usize);
        for t1 in 1..=t_len {
            let max_len = cap.min(t_len - t1 + 1);
            let row = (0..max_len)
                .map(|l| motion_log_potential(track, (t1, t1 + l), &model.grouping, pot, s))
                .collect::<Result<Vec<f64>>>()?;
            per_start.push(row);
        }
        motion.push(per_start);
    }
    Ok(Scores { spatial, motion })
}

/// Most probable parse of `track` (frames `1..=τ`) under `model`.
///
/// When the capped table cannot reach `τ`, decoding is redone uncapped.
pub fn dp_parse(track: &SceneTrack, model: &InteractionModel, cap: SegmentCap) -> Result<DpResult> {
    let t_len = track.len();
    if t_len == 0 {
        return Err(Error::precondition("decoding an empty sequence"));
    }
    model.potentials.check_track(track)?;
    let num_s = model.potentials.num_subevents();
    let caps: Vec<u32> = (1..=num_s as u32)
        .map(|s| match cap {
            SegmentCap::DurationPrior => segment_cap(model, s),
            SegmentCap::Unrestricted => u32::MAX,
        })
        .collect();
    let result = decode(track, model, &caps, None)?;
    if result.log_posterior == f64::NEG_INFINITY && cap == SegmentCap::DurationPrior {
        return dp_parse(track, model, SegmentCap::Unrestricted);
    }
    Ok(result)
}

/// Most probable parse of an observed prefix whose last sub-event may still
/// be running.
///
/// Identical to [`dp_parse`] except for the final segment: its sub-goal has
/// not been reached, so it contributes no spatial term and its duration
/// enters through the survival function `P(D >= len)` instead of the density.
/// Frames after `observed_to` are placeholders, so the final segment must
/// start at or before it. The returned `log_posterior` is this prefix score.
pub fn dp_parse_prefix(
    track: &SceneTrack,
    model: &InteractionModel,
    cap: SegmentCap,
    observed_to: u32,
) -> Result<DpResult> {
    if track.is_empty() {
        return Err(Error::precondition("decoding an empty sequence"));
    }
    if observed_to == 0 || observed_to > track.len() {
        return Err(Error::precondition("observed prefix must lie inside the track"));
    }
    model.potentials.check_track(track)?;
    let caps: Vec<u32> = (1..=model.potentials.num_subevents() as u32)
        .map(|s| match cap {
            SegmentCap::DurationPrior => segment_cap(model, s),
            SegmentCap::Unrestricted => u32::MAX,
        })
        .collect();
    let result = decode(track, model, &caps, Some(observed_to as usize))?;
    if result.log_posterior == f64::NEG_INFINITY && cap == SegmentCap::DurationPrior {
        return dp_parse_prefix(track, model, SegmentCap::Unrestricted, observed_to);
    }
    Ok(result)
}

fn open_duration_log_prior(len: u32, s: u32, model: &InteractionModel) -> f64 {
    let d = &model.potentials.durations[s as usize - 1];
    d.log_survival(f64::from(len)).unwrap_or_else(|| d.log_pdf(f64::from(len)))
}

/// `open_end = Some(m)`: the last segment is still running and starts at or before `m`.
fn decode(track: &SceneTrack, model: &InteractionModel, caps: &[u32], open_end: Option<usize>) -> Result<DpResult> {
    let t_len = track.len() as usize;
    let num_s = caps.len();
    let pot = &model.potentials;
    let scores = precompute(track, model, caps)?;
    let anchor = -(model.num_categories as f64).ln() - (num_s as f64).ln();
    let log_trans: Vec<Vec<f64>> = pot
        .transition
        .iter()
        .map(|row| row.iter().map(|p| p.ln()).collect())
        .collect();

    // b[t][s], back[t][s] = (start frame, previous label)
    let mut b = vec![vec![f64::NEG_INFINITY; num_s]; t_len + 1];
    let mut back = vec![vec![(0u32, 0u32); num_s]; t_len + 1];
    for t in 1..=t_len {
        for s in 0..num_s {
            let max_len = (caps[s] as usize).min(t);
            let mut best = (f64::NEG_INFINITY, (0u32, 0u32));
            for len in 1..=max_len {
                let t1 = t - len + 1;
                let seg = if let Some(m) = open_end.filter(|_| t == t_len) {
                    if t1 > m {
                        continue;
                    }
                    scores.motion[s][t1 - 1][len - 1] + open_duration_log_prior(len as u32, s as u32 + 1, model)
                } else {
                    scores.spatial[s][t - 1]
                        + scores.motion[s][t1 - 1][len - 1]
                        + duration_log_prior(len as u32, s as u32 + 1, pot)
                };
                if t1 == 1 {
                    let v = anchor + seg;
                    if v > best.0 {
                        best = (v, (1, 0));
                    }
                    continue;
                }
                for p in 0..num_s {
                    if p == s {
                        continue;
                    }
                    let v = b[t1 - 1][p] + log_trans[p][s] + seg;
                    if v > best.0 {
                        best = (v, (t1 as u32, p as u32 + 1));
                    }
                }
            }
            b[t][s] = best.0;
            back[t][s] = best.1;
        }
    }

    let (mut s, log_posterior) = b[t_len]
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    if log_posterior == f64::NEG_INFINITY {
        return Ok(DpResult {
            parse: SubEventParse::single(t_len as u32, 1),
            log_posterior,
        });
    }
    let mut intervals = Vec::new();
    let mut labels = Vec::new();
    let mut t = t_len;
    loop {
        let (t1, prev) = back[t][s];
        intervals.push((t1, t as u32));
        labels.push(s as u32 + 1);
        if t1 == 1 {
            break;
        }
        t = t1 as usize - 1;
        s = prev as usize - 1;
    }
    intervals.reverse();
    labels.reverse();
    let parse = SubEventParse::new(intervals, labels, t_len as u32)?;
    Ok(DpResult {
        parse,
        log_posterior,
    })
}

/// Every labeled segmentation of `1..=t_len` with no equal consecutive labels.
/// Exponential in `t_len`; intended as a test oracle.
pub fn enumerate_parses(t_len: u32, num_s: u32) -> Vec<SubEventParse> {
    fn rec(
        start: u32,
        t_len: u32,
        num_s: u32,
        cur: &mut SubEventParse,
        out: &mut Vec<SubEventParse>,
    ) {
        if start > t_len {
            out.push(cur.clone());
            return;
        }
        for end in start..=t_len {
            for s in 1..=num_s {
                if cur.labels.last() == Some(&s) {
                    continue;
                }
                cur.intervals.push((start, end));
                cur.labels.push(s);
                rec(end + 1, t_len, num_s, cur, out);
                cur.intervals.pop();
                cur.labels.pop();
            }
        }
    }
    let mut out = Vec::new();
    let mut cur = SubEventParse {
        intervals: Vec::new(),
        labels: Vec::new(),
    };
    rec(1, t_len, num_s, &mut cur, &mut out);
    out
}
