//! Interaction sequences, datasets and their on-disk JSON format.
//!
//! One sequence per JSON file; a dataset is a directory of such files plus a
//! `dictionary.json` holding the list of interaction labels.

use std::fmt;
use std::fs;
use std::ops::{Index, IndexMut};
use std::path::{Path, PathBuf};

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

macro_rules! joints {
    ($($name:ident),* $(,)?) => {
        /// Named skeleton joints (Kinect-style naming).
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum JointId {
            $($name),*
        }

        impl JointId {
            pub const ALL: [JointId; joints!(@count $($name)*)] = [$(JointId::$name),*];

            pub fn name(self) -> &'static str {
                match self {
                    $(JointId::$name => stringify!($name)),*
                }
            }

            pub fn from_name(name: &str) -> Option<JointId> {
                match name {
                    $(stringify!($name) => Some(JointId::$name),)*
                    _ => None,
                }
            }
        }
    };
    (@count) => { 0 };
    (@count $head:ident $($tail:ident)*) => { 1 + joints!(@count $($tail)*) };
}

joints!(
    SpineBase, SpineMid, Neck, Head, ShoulderL, ElbowL, WristL, ShoulderR, ElbowR, WristR, HipL,
    KneeL, AnkleL, HipR, KneeR, AnkleR,
);

impl JointId {
    pub const COUNT: usize = JointId::ALL.len();

    /// The joints the affordance model reasons about.
    pub const MODELED: [JointId; 5] = [
        JointId::SpineBase,
        JointId::WristL,
        JointId::WristR,
        JointId::AnkleL,
        JointId::AnkleR,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Agent {
    One,
    Two,
}

impl Agent {
    pub fn other(self) -> Agent {
        match self {
            Agent::One => Agent::Two,
            Agent::Two => Agent::One,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Agent::One => 1,
            Agent::Two => 2,
        }
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "agent{}", self.number())
    }
}

/// A full-body pose: one position per [`JointId`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Skeleton([Vec3; JointId::COUNT]);

impl Skeleton {
    pub fn from_positions(p: [Vec3; JointId::COUNT]) -> Self {
        Skeleton(p)
    }

    pub fn positions(&self) -> &[Vec3; JointId::COUNT] {
        &self.0
    }

    pub fn base(&self) -> Vec3 {
        self[JointId::SpineBase]
    }

    pub fn map(&self, f: impl Fn(Vec3) -> Vec3) -> Skeleton {
        Skeleton(self.0.map(f))
    }

    /// The modeled subset as a joint map.
    pub fn modeled(&self) -> crate::geometry::JointMap {
        JointId::MODELED.iter().map(|&j| (j, self[j])).collect()
    }
}

impl Index<JointId> for Skeleton {
    type Output = Vec3;
    fn index(&self, j: JointId) -> &Vec3 {
        &self.0[j.index()]
    }
}

impl IndexMut<JointId> for Skeleton {
    fn index_mut(&mut self, j: JointId) -> &mut Vec3 {
        &mut self.0[j.index()]
    }
}

impl Serialize for Skeleton {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(JointId::COUNT))?;
        for j in JointId::ALL {
            map.serialize_entry(j.name(), &self[j].to_array())?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Skeleton {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct SkeletonVisitor;

        impl<'de> Visitor<'de> for SkeletonVisitor {
            type Value = Skeleton;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from joint name to [x, y, z]")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut m: A) -> std::result::Result<Skeleton, A::Error> {
                let mut slots: [Option<Vec3>; JointId::COUNT] = [None; JointId::COUNT];
                while let Some(name) = m.next_key::<String>()? {
                    let j = JointId::from_name(&name)
                        .ok_or_else(|| de::Error::custom(format!("unknown joint {name}")))?;
                    let p: [f64; 3] = m.next_value()?;
                    slots[j.index()] = Some(p.into());
                }
                let mut out = [Vec3::ZERO; JointId::COUNT];
                for j in JointId::ALL {
                    out[j.index()] = slots[j.index()]
                        .ok_or_else(|| de::Error::custom(format!("missing joint {j}")))?;
                }
                Ok(Skeleton(out))
            }
        }

        d.deserialize_map(SkeletonVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub t: u32,
    pub agent1: Skeleton,
    pub agent2: Skeleton,
    pub object: Option<Vec3>,
}

impl Frame {
    pub fn agent(&self, a: Agent) -> &Skeleton {
        match a {
            Agent::One => &self.agent1,
            Agent::Two => &self.agent2,
        }
    }

    pub fn agent_mut(&mut self, a: Agent) -> &mut Skeleton {
        match a {
            Agent::One => &mut self.agent1,
            Agent::Two => &mut self.agent2,
        }
    }
}

/// One planted functional group: the members' entity names.
pub type GroupNames = Vec<String>;

/// Ground-truth sub-event parse stored with a sequence (labels are 1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotations {
    pub intervals: Vec<[u32; 2]>,
    pub labels: Vec<u32>,
    /// Planted groups per interval, present for synthetic data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<GroupNames>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionSequence {
    pub id: String,
    pub label: String,
    pub fps: f64,
    pub frames: Vec<Frame>,
    pub annotations: Option<Annotations>,
}

impl InteractionSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn has_object(&self) -> bool {
        self.frames.first().is_some_and(|f| f.object.is_some())
    }

    /// Frame with 1-based index `t`.
    pub fn frame(&self, t: u32) -> &Frame {
        &self.frames[t as usize - 1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub sequences: Vec<InteractionSequence>,
    pub dictionary: Vec<String>,
}

impl Dataset {
    /// Sequences carrying `label`, in dataset order.
    pub fn with_label<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a InteractionSequence> + 'a {
        self.sequences.iter().filter(move |s| s.label == label)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.violations.join("; "))
    }
}

pub fn validate_sequence(seq: &InteractionSequence) -> ValidationReport {
    let mut v = Vec::new();
    if seq.id.is_empty() {
        v.push("empty id".to_string());
    }
    if seq.label.is_empty() {
        v.push("empty label".to_string());
    }
    if !(5.0..=60.0).contains(&seq.fps) {
        v.push(format!("fps {} outside [5, 60]", seq.fps));
    }
    if seq.frames.len() < 2 {
        v.push(format!("T ≥ 2 required, found T = {}", seq.frames.len()));
    }
    if seq
        .frames
        .iter()
        .enumerate()
        .any(|(i, f)| f.t as usize != i + 1)
    {
        v.push("non-contiguous frames (indices must be 1..T)".to_string());
    }
    let with_object = seq.frames.iter().filter(|f| f.object.is_some()).count();
    if with_object != 0 && with_object != seq.frames.len() {
        v.push(format!(
            "inconsistent object track ({with_object} of {} frames carry an object)",
            seq.frames.len()
        ));
    }
    for f in &seq.frames {
        for agent in [Agent::One, Agent::Two] {
            let sk = f.agent(agent);
            for j in JointId::ALL {
                if !sk[j].is_finite() {
                    v.push(format!("non-finite coordinate at t={} {agent} {j}", f.t));
                }
            }
        }
        if let Some(o) = f.object {
            if !o.is_finite() {
                v.push(format!("non-finite object coordinate at t={}", f.t));
            }
        }
    }
    if let Some(a) = &seq.annotations {
        if let Err(reason) = check_annotations(a, seq.frames.len()) {
            v.push(format!("annotations: {reason}"));
        }
    }
    ValidationReport { violations: v }
}

fn check_annotations(a: &Annotations, t_len: usize) -> std::result::Result<(), String> {
    if a.intervals.is_empty() || a.intervals.len() != a.labels.len() {
        return Err("intervals and labels must be non-empty and of equal length".into());
    }
    let mut next = 1u32;
    for (k, iv) in a.intervals.iter().enumerate() {
        if iv[0] != next || iv[1] < iv[0] {
            return Err(format!("interval {k} does not continue the partition"));
        }
        next = iv[1] + 1;
        if k > 0 && a.labels[k] == a.labels[k - 1] {
            return Err(format!("intervals {} and {k} share a label", k - 1));
        }
    }
    if next as usize != t_len + 1 {
        return Err("intervals do not cover 1..T".into());
    }
    if a.labels.contains(&0) {
        return Err("labels are 1-based".into());
    }
    Ok(())
}

/// On-disk layout of a sequence file.
#[derive(Serialize, Deserialize)]
struct SequenceFile {
    id: String,
    label: String,
    fps: f64,
    object_present: bool,
    frames: Vec<Frame>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    annotations: Option<Annotations>,
}

pub fn sequence_to_json(seq: &InteractionSequence) -> Result<String> {
    let file = SequenceFile {
        id: seq.id.clone(),
        label: seq.label.clone(),
        fps: seq.fps,
        object_present: seq.has_object(),
        frames: seq.frames.clone(),
        annotations: seq.annotations.clone(),
    };
    Ok(serde_json::to_string(&file)?)
}

/// Parses and validates one sequence document.
pub fn sequence_from_json(text: &str) -> Result<InteractionSequence> {
    let file: SequenceFile = serde_json::from_str(text)?;
    let seq = InteractionSequence {
        id: file.id,
        label: file.label,
        fps: file.fps,
        frames: file.frames,
        annotations: file.annotations,
    };
    let mut report = validate_sequence(&seq);
    if seq.has_object() != file.object_present
        && report.violations.iter().all(|v| !v.starts_with("inconsistent object track"))
    {
        report
            .violations
            .push("inconsistent object track (object_present flag disagrees with frames)".into());
    }
    if !report.is_valid() {
        return Err(Error::Validation {
            id: seq.id,
            reason: report.to_string(),
        });
    }
    Ok(seq)
}

pub fn save_sequence(seq: &InteractionSequence, path: &Path) -> Result<()> {
    fs::write(path, sequence_to_json(seq)?)?;
    Ok(())
}

pub fn load_sequence(path: &Path) -> Result<InteractionSequence> {
    let text = fs::read_to_string(path).map_err(|e| Error::Load {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    sequence_from_json(&text).map_err(|e| match e {
        Error::Json(j) => Error::Load {
            path: path.to_path_buf(),
            reason: j.to_string(),
        },
        other => other,
    })
}

pub const DICTIONARY_FILE: &str = "dictionary.json";
/// Run-configuration echo that may sit next to a dataset; never a sequence.
pub const CONFIG_FILE: &str = "config.json";

pub fn save_dictionary(labels: &[String], dir: &Path) -> Result<()> {
    fs::write(dir.join(DICTIONARY_FILE), serde_json::to_string(labels)?)?;
    Ok(())
}

/// Writes every sequence as `<id>.json` plus the dictionary.
pub fn save_dataset(ds: &Dataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for s in &ds.sequences {
        save_sequence(s, &dir.join(format!("{}.json", s.id)))?;
    }
    save_dictionary(&ds.dictionary, dir)
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let dict_path = dir.join(DICTIONARY_FILE);
    let dict_text = fs::read_to_string(&dict_path).map_err(|e| Error::Load {
        path: dict_path.clone(),
        reason: e.to_string(),
    })?;
    let dictionary: Vec<String> = serde_json::from_str(&dict_text).map_err(|e| Error::Load {
        path: dict_path.clone(),
        reason: e.to_string(),
    })?;

    let entries = fs::read_dir(dir).map_err(|e| Error::Load {
        path: dir.to_path_buf(),
        reason: e.to_string(),
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "json")
                && p.file_name().is_some_and(|n| n != DICTIONARY_FILE && n != CONFIG_FILE)
        })
        .collect();
    files.sort();

    let mut sequences = Vec::with_capacity(files.len());
    for f in files {
        let seq = load_sequence(&f)?;
        if !dictionary.contains(&seq.label) {
            return Err(Error::Validation {
                id: seq.id,
                reason: format!("label {} not in dictionary", seq.label),
            });
        }
        sequences.push(seq);
    }
    Ok(Dataset {
        sequences,
        dictionary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy_sequence(t_len: u32, object: bool) -> InteractionSequence {
        let frames = (1..=t_len)
            .map(|t| {
                let base = |a: f64| {
                    Skeleton::from_positions(std::array::from_fn(|j| {
                        Vec3::new(a + 0.01 * t as f64, 0.1 * j as f64, 1.0 + 0.013 * j as f64)
                    }))
                };
                Frame {
                    t,
                    agent1: base(0.0),
                    agent2: base(1.5),
                    object: object.then(|| Vec3::new(0.7, 0.1 / 3.0, 1.1)),
                }
            })
            .collect();
        InteractionSequence {
            id: "seq".into(),
            label: "shake_hands".into(),
            fps: 12.0,
            frames,
            annotations: None,
        }
    }

    #[test]
    fn valid_sequence_has_empty_report() {
        assert!(validate_sequence(&toy_sequence(5, false)).is_valid());
        assert!(validate_sequence(&toy_sequence(5, true)).is_valid());
    }

    #[test]
    fn single_frame_is_rejected() {
        let r = validate_sequence(&toy_sequence(1, false));
        assert!(r.violations.iter().any(|v| v.contains("T ≥ 2")));
    }

    #[test]
    fn nan_coordinate_is_named() {
        let mut s = toy_sequence(6, false);
        s.frames[4].agent1[JointId::WristR].y = f64::NAN;
        let r = validate_sequence(&s);
        assert_eq!(r.violations.len(), 1);
        assert!(r.violations[0].contains("t=5") && r.violations[0].contains("agent1"));
        assert!(r.violations[0].contains("WristR"));
        assert_eq!(r, validate_sequence(&s));
    }

    #[test]
    fn non_contiguous_and_inconsistent_object() {
        let mut s = toy_sequence(4, false);
        s.frames[2].t = 4;
        s.frames.pop();
        assert!(validate_sequence(&s)
            .violations
            .iter()
            .any(|v| v.contains("non-contiguous frames")));

        let mut s = toy_sequence(8, false);
        s.frames[6].object = Some(Vec3::ZERO);
        assert!(validate_sequence(&s)
            .violations
            .iter()
            .any(|v| v.contains("inconsistent object track")));
    }

    #[test]
    fn fps_range() {
        let mut s = toy_sequence(3, false);
        s.fps = 4.0;
        assert!(!validate_sequence(&s).is_valid());
        s.fps = 60.0;
        assert!(validate_sequence(&s).is_valid());
    }

    #[test]
    fn roundtrip_preserves_annotations_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = toy_sequence(5, true);
        s.frames[2].agent2[JointId::Head] = Vec3::new(0.1 + 0.2, 1.0 / 3.0, -2.0e-17);
        s.annotations = Some(Annotations {
            intervals: vec![[1, 2], [3, 5]],
            labels: vec![2, 1],
            groups: None,
        });
        save_dataset(
            &Dataset {
                sequences: vec![s.clone()],
                dictionary: vec!["shake_hands".into()],
            },
            dir.path(),
        )
        .unwrap();
        let ds = load_dataset(dir.path()).unwrap();
        assert_eq!(ds.sequences, vec![s]);
    }

    #[test]
    fn save_to_unwritable_path_fails() {
        let s = toy_sequence(3, false);
        let err = save_sequence(&s, Path::new("/nonexistent-dir/x/seq.json")).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }

    #[test]
    fn load_reports_file_and_violation() {
        let dir = tempfile::tempdir().unwrap();
        save_dictionary(&["shake_hands".into()], dir.path()).unwrap();
        fs::write(dir.path().join("broken.json"), "{ not json").unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        assert!(err.to_string().contains("broken.json"));

        let dir = tempfile::tempdir().unwrap();
        save_dictionary(&["shake_hands".into()], dir.path()).unwrap();
        let mut s = toy_sequence(4, false);
        s.frames[2].t = 4;
        s.frames[3].t = 5;
        let text = serde_json::to_string(&SequenceFile {
            id: "gap".into(),
            label: s.label.clone(),
            fps: s.fps,
            object_present: false,
            frames: s.frames.clone(),
            annotations: None,
        })
        .unwrap();
        fs::write(dir.path().join("gap.json"), text).unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("gap") && msg.contains("non-contiguous frames"), "{msg}");
    }
}
