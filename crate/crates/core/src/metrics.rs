//! CLEAR-MOT evaluation: per-frame matching with carry-over, FP/FN/IDSW
//! counting, MOTA, and mean/std aggregation.

use std::collections::BTreeMap;

use crate::bbox::{iou, BBox2D};
use crate::sensor::GtEntry;
use crate::tracking::solve_assignment;

pub const DEFAULT_IOU_MIN: f64 = 0.5;

/// `(id, box)` for one object in one frame.
pub type Labeled = (u32, BBox2D);

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameMatch {
    /// `(gt_id, hyp_id, iou)` sorted by gt id.
    pub pairs: Vec<(u32, u32, f64)>,
    pub fp: usize,
    pub fn_: usize,
    /// Gt ids whose hypothesis changed in this frame.
    pub switches: Vec<u32>,
}

/// Matches one frame.
///
/// `last` maps gt ids to the hypothesis they were last matched to, in any
/// earlier frame; it is updated in place. Pairs from `last` that are present
/// and still overlap by `iou_min` are kept first; the remaining objects are
/// assigned to maximize total IOU among pairs reaching `iou_min`.
pub fn match_frame(
    gt: &[Labeled],
    hyp: &[Labeled],
    last: &mut BTreeMap<u32, u32>,
    iou_min: f64,
) -> FrameMatch {
    let mut gt_used = vec![false; gt.len()];
    let mut hyp_used = vec![false; hyp.len()];
    let mut pairs = Vec::new();
    for (gi, (gid, gbox)) in gt.iter().enumerate() {
        let Some(&h) = last.get(gid) else { continue };
        let Some(hi) = hyp.iter().position(|(hid, _)| *hid == h) else {
            continue;
        };
        if hyp_used[hi] {
            continue;
        }
        let o = iou(gbox, &hyp[hi].1);
        if o >= iou_min {
            gt_used[gi] = true;
            hyp_used[hi] = true;
            pairs.push((*gid, h, o));
        }
    }

    let free_gt: Vec<usize> = (0..gt.len()).filter(|&i| !gt_used[i]).collect();
    let free_hyp: Vec<usize> = (0..hyp.len()).filter(|&j| !hyp_used[j]).collect();
    if !free_gt.is_empty() && !free_hyp.is_empty() {
        let overlaps: Vec<Vec<f64>> = free_gt
            .iter()
            .map(|&i| free_hyp.iter().map(|&j| iou(&gt[i].1, &hyp[j].1)).collect())
            .collect();
        // gated-out pairs cost as much as leaving both unmatched
        let cost: Vec<Vec<f64>> = overlaps
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&o| if o >= iou_min { 1.0 - o } else { 1.0 })
                    .collect()
            })
            .collect();
        for (a, b) in solve_assignment(&cost) {
            let o = overlaps[a][b];
            if o >= iou_min {
                let (gi, hi) = (free_gt[a], free_hyp[b]);
                gt_used[gi] = true;
                hyp_used[hi] = true;
                pairs.push((gt[gi].0, hyp[hi].0, o));
            }
        }
    }
    pairs.sort_by_key(|p| p.0);

    let mut switches = Vec::new();
    for &(g, h, _) in &pairs {
        if let Some(prev) = last.insert(g, h) {
            if prev != h {
                switches.push(g);
            }
        }
    }
    FrameMatch {
        fp: hyp.len() - pairs.len(),
        fn_: gt.len() - pairs.len(),
        pairs,
        switches,
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsReport {
    pub num_frames: usize,
    pub num_gt: usize,
    pub num_hyp: usize,
    pub matches: usize,
    pub fp: usize,
    pub fn_: usize,
    pub idsw: usize,
    /// `None` when there is no ground truth.
    pub mota: Option<f64>,
    /// Mean IOU of matched pairs.
    pub motp: Option<f64>,
    /// Gt objects matched in at least 80% / at most 20% of their frames.
    pub mostly_tracked: usize,
    pub mostly_lost: usize,
    pub matches_per_frame: Vec<usize>,
}

fn group(entries: &[GtEntry]) -> BTreeMap<u32, Vec<Labeled>> {
    let mut m: BTreeMap<u32, Vec<Labeled>> = BTreeMap::new();
    for e in entries {
        m.entry(e.frame).or_default().push((e.object_id, e.bbox));
    }
    m
}

/// Evaluates a hypothesis against ground truth over the union of their frames.
pub fn evaluate_sequence(gt: &[GtEntry], hyp: &[GtEntry], iou_min: f64) -> MetricsReport {
    let gt_frames = group(gt);
    let hyp_frames = group(hyp);
    let mut frames: Vec<u32> = gt_frames.keys().chain(hyp_frames.keys()).copied().collect();
    frames.sort_unstable();
    frames.dedup();

    let empty = Vec::new();
    let mut last = BTreeMap::new();
    let mut r = MetricsReport {
        num_frames: frames.len(),
        ..Default::default()
    };
    let mut iou_sum = 0.0;
    let mut per_object: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for f in frames {
        let g = gt_frames.get(&f).unwrap_or(&empty);
        let h = hyp_frames.get(&f).unwrap_or(&empty);
        let m = match_frame(g, h, &mut last, iou_min);
        r.num_gt += g.len();
        r.num_hyp += h.len();
        r.matches += m.pairs.len();
        r.fp += m.fp;
        r.fn_ += m.fn_;
        r.idsw += m.switches.len();
        r.matches_per_frame.push(m.pairs.len());
        iou_sum += m.pairs.iter().map(|p| p.2).sum::<f64>();
        for (id, _) in g {
            per_object.entry(*id).or_default().0 += 1;
        }
        for (id, _, _) in &m.pairs {
            per_object.entry(*id).or_default().1 += 1;
        }
    }
    if r.num_gt > 0 {
        r.mota = Some(1.0 - (r.fp + r.fn_ + r.idsw) as f64 / r.num_gt as f64);
    }
    if r.matches > 0 {
        r.motp = Some(iou_sum / r.matches as f64);
    }
    for (present, matched) in per_object.values() {
        let ratio = *matched as f64 / *present as f64;
        if ratio >= 0.8 {
            r.mostly_tracked += 1;
        } else if ratio <= 0.2 {
            r.mostly_lost += 1;
        }
    }
    r
}

/// Descriptive statistics with population standard deviation and type-7
/// (linear interpolation) quartiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Stats {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Stats {
            n,
            mean,
            std: var.sqrt(),
            min: sorted[0],
            q1: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q3: quantile(&sorted, 0.75),
            max: sorted[n - 1],
        })
    }
}

/// Type-7 quantile of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow<K> {
    pub key: K,
    pub mota: Stats,
    pub idsw: Stats,
}

/// Per-group statistics of `(mota, idsw)` samples, ordered by key. Groups
/// without samples are skipped with a warning.
pub fn aggregate<K: Ord + Clone + std::fmt::Debug>(
    groups: &BTreeMap<K, Vec<(f64, f64)>>,
) -> Vec<AggregateRow<K>> {
    let mut out = Vec::new();
    for (key, samples) in groups {
        let motas: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let idsws: Vec<f64> = samples.iter().map(|s| s.1).collect();
        match (Stats::of(&motas), Stats::of(&idsws)) {
            (Some(mota), Some(idsw)) => out.push(AggregateRow {
                key: key.clone(),
                mota,
                idsw,
            }),
            _ => log::warn!("group {key:?} has no results; skipped"),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor::ObjectClass;

    fn e(frame: u32, id: u32, x: f64) -> GtEntry {
        GtEntry {
            frame,
            object_id: id,
            bbox: BBox2D::new(x, 0.0, 10.0, 20.0),
            class: ObjectClass::Pedestrian,
            visibility: 1.0,
            depth: 0.0,
        }
    }

    #[test]
    fn identical_sets_are_perfect() {
        let gt: Vec<_> = (1..=3)
            .flat_map(|f| (1..=4).map(move |i| e(f, i, 30.0 * i as f64)))
            .collect();
        let r = evaluate_sequence(&gt, &gt, DEFAULT_IOU_MIN);
        assert_eq!((r.fp, r.fn_, r.idsw), (0, 0, 0));
        assert_eq!(r.mota, Some(1.0));
        assert_eq!(r.motp, Some(1.0));
        assert_eq!(r.mostly_tracked, 4);
    }

    #[test]
    fn empty_hypothesis_misses_everything() {
        let gt = [e(1, 1, 0.0), e(1, 2, 50.0)];
        let mut last = BTreeMap::new();
        let gt_l: Vec<Labeled> = gt.iter().map(|x| (x.object_id, x.bbox)).collect();
        let m = match_frame(&gt_l, &[], &mut last, 0.5);
        assert_eq!((m.fp, m.fn_), (0, 2));
    }

    #[test]
    fn switch_is_counted_once() {
        let gt = vec![e(1, 1, 0.0), e(2, 1, 0.0)];
        let hyp = vec![e(1, 1, 0.0), e(2, 2, 0.0)];
        let r = evaluate_sequence(&gt, &hyp, 0.5);
        assert_eq!(r.idsw, 1);
    }

    #[test]
    fn carry_over_beats_better_overlap() {
        // frame 2: hyp 2 overlaps gt better, but the hyp 1 pair still passes the gate
        let gt = vec![e(1, 1, 0.0), e(2, 1, 0.0)];
        let hyp = vec![e(1, 1, 0.0), e(2, 1, 2.0), e(2, 2, 0.0)];
        let r = evaluate_sequence(&gt, &hyp, 0.5);
        assert_eq!((r.idsw, r.fp, r.fn_), (0, 1, 0));
    }

    #[test]
    fn no_gt_means_no_mota() {
        let r = evaluate_sequence(&[], &[e(1, 1, 0.0)], 0.5);
        assert_eq!(r.mota, None);
        assert_eq!(r.fp, 1);
    }

    #[test]
    fn stats_hand_values() {
        let s = Stats::of(&[0.9, 1.0]).unwrap();
        assert!((s.mean - 0.95).abs() < 1e-12);
        assert!((s.std - 0.05).abs() < 1e-12);
        let one = Stats::of(&[0.7]).unwrap();
        assert_eq!((one.mean, one.std, one.q1, one.q3), (0.7, 0.0, 0.7, 0.7));
        // R: quantile(c(1,2,3,4), type = 7) -> 1.75 2.5 3.25
        let q = Stats::of(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (1.75, 2.5, 3.25));
    }

    #[test]
    fn aggregate_skips_empty_groups() {
        let mut g: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
        g.insert("sun", vec![(1.0, 0.0)]);
        g.insert("fog", vec![]);
        let rows = aggregate(&g);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].key, "sun");
    }
}
