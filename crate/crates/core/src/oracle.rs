//! Brute-force reference implementations used by the test suites.
//!
//! Each function here recomputes a result the slow, obvious way and shares
//! no code with the production path it checks: boxes are rasterized and
//! counted, components are flood-filled separately at every threshold,
//! Otsu scans every threshold over raw pixels, and so on. Only compiled
//! for tests or with the `oracle` feature.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::BBox;
use crate::raster::Raster;

/// Intersection and union pixel counts by painting both boxes on a grid.
pub fn pixel_count_overlap(a: &BBox, b: &BBox, grid_w: u32, grid_h: u32) -> (u64, u64) {
    let (mut inter, mut union) = (0, 0);
    for y in 0..grid_h {
        for x in 0..grid_w {
            let in_a = x >= a.x() && x < a.x() + a.w() && y >= a.y() && y < a.y() + a.h();
            let in_b = x >= b.x() && x < b.x() + b.w() && y >= b.y() && y < b.y() + b.h();
            inter += u64::from(in_a && in_b);
            union += u64::from(in_a || in_b);
        }
    }
    (inter, union)
}

pub fn pixel_count_iou(a: &BBox, b: &BBox, grid_w: u32, grid_h: u32) -> f64 {
    let (i, u) = pixel_count_overlap(a, b, grid_w, grid_h);
    i as f64 / u as f64
}

/// Connected components (4-connectivity) of `{p : levels[p] <= t}`, each
/// as a sorted pixel-index list, ordered by smallest index.
pub fn flood_components(levels: &[u8], width: u32, height: u32, t: u8) -> Vec<Vec<u32>> {
    let (w, h) = (width as usize, height as usize);
    let mut label = vec![usize::MAX; levels.len()];
    let mut comps = Vec::new();
    for start in 0..levels.len() {
        if levels[start] > t || label[start] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = Vec::new();
        let mut queue = VecDeque::from([start]);
        label[start] = id;
        while let Some(p) = queue.pop_front() {
            members.push(p as u32);
            let (x, y) = (p % w, p / w);
            let mut nbrs = Vec::new();
            if x > 0 {
                nbrs.push(p - 1);
            }
            if x + 1 < w {
                nbrs.push(p + 1);
            }
            if y > 0 {
                nbrs.push(p - w);
            }
            if y + 1 < h {
                nbrs.push(p + w);
            }
            for q in nbrs {
                if levels[q] <= t && label[q] == usize::MAX {
                    label[q] = id;
                    queue.push_back(q);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps
}

/// Lineage node rebuilt from per-threshold flood fills.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleNode {
    pub birth: u8,
    /// `(threshold, pixel set)` for every threshold of the node's lifetime.
    pub history: Vec<(u8, Vec<u32>)>,
    pub parent: Option<usize>,
}

impl OracleNode {
    pub fn area_at(&self, t: u8) -> Option<u32> {
        self.history
            .iter()
            .find(|(tt, _)| *tt == t)
            .map(|(_, s)| s.len() as u32)
    }

    pub fn death(&self) -> u8 {
        self.history.last().expect("non-empty").0
    }
}

/// Component lineages: a level-`t` component continues the node of the
/// unique level-`t-1` component inside it, and starts a new node when it
/// contains none or several.
pub fn oracle_tree(levels: &[u8], width: u32, height: u32) -> Vec<OracleNode> {
    let mut nodes: Vec<OracleNode> = Vec::new();
    // node id of each component at the previous threshold
    let mut prev: Vec<(Vec<u32>, usize)> = Vec::new();
    for t in 0..=255u8 {
        let comps = flood_components(levels, width, height, t);
        let mut next = Vec::new();
        for comp in comps {
            let inside: Vec<usize> = prev
                .iter()
                .filter(|(set, _)| comp.binary_search(&set[0]).is_ok())
                .map(|(_, id)| *id)
                .collect();
            let id = if inside.len() == 1 {
                inside[0]
            } else {
                nodes.push(OracleNode {
                    birth: t,
                    history: Vec::new(),
                    parent: None,
                });
                let id = nodes.len() - 1;
                for c in inside {
                    nodes[c].parent = Some(id);
                }
                id
            };
            nodes[id].history.push((t, comp.clone()));
            next.push((comp, id));
        }
        prev = next;
    }
    nodes
}

/// `|Q(i+d) - Q(i-d)| / Q(i)` from a node's own history.
pub fn oracle_stability(node: &OracleNode, i: u8, delta: u8) -> Option<f64> {
    let lo = i.checked_sub(delta)?;
    let hi = i.checked_add(delta)?;
    let qm = f64::from(node.area_at(lo)?);
    let q = f64::from(node.area_at(i)?);
    let qp = f64::from(node.area_at(hi)?);
    Some((qp - qm).abs() / q)
}

/// A selected region as the oracle sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRegion {
    pub threshold: u8,
    pub pixels: Vec<u32>,
    pub stability: f64,
}

fn is_subset(small: &[u32], big: &[u32]) -> bool {
    small.iter().all(|p| big.binary_search(p).is_ok())
}

/// Full MSER selection recomputed from flood fills: plateau-aware local
/// minima of the score per node, score and area filters, then removal of
/// nested near-duplicates (area ratio above `nested_ratio`, higher score
/// loses, container wins ties) until none remain.
#[allow(clippy::too_many_arguments)]
pub fn oracle_mser(
    levels: &[u8],
    width: u32,
    height: u32,
    delta: u8,
    max_variation: f64,
    min_area: u32,
    max_area: u32,
    nested_ratio: f64,
) -> Vec<OracleRegion> {
    let nodes = oracle_tree(levels, width, height);
    let mut cands: Vec<OracleRegion> = Vec::new();
    for node in &nodes {
        let scored: Vec<(u8, f64)> = node
            .history
            .iter()
            .filter_map(|(t, _)| oracle_stability(node, *t, delta).map(|v| (*t, v)))
            .collect();
        for (k, &(t, v)) in scored.iter().enumerate() {
            // start of a plateau whose neighbours on both sides are higher
            if k > 0 && scored[k - 1].1 == v {
                continue;
            }
            let left = k == 0 || scored[k - 1].1 > v;
            let mut end = k;
            while end + 1 < scored.len() && scored[end + 1].1 == v {
                end += 1;
            }
            let right = end + 1 == scored.len() || scored[end + 1].1 > v;
            let area = node.area_at(t).expect("scored inside lifetime");
            if left && right && v < max_variation && area >= min_area && area <= max_area {
                let pixels = node
                    .history
                    .iter()
                    .find(|(tt, _)| *tt == t)
                    .map(|(_, s)| s.clone())
                    .expect("present");
                cands.push(OracleRegion {
                    threshold: t,
                    pixels,
                    stability: v,
                });
            }
        }
    }
    loop {
        cands.sort_by_key(|c| c.pixels.len());
        let mut victim = None;
        'outer: for (i, c) in cands.iter().enumerate() {
            let parent = cands
                .iter()
                .enumerate()
                .filter(|(j, p)| *j != i && p.pixels.len() >= c.pixels.len() && is_subset(&c.pixels, &p.pixels))
                .filter(|(j, p)| p.pixels.len() > c.pixels.len() || *j > i)
                .min_by_key(|(_, p)| p.pixels.len());
            if let Some((j, p)) = parent {
                if c.pixels.len() as f64 / p.pixels.len() as f64 > nested_ratio {
                    victim = Some(if c.stability < p.stability { j } else { i });
                    break 'outer;
                }
            }
        }
        match victim {
            Some(v) => {
                cands.remove(v);
            }
            None => break,
        }
    }
    cands
}

/// Otsu threshold by scanning every `t` over the raw pixels; exact
/// rational comparison, smallest `t` on ties.
pub fn otsu_exhaustive(img: &Raster) -> Option<u8> {
    let mut best: Option<(u8, u128, u128)> = None;
    for t in 0..=255u8 {
        let (mut n0, mut s0, mut n1, mut s1) = (0u128, 0u128, 0u128, 0u128);
        for &p in img.pixels() {
            if p <= t {
                n0 += 1;
                s0 += u128::from(p);
            } else {
                n1 += 1;
                s1 += u128::from(p);
            }
        }
        if n0 == 0 || n1 == 0 {
            continue;
        }
        // n0 n1 (mu0 - mu1)^2 = (s0 n1 - s1 n0)^2 / (n0 n1)
        let d = (s0 * n1).abs_diff(s1 * n0);
        let (num, den) = (d * d, n0 * n1);
        let better = match best {
            None => true,
            Some((_, bn, bd)) => num * bd > bn * den,
        };
        if better {
            best = Some((t, num, den));
        }
    }
    best.map(|(t, ..)| t)
}

/// Cut gaps of a binary row found by walking it: every maximal run of
/// blank columns with ink on both sides, kept when longer than the mean of
/// all such runs. Returned as `(start, end)` column ranges.
pub fn gap_scan_cuts(ink: &[bool]) -> Vec<(u32, u32)> {
    let mut gaps = Vec::new();
    let mut seen_ink = false;
    let mut run_start = None;
    for (i, &b) in ink.iter().enumerate() {
        if b {
            if let (Some(s), true) = (run_start, seen_ink) {
                gaps.push((s as u32, i as u32));
            }
            run_start = None;
            seen_ink = true;
        } else if run_start.is_none() {
            run_start = Some(i);
        }
    }
    if gaps.is_empty() {
        return gaps;
    }
    let mean = gaps.iter().map(|(a, b)| f64::from(b - a)).sum::<f64>() / gaps.len() as f64;
    gaps.into_iter().filter(|(a, b)| f64::from(b - a) > mean).collect()
}

/// Levenshtein distance with the full `(m+1) x (n+1)` table.
pub fn levenshtein_table(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = if a[i - 1] == b[j - 1] { 0 } else { 1 };
            d[i][j] = (d[i - 1][j] + 1)
                .min(d[i][j - 1] + 1)
                .min(d[i - 1][j - 1] + cost);
        }
    }
    d[a.len()][b.len()]
}

/// All one-to-one matchings with every pair at or above `threshold` (and
/// positive); returns the one whose IoUs, sorted descending, are
/// lexicographically largest, as `pred -> gt`.
pub fn best_matching_exhaustive(preds: &[BBox], gt: &[BBox], threshold: f64) -> BTreeMap<usize, usize> {
    let grid_w = preds.iter().chain(gt).map(|b| b.right()).max().unwrap_or(1);
    let grid_h = preds.iter().chain(gt).map(|b| b.bottom()).max().unwrap_or(1);
    let table: Vec<Vec<f64>> = preds
        .iter()
        .map(|p| gt.iter().map(|g| pixel_count_iou(p, g, grid_w, grid_h)).collect())
        .collect();
    fn better(a: &[f64], b: &[f64]) -> bool {
        for k in 0..a.len().max(b.len()) {
            let x = a.get(k).copied().unwrap_or(-1.0);
            let y = b.get(k).copied().unwrap_or(-1.0);
            if x != y {
                return x > y;
            }
        }
        false
    }
    fn rec(
        p: usize,
        table: &[Vec<f64>],
        threshold: f64,
        used: &mut Vec<bool>,
        cur: &mut BTreeMap<usize, usize>,
        best: &mut (BTreeMap<usize, usize>, Vec<f64>),
    ) {
        if p == table.len() {
            let mut s: Vec<f64> = cur.iter().map(|(&p, &g)| table[p][g]).collect();
            s.sort_by(|a, b| b.total_cmp(a));
            if better(&s, &best.1) {
                *best = (cur.clone(), s);
            }
            return;
        }
        rec(p + 1, table, threshold, used, cur, best);
        for g in 0..used.len() {
            let v = table[p][g];
            if !used[g] && v > 0.0 && v >= threshold {
                used[g] = true;
                cur.insert(p, g);
                rec(p + 1, table, threshold, used, cur, best);
                cur.remove(&p);
                used[g] = false;
            }
        }
    }
    let mut best = (BTreeMap::new(), Vec::new());
    rec(
        0,
        &table,
        threshold,
        &mut vec![false; gt.len()],
        &mut BTreeMap::new(),
        &mut best,
    );
    best.0
}
