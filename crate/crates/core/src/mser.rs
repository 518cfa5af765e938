//! Maximally stable extremal regions.
//!
//! The image is thresholded at every level `t` in `0..=255`; the connected
//! components (4-connectivity) of `{p : I(p) <= t}` are the extremal regions
//! at level `t`. A union-find sweep over pixels sorted by intensity builds
//! the component tree in one pass. A tree node is one lineage of
//! components: a component at level `t` continues the node of the single
//! level `t-1` component it contains, starts a new leaf when it contains
//! none, and starts a new parent node when it contains two or more.
//!
//! Each node keeps its area at every level where it exists, which is what
//! the stability score needs:
//!
//! ```text
//! v(i) = |Q(i+delta) - Q(i-delta)| / Q(i)
//! ```
//!
//! A region is reported when `v` reaches a local minimum along its node,
//! is below `max_variation` and the area is within bounds. Bright regions
//! are the dark regions of the inverted image.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::geometry::{iou, BBox};
use crate::raster::Raster;

/// Which extremal regions to extract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Polarity {
    /// Regions darker than their surroundings (ink on paper).
    Dark,
    /// Regions brighter than their surroundings.
    Bright,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct MserParams {
    /// Threshold step used by the stability score.
    pub delta: u8,
    /// Regions need a score strictly below this.
    pub max_variation: f64,
    pub min_area: u32,
    /// Defaults to 90% of the image area when unset.
    pub max_area: Option<u32>,
    pub polarity: Polarity,
}

impl Default for MserParams {
    fn default() -> Self {
        Self {
            delta: 3,
            max_variation: 0.25,
            min_area: 30,
            max_area: None,
            polarity: Polarity::Dark,
        }
    }
}

impl MserParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: alloc::string::String| Err(CoreError::InvalidParameter { name, reason });
        if !(1..=127).contains(&self.delta) {
            return bad("delta", alloc::format!("{} is not in 1..=127", self.delta));
        }
        if !(self.max_variation > 0.0) {
            return bad("max_variation", alloc::format!("{} must be positive", self.max_variation));
        }
        if let Some(max) = self.max_area {
            if self.min_area >= max {
                return bad(
                    "min_area",
                    alloc::format!("min_area {} must be below max_area {max}", self.min_area),
                );
            }
        }
        Ok(())
    }

    /// Upper area bound for an image with `pixels` pixels.
    pub fn max_area_for(&self, pixels: usize) -> u32 {
        self.max_area
            .unwrap_or_else(|| libm::floor(0.9 * pixels as f64) as u32)
    }
}

/// `|q_plus - q_minus| / q`.
pub fn stability_from_areas(q_minus: u32, q: u32, q_plus: u32) -> f64 {
    f64::from(q_plus.abs_diff(q_minus)) / f64::from(q)
}

/// One lineage of extremal components in the component tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// First threshold at which the node exists.
    pub birth: u8,
    /// `areas[k]` is the area at threshold `birth + k`.
    pub areas: Vec<u32>,
    /// Index of a pixel that belongs to the node from its birth onwards.
    pub seed: u32,
}

impl Node {
    /// Last threshold at which the node exists.
    pub fn death(&self) -> u8 {
        (usize::from(self.birth) + self.areas.len() - 1) as u8
    }

    pub fn exists_at(&self, t: u8) -> bool {
        t >= self.birth && t <= self.death()
    }

    pub fn area_at(&self, t: u8) -> Option<u32> {
        if self.exists_at(t) {
            Some(self.areas[usize::from(t - self.birth)])
        } else {
            None
        }
    }

    /// Stability at threshold `i`, or `None` when `i - delta` or
    /// `i + delta` falls outside the node's lifetime.
    pub fn stability(&self, i: u8, delta: u8) -> Option<f64> {
        let lo = i.checked_sub(delta)?;
        let hi = i.checked_add(delta)?;
        let q_minus = self.area_at(lo)?;
        let q = self.area_at(i)?;
        let q_plus = self.area_at(hi)?;
        Some(stability_from_areas(q_minus, q, q_plus))
    }
}

/// Horizontal runs `(y, x_start, x_end_exclusive)`, sorted by row then column.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PixelRuns {
    pub runs: Vec<(u32, u32, u32)>,
}

impl PixelRuns {
    fn from_sorted_indices(indices: &[u32], width: u32) -> Self {
        let mut runs: Vec<(u32, u32, u32)> = Vec::new();
        for &idx in indices {
            let (y, x) = (idx / width, idx % width);
            match runs.last_mut() {
                Some(last) if last.0 == y && last.2 == x => last.2 += 1,
                _ => runs.push((y, x, x + 1)),
            }
        }
        Self { runs }
    }

    pub fn area(&self) -> u32 {
        self.runs.iter().map(|&(_, a, b)| b - a).sum()
    }

    /// Tight bounding box; `None` for an empty set.
    pub fn bbox(&self) -> Option<BBox> {
        let first = self.runs.first()?;
        let last = self.runs.last()?;
        let x0 = self.runs.iter().map(|r| r.1).min()?;
        let x1 = self.runs.iter().map(|r| r.2).max()?;
        BBox::from_corners(x0, first.0, x1, last.0 + 1).ok()
    }

    /// Row-major pixel indices.
    pub fn indices(&self, width: u32) -> Vec<u32> {
        self.runs
            .iter()
            .flat_map(|&(y, a, b)| (a..b).map(move |x| y * width + x))
            .collect()
    }
}

const NONE: u32 = u32::MAX;

/// Component tree of one polarity of an image.
#[derive(Debug, Clone)]
pub struct ComponentTree {
    width: u32,
    height: u32,
    polarity: Polarity,
    /// Threshold-space intensities (inverted for bright polarity).
    levels: Vec<u8>,
    nodes: Vec<Node>,
}

struct Sweep {
    parent: Vec<u32>,
    size: Vec<u32>,
    node: Vec<u32>,
    stamp: Vec<u16>,
    prior: Vec<Vec<u32>>,
}

impl Sweep {
    fn find(&mut self, mut p: u32) -> u32 {
        let mut root = p;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[p as usize] != root {
            let next = self.parent[p as usize];
            self.parent[p as usize] = root;
            p = next;
        }
        root
    }

    /// Starts this level's list of pre-existing nodes for root `r`.
    fn touch(&mut self, r: u32, level: u16) {
        let r = r as usize;
        if self.stamp[r] != level {
            self.stamp[r] = level;
            self.prior[r].clear();
            if self.node[r] != NONE {
                self.prior[r].push(self.node[r]);
            }
        }
    }
}

fn fill_to(node: &mut Node, t: u8) {
    let last = *node.areas.last().expect("nodes are created with an area");
    while node.death() < t {
        node.areas.push(last);
    }
}

impl ComponentTree {
    pub fn build(image: &Raster, polarity: Polarity) -> Self {
        let levels: Vec<u8> = match polarity {
            Polarity::Dark => image.pixels().to_vec(),
            Polarity::Bright => image.pixels().iter().map(|&p| 255 - p).collect(),
        };
        let (width, height) = (image.width(), image.height());
        let n = levels.len();

        // counting sort of pixel indices by level
        let mut start = [0usize; 257];
        for &l in &levels {
            start[usize::from(l) + 1] += 1;
        }
        for i in 1..257 {
            start[i] += start[i - 1];
        }
        let mut order = vec![0u32; n];
        let mut cursor = start;
        for (idx, &l) in levels.iter().enumerate() {
            order[cursor[usize::from(l)]] = idx as u32;
            cursor[usize::from(l)] += 1;
        }

        let mut s = Sweep {
            parent: (0..n as u32).collect(),
            size: vec![0; n],
            node: vec![NONE; n],
            stamp: vec![u16::MAX; n],
            prior: vec![Vec::new(); n],
        };
        let mut added = vec![false; n];
        let mut seen = vec![u16::MAX; n];
        let mut nodes: Vec<Node> = Vec::new();
        let w = width as usize;

        for t in 0..=255u8 {
            let level = u16::from(t);
            let batch = &order[start[usize::from(t)]..start[usize::from(t) + 1]];
            if batch.is_empty() {
                continue;
            }
            for &p in batch {
                let pi = p as usize;
                added[pi] = true;
                s.size[pi] = 1;
                s.stamp[pi] = level;
                s.prior[pi].clear();
                let (x, y) = (pi % w, pi / w);
                let mut neighbours = [NONE; 4];
                if x > 0 {
                    neighbours[0] = p - 1;
                }
                if x + 1 < w {
                    neighbours[1] = p + 1;
                }
                if y > 0 {
                    neighbours[2] = p - width;
                }
                if y + 1 < height as usize {
                    neighbours[3] = p + width;
                }
                for q in neighbours {
                    if q == NONE || !added[q as usize] {
                        continue;
                    }
                    let rp = s.find(p);
                    let rq = s.find(q);
                    if rp == rq {
                        continue;
                    }
                    s.touch(rp, level);
                    s.touch(rq, level);
                    let (big, small) = if s.size[rp as usize] >= s.size[rq as usize] {
                        (rp, rq)
                    } else {
                        (rq, rp)
                    };
                    s.parent[small as usize] = big;
                    s.size[big as usize] += s.size[small as usize];
                    let moved = core::mem::take(&mut s.prior[small as usize]);
                    s.prior[big as usize].extend(moved);
                }
            }

            for &p in batch {
                let r = s.find(p);
                if seen[r as usize] == level {
                    continue;
                }
                seen[r as usize] = level;
                let area = s.size[r as usize];
                let prior = core::mem::take(&mut s.prior[r as usize]);
                let id = match prior.len() {
                    1 => {
                        let id = prior[0] as usize;
                        if t > 0 {
                            fill_to(&mut nodes[id], t - 1);
                        }
                        nodes[id].areas.push(area);
                        id
                    }
                    0 => {
                        nodes.push(Node {
                            parent: None,
                            children: Vec::new(),
                            birth: t,
                            areas: vec![area],
                            seed: r,
                        });
                        nodes.len() - 1
                    }
                    _ => {
                        let id = nodes.len();
                        let mut children: Vec<usize> = prior.iter().map(|&c| c as usize).collect();
                        children.sort_unstable();
                        for &c in &children {
                            fill_to(&mut nodes[c], t - 1);
                            nodes[c].parent = Some(id);
                        }
                        let seed = nodes[children[0]].seed;
                        nodes.push(Node {
                            parent: None,
                            children,
                            birth: t,
                            areas: vec![area],
                            seed,
                        });
                        id
                    }
                };
                s.node[r as usize] = id as u32;
                s.prior[r as usize] = prior;
                s.prior[r as usize].clear();
            }
        }
        for node in nodes.iter_mut().filter(|n| n.parent.is_none()) {
            fill_to(node, 255);
        }

        Self {
            width,
            height,
            polarity,
            levels,
            nodes,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.parent.is_none())
            .map(|(i, _)| i)
    }

    /// Nodes alive at threshold `t`.
    pub fn alive_at(&self, t: u8) -> impl Iterator<Item = usize> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(move |(_, n)| n.exists_at(t))
            .map(|(i, _)| i)
    }

    /// True when `descendant` is `ancestor` or lies below it.
    pub fn is_descendant(&self, descendant: usize, ancestor: usize) -> bool {
        let mut cur = Some(descendant);
        while let Some(c) = cur {
            if c == ancestor {
                return true;
            }
            cur = self.nodes[c].parent;
        }
        false
    }

    /// Pixels of node `id` at threshold `t`, or `None` if it does not exist
    /// there.
    pub fn pixels_at(&self, id: usize, t: u8) -> Option<PixelRuns> {
        let node = &self.nodes[id];
        if !node.exists_at(t) {
            return None;
        }
        let w = self.width as usize;
        let h = self.height as usize;
        let mut visited = vec![false; self.levels.len()];
        let mut queue = VecDeque::new();
        let mut members = Vec::new();
        visited[node.seed as usize] = true;
        queue.push_back(node.seed as usize);
        while let Some(p) = queue.pop_front() {
            members.push(p as u32);
            let (x, y) = (p % w, p / w);
            let mut visit = |q: usize| {
                if !visited[q] && self.levels[q] <= t {
                    visited[q] = true;
                    queue.push_back(q);
                }
            };
            if x > 0 {
                visit(p - 1);
            }
            if x + 1 < w {
                visit(p + 1);
            }
            if y > 0 {
                visit(p - w);
            }
            if y + 1 < h {
                visit(p + w);
            }
        }
        members.sort_unstable();
        Some(PixelRuns::from_sorted_indices(&members, self.width))
    }
}

/// An extracted stable region.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    /// Index of the owning node in its [`ComponentTree`].
    pub node: usize,
    /// Threshold (in the polarity's threshold space) where the score was
    /// minimal.
    pub threshold: u8,
    pub polarity: Polarity,
    pub pixels: PixelRuns,
    pub area: u32,
    pub bbox: BBox,
    pub stability: f64,
    /// Area history of the owning node, starting at `birth`.
    pub birth: u8,
    pub areas: Vec<u32>,
}

impl Region {
    pub fn area_at(&self, t: u8) -> Option<u32> {
        let k = usize::from(t.checked_sub(self.birth)?);
        self.areas.get(k).copied()
    }
}

/// Candidate before pixel sets are materialized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub node: usize,
    pub threshold: u8,
    pub stability: f64,
    pub area: u32,
}

/// Thresholds where a node's stability reaches a local minimum. A plateau
/// of equal scores counts once, at its first threshold, when both sides
/// (if any) are strictly higher.
pub fn local_minima(node: &Node, delta: u8) -> Vec<(u8, f64)> {
    let first = usize::from(node.birth) + usize::from(delta);
    let last = usize::from(node.death()).checked_sub(usize::from(delta));
    let Some(last) = last.filter(|&l| l >= first) else {
        return Vec::new();
    };
    let scores: Vec<f64> = (first..=last)
        .map(|i| node.stability(i as u8, delta).expect("within scoreable range"))
        .collect();
    let mut out = Vec::new();
    let mut a = 0;
    while a < scores.len() {
        let mut b = a;
        while b + 1 < scores.len() && scores[b + 1] == scores[a] {
            b += 1;
        }
        let left_ok = a == 0 || scores[a - 1] > scores[a];
        let right_ok = b + 1 == scores.len() || scores[b + 1] > scores[a];
        if left_ok && right_ok {
            out.push(((first + a) as u8, scores[a]));
        }
        a = b + 1;
    }
    out
}

/// Parent/child area ratio above which nested regions count as duplicates.
pub const NESTED_AREA_RATIO: f64 = 0.95;

fn contains(tree: &ComponentTree, outer: &Candidate, inner: &Candidate) -> bool {
    if outer.node == inner.node {
        inner.threshold <= outer.threshold
    } else {
        tree.is_descendant(inner.node, outer.node)
    }
}

/// Removes near-duplicate nested candidates: whenever a candidate's nearest
/// surviving container has an area ratio above [`NESTED_AREA_RATIO`], the
/// one with the higher score goes (the container wins ties).
pub fn collapse_nested(tree: &ComponentTree, mut cands: Vec<Candidate>) -> Vec<Candidate> {
    cands.sort_by(|a, b| {
        a.area
            .cmp(&b.area)
            .then(a.node.cmp(&b.node))
            .then(a.threshold.cmp(&b.threshold))
    });
    let n = cands.len();
    let mut alive = vec![true; n];
    // container chain in ascending area: the nearest container of i is the
    // smallest later candidate containing it
    let nearest_container = |i: usize, alive: &[bool]| -> Option<usize> {
        (i + 1..n).find(|&j| alive[j] && contains(tree, &cands[j], &cands[i]))
    };
    for i in 0..n {
        while alive[i] {
            let Some(j) = nearest_container(i, &alive) else {
                break;
            };
            let ratio = f64::from(cands[i].area) / f64::from(cands[j].area);
            if ratio <= NESTED_AREA_RATIO {
                break;
            }
            if cands[i].stability < cands[j].stability {
                alive[j] = false;
            } else {
                alive[i] = false;
            }
        }
    }
    cands
        .into_iter()
        .zip(alive)
        .filter_map(|(c, keep)| keep.then_some(c))
        .collect()
}

/// Stable candidates of a built tree before nested-duplicate collapse.
pub fn stable_candidates(tree: &ComponentTree, params: &MserParams) -> Vec<Candidate> {
    let max_area = params.max_area_for(tree.levels.len());
    let mut out = Vec::new();
    for (id, node) in tree.nodes.iter().enumerate() {
        for (t, v) in local_minima(node, params.delta) {
            let area = node.area_at(t).expect("minimum lies within lifetime");
            if v < params.max_variation && area >= params.min_area && area <= max_area {
                out.push(Candidate {
                    node: id,
                    threshold: t,
                    stability: v,
                    area,
                });
            }
        }
    }
    out
}

/// Regions of `tree` selected by `params`, ordered by node then threshold.
pub fn select_regions(tree: &ComponentTree, params: &MserParams) -> Vec<Region> {
    let mut cands = collapse_nested(tree, stable_candidates(tree, params));
    cands.sort_by(|a, b| a.node.cmp(&b.node).then(a.threshold.cmp(&b.threshold)));
    cands
        .into_iter()
        .map(|c| {
            let node = tree.node(c.node);
            let pixels = tree
                .pixels_at(c.node, c.threshold)
                .expect("candidate lies within lifetime");
            let bbox = pixels.bbox().expect("regions are non-empty");
            Region {
                node: c.node,
                threshold: c.threshold,
                polarity: tree.polarity,
                area: pixels.area(),
                pixels,
                bbox,
                stability: c.stability,
                birth: node.birth,
                areas: node.areas.clone(),
            }
        })
        .collect()
}

/// Maximally stable extremal regions of one polarity.
pub fn extract_mser(image: &Raster, params: &MserParams) -> Result<Vec<Region>> {
    params.validate()?;
    let tree = ComponentTree::build(image, params.polarity);
    Ok(select_regions(&tree, params))
}

/// Settings for turning regions of both polarities into candidate boxes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ProposalParams {
    pub mser: MserParams,
    /// Boxes smaller than this fraction of the image area are dropped.
    pub tiny_area_fraction: f64,
    /// Boxes overlapping a more stable box above this IoU are dropped.
    pub dedup_iou: f64,
}

impl Default for ProposalParams {
    fn default() -> Self {
        Self {
            mser: MserParams::default(),
            tiny_area_fraction: 0.001,
            dedup_iou: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Proposal {
    pub bbox: BBox,
    pub stability: f64,
}

/// Candidate boxes from both polarities, tiny boxes removed and
/// near-duplicates suppressed. Ordered by stability (most stable first).
pub fn proposals(image: &Raster, params: &ProposalParams) -> Result<Vec<Proposal>> {
    params.mser.validate()?;
    let mut all = Vec::new();
    for polarity in [Polarity::Dark, Polarity::Bright] {
        let p = MserParams {
            polarity,
            ..params.mser
        };
        all.extend(extract_mser(image, &p)?.into_iter().map(|r| Proposal {
            bbox: r.bbox,
            stability: r.stability,
        }));
    }
    let tiny = params.tiny_area_fraction * image.len() as f64;
    all.retain(|p| p.bbox.area() as f64 >= tiny);
    all.sort_by(|a, b| {
        a.stability
            .total_cmp(&b.stability)
            .then(a.bbox.cmp(&b.bbox))
    });
    let mut kept: Vec<Proposal> = Vec::new();
    for p in all {
        if kept.iter().all(|k| iou(&k.bbox, &p.bbox) <= params.dedup_iou) {
            kept.push(p);
        }
    }
    Ok(kept)
}
