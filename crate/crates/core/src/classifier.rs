//! Sorting attracted parameters into the three hyperbolic types.
//!
//! Type 1 (V1 only): the free critical point is attracted to infinity.
//! Type 2: it lies in the immediate basin of a cycle point.
//! Type 3: it is attracted to the cycle but outside the immediate basins.
//!
//! Membership in the immediate basin is first tried with the straight segment
//! from the free critical point to its attractor; when some sample on the
//! segment falls outside the basin, a grid flood fill decides.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::families::{ExcludedParameter, Family};
use crate::sphere::{
    detect_attraction, limit_phases, timed_limit_phase, IterConfig, QuadMap, SpherePoint, LANES,
};

/// Cycle points beyond this modulus are handled in the chart `w = 1/z`.
pub const CHART_SWITCH_RADIUS: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Kind {
    Type1,
    Type2,
    Type3,
    NotAttracted,
    InvalidParam,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    None,
    Segment,
    Floodfill,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: Kind,
    pub phase: Option<usize>,
    pub method: Method,
    pub steps: u32,
}

impl Classification {
    fn plain(kind: Kind) -> Self {
        Classification { kind, phase: None, method: Method::None, steps: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasinGridConfig {
    pub grid_size: u32,
    pub padding_factor: f64,
    pub max_window_growth: u32,
    pub segment_samples: u32,
    /// A coarse grid can leak across thin gaps between basin components.
    /// When set, a flood that connects is redone at this finer size.
    #[serde(default)]
    pub confirm_grid_size: Option<u32>,
    /// Cells count as basin only when captured within this many cycle
    /// periods after the free critical point itself is captured. `None`
    /// accepts any capture time.
    #[serde(default = "default_capture_slack")]
    pub capture_slack: Option<u32>,
}

fn default_capture_slack() -> Option<u32> {
    Some(1)
}

impl Default for BasinGridConfig {
    fn default() -> Self {
        BasinGridConfig {
            grid_size: 512,
            padding_factor: 2.0,
            max_window_growth: 3,
            segment_samples: 101,
            confirm_grid_size: None,
            capture_slack: default_capture_slack(),
        }
    }
}

impl BasinGridConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.grid_size < 16 {
            return Err(format!("grid size must be at least 16, got {}", self.grid_size));
        }
        if !(self.padding_factor > 1.0 && self.padding_factor.is_finite()) {
            return Err(format!("padding factor must exceed 1, got {}", self.padding_factor));
        }
        if let Some(g) = self.confirm_grid_size {
            if g < self.grid_size {
                return Err(format!("confirm grid {g} is coarser than the search grid {}", self.grid_size));
            }
        }
        if self.segment_samples < 3 {
            return Err(format!("need at least 3 segment samples, got {}", self.segment_samples));
        }
        Ok(())
    }
}

/// The coordinate in which a basin test runs: `z` itself, or `1/z` when the
/// attractor is at or near infinity. Inversion is a chordal isometry, so
/// convergence is still judged on the sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Chart {
    Direct,
    Inverted,
}

impl Chart {
    fn for_attractor(p: SpherePoint) -> Self {
        match p {
            SpherePoint::Finite(z) if z.norm() <= CHART_SWITCH_RADIUS => Chart::Direct,
            _ => Chart::Inverted,
        }
    }

    fn to_chart(self, z: SpherePoint) -> SpherePoint {
        match self {
            Chart::Direct => z,
            Chart::Inverted => z.invert(),
        }
    }

    fn from_chart(self, w: Complex64) -> SpherePoint {
        match self {
            Chart::Direct => SpherePoint::new(w),
            Chart::Inverted => SpherePoint::new(w).invert(),
        }
    }
}

/// Whether every sample of the straight segment from `z_star` to `p_star`
/// converges under `f^n` to `p_star`, the cycle point with index `phase`.
pub fn segment_test(
    map: &QuadMap,
    cycle: &[SpherePoint],
    phase: usize,
    z_star: SpherePoint,
    cfg: &IterConfig,
    grid: &BasinGridConfig,
) -> bool {
    let p_star = cycle[phase];
    if z_star == p_star {
        return true;
    }
    let chart = Chart::for_attractor(p_star);
    let (Some(p), Some(z)) = (chart.to_chart(p_star).finite(), chart.to_chart(z_star).finite()) else {
        return false;
    };
    let k = grid.segment_samples.max(2) - 1;
    let samples: Vec<SpherePoint> = (0..=k)
        .map(|s| chart.from_chart(z + (p - z) * (s as f64 / k as f64)))
        .collect();
    let mut phases = [None; LANES];
    samples.chunks(LANES).all(|chunk| {
        let out = &mut phases[..chunk.len()];
        limit_phases(map, chunk, cycle, cfg, out);
        out.iter().all(|&q| q == Some(phase))
    })
}

const UNKNOWN: u8 = 0;
const INSIDE: u8 = 1;
const OUTSIDE: u8 = 2;

/// A square grid over the chart with lazily evaluated basin membership.
struct BasinGrid<'a> {
    map: &'a QuadMap,
    cycle: &'a [SpherePoint],
    phase: usize,
    cfg: &'a IterConfig,
    chart: Chart,
    center: Complex64,
    half: f64,
    size: u32,
    state: Vec<u8>,
    /// Interior samples required on a link between adjacent cell centers.
    edge_samples: u32,
}

impl BasinGrid<'_> {
    fn cell_of(&self, w: Complex64) -> Option<(u32, u32)> {
        let g = self.size as f64;
        let x = ((w.re - (self.center.re - self.half)) / (2.0 * self.half) * g).floor();
        let y = (((self.center.im + self.half) - w.im) / (2.0 * self.half) * g).floor();
        if x >= 0.0 && x < g && y >= 0.0 && y < g {
            Some((x as u32, y as u32))
        } else {
            None
        }
    }

    fn cell_center(&self, i: u32, j: u32) -> Complex64 {
        let g = self.size as i64;
        let x = (2 * i as i64 + 1 - g) as f64 / g as f64;
        let y = (g - (2 * j as i64 + 1)) as f64 / g as f64;
        Complex64::new(self.center.re + self.half * x, self.center.im + self.half * y)
    }

    /// Membership of cell `(i, j)`. Unknown cells are evaluated together
    /// with the rest of their 2x2 block, which the flood usually needs next.
    fn inside(&mut self, i: u32, j: u32) -> bool {
        let idx = (j * self.size + i) as usize;
        if self.state[idx] == UNKNOWN {
            let mut cells = [(0u32, 0u32); LANES];
            let mut starts = [SpherePoint::ZERO; LANES];
            let mut count = 0;
            for (x, y) in [(i & !1, j & !1), (i | 1, j & !1), (i & !1, j | 1), (i | 1, j | 1)] {
                if x < self.size && y < self.size && self.state[(y * self.size + x) as usize] == UNKNOWN {
                    cells[count] = (x, y);
                    starts[count] = self.chart.from_chart(self.cell_center(x, y));
                    count += 1;
                }
            }
            let mut phases = [None; LANES];
            limit_phases(self.map, &starts[..count], self.cycle, self.cfg, &mut phases[..count]);
            for (&(x, y), phase) in cells[..count].iter().zip(phases) {
                self.state[(y * self.size + x) as usize] =
                    if phase == Some(self.phase) { INSIDE } else { OUTSIDE };
            }
        }
        self.state[idx] == INSIDE
    }

    /// Whether the link between the centers of adjacent cells stays in the
    /// basin at the sampled points.
    fn link_clear(&self, (i, j): (u32, u32), (x, y): (u32, u32)) -> bool {
        let k = self.edge_samples;
        if k == 0 {
            return true;
        }
        let (u, v) = (self.cell_center(i, j), self.cell_center(x, y));
        let mut starts = [SpherePoint::ZERO; LANES];
        let mut phases = [None; LANES];
        let mut s = 1;
        while s <= k {
            let count = ((k - s + 1) as usize).min(LANES);
            for (m, start) in starts[..count].iter_mut().enumerate() {
                let f = (s as usize + m) as f64 / (k + 1) as f64;
                *start = self.chart.from_chart(u + (v - u) * f);
            }
            limit_phases(self.map, &starts[..count], self.cycle, self.cfg, &mut phases[..count]);
            if phases[..count].iter().any(|&q| q != Some(self.phase)) {
                return false;
            }
            s += count as u32;
        }
        true
    }

    fn on_boundary(&self, i: u32, j: u32) -> bool {
        i == 0 || j == 0 || i + 1 == self.size || j + 1 == self.size
    }
}

/// One flood over 4-connected inside cells, expanded best-first toward the
/// other flood's seed. The order only affects how soon the floods meet, not
/// which cells are connected.
struct Flood {
    seen: Vec<bool>,
    queue: BinaryHeap<Reverse<(u64, u32, u32)>>,
    target: (u32, u32),
    touches_boundary: bool,
}

impl Flood {
    fn new(size: u32, seed: (u32, u32), target: (u32, u32)) -> Self {
        let mut seen = vec![false; (size * size) as usize];
        seen[(seed.1 * size + seed.0) as usize] = true;
        let mut flood = Flood { seen, queue: BinaryHeap::new(), target, touches_boundary: false };
        flood.push(seed);
        flood
    }

    fn push(&mut self, (i, j): (u32, u32)) {
        let dx = i.abs_diff(self.target.0) as u64;
        let dy = j.abs_diff(self.target.1) as u64;
        self.queue.push(Reverse((dx * dx + dy * dy, j, i)));
    }

    fn exhausted(&self) -> bool {
        self.queue.is_empty()
    }

    /// Expands one cell; returns true when it reaches a cell `other` has seen.
    fn step(&mut self, grid: &mut BasinGrid<'_>, other: &Flood) -> bool {
        let Some(Reverse((_, j, i))) = self.queue.pop() else {
            return false;
        };
        if grid.on_boundary(i, j) {
            self.touches_boundary = true;
        }
        let g = grid.size;
        let neighbours = [
            (i.wrapping_sub(1), j),
            (i + 1, j),
            (i, j.wrapping_sub(1)),
            (i, j + 1),
        ];
        for (x, y) in neighbours {
            if x >= g || y >= g {
                continue;
            }
            let idx = (y * g + x) as usize;
            if self.seen[idx] || !grid.inside(x, y) || !grid.link_clear((i, j), (x, y)) {
                continue;
            }
            if other.seen[idx] {
                return true;
            }
            self.seen[idx] = true;
            self.push((x, y));
        }
        false
    }
}

/// Whether `z_star` is joined to the cycle point `p_star = cycle[phase]`
/// through grid cells whose centers converge to `p_star` under `f^n`.
///
/// The window is the square around both points padded by `padding_factor`.
/// The region of `z_star` is flooded first; if it closes up inside the
/// window without reaching `p_star` the answer is no. Otherwise the
/// attractor's region is flooded, and when it too reaches the window edge
/// without meeting, the window doubles (at most `max_window_growth` times).
///
/// Distinct basin components can touch at single points of the Julia set,
/// and a grid steps across such a point at every resolution. With
/// `capture_slack` set, a cell only counts when its orbit is captured at
/// most that many periods after the free critical point's own capture.
/// These sublevel sets have components with disjoint closures, so they do
/// not touch.
///
/// A coarse grid can step across a thin gap between two basin components.
/// With `confirm_grid_size` set, a join is checked again with every link
/// between adjacent cells sampled at the finer spacing, and failing that,
/// by a flood of the finer grid.
pub fn flood_fill_test(
    map: &QuadMap,
    cycle: &[SpherePoint],
    phase: usize,
    z_star: SpherePoint,
    cfg: &IterConfig,
    grid: &BasinGridConfig,
) -> bool {
    if z_star == cycle[phase] {
        return true;
    }
    let capped;
    let cfg = match (grid.capture_slack, timed_limit_phase(map, z_star, cycle, cfg)) {
        (Some(slack), Some((q, t))) if q == phase => {
            let periods = slack.saturating_mul(cycle.len() as u32);
            capped = IterConfig { max_iter: t.saturating_add(periods).saturating_add(1).min(cfg.max_iter), ..*cfg };
            &capped
        }
        _ => cfg,
    };
    let search = |size: u32, edge_samples: u32| {
        basin_search(map, cycle, phase, z_star, cfg, grid, size, edge_samples)
    };
    if !search(grid.grid_size, 0) {
        return false;
    }
    match grid.confirm_grid_size {
        Some(fine) if fine > grid.grid_size => {
            search(grid.grid_size, fine.div_ceil(grid.grid_size) - 1) || search(fine, 0)
        }
        _ => true,
    }
}

#[allow(clippy::too_many_arguments)]
fn basin_search(
    map: &QuadMap,
    cycle: &[SpherePoint],
    phase: usize,
    z_star: SpherePoint,
    cfg: &IterConfig,
    grid: &BasinGridConfig,
    size: u32,
    edge_samples: u32,
) -> bool {
    let chart = Chart::for_attractor(cycle[phase]);
    let (Some(p), Some(z)) = (chart.to_chart(cycle[phase]).finite(), chart.to_chart(z_star).finite()) else {
        return false;
    };
    let d = p - z;
    let mut half = 0.5 * grid.padding_factor * d.re.abs().max(d.im.abs());
    if !(half > 0.0) {
        return true;
    }
    let center = (p + z) * 0.5;
    for attempt in 0..=grid.max_window_growth {
        let mut basin = BasinGrid {
            map,
            cycle,
            phase,
            cfg,
            chart,
            center,
            half,
            size,
            state: vec![UNKNOWN; (size * size) as usize],
            edge_samples,
        };
        match flood(&mut basin, p, z) {
            Some(FloodResult::Joined) => return true,
            Some(FloodResult::Open) if attempt < grid.max_window_growth => half *= 2.0,
            _ => return false,
        }
    }
    false
}

enum FloodResult {
    Joined,
    /// The region of one point closes up inside the window.
    Closed,
    /// Both regions reach the window edge without meeting.
    Open,
}

/// Floods from `z` first, since the free critical point's region is usually
/// the small one, then from `p`. `None` when a point lies off the grid.
fn flood(basin: &mut BasinGrid<'_>, p: Complex64, z: Complex64) -> Option<FloodResult> {
    let (pc, zc) = (basin.cell_of(p)?, basin.cell_of(z)?);
    if pc == zc {
        return Some(FloodResult::Joined);
    }
    // the two seed cells are judged by the exact points, both in the basin
    for (i, j) in [pc, zc] {
        basin.state[(j * basin.size + i) as usize] = INSIDE;
    }
    let mut from_p = Flood::new(basin.size, pc, zc);
    let mut from_z = Flood::new(basin.size, zc, pc);
    while !from_z.exhausted() {
        if from_z.step(basin, &from_p) {
            return Some(FloodResult::Joined);
        }
    }
    if !from_z.touches_boundary {
        return Some(FloodResult::Closed);
    }
    while !from_p.exhausted() {
        if from_p.step(basin, &from_z) {
            return Some(FloodResult::Joined);
        }
    }
    Some(if from_p.touches_boundary { FloodResult::Open } else { FloodResult::Closed })
}

/// Everything known about one parameter.
#[derive(Clone, Debug)]
pub struct ParameterReport {
    pub family: Family,
    pub t: Complex64,
    pub map: Result<QuadMap, ExcludedParameter>,
    pub cycle: Option<Vec<SpherePoint>>,
    pub free_critical_point: Option<SpherePoint>,
    pub classification: Classification,
    /// Why the parameter is invalid, for `InvalidParam`.
    pub invalid_reason: Option<String>,
}

impl ParameterReport {
    pub fn summary(&self) -> ReportSummary {
        let c = &self.classification;
        ReportSummary {
            family: self.family,
            t: self.t,
            kind: c.kind,
            phase: c.phase,
            method: c.method,
            steps: c.steps,
            params: match &self.map {
                Ok(m) => m.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
                Err(_) => BTreeMap::new(),
            },
            free_critical_point: self.free_critical_point,
            cycle: self.cycle.clone().unwrap_or_default(),
            invalid_reason: self.invalid_reason.clone(),
        }
    }
}

/// Flat form of a [`ParameterReport`] for JSON: map coefficients appear as
/// top-level keys (`c` for V1, `a` for V2, `b` and `c` otherwise).
#[derive(Clone, Debug, Serialize)]
pub struct ReportSummary {
    pub family: Family,
    pub t: Complex64,
    pub kind: Kind,
    pub phase: Option<usize>,
    pub method: Method,
    pub steps: u32,
    #[serde(flatten)]
    pub params: BTreeMap<String, Complex64>,
    pub free_critical_point: Option<SpherePoint>,
    pub cycle: Vec<SpherePoint>,
    pub invalid_reason: Option<String>,
}

pub fn classify(family: Family, t: Complex64, cfg: &IterConfig, grid: &BasinGridConfig) -> Classification {
    inspect(family, t, cfg, grid).classification
}

pub fn inspect(family: Family, t: Complex64, cfg: &IterConfig, grid: &BasinGridConfig) -> ParameterReport {
    let mut report = ParameterReport {
        family,
        t,
        map: family.map_for(t),
        cycle: None,
        free_critical_point: None,
        classification: Classification::plain(Kind::InvalidParam),
        invalid_reason: None,
    };
    let map = match &report.map {
        Ok(m) => *m,
        Err(e) => {
            report.invalid_reason = Some(e.reason.to_string());
            return report;
        }
    };
    let cycle = match map.critical_cycle(family.period()) {
        Ok(c) => c,
        Err(e) => {
            report.invalid_reason = Some(e.to_string());
            return report;
        }
    };
    let z_star = map.free_critical_point();
    report.free_critical_point = Some(z_star);
    report.classification = classify_map(&map, family, &cycle, cfg, grid);
    report.cycle = Some(cycle);
    report
}

/// Classification of a valid map with its critical cycle.
pub fn classify_map(
    map: &QuadMap,
    family: Family,
    cycle: &[SpherePoint],
    cfg: &IterConfig,
    grid: &BasinGridConfig,
) -> Classification {
    let z_star = map.free_critical_point();
    let Some(hit) = detect_attraction(map, z_star, cycle, cfg) else {
        return Classification::plain(Kind::NotAttracted);
    };
    let done = |kind, method| Classification {
        kind,
        phase: Some(hit.phase),
        method,
        steps: hit.steps,
    };
    if family == Family::V1 {
        return done(Kind::Type1, Method::None);
    }
    if segment_test(map, cycle, hit.phase, z_star, cfg, grid) {
        done(Kind::Type2, Method::Segment)
    } else if flood_fill_test(map, cycle, hit.phase, z_star, cfg, grid) {
        done(Kind::Type2, Method::Floodfill)
    } else {
        done(Kind::Type3, Method::Floodfill)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn landmarks() {
        let cfg = IterConfig::default();
        let grid = BasinGridConfig::default();
        let r = classify(Family::V3, c(1.0, 0.0), &cfg, &grid);
        assert_eq!((r.kind, r.method, r.phase), (Kind::Type2, Method::Segment, Some(2)));
        assert_eq!(classify(Family::V1, c(-1.0, 0.0), &cfg, &grid).kind, Kind::NotAttracted);
        assert_eq!(classify(Family::V1, c(1.0, 0.0), &cfg, &grid).kind, Kind::Type1);
        assert_eq!(classify(Family::V2, c(0.0, 0.0), &cfg, &grid).kind, Kind::InvalidParam);
    }

    #[test]
    fn zero_length_segment() {
        let cfg = IterConfig::default();
        let grid = BasinGridConfig::default();
        let f = QuadMap::vbc(c(-2.0, 0.0), c(1.0, 0.0)).unwrap();
        let cycle = f.critical_cycle(3).unwrap();
        assert!(segment_test(&f, &cycle, 2, SpherePoint::ONE, &cfg, &grid));
        assert!(flood_fill_test(&f, &cycle, 2, SpherePoint::ONE, &cfg, &grid));
    }
}


