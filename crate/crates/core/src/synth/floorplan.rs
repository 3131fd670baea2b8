use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::round;

const EPS: f64 = 1e-6;

/// Rectilinear room outline, counter-clockwise or clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomPolygon {
    #[serde(default)]
    pub name: String,
    pub vertices: Vec<[f64; 2]>,
}

/// Opening of `width` meters centered on a wall shared by two rooms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Doorway {
    pub center: [f64; 2],
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClutterKind {
    /// Closed box standing on the floor.
    Box,
    /// Thin dense panel hanging under the ceiling.
    CeilingVent,
    /// Furniture standing on the floor (sampled like a box).
    Furniture,
}

/// Axis-aligned clutter item; `size` is `[sx, sy, sz]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Clutter {
    pub kind: ClutterKind,
    pub class_name: String,
    pub center: [f64; 2],
    pub size: [f64; 3],
}

impl Clutter {
    /// `(z_min, z_max)` of the item for a given wall height.
    pub fn z_range(&self, wall_height: f64) -> (f64, f64) {
        match self.kind {
            ClutterKind::CeilingVent => (wall_height - self.size[2], wall_height),
            ClutterKind::Box | ClutterKind::Furniture => (0.0, self.size[2]),
        }
    }

    pub fn corners(&self, wall_height: f64) -> [[f64; 3]; 8] {
        let (z0, z1) = self.z_range(wall_height);
        let hx = self.size[0] * 0.5;
        let hy = self.size[1] * 0.5;
        let [cx, cy] = self.center;
        let mut out = [[0.0; 3]; 8];
        for (i, c) in out.iter_mut().enumerate() {
            *c = [
                if i & 1 == 0 { cx - hx } else { cx + hx },
                if i & 2 == 0 { cy - hy } else { cy + hy },
                if i & 4 == 0 { z0 } else { z1 },
            ];
        }
        out
    }

    pub fn center_3d(&self, wall_height: f64) -> [f64; 3] {
        let (z0, z1) = self.z_range(wall_height);
        [self.center[0], self.center[1], (z0 + z1) * 0.5]
    }
}

/// Synthetic single-floor environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloorplanSpec {
    pub rooms: Vec<RoomPolygon>,
    #[serde(default)]
    pub doorways: Vec<Doorway>,
    #[serde(default = "default_wall_height")]
    pub wall_height: f64,
    #[serde(default)]
    pub clutter: Vec<Clutter>,
    #[serde(default)]
    pub seed: u64,
    /// Surface sampling density in points per square meter.
    #[serde(default = "default_density")]
    pub density: f64,
    /// Standard deviation of the horizontal sensor noise in meters.
    #[serde(default = "default_noise")]
    pub noise_sigma: f64,
}

fn default_wall_height() -> f64 {
    2.5
}

fn default_density() -> f64 {
    400.0
}

fn default_noise() -> f64 {
    0.02
}

/// Axis-aligned wall piece from `a` to `b` (`a` ≤ `b` along the wall).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallSegment {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl WallSegment {
    pub fn length(&self) -> f64 {
        (self.b[0] - self.a[0]).abs() + (self.b[1] - self.a[1]).abs()
    }

    pub fn is_horizontal(&self) -> bool {
        (self.a[1] - self.b[1]).abs() < EPS
    }

    /// Whether the open segment `p→q` crosses this wall.
    pub fn blocks(&self, p: [f64; 2], q: [f64; 2]) -> bool {
        segments_cross(p, q, self.a, self.b)
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segments_cross(p: [f64; 2], q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    let d1 = cross(a, b, p);
    let d2 = cross(a, b, q);
    let d3 = cross(p, q, a);
    let d4 = cross(p, q, b);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Wall line key: orientation plus its fixed coordinate in micrometers.
type LineKey = (bool, i64);

fn line_key(horizontal: bool, coord: f64) -> LineKey {
    (horizontal, round(coord / EPS) as i64)
}

impl RoomPolygon {
    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        let twice: f64 = (0..n)
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % n]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum();
        (twice * 0.5).abs()
    }

    /// Even-odd point-in-polygon test.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let v = &self.vertices;
        let n = v.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (v[i], v[j]);
            if (a[1] > y) != (b[1] > y) && x < (b[0] - a[0]) * (y - a[1]) / (b[1] - a[1]) + a[0] {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    pub fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.vertices {
            lo = [lo[0].min(p[0]), lo[1].min(p[1])];
            hi = [hi[0].max(p[0]), hi[1].max(p[1])];
        }
        (lo, hi)
    }

    /// Edges as `(horizontal, fixed coord, start, end)` with start < end.
    fn edges(&self) -> impl Iterator<Item = (bool, f64, f64, f64)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            if (a[1] - b[1]).abs() < EPS {
                (true, a[1], a[0].min(b[0]), a[0].max(b[0]))
            } else {
                (false, a[0], a[1].min(b[1]), a[1].max(b[1]))
            }
        })
    }

    fn has_edge_covering(&self, horizontal: bool, coord: f64, lo: f64, hi: f64) -> bool {
        self.edges().any(|(h, c, s, e)| {
            h == horizontal && (c - coord).abs() < EPS && s <= lo + EPS && e >= hi - EPS
        })
    }
}

impl FloorplanSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidFloorplan(m));
        if self.rooms.is_empty() {
            return bad("no rooms".into());
        }
        if !(self.wall_height > 0.0 && self.density > 0.0 && self.noise_sigma >= 0.0) {
            return bad("wall_height and density must be positive, noise_sigma non-negative".into());
        }
        for (i, r) in self.rooms.iter().enumerate() {
            if r.vertices.len() < 4 {
                return bad(alloc::format!("room {i} has fewer than 4 vertices"));
            }
            let n = r.vertices.len();
            for k in 0..n {
                let (a, b) = (r.vertices[k], r.vertices[(k + 1) % n]);
                let horizontal = (a[1] - b[1]).abs() < EPS;
                let vertical = (a[0] - b[0]).abs() < EPS;
                if horizontal == vertical {
                    return bad(alloc::format!("room {i} edge {k} is not axis-aligned"));
                }
            }
            if r.area() < 0.25 {
                return bad(alloc::format!("room {i} is smaller than 0.25 m²"));
            }
        }
        for i in 0..self.rooms.len() {
            for j in i + 1..self.rooms.len() {
                if rooms_overlap(&self.rooms[i], &self.rooms[j]) {
                    return bad(alloc::format!("rooms {i} and {j} overlap"));
                }
            }
        }
        for (k, d) in self.doorways.iter().enumerate() {
            if !(d.width > 0.0) {
                return bad(alloc::format!("doorway {k} has non-positive width"));
            }
            let shared = [true, false].iter().any(|&horizontal| {
                let (coord, along) =
                    if horizontal { (d.center[1], d.center[0]) } else { (d.center[0], d.center[1]) };
                let (lo, hi) = (along - d.width * 0.5, along + d.width * 0.5);
                self.rooms.iter().filter(|r| r.has_edge_covering(horizontal, coord, lo, hi)).count()
                    >= 2
            });
            if !shared {
                return bad(alloc::format!("doorway {k} is not on a wall shared by two rooms"));
            }
        }
        for (k, c) in self.clutter.iter().enumerate() {
            if c.size.iter().any(|&s| !(s > 0.0)) {
                return bad(alloc::format!("clutter {k} has a non-positive size"));
            }
            if c.kind == ClutterKind::CeilingVent && c.size[2] > 0.3 + EPS {
                return bad(alloc::format!("ceiling vent {k} is thicker than 0.3 m"));
            }
            if c.size[2] > self.wall_height {
                return bad(alloc::format!("clutter {k} is taller than the walls"));
            }
        }
        Ok(())
    }

    /// 1-based index of the room containing `(x, y)`.
    pub fn room_at(&self, x: f64, y: f64) -> Option<u16> {
        self.rooms.iter().position(|r| r.contains(x, y)).map(|i| i as u16 + 1)
    }

    pub fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for r in &self.rooms {
            let (a, b) = r.bounds();
            lo = [lo[0].min(a[0]), lo[1].min(a[1])];
            hi = [hi[0].max(b[0]), hi[1].max(b[1])];
        }
        (lo, hi)
    }

    /// Union of all room outlines with doorway openings cut out.
    pub fn walls(&self) -> Vec<WallSegment> {
        let mut lines: BTreeMap<LineKey, (f64, Vec<(f64, f64)>)> = BTreeMap::new();
        for r in &self.rooms {
            for (h, c, s, e) in r.edges() {
                lines.entry(line_key(h, c)).or_insert((c, Vec::new())).1.push((s, e));
            }
        }
        let mut out = Vec::new();
        for ((horizontal, _), (coord, mut spans)) in lines {
            spans.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut merged: Vec<(f64, f64)> = Vec::new();
            for (s, e) in spans {
                match merged.last_mut() {
                    Some(last) if s <= last.1 + EPS => last.1 = last.1.max(e),
                    _ => merged.push((s, e)),
                }
            }
            for d in &self.doorways {
                let (dc, along) =
                    if horizontal { (d.center[1], d.center[0]) } else { (d.center[0], d.center[1]) };
                if (dc - coord).abs() > EPS {
                    continue;
                }
                let (lo, hi) = (along - d.width * 0.5, along + d.width * 0.5);
                merged = merged
                    .into_iter()
                    .flat_map(|(s, e)| {
                        let mut parts = Vec::new();
                        if hi <= s || lo >= e {
                            parts.push((s, e));
                        } else {
                            if lo > s + EPS {
                                parts.push((s, lo));
                            }
                            if hi < e - EPS {
                                parts.push((hi, e));
                            }
                        }
                        parts
                    })
                    .collect();
            }
            for (s, e) in merged {
                out.push(if horizontal {
                    WallSegment { a: [s, coord], b: [e, coord] }
                } else {
                    WallSegment { a: [coord, s], b: [coord, e] }
                });
            }
        }
        out
    }

    /// Whether the straight line between two XY positions crosses no wall.
    pub fn line_of_sight(&self, p: [f64; 2], q: [f64; 2]) -> bool {
        self.walls().iter().all(|w| !w.blocks(p, q))
    }

    /// Class names of the clutter items, sorted and deduplicated; a class id
    /// is the index into this list.
    pub fn class_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.clutter.iter().map(|c| c.class_name.clone()).collect();
        names.sort();
        names.dedup();
        names
    }
}

fn rooms_overlap(a: &RoomPolygon, b: &RoomPolygon) -> bool {
    let (alo, ahi) = a.bounds();
    let (blo, bhi) = b.bounds();
    let lo = [alo[0].max(blo[0]), alo[1].max(blo[1])];
    let hi = [ahi[0].min(bhi[0]), ahi[1].min(bhi[1])];
    if hi[0] - lo[0] <= EPS || hi[1] - lo[1] <= EPS {
        return false;
    }
    let step = 0.05;
    let mut y = lo[1] + step * 0.5;
    while y < hi[1] {
        let mut x = lo[0] + step * 0.5;
        while x < hi[0] {
            if a.contains(x, y) && b.contains(x, y) {
                return true;
            }
            x += step;
        }
        y += step;
    }
    false
}
