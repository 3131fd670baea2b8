use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::floorplan::{Clutter, ClutterKind, FloorplanSpec};
use crate::error::{Error, Result};
use crate::math::round;
use crate::model::{Point3, PointCloudMap};

/// Ceiling vents are sampled this many times denser than other surfaces.
pub const VENT_DENSITY_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "clutter_id")]
pub enum SurfaceKind {
    Floor,
    Wall,
    Clutter(u32),
}

/// Ground-truth label of one generated point. `room` is the 1-based room
/// containing the noise-free sample position, 0 for none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointLabel {
    pub surface: SurfaceKind,
    pub room: u16,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCloud {
    pub map: PointCloudMap,
    pub labels: Vec<PointLabel>,
}

struct Sampler<'a> {
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
    spec: &'a FloorplanSpec,
    points: Vec<Point3>,
    labels: Vec<PointLabel>,
}

impl Sampler<'_> {
    fn push(&mut self, x: f64, y: f64, z: f64, surface: SurfaceKind, room: Option<u16>) {
        let room = room.or_else(|| self.spec.room_at(x, y)).unwrap_or(0);
        let (mut nx, mut ny) = (x, y);
        if let Some(n) = self.noise {
            nx += n.sample(&mut self.rng);
            ny += n.sample(&mut self.rng);
        }
        self.points.push(Point3::new(nx, ny, z));
        self.labels.push(PointLabel { surface, room });
    }

    /// Uniform samples on the rectangle `o + s·e1 + t·e2`, s,t ∈ [0,1).
    fn rect(
        &mut self,
        o: [f64; 3],
        e1: [f64; 3],
        e2: [f64; 3],
        density: f64,
        surface: SurfaceKind,
        room: Option<u16>,
    ) {
        let area = norm(e1) * norm(e2);
        let n = round(area * density) as usize;
        for _ in 0..n {
            let s: f64 = self.rng.random();
            let t: f64 = self.rng.random();
            self.push(
                o[0] + s * e1[0] + t * e2[0],
                o[1] + s * e1[1] + t * e2[1],
                o[2] + s * e1[2] + t * e2[2],
                surface,
                room,
            );
        }
    }

    fn clutter(&mut self, id: u32, c: &Clutter) {
        let h = self.spec.wall_height;
        let density = match c.kind {
            ClutterKind::CeilingVent => self.spec.density * VENT_DENSITY_FACTOR,
            ClutterKind::Box | ClutterKind::Furniture => self.spec.density,
        };
        let (z0, z1) = c.z_range(h);
        let [sx, sy, _] = c.size;
        let (x0, y0) = (c.center[0] - sx * 0.5, c.center[1] - sy * 0.5);
        let room = self.spec.room_at(c.center[0], c.center[1]);
        let surface = SurfaceKind::Clutter(id);
        let dz = z1 - z0;
        // Only the face pointing into the room is visible: the top of a box,
        // the underside of a vent.
        let cap = if c.kind == ClutterKind::CeilingVent { z0 } else { z1 };
        self.rect([x0, y0, cap], [sx, 0.0, 0.0], [0.0, sy, 0.0], density, surface, room);
        self.rect([x0, y0, z0], [sx, 0.0, 0.0], [0.0, 0.0, dz], density, surface, room);
        self.rect([x0, y0 + sy, z0], [sx, 0.0, 0.0], [0.0, 0.0, dz], density, surface, room);
        self.rect([x0, y0, z0], [0.0, sy, 0.0], [0.0, 0.0, dz], density, surface, room);
        self.rect([x0 + sx, y0, z0], [0.0, sy, 0.0], [0.0, 0.0, dz], density, surface, room);
    }
}

fn norm(v: [f64; 3]) -> f64 {
    crate::math::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
}

/// Samples floors, walls and clutter of `spec` with horizontal Gaussian
/// noise. Heights are exact, so the floor lies at z = 0.
pub fn generate_pointcloud(spec: &FloorplanSpec) -> Result<SynthCloud> {
    spec.validate()?;
    let noise = if spec.noise_sigma > 0.0 {
        Some(Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::InvalidFloorplan(alloc::format!("{e}")))?)
    } else {
        None
    };
    let mut s = Sampler {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        noise,
        spec,
        points: Vec::new(),
        labels: Vec::new(),
    };
    for (i, room) in spec.rooms.iter().enumerate() {
        let n = round(room.area() * spec.density) as usize;
        let (lo, hi) = room.bounds();
        let mut placed = 0;
        while placed < n {
            let x = lo[0] + s.rng.random::<f64>() * (hi[0] - lo[0]);
            let y = lo[1] + s.rng.random::<f64>() * (hi[1] - lo[1]);
            if room.contains(x, y) {
                s.push(x, y, 0.0, SurfaceKind::Floor, Some(i as u16 + 1));
                placed += 1;
            }
        }
    }
    let h = spec.wall_height;
    for w in spec.walls() {
        let e1 = [w.b[0] - w.a[0], w.b[1] - w.a[1], 0.0];
        s.rect([w.a[0], w.a[1], 0.0], e1, [0.0, 0.0, h], spec.density, SurfaceKind::Wall, Some(0));
    }
    for (id, c) in spec.clutter.iter().enumerate() {
        s.clutter(id as u32, c);
    }
    let map = PointCloudMap::new(s.points, 0.0)?;
    Ok(SynthCloud { map, labels: s.labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::scenes;

    #[test]
    fn single_room_wall_count_is_area_times_density() {
        let spec = scenes::single_room(4.0, 4.0);
        let cloud = generate_pointcloud(&spec).unwrap();
        let walls = cloud.labels.iter().filter(|l| l.surface == SurfaceKind::Wall).count();
        assert_eq!(walls, 4 * 4000);
        let floor = cloud.labels.iter().filter(|l| l.surface == SurfaceKind::Floor).count();
        assert_eq!(floor, 6400);
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let spec = scenes::five_room_apartment(3);
        let a = generate_pointcloud(&spec).unwrap();
        let b = generate_pointcloud(&spec).unwrap();
        assert_eq!(a, b);
        let mut other = spec.clone();
        other.seed = 4;
        assert_ne!(a.map, generate_pointcloud(&other).unwrap().map);
    }

    #[test]
    fn vent_points_hug_the_ceiling() {
        let spec = scenes::vent_apartment(1);
        let h = spec.wall_height;
        let cloud = generate_pointcloud(&spec).unwrap();
        let mut vents = 0;
        for (p, l) in cloud.map.points.iter().zip(&cloud.labels) {
            if let SurfaceKind::Clutter(id) = l.surface {
                if spec.clutter[id as usize].kind == ClutterKind::CeilingVent {
                    vents += 1;
                    assert!(p.z >= h - 0.3 && p.z <= h, "z = {}", p.z);
                }
            }
        }
        assert!(vents > 0);
    }
}
