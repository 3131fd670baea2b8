//! Canonical worlds shared by tests, benchmarks and the CLI.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::floorplan::{Clutter, ClutterKind, Doorway, FloorplanSpec, RoomPolygon};
use crate::math::floor;

/// Object classes the synthetic detector reports; a class id is the index.
pub const CLASS_VOCABULARY: &[&str] =
    &["box", "car", "chair", "desk", "monitor", "sofa", "toolbox", "tv"];

pub fn class_id(name: &str) -> u32 {
    CLASS_VOCABULARY.iter().position(|c| *c == name).unwrap_or(CLASS_VOCABULARY.len()) as u32
}

pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> RoomPolygon {
    RoomPolygon { name: String::new(), vertices: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]] }
}

fn named(mut r: RoomPolygon, name: &str) -> RoomPolygon {
    r.name = name.to_string();
    r
}

fn item(kind: ClutterKind, class: &str, center: [f64; 2], size: [f64; 3]) -> Clutter {
    Clutter { kind, class_name: class.to_string(), center, size }
}

pub fn furniture(class: &str, center: [f64; 2]) -> Clutter {
    let size = match class {
        "chair" => [0.5, 0.5, 0.9],
        "desk" => [1.2, 0.6, 0.75],
        "monitor" => [0.5, 0.25, 0.45],
        "sofa" => [0.9, 0.9, 0.8],
        "tv" => [0.9, 0.3, 0.6],
        "toolbox" => [0.6, 0.4, 0.45],
        "car" => [0.9, 0.9, 0.6],
        _ => [0.6, 0.6, 0.6],
    };
    let kind = if class == "box" { ClutterKind::Box } else { ClutterKind::Furniture };
    item(kind, class, center, size)
}

fn base(rooms: Vec<RoomPolygon>, doorways: Vec<Doorway>, seed: u64) -> FloorplanSpec {
    FloorplanSpec {
        rooms,
        doorways,
        wall_height: 2.5,
        clutter: Vec::new(),
        seed,
        density: 400.0,
        noise_sigma: 0.02,
    }
}

/// One empty `w × h` room with its corner at the origin.
pub fn single_room(w: f64, h: f64) -> FloorplanSpec {
    base(vec![rect(0.0, 0.0, w, h)], Vec::new(), 0)
}

fn door(x: f64, y: f64) -> Doorway {
    Doorway { center: [x, y], width: 0.9 }
}

/// 40 × 25 m floor: two rooms south of a corridor, two north (one of them
/// L-shaped), one door from every room into the corridor, and furniture.
pub fn five_room_apartment(seed: u64) -> FloorplanSpec {
    let rooms = vec![
        named(rect(0.0, 0.0, 14.0, 10.0), "office"),
        named(rect(14.0, 0.0, 40.0, 10.0), "garage"),
        named(rect(0.0, 10.0, 40.0, 12.5), "corridor"),
        named(rect(0.0, 12.5, 20.0, 25.0), "living"),
        named(
            RoomPolygon {
                name: String::new(),
                vertices: vec![
                    [20.0, 12.5],
                    [40.0, 12.5],
                    [40.0, 25.0],
                    [28.0, 25.0],
                    [28.0, 19.0],
                    [20.0, 19.0],
                ],
            },
            "study",
        ),
    ];
    let doorways = vec![door(7.0, 10.0), door(27.0, 10.0), door(10.0, 12.5), door(34.0, 12.5)];
    let mut spec = base(rooms, doorways, seed);
    spec.clutter = vec![
        furniture("desk", [3.0, 3.0]),
        furniture("chair", [3.0, 4.2]),
        furniture("monitor", [9.0, 2.5]),
        furniture("chair", [10.0, 6.0]),
        furniture("toolbox", [18.0, 3.0]),
        furniture("car", [27.0, 5.0]),
        furniture("toolbox", [36.0, 2.0]),
        furniture("sofa", [5.0, 20.0]),
        furniture("tv", [14.0, 22.0]),
        furniture("desk", [34.0, 21.0]),
        furniture("chair", [34.0, 19.8]),
        furniture("monitor", [24.0, 16.0]),
    ];
    spec
}

/// The apartment without furniture: walls, floors and doors only.
pub fn empty_apartment(seed: u64) -> FloorplanSpec {
    let mut spec = five_room_apartment(seed);
    spec.clutter.clear();
    spec
}

/// The empty apartment with dense ceiling vents hanging in every room.
pub fn vent_apartment(seed: u64) -> FloorplanSpec {
    let mut spec = empty_apartment(seed);
    let vent = |x: f64, y: f64, sx: f64, sy: f64| {
        item(ClutterKind::CeilingVent, "vent", [x, y], [sx, sy, 0.25])
    };
    spec.clutter = vec![
        vent(7.0, 5.0, 4.0, 0.8),
        vent(27.0, 5.0, 8.0, 1.0),
        vent(20.0, 11.25, 16.0, 0.6),
        vent(10.0, 19.0, 2.0, 2.0),
        vent(34.0, 16.0, 6.0, 0.8),
        vent(34.0, 22.0, 1.2, 1.2),
    ];
    spec
}

const MIN_SIDE: f64 = 6.0;

/// Random rectilinear floor of 4–7 rooms made by binary space
/// partitioning, with a door on a spanning tree of the room adjacencies and
/// one or two pieces of furniture per room.
pub fn random_apartment(seed: u64) -> FloorplanSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f100_u64);
    let w = 30.0 + floor(rng.random::<f64>() * 31.0) * 0.5;
    let h = 20.0 + floor(rng.random::<f64>() * 21.0) * 0.5;
    let target = rng.random_range(4..=7usize);
    let mut cells: Vec<[f64; 4]> = vec![[0.0, 0.0, w, h]];
    while cells.len() < target {
        let (idx, _) = cells
            .iter()
            .enumerate()
            .map(|(i, c)| (i, (c[2] - c[0]) * (c[3] - c[1])))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let c = cells[idx];
        let (cw, ch) = (c[2] - c[0], c[3] - c[1]);
        let vertical = cw >= ch;
        let span = if vertical { cw } else { ch };
        if span < 2.0 * MIN_SIDE {
            break;
        }
        let steps = ((span - 2.0 * MIN_SIDE) / 0.1) as u32;
        let cut = MIN_SIDE + rng.random_range(0..=steps) as f64 * 0.1;
        cells.swap_remove(idx);
        if vertical {
            cells.push([c[0], c[1], c[0] + cut, c[3]]);
            cells.push([c[0] + cut, c[1], c[2], c[3]]);
        } else {
            cells.push([c[0], c[1], c[2], c[1] + cut]);
            cells.push([c[0], c[1] + cut, c[2], c[3]]);
        }
    }
    cells.sort_by(|a, b| (a[1], a[0]).partial_cmp(&(b[1], b[0])).unwrap());
    let rooms: Vec<RoomPolygon> = cells.iter().map(|c| rect(c[0], c[1], c[2], c[3])).collect();

    let mut doorways = Vec::new();
    let mut connected = vec![false; cells.len()];
    connected[0] = true;
    loop {
        let mut added = false;
        for i in 0..cells.len() {
            for j in 0..cells.len() {
                if connected[i] && !connected[j] {
                    if let Some(d) = shared_door(&cells[i], &cells[j]) {
                        doorways.push(d);
                        connected[j] = true;
                        added = true;
                    }
                }
            }
        }
        if !added {
            break;
        }
    }

    let mut spec = base(rooms, doorways, seed);
    let classes = ["box", "chair", "desk", "monitor", "sofa", "toolbox", "tv"];
    for c in &cells {
        let n = rng.random_range(1..=3usize);
        for _ in 0..n {
            let class = classes[rng.random_range(0..classes.len())];
            let margin = 0.8;
            let x = c[0] + margin + rng.random::<f64>() * (c[2] - c[0] - 2.0 * margin);
            let y = c[1] + margin + rng.random::<f64>() * (c[3] - c[1] - 2.0 * margin);
            spec.clutter.push(furniture(class, [x, y]));
        }
    }
    spec
}

/// Door centered on the shared side of two touching rectangles, if the
/// overlap is long enough to hold one away from the corners.
fn shared_door(a: &[f64; 4], b: &[f64; 4]) -> Option<Doorway> {
    const EPS: f64 = 1e-9;
    let overlap = |lo0: f64, hi0: f64, lo1: f64, hi1: f64| (lo0.max(lo1), hi0.min(hi1));
    let vertical_touch = (a[2] - b[0]).abs() < EPS || (b[2] - a[0]).abs() < EPS;
    let horizontal_touch = (a[3] - b[1]).abs() < EPS || (b[3] - a[1]).abs() < EPS;
    if vertical_touch {
        let x = if (a[2] - b[0]).abs() < EPS { a[2] } else { a[0] };
        let (lo, hi) = overlap(a[1], a[3], b[1], b[3]);
        if hi - lo >= 1.5 {
            return Some(door(x, round_tenth((lo + hi) * 0.5)));
        }
    }
    if horizontal_touch {
        let y = if (a[3] - b[1]).abs() < EPS { a[3] } else { a[1] };
        let (lo, hi) = overlap(a[0], a[2], b[0], b[2]);
        if hi - lo >= 1.5 {
            return Some(door(round_tenth((lo + hi) * 0.5), y));
        }
    }
    None
}

fn round_tenth(x: f64) -> f64 {
    crate::math::round(x * 10.0) / 10.0
}
