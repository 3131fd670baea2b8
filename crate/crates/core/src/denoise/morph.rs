//! Binary morphology on row-major boolean rasters (`true` = wall).

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

/// Majority vote over the `(2r+1)²` window; out-of-image cells count as free.
pub fn majority(mask: &[bool], w: usize, h: usize, r: usize) -> Vec<bool> {
    let side = 2 * r + 1;
    box_vote(mask, w, h, r, (side * side / 2 + 1) as u32)
}

/// Dilation by the `(2r+1)²` square.
pub fn dilate(mask: &[bool], w: usize, h: usize, r: usize) -> Vec<bool> {
    box_vote(mask, w, h, r, 1)
}

/// Cells with at least `need` set cells in their `(2r+1)²` window.
fn box_vote(mask: &[bool], w: usize, h: usize, r: usize, need: u32) -> Vec<bool> {
    // Summed-area table with a zero border row/column.
    let sw = w + 1;
    let mut sat = vec![0u32; sw * (h + 1)];
    for y in 0..h {
        let mut row = 0u32;
        for x in 0..w {
            row += mask[y * w + x] as u32;
            sat[(y + 1) * sw + x + 1] = sat[y * sw + x + 1] + row;
        }
    }
    let mut out = vec![false; w * h];
    for y in 0..h {
        let (y0, y1) = (y.saturating_sub(r), (y + r + 1).min(h));
        for x in 0..w {
            let (x0, x1) = (x.saturating_sub(r), (x + r + 1).min(w));
            let s = sat[y1 * sw + x1] + sat[y0 * sw + x0] - sat[y0 * sw + x1] - sat[y1 * sw + x0];
            out[y * w + x] = s >= need;
        }
    }
    out
}

/// 8-connected component sizes; `comp[i]` indexes into the returned sizes,
/// `u32::MAX` for background.
pub fn components8(mask: &[bool], w: usize, h: usize) -> (Vec<u32>, Vec<usize>) {
    let mut comp = vec![u32::MAX; w * h];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !mask[start] || comp[start] != u32::MAX {
            continue;
        }
        let id = sizes.len() as u32;
        comp[start] = id;
        queue.push_back(start);
        let mut n = 0;
        while let Some(i) = queue.pop_front() {
            n += 1;
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if mask[j] && comp[j] == u32::MAX {
                        comp[j] = id;
                        queue.push_back(j);
                    }
                }
            }
        }
        sizes.push(n);
    }
    (comp, sizes)
}

/// Number of 8-connected components.
pub fn count_components(mask: &[bool], w: usize, h: usize) -> usize {
    components8(mask, w, h).1.len()
}

/// Morphological reconstruction: every pixel of `within` 8-connected to
/// `seed` through `within` (seed pixels are kept unconditionally).
pub fn reconstruct(seed: &[bool], within: &[bool], w: usize, h: usize) -> Vec<bool> {
    let mut out = seed.to_vec();
    let mut queue: VecDeque<usize> = (0..w * h).filter(|&i| seed[i]).collect();
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1isize {
            for dx in -1..=1isize {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if within[j] && !out[j] {
                    out[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    out
}

/// Closing with a centered line of `len` pixels, horizontal or vertical.
/// Pixels within `len / 2` of the border only gain wall from in-image
/// neighbors, so the border is never invented.
pub fn close_line(mask: &[bool], w: usize, h: usize, len: usize, horizontal: bool) -> Vec<bool> {
    let half = len / 2;
    let (outer, inner) = if horizontal { (h, w) } else { (w, h) };
    let at = |o: usize, k: usize| if horizontal { o * w + k } else { k * w + o };
    let mut out = mask.to_vec();
    let mut line = vec![false; inner];
    let mut dil = vec![false; inner];
    for o in 0..outer {
        for k in 0..inner {
            line[k] = mask[at(o, k)];
        }
        // Dilation: wall if any wall within ±half.
        let mut last_wall: Option<usize> = None;
        let mut next_wall = vec![usize::MAX; inner];
        let mut nxt = usize::MAX;
        for k in (0..inner).rev() {
            if line[k] {
                nxt = k;
            }
            next_wall[k] = nxt;
        }
        for k in 0..inner {
            if line[k] {
                last_wall = Some(k);
            }
            let near_prev = last_wall.is_some_and(|p| k - p <= half);
            let near_next = next_wall[k] != usize::MAX && next_wall[k] - k <= half;
            dil[k] = near_prev || near_next;
        }
        // Erosion: keep if all within ±half are dilated (out of range counts
        // as dilated so that walls touching the border survive).
        let mut last_free: Option<usize> = None;
        let mut next_free = usize::MAX;
        let mut nf = vec![usize::MAX; inner];
        for k in (0..inner).rev() {
            if !dil[k] {
                next_free = k;
            }
            nf[k] = next_free;
        }
        for k in 0..inner {
            if !dil[k] {
                last_free = Some(k);
            }
            let blocked = last_free.is_some_and(|p| k - p <= half) || (nf[k] != usize::MAX && nf[k] - k <= half);
            if !blocked {
                out[at(o, k)] = true;
            }
        }
    }
    out
}

/// Fills straight gaps of at most `max_gap` pixels between two wall runs of
/// at least `min_run` pixels along rows and columns.
pub fn bridge_gaps(mask: &[bool], w: usize, h: usize, max_gap: usize, min_run: usize) -> Vec<bool> {
    let mut out = mask.to_vec();
    for horizontal in [true, false] {
        let (outer, inner) = if horizontal { (h, w) } else { (w, h) };
        let at = |o: usize, k: usize| if horizontal { o * w + k } else { k * w + o };
        for o in 0..outer {
            let mut k = 0;
            let mut prev_run: Option<(usize, usize)> = None;
            while k < inner {
                if !mask[at(o, k)] {
                    k += 1;
                    continue;
                }
                let start = k;
                while k < inner && mask[at(o, k)] {
                    k += 1;
                }
                let run = (start, k);
                if let Some((ps, pe)) = prev_run {
                    let gap = start - pe;
                    if gap <= max_gap && pe - ps >= min_run && run.1 - run.0 >= min_run {
                        for g in pe..start {
                            out[at(o, g)] = true;
                        }
                    }
                }
                prev_run = Some(run);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[&str]) -> (Vec<bool>, usize, usize) {
        let w = rows[0].len();
        let m = rows.iter().flat_map(|r| r.chars().map(|c| c == '#')).collect();
        (m, w, rows.len())
    }

    #[test]
    fn majority_drops_isolated_pixels() {
        let (m, w, h) = from_rows(&[".....", ".#...", ".....", "..###", "..###"]);
        let out = majority(&m, w, h, 1);
        assert!(!out[w + 1]);
        assert!(out[3 * w + 3]);
    }

    #[test]
    fn horizontal_closing_fills_short_gaps_only() {
        let (m, w, h) = from_rows(&["##...##.......##"]);
        let out = close_line(&m, w, h, 5, true);
        assert!(out[2] && out[3] && out[4]);
        assert!(!out[8]);
    }

    #[test]
    fn bridging_needs_runs_on_both_sides() {
        let (m, w, h) = from_rows(&["####.....####..#......"]);
        let out = bridge_gaps(&m, w, h, 5, 3);
        assert!(out[4..9].iter().all(|&b| b));
        assert!(!out[13]);
    }

    #[test]
    fn reconstruction_follows_connectivity() {
        let (seed, w, h) = from_rows(&["#.....", "......", "......"]);
        let (within, _, _) = from_rows(&["##....", "..#..#", "......"]);
        let out = reconstruct(&seed, &within, w, h);
        assert!(out[1] && out[w + 2]);
        assert!(!out[w + 5]);
    }

    #[test]
    fn component_count() {
        let (m, w, h) = from_rows(&["#..#", ".#..", "...#"]);
        assert_eq!(count_components(&m, w, h), 3);
    }
}
