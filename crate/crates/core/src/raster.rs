//! Rasterization oracle: coverage bitmaps plus 4-connected path and circuit
//! searches. Test machinery only — the event evaluators never consult it.
//!
//! A pixel is covered iff its center lies in some grain, decided through the
//! expanded world-frame conic of each grain (a different algebraic route than
//! the frame-transform predicates, so the two can cross-check each other).

use crate::error::ModelError;
use crate::geometry::{GrainSpec, Point, Rect};
use crate::Result;

/// Default cap on the number of raster cells.
pub const DEFAULT_CELL_BUDGET: usize = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    /// Left-to-right.
    Horizontal,
    /// Bottom-to-top.
    Vertical,
}

pub struct OccupancyGrid {
    pub rect: Rect,
    pub pixel: f64,
    pub nx: usize,
    pub ny: usize,
    bits: Vec<u64>,
}

impl OccupancyGrid {
    #[inline]
    pub fn covered(&self, ix: usize, iy: usize) -> bool {
        let i = iy * self.nx + ix;
        self.bits[i >> 6] & (1 << (i & 63)) != 0
    }

    #[inline]
    fn set(&mut self, ix: usize, iy: usize) {
        let i = iy * self.nx + ix;
        self.bits[i >> 6] |= 1 << (i & 63);
    }

    #[inline]
    pub fn center(&self, ix: usize, iy: usize) -> Point {
        Point::new(
            self.rect.x0 + (ix as f64 + 0.5) * self.pixel,
            self.rect.y0 + (iy as f64 + 0.5) * self.pixel,
        )
    }

    pub fn covered_fraction(&self) -> f64 {
        let n: u64 = self.bits.iter().map(|w| w.count_ones() as u64).sum();
        n as f64 / (self.nx * self.ny) as f64
    }

    /// Is there a 4-connected path of `covered`-state cells joining the two
    /// opposite sides of the grid along `axis`?
    pub fn has_path(&self, covered: bool, axis: Axis) -> bool {
        let (nx, ny) = (self.nx, self.ny);
        let mut seen = vec![false; nx * ny];
        let mut queue: Vec<usize> = Vec::new();
        let at = |ix: usize, iy: usize| iy * nx + ix;
        match axis {
            Axis::Horizontal => {
                for iy in 0..ny {
                    if self.covered(0, iy) == covered {
                        seen[at(0, iy)] = true;
                        queue.push(at(0, iy));
                    }
                }
            }
            Axis::Vertical => {
                for ix in 0..nx {
                    if self.covered(ix, 0) == covered {
                        seen[at(ix, 0)] = true;
                        queue.push(at(ix, 0));
                    }
                }
            }
        }
        while let Some(i) = queue.pop() {
            let (ix, iy) = (i % nx, i / nx);
            match axis {
                Axis::Horizontal if ix + 1 == nx => return true,
                Axis::Vertical if iy + 1 == ny => return true,
                _ => {}
            }
            let push = |jx: usize, jy: usize, seen: &mut Vec<bool>, queue: &mut Vec<usize>| {
                let j = at(jx, jy);
                if !seen[j] && self.covered(jx, jy) == covered {
                    seen[j] = true;
                    queue.push(j);
                }
            };
            if ix > 0 {
                push(ix - 1, iy, &mut seen, &mut queue);
            }
            if ix + 1 < nx {
                push(ix + 1, iy, &mut seen, &mut queue);
            }
            if iy > 0 {
                push(ix, iy - 1, &mut seen, &mut queue);
            }
            if iy + 1 < ny {
                push(ix, iy + 1, &mut seen, &mut queue);
            }
        }
        false
    }

    /// Same search with 8-connectivity, used to flag resolution-marginal
    /// instances in cross-checks.
    pub fn has_path_8(&self, covered: bool, axis: Axis) -> bool {
        let (nx, ny) = (self.nx, self.ny);
        let mut seen = vec![false; nx * ny];
        let mut queue: Vec<usize> = Vec::new();
        let at = |ix: usize, iy: usize| iy * nx + ix;
        match axis {
            Axis::Horizontal => {
                for iy in 0..ny {
                    if self.covered(0, iy) == covered {
                        seen[at(0, iy)] = true;
                        queue.push(at(0, iy));
                    }
                }
            }
            Axis::Vertical => {
                for ix in 0..nx {
                    if self.covered(ix, 0) == covered {
                        seen[at(ix, 0)] = true;
                        queue.push(at(ix, 0));
                    }
                }
            }
        }
        while let Some(i) = queue.pop() {
            let (ix, iy) = (i % nx, i / nx);
            match axis {
                Axis::Horizontal if ix + 1 == nx => return true,
                Axis::Vertical if iy + 1 == ny => return true,
                _ => {}
            }
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let jx = ix as i64 + dx;
                    let jy = iy as i64 + dy;
                    if jx < 0 || jy < 0 || jx as usize >= nx || jy as usize >= ny {
                        continue;
                    }
                    let (jx, jy) = (jx as usize, jy as usize);
                    let j = at(jx, jy);
                    if !seen[j] && self.covered(jx, jy) == covered {
                        seen[j] = true;
                        queue.push(j);
                    }
                }
            }
        }
        false
    }

    /// Does a 4-connected circuit of `covered`-state cells wind around
    /// `center` inside the annulus `r_in <= |p - center| <= r_out`?
    ///
    /// Implemented on the angular double cover: crossing the cut ray changes
    /// sheet, and a cell connected to its own copy on the other sheet winds.
    pub fn has_circuit_around(&self, covered: bool, center: Point, r_in: f64, r_out: f64) -> bool {
        let (nx, ny) = (self.nx, self.ny);
        let ncells = nx * ny;
        let in_annulus = |ix: usize, iy: usize| -> bool {
            let d = self.center(ix, iy).sub(center).norm();
            d >= r_in && d <= r_out
        };
        // sheet 0 and sheet 1
        let mut seen = vec![false; 2 * ncells];
        let mut queue: Vec<usize> = Vec::new();
        let at = |ix: usize, iy: usize, sheet: usize| sheet * ncells + iy * nx + ix;
        // the cut is the ray x > cx, y = cy; a step between a cell below and a
        // cell above the ray on the right half-plane switches sheets
        let crosses_cut = |a: Point, b: Point| -> bool {
            let (ya, yb) = (a.y - center.y, b.y - center.y);
            if (ya >= 0.0) == (yb >= 0.0) {
                return false;
            }
            0.5 * (a.x + b.x) > center.x
        };
        for iy in 0..ny {
            for ix in 0..nx {
                if self.covered(ix, iy) == covered && in_annulus(ix, iy) {
                    // seed every cut-adjacent cell; seeding all cells is
                    // wasteful, start from cells near the cut ray instead
                    let p = self.center(ix, iy);
                    if (p.y - center.y).abs() <= self.pixel && p.x > center.x {
                        let i = at(ix, iy, 0);
                        if !seen[i] {
                            seen[i] = true;
                            queue.push(i);
                        }
                    }
                }
            }
        }
        while let Some(i) = queue.pop() {
            let sheet = i / ncells;
            let rem = i % ncells;
            let (ix, iy) = (rem % nx, rem / nx);
            let p = self.center(ix, iy);
            let neighbors = [
                (ix.wrapping_sub(1), iy),
                (ix + 1, iy),
                (ix, iy.wrapping_sub(1)),
                (ix, iy + 1),
            ];
            for (jx, jy) in neighbors {
                if jx >= nx || jy >= ny {
                    continue;
                }
                if self.covered(jx, jy) != covered || !in_annulus(jx, jy) {
                    continue;
                }
                let q = self.center(jx, jy);
                let nsheet = if crosses_cut(p, q) { 1 - sheet } else { sheet };
                // reached the far sheet copy of a seed-sheet cell: winding
                if nsheet == 1 && seen[at(jx, jy, 0)] && !seen[at(jx, jy, 1)] {
                    // continue the search; success is detected when any cell
                    // is reachable on both sheets
                }
                let j = at(jx, jy, nsheet);
                if !seen[j] {
                    seen[j] = true;
                    if seen[at(jx, jy, 1 - nsheet)] {
                        return true;
                    }
                    queue.push(j);
                }
            }
        }
        false
    }
}

/// Bitmap of covered cells: a cell is covered iff its center lies in some
/// grain. `resolution` is the cell count along the longer side; cells are
/// square.
pub fn rasterize_scene(grains: &[GrainSpec], rect: Rect, resolution: usize) -> Result<OccupancyGrid> {
    rasterize_scene_with_budget(grains, rect, resolution, DEFAULT_CELL_BUDGET)
}

pub fn rasterize_scene_with_budget(
    grains: &[GrainSpec],
    rect: Rect,
    resolution: usize,
    budget: usize,
) -> Result<OccupancyGrid> {
    if resolution < 64 {
        return Err(ModelError::domain("raster resolution must be >= 64"));
    }
    let w = rect.width();
    let h = rect.height();
    if !(w > 0.0 && h > 0.0) {
        return Err(ModelError::domain("raster region must have positive area"));
    }
    let pixel = w.max(h) / resolution as f64;
    let nx = (w / pixel).ceil().max(1.0) as usize;
    let ny = (h / pixel).ceil().max(1.0) as usize;
    if nx.saturating_mul(ny) > budget {
        return Err(ModelError::ResourceLimit(format!(
            "raster of {nx}x{ny} cells exceeds budget {budget}"
        )));
    }
    let mut grid = OccupancyGrid {
        rect,
        pixel,
        nx,
        ny,
        bits: vec![0u64; (nx * ny + 63) / 64],
    };
    for g in grains {
        let conic = g.conic();
        let gb = g.bbox();
        let ix0 = (((gb.x0 - rect.x0) / pixel - 0.5).floor().max(0.0)) as usize;
        let iy0 = (((gb.y0 - rect.y0) / pixel - 0.5).floor().max(0.0)) as usize;
        let ix1 = ((((gb.x1 - rect.x0) / pixel + 0.5).ceil()).max(0.0) as usize).min(nx);
        let iy1 = ((((gb.y1 - rect.y0) / pixel + 0.5).ceil()).max(0.0) as usize).min(ny);
        for iy in iy0..iy1 {
            let y = rect.y0 + (iy as f64 + 0.5) * pixel;
            for ix in ix0..ix1 {
                let x = rect.x0 + (ix as f64 + 0.5) * pixel;
                if conic.contains(x, y) {
                    grid.set(ix, iy);
                }
            }
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoxSpec, GrainSpec, Point, ORIGIN};

    #[test]
    fn empty_scene_is_vacant() {
        let grid = rasterize_scene(&[], BoxSpec::new(4.0, 1.0).rect(), 64).unwrap();
        assert_eq!(grid.covered_fraction(), 0.0);
        assert!(grid.has_path(false, Axis::Horizontal));
        assert!(!grid.has_path(true, Axis::Horizontal));
    }

    #[test]
    fn single_grain_covering_region() {
        let g = GrainSpec::disk(ORIGIN, 10.0);
        let grid = rasterize_scene(&[g], BoxSpec::new(4.0, 1.0).rect(), 64).unwrap();
        assert_eq!(grid.covered_fraction(), 1.0);
        assert!(grid.has_path(true, Axis::Horizontal));
        assert!(!grid.has_path(false, Axis::Vertical));
    }

    #[test]
    fn horizontal_bar_blocks_vertical_vacant_path() {
        let g = GrainSpec::ellipse(ORIGIN, 100.0, 0.0);
        let rect = BoxSpec::new(8.0, 1.0).rect();
        let grid = rasterize_scene(&[g], rect, 128).unwrap();
        assert!(grid.has_path(true, Axis::Horizontal));
        assert!(!grid.has_path(false, Axis::Vertical));
        assert!(grid.has_path(false, Axis::Horizontal) == false || grid.covered_fraction() < 1.0);
    }

    #[test]
    fn ring_of_disks_has_circuit() {
        let mut grains = Vec::new();
        let n = 24;
        let rad = 6.0;
        for i in 0..n {
            let t = i as f64 / n as f64 * std::f64::consts::TAU;
            grains.push(GrainSpec::disk(Point::new(rad * t.cos(), rad * t.sin()), 1.0));
        }
        let rect = Rect { x0: -10.0, x1: 10.0, y0: -10.0, y1: 10.0 };
        let grid = rasterize_scene(&grains, rect, 512).unwrap();
        assert!(grid.has_circuit_around(true, ORIGIN, 4.0, 8.0));
        // the covered band occupies radii 5..7, so no vacant circuit fits a
        // tight annulus around it, while one exists closer to the origin
        assert!(!grid.has_circuit_around(false, ORIGIN, 5.3, 6.7));
        assert!(grid.has_circuit_around(false, ORIGIN, 1.0, 4.0));
    }

    #[test]
    fn resolution_guard() {
        assert!(rasterize_scene(&[], BoxSpec::new(1.0, 1.0).rect(), 16).is_err());
        assert!(
            rasterize_scene_with_budget(&[], BoxSpec::new(1.0, 1.0).rect(), 4096, 1 << 20).is_err()
        );
    }
}
