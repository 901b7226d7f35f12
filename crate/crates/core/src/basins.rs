//! 2-D basin-of-attraction rasterizer: label every grid cell by the memory
//! its recursion settles nearest to, compare against the Voronoi partition of
//! the same memories, and report the agreement fraction.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::dynamics::run_recursion;
use crate::error::{Error, Result};
use crate::infer::nearest_memory;
use crate::model::{DynamicsConfig, ParticleState, PrototypeSet};

/// Axis-aligned rectangle in data coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

/// Rasterized basins and Voronoi labels over a rectangle, row-major from the
/// minimum corner; `agreement` is the fraction of cells whose labels match.
#[derive(Debug, Clone)]
pub struct BasinGrid {
    pub bounds: Rect,
    pub width: usize,
    pub height: usize,
    pub basin_labels: Vec<usize>,
    pub voronoi_labels: Vec<usize>,
    pub agreement: f64,
}

impl BasinGrid {
    /// Center of cell (ix, iy) in data coordinates.
    pub fn cell_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        let dx = (self.bounds.max_x - self.bounds.min_x) / self.width as f64;
        let dy = (self.bounds.max_y - self.bounds.min_y) / self.height as f64;
        (
            self.bounds.min_x + (ix as f64 + 0.5) * dx,
            self.bounds.min_y + (iy as f64 + 0.5) * dy,
        )
    }
}

/// Memories' bounding box padded by 20% on each side.
pub fn default_bounds(protos: &PrototypeSet) -> Rect {
    let mut r = Rect {
        min_x: f64::INFINITY,
        min_y: f64::INFINITY,
        max_x: f64::NEG_INFINITY,
        max_y: f64::NEG_INFINITY,
    };
    for mu in 0..protos.k() {
        let m = protos.memory(mu);
        r.min_x = r.min_x.min(m[0]);
        r.max_x = r.max_x.max(m[0]);
        r.min_y = r.min_y.min(m[1]);
        r.max_y = r.max_y.max(m[1]);
    }
    let pad_x = 0.2 * (r.max_x - r.min_x).max(1e-6);
    let pad_y = 0.2 * (r.max_y - r.min_y).max(1e-6);
    Rect {
        min_x: r.min_x - pad_x,
        min_y: r.min_y - pad_y,
        max_x: r.max_x + pad_x,
        max_y: r.max_y + pad_y,
    }
}

/// Rasterizes basins for 2-D memories: each cell center runs the recursion
/// and takes the label of the nearest memory to its settled state; Voronoi
/// labels come from direct nearest-memory lookup.
pub fn compute_basins(
    protos: &PrototypeSet,
    cfg: &DynamicsConfig,
    bounds: Option<Rect>,
    width: usize,
    height: usize,
) -> Result<BasinGrid> {
    if protos.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: protos.dim(),
            context: "basin map requires 2-D memories",
        });
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidConfig("grid resolution must be positive".into()));
    }
    let bounds = bounds.unwrap_or_else(|| default_bounds(protos));
    let dx = (bounds.max_x - bounds.min_x) / width as f64;
    let dy = (bounds.max_y - bounds.min_y) / height as f64;

    let labels: Vec<(usize, usize)> = (0..width * height)
        .into_par_iter()
        .with_min_len(width)
        .map(|cell| {
            let ix = cell % width;
            let iy = cell / width;
            let x = bounds.min_x + (ix as f64 + 0.5) * dx;
            let y = bounds.min_y + (iy as f64 + 0.5) * dy;
            let finl = run_recursion(&ParticleState::free(vec![x, y]), protos, cfg)?;
            let basin = nearest_memory(&finl.position, protos).0;
            let voronoi = nearest_memory(&[x, y], protos).0;
            Ok((basin, voronoi))
        })
        .collect::<Result<_>>()?;

    let agree = labels.iter().filter(|(b, v)| b == v).count();
    let (basin_labels, voronoi_labels) = labels.into_iter().unzip();
    Ok(BasinGrid {
        bounds,
        width,
        height,
        basin_labels,
        voronoi_labels,
        agreement: agree as f64 / (width * height) as f64,
    })
}

/// Indexed color palette for up to 12 memories, cycling beyond that.
const PALETTE: [[u8; 3]; 12] = [
    [230, 126, 34],
    [39, 174, 96],
    [41, 128, 185],
    [142, 68, 173],
    [241, 196, 15],
    [231, 76, 60],
    [26, 188, 156],
    [52, 73, 94],
    [155, 89, 182],
    [46, 204, 113],
    [211, 84, 0],
    [127, 140, 141],
];

/// Writes the basin labels as a plain (P3) PPM image, one palette color per
/// memory, top row = max_y edge.
pub fn write_ppm<P: AsRef<Path>>(grid: &BasinGrid, path: P) -> Result<()> {
    let mut out = String::new();
    out.push_str("P3\n");
    out.push_str(&format!("{} {}\n255\n", grid.width, grid.height));
    for iy in (0..grid.height).rev() {
        for ix in 0..grid.width {
            let label = grid.basin_labels[iy * grid.width + ix];
            let c = PALETTE[label % PALETTE.len()];
            out.push_str(&format!("{} {} {} ", c[0], c[1], c[2]));
        }
        out.push('\n');
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

/// Writes both label grids as CSV rows: x, y, basin, voronoi.
pub fn write_grid_csv<P: AsRef<Path>>(grid: &BasinGrid, path: P) -> Result<()> {
    let mut out = String::from("x,y,basin,voronoi\n");
    for iy in 0..grid.height {
        for ix in 0..grid.width {
            let (x, y) = grid.cell_center(ix, iy);
            let i = iy * grid.width + ix;
            out.push_str(&format!(
                "{x},{y},{},{}\n",
                grid.basin_labels[i], grid.voronoi_labels[i]
            ));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes memory positions as a CSV sidecar: index, x, y.
pub fn write_memory_csv<P: AsRef<Path>>(protos: &PrototypeSet, path: P) -> Result<()> {
    let mut out = String::from("memory,x,y\n");
    for mu in 0..protos.k() {
        let m = protos.memory(mu);
        out.push_str(&format!("{mu},{},{}\n", m[0], m[1]));
    }
    std::fs::write(path, out)?;
    Ok(())
}
