use super::{Lattice, MetricMeasureSpace};
use crate::error::{invalid, Error, Result};

/// Largest space the builders will produce; dense eigendecompositions of
/// this size are still desk-scale.
pub const DEFAULT_POINT_CAP: usize = 4096;

/// Discrete torus `Z_N^d` with the graph metric and counting measure.
/// Point 0 is the origin.
pub fn build_torus(n: usize, d: usize) -> Result<MetricMeasureSpace> {
    build_torus_with_cap(n, d, DEFAULT_POINT_CAP)
}

pub fn build_torus_with_cap(n: usize, d: usize, cap: usize) -> Result<MetricMeasureSpace> {
    if n < 2 {
        return Err(invalid(
            "N",
            format!("torus side must be at least 2, got {n}"),
        ));
    }
    if !(1..=3).contains(&d) {
        return Err(invalid(
            "d",
            format!("torus dimension must be 1, 2 or 3, got {d}"),
        ));
    }
    let n_pts = n
        .checked_pow(d as u32)
        .filter(|&p| p <= cap)
        .ok_or(Error::CapExceeded {
            requested: n.saturating_pow(d as u32),
            cap,
        })?;
    let coords = lattice_coords(&vec![n; d]);
    let mut dist = vec![0.0; n_pts * n_pts];
    for x in 0..n_pts {
        for y in 0..n_pts {
            let mut s = 0usize;
            for k in 0..d {
                let a = coords[x][k].abs_diff(coords[y][k]);
                s += a.min(n - a);
            }
            dist[x * n_pts + y] = s as f64;
        }
    }
    Ok(MetricMeasureSpace::from_parts_unchecked(
        dist,
        vec![1.0; n_pts],
        Some(0),
        Some(Lattice {
            dims: vec![n; d],
            periodic: true,
            coords,
        }),
    ))
}

/// Centered integer segment `{-R, ..., R}` with the usual metric and
/// counting measure; the origin is the middle point.
pub fn build_segment(radius: usize) -> Result<MetricMeasureSpace> {
    let n_pts = 2 * radius + 1;
    if n_pts > DEFAULT_POINT_CAP {
        return Err(Error::CapExceeded {
            requested: n_pts,
            cap: DEFAULT_POINT_CAP,
        });
    }
    let mut dist = vec![0.0; n_pts * n_pts];
    for x in 0..n_pts {
        for y in 0..n_pts {
            dist[x * n_pts + y] = x.abs_diff(y) as f64;
        }
    }
    Ok(MetricMeasureSpace::from_parts_unchecked(
        dist,
        vec![1.0; n_pts],
        Some(radius),
        Some(Lattice {
            dims: vec![n_pts],
            periodic: false,
            coords: (0..n_pts).map(|i| vec![i]).collect(),
        }),
    ))
}

/// Cells of a `width × height` grid selected by `mask` (row-major, one
/// row per `y`), with the ambient taxicab metric and counting measure.
///
/// The ambient metric is kept even when the selected region is not
/// connected through the mask, so the result need not be doubling.
pub fn build_masked_grid(width: usize, height: usize, mask: &[bool]) -> Result<MetricMeasureSpace> {
    if mask.len() != width * height {
        return Err(invalid(
            "mask",
            format!("expected {} cells, got {}", width * height, mask.len()),
        ));
    }
    let coords: Vec<Vec<usize>> = (0..height)
        .flat_map(|y| (0..width).map(move |x| (x, y)))
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|((x, y), _)| vec![x, y])
        .collect();
    let n_pts = coords.len();
    if n_pts == 0 {
        return Err(invalid("mask", "mask selects no cells"));
    }
    if n_pts > DEFAULT_POINT_CAP {
        return Err(Error::CapExceeded {
            requested: n_pts,
            cap: DEFAULT_POINT_CAP,
        });
    }
    let mut dist = vec![0.0; n_pts * n_pts];
    for a in 0..n_pts {
        for b in 0..n_pts {
            let d = coords[a][0].abs_diff(coords[b][0]) + coords[a][1].abs_diff(coords[b][1]);
            dist[a * n_pts + b] = d as f64;
        }
    }
    Ok(MetricMeasureSpace::from_parts_unchecked(
        dist,
        vec![1.0; n_pts],
        None,
        Some(Lattice {
            dims: vec![width, height],
            periodic: false,
            coords,
        }),
    ))
}

/// Parses a text mask of `#` (selected) and `.` (empty) characters.
/// Returns `(width, height, cells)`; blank lines are ignored.
pub fn parse_mask(text: &str) -> Result<(usize, usize, Vec<bool>)> {
    let rows: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    let width = rows.first().map(|r| r.chars().count()).unwrap_or(0);
    let mut cells = Vec::with_capacity(width * rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.chars().count() != width {
            return Err(invalid("mask", format!("row {i} has a different width")));
        }
        for ch in row.chars() {
            match ch {
                '#' => cells.push(true),
                '.' => cells.push(false),
                other => return Err(invalid("mask", format!("unexpected character {other:?}"))),
            }
        }
    }
    Ok((width, rows.len(), cells))
}

fn lattice_coords(dims: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = dims.iter().product();
    (0..total)
        .map(|mut i| {
            let mut c = vec![0; dims.len()];
            for k in (0..dims.len()).rev() {
                c[k] = i % dims[k];
                i /= dims[k];
            }
            c
        })
        .collect()
}
