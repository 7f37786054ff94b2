//! Symmetric-decreasing rearrangements, Steiner symmetrization and
//! layer-cake decompositions.
//!
//! Grid rearrangements sort the cell values and refill cells in order of
//! distance to the origin, ties broken by flat cell index. This keeps the
//! distribution function exact at grid resolution.

mod layer;

pub use layer::{layer_cake_1d, layer_cake_grid, uniform_levels, LayerCake, LevelSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{AffineMap, Body, Field, GridData, RadialProfile};
use crate::transforms::hyperplane_frame;

/// Symmetric-decreasing rearrangement of values on a uniform cell-centered
/// line grid of even length.
///
/// Cells are refilled from the center outwards, the left cell of each
/// mirror pair first, so the result is nonincreasing in `|t|` and exactly
/// equimeasurable. Mirror pairs hold consecutive sorted values, so the
/// output is symmetric whenever the input values come in equal pairs.
pub fn rearrange_1d(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::NegativeInput);
    }
    let n = samples.len();
    let mut out = vec![0.0; n];
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for (slot, v) in center_out_order(n).zip(sorted) {
        out[slot] = v;
    }
    Ok(out)
}

/// Cell indices of an `n`-cell line ordered by distance of the center to 0.
fn center_out_order(n: usize) -> impl Iterator<Item = usize> {
    let half = n / 2;
    (0..n).map(move |k| {
        let j = k / 2;
        if n % 2 == 1 {
            // odd lengths: the middle cell first, then pairs
            if k == 0 {
                half
            } else if k % 2 == 1 {
                half - k.div_ceil(2)
            } else {
                half + k / 2
            }
        } else if k % 2 == 0 {
            half - 1 - j
        } else {
            half + j
        }
    })
}

/// Radial nonincreasing rearrangement `f*`.
///
/// Grids are rearranged cell by cell (the exterior fallback is dropped, only
/// the box mass is rearranged). Radial-decreasing inputs are returned as is,
/// and an affine image `g ∘ φ` of a radial-decreasing `g` is mapped to
/// `g(|det φ|^{1/d} x)`. Other lazy fields must be sampled first.
pub fn radial_rearrange(f: &Field) -> Result<Field> {
    if f.is_radial_decreasing() {
        return Ok(f.clone());
    }
    match f.body() {
        Body::Grid(g) => radial_rearrange_grid(g).map(Field::from_grid),
        Body::Radial(p) => radial_rearrange_profile(p).map(Field::from_radial),
        Body::Affine { inner, map } if inner.is_radial_decreasing() => {
            let s = map.det().abs().powf(1.0 / f.dim().d() as f64);
            inner.compose_affine(&AffineMap::scaling(f.dim(), s)?)
        }
        _ if !f.is_nonneg() => Err(Error::NegativeInput),
        _ => Err(Error::Invalid(
            "radial rearrangement of this field needs a grid; sample it first".into(),
        )),
    }
}

fn radial_rearrange_grid(g: &GridData) -> Result<GridData> {
    if g.values().iter().any(|v| *v < 0.0) {
        return Err(Error::NegativeInput);
    }
    let d = g.dim().d();
    let mut order: Vec<usize> = (0..g.len()).collect();
    // integer-valued squared distances (in units of h²/4) make ties exact
    let key = |i: usize| {
        let idx = g.unflatten(i);
        (0..d)
            .map(|k| {
                let m = 2 * idx[k] as i64 + 1 - g.n() as i64;
                m * m
            })
            .sum::<i64>()
    };
    order.par_sort_by_key(|&i| (key(i), i));
    let mut sorted = g.values().to_vec();
    sorted.par_sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut values = vec![0.0; g.len()];
    for (slot, v) in order.into_iter().zip(sorted) {
        values[slot] = v;
    }
    Ok(g.with_values(values, None))
}

/// Exact rearrangement of the step profile, averaged back onto its shells.
fn radial_rearrange_profile(p: &RadialProfile) -> Result<RadialProfile> {
    if p.values().iter().any(|v| *v < 0.0) {
        return Err(Error::NegativeInput);
    }
    let w = p.shell_measures();
    let cells: Vec<(f64, f64)> = p.values().iter().copied().zip(w.iter().copied()).collect();
    p.with_values(rearrange_onto_shells(cells, &w))
}

/// Decreasing rearrangement of weighted samples `(value, measure)`, averaged
/// onto consecutive shells of the given measures (innermost first).
pub(crate) fn rearrange_onto_shells(mut cells: Vec<(f64, f64)>, w: &[f64]) -> Vec<f64> {
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    // Walk both partitions of the measure axis in step.
    let mut out = vec![0.0; w.len()];
    let (mut j, mut left) = (0usize, cells.first().map_or(0.0, |c| c.1));
    for (i, wi) in w.iter().enumerate() {
        let mut need = *wi;
        let mut acc = 0.0;
        while need > 0.0 && j < cells.len() {
            let take = need.min(left);
            acc += take * cells[j].0;
            need -= take;
            left -= take;
            if left <= 0.0 {
                j += 1;
                left = cells.get(j).map_or(0.0, |c| c.1);
            }
        }
        out[i] = if *wi > 0.0 { acc / wi } else { 0.0 };
    }
    // the exact averages are nonincreasing; remove rounding wiggles
    for i in 1..out.len() {
        out[i] = out[i].min(out[i - 1]);
    }
    out
}

/// Steiner symmetrization along `direction`: every line parallel to it is
/// replaced by its 1-D rearrangement about the orthogonal hyperplane
/// through 0.
///
/// Coordinate directions act directly on the lattice. Other directions
/// rotate the grid so `direction` becomes the last axis, symmetrize, and
/// rotate back (two interpolating resamples).
pub fn steiner_symmetrize(f: &Field, direction: &[f64]) -> Result<Field> {
    let dim = f.dim();
    let d = dim.d();
    if direction.len() != d {
        return Err(Error::Invalid("direction must have d components".into()));
    }
    let n2: f64 = direction.iter().map(|v| v * v).sum();
    if !(n2 > 0.0) || !n2.is_finite() {
        return Err(Error::Invalid("Steiner direction must be nonzero".into()));
    }
    if f.is_radial_decreasing() {
        return Ok(f.clone());
    }
    let Some(g) = f.as_grid() else {
        return Err(Error::Invalid(
            "Steiner symmetrization needs a grid; sample the field first".into(),
        ));
    };
    let theta: Vec<f64> = direction.iter().map(|v| v / n2.sqrt()).collect();
    if let Some(axis) = theta.iter().position(|t| t.abs() > 1.0 - 1e-14) {
        return steiner_axis(g, axis).map(Field::from_grid);
    }
    let th = crate::grid::point(&theta);
    let frame = hyperplane_frame(&th, d);
    // rows of q: frame vectors, then θ; q maps x to coordinates with x·θ last
    let mut q = Vec::with_capacity(d * d);
    for row in frame.iter().take(d - 1).chain(std::iter::once(&th)) {
        q.extend_from_slice(&row[..d]);
    }
    let zero = vec![0.0; d];
    let rot = AffineMap::new(dim, &q, &zero)?;
    let rotated = Field::from_grid(g.clone().with_exterior(None)).compose_affine(&rot.inverse())?;
    // boundary extrapolation of the resample can dip slightly below 0
    let clipped = rotated.as_grid().unwrap().map_values(|v| v.max(0.0), None);
    let sym = steiner_axis(&clipped, d - 1)?;
    let back = Field::from_grid(sym).compose_affine(&rot)?;
    Ok(Field::from_grid(
        back.as_grid().unwrap().map_values(|v| v.max(0.0), None),
    ))
}

/// Steiner symmetrization of a grid along a coordinate axis.
pub fn steiner_axis(g: &GridData, axis: usize) -> Result<GridData> {
    let d = g.dim().d();
    if axis >= d {
        return Err(Error::Invalid(format!("axis {axis} out of range for d = {d}")));
    }
    if g.values().iter().any(|v| *v < 0.0) {
        return Err(Error::NegativeInput);
    }
    let n = g.n();
    let stride = n.pow((d - 1 - axis) as u32);
    // line starts: flat indices whose `axis` coordinate is 0
    let starts: Vec<usize> = (0..g.len()).filter(|i| g.unflatten(*i)[axis] == 0).collect();
    let lines: Vec<(usize, Vec<f64>)> = starts
        .par_iter()
        .map(|&s| {
            let line: Vec<f64> = (0..n).map(|k| g.values()[s + k * stride]).collect();
            (s, rearrange_1d(&line).expect("checked nonnegative"))
        })
        .collect();
    let mut values = vec![0.0; g.len()];
    for (s, line) in lines {
        for (k, v) in line.into_iter().enumerate() {
            values[s + k * stride] = v;
        }
    }
    Ok(g.with_values(values, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dim::Dimension;
    use crate::grid::lp_norm;
    use proptest::prelude::*;

    fn indicator(n: usize, h: f64, a: f64, b: f64) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let t = -(n as f64) * h / 2.0 + (i as f64 + 0.5) * h;
                if t > a && t < b {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }

    #[test]
    fn interval_is_recentred() {
        let (n, h) = (40, 0.5);
        let out = rearrange_1d(&indicator(n, h, 2.0, 5.0)).unwrap();
        assert_eq!(out, indicator(n, h, -1.5, 1.5));
    }

    #[test]
    fn symmetric_decreasing_is_fixed() {
        let n = 20;
        let f: Vec<f64> = (0..n)
            .map(|i| {
                let t = -10.0 + i as f64 + 0.5;
                1.0 / (1.0 + t * t)
            })
            .collect();
        assert_eq!(rearrange_1d(&f).unwrap(), f);
    }

    #[test]
    fn two_bumps_stack() {
        let (n, h) = (80, 0.125);
        let f: Vec<f64> = indicator(n, h, -4.0, -3.0)
            .iter()
            .zip(indicator(n, h, 2.0, 3.0))
            .map(|(a, b)| 2.0 * a + b)
            .collect();
        let out = rearrange_1d(&f).unwrap();
        // distribution function from sorting the input
        let above = |v: &[f64], s: f64| v.iter().filter(|x| **x > s).count() as f64 * h;
        assert_eq!(above(&out, 1.0), 1.0);
        assert_eq!(above(&out, 0.0), 2.0);
        let want: Vec<f64> = indicator(n, h, -0.5, 0.5)
            .iter()
            .zip(indicator(n, h, -1.0, 1.0))
            .map(|(a, b)| a + b)
            .collect();
        assert_eq!(out, want);
    }

    #[test]
    fn negative_rejected() {
        assert_eq!(rearrange_1d(&[1.0, -0.1]), Err(Error::NegativeInput));
    }

    #[test]
    fn shifted_ball_becomes_centered() {
        let dim = Dimension::TWO;
        let ball = Field::ball_indicator(dim, 1.0, 1.0);
        let shifted = ball
            .compose_affine(&AffineMap::translation(dim, &[-3.0, 0.0]).unwrap())
            .unwrap();
        let r = radial_rearrange(&shifted).unwrap();
        for x in [[0.0, 0.0, 0.0], [0.9, 0.0, 0.0], [0.0, -1.1, 0.0], [3.0, 0.0, 0.0]] {
            assert_eq!(r.value(&x), ball.value(&x));
        }
        // same on the grid path
        let g = GridData::sample(&shifted, 64, 8.0).unwrap();
        let c = GridData::sample(&ball, 64, 8.0).unwrap();
        let rg = radial_rearrange(&Field::from_grid(g)).unwrap();
        assert_eq!(rg.as_grid().unwrap().values(), c.values());
    }

    #[test]
    fn extremizer_unchanged() {
        let f = Field::extremizer(Dimension::TWO, 1.0, 1.0);
        let r = radial_rearrange(&f).unwrap();
        assert_eq!(r.value(&[0.3, 0.4, 0.0]), f.value(&[0.3, 0.4, 0.0]));
    }

    #[test]
    fn grid_rearrangement_preserves_norms() {
        for seed in 0..4 {
            let f = Field::random_smooth(Dimension::TWO, seed, 3);
            let g = Field::from_grid(GridData::sample(&f, 64, 6.0).unwrap());
            let r = radial_rearrange(&g).unwrap();
            for p in [1.0, 1.5, 2.0] {
                let a = lp_norm(&g, p).unwrap();
                let b = lp_norm(&r, p).unwrap();
                assert!((a - b).abs() < 1e-12 * a);
            }
        }
    }

    #[test]
    fn profile_rearrangement_sorts_and_keeps_mass() {
        let p = RadialProfile::sinh_layout(Dimension::TWO, 32, 0.1, 10.0).unwrap();
        let vals: Vec<f64> = p.nodes().iter().map(|r| (-(r - 2.0) * (r - 2.0)).exp()).collect();
        let p = p.with_values(vals).unwrap();
        let r = radial_rearrange_profile(&p).unwrap();
        assert!(r.is_nonincreasing());
        assert!((r.lp_norm(1.0) - p.lp_norm(1.0)).abs() < 1e-12 * p.lp_norm(1.0));
        assert!(r.values()[0] <= 1.0 + 1e-15);
    }

    #[test]
    fn steiner_centres_slabs() {
        // f(x1, t) = g(x1) 1_{|t - c(x1)| < w}
        let dim = Dimension::TWO;
        let n = 64;
        let probe = GridData::new(dim, n, 4.0, vec![0.0; n * n]).unwrap();
        let vals: Vec<f64> = (0..probe.len())
            .map(|i| {
                let x = probe.center(i);
                let c = 0.5 * x[0];
                if (x[1] - c).abs() < 1.0 {
                    (-x[0] * x[0]).exp()
                } else {
                    0.0
                }
            })
            .collect();
        let g = GridData::new(dim, n, 4.0, vals).unwrap();
        let s = steiner_symmetrize(&Field::from_grid(g), &[0.0, 2.0]).unwrap();
        let sg = s.as_grid().unwrap();
        for i0 in 0..n {
            // the support on each vertical line is centered at 0 to within half a cell
            let ts: Vec<f64> = (0..n)
                .filter(|k| sg.values()[i0 * n + k] > 0.0)
                .map(|k| sg.coord(k))
                .collect();
            if let (Some(a), Some(b)) = (ts.first(), ts.last()) {
                assert!((a + b).abs() <= sg.h() + 1e-12, "line {i0}: [{a}, {b}]");
            }
        }
        // the symmetrized line superlevel sets all share the center 0
        let idem = steiner_axis(sg, 1).unwrap();
        assert_eq!(idem.values(), sg.values());
    }

    #[test]
    fn oblique_steiner_keeps_mass() {
        let dim = Dimension::TWO;
        let f = Field::random_smooth(dim, 11, 3);
        let g = Field::from_grid(GridData::sample(&f, 96, 6.0).unwrap());
        let s = steiner_symmetrize(&g, &[1.0, 1.0]).unwrap();
        let a = lp_norm(&g, 1.0).unwrap();
        let b = lp_norm(&s, 1.0).unwrap();
        assert!((a - b).abs() < 2e-2 * a, "{a} vs {b}");
        assert!(steiner_symmetrize(&g, &[0.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn rearrangement_is_equimeasurable(v in prop::collection::vec(0.0f64..5.0, 2..60), s in 0.0f64..5.0) {
            let mut v = v;
            if v.len() % 2 == 1 { v.push(0.0); }
            let r = rearrange_1d(&v).unwrap();
            let count = |x: &[f64]| x.iter().filter(|y| **y > s).count();
            prop_assert_eq!(count(&v), count(&r));
            // nonincreasing in |t|
            let n = r.len();
            for k in 0..n / 2 - 1 {
                let inner = r[n / 2 - 1 - k].min(r[n / 2 + k]);
                let outer = r[n / 2 - 2 - k].max(r[n / 2 + k + 1]);
                prop_assert!(inner >= outer);
            }
            prop_assert_eq!(rearrange_1d(&r).unwrap(), r);
        }
    }
}
