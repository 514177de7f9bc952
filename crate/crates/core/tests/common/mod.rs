//! Planar geometry and goodness-of-fit helpers shared by integration tests.

use distrisk::sampler::{sample_uniform, SimplexPartition};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Convex polygon vertices sorted counter-clockwise around their centroid.
pub fn polygon(points: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / points.len() as f64;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / points.len() as f64;
    let mut pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
    pts.sort_by(|a, b| {
        (a[1] - cy)
            .atan2(a[0] - cx)
            .total_cmp(&(b[1] - cy).atan2(b[0] - cx))
    });
    pts
}

pub fn shoelace(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        .abs()
        / 2.0
}

/// Sutherland-Hodgman clip of a convex polygon against `axis <= bound`
/// (`keep_below`) or `axis >= bound`.
pub fn clip(poly: &[[f64; 2]], axis: usize, bound: f64, keep_below: bool) -> Vec<[f64; 2]> {
    let inside = |p: &[f64; 2]| if keep_below { p[axis] <= bound } else { p[axis] >= bound };
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let (ia, ib) = (inside(&a), inside(&b));
        if ia {
            out.push(a);
        }
        if ia != ib {
            let t = (bound - a[axis]) / (b[axis] - a[axis]);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// Chi-square statistic and its 0.999 critical value for `n` uniform draws
/// over a planar partition, binned on a regular grid over the bounding box.
/// Cells with expected count below 5 are pooled.
pub fn chi_square_uniformity(part: &SimplexPartition, n: usize, seed: u64) -> (f64, f64) {
    let chart = part.chart().expect("planar partition");
    let poly = polygon(part.vertex_coords());
    let area = shoelace(&poly);
    let lo = [0, 1].map(|a| poly.iter().map(|p| p[a]).fold(f64::INFINITY, f64::min));
    let hi = [0, 1].map(|a| poly.iter().map(|p| p[a]).fold(f64::NEG_INFINITY, f64::max));
    let bins = 8;
    let width = [0, 1].map(|a| (hi[a] - lo[a]) / bins as f64);

    let batch = sample_uniform(part, n, seed).unwrap();
    let mut observed = vec![0usize; bins * bins];
    for q in batch.iter() {
        let c = chart.to_coords(q).unwrap();
        let ix = (((c[0] - lo[0]) / width[0]) as usize).min(bins - 1);
        let iy = (((c[1] - lo[1]) / width[1]) as usize).min(bins - 1);
        observed[iy * bins + ix] += 1;
    }

    let mut stat = 0.0;
    let mut cells = 0;
    let mut pooled = (0.0, 0usize);
    for iy in 0..bins {
        for ix in 0..bins {
            let x0 = lo[0] + ix as f64 * width[0];
            let y0 = lo[1] + iy as f64 * width[1];
            let mut cell = clip(&poly, 0, x0, false);
            cell = clip(&cell, 0, x0 + width[0], true);
            cell = clip(&cell, 1, y0, false);
            cell = clip(&cell, 1, y0 + width[1], true);
            let expected = if cell.len() < 3 { 0.0 } else { shoelace(&cell) / area * n as f64 };
            let obs = observed[iy * bins + ix];
            if expected < 5.0 {
                pooled.0 += expected;
                pooled.1 += obs;
                continue;
            }
            stat += (obs as f64 - expected).powi(2) / expected;
            cells += 1;
        }
    }
    if pooled.0 >= 5.0 {
        stat += (pooled.1 as f64 - pooled.0).powi(2) / pooled.0;
        cells += 1;
    }
    let critical = ChiSquared::new((cells - 1) as f64).unwrap().inverse_cdf(0.999);
    (stat, critical)
}
