//! Uniform sampling from `D(Y, mu)`.
//!
//! The polytope is mapped to orthonormal coordinates on its `(d-2)`-dimensional
//! affine hull, split into simplices, and sampled by picking a simplex with
//! probability proportional to its volume and a point inside it with uniform
//! barycentric weights. Sampled pmfs are convex combinations of vertex pmfs,
//! so they are nonnegative and have mean `mu` by construction.
//!
//! The generator is ChaCha20 (`rand_chacha::ChaCha20Rng::seed_from_u64`),
//! which is portable across platforms and releases.

use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::linalg;
use crate::polytope::{format_f64, GeneratorSet, Pmf, SupportGrid};

const RANK_TOL: f64 = 1e-10;

/// Orthonormal coordinates on the affine hull of the polytope.
#[derive(Debug, Clone)]
pub struct AffineChart {
    origin: Pmf,
    basis: Vec<Vec<f64>>,
}

impl AffineChart {
    /// Chart anchored at the first vertex of `gens`.
    ///
    /// Fails with [`Error::DegeneratePolytope`] unless the vertices span a
    /// `(d-2)`-dimensional hull.
    pub fn build(gens: &GeneratorSet) -> Result<Self> {
        let d = gens.grid().len();
        let vertices: Vec<&Pmf> = gens.vertices().map(|g| &g.pmf).collect();
        let origin = *vertices
            .first()
            .ok_or_else(|| Error::DegeneratePolytope("no vertices".into()))?;
        if d < 3 {
            return Err(Error::DegeneratePolytope(format!(
                "support of size {d} gives a single point"
            )));
        }
        let diffs: Vec<Vec<f64>> = vertices[1..]
            .iter()
            .map(|v| sub(v.probs(), origin.probs()))
            .collect();
        let mut basis = Vec::new();
        linalg::extend_orthonormal(&mut basis, &diffs, RANK_TOL);
        if basis.len() != d - 2 {
            return Err(Error::DegeneratePolytope(format!(
                "vertices span dimension {}, expected {}",
                basis.len(),
                d - 2
            )));
        }
        Ok(Self {
            origin: origin.clone(),
            basis,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn origin(&self) -> &Pmf {
        &self.origin
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn to_coords(&self, pmf: &Pmf) -> Result<Vec<f64>> {
        if pmf.grid() != self.origin.grid() {
            return Err(Error::GridMismatch);
        }
        let diff = sub(pmf.probs(), self.origin.probs());
        Ok(self.basis.iter().map(|b| linalg::dot(&diff, b)).collect())
    }

    /// Raw probability vector for chart coordinates (may leave the simplex).
    pub fn to_probs(&self, coords: &[f64]) -> Vec<f64> {
        let mut probs = self.origin.probs().to_vec();
        for (c, b) in coords.iter().zip(&self.basis) {
            for (p, bi) in probs.iter_mut().zip(b) {
                *p += c * bi;
            }
        }
        probs
    }

    /// Pmf for chart coordinates; round-off negatives above `-1e-12` are clamped.
    pub fn to_pmf(&self, coords: &[f64]) -> Result<Pmf> {
        let probs = self
            .to_probs(coords)
            .into_iter()
            .map(|p| if p < 0.0 && p > -1e-12 { 0.0 } else { p })
            .collect();
        Pmf::new(self.origin.grid().clone(), probs)
    }

    /// True when the coordinates map inside the polytope.
    pub fn inside(&self, coords: &[f64]) -> bool {
        self.to_probs(coords).iter().all(|&p| p >= 0.0)
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// A partition of the polytope into `k`-simplices, `k = d - 2`.
#[derive(Debug, Clone)]
pub struct SimplexPartition {
    dim: usize,
    vertices: Vec<Pmf>,
    coords: Vec<Vec<f64>>,
    /// Vertex indices per simplex, into [`GeneratorSet::vertices`] order.
    pub simplices: Vec<Vec<usize>>,
    /// Simplex volumes in chart units.
    pub volumes: Vec<f64>,
    chart: Option<AffineChart>,
}

impl SimplexPartition {
    /// Triangulates the polytope spanned by `gens` in `chart` coordinates.
    ///
    /// Uses a pulling triangulation: a face is coned from its first vertex over
    /// the triangulations of the facets not containing that vertex. Facets are
    /// read off the coordinate hyperplanes `p_j = 0`.
    pub fn triangulate(gens: &GeneratorSet, chart: &AffineChart) -> Result<Self> {
        let k = chart.dim();
        if k == 0 {
            return Err(Error::DegeneratePolytope("chart has dimension 0".into()));
        }
        let vertices: Vec<Pmf> = gens.vertices().map(|g| g.pmf.clone()).collect();
        let coords = vertices
            .iter()
            .map(|v| chart.to_coords(v))
            .collect::<Result<Vec<_>>>()?;
        let all: Vec<usize> = (0..vertices.len()).collect();
        let simplices = pull_triangulate(&vertices, &coords, &all, k);
        let volumes = simplices
            .iter()
            .map(|s| simplex_volume(&coords, s))
            .collect();
        let partition = Self {
            dim: k,
            vertices,
            coords,
            simplices,
            volumes,
            chart: Some(chart.clone()),
        };
        partition.validate()?;
        Ok(partition)
    }

    /// Partition for a polytope that reduces to one pmf (e.g. two-point support).
    pub fn point(pmf: Pmf) -> Self {
        Self {
            dim: 0,
            vertices: vec![pmf],
            coords: vec![Vec::new()],
            simplices: vec![vec![0]],
            volumes: vec![0.0],
            chart: None,
        }
    }

    /// Chart + triangulation, or a point partition for a single-vertex polytope.
    pub fn from_generators(gens: &GeneratorSet) -> Result<Self> {
        if gens.count() == 1 {
            let v = gens.vertices().next().expect("one vertex");
            return Ok(Self::point(v.pmf.clone()));
        }
        let chart = AffineChart::build(gens)?;
        Self::triangulate(gens, &chart)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn chart(&self) -> Option<&AffineChart> {
        self.chart.as_ref()
    }

    pub fn vertex_pmfs(&self) -> &[Pmf] {
        &self.vertices
    }

    pub fn vertex_coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn grid(&self) -> &SupportGrid {
        self.vertices[0].grid()
    }

    pub fn total_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    /// Rejects degenerate simplices and simplices that overlap another one.
    fn validate(&self) -> Result<()> {
        let scale = self.total_volume().max(f64::MIN_POSITIVE);
        for (s, v) in self.simplices.iter().zip(&self.volumes) {
            if *v <= 1e-12 * scale {
                return Err(Error::InvalidTriangulation(format!(
                    "simplex {s:?} is flat (volume {v:e})"
                )));
            }
        }
        for (i, s) in self.simplices.iter().enumerate() {
            let centroid = self.centroid(s);
            for (j, t) in self.simplices.iter().enumerate() {
                if i == j {
                    continue;
                }
                if let Some(bary) = self.barycentric(t, &centroid) {
                    if bary.iter().all(|&b| b > 1e-9) {
                        return Err(Error::InvalidTriangulation(format!(
                            "simplices {s:?} and {t:?} overlap"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn centroid(&self, simplex: &[usize]) -> Vec<f64> {
        let n = simplex.len() as f64;
        let mut c = vec![0.0; self.dim];
        for &v in simplex {
            for (ci, x) in c.iter_mut().zip(&self.coords[v]) {
                *ci += x / n;
            }
        }
        c
    }

    /// Barycentric coordinates of `point` in simplex `simplex`.
    pub fn barycentric(&self, simplex: &[usize], point: &[f64]) -> Option<Vec<f64>> {
        let base = &self.coords[simplex[0]];
        // rows: coordinate axes; columns: edge vectors
        let m: Vec<Vec<f64>> = (0..self.dim)
            .map(|r| {
                simplex[1..]
                    .iter()
                    .map(|&v| self.coords[v][r] - base[r])
                    .collect()
            })
            .collect();
        let rhs: Vec<f64> = point.iter().zip(base).map(|(p, b)| p - b).collect();
        let tail = linalg::solve(m, rhs)?;
        let head = 1.0 - tail.iter().sum::<f64>();
        Some(std::iter::once(head).chain(tail).collect())
    }

    /// Index of the simplex whose closure contains `point` (chart coordinates).
    pub fn locate(&self, point: &[f64]) -> Option<usize> {
        self.simplices.iter().position(|s| {
            self.barycentric(s, point)
                .is_some_and(|b| b.iter().all(|&x| x >= -1e-12))
        })
    }

    /// Draws `count` pmfs and reports the simplex each came from.
    pub fn sample_with_cells(&self, count: usize, seed: u64) -> Result<(Vec<Pmf>, Vec<usize>)> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        if self.dim == 0 {
            return Ok((vec![self.vertices[0].clone(); count], vec![0; count]));
        }
        let picker = WeightedIndex::new(&self.volumes)
            .map_err(|e| Error::DegeneratePolytope(format!("simplex volumes: {e}")))?;
        let d = self.grid().len();
        let mut pmfs = Vec::with_capacity(count);
        let mut cells = Vec::with_capacity(count);
        let mut weights = vec![0.0; self.dim + 1];
        for _ in 0..count {
            let cell = picker.sample(&mut rng);
            for w in weights.iter_mut() {
                *w = Exp1.sample(&mut rng);
            }
            let total: f64 = weights.iter().sum();
            let mut probs = vec![0.0; d];
            for (&v, w) in self.simplices[cell].iter().zip(&weights) {
                let lambda = w / total;
                for (p, q) in probs.iter_mut().zip(self.vertices[v].probs()) {
                    *p += lambda * q;
                }
            }
            pmfs.push(Pmf::new(self.grid().clone(), probs)?);
            cells.push(cell);
        }
        Ok((pmfs, cells))
    }
}

fn affine_rank(coords: &[Vec<f64>], face: &[usize]) -> usize {
    let base = &coords[face[0]];
    let diffs: Vec<Vec<f64>> = face[1..].iter().map(|&v| sub(&coords[v], base)).collect();
    linalg::rank(&diffs, RANK_TOL)
}

fn pull_triangulate(
    vertices: &[Pmf],
    coords: &[Vec<f64>],
    face: &[usize],
    dim: usize,
) -> Vec<Vec<usize>> {
    if face.len() == dim + 1 {
        return vec![face.to_vec()];
    }
    let apex = face[0];
    let d = vertices[apex].len();
    let mut facets: Vec<Vec<usize>> = Vec::new();
    for j in (0..d).filter(|&j| vertices[apex].probs()[j] > 0.0) {
        let facet: Vec<usize> = face
            .iter()
            .copied()
            .filter(|&v| vertices[v].probs()[j] == 0.0)
            .collect();
        if facet.len() >= dim && !facets.contains(&facet) && affine_rank(coords, &facet) == dim - 1
        {
            facets.push(facet);
        }
    }
    let mut out = Vec::new();
    for facet in facets {
        for s in pull_triangulate(vertices, coords, &facet, dim - 1) {
            let mut simplex = Vec::with_capacity(dim + 1);
            simplex.push(apex);
            simplex.extend(s);
            out.push(simplex);
        }
    }
    out
}

/// `|det(v_1 - v_0, ..., v_k - v_0)| / k!`
fn simplex_volume(coords: &[Vec<f64>], simplex: &[usize]) -> f64 {
    let base = &coords[simplex[0]];
    let k = simplex.len() - 1;
    let rows: Vec<Vec<f64>> = simplex[1..].iter().map(|&v| sub(&coords[v], base)).collect();
    linalg::determinant(rows).abs() / linalg::factorial(k)
}

/// A seeded batch of pmfs drawn from one polytope.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub pmfs: Vec<Pmf>,
    pub seed: u64,
}

impl SampleBatch {
    pub fn new(pmfs: Vec<Pmf>, seed: u64) -> Self {
        Self { pmfs, seed }
    }

    pub fn count(&self) -> usize {
        self.pmfs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmfs.is_empty()
    }

    pub fn grid(&self) -> Option<&SupportGrid> {
        self.pmfs.first().map(Pmf::grid)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Pmf> {
        self.pmfs.iter()
    }

    /// Keeps the samples for which `keep` holds.
    pub fn retain_by(&self, keep: &[bool]) -> SampleBatch {
        let pmfs = self
            .pmfs
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(p, _)| p.clone())
            .collect();
        SampleBatch {
            pmfs,
            seed: self.seed,
        }
    }
}

/// Uniform sample of `count` pmfs from the partitioned polytope.
pub fn sample_uniform(partition: &SimplexPartition, count: usize, seed: u64) -> Result<SampleBatch> {
    if partition.dim > 0 && partition.total_volume() <= 0.0 {
        return Err(Error::DegeneratePolytope("total volume is zero".into()));
    }
    let (pmfs, _) = partition.sample_with_cells(count, seed)?;
    Ok(SampleBatch { pmfs, seed })
}

/// Same distribution as [`sample_uniform`], split across `workers` threads.
///
/// Worker `i` uses the sub-seed `splitmix64(seed + i)`; the union is
/// distribution-identical to one batch but not sequence-identical.
pub fn sample_uniform_parallel(
    partition: &SimplexPartition,
    count: usize,
    seed: u64,
    workers: usize,
) -> Result<SampleBatch> {
    let workers = workers.max(1);
    let chunk = count.div_ceil(workers);
    let parts: Vec<Result<Vec<Pmf>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|i| {
                let n = chunk.min(count.saturating_sub(i * chunk));
                let sub_seed = splitmix64(seed.wrapping_add(i as u64));
                scope.spawn(move || sample_uniform(partition, n, sub_seed).map(|b| b.pmfs))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sampling worker panicked"))
            .collect()
    });
    let mut pmfs = Vec::with_capacity(count);
    for part in parts {
        pmfs.extend(part?);
    }
    Ok(SampleBatch { pmfs, seed })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Empirical distribution function of a per-sample statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    /// `F(t) = #{x_i <= t} / n`
    pub fn eval(&self, t: f64) -> f64 {
        let below = self.sorted.partition_point(|&x| x <= t);
        below as f64 / self.sorted.len() as f64
    }

    /// Jump points `(threshold, F(threshold))`, one per distinct value.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &x) in self.sorted.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = f,
                _ => out.push((x, f)),
            }
        }
        out
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
}

pub fn empirical_cdf(batch: &SampleBatch, statistic: &[f64]) -> Result<EmpiricalCdf> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if statistic.len() != batch.count() {
        return Err(Error::DimensionMismatch {
            expected: batch.count(),
            got: statistic.len(),
        });
    }
    let mut sorted = statistic.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(EmpiricalCdf { sorted })
}

/// CSV table of a batch: one row per pmf, probability columns then statistics.
pub struct BatchTable<'a> {
    batch: &'a SampleBatch,
    prob_headers: Vec<String>,
    descending: bool,
    columns: Vec<(String, Vec<String>)>,
}

impl<'a> BatchTable<'a> {
    /// Probability columns `p1..pd` in ascending grid order.
    pub fn new(batch: &'a SampleBatch) -> Self {
        let d = batch.grid().map_or(0, SupportGrid::len);
        Self {
            batch,
            prob_headers: (1..=d).map(|j| format!("p{j}")).collect(),
            descending: false,
            columns: Vec::new(),
        }
    }

    /// Writes probabilities in descending grid order under headers `q1..qd`.
    pub fn descending(mut self) -> Self {
        let d = self.prob_headers.len();
        self.prob_headers = (1..=d).map(|l| format!("q{l}")).collect();
        self.descending = true;
        self
    }

    pub fn column_f64(mut self, name: &str, values: &[f64]) -> Self {
        let cells = values
            .iter()
            .map(|&v| {
                if v.is_infinite() {
                    "inf".to_string()
                } else {
                    format_f64(v)
                }
            })
            .collect();
        self.columns.push((name.to_string(), cells));
        self
    }

    pub fn column_bool(mut self, name: &str, values: &[bool]) -> Self {
        let cells = values.iter().map(|&b| u8::from(b).to_string()).collect();
        self.columns.push((name.to_string(), cells));
        self
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        for (name, cells) in &self.columns {
            if cells.len() != self.batch.count() {
                return Err(Error::DimensionMismatch {
                    expected: self.batch.count(),
                    got: cells.len(),
                });
            }
            debug_assert!(!name.is_empty());
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = vec!["sample_id".to_string()];
        header.extend(self.prob_headers.iter().cloned());
        header.extend(self.columns.iter().map(|(n, _)| n.clone()));
        w.write_record(&header)?;
        for (i, pmf) in self.batch.iter().enumerate() {
            let mut row = vec![i.to_string()];
            let probs: Box<dyn Iterator<Item = &f64>> = if self.descending {
                Box::new(pmf.probs().iter().rev())
            } else {
                Box::new(pmf.probs().iter())
            };
            row.extend(probs.map(|&p| format_f64(p)));
            row.extend(self.columns.iter().map(|(_, c)| c[i].clone()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::MeanPolytope;

    fn gens(points: &[f64], mu: f64) -> GeneratorSet {
        MeanPolytope::new(SupportGrid::new(points.to_vec()).unwrap(), mu)
            .unwrap()
            .enumerate_generators()
    }

    fn four_state() -> GeneratorSet {
        gens(&[0.512, 0.768, 1.152, 1.728], 1.02)
    }

    #[test]
    fn chart_dimensions() {
        let tri = gens(&[0.64, 0.96, 1.44], 1.02);
        assert_eq!(AffineChart::build(&tri).unwrap().dim(), 1);
        let quad = four_state();
        assert_eq!(quad.count(), 4);
        assert_eq!(AffineChart::build(&quad).unwrap().dim(), 2);
        let two = gens(&[0.8, 1.2], 1.02);
        assert!(matches!(
            AffineChart::build(&two),
            Err(Error::DegeneratePolytope(_))
        ));
    }

    #[test]
    fn chart_round_trip_and_constraints() {
        let g = four_state();
        let chart = AffineChart::build(&g).unwrap();
        let y = g.grid().points();
        for b in chart.basis() {
            assert!(b.iter().sum::<f64>().abs() < 1e-12);
            let drift: f64 = b.iter().zip(y).map(|(v, y)| v * (y - 1.02)).sum();
            assert!(drift.abs() < 1e-12);
        }
        let q = g.combine(&crate::polytope::ConvexCombination::uniform(4)).unwrap();
        let c = chart.to_coords(&q).unwrap();
        let back = chart.to_pmf(&c).unwrap();
        for (a, b) in back.probs().iter().zip(q.probs()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn segment_partition() {
        let g = gens(&[0.64, 0.96, 1.44], 1.02);
        let part = SimplexPartition::from_generators(&g).unwrap();
        assert_eq!(part.simplices.len(), 1);
        let c = part.vertex_coords();
        let length = (c[0][0] - c[1][0]).abs();
        assert!((part.total_volume() - length).abs() < 1e-15);
    }

    #[test]
    fn quadrilateral_partition_matches_shoelace() {
        let g = four_state();
        let part = SimplexPartition::from_generators(&g).unwrap();
        assert_eq!(part.simplices.len(), 2);
        // order the four chart vertices by angle around their centroid
        let mut pts: Vec<Vec<f64>> = part.vertex_coords().to_vec();
        let cx = pts.iter().map(|p| p[0]).sum::<f64>() / 4.0;
        let cy = pts.iter().map(|p| p[1]).sum::<f64>() / 4.0;
        pts.sort_by(|a, b| {
            (a[1] - cy)
                .atan2(a[0] - cx)
                .total_cmp(&(b[1] - cy).atan2(b[0] - cx))
        });
        let shoelace = 0.5
            * (0..4)
                .map(|i| {
                    let (p, q) = (&pts[i], &pts[(i + 1) % 4]);
                    p[0] * q[1] - q[0] * p[1]
                })
                .sum::<f64>()
                .abs();
        assert!((part.total_volume() - shoelace).abs() < 1e-14);
    }

    #[test]
    fn point_partition_samples_copies() {
        let g = gens(&[0.8, 1.2], 1.02);
        let part = SimplexPartition::from_generators(&g).unwrap();
        assert_eq!(part.dim(), 0);
        let batch = sample_uniform(&part, 3, 1).unwrap();
        assert_eq!(batch.count(), 3);
        assert!(batch.iter().all(|p| p == &g.generators[0].pmf));
    }

    #[test]
    fn samples_are_members_and_deterministic() {
        let g = four_state();
        let poly = MeanPolytope::new(g.grid().clone(), 1.02).unwrap();
        let part = SimplexPartition::from_generators(&g).unwrap();
        let a = sample_uniform(&part, 500, 7).unwrap();
        let b = sample_uniform(&part, 500, 7).unwrap();
        assert_eq!(a.pmfs, b.pmfs);
        assert!(a.iter().all(|p| poly.contains(p) && p.has_full_support()));
        let c = sample_uniform(&part, 1, 99).unwrap();
        let c2 = sample_uniform(&part, 1, 99).unwrap();
        assert_eq!(c.pmfs, c2.pmfs);
    }

    #[test]
    fn parallel_sampling_counts() {
        let part = SimplexPartition::from_generators(&four_state()).unwrap();
        let batch = sample_uniform_parallel(&part, 1001, 3, 4).unwrap();
        assert_eq!(batch.count(), 1001);
    }

    #[test]
    fn empirical_cdf_steps() {
        let pmf = Pmf::uniform(SupportGrid::new(vec![0.0, 1.0]).unwrap());
        let batch = SampleBatch::new(vec![pmf; 4], 0);
        let cdf = empirical_cdf(&batch, &[2.0; 4]).unwrap();
        assert_eq!(cdf.eval(1.999), 0.0);
        assert_eq!(cdf.eval(2.0), 1.0);
        assert_eq!(cdf.steps(), vec![(2.0, 1.0)]);
        let cdf = empirical_cdf(&batch, &[3.0, 1.0, 2.0, 1.0]).unwrap();
        assert_eq!(cdf.steps(), vec![(1.0, 0.5), (2.0, 0.75), (3.0, 1.0)]);
        assert!(matches!(
            empirical_cdf(&SampleBatch::new(vec![], 0), &[]),
            Err(Error::EmptyBatch)
        ));
        assert!(empirical_cdf(&batch, &[1.0]).is_err());
    }

    #[test]
    fn batch_table_csv() {
        let g = SupportGrid::new(vec![0.0, 1.0]).unwrap();
        let batch = SampleBatch::new(vec![Pmf::new(g, vec![0.25, 0.75]).unwrap()], 0);
        let mut buf = Vec::new();
        BatchTable::new(&batch)
            .descending()
            .column_f64("entropy", &[f64::INFINITY])
            .column_bool("in_ball", &[true])
            .write(&mut buf)
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "sample_id,q1,q2,entropy,in_ball");
        assert_eq!(
            lines.next().unwrap(),
            "0,7.5000000000000000e-1,2.5000000000000000e-1,inf,1"
        );
    }
}
