//! Spatial layer: homogeneous Poisson sampling on a rectangle, exact
//! k-nearest-station queries, and the user↔station association structure
//! the simulator consumes.
//!
//! Distances are either plain Euclidean (edge users see a truncated
//! neighbourhood, as in a real bounded deployment) or toroidal (both axes
//! wrap; removes edge bias, which the statistical validation tests rely
//! on). All randomness flows from explicit seeds through a counter-based
//! generator, so every sample is bit-reproducible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::ParamError;

/// How distances behave at the rectangle edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    /// Euclidean distances inside the rectangle; no wrapping.
    Plain,
    /// Both axes wrap around.
    Torus,
}

/// The sampling window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub width: f64,
    pub height: f64,
    pub boundary: Boundary,
}

impl Region {
    pub fn new(width: f64, height: f64, boundary: Boundary) -> Result<Self, ParamError> {
        for (name, v) in [("width", width), ("height", height)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ParamError {
                    name,
                    value: v,
                    requirement: "strictly positive and finite",
                });
            }
        }
        Ok(Region {
            width,
            height,
            boundary,
        })
    }

    pub fn square(side: f64, boundary: Boundary) -> Result<Self, ParamError> {
        Self::new(side, side, boundary)
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    /// Squared distance under the region metric.
    pub fn distance_squared(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let mut dx = (a.0 - b.0).abs();
        let mut dy = (a.1 - b.1).abs();
        if self.boundary == Boundary::Torus {
            dx = dx.min(self.width - dx);
            dy = dy.min(self.height - dy);
        }
        dx * dx + dy * dy
    }

    pub fn distance(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        self.distance_squared(a, b).sqrt()
    }

    fn contains(&self, p: (f64, f64)) -> bool {
        (0.0..=self.width).contains(&p.0) && (0.0..=self.height).contains(&p.1)
    }
}

/// A finite set of planar points inside a region.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    coords: Vec<(f64, f64)>,
}

impl PointSet {
    /// Wraps explicit coordinates, verifying they lie inside `region`.
    pub fn from_coords(coords: Vec<(f64, f64)>, region: &Region) -> Result<Self, ParamError> {
        for &p in &coords {
            if !region.contains(p) {
                return Err(ParamError {
                    name: "coords",
                    value: p.0,
                    requirement: "every point inside the region",
                });
            }
        }
        Ok(PointSet { coords })
    }

    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }

    pub fn count(&self) -> usize {
        self.coords.len()
    }

    /// Writes `id,x,y` rows for debugging and plotting.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["id", "x", "y"])?;
        for (i, (x, y)) in self.coords.iter().enumerate() {
            w.write_record(&[i.to_string(), x.to_string(), y.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Samples a homogeneous Poisson point process: the point count is
/// Poisson(intensity × area) and positions are i.i.d. uniform. The same
/// seed always reproduces the same point set.
pub fn sample_ppp(intensity: f64, region: &Region, seed: u64) -> PointSet {
    assert!(
        intensity > 0.0 && intensity.is_finite(),
        "intensity must be positive and finite, got {intensity}"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = intensity * region.area();
    let count = Poisson::new(mean)
        .expect("positive intensity × positive area is a valid Poisson mean")
        .sample(&mut rng) as usize;
    let coords = (0..count)
        .map(|_| {
            (
                rng.gen::<f64>() * region.width,
                rng.gen::<f64>() * region.height,
            )
        })
        .collect();
    PointSet { coords }
}

/// Requested more nearest stations than exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("{requested} nearest stations requested but only {available} present")]
pub struct ShortfallError {
    pub requested: u32,
    pub available: usize,
}

/// Per-user ordered station links plus per-station load counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Association {
    k: u32,
    /// Flat (station_index, distance) pairs, `k` consecutive entries per
    /// user, ascending by distance (ties by station index).
    links: Vec<(u32, f64)>,
    degrees: Vec<u32>,
}

impl Association {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n_users(&self) -> usize {
        if self.k == 0 {
            0
        } else {
            self.links.len() / self.k as usize
        }
    }

    /// The user's links, nearest station first.
    pub fn links(&self, user: usize) -> &[(u32, f64)] {
        let k = self.k as usize;
        &self.links[user * k..(user + 1) * k]
    }

    /// Number of users attached to each station.
    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }
}

/// Candidate ordering: larger distance is "worse", ties broken so the
/// larger station index is worse; the binary heap then evicts exactly the
/// entries the contract says to drop.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    d2: f64,
    idx: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2
            .total_cmp(&other.d2)
            .then(self.idx.cmp(&other.idx))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Uniform-grid spatial index with expanding ring search.
struct GridIndex<'a> {
    region: &'a Region,
    points: &'a [(f64, f64)],
    cells: Vec<Vec<u32>>,
    nx: usize,
    ny: usize,
    cell_w: f64,
    cell_h: f64,
}

impl<'a> GridIndex<'a> {
    fn build(points: &'a [(f64, f64)], region: &'a Region) -> Self {
        // Aim for ~2 points per cell; degenerate (tiny) sets get one cell.
        let target = (points.len() as f64 / 2.0).sqrt().floor() as usize;
        let nx = target.clamp(1, 4096);
        let ny = target.clamp(1, 4096);
        let cell_w = region.width / nx as f64;
        let cell_h = region.height / ny as f64;
        let mut cells = vec![Vec::new(); nx * ny];
        for (i, &(x, y)) in points.iter().enumerate() {
            let cx = ((x / cell_w) as usize).min(nx - 1);
            let cy = ((y / cell_h) as usize).min(ny - 1);
            cells[cy * nx + cx].push(i as u32);
        }
        GridIndex {
            region,
            points,
            cells,
            nx,
            ny,
            cell_w,
            cell_h,
        }
    }

    /// Exact k nearest points to `query`, ascending (distance, index).
    fn nearest(&self, query: (f64, f64), k: usize) -> Vec<(u32, f64)> {
        let torus = self.region.boundary == Boundary::Torus;
        // Wrapped ring enumeration duplicates cells once the ring spans the
        // grid; from there a flat scan is both simpler and exact.
        let max_clean_ring = if torus {
            (self.nx.min(self.ny) - 1) / 2
        } else {
            self.nx.max(self.ny)
        };

        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        let offer = |heap: &mut BinaryHeap<Candidate>, idx: u32| {
            let d2 = self.region.distance_squared(query, self.points[idx as usize]);
            let cand = Candidate { d2, idx };
            if heap.len() < k {
                heap.push(cand);
            } else if cand < *heap.peek().expect("heap holds k entries") {
                heap.pop();
                heap.push(cand);
            }
        };

        let cx = ((query.0 / self.cell_w) as usize).min(self.nx - 1) as isize;
        let cy = ((query.1 / self.cell_h) as usize).min(self.ny - 1) as isize;
        let mut ring: isize = 0;
        loop {
            if ring as usize > max_clean_ring {
                // Fall back to scanning everything exactly once.
                heap.clear();
                for idx in 0..self.points.len() as u32 {
                    offer(&mut heap, idx);
                }
                break;
            }
            for dy in -ring..=ring {
                for dx in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue; // interior of the ring was already scanned
                    }
                    let (ix, iy) = if torus {
                        (
                            (cx + dx).rem_euclid(self.nx as isize) as usize,
                            (cy + dy).rem_euclid(self.ny as isize) as usize,
                        )
                    } else {
                        let ix = cx + dx;
                        let iy = cy + dy;
                        if ix < 0 || iy < 0 || ix >= self.nx as isize || iy >= self.ny as isize {
                            continue;
                        }
                        (ix as usize, iy as usize)
                    };
                    for &idx in &self.cells[iy * self.nx + ix] {
                        offer(&mut heap, idx);
                    }
                }
            }
            // Any unscanned point sits at least `ring` whole cells away; once
            // the current k-th distance beats that strictly, no outside point
            // can enter (strictness keeps index tie-breaks exact).
            let moat = ring as f64 * self.cell_w.min(self.cell_h);
            if heap.len() == k && heap.peek().expect("full heap").d2 < moat * moat {
                break;
            }
            // Plain regions run out of cells; detect full coverage.
            if !torus
                && cx - ring < 0
                && cy - ring < 0
                && cx + ring >= self.nx as isize
                && cy + ring >= self.ny as isize
            {
                break;
            }
            ring += 1;
        }

        heap.into_sorted_vec()
            .into_iter()
            .map(|c| (c.idx, c.d2.sqrt()))
            .collect()
    }
}

fn associate_with<F>(users: &PointSet, bss: &PointSet, k: u32, per_user: F) -> Association
where
    F: Fn((f64, f64)) -> Vec<(u32, f64)> + Sync,
{
    let lists: Vec<Vec<(u32, f64)>> = users
        .coords()
        .par_iter()
        .map(|&u| per_user(u))
        .collect();
    let mut links = Vec::with_capacity(users.count() * k as usize);
    let mut degrees = vec![0u32; bss.count()];
    for list in lists {
        for &(idx, d) in &list {
            degrees[idx as usize] += 1;
            links.push((idx, d));
        }
    }
    Association { k, links, degrees }
}

/// Exact k-nearest-station association under the region metric, grid
/// indexed; ties broken toward the lower station index.
pub fn k_nearest(
    users: &PointSet,
    bss: &PointSet,
    k: u32,
    region: &Region,
) -> Result<Association, ShortfallError> {
    if (bss.count() as u64) < k as u64 || k == 0 {
        return Err(ShortfallError {
            requested: k,
            available: bss.count(),
        });
    }
    let grid = GridIndex::build(bss.coords(), region);
    Ok(associate_with(users, bss, k, |u| {
        grid.nearest(u, k as usize)
    }))
}

/// Reference O(users × stations) scan with the same ordering contract;
/// the oracle the indexed path is validated against.
pub fn k_nearest_brute(
    users: &PointSet,
    bss: &PointSet,
    k: u32,
    region: &Region,
) -> Result<Association, ShortfallError> {
    if (bss.count() as u64) < k as u64 || k == 0 {
        return Err(ShortfallError {
            requested: k,
            available: bss.count(),
        });
    }
    Ok(associate_with(users, bss, k, |u| {
        let mut all: Vec<Candidate> = bss
            .coords()
            .iter()
            .enumerate()
            .map(|(i, &b)| Candidate {
                d2: region.distance_squared(u, b),
                idx: i as u32,
            })
            .collect();
        all.sort_unstable();
        all.truncate(k as usize);
        all.into_iter().map(|c| (c.idx, c.d2.sqrt())).collect()
    }))
}

/// Empirical CDF of the rank-j link distance: sorted (r, P̂(R_j ≤ r))
/// sample points, one per user.
pub fn empirical_distance_cdf(assoc: &Association, j: u32) -> Vec<(f64, f64)> {
    assert!(
        j >= 1 && j <= assoc.k(),
        "rank j must satisfy 1 ≤ j ≤ k = {}, got {j}",
        assoc.k()
    );
    let n = assoc.n_users();
    let mut distances: Vec<f64> = (0..n)
        .map(|u| assoc.links(u)[(j - 1) as usize].1)
        .collect();
    distances.sort_unstable_by(f64::total_cmp);
    distances
        .into_iter()
        .enumerate()
        .map(|(i, r)| (r, (i + 1) as f64 / n as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::upper_incomplete_gamma;

    fn plain(side: f64) -> Region {
        Region::square(side, Boundary::Plain).unwrap()
    }

    fn torus(side: f64) -> Region {
        Region::square(side, Boundary::Torus).unwrap()
    }

    #[test]
    fn region_validation_and_area() {
        assert!(Region::new(0.0, 10.0, Boundary::Plain).is_err());
        assert!(Region::new(10.0, -1.0, Boundary::Plain).is_err());
        assert!(Region::new(f64::NAN, 10.0, Boundary::Plain).is_err());
        assert_eq!(plain(1500.0).area(), 2_250_000.0);
    }

    #[test]
    fn torus_metric_wraps_both_axes() {
        let r = torus(10.0);
        assert!((r.distance((0.0, 0.0), (9.0, 0.0)) - 1.0).abs() < 1e-12);
        let diag = r.distance((0.5, 0.5), (9.5, 9.5));
        assert!((diag - 2f64.sqrt()).abs() < 1e-12);
        let p = plain(10.0);
        assert!((p.distance((0.0, 0.0), (9.0, 0.0)) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn point_set_rejects_points_outside_region() {
        let r = plain(10.0);
        assert!(PointSet::from_coords(vec![(1.0, 1.0), (11.0, 5.0)], &r).is_err());
        assert!(PointSet::from_coords(vec![(0.0, 10.0)], &r).is_ok());
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let r = plain(100.0);
        let a = sample_ppp(0.05, &r, 42);
        let b = sample_ppp(0.05, &r, 42);
        assert_eq!(a, b);
        let c = sample_ppp(0.05, &r, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn samples_fall_inside_the_region() {
        let r = plain(200.0);
        let s = sample_ppp(0.1, &r, 7);
        assert!(s.count() > 3000, "expected ≈4000 points, got {}", s.count());
        for &(x, y) in s.coords() {
            assert!((0.0..=200.0).contains(&x) && (0.0..=200.0).contains(&y));
        }
    }

    #[test]
    fn poisson_counts_have_the_right_mean() {
        // 1000 seeds; sample mean of counts within 3σ of intensity × area.
        let r = plain(30.0);
        let intensity = 1.0;
        let mean_expected = intensity * r.area();
        let n = 1000;
        let total: f64 = (0..n)
            .map(|seed| sample_ppp(intensity, &r, seed as u64).count() as f64)
            .sum();
        let mean = total / n as f64;
        let sigma_mean = (mean_expected / n as f64).sqrt();
        assert!(
            (mean - mean_expected).abs() < 3.0 * sigma_mean,
            "mean count {mean} vs {mean_expected} ± {sigma_mean}"
        );
    }

    #[test]
    fn nearest_links_are_ordered_and_exact() {
        let r = plain(10.0);
        let users = PointSet::from_coords(vec![(0.0, 0.0)], &r).unwrap();
        let bss =
            PointSet::from_coords(vec![(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)], &r).unwrap();
        let assoc = k_nearest(&users, &bss, 2, &r).unwrap();
        assert_eq!(assoc.links(0)[0].0, 0);
        assert!((assoc.links(0)[0].1 - 1.0).abs() < 1e-12);
        assert_eq!(assoc.links(0)[1].0, 1);
        assert!((assoc.links(0)[1].1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn wraparound_station_is_one_metre_away() {
        let r = torus(10.0);
        let users = PointSet::from_coords(vec![(0.0, 0.0)], &r).unwrap();
        let bss = PointSet::from_coords(vec![(9.0, 0.0)], &r).unwrap();
        let assoc = k_nearest(&users, &bss, 1, &r).unwrap();
        assert!((assoc.links(0)[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equidistant_stations_resolve_to_lower_index() {
        let r = plain(4.0);
        let users = PointSet::from_coords(vec![(0.0, 0.0)], &r).unwrap();
        let bss =
            PointSet::from_coords(vec![(0.0, 1.0), (1.0, 0.0), (2.0, 2.0)], &r).unwrap();
        let assoc = k_nearest(&users, &bss, 2, &r).unwrap();
        assert_eq!(assoc.links(0)[0].0, 0, "tie must pick the lower index");
        assert_eq!(assoc.links(0)[1].0, 1);
    }

    #[test]
    fn shortfall_is_reported() {
        let r = plain(10.0);
        let users = PointSet::from_coords(vec![(5.0, 5.0)], &r).unwrap();
        let bss = PointSet::from_coords(vec![(1.0, 1.0)], &r).unwrap();
        let err = k_nearest(&users, &bss, 3, &r).unwrap_err();
        assert_eq!(err.requested, 3);
        assert_eq!(err.available, 1);
        assert!(err.to_string().contains("only 1 present"));
    }

    #[test]
    fn indexed_matches_brute_force_on_random_instances() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for case in 0..200 {
            let side = rng.gen_range(5.0..200.0);
            let boundary = if rng.gen_bool(0.5) {
                Boundary::Plain
            } else {
                Boundary::Torus
            };
            let region = Region::square(side, boundary).unwrap();
            let k = rng.gen_range(1..=5u32);
            let n_users = rng.gen_range(1..=200usize);
            let n_bss = rng.gen_range(k as usize..=100usize.max(k as usize));
            let mk = |n: usize, rng: &mut ChaCha8Rng| {
                PointSet::from_coords(
                    (0..n)
                        .map(|_| (rng.gen::<f64>() * side, rng.gen::<f64>() * side))
                        .collect(),
                    &region,
                )
                .unwrap()
            };
            let users = mk(n_users, &mut rng);
            let bss = mk(n_bss, &mut rng);
            let fast = k_nearest(&users, &bss, k, &region).unwrap();
            let slow = k_nearest_brute(&users, &bss, k, &region).unwrap();
            assert_eq!(fast, slow, "case {case}: {boundary:?} side {side} k {k}");
        }
    }

    #[test]
    fn degrees_account_for_every_link() {
        let r = plain(300.0);
        let users = sample_ppp(0.05, &r, 11);
        let bss = sample_ppp(0.01, &r, 12);
        let assoc = k_nearest(&users, &bss, 3, &r).unwrap();
        let total: u64 = assoc.degrees().iter().map(|&d| d as u64).sum();
        assert_eq!(total, 3 * users.count() as u64);
        assert_eq!(assoc.n_users(), users.count());
    }

    #[test]
    fn single_user_cdf_is_one_step() {
        let r = plain(10.0);
        let users = PointSet::from_coords(vec![(5.0, 5.0)], &r).unwrap();
        let bss = PointSet::from_coords(vec![(5.0, 6.0)], &r).unwrap();
        let assoc = k_nearest(&users, &bss, 1, &r).unwrap();
        let cdf = empirical_distance_cdf(&assoc, 1);
        assert_eq!(cdf.len(), 1);
        assert!((cdf[0].0 - 1.0).abs() < 1e-12);
        assert_eq!(cdf[0].1, 1.0);
    }

    /// Kolmogorov–Smirnov distance between an empirical CDF sample and a
    /// reference CDF.
    fn ks_stat(cdf: &[(f64, f64)], reference: impl Fn(f64) -> f64) -> f64 {
        let n = cdf.len() as f64;
        let mut worst = 0.0f64;
        for (i, &(r, p)) in cdf.iter().enumerate() {
            let f = reference(r);
            worst = worst.max((f - i as f64 / n).abs()).max((p - f).abs());
        }
        worst
    }

    #[test]
    fn rank_distances_follow_the_gamma_tail_law() {
        // ~10⁵ users on a torus; each rank-j empirical CDF must sit within
        // the 1% Kolmogorov–Smirnov band of 1 − Γ(j, λπr²)/Γ(j).
        let region = torus(1000.0);
        let lambda_bs = 1e-2;
        let users = sample_ppp(0.1, &region, 501);
        let bss = sample_ppp(lambda_bs, &region, 502);
        let assoc = k_nearest(&users, &bss, 3, &region).unwrap();
        let lam_pi = lambda_bs * std::f64::consts::PI;
        for j in 1..=3u32 {
            let cdf = empirical_distance_cdf(&assoc, j);
            let n = cdf.len() as f64;
            let stat = ks_stat(&cdf, |r| {
                1.0 - upper_incomplete_gamma(j as f64, lam_pi * r * r)
                    .expect("positive arguments")
                    / crate::specialfn::gamma(j as f64).expect("positive order")
            });
            let critical = 1.628 / n.sqrt();
            assert!(
                stat < critical,
                "j={j}: KS statistic {stat:.5} ≥ 1% critical {critical:.5}"
            );
        }
    }

    #[test]
    fn csv_export_has_id_x_y_rows() {
        let r = plain(10.0);
        let s = PointSet::from_coords(vec![(1.5, 2.5), (3.0, 4.0)], &r).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("id,x,y"));
        assert_eq!(lines.next(), Some("0,1.5,2.5"));
        assert_eq!(lines.next(), Some("1,3,4"));
    }
}
