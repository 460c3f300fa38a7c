//! Grid scans and constrained minimization of the tangential curvature of
//! the restricted three-body energy surface in Levi-Civita coordinates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{tangential_curvature, DerivativeMode, Restricted};
use crate::error::{Error, Result};
use crate::hamiltonians::RestrictedProblem;
use crate::linalg::{Vec2, Vec4};
use crate::projections::ComplexPair;
use crate::scalar::Real;
use crate::simplex::{nelder_mead, SimplexOptions};

/// Width of the rdHP histogram bins.
pub const BIN_WIDTH: f64 = 0.01;
const BIN_COUNT: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample<T> {
    pub point: Vec4<T>,
    pub q: Vec2<T>,
    pub energy: T,
    pub rdhp: T,
    pub curvature: T,
}

/// Evaluates energy, rdHP and curvature at one point of `(w, z)`-space.
pub fn sample_at<T: Real>(
    problem: &RestrictedProblem<T>,
    point: &Vec4<T>,
    mode: DerivativeMode,
) -> Result<CurvatureSample<T>> {
    let chain = problem.eval_hx(&ComplexPair::from_array(*point))?;
    let c = tangential_curvature(&Restricted(*problem), point, mode)?;
    Ok(CurvatureSample {
        point: *point,
        q: chain.q,
        energy: chain.energy,
        rdhp: chain.rdhp,
        curvature: c.curvature,
    })
}

/// Per-bin minimum over `(lo, hi]` in rdHP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanBin<T> {
    pub lo: T,
    pub hi: T,
    pub count: usize,
    pub min_curvature: Option<T>,
    pub argmin: Option<Vec4<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport<T> {
    pub mu: T,
    pub c_cap: T,
    pub evaluated: usize,
    /// Points skipped because the chain or a curvature probe failed.
    pub chain_errors: usize,
    pub retained: usize,
    pub bins: Vec<ScanBin<T>>,
    pub negatives: Vec<CurvatureSample<T>>,
}

/// Grid parameters for [`grid_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    pub extent: T,
    pub n_per_axis: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn axis(&self) -> Vec<T> {
        let n = self.n_per_axis;
        let span = T::two() * self.extent;
        (0..n)
            .map(|k| -self.extent + span * T::from_usize(k).unwrap() / T::from_usize(n - 1).unwrap())
            .collect()
    }
}

fn bin_index<T: Real>(rdhp: T) -> usize {
    let k = (rdhp / T::lit(BIN_WIDTH)).ceil().to_usize().unwrap_or(0);
    k.saturating_sub(1).min(BIN_COUNT - 1)
}

/// Retained samples of a full grid scan, in grid order, plus counts of
/// evaluated points and chain failures.
pub struct ScanSamples<T> {
    pub samples: Vec<CurvatureSample<T>>,
    pub evaluated: usize,
    pub chain_errors: usize,
}

/// Evaluates every point of `[−extent, extent]⁴` and keeps those with
/// `energy ≤ c_cap` and `rdHP ≤ 1`.
pub fn grid_samples<T: Real>(
    problem: &RestrictedProblem<T>,
    c_cap: T,
    grid: &GridSpec<T>,
    mode: DerivativeMode,
) -> Result<ScanSamples<T>> {
    if !(grid.extent > T::zero()) || grid.n_per_axis < 3 {
        return Err(Error::InvalidArgument("grid needs extent > 0 and at least 3 points per axis"));
    }
    let axis = grid.axis();
    let n = axis.len();
    // one slab per (w1, w2) pair; slabs are merged in index order
    let slabs: Vec<(Vec<CurvatureSample<T>>, usize)> = (0..n * n)
        .into_par_iter()
        .map(|ab| {
            let (a, b) = (ab / n, ab % n);
            let mut kept = Vec::new();
            let mut errors = 0;
            for &z1 in &axis {
                for &z2 in &axis {
                    let point = [axis[a], axis[b], z1, z2];
                    let chain = match problem.eval_hx(&ComplexPair::from_array(point)) {
                        Ok(c) => c,
                        Err(_) => {
                            errors += 1;
                            continue;
                        }
                    };
                    if !(chain.energy <= c_cap && chain.rdhp <= T::one()) {
                        continue;
                    }
                    match tangential_curvature(&Restricted(*problem), &point, mode) {
                        Ok(c) => kept.push(CurvatureSample {
                            point,
                            q: chain.q,
                            energy: chain.energy,
                            rdhp: chain.rdhp,
                            curvature: c.curvature,
                        }),
                        Err(_) => errors += 1,
                    }
                }
            }
            (kept, errors)
        })
        .collect();

    let chain_errors = slabs.iter().map(|s| s.1).sum();
    let samples = slabs.into_iter().flat_map(|s| s.0).collect();
    Ok(ScanSamples { samples, evaluated: n.pow(4), chain_errors })
}

impl<T: Real> ScanReport<T> {
    /// Bins retained samples by rdHP and collects the non-positive ones.
    pub fn from_samples(mu: T, c_cap: T, scan: &ScanSamples<T>) -> Self {
        let width = T::lit(BIN_WIDTH);
        let mut bins: Vec<ScanBin<T>> = (0..BIN_COUNT)
            .map(|k| ScanBin {
                lo: width * T::from_usize(k).unwrap(),
                hi: width * T::from_usize(k + 1).unwrap(),
                count: 0,
                min_curvature: None,
                argmin: None,
            })
            .collect();
        let mut negatives = Vec::new();
        for s in &scan.samples {
            let bin = &mut bins[bin_index(s.rdhp)];
            bin.count += 1;
            // strict comparison keeps the first minimum in grid order
            if bin.min_curvature.map_or(true, |m| s.curvature < m) {
                bin.min_curvature = Some(s.curvature);
                bin.argmin = Some(s.point);
            }
            if !(s.curvature > T::zero()) {
                negatives.push(*s);
            }
        }
        Self {
            mu,
            c_cap,
            evaluated: scan.evaluated,
            chain_errors: scan.chain_errors,
            retained: scan.samples.len(),
            bins,
            negatives,
        }
    }

    /// Smallest retained non-positive curvature with rdHP inside `(lo, hi)`.
    pub fn negatives_between(&self, lo: T, hi: T) -> impl Iterator<Item = &CurvatureSample<T>> {
        self.negatives.iter().filter(move |s| s.rdhp > lo && s.rdhp < hi)
    }
}

/// Runs [`grid_samples`] and summarizes the result.
pub fn grid_scan<T: Real>(
    problem: &RestrictedProblem<T>,
    c_cap: T,
    grid: &GridSpec<T>,
    mode: DerivativeMode,
) -> Result<ScanReport<T>> {
    let scan = grid_samples(problem, c_cap, grid, mode)?;
    Ok(ScanReport::from_samples(problem.mu.value(), c_cap, &scan))
}

/// Lower edge of the rdHP range above which every non-empty bin has a
/// positive minimum.
pub fn threshold_estimate<T: Real>(report: &ScanReport<T>) -> Result<T> {
    let filled: Vec<&ScanBin<T>> = report.bins.iter().filter(|b| b.count > 0).collect();
    let top = filled
        .last()
        .ok_or(Error::InvalidArgument("report has no populated bins"))?;
    let bad = |b: &&ScanBin<T>| !(b.min_curvature.unwrap() > T::zero());
    match filled.iter().rposition(bad) {
        None => Ok(T::zero()),
        Some(k) if std::ptr::eq(filled[k], *top) => Err(Error::AllNegative),
        Some(k) => Ok(filled[k].hi),
    }
}

/// Constraint set of the minimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraints<T> {
    pub c_cap: T,
    /// Optional lower bound on rdHP, keeping runs out of the collision
    /// neighbourhood.
    pub rdhp_floor: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimizeResult<T> {
    pub start: Vec4<T>,
    pub point: Vec4<T>,
    pub curvature: T,
    pub energy: T,
    pub rdhp: T,
    pub converged: bool,
    pub evaluations: usize,
    /// `max(0, energy − c_cap)`
    pub energy_violation: T,
    /// `max(0, rdHP − 1)` plus any floor violation.
    pub rdhp_violation: T,
}

fn violations<T: Real>(energy: T, rdhp: T, cons: &Constraints<T>) -> (T, T) {
    let zero = T::zero();
    let over = (energy - cons.c_cap).max(zero);
    let far = (rdhp - T::one()).max(zero);
    let near = cons.rdhp_floor.map_or(zero, |f| (f - rdhp).max(zero));
    (over, far + near)
}

/// Constraint violations beyond this are rejected outright in the first
/// penalty stage; the band shrinks by `sqrt(10)` per stage. The curvature is
/// unbounded below near both primaries, which no finite weight can dominate.
pub const PENALTY_BAND: f64 = 0.05;

/// Locally minimizes the curvature subject to `energy ≤ c_cap`,
/// `rdHP ≤ 1` (and the optional floor) with a quadratic exterior penalty
/// whose weight grows from 1e2 to 1e8.
pub fn constrained_minimize<T: Real>(
    problem: &RestrictedProblem<T>,
    cons: &Constraints<T>,
    start: &Vec4<T>,
    mode: DerivativeMode,
) -> Result<MinimizeResult<T>> {
    let first = sample_at(problem, start, mode).map_err(|_| Error::InfeasibleStart)?;
    let (e0, r0) = violations(first.energy, first.rdhp, cons);
    if e0 > T::zero() || r0 > T::zero() {
        return Err(Error::InfeasibleStart);
    }

    let mut point = *start;
    let mut evaluations = 0;
    let mut converged = false;
    let mut weight = T::lit(1e2);
    let mut step = T::lit(0.02);
    let mut band = T::lit(PENALTY_BAND);
    // best strictly feasible point seen, used to restart a stage whose
    // previous end point lies outside the tightened band
    let best = std::cell::Cell::new((first.curvature, *start));
    let shrink = T::lit(10.0).sqrt();
    while weight <= T::lit(1e8) * T::lit(1.0 + 1e-9) {
        let (w, b) = (weight, band);
        let objective = |x: &Vec4<T>| match sample_at(problem, x, mode) {
            Ok(s) => {
                let (e, r) = violations(s.energy, s.rdhp, cons);
                if e.max(r) > b {
                    return T::infinity();
                }
                if e.max(r) == T::zero() && s.curvature < best.get().0 {
                    best.set((s.curvature, *x));
                }
                s.curvature + w * (e * e + r * r)
            }
            Err(_) => T::infinity(),
        };
        if !objective(&point).is_finite() {
            point = best.get().1;
        }
        let opts = SimplexOptions { initial_step: step, ..SimplexOptions::default() };
        let r = nelder_mead(objective, point, &opts);
        point = r.point;
        evaluations += r.evaluations;
        converged = r.converged;
        weight = weight * T::lit(10.0);
        band = band / shrink;
        step = T::lit(1e-3);
    }

    let s = sample_at(problem, &point, mode)?;
    let (energy_violation, rdhp_violation) = violations(s.energy, s.rdhp, cons);
    Ok(MinimizeResult {
        start: *start,
        point,
        curvature: s.curvature,
        energy: s.energy,
        rdhp: s.rdhp,
        converged,
        evaluations,
        energy_violation,
        rdhp_violation,
    })
}

/// The `count` lowest-curvature samples with rdHP above `rdhp_min`.
pub fn worst_samples<T: Real>(
    samples: &[CurvatureSample<T>],
    rdhp_min: T,
    count: usize,
) -> Vec<CurvatureSample<T>> {
    let mut pool: Vec<CurvatureSample<T>> = samples.iter().filter(|s| s.rdhp > rdhp_min).copied().collect();
    pool.sort_by(|a, b| a.curvature.partial_cmp(&b.curvature).unwrap_or(std::cmp::Ordering::Equal));
    pool.truncate(count);
    pool
}
