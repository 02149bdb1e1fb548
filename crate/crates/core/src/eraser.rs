//! Probe frequency and dispersive shift that satisfy the parity eraser
//! conditions `θ_{wt i}(ω_p) = θ_{wt i+2}(ω_p) + 2π`.
//!
//! The search scores a coarse `(ω_p, χ)` grid in parallel, then polishes the
//! best local minima with damped Gauss-Newton on the residual vector. Phases
//! come from [`DevicePhases`], whose curves share one unwrapping anchor, so a
//! residual is a plain difference of unwrapped values and roots offset by
//! `±2π` never alias onto each other.

use std::f64::consts::{FRAC_PI_4, TAU};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{Band, DevicePhases, Parity, ParityDevice, QubitState, ReflectionPhase};
use crate::error::{Error, Result};
use crate::units::{hz_to_rad, wrap_phase, AngularFrequency};

/// Smallest residual tolerance the solver accepts, rad.
pub const MIN_TOL: f64 = 1e-9;

/// A grid cell must bring the residual norm below this to seed refinement, rad.
pub const SEED_NORM_LIMIT: f64 = 1.0;

/// `|Δθ|` below this is reported as low contrast.
pub const LOW_CONTRAST: f64 = FRAC_PI_4;

/// Weight pairs constrained by the eraser conditions: the even chain
/// `(0,2), (2,4), …` followed by the odd chain `(1,3), (3,5), …`.
pub fn residual_pairs(n: usize) -> Vec<(usize, usize)> {
    let chain = |start: usize| {
        (start..)
            .step_by(2)
            .take_while(move |&i| i + 2 <= n)
            .map(|i| (i, i + 2))
    };
    chain(0).chain(chain(1)).collect()
}

/// Unwrapped phase of each Hamming weight `0..=n` at `omega`.
pub fn weight_phases<P: ReflectionPhase + ?Sized>(phases: &P, omega: f64) -> Result<Vec<f64>> {
    (0..=phases.qubits())
        .map(|w| phases.theta_weight(w, omega))
        .collect()
}

/// `θ_i − θ_{i+2} − 2π` for every pair from [`residual_pairs`].
pub fn residuals_from_phases(theta: &[f64]) -> Vec<f64> {
    let n = theta.len().saturating_sub(1);
    residual_pairs(n)
        .into_iter()
        .map(|(i, j)| theta[i] - theta[j] - TAU)
        .collect()
}

/// Eraser residuals of `dev` at `omega`, one per constrained weight pair.
///
/// Weights are represented by [`QubitState::with_weight`]; under equal shifts
/// every state of that weight gives the same value.
pub fn eraser_residuals(dev: &ParityDevice, omega: AngularFrequency) -> Result<Vec<f64>> {
    let band = dev.band();
    if !band.contains(omega.value()) {
        return Err(Error::OutOfBand {
            omega: omega.value(),
            lo: band.lo.value(),
            hi: band.hi.value(),
        });
    }
    let states = (0..=dev.qubits())
        .map(|w| QubitState::with_weight(dev.qubits(), w))
        .collect::<Result<Vec<_>>>()?;
    let phases = DevicePhases::for_states(dev, &states)?;
    Ok(residuals_from_phases(&weight_phases(
        &phases,
        omega.value(),
    )?))
}

/// Which device parameters the solver may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FreeParameters {
    /// `ω_p` and the common `χ`.
    #[default]
    Chi,
    /// `ω_p`, `χ` and the spacing of the mode frequencies about their centre.
    ChiAndModes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchOptions {
    /// Grid points along `ω_p`.
    pub omega_points: usize,
    /// Logarithmic grid points along `χ`.
    pub chi_points: usize,
    /// `χ` search range in rad/s.
    pub chi_min: f64,
    pub chi_max: f64,
    /// Residual tolerance in rad.
    pub tol: f64,
    pub max_iterations: usize,
    /// Local grid minima refined per search.
    pub max_seeds: usize,
    /// Spacing scale factors tried for the mode-spacing scan.
    pub spacing_points: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            omega_points: 65,
            chi_points: 65,
            chi_min: hz_to_rad(0.1e6),
            chi_max: hz_to_rad(50e6),
            tol: MIN_TOL,
            max_iterations: 80,
            max_seeds: 8,
            spacing_points: 17,
        }
    }
}

impl SearchOptions {
    /// Restrict the `χ` search to `[χ/3, 3χ]` around a known value.
    pub fn around_chi(mut self, chi: f64) -> Self {
        self.chi_min = chi / 3.0;
        self.chi_max = chi * 3.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol >= MIN_TOL && self.tol.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "solver tolerance must be ≥ {MIN_TOL:e} rad, got {}",
                self.tol
            )));
        }
        if self.omega_points < 3 || self.chi_points < 3 {
            return Err(Error::InvalidInput(
                "search grid needs at least 3×3 cells".into(),
            ));
        }
        if !(self.chi_min > 0.0 && self.chi_max > self.chi_min && self.chi_max.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "χ search range [{}, {}] rad/s is invalid",
                self.chi_min, self.chi_max
            )));
        }
        if self.max_iterations == 0 || self.max_seeds == 0 || self.spacing_points == 0 {
            return Err(Error::InvalidInput(
                "iteration and seed counts must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One distinct root reached from the grid seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basin {
    pub omega_p: f64,
    pub chi: f64,
    pub mode_omegas: Vec<f64>,
    pub delta_theta: f64,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EraserSolution {
    pub qubits: usize,
    pub omega_p: AngularFrequency,
    /// Common dispersive shift, rad/s.
    pub chi: f64,
    /// Mode frequencies of the solved device, rad/s.
    pub mode_omegas: Vec<f64>,
    /// Unwrapped `θ` for weights `0..=n` at `ω_p`.
    pub theta_by_weight: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `wrap(θ_even − θ_odd)`.
    pub delta_theta: f64,
    /// Largest same-parity first-derivative mismatch, s.
    pub dispersion_b: f64,
    /// Largest same-parity second-derivative mismatch, s².
    pub dispersion_b2: f64,
    pub low_contrast: bool,
    pub tolerance: f64,
    pub basins: Vec<Basin>,
}

impl EraserSolution {
    /// The template device with the solved `χ` and mode frequencies.
    pub fn device(&self, template: &ParityDevice) -> Result<ParityDevice> {
        template
            .with_equal_chi(self.chi)?
            .with_mode_frequencies(&self.mode_omegas)
    }

    pub fn residual_norm(&self) -> f64 {
        self.residuals.iter().map(|r| r * r).sum::<f64>().sqrt()
    }
}

/// `Δθ` of a solution; errors if the parities are indistinguishable.
pub fn contrast(sol: &EraserSolution) -> Result<f64> {
    contrast_from_phases(&sol.theta_by_weight)
}

fn contrast_from_phases(theta: &[f64]) -> Result<f64> {
    if theta.len() < 2 {
        return Err(Error::InvalidInput("contrast needs weights 0 and 1".into()));
    }
    let d = wrap_phase(theta[0] - theta[1]);
    if d.abs() < 1e-12 {
        Err(Error::EraserDegenerate)
    } else {
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionEntry {
    pub parity: Parity,
    pub weights: (usize, usize),
    /// `θ'_i − θ'_j`, s.
    pub b: f64,
    /// `θ''_i − θ''_j`, s².
    pub b2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionReport {
    pub entries: Vec<DispersionEntry>,
}

impl DispersionReport {
    pub fn max_b(&self) -> f64 {
        self.entries.iter().fold(0.0, |a, e| a.max(e.b.abs()))
    }

    pub fn max_b2(&self) -> f64 {
        self.entries.iter().fold(0.0, |a, e| a.max(e.b2.abs()))
    }

    pub fn pair(&self, i: usize, j: usize) -> Option<&DispersionEntry> {
        self.entries.iter().find(|e| e.weights == (i, j))
    }
}

/// Same-parity weight pairs `(i, j)`, `i < j`, even pairs first.
pub fn same_parity_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for start in [0, 1] {
        for i in (start..=n).step_by(2) {
            for j in ((i + 2)..=n).step_by(2) {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// First and second derivative mismatches between all same-parity weights at `omega`.
pub fn dispersion_at<P: ReflectionPhase + ?Sized>(
    phases: &P,
    omega: f64,
) -> Result<DispersionReport> {
    let n = phases.qubits();
    let mut d1 = Vec::with_capacity(n + 1);
    let mut d2 = Vec::with_capacity(n + 1);
    for w in 0..=n {
        let s = QubitState::with_weight(n, w)?;
        d1.push(phases.theta_derivative(&s, omega, 1)?);
        d2.push(phases.theta_derivative(&s, omega, 2)?);
    }
    let entries = same_parity_pairs(n)
        .into_iter()
        .map(|(i, j)| DispersionEntry {
            parity: Parity::of_weight(i),
            weights: (i, j),
            b: d1[i] - d1[j],
            b2: d2[i] - d2[j],
        })
        .collect();
    Ok(DispersionReport { entries })
}

/// Dispersion mismatches of the solved device at its probe frequency.
pub fn dispersion_report(
    template: &ParityDevice,
    sol: &EraserSolution,
) -> Result<DispersionReport> {
    let dev = sol.device(template)?;
    dispersion_at(&DevicePhases::new(&dev)?, sol.omega_p.value())
}

/// Solves the eraser conditions for an equal-shift device.
///
/// `search_band` must lie inside the template's analysis band.
pub fn solve_eraser(
    template: &ParityDevice,
    free: FreeParameters,
    search_band: Band,
    opts: &SearchOptions,
) -> Result<EraserSolution> {
    opts.validate()?;
    if !template.is_equal_chi() {
        return Err(Error::InvalidInput(
            "the eraser search requires a device with equal dispersive shifts".into(),
        ));
    }
    let n = template.qubits();
    let required = ParityDevice::required_modes(n);
    if template.modes().len() < required {
        return Err(Error::WindingInfeasible {
            qubits: n,
            modes: template.modes().len(),
            required,
        });
    }
    let band = template.band();
    if search_band.lo < band.lo || search_band.hi > band.hi {
        return Err(Error::InvalidInput(format!(
            "search band [{}, {}] must lie inside the analysis band [{}, {}]",
            search_band.lo, search_band.hi, band.lo, band.hi
        )));
    }

    let problem = Problem::new(template, search_band);
    let mut candidates = match free {
        FreeParameters::Chi => problem.search_chi(&problem.template_modes(), opts)?,
        FreeParameters::ChiAndModes => problem.search_with_modes(opts)?,
    };
    problem.finish(&mut candidates, opts)
}

/// Parameter vector: `[ω_p, χ]` followed by optional spacing scales.
#[derive(Debug, Clone)]
struct Point {
    x: Vec<f64>,
    residuals: Vec<f64>,
    norm: f64,
}

struct Problem<'a> {
    template: &'a ParityDevice,
    search: Band,
    centre: f64,
    /// Template mode offsets from `centre`.
    offsets: Vec<f64>,
}

impl<'a> Problem<'a> {
    fn new(template: &'a ParityDevice, search: Band) -> Self {
        let omegas: Vec<f64> = template.modes().iter().map(|m| m.omega.value()).collect();
        let centre = omegas.iter().sum::<f64>() / omegas.len() as f64;
        let offsets = omegas.iter().map(|w| w - centre).collect();
        Self {
            template,
            search,
            centre,
            offsets,
        }
    }

    fn template_modes(&self) -> Vec<f64> {
        self.modes_for(&[])
    }

    /// Mode frequencies for spacing scales: none (template), one (symmetric)
    /// or two (lower and upper halves scaled separately).
    fn modes_for(&self, scales: &[f64]) -> Vec<f64> {
        self.offsets
            .iter()
            .map(|&d| {
                let s = match scales {
                    [] => 1.0,
                    [s] => *s,
                    [lo, hi, ..] => {
                        if d < 0.0 {
                            *lo
                        } else {
                            *hi
                        }
                    }
                };
                self.centre + s * d
            })
            .collect()
    }

    fn device(&self, chi: f64, modes: &[f64]) -> Result<ParityDevice> {
        self.template
            .with_equal_chi(chi)?
            .with_mode_frequencies(modes)
    }

    fn phases(&self, chi: f64, modes: &[f64]) -> Result<DevicePhases> {
        DevicePhases::new(&self.device(chi, modes)?)
    }

    /// Residuals at `x = [ω_p, χ, scales…]`.
    fn residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (omega, chi) = (x[0], x[1]);
        if !self.search.contains(omega) {
            return Err(Error::OutOfBand {
                omega,
                lo: self.search.lo.value(),
                hi: self.search.hi.value(),
            });
        }
        let modes = self.modes_for(&x[2..]);
        let phases = self.phases(chi, &modes)?;
        Ok(residuals_from_phases(&weight_phases(&phases, omega)?))
    }

    fn point(&self, x: Vec<f64>) -> Result<Point> {
        let residuals = self.residuals(&x)?;
        let norm = norm(&residuals);
        Ok(Point { x, residuals, norm })
    }

    fn omega_grid(&self, points: usize) -> Vec<f64> {
        let (lo, hi) = (self.search.lo.value(), self.search.hi.value());
        (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect()
    }

    fn chi_grid(opts: &SearchOptions) -> Vec<f64> {
        let (a, b) = (opts.chi_min.ln(), opts.chi_max.ln());
        let k = opts.chi_points;
        (0..k)
            .map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp())
            .collect()
    }

    /// Residual norms on the `(χ, ω_p)` grid; unevaluable cells are `+∞`.
    fn score_grid(&self, modes: &[f64], omegas: &[f64], chis: &[f64]) -> Vec<Vec<f64>> {
        chis.par_iter()
            .map(|&chi| match self.phases(chi, modes) {
                Ok(phases) => omegas
                    .iter()
                    .map(|&w| {
                        weight_phases(&phases, w)
                            .map(|t| norm(&residuals_from_phases(&t)))
                            .unwrap_or(f64::INFINITY)
                    })
                    .collect(),
                Err(_) => vec![f64::INFINITY; omegas.len()],
            })
            .collect()
    }

    /// Grid search plus refinement with the mode frequencies held at `modes`.
    fn search_chi(&self, modes: &[f64], opts: &SearchOptions) -> Result<Vec<Point>> {
        self.search_chi_scaled(modes, &[], opts)
    }

    fn search_chi_scaled(
        &self,
        modes: &[f64],
        scales: &[f64],
        opts: &SearchOptions,
    ) -> Result<Vec<Point>> {
        let omegas = self.omega_grid(opts.omega_points);
        let chis = Self::chi_grid(opts);
        let scores = self.score_grid(modes, &omegas, &chis);
        let n = self.template.qubits();

        if residual_pairs(n).is_empty() {
            return self.best_contrast_cell(modes, &omegas, &chis, scales);
        }

        let seeds = local_minima(&scores, opts.max_seeds);
        if seeds.is_empty() {
            let (ci, wi, best) = argmin(&scores);
            return Err(Error::NoSolution {
                best_f_hz: omegas[wi] / TAU,
                best_chi_hz: chis[ci] / TAU,
                best_norm: best,
            });
        }

        let mut found = Vec::new();
        for (ci, wi) in seeds {
            let mut x = vec![omegas[wi], chis[ci]];
            x.extend_from_slice(scales);
            if let Ok(p) = self.point(x) {
                // Holding the spacing fixed, only ω_p and χ move.
                found.push(self.newton(p, 2, opts));
            }
        }
        Ok(found)
    }

    /// Single-qubit devices carry no constraint; take the grid cell with the largest contrast.
    fn best_contrast_cell(
        &self,
        modes: &[f64],
        omegas: &[f64],
        chis: &[f64],
        scales: &[f64],
    ) -> Result<Vec<Point>> {
        let rows: Vec<(f64, usize, usize)> = chis
            .par_iter()
            .enumerate()
            .map(|(ci, &chi)| {
                let mut best = (f64::NEG_INFINITY, ci, 0);
                if let Ok(phases) = self.phases(chi, modes) {
                    for (wi, &w) in omegas.iter().enumerate() {
                        if let Ok(t) = weight_phases(&phases, w) {
                            let q = (0.5 * wrap_phase(t[0] - t[1])).sin().abs();
                            if q > best.0 {
                                best = (q, ci, wi);
                            }
                        }
                    }
                }
                best
            })
            .collect();
        let (_, ci, wi) =
            rows.into_iter().fold(
                (f64::NEG_INFINITY, 0, 0),
                |a, b| if b.0 > a.0 { b } else { a },
            );
        let mut x = vec![omegas[wi], chis[ci]];
        x.extend_from_slice(scales);
        Ok(vec![self.point(x)?])
    }

    /// Symmetric spacing scan, then a joint refinement of `(ω_p, χ, s)`; falls
    /// back to independent lower and upper spacings.
    fn search_with_modes(&self, opts: &SearchOptions) -> Result<Vec<Point>> {
        if self.template.modes().len() < 2 {
            return self.search_chi(&self.template_modes(), opts);
        }
        let k = opts.spacing_points;
        let scales: Vec<f64> = if k == 1 {
            vec![1.0]
        } else {
            (0..k)
                .map(|i| (0.25f64.ln() + (16f64.ln()) * i as f64 / (k - 1) as f64).exp())
                .collect()
        };

        let mut scan: Vec<Point> = Vec::new();
        let mut last_err = None;
        for &s in &scales {
            match self.search_chi_scaled(&self.modes_for(&[s]), &[s], opts) {
                Ok(points) => scan.extend(points),
                Err(e) => last_err = Some(e),
            }
        }
        if scan.is_empty() {
            return Err(last_err.unwrap_or(Error::NoSolution {
                best_f_hz: f64::NAN,
                best_chi_hz: f64::NAN,
                best_norm: f64::INFINITY,
            }));
        }
        scan.sort_by(|a, b| a.norm.total_cmp(&b.norm));
        scan.truncate(opts.max_seeds);

        let tol = opts.tol;
        let mut refined: Vec<Point> = scan.into_iter().map(|p| self.newton(p, 3, opts)).collect();
        if refined.iter().all(|p| max_abs(&p.residuals) >= tol) {
            let asym: Vec<Point> = refined
                .iter()
                .filter_map(|p| {
                    let s = p.x[2];
                    self.point(vec![p.x[0], p.x[1], s, s]).ok()
                })
                .map(|p| self.newton(p, 4, opts))
                .collect();
            refined.extend(asym);
        }
        Ok(refined)
    }

    /// Damped Gauss-Newton on the first `active` parameters.
    fn newton(&self, mut p: Point, active: usize, opts: &SearchOptions) -> Point {
        let target = opts.tol * 1e-3;
        for _ in 0..opts.max_iterations {
            if max_abs(&p.residuals) < target {
                break;
            }
            let Some(step) = self.gauss_newton_step(&p, active) else {
                break;
            };
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..30 {
                let x: Vec<f64> = p.x.iter().zip(&step).map(|(x, d)| x + lambda * d).collect();
                if let Ok(q) = self.point(x) {
                    if q.norm < p.norm * (1.0 - 1e-4 * lambda) {
                        accepted = Some(q);
                        break;
                    }
                }
                lambda *= 0.5;
            }
            match accepted {
                Some(q) => p = q,
                None => break,
            }
        }
        p
    }

    /// Minimum-norm least-squares step from a central-difference Jacobian in scaled variables.
    fn gauss_newton_step(&self, p: &Point, active: usize) -> Option<Vec<f64>> {
        let m = p.residuals.len();
        let scale = |i: usize| match i {
            0 => (self.search.hi.value() - self.search.lo.value()).max(p.x[1]),
            _ => p.x[i].abs().max(1e-300),
        };
        let mut jac = DMatrix::<f64>::zeros(m, active);
        for i in 0..active {
            let h = 1e-6 * scale(i);
            let mut xp = p.x.clone();
            let mut xm = p.x.clone();
            xp[i] += h;
            xm[i] -= h;
            let rp = self.residuals(&xp).ok()?;
            let rm = self.residuals(&xm).ok()?;
            for r in 0..m {
                jac[(r, i)] = (rp[r] - rm[r]) / (2.0 * h) * scale(i);
            }
        }
        let rhs = -DVector::from_column_slice(&p.residuals);
        let svd = jac.svd(true, true);
        let cutoff = svd.singular_values.max() * 1e-12;
        let delta = svd.solve(&rhs, cutoff).ok()?;
        let mut step = vec![0.0; p.x.len()];
        for i in 0..active {
            step[i] = delta[i] * scale(i);
        }
        // keep χ and spacing scales positive
        for (s, &x) in step.iter_mut().zip(&p.x).take(active).skip(1) {
            if x + *s <= 0.0 {
                *s = -0.5 * x;
            }
        }
        Some(step)
    }

    /// Verifies converged candidates, deduplicates them and picks the most distinguishable root.
    fn finish(&self, candidates: &mut [Point], opts: &SearchOptions) -> Result<EraserSolution> {
        let n = self.template.qubits();
        let tol = opts.tol;
        let constrained = !residual_pairs(n).is_empty();

        let mut roots: Vec<(Point, Vec<f64>, f64)> = Vec::new();
        for p in candidates.iter() {
            if constrained && max_abs(&p.residuals) >= tol {
                continue;
            }
            let modes = self.modes_for(&p.x[2..]);
            let Ok(phases) = self.phases(p.x[1], &modes) else {
                continue;
            };
            let Ok(theta) = weight_phases(&phases, p.x[0]) else {
                continue;
            };
            let dt = wrap_phase(theta[0] - theta[1]);
            let duplicate = roots.iter().any(|(q, _, _)| {
                q.x.iter()
                    .zip(&p.x)
                    .all(|(a, b)| (a - b).abs() <= 1e-6 * a.abs().max(b.abs()))
            });
            if !duplicate {
                roots.push((p.clone(), modes, dt));
            }
        }

        if roots.is_empty() {
            let best = candidates
                .iter()
                .min_by(|a, b| a.norm.total_cmp(&b.norm))
                .expect("at least one candidate");
            return Err(Error::NoSolution {
                best_f_hz: best.x[0] / TAU,
                best_chi_hz: best.x[1] / TAU,
                best_norm: best.norm,
            });
        }

        // tie-break: largest |sin(Δθ/2)|, then smallest residual, then lowest ω_p
        roots.sort_by(|a, b| {
            let qa = (0.5 * a.2).sin().abs();
            let qb = (0.5 * b.2).sin().abs();
            qb.total_cmp(&qa)
                .then(a.0.norm.total_cmp(&b.0.norm))
                .then(a.0.x[0].total_cmp(&b.0.x[0]))
        });

        let basins: Vec<Basin> = roots
            .iter()
            .map(|(p, modes, dt)| Basin {
                omega_p: p.x[0],
                chi: p.x[1],
                mode_omegas: modes.clone(),
                delta_theta: *dt,
                residual_norm: p.norm,
            })
            .collect();

        let (best, modes, _) = roots.swap_remove(0);
        let omega_p = best.x[0];
        let dev = self.device(best.x[1], &modes)?;
        let phases = DevicePhases::new(&dev)?;
        let theta = weight_phases(&phases, omega_p)?;

        // verification loop: recompute from scratch
        let residuals = residuals_from_phases(&theta);
        if constrained && max_abs(&residuals) >= tol {
            return Err(Error::NoSolution {
                best_f_hz: omega_p / TAU,
                best_chi_hz: best.x[1] / TAU,
                best_norm: norm(&residuals),
            });
        }
        for state in 0..=n {
            let t = phases.theta_weight(state, omega_p)?;
            if wrap_phase(t).abs() < 10.0 * tol {
                return Err(Error::PoleCollision { omega: omega_p });
            }
        }

        let delta_theta = contrast_from_phases(&theta)?;
        let dispersion = dispersion_at(&phases, omega_p)?;
        Ok(EraserSolution {
            qubits: n,
            omega_p: AngularFrequency::new(omega_p)?,
            chi: best.x[1],
            mode_omegas: modes,
            theta_by_weight: theta,
            residuals,
            delta_theta,
            dispersion_b: dispersion.max_b(),
            dispersion_b2: dispersion.max_b2(),
            low_contrast: delta_theta.abs() < LOW_CONTRAST,
            tolerance: tol,
            basins,
        })
    }
}

fn norm(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn max_abs(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn argmin(scores: &[Vec<f64>]) -> (usize, usize, f64) {
    let mut best = (0, 0, f64::INFINITY);
    for (ci, row) in scores.iter().enumerate() {
        for (wi, &s) in row.iter().enumerate() {
            if s < best.2 {
                best = (ci, wi, s);
            }
        }
    }
    best
}

/// Cells no larger than any of their 8 neighbours with norm below
/// [`SEED_NORM_LIMIT`], best first, at most `limit`.
fn local_minima(scores: &[Vec<f64>], limit: usize) -> Vec<(usize, usize)> {
    let rows = scores.len();
    let cols = scores.first().map_or(0, Vec::len);
    let mut minima = Vec::new();
    for ci in 0..rows {
        for wi in 0..cols {
            let s = scores[ci][wi];
            // NaN scores are not seeds either
            if s.is_nan() || s >= SEED_NORM_LIMIT {
                continue;
            }
            let mut is_min = true;
            'nb: for dc in -1i64..=1 {
                for dw in -1i64..=1 {
                    if dc == 0 && dw == 0 {
                        continue;
                    }
                    let (c, w) = (ci as i64 + dc, wi as i64 + dw);
                    if c < 0 || w < 0 || c >= rows as i64 || w >= cols as i64 {
                        continue;
                    }
                    if scores[c as usize][w as usize] < s {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                minima.push((s, ci, wi));
            }
        }
    }
    minima.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    minima
        .into_iter()
        .take(limit)
        .map(|(_, c, w)| (c, w))
        .collect()
}
