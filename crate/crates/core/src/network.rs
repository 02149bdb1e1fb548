//! Lossless one-port networks: impedance, reflection coefficient and the
//! unwrapped reflection phase.
//!
//! Every element is reactive, so the impedance is `Z = iX` with `X` real. The
//! reactance is carried in homogeneous form `X = num / den`, which composes
//! in series and in parallel without ever dividing. Poles of `Z` are simply
//! `den = 0` and zeros are `num = 0`, so evaluation stays finite right at a
//! resonance and the reflection coefficient is unimodular by construction.
//!
//! Phase convention: `θ(ω) = arg r(ω)` decreases with increasing `ω`
//! (reactance of a lossless one-port is strictly increasing), and each pole
//! of `Z` inside a window contributes `−2π` of winding.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::{wrap_phase, AngularFrequency};

/// Admittance magnitude below which the impedance is reported as a pole.
pub const POLE_ADMITTANCE_FLOOR: f64 = 1e-18;

/// Largest adjacent phase step accepted by the adaptive sweep.
pub const MAX_PHASE_STEP: f64 = FRAC_PI_4;

/// Hard cap on the number of samples in one adaptive sweep.
pub const MAX_SWEEP_POINTS: usize = 1 << 24;

pub const MIN_BASE_POINTS: usize = 64;

const STUB_COS_FLOOR: f64 = 1e-14;

// Wrapped differences of a decreasing phase may come out marginally positive
// from rounding; anything larger signals an aliased turn.
const MONOTONE_SLACK: f64 = 1e-12;

/// Lossless one-port built from quarter-wave stubs and lumped reactances.
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkElement {
    /// Shorted quarter-wave line, `Z = i Z0 tan(π/2 · ω/ω_r)`.
    QuarterWaveStub {
        z0: f64,
        resonance: AngularFrequency,
    },
    /// Capacitance in farads.
    Capacitor(f64),
    /// Inductance in henries.
    Inductor(f64),
    Series(Vec<NetworkElement>),
    Parallel(Vec<NetworkElement>),
}

/// Parallel-LC stand-in for a quarter-wave resonator near its fundamental.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LumpedResonator {
    pub capacitance: f64,
    pub inductance: f64,
}

impl LumpedResonator {
    pub fn resonance(&self) -> f64 {
        1.0 / (self.inductance * self.capacitance).sqrt()
    }
}

/// `C_r = π / (4 ω_r Z0)`, `L_r = 1 / (ω_r² C_r)`.
pub fn lumped_equivalent(resonance: AngularFrequency, z0: f64) -> Result<LumpedResonator> {
    check_positive("Z0", z0)?;
    let wr = resonance.value();
    let capacitance = PI / (4.0 * wr * z0);
    let inductance = 1.0 / (wr * wr * capacitance);
    Ok(LumpedResonator {
        capacitance,
        inductance,
    })
}

/// Input impedance of a shorted quarter-wave stub.
pub fn stub_impedance(
    omega: AngularFrequency,
    z0: f64,
    resonance: AngularFrequency,
) -> Result<Complex64> {
    check_positive("Z0", z0)?;
    let phi = FRAC_PI_2 * omega.value() / resonance.value();
    let (s, c) = phi.sin_cos();
    if c.abs() < STUB_COS_FLOOR {
        return Err(Error::PoleProximity {
            omega: omega.value(),
        });
    }
    Ok(Complex64::new(0.0, z0 * s / c))
}

impl NetworkElement {
    pub fn stub(z0: f64, resonance: AngularFrequency) -> Self {
        Self::QuarterWaveStub { z0, resonance }
    }

    pub fn lumped_resonator(resonance: AngularFrequency, z0: f64) -> Result<Self> {
        let lc = lumped_equivalent(resonance, z0)?;
        Ok(Self::Parallel(vec![
            Self::Inductor(lc.inductance),
            Self::Capacitor(lc.capacitance),
        ]))
    }

    /// Checks the structural invariants: non-empty composites and positive values.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::QuarterWaveStub { z0, .. } => check_positive("stub Z0", *z0),
            Self::Capacitor(c) => check_positive("capacitance", *c),
            Self::Inductor(l) => check_positive("inductance", *l),
            Self::Series(children) | Self::Parallel(children) => {
                if children.is_empty() {
                    return Err(Error::InvalidInput(
                        "series/parallel composite has no children".into(),
                    ));
                }
                children.iter().try_for_each(Self::validate)
            }
        }
    }

    /// Number of leaf elements in the tree.
    pub fn leaf_count(&self) -> usize {
        match self {
            Self::Series(children) | Self::Parallel(children) => {
                children.iter().map(Self::leaf_count).sum()
            }
            _ => 1,
        }
    }

    pub fn reactance(&self, omega: f64) -> Reactance {
        match self {
            Self::QuarterWaveStub { z0, resonance } => {
                let rate = FRAC_PI_2 / resonance.value();
                let (s, c) = (rate * omega).sin_cos();
                Reactance::leaf(z0 * s, c, z0 * c * rate, -s * rate)
            }
            Self::Capacitor(c) => Reactance::leaf(-1.0, omega * c, 0.0, *c),
            Self::Inductor(l) => Reactance::leaf(omega * l, 1.0, *l, 0.0),
            Self::Series(children) => fold(children, omega, Reactance::series),
            Self::Parallel(children) => fold(children, omega, Reactance::parallel),
        }
    }
}

fn fold(
    children: &[NetworkElement],
    omega: f64,
    op: fn(Reactance, Reactance) -> Reactance,
) -> Reactance {
    let mut iter = children.iter().map(|c| c.reactance(omega));
    let first = iter.next().expect("validated composite is non-empty");
    iter.fold(first, op)
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} must be finite and > 0, got {v}"
        )))
    }
}

/// Reactance `X = num/den` and its frequency derivative, in homogeneous form.
///
/// `den_floor` tracks the magnitude of the terms that were summed into `den`,
/// so cancellation down to rounding noise can be recognised as a pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reactance {
    pub num: f64,
    pub den: f64,
    pub dnum: f64,
    pub dden: f64,
    den_floor: f64,
}

impl Reactance {
    fn leaf(num: f64, den: f64, dnum: f64, dden: f64) -> Self {
        Self {
            num,
            den,
            dnum,
            dden,
            den_floor: den.abs(),
        }
        .normalized()
    }

    fn normalized(self) -> Self {
        let s = self.num.hypot(self.den);
        if s == 0.0 || !s.is_finite() {
            return self;
        }
        Self {
            num: self.num / s,
            den: self.den / s,
            dnum: self.dnum / s,
            dden: self.dden / s,
            den_floor: self.den_floor / s,
        }
    }

    /// `X = X1 + X2`.
    pub fn series(a: Self, b: Self) -> Self {
        Self {
            num: a.num * b.den + b.num * a.den,
            den: a.den * b.den,
            dnum: a.dnum * b.den + a.num * b.dden + b.dnum * a.den + b.num * a.dden,
            dden: a.dden * b.den + a.den * b.dden,
            den_floor: a.den_floor * b.den_floor,
        }
        .normalized()
    }

    /// `1/X = 1/X1 + 1/X2`.
    pub fn parallel(a: Self, b: Self) -> Self {
        Self {
            num: a.num * b.num,
            den: a.num * b.den + b.num * a.den,
            dnum: a.dnum * b.num + a.num * b.dnum,
            dden: a.dnum * b.den + a.num * b.dden + b.dnum * a.den + b.num * a.dden,
            den_floor: a.num.abs() * b.den_floor + b.num.abs() * a.den_floor,
        }
        .normalized()
    }

    /// True when the admittance is indistinguishable from zero.
    pub fn at_pole(&self) -> bool {
        let admittance = (self.den / self.num).abs();
        admittance < POLE_ADMITTANCE_FLOOR || self.den.abs() <= 64.0 * f64::EPSILON * self.den_floor
    }

    /// Reactance in ohms, `None` at a pole.
    pub fn ohms(&self) -> Option<f64> {
        (!self.at_pole()).then(|| self.num / self.den)
    }

    /// `r = (Z − Z0)/(Z + Z0)`; exactly `+1` at a pole.
    pub fn reflection(&self, z0: f64) -> Complex64 {
        if self.at_pole() {
            return Complex64::new(1.0, 0.0);
        }
        let u = Complex64::new(z0 * self.den, self.num);
        -u.conj() / u
    }

    /// Principal reflection phase in (−π, π].
    pub fn phase(&self, z0: f64) -> f64 {
        wrap_phase(PI - 2.0 * self.num.atan2(z0 * self.den))
    }

    /// `dθ/dω` in s.
    pub fn phase_slope(&self, z0: f64) -> f64 {
        let cross = self.dnum * self.den - self.num * self.dden;
        let norm = self.num * self.num + z0 * z0 * self.den * self.den;
        -2.0 * z0 * cross / norm
    }
}

/// Impedance `Z(ω)` of the network; errors at a pole.
pub fn network_impedance(net: &NetworkElement, omega: AngularFrequency) -> Result<Complex64> {
    net.validate()?;
    let x = net.reactance(omega.value());
    x.ohms()
        .map(|ohms| Complex64::new(0.0, ohms))
        .ok_or(Error::PoleProximity {
            omega: omega.value(),
        })
}

/// Reflection coefficient against a line of impedance `z0`.
pub fn reflection_coefficient(net: &NetworkElement, omega: AngularFrequency, z0: f64) -> Complex64 {
    net.reactance(omega.value()).reflection(z0)
}

/// Principal value of `arg r(ω)`.
pub fn reflection_phase(net: &NetworkElement, omega: f64, z0: f64) -> f64 {
    net.reactance(omega).phase(z0)
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    omega: f64,
    phase: f64,
    slope: f64,
}

fn sample(net: &NetworkElement, z0: f64, omega: f64) -> Sample {
    let x = net.reactance(omega);
    Sample {
        omega,
        phase: x.phase(z0),
        slope: x.phase_slope(z0),
    }
}

fn resolved(a: &Sample, b: &Sample) -> bool {
    let h = b.omega - a.omega;
    let d = wrap_phase(b.phase - a.phase);
    d <= MONOTONE_SLACK
        && d > -MAX_PHASE_STEP
        && a.slope.abs() * h < MAX_PHASE_STEP
        && b.slope.abs() * h < MAX_PHASE_STEP
}

/// Appends samples strictly after `a` up to and including `b`.
fn refine(
    net: &NetworkElement,
    z0: f64,
    a: Sample,
    b: Sample,
    out: &mut Vec<Sample>,
) -> Result<()> {
    if out.len() >= MAX_SWEEP_POINTS {
        return Err(Error::RefinementLimit {
            limit: MAX_SWEEP_POINTS,
        });
    }
    if resolved(&a, &b) {
        out.push(b);
        return Ok(());
    }
    let mid = 0.5 * (a.omega + b.omega);
    if mid <= a.omega || mid >= b.omega {
        return Err(Error::RefinementLimit {
            limit: MAX_SWEEP_POINTS,
        });
    }
    let m = sample(net, z0, mid);
    refine(net, z0, a, m, out)?;
    refine(net, z0, m, b, out)
}

/// Unwrapped reflection phase on an adaptively refined grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    /// Sample frequencies in rad/s, strictly increasing.
    pub grid: Vec<f64>,
    /// Unwrapped phase in radians.
    pub theta: Vec<f64>,
    /// Frequencies (rad/s) where `r = +1`, i.e. poles of the impedance.
    pub poles: Vec<f64>,
}

impl PhaseProfile {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `θ(ω_hi) − θ(ω_lo)`.
    pub fn net_change(&self) -> f64 {
        self.theta.last().unwrap_or(&0.0) - self.theta.first().unwrap_or(&0.0)
    }

    /// Signed full turns of `r` around the unit circle, counted at `r = +1`.
    pub fn winding(&self) -> f64 {
        -TAU * self.poles.len() as f64
    }

    /// Shifts the whole curve by `2πk`.
    pub fn shift_turns(&mut self, k: i64) {
        let offset = TAU * k as f64;
        self.theta.iter_mut().for_each(|t| *t += offset);
    }
}

/// Adaptive sweep of `θ(ω)` over `[lo, hi]`.
///
/// The uniform base grid is bisected until every adjacent phase step is
/// below π/4 in magnitude, judged both from the wrapped difference and from
/// the analytic slope at each end. The curve is anchored at the principal
/// value of `θ(lo)`.
pub fn phase_sweep(
    net: &NetworkElement,
    z0: f64,
    lo: AngularFrequency,
    hi: AngularFrequency,
    base_points: usize,
) -> Result<PhaseProfile> {
    Ok(sweep_samples(net, z0, lo, hi, base_points)?.0)
}

fn sweep_samples(
    net: &NetworkElement,
    z0: f64,
    lo: AngularFrequency,
    hi: AngularFrequency,
    base_points: usize,
) -> Result<(PhaseProfile, Vec<f64>)> {
    net.validate()?;
    check_positive("Z0", z0)?;
    let (lo, hi) = (lo.value(), hi.value());
    if lo >= hi {
        return Err(Error::InvalidInput(format!(
            "sweep window must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    if base_points < MIN_BASE_POINTS {
        return Err(Error::InvalidInput(format!(
            "phase sweep needs at least {MIN_BASE_POINTS} base points, got {base_points}"
        )));
    }

    let step = (hi - lo) / (base_points - 1) as f64;
    let base: Vec<Sample> = (0..base_points)
        .map(|i| {
            let w = if i + 1 == base_points {
                hi
            } else {
                lo + step * i as f64
            };
            sample(net, z0, w)
        })
        .collect();

    let mut samples = Vec::with_capacity(base_points * 2);
    samples.push(base[0]);
    for pair in base.windows(2) {
        refine(net, z0, pair[0], pair[1], &mut samples)?;
    }

    let mut grid = Vec::with_capacity(samples.len());
    let mut theta = Vec::with_capacity(samples.len());
    let mut wrapped = Vec::with_capacity(samples.len());
    let mut acc = samples[0].phase;
    for (i, s) in samples.iter().enumerate() {
        if i > 0 {
            acc += wrap_phase(s.phase - samples[i - 1].phase);
        }
        grid.push(s.omega);
        theta.push(acc);
        wrapped.push(s.phase);
    }

    let mut poles = Vec::new();
    for k in 0..grid.len() - 1 {
        let upper = (theta[k] / TAU).floor();
        let lower = (theta[k + 1] / TAU).floor();
        if upper > lower {
            let target = TAU * upper;
            poles.push(locate_crossing(
                net,
                z0,
                grid[k],
                grid[k + 1],
                theta[k],
                wrapped[k],
                target,
            ));
        }
    }

    Ok((PhaseProfile { grid, theta, poles }, wrapped))
}

/// Bisection for the frequency where the unwrapped phase equals `target`
/// inside a resolved interval.
fn locate_crossing(
    net: &NetworkElement,
    z0: f64,
    mut a: f64,
    mut b: f64,
    theta_a: f64,
    wrapped_a: f64,
    target: f64,
) -> f64 {
    let at = |w: f64| theta_a + wrap_phase(reflection_phase(net, w, z0) - wrapped_a) - target;
    if at(a) <= 0.0 {
        return a;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if at(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// A swept network that can report the unwrapped phase at any in-band frequency.
#[derive(Debug, Clone)]
pub struct PhaseCurve {
    net: NetworkElement,
    z0: f64,
    profile: PhaseProfile,
    wrapped: Vec<f64>,
}

impl PhaseCurve {
    pub fn new(
        net: NetworkElement,
        z0: f64,
        lo: AngularFrequency,
        hi: AngularFrequency,
        base_points: usize,
    ) -> Result<Self> {
        let (profile, wrapped) = sweep_samples(&net, z0, lo, hi, base_points)?;
        Ok(Self {
            net,
            z0,
            profile,
            wrapped,
        })
    }

    pub fn network(&self) -> &NetworkElement {
        &self.net
    }

    pub fn profile(&self) -> &PhaseProfile {
        &self.profile
    }

    pub fn lo(&self) -> f64 {
        self.profile.grid[0]
    }

    pub fn hi(&self) -> f64 {
        *self.profile.grid.last().expect("non-empty sweep")
    }

    /// Moves the curve onto the `2π` branch whose anchor value lies closest to `reference`.
    pub fn align_anchor(&mut self, reference: f64) {
        let k = ((reference - self.profile.theta[0]) / TAU).round() as i64;
        if k != 0 {
            self.profile.shift_turns(k);
        }
    }

    /// Unwrapped phase at `omega` on this curve's branch.
    pub fn theta_at(&self, omega: f64) -> Result<f64> {
        let (lo, hi) = (self.lo(), self.hi());
        let slack = 1e-12 * hi;
        if !(omega >= lo - slack && omega <= hi + slack) {
            return Err(Error::OutOfBand { omega, lo, hi });
        }
        let grid = &self.profile.grid;
        let k = grid.partition_point(|&w| w <= omega).saturating_sub(1);
        let here = reflection_phase(&self.net, omega, self.z0);
        Ok(self.profile.theta[k] + wrap_phase(here - self.wrapped[k]))
    }

    /// Unwrapped phase at each of `omegas`.
    pub fn theta_many(&self, omegas: &[f64]) -> Result<Vec<f64>> {
        omegas.iter().map(|&w| self.theta_at(w)).collect()
    }
}
