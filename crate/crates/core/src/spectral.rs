//! Momentum-space picture of the walk.
//!
//! A plane wave `(U, V)·exp(iβm + iκn)` solves the zero-gradient recursion
//! when `(U, V)` is an eigenvector of
//!
//! ```text
//! M(κ) = (1/√2) [[ e^{iκ},   i·e^{iκ} ],
//!                [ i·e^{-iκ},  e^{-iκ} ]]
//! ```
//!
//! with eigenvalue `e^{iβ}`. Since `det M = 1` and `tr M = √2·cos κ`, the two
//! quasi-energies are `β± = ±arccos(cos κ / √2)`.
//!
//! Lattice transforms use `Û(κ) = Σ_n u_n·e^{-iκn}` on the `N` samples
//! `κ_k = 2πk/N` of the state's window, reported in `[-π, π)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2, TAU};

use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::walk::{Amp, Band, PhaseProfile, Spinor, Trajectory, WalkState};

/// Maps `κ` into `[-π, π)`.
pub fn reduce_kappa(kappa: f64) -> f64 {
    let r = (kappa + PI).rem_euclid(TAU) - PI;
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

/// `(β₊(κ), β₋(κ)) = (arccos(cos κ/√2), -arccos(cos κ/√2))`.
pub fn dispersion(kappa: f64) -> (f64, f64) {
    let beta = (kappa.cos() * FRAC_1_SQRT_2).clamp(-1.0, 1.0).acos();
    (beta, -beta)
}

/// Circular distance between the two quasi-energies at `κ`.
pub fn band_gap_at(kappa: f64) -> f64 {
    let (bp, bm) = dispersion(kappa);
    let d = (bp - bm).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Group velocity `dβ₊/dκ = sin κ / (√2·sin β₊)`.
pub fn group_velocity(kappa: f64) -> f64 {
    let (beta, _) = dispersion(kappa);
    kappa.sin() / (SQRT_2 * beta.sin())
}

/// The one-step operator acting on `(Û(κ), V̂(κ))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentumOperator {
    pub kappa: f64,
    pub entries: [[Amp; 2]; 2],
}

impl MomentumOperator {
    pub fn trace(&self) -> Amp {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn det(&self) -> Amp {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    pub fn apply(&self, x: &Spinor) -> Spinor {
        let e = &self.entries;
        Spinor::new(
            e[0][0] * x.up + e[0][1] * x.down,
            e[1][0] * x.up + e[1][1] * x.down,
        )
    }

    /// Eigenvalues `(e^{iβ₊}, e^{iβ₋})`, from the characteristic polynomial
    /// `λ² - tr·λ + 1`.
    pub fn eigenvalues(&self) -> (Amp, Amp) {
        let (bp, bm) = dispersion(self.kappa);
        (Amp::cis(bp), Amp::cis(bm))
    }

    /// Unit eigenvector for eigenvalue `lambda`, first component real positive.
    fn eigenvector(&self, lambda: Amp) -> Spinor {
        // First row: (a - λ)·x + b·y = 0 ⇒ (x, y) ∝ (b, λ - a). b never vanishes.
        let a = self.entries[0][0];
        let b = self.entries[0][1];
        let (x, y) = (b, lambda - a);
        let norm = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let rot = x.conj() / x.norm();
        Spinor::new(x * rot / norm, y * rot / norm)
    }
}

pub fn step_operator(kappa: f64) -> MomentumOperator {
    let fwd = Amp::cis(kappa) * FRAC_1_SQRT_2;
    let back = Amp::cis(-kappa) * FRAC_1_SQRT_2;
    let i = Amp::i();
    MomentumOperator {
        kappa,
        entries: [[fwd, i * fwd], [i * back, back]],
    }
}

/// Unit eigenvectors `(U, V)` of `M(κ)` for the plus and minus bands.
pub fn band_eigenvectors(kappa: f64) -> (Spinor, Spinor) {
    let op = step_operator(kappa);
    let (lp, lm) = op.eigenvalues();
    (op.eigenvector(lp), op.eigenvector(lm))
}

pub fn band_eigenvector(kappa: f64, band: Band) -> Spinor {
    let (p, m) = band_eigenvectors(kappa);
    match band {
        Band::Plus => p,
        Band::Minus => m,
    }
}

/// Quasi-energies and band eigenvectors sampled on a κ grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BandStructure {
    pub kappa_grid: Vec<f64>,
    pub beta_plus: Vec<f64>,
    pub beta_minus: Vec<f64>,
    pub eigvec_plus: Vec<Spinor>,
    pub eigvec_minus: Vec<Spinor>,
}

impl BandStructure {
    pub fn sample(kappa_grid: &[f64]) -> Self {
        let mut bs = BandStructure {
            kappa_grid: kappa_grid.to_vec(),
            beta_plus: Vec::with_capacity(kappa_grid.len()),
            beta_minus: Vec::with_capacity(kappa_grid.len()),
            eigvec_plus: Vec::with_capacity(kappa_grid.len()),
            eigvec_minus: Vec::with_capacity(kappa_grid.len()),
        };
        for &k in kappa_grid {
            let (bp, bm) = dispersion(k);
            let (ep, em) = band_eigenvectors(k);
            bs.beta_plus.push(bp);
            bs.beta_minus.push(bm);
            bs.eigvec_plus.push(ep);
            bs.eigvec_minus.push(em);
        }
        bs
    }

    /// `samples` points covering `[-π, π)`.
    pub fn uniform(samples: usize) -> Self {
        let grid: Vec<f64> = (0..samples)
            .map(|j| -PI + TAU * j as f64 / samples as f64)
            .collect();
        Self::sample(&grid)
    }

    /// `samples` points covering `[0, π]` including both ends.
    pub fn half_zone(samples: usize) -> Self {
        let grid: Vec<f64> = match samples {
            0 => Vec::new(),
            1 => vec![0.0],
            _ => (0..samples)
                .map(|j| PI * j as f64 / (samples - 1) as f64)
                .collect(),
        };
        Self::sample(&grid)
    }

    pub fn len(&self) -> usize {
        self.kappa_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa_grid.is_empty()
    }
}

/// `(Û(κ_k), V̂(κ_k))` for every sample of a state's window.
#[derive(Clone, Debug)]
pub struct MomentumField {
    pub kappa: Vec<f64>,
    pub u: Vec<Amp>,
    pub v: Vec<Amp>,
}

impl MomentumField {
    pub fn intensity(&self) -> impl Iterator<Item = f64> + '_ {
        self.u.iter().zip(&self.v).map(|(a, b)| a.norm_sqr() + b.norm_sqr())
    }

    pub fn spinor(&self, k: usize) -> Spinor {
        Spinor::new(self.u[k], self.v[k])
    }
}

/// `e^{-iκ_k·n}` with `κ_k·n` reduced exactly in integers.
fn lattice_phase(k: usize, n: i64, len: usize) -> Amp {
    let r = (k as i128 * n as i128).rem_euclid(len as i128);
    Amp::cis(-TAU * r as f64 / len as f64)
}

fn sample_kappa(k: usize, len: usize) -> f64 {
    reduce_kappa(TAU * k as f64 / len as f64)
}

pub fn to_momentum(state: &WalkState) -> MomentumField {
    let len = state.len();
    let fft = FftPlanner::new().plan_fft_forward(len);
    let mut u = state.u().to_vec();
    let mut v = state.v().to_vec();
    fft.process(&mut u);
    fft.process(&mut v);
    let n0 = state.n_min();
    for k in 0..len {
        let ph = lattice_phase(k, n0, len);
        u[k] *= ph;
        v[k] *= ph;
    }
    MomentumField {
        kappa: (0..len).map(|k| sample_kappa(k, len)).collect(),
        u,
        v,
    }
}

/// Inverse of [`to_momentum`] onto `template`'s window.
fn from_momentum(field: &MomentumField, template: &WalkState, m: usize) -> WalkState {
    let len = template.len();
    let n0 = template.n_min();
    let ifft = FftPlanner::new().plan_fft_inverse(len);
    let mut u = field.u.clone();
    let mut v = field.v.clone();
    for k in 0..len {
        let ph = lattice_phase(k, n0, len).conj();
        u[k] *= ph;
        v[k] *= ph;
    }
    ifft.process(&mut u);
    ifft.process(&mut v);
    let scale = 1.0 / len as f64;
    u.iter_mut().chain(v.iter_mut()).for_each(|a| *a *= scale);
    WalkState::from_parts(m, n0, u, v).expect("finite amplitudes")
}

/// Propagates `steps` steps diagonally in κ with the balanced coin and no phase.
///
/// The transform is periodic on the window, so the window must hold the whole
/// light cone for the result to match position-space evolution. Its length
/// must be a power of two.
pub fn momentum_evolve(state: &WalkState, steps: usize, phase: &PhaseProfile) -> Result<WalkState> {
    if !phase.is_trivial() {
        return Err(Error::NonzeroPhase);
    }
    if !state.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(state.len()));
    }
    let mut field = to_momentum(state);
    for k in 0..field.kappa.len() {
        let kappa = field.kappa[k];
        let (bp, _) = dispersion(kappa);
        let (ep, em) = band_eigenvectors(kappa);
        let x = field.spinor(k);
        let cp = ep.inner(&x) * Amp::cis(bp * steps as f64);
        let cm = em.inner(&x) * Amp::cis(-bp * steps as f64);
        field.u[k] = cp * ep.up + cm * em.up;
        field.v[k] = cp * ep.down + cm * em.down;
    }
    Ok(from_momentum(&field, state, state.m() + steps))
}

/// Intensity-weighted circular mean of κ on the folded zone `[-π/2, π/2)`.
///
/// Folding doubles the angle, so `κ` and `κ + π` count as the same point; a
/// single-site start fills only one parity sublattice and is `π`-redundant
/// in κ.
pub fn momentum_centroid(state: &WalkState) -> Result<f64> {
    let field = to_momentum(state);
    let (mut total, mut z) = (0.0, Amp::new(0.0, 0.0));
    for (i, w) in field.intensity().enumerate() {
        total += w;
        z += Amp::cis(2.0 * field.kappa[i]) * w;
    }
    if !(total > 0.0) {
        return Err(Error::ZeroState);
    }
    let c = z.arg() / 2.0;
    Ok(if c >= PI / 2.0 { c - PI } else { c })
}

/// Folded centroid of every recorded state, unwrapped across the trajectory.
pub fn centroid_track(traj: &Trajectory) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::with_capacity(traj.len());
    let mut prev_raw = 0.0;
    for (i, s) in traj.states().iter().enumerate() {
        let c = momentum_centroid(s)?;
        if i == 0 {
            out.push(c);
        } else {
            let d = c - prev_raw;
            let d = (d + PI / 2.0).rem_euclid(PI) - PI / 2.0;
            out.push(out[i - 1] + d);
        }
        prev_raw = c;
    }
    Ok(out)
}

/// Re-expresses a lab-frame state in a frame whose momenta are shifted by
/// `-offset`: sample `κ` of the result holds lab momentum `κ + offset`.
pub fn to_comoving(state: &WalkState, offset: f64) -> WalkState {
    state.modulated(|n| Amp::cis(-(offset * n as f64).rem_euclid(TAU)))
}

/// Fractions `(P₊, P₋)` of the field in each band.
///
/// The state is read as living in a frame shifted by `kappa_offset` (see
/// [`to_comoving`]): the amplitude pair at sample `κ` is projected onto the
/// band eigenvectors at `κ + kappa_offset`. Pass 0 for a lab-frame field.
pub fn band_populations(state: &WalkState, kappa_offset: f64) -> Result<(f64, f64)> {
    let field = to_momentum(state);
    let (mut pp, mut pm, mut total) = (0.0, 0.0, 0.0);
    for k in 0..field.kappa.len() {
        let x = field.spinor(k);
        let (ep, em) = band_eigenvectors(field.kappa[k] + kappa_offset);
        pp += ep.inner(&x).norm_sqr();
        pm += em.inner(&x).norm_sqr();
        total += x.norm_sqr();
    }
    if !(total > 0.0) {
        return Err(Error::ZeroState);
    }
    Ok((pp / total, pm / total))
}
