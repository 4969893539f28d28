//! Lattice field, coin, phase profiles and the exact position-space step.
//!
//! One step maps the field `(u_n, v_n)` at step `m` to
//!
//! ```text
//! u_n' = (c11·u_{n+1} + c12·v_{n+1})·exp(i·φ_u(n))
//! v_n' = (c21·u_{n-1} + c22·v_{n-1})·exp(i·φ_v(n))
//! ```
//!
//! With the balanced coin and `φ_u = 0`, `φ_v(n) = n·α` this is the fiber-loop
//! recursion. Windows are finite and never wrap: amplitude that would leave the
//! window is reported as an error.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::spectral;

/// Complex amplitude of one loop at one site.
pub type Amp = Complex64;

const ZERO: Amp = Amp::new(0.0, 0.0);
const UNITARITY_TOL: f64 = 1e-12;
/// Largest normalized amplitude allowed on the edge of a packet window.
pub const PACKET_EDGE_TOL: f64 = 1e-12;

/// Internal two-level state: `up` is the upper loop, `down` the lower loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spinor {
    pub up: Amp,
    pub down: Amp,
}

impl Spinor {
    pub const fn new(up: Amp, down: Amp) -> Self {
        Spinor { up, down }
    }

    pub fn up() -> Self {
        Spinor::new(Amp::new(1.0, 0.0), ZERO)
    }

    pub fn down() -> Self {
        Spinor::new(ZERO, Amp::new(1.0, 0.0))
    }

    /// Equal superposition `(|↑⟩ + |↓⟩)/√2`.
    pub fn plus() -> Self {
        Spinor::new(Amp::new(FRAC_1_SQRT_2, 0.0), Amp::new(FRAC_1_SQRT_2, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroSpinor);
        }
        Ok(Spinor::new(self.up / norm, self.down / norm))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Spinor) -> Amp {
        self.up.conj() * other.up + self.down.conj() * other.down
    }
}

/// 2×2 unitary acting on the internal state once per step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoinOp {
    entries: [[Amp; 2]; 2],
}

impl CoinOp {
    /// Checks `C†C = I` entrywise within 1e-12.
    pub fn new(c11: Amp, c12: Amp, c21: Amp, c22: Amp) -> Result<Self> {
        let e = [[c11, c12], [c21, c22]];
        if e.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonUnitaryCoin {
                deviation: f64::INFINITY,
            });
        }
        let mut deviation: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let dot = e[0][i].conj() * e[0][j] + e[1][i].conj() * e[1][j];
                let target = if i == j { 1.0 } else { 0.0 };
                deviation = deviation.max((dot - target).norm());
            }
        }
        if deviation > UNITARITY_TOL {
            return Err(Error::NonUnitaryCoin { deviation });
        }
        Ok(CoinOp { entries: e })
    }

    /// The unbiased 50/50 coupler `(1/√2)[[1, i], [i, 1]]`.
    pub fn balanced() -> Self {
        let d = Amp::new(FRAC_1_SQRT_2, 0.0);
        let o = Amp::new(0.0, FRAC_1_SQRT_2);
        CoinOp {
            entries: [[d, o], [o, d]],
        }
    }

    pub fn entries(&self) -> [[Amp; 2]; 2] {
        self.entries
    }

    pub fn is_balanced(&self) -> bool {
        *self == CoinOp::balanced()
    }
}

impl Default for CoinOp {
    fn default() -> Self {
        CoinOp::balanced()
    }
}

/// Phase increment per lattice site.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gradient {
    /// `α = 2π·q/p` with `q/p` in lowest terms and `p ≥ 1`.
    Rational { q: i64, p: u64 },
    /// `α` in radians per site.
    Float(f64),
}

impl Gradient {
    pub const ZERO: Gradient = Gradient::Rational { q: 0, p: 1 };

    /// Builds `2π·q/p`, reducing the fraction.
    pub fn rational(q: i64, p: i64) -> Result<Self> {
        if p < 1 {
            return Err(Error::InvalidPhase(format!("p must be >= 1, got {p}")));
        }
        let g = q.gcd(&p);
        // gcd(0, p) = p, which reduces 0/p to 0/1.
        Ok(Gradient::Rational {
            q: q / g,
            p: (p / g) as u64,
        })
    }

    pub fn float(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidPhase(format!("alpha must be finite, got {alpha}")));
        }
        Ok(Gradient::Float(alpha))
    }

    pub fn radians(&self) -> f64 {
        match *self {
            Gradient::Rational { q, p } => TAU * q as f64 / p as f64,
            Gradient::Float(a) => a,
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Gradient::Rational { q, .. } => q == 0,
            Gradient::Float(a) => a == 0.0,
        }
    }

    /// Phase `n·α` at site `n`. Rational gradients reduce `q·n mod p` in
    /// integers first, so the phase pattern is exactly `p`-periodic.
    pub fn phase_at(&self, n: i64) -> f64 {
        match *self {
            Gradient::Rational { q, p } => {
                let r = (q as i128 * n as i128).rem_euclid(p as i128);
                TAU * r as f64 / p as f64
            }
            Gradient::Float(a) => a * n as f64,
        }
    }

    /// Half the gradient; rational gradients stay rational.
    pub fn halved(&self) -> Gradient {
        match *self {
            Gradient::Rational { q, p } => {
                let den = 2 * p as i64;
                Gradient::rational(q, den).expect("positive denominator")
            }
            Gradient::Float(a) => Gradient::Float(a / 2.0),
        }
    }
}

/// Position-dependent phases applied to each loop after the shift.
#[derive(Clone, Debug, PartialEq)]
pub enum PhaseProfile {
    /// `φ_u(n) = n·α_u`, `φ_v(n) = n·α_v`.
    Linear { u: Gradient, v: Gradient },
    /// Explicit per-site phases in radians, starting at `n_min`.
    Tabulated {
        n_min: i64,
        phi_u: Vec<f64>,
        phi_v: Vec<f64>,
    },
}

impl PhaseProfile {
    pub fn none() -> Self {
        PhaseProfile::Linear {
            u: Gradient::ZERO,
            v: Gradient::ZERO,
        }
    }

    /// Gradient on the lower loop only, as in the fiber experiment.
    pub fn lower(g: Gradient) -> Self {
        PhaseProfile::Linear {
            u: Gradient::ZERO,
            v: g,
        }
    }

    /// `α = 2π·q/p` on the lower loop.
    pub fn rational(q: i64, p: i64) -> Result<Self> {
        Ok(PhaseProfile::lower(Gradient::rational(q, p)?))
    }

    /// Float gradient on the lower loop.
    pub fn float(alpha: f64) -> Result<Self> {
        Ok(PhaseProfile::lower(Gradient::float(alpha)?))
    }

    pub fn split(u: Gradient, v: Gradient) -> Self {
        PhaseProfile::Linear { u, v }
    }

    /// The gradient divided evenly between both loops. In this gauge the whole
    /// momentum distribution drifts by `α/2` per step.
    pub fn symmetric(g: Gradient) -> Self {
        let h = g.halved();
        PhaseProfile::Linear { u: h, v: h }
    }

    pub fn tabulated(n_min: i64, phi_u: Vec<f64>, phi_v: Vec<f64>) -> Result<Self> {
        if phi_u.len() != phi_v.len() {
            return Err(Error::InvalidPhase(format!(
                "phi_u has {} entries but phi_v has {}",
                phi_u.len(),
                phi_v.len()
            )));
        }
        if phi_u.is_empty() {
            return Err(Error::InvalidPhase("empty phase table".into()));
        }
        if phi_u.iter().chain(&phi_v).any(|p| !p.is_finite()) {
            return Err(Error::InvalidPhase("non-finite phase in table".into()));
        }
        Ok(PhaseProfile::Tabulated { n_min, phi_u, phi_v })
    }

    /// True when every phase is zero.
    pub fn is_trivial(&self) -> bool {
        match self {
            PhaseProfile::Linear { u, v } => u.is_zero() && v.is_zero(),
            PhaseProfile::Tabulated { phi_u, phi_v, .. } => {
                phi_u.iter().chain(phi_v).all(|&p| p == 0.0)
            }
        }
    }

    /// Sum of the two gradients, which is all a single-site intensity pattern
    /// depends on. `None` for tabulated profiles.
    pub fn total_gradient(&self) -> Option<f64> {
        match self {
            PhaseProfile::Linear { u, v } => Some(u.radians() + v.radians()),
            PhaseProfile::Tabulated { .. } => None,
        }
    }

    /// `(φ_u(n), φ_v(n))`.
    pub fn phases_at(&self, n: i64) -> Option<(f64, f64)> {
        match self {
            PhaseProfile::Linear { u, v } => Some((u.phase_at(n), v.phase_at(n))),
            PhaseProfile::Tabulated { n_min, phi_u, phi_v } => {
                let idx = usize::try_from(n - n_min).ok()?;
                Some((*phi_u.get(idx)?, *phi_v.get(idx)?))
            }
        }
    }

    /// Unit phase factors over `[n_min, n_max]`.
    pub fn factors(&self, n_min: i64, n_max: i64) -> Result<(Vec<Amp>, Vec<Amp>)> {
        if let PhaseProfile::Tabulated { n_min: t0, phi_u, .. } = self {
            let t1 = t0 + phi_u.len() as i64 - 1;
            if n_min < *t0 || n_max > t1 {
                return Err(Error::PhaseTableTooShort {
                    table_min: *t0,
                    table_max: t1,
                    n_min,
                    n_max,
                });
            }
        }
        let (fu, fv) = (n_min..=n_max)
            .map(|n| {
                let (pu, pv) = self.phases_at(n).expect("coverage checked");
                (unit(pu), unit(pv))
            })
            .unzip();
        Ok((fu, fv))
    }
}

impl Default for PhaseProfile {
    fn default() -> Self {
        PhaseProfile::none()
    }
}

fn unit(phase: f64) -> Amp {
    if phase == 0.0 {
        Amp::new(1.0, 0.0)
    } else {
        Amp::cis(phase)
    }
}

/// One of the two loops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Loop {
    Upper,
    Lower,
}

/// Which intensity a grid holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GridKind {
    U,
    V,
    Total,
}

impl GridKind {
    pub fn name(&self) -> &'static str {
        match self {
            GridKind::U => "u",
            GridKind::V => "v",
            GridKind::Total => "total",
        }
    }
}

/// Quasi-energy band.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Band {
    Plus,
    Minus,
}

impl Band {
    pub fn other(&self) -> Band {
        match self {
            Band::Plus => Band::Minus,
            Band::Minus => Band::Plus,
        }
    }
}

/// Field `{u_n, v_n}` on the window `[n_min, n_max]` after `m` steps.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkState {
    m: usize,
    n_min: i64,
    u: Vec<Amp>,
    v: Vec<Amp>,
}

impl WalkState {
    pub fn from_parts(m: usize, n_min: i64, u: Vec<Amp>, v: Vec<Amp>) -> Result<Self> {
        if u.is_empty() || u.len() != v.len() {
            return Err(Error::InvalidArgument(format!(
                "component lengths {} and {} must be equal and nonzero",
                u.len(),
                v.len()
            )));
        }
        if u.iter().chain(&v).any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite amplitude".into()));
        }
        Ok(WalkState { m, n_min, u, v })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_min + self.u.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn u(&self) -> &[Amp] {
        &self.u
    }

    pub fn v(&self) -> &[Amp] {
        &self.v
    }

    pub fn positions(&self) -> impl Iterator<Item = i64> + '_ {
        self.n_min..=self.n_max()
    }

    /// `(u_n, v_n)`, or `None` outside the window.
    pub fn at(&self, n: i64) -> Option<(Amp, Amp)> {
        let idx = usize::try_from(n - self.n_min).ok()?;
        Some((*self.u.get(idx)?, *self.v.get(idx)?))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .sum()
    }

    pub fn intensities(&self, kind: GridKind) -> Vec<f64> {
        match kind {
            GridKind::U => self.u.iter().map(|a| a.norm_sqr()).collect(),
            GridKind::V => self.v.iter().map(|a| a.norm_sqr()).collect(),
            GridKind::Total => self
                .u
                .iter()
                .zip(&self.v)
                .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
                .collect(),
        }
    }

    /// First and last site holding a nonzero amplitude.
    pub fn support(&self) -> Option<(i64, i64)> {
        let nonzero = |i: &usize| self.u[*i] != ZERO || self.v[*i] != ZERO;
        let first = (0..self.len()).find(nonzero)?;
        let last = (0..self.len()).rev().find(nonzero)?;
        Some((self.n_min + first as i64, self.n_min + last as i64))
    }

    /// The single occupied site, if exactly one site is occupied.
    pub fn single_site(&self) -> Option<i64> {
        match self.support()? {
            (a, b) if a == b => Some(a),
            _ => None,
        }
    }

    /// Same field on a window grown by zeros.
    pub fn padded(&self, left: usize, right: usize) -> WalkState {
        let len = self.len() + left + right;
        let mut u = vec![ZERO; len];
        let mut v = vec![ZERO; len];
        u[left..left + self.len()].copy_from_slice(&self.u);
        v[left..left + self.len()].copy_from_slice(&self.v);
        WalkState {
            m: self.m,
            n_min: self.n_min - left as i64,
            u,
            v,
        }
    }

    /// Grows the window (never shrinks) so that it covers `[n_min, n_max]`.
    pub fn covering(&self, n_min: i64, n_max: i64) -> WalkState {
        let left = (self.n_min - n_min).max(0) as usize;
        let right = (n_max - self.n_max()).max(0) as usize;
        self.padded(left, right)
    }

    pub fn same_window(&self, other: &WalkState) -> bool {
        self.n_min == other.n_min && self.len() == other.len()
    }

    /// Multiplies every amplitude by `f(n)`; used for gauge and frame changes.
    pub fn modulated(&self, f: impl Fn(i64) -> Amp) -> WalkState {
        let mut out = self.clone();
        for (i, n) in self.positions().enumerate() {
            let g = f(n);
            out.u[i] *= g;
            out.v[i] *= g;
        }
        out
    }

    pub(crate) fn with_amplitudes(&self, u: Vec<Amp>, v: Vec<Amp>, m: usize) -> WalkState {
        debug_assert_eq!(u.len(), self.len());
        WalkState {
            m,
            n_min: self.n_min,
            u,
            v,
        }
    }
}

fn check_window(n_min: i64, n_max: i64) -> Result<()> {
    if n_min > n_max {
        return Err(Error::InvalidWindow { n_min, n_max });
    }
    Ok(())
}

/// Single-site start at `n0` with internal state `s`, normalized to 1.
pub fn make_initial(n0: i64, s: Spinor, window: (i64, i64)) -> Result<WalkState> {
    let (n_min, n_max) = window;
    check_window(n_min, n_max)?;
    if n0 < n_min || n0 > n_max {
        return Err(Error::PositionOutsideWindow { n0, n_min, n_max });
    }
    let s = s.normalized()?;
    let len = (n_max - n_min + 1) as usize;
    let mut u = vec![ZERO; len];
    let mut v = vec![ZERO; len];
    let idx = (n0 - n_min) as usize;
    u[idx] = s.up;
    v[idx] = s.down;
    Ok(WalkState { m: 0, n_min, u, v })
}

/// Smallest half-width around `n0` that keeps a Gaussian packet of the given
/// width below [`PACKET_EDGE_TOL`] on the window edge.
pub fn packet_half_width(width: f64) -> i64 {
    // exp(-d²/(4w²)) < tol  ⇔  d > 2w·sqrt(-ln tol); the unnormalized envelope
    // bounds the normalized one for width >= 1.
    (2.0 * width * (-PACKET_EDGE_TOL.ln()).sqrt()).ceil() as i64 + 1
}

/// Gaussian packet `exp(-(n-n0)²/(4w²))·exp(iκ₀n)` carried by the band
/// eigenvector at `κ₀`, normalized to 1.
pub fn make_packet(
    n0: i64,
    width: f64,
    kappa0: f64,
    band: Band,
    window: (i64, i64),
) -> Result<WalkState> {
    let (n_min, n_max) = window;
    check_window(n_min, n_max)?;
    if !(width >= 1.0) || !width.is_finite() {
        return Err(Error::InvalidWidth(width));
    }
    if !kappa0.is_finite() {
        return Err(Error::InvalidArgument(format!("kappa0 = {kappa0}")));
    }
    if n0 < n_min || n0 > n_max {
        return Err(Error::PositionOutsideWindow { n0, n_min, n_max });
    }
    let (plus, minus) = spectral::band_eigenvectors(kappa0);
    let e = match band {
        Band::Plus => plus,
        Band::Minus => minus,
    };
    let envelope = |n: i64| {
        let d = (n - n0) as f64;
        (-d * d / (4.0 * width * width)).exp()
    };
    let (u, v): (Vec<Amp>, Vec<Amp>) = (n_min..=n_max)
        .map(|n| {
            // Reduce κ₀·n mod 2π in the phase so large |n| keeps precision.
            let g = Amp::cis((kappa0 * n as f64).rem_euclid(TAU)) * envelope(n);
            (e.up * g, e.down * g)
        })
        .unzip();
    let state = WalkState { m: 0, n_min, u, v };
    let norm = state.norm_sqr().sqrt();
    if !(norm > 0.0) {
        return Err(Error::ZeroState);
    }
    let edge = envelope(n_min).max(envelope(n_max)) / norm;
    if edge >= PACKET_EDGE_TOL {
        return Err(Error::WindowTooSmall { amplitude: edge });
    }
    Ok(state.modulated(|_| Amp::new(1.0 / norm, 0.0)))
}

/// Applies one step with precomputed phase factors for the state's window.
fn advance(state: &WalkState, coin: &CoinOp, fu: &[Amp], fv: &[Amp]) -> Result<WalkState> {
    let [[c11, c12], [c21, c22]] = coin.entries;
    let len = state.len();
    let (u, v) = (&state.u, &state.v);

    let left_out = c11 * u[0] + c12 * v[0];
    if left_out != ZERO {
        return Err(Error::BoundaryCrossing {
            m: state.m,
            n: state.n_min,
        });
    }
    let right_out = c21 * u[len - 1] + c22 * v[len - 1];
    if right_out != ZERO {
        return Err(Error::BoundaryCrossing {
            m: state.m,
            n: state.n_max(),
        });
    }

    let mut nu = vec![ZERO; len];
    let mut nv = vec![ZERO; len];
    for j in 0..len - 1 {
        nu[j] = (c11 * u[j + 1] + c12 * v[j + 1]) * fu[j];
    }
    for j in 1..len {
        nv[j] = (c21 * u[j - 1] + c22 * v[j - 1]) * fv[j];
    }
    Ok(state.with_amplitudes(nu, nv, state.m + 1))
}

/// One application of coin, shift and phase on a fixed window.
pub fn step(state: &WalkState, coin: &CoinOp, phase: &PhaseProfile) -> Result<WalkState> {
    let (fu, fv) = phase.factors(state.n_min, state.n_max())?;
    advance(state, coin, &fu, &fv)
}

/// Ordered record of states. Every state shares one window.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    states: Vec<WalkState>,
}

impl Trajectory {
    pub fn from_states(states: Vec<WalkState>) -> Result<Self> {
        let first = states.first().ok_or(Error::EmptyTrajectory)?;
        if states.iter().any(|s| !s.same_window(first)) {
            return Err(Error::WindowMismatch);
        }
        if states.windows(2).any(|w| w[1].m <= w[0].m) {
            return Err(Error::InvalidArgument("step indices must increase".into()));
        }
        Ok(Trajectory { states })
    }

    pub fn states(&self) -> &[WalkState] {
        &self.states
    }

    pub fn initial(&self) -> &WalkState {
        &self.states[0]
    }

    pub fn last(&self) -> &WalkState {
        self.states.last().expect("nonempty")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn m_values(&self) -> Vec<usize> {
        self.states.iter().map(|s| s.m).collect()
    }

    /// True when entry `k` is step `m₀ + k`.
    pub fn is_dense(&self) -> bool {
        self.states.windows(2).all(|w| w[1].m == w[0].m + 1)
    }

    /// State recorded at step `m`.
    pub fn at_step(&self, m: usize) -> Option<&WalkState> {
        self.states
            .binary_search_by_key(&m, |s| s.m)
            .ok()
            .map(|i| &self.states[i])
    }

    pub fn grid(&self, kind: GridKind) -> IntensityGrid {
        let first = self.initial();
        IntensityGrid {
            n_min: first.n_min,
            width: first.len(),
            m_values: self.m_values(),
            data: self.states.iter().flat_map(|s| s.intensities(kind)).collect(),
        }
    }
}

/// Intensities `I[m][n]`, one row per recorded step.
#[derive(Clone, Debug, PartialEq)]
pub struct IntensityGrid {
    pub n_min: i64,
    pub width: usize,
    pub m_values: Vec<usize>,
    /// Row-major, `m_values.len() × width`.
    pub data: Vec<f64>,
}

impl IntensityGrid {
    pub fn n_max(&self) -> i64 {
        self.n_min + self.width as i64 - 1
    }

    pub fn rows(&self) -> usize {
        self.m_values.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.width..(r + 1) * self.width]
    }

    pub fn get(&self, m: usize, n: i64) -> Option<f64> {
        let r = self.m_values.iter().position(|&x| x == m)?;
        let c = usize::try_from(n - self.n_min).ok().filter(|&c| c < self.width)?;
        Some(self.data[r * self.width + c])
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// Entrywise sum; both grids must share shape.
    pub fn sum(&self, other: &IntensityGrid) -> Result<IntensityGrid> {
        if self.n_min != other.n_min || self.width != other.width || self.m_values != other.m_values {
            return Err(Error::WindowMismatch);
        }
        Ok(IntensityGrid {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }
}

/// Upper- and lower-loop grids from a memory-lean run.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPair {
    pub u: IntensityGrid,
    pub v: IntensityGrid,
}

impl GridPair {
    pub fn get(&self, kind: GridKind) -> Result<IntensityGrid> {
        Ok(match kind {
            GridKind::U => self.u.clone(),
            GridKind::V => self.v.clone(),
            GridKind::Total => self.u.sum(&self.v)?,
        })
    }
}

/// Grows the window so `steps` steps can never reach its edge.
fn prepare(state: &WalkState, steps: usize) -> Result<WalkState> {
    let (lo, hi) = state.support().ok_or(Error::ZeroState)?;
    let s = steps as i64;
    Ok(state.covering(lo - s, hi + s))
}

/// Runs `steps` steps and records every state.
pub fn evolve(
    state: &WalkState,
    steps: usize,
    coin: &CoinOp,
    phase: &PhaseProfile,
) -> Result<Trajectory> {
    evolve_recorded(state, steps, coin, phase, 1)
}

/// Runs `steps` steps and records the states with `m` a multiple of
/// `record_every` (counted from the initial state).
///
/// The window is grown once, up front, to the causal cone of the initial
/// support, so every recorded state shares the same window.
pub fn evolve_recorded(
    state: &WalkState,
    steps: usize,
    coin: &CoinOp,
    phase: &PhaseProfile,
    record_every: usize,
) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(steps / record_every.max(1) + 1);
    run(state, steps, coin, phase, record_every, |s| states.push(s.clone()))?;
    Ok(Trajectory { states })
}

/// Memory-lean evolution keeping only intensity grids.
pub fn evolve_grids(
    state: &WalkState,
    steps: usize,
    coin: &CoinOp,
    phase: &PhaseProfile,
    record_every: usize,
) -> Result<GridPair> {
    let mut m_values = Vec::new();
    let mut du = Vec::new();
    let mut dv = Vec::new();
    let mut window = (0, 0);
    run(state, steps, coin, phase, record_every, |s| {
        window = (s.n_min, s.len());
        m_values.push(s.m);
        du.extend(s.intensities(GridKind::U));
        dv.extend(s.intensities(GridKind::V));
    })?;
    let grid = |data| IntensityGrid {
        n_min: window.0,
        width: window.1,
        m_values: m_values.clone(),
        data,
    };
    Ok(GridPair {
        u: grid(du),
        v: grid(dv),
    })
}

fn run(
    state: &WalkState,
    steps: usize,
    coin: &CoinOp,
    phase: &PhaseProfile,
    record_every: usize,
    mut record: impl FnMut(&WalkState),
) -> Result<()> {
    if record_every == 0 {
        return Err(Error::InvalidArgument("record_every must be >= 1".into()));
    }
    let mut current = prepare(state, steps)?;
    let (fu, fv) = phase.factors(current.n_min, current.n_max())?;
    record(&current);
    for k in 1..=steps {
        current = advance(&current, coin, &fu, &fv)?;
        if k % record_every == 0 {
            record(&current);
        }
    }
    Ok(())
}

/// Squared overlap `|⟨a|b⟩|² / (‖a‖²‖b‖²)`; equals `|⟨a|b⟩|²` for unit-norm
/// states.
pub fn fidelity(a: &WalkState, b: &WalkState) -> Result<f64> {
    if !a.same_window(b) {
        return Err(Error::WindowMismatch);
    }
    let (na, nb) = (a.norm_sqr(), b.norm_sqr());
    if !(na > 0.0 && nb > 0.0) {
        return Err(Error::ZeroState);
    }
    let overlap: Amp = a
        .u
        .iter()
        .zip(&b.u)
        .chain(a.v.iter().zip(&b.v))
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok((overlap.norm_sqr() / (na * nb)).min(1.0))
}

/// `2π/p` as a float, for callers that only need the angle.
pub fn bloch_gradient(p: u64) -> f64 {
    2.0 * PI / p as f64
}
