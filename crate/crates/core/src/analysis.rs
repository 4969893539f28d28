//! Observables extracted from trajectories.

use std::f64::consts::{FRAC_PI_4, TAU};
use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{band_populations, to_comoving};
use crate::walk::{fidelity, GridKind, Loop, Trajectory, WalkState};

/// A named scalar series indexed by step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesReport {
    pub name: String,
    pub m_values: Vec<usize>,
    pub values: Vec<f64>,
    pub extracted_scalar: Option<f64>,
}

impl SeriesReport {
    pub fn new(name: impl Into<String>, m_values: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if m_values.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} step indices but {} values",
                m_values.len(),
                values.len()
            )));
        }
        if m_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("step indices must ascend".into()));
        }
        Ok(SeriesReport {
            name: name.into(),
            m_values,
            values,
            extracted_scalar: None,
        })
    }

    pub fn with_scalar(mut self, x: Option<f64>) -> Self {
        self.extracted_scalar = x;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entries with `m` in `range`.
    pub fn window(&self, range: RangeInclusive<usize>) -> SeriesReport {
        let (m_values, values) = self
            .m_values
            .iter()
            .zip(&self.values)
            .filter(|(m, _)| range.contains(m))
            .map(|(&m, &v)| (m, v))
            .unzip();
        SeriesReport {
            name: self.name.clone(),
            m_values,
            values,
            extracted_scalar: None,
        }
    }
}

/// Least-squares line `y = slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Pearson correlation; `None` when either input has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}

fn loop_energy(s: &WalkState, kind: GridKind) -> f64 {
    s.intensities(kind).iter().sum()
}

/// Energy in each loop, `E_u(m) = Σ|u_n|²` and `E_v(m) = Σ|v_n|²`.
pub fn loop_energy_series(traj: &Trajectory) -> (SeriesReport, SeriesReport) {
    let m = traj.m_values();
    let eu = traj.states().iter().map(|s| loop_energy(s, GridKind::U)).collect();
    let ev = traj.states().iter().map(|s| loop_energy(s, GridKind::V)).collect();
    (
        SeriesReport::new("energy_u", m.clone(), eu).expect("trajectory steps ascend"),
        SeriesReport::new("energy_v", m, ev).expect("trajectory steps ascend"),
    )
}

/// Period, in steps, of the strongest nonzero-frequency component.
///
/// The series is linearly detrended and Hann-windowed; the spectral peak is
/// found on the DFT bins and then refined on the continuous transform.
/// Assumes the samples are evenly spaced in `m`.
pub fn zitter_period(series: &SeriesReport) -> Result<f64> {
    const MIN_SAMPLES: usize = 16;
    let n = series.len();
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_SAMPLES,
            got: n,
        });
    }
    let spacing = (series.m_values[n - 1] - series.m_values[0]) as f64 / (n - 1) as f64;
    let x: Vec<f64> = series.m_values.iter().map(|&m| m as f64).collect();
    let fit = linear_fit(&x, &series.values).expect("at least two distinct steps");
    let resid: Vec<f64> = x
        .iter()
        .zip(&series.values)
        .map(|(xi, yi)| yi - (fit.slope * xi + fit.intercept))
        .collect();
    let scale = series.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if resid.iter().all(|r| r.abs() <= 1e-12 * scale.max(1e-300)) {
        return Err(Error::ConstantSeries);
    }

    // Hann-windowed spectrum: coarse peak on the DFT bins, then the
    // continuous transform is maximised inside the main lobe.
    let w: Vec<f64> = resid
        .iter()
        .enumerate()
        .map(|(j, r)| r * (0.5 - 0.5 * (TAU * j as f64 / (n - 1) as f64).cos()))
        .collect();
    let power = |k: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, r) in w.iter().enumerate() {
            let ang = TAU * k * j as f64 / n as f64;
            re += r * ang.cos();
            im -= r * ang.sin();
        }
        re * re + im * im
    };
    let half = n / 2;
    let peak = (1..=half)
        .map(|k| (k, power(k as f64)))
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .expect("half >= 8")
        .0;
    let (mut lo, mut hi) = ((peak as f64 - 1.0).max(0.5), (peak as f64 + 1.0).min(half as f64));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if power(a) < power(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    let k = 0.5 * (lo + hi);
    Ok(spacing * n as f64 / k)
}

/// Offset `m₀` of the hyperbola model: 3 for the upper loop, 1 for the lower.
pub fn hyperbola_offset(which: Loop) -> usize {
    match which {
        Loop::Upper => 3,
        Loop::Lower => 1,
    }
}

/// `cos[(π/4)(m - m₀) - n²/(2m)]`, the approximate field pattern inside the
/// ballistic cone; `n` is measured from the start site.
pub fn hyperbola_model(n: i64, m: usize, which: Loop) -> Result<f64> {
    if m == 0 || n.unsigned_abs() as usize >= m {
        return Err(Error::OutsideCone { n, m });
    }
    let m0 = hyperbola_offset(which) as f64;
    let mf = m as f64;
    let nf = n as f64;
    Ok((FRAC_PI_4 * (mf - m0) - nf * nf / (2.0 * mf)).cos())
}

/// One lattice point of the hyperbola comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperbolaSample {
    pub n: i64,
    pub m: usize,
    pub intensity: f64,
    pub model_sq: f64,
}

/// Points with `m` in `m_range` and `|n - n₀| ≤ cone_fraction·m` on the
/// sublattice the walker can reach (`n - n₀ - m` even).
pub fn hyperbola_samples(
    traj: &Trajectory,
    which: Loop,
    m_range: RangeInclusive<usize>,
    cone_fraction: f64,
) -> Result<Vec<HyperbolaSample>> {
    if !(cone_fraction > 0.0 && cone_fraction <= 0.7) {
        return Err(Error::InvalidArgument(format!(
            "cone_fraction must lie in (0, 0.7], got {cone_fraction}"
        )));
    }
    let n0 = traj.initial().single_site().ok_or(Error::NotSingleSite)?;
    let m_start = traj.initial().m();
    let kind = match which {
        Loop::Upper => GridKind::U,
        Loop::Lower => GridKind::V,
    };
    let mut out = Vec::new();
    for s in traj.states() {
        let m = s.m() - m_start;
        if !m_range.contains(&m) || m == 0 {
            continue;
        }
        let reach = cone_fraction * m as f64;
        for (n, i) in s.positions().zip(s.intensities(kind)) {
            let d = n - n0;
            if (d.abs() as f64) > reach || (d - m as i64).rem_euclid(2) != 0 {
                continue;
            }
            if let Ok(model) = hyperbola_model(d, m, which) {
                out.push(HyperbolaSample {
                    n,
                    m,
                    intensity: i,
                    model_sq: model * model,
                });
            }
        }
    }
    Ok(out)
}

/// Pearson correlation between the loop intensity and the squared hyperbola
/// model over the restricted cone.
pub fn hyperbola_match(
    traj: &Trajectory,
    which: Loop,
    m_range: RangeInclusive<usize>,
    cone_fraction: f64,
) -> Result<f64> {
    let samples = hyperbola_samples(traj, which, m_range, cone_fraction)?;
    let a: Vec<f64> = samples.iter().map(|s| s.intensity).collect();
    let b: Vec<f64> = samples.iter().map(|s| s.model_sq).collect();
    pearson(&a, &b).ok_or(Error::EmptyRegion)
}

/// Fidelity of every recorded state with the initial one.
pub fn fidelity_series(traj: &Trajectory) -> Result<SeriesReport> {
    let first = traj.initial();
    let values = traj
        .states()
        .iter()
        .map(|s| fidelity(first, s))
        .collect::<Result<Vec<_>>>()?;
    let peak = traj
        .m_values()
        .iter()
        .zip(&values)
        .skip(1)
        .fold(None::<(usize, f64)>, |best, (&m, &f)| match best {
            Some((_, bf)) if bf >= f => best,
            _ => Some((m, f)),
        });
    Ok(SeriesReport::new("fidelity", traj.m_values(), values)?
        .with_scalar(peak.map(|(m, _)| m as f64)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochRecovery {
    pub peak_step: usize,
    pub peak_fidelity: f64,
}

/// Step in `[1, 2p]` where the field comes closest to its initial state.
pub fn bloch_recovery(traj: &Trajectory, p: u64) -> Result<BlochRecovery> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be >= 1".into()));
    }
    let period = 2 * p as usize;
    if !traj.is_dense() {
        return Err(Error::SparseTrajectory);
    }
    if traj.len() < period + 1 {
        return Err(Error::TrajectoryTooShort {
            needed: period + 1,
            got: traj.len(),
        });
    }
    let first = traj.initial();
    let mut best = BlochRecovery {
        peak_step: 0,
        peak_fidelity: f64::NEG_INFINITY,
    };
    for (k, s) in traj.states().iter().enumerate().take(period + 1).skip(1) {
        let f = fidelity(first, s)?;
        if f > best.peak_fidelity {
            best = BlochRecovery {
                peak_step: k,
                peak_fidelity: f,
            };
        }
    }
    Ok(best)
}

/// Population that has left the initially occupied band, per recorded step.
///
/// Each state is moved into the frame drifting with the force, `m·α/2` after
/// `m` steps, and projected onto the band eigenvectors there. This assumes
/// the gradient is split evenly between the loops
/// ([`PhaseProfile::symmetric`](crate::walk::PhaseProfile::symmetric)), the
/// gauge in which the whole momentum distribution drifts uniformly. The
/// extracted scalar is the maximum transfer.
pub fn lz_transfer_series(traj: &Trajectory, alpha: f64) -> Result<SeriesReport> {
    let first = traj.initial();
    let (pp, pm) = band_populations(first, 0.0)?;
    let dominant = pp.max(pm);
    if dominant < 0.95 {
        return Err(Error::NotBandResolved { dominant });
    }
    let plus_start = pp >= pm;
    let m_start = first.m();
    let values = traj
        .states()
        .iter()
        .map(|s| {
            let offset = (s.m() - m_start) as f64 * alpha / 2.0;
            let (p, m) = band_populations(&to_comoving(s, offset), offset)?;
            Ok(if plus_start { m } else { p })
        })
        .collect::<Result<Vec<_>>>()?;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SeriesReport::new("lz_transfer", traj.m_values(), values)?.with_scalar(Some(max)))
}

fn spread(s: &WalkState) -> f64 {
    let (mut w, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (n, i) in s.positions().zip(s.intensities(GridKind::Total)) {
        let x = n as f64;
        w += i;
        m1 += x * i;
        m2 += x * x * i;
    }
    let mean = m1 / w;
    (m2 / w - mean * mean).max(0.0)
}

/// Fit of `σ(m)` against `m` over the recorded steps in `m_range`.
pub fn sigma_fit(traj: &Trajectory, m_range: RangeInclusive<usize>) -> Option<LinearFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = traj
        .states()
        .iter()
        .filter(|s| m_range.contains(&s.m()))
        .map(|s| (s.m() as f64, spread(s).sqrt()))
        .unzip();
    linear_fit(&x, &y)
}

/// Position variance `σ²(m)` of the total intensity. The extracted scalar is
/// the slope of `σ(m)` over the second half of the run.
pub fn variance_series(traj: &Trajectory) -> SeriesReport {
    let values = traj.states().iter().map(spread).collect();
    let (m0, m1) = (traj.initial().m(), traj.last().m());
    let slope = sigma_fit(traj, (m0 + m1).div_ceil(2)..=m1).map(|f| f.slope);
    SeriesReport::new("variance", traj.m_values(), values)
        .expect("trajectory steps ascend")
        .with_scalar(slope)
}

/// `max_m | |v_{n₀+m}|²·2^m - 1 |` for a `|↓⟩` single-site start.
pub fn corner_decay_check(traj: &Trajectory) -> Result<f64> {
    let first = traj.initial();
    let n0 = first.single_site().ok_or(Error::NotSingleSite)?;
    let (u0, _) = first.at(n0).expect("support lies in window");
    if u0.norm_sqr() != 0.0 {
        return Err(Error::NotSingleSite);
    }
    let mut worst: f64 = 0.0;
    for s in traj.states() {
        let m = s.m() - first.m();
        let (_, v) = s.at(n0 + m as i64).ok_or(Error::EmptyRegion)?;
        let scaled = v.norm_sqr() * 2f64.powi(m as i32);
        worst = worst.max((scaled - 1.0).abs());
    }
    Ok(worst)
}

/// Corner intensity series `|v_{n₀+m}|²`.
pub fn corner_series(traj: &Trajectory) -> Result<SeriesReport> {
    let first = traj.initial();
    let n0 = first.single_site().ok_or(Error::NotSingleSite)?;
    let values = traj
        .states()
        .iter()
        .map(|s| {
            s.at(n0 + (s.m() - first.m()) as i64)
                .map(|(_, v)| v.norm_sqr())
                .ok_or(Error::EmptyRegion)
        })
        .collect::<Result<Vec<_>>>()?;
    let err = corner_decay_check(traj)?;
    Ok(SeriesReport::new("corner", traj.m_values(), values)?.with_scalar(Some(err)))
}

/// Intensity-weighted mean distance `|n - n₀|` over the sites with
/// `|n - n₀| > radius`, together with the intensity found there.
pub fn outer_centroid(state: &WalkState, n0: i64, radius: f64) -> Option<(f64, f64)> {
    let (mut w, mut d) = (0.0, 0.0);
    for (n, i) in state.positions().zip(state.intensities(GridKind::Total)) {
        let dist = (n - n0).abs() as f64;
        if dist > radius {
            w += i;
            d += dist * i;
        }
    }
    (w > 0.0).then(|| (d / w, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::{
        evolve, make_initial, make_packet, packet_half_width, Band, CoinOp, Gradient,
        PhaseProfile, Spinor,
    };
    use std::f64::consts::PI;

    fn run(steps: usize, phase: PhaseProfile) -> Trajectory {
        let s = make_initial(0, Spinor::down(), (-(steps as i64), steps as i64)).unwrap();
        evolve(&s, steps, &CoinOp::balanced(), &phase).unwrap()
    }

    fn bloch(p: i64, steps: usize) -> Trajectory {
        run(steps, PhaseProfile::rational(1, p).unwrap())
    }

    #[test]
    fn loop_energy_first_steps() {
        let t = run(10, PhaseProfile::none());
        let (eu, ev) = loop_energy_series(&t);
        assert_eq!((eu.values[0], ev.values[0]), (0.0, 1.0));
        assert!((eu.values[1] - 0.5).abs() < 1e-15);
        assert!((ev.values[1] - 0.5).abs() < 1e-15);
        for (a, b) in eu.values.iter().zip(&ev.values) {
            assert!((a + b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn period_of_synthetic_cosine() {
        let m: Vec<usize> = (0..=40).collect();
        let v = m.iter().map(|&k| (TAU * k as f64 / 4.0).cos()).collect();
        let s = SeriesReport::new("cos", m, v).unwrap();
        let p = zitter_period(&s).unwrap();
        assert!((p - 4.0).abs() < 0.01, "{p}");
    }

    #[test]
    fn period_errors() {
        let s = SeriesReport::new("flat", (0..20).collect(), vec![0.3; 20]).unwrap();
        assert!(matches!(zitter_period(&s), Err(Error::ConstantSeries)));
        let s = SeriesReport::new("short", (0..10).collect(), vec![0.0; 10]).unwrap();
        assert!(matches!(zitter_period(&s), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn zitterbewegung_period_is_four() {
        let t = run(40, PhaseProfile::none());
        let p = zitter_period(&loop_energy_series(&t).0).unwrap();
        assert!((p - 4.0).abs() <= 0.2, "{p}");
    }

    #[test]
    fn strong_gradient_shifts_zitter_period() {
        let t = run(40, PhaseProfile::rational(1, 5).unwrap());
        let p = zitter_period(&loop_energy_series(&t).0).unwrap();
        // Frozen from the first verified run.
        assert!((p - 4.0).abs() > 0.5, "{p}");
        assert!((p - 2.5004).abs() < 1e-3, "{p}");
    }

    #[test]
    fn hyperbola_model_values() {
        assert_eq!(hyperbola_model(0, 3, Loop::Upper).unwrap(), 1.0);
        // Zeros of the lower-loop model on the axis: (π/4)(m - 1) an odd
        // multiple of π/2, i.e. m ≡ 3 (mod 4).
        for m in [3usize, 7, 11, 15] {
            assert!(hyperbola_model(0, m, Loop::Lower).unwrap().abs() < 1e-12);
        }
        assert!(matches!(
            hyperbola_model(5, 5, Loop::Lower),
            Err(Error::OutsideCone { .. })
        ));
    }

    #[test]
    fn hyperbola_zero_curves_are_nested() {
        // Along the zero set (π/4)(m - m₀) - n²/(2m) = (k + ½)π the model vanishes.
        for k in 0..5 {
            for m in [40usize, 55, 70] {
                let mf = m as f64;
                let n2 = 2.0 * mf * (FRAC_PI_4 * (mf - 1.0) - (k as f64 + 0.5) * PI);
                if n2 < 0.0 {
                    continue;
                }
                let n = n2.sqrt();
                let val = (FRAC_PI_4 * (mf - 1.0) - n * n / (2.0 * mf)).cos();
                assert!(val.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn hyperbola_self_and_noise_correlation() {
        let t = run(70, PhaseProfile::none());
        let samples = hyperbola_samples(&t, Loop::Lower, 20..=70, 0.5).unwrap();
        let model: Vec<f64> = samples.iter().map(|s| s.model_sq).collect();
        assert!((pearson(&model, &model).unwrap() - 1.0).abs() < 1e-12);
        let mut state = 0x9E37_79B9_7F4A_7C15u64;
        let mut noisy = 0;
        for _ in 0..50 {
            let noise: Vec<f64> = model
                .iter()
                .map(|_| {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    (state >> 11) as f64 / (1u64 << 53) as f64
                })
                .collect();
            if pearson(&noise, &model).unwrap().abs() >= 0.1 {
                noisy += 1;
            }
        }
        assert!(noisy <= 1, "{noisy} of 50 noise grids correlated");
    }

    #[test]
    fn hyperbola_match_measured_values() {
        // Frozen from the first verified run; see the acceptance suite for
        // the threshold discussion.
        let t = run(70, PhaseProfile::none());
        let v = hyperbola_match(&t, Loop::Lower, 20..=70, 0.5).unwrap();
        let u = hyperbola_match(&t, Loop::Upper, 20..=70, 0.5).unwrap();
        assert!((v + 0.5117).abs() < 1e-3, "{v}");
        assert!((u + 0.5970).abs() < 1e-3, "{u}");
        assert!(hyperbola_match(&t, Loop::Lower, 20..=70, 0.8).is_err());
        assert!(matches!(
            hyperbola_match(&t, Loop::Lower, 100..=120, 0.5),
            Err(Error::EmptyRegion)
        ));
    }

    #[test]
    fn bloch_peaks_at_twice_p() {
        for (p, steps) in [(4u64, 8usize), (8, 16), (16, 32), (32, 64)] {
            let r = bloch_recovery(&bloch(p as i64, steps), p).unwrap();
            assert_eq!(r.peak_step, 2 * p as usize, "p = {p}");
        }
        assert!(matches!(
            bloch_recovery(&bloch(8, 10), 8),
            Err(Error::TrajectoryTooShort { .. })
        ));
    }

    #[test]
    fn fidelity_without_gradient_never_recovers() {
        let t = run(70, PhaseProfile::none());
        let f = fidelity_series(&t).unwrap();
        let late = f.window(4..=70);
        let max = late.values.iter().copied().fold(0.0, f64::max);
        assert!(max < 0.5, "{max}");
    }

    #[test]
    fn fidelity_peaks_at_recovery() {
        let t = bloch(32, 64);
        let f = fidelity_series(&t).unwrap();
        assert_eq!(f.extracted_scalar, Some(64.0));
        let at64 = f.values[64];
        for m in (2..64).step_by(2) {
            assert!(f.values[m] < at64);
        }
    }

    #[test]
    fn irrational_gradient_recovers_slightly_worse() {
        let exact = bloch_recovery(&bloch(32, 64), 32).unwrap();
        let alpha = TAU / 32.0 * (1.0 + 1e-3);
        let t = run(64, PhaseProfile::float(alpha).unwrap());
        let off = bloch_recovery(&t, 32).unwrap();
        assert!(off.peak_fidelity < exact.peak_fidelity);
        assert!(off.peak_fidelity / exact.peak_fidelity > 0.9);
    }

    #[test]
    fn ballistic_spreading() {
        let t = run(70, PhaseProfile::none());
        let var = variance_series(&t);
        assert_eq!(var.values[0], 0.0);
        let fit = sigma_fit(&t, 20..=70).unwrap();
        assert!(fit.r_squared > 0.999, "{fit:?}");
        assert!(fit.slope > 0.0);
        assert!(var.extracted_scalar.unwrap() > 0.4);
    }

    #[test]
    fn bloch_spread_returns_to_start() {
        let t = bloch(32, 70);
        let sigma: Vec<f64> = variance_series(&t).values.iter().map(|v| v.sqrt()).collect();
        let max = sigma.iter().copied().fold(0.0, f64::max);
        assert!(sigma[64] < 1e-2 * max, "{} vs {max}", sigma[64]);
    }

    #[test]
    fn corner_decay_is_exact() {
        for phase in [
            PhaseProfile::none(),
            PhaseProfile::rational(1, 32).unwrap(),
            PhaseProfile::rational(1, 5).unwrap(),
        ] {
            let t = run(70, phase);
            assert!(corner_decay_check(&t).unwrap() < 1e-9);
        }
        let t = run(10, PhaseProfile::none());
        let c = corner_series(&t).unwrap();
        assert!((c.values[10] - 2f64.powi(-10)).abs() < 1e-18);
        let up = make_initial(0, Spinor::up(), (-3, 3)).unwrap();
        let t = evolve(&up, 3, &CoinOp::balanced(), &PhaseProfile::none()).unwrap();
        assert!(corner_decay_check(&t).is_err());
    }

    fn packet_run(grad: Gradient, steps: usize) -> Trajectory {
        let h = packet_half_width(10.0);
        let p = make_packet(0, 10.0, 0.0, Band::Plus, (-h, h)).unwrap();
        evolve(&p, steps, &CoinOp::balanced(), &PhaseProfile::symmetric(grad)).unwrap()
    }

    #[test]
    fn lz_transfer_constant_without_gradient() {
        let t = packet_run(Gradient::ZERO, 30);
        let s = lz_transfer_series(&t, 0.0).unwrap();
        for v in &s.values {
            assert!((v - s.values[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn lz_transfer_grows_with_gradient() {
        let weak = lz_transfer_series(&packet_run(Gradient::rational(1, 32).unwrap(), 64), TAU / 32.0)
            .unwrap();
        let strong = lz_transfer_series(&packet_run(Gradient::rational(1, 5).unwrap(), 10), TAU / 5.0)
            .unwrap();
        let (w, s) = (weak.extracted_scalar.unwrap(), strong.extracted_scalar.unwrap());
        assert!(w < s, "{w} vs {s}");
        assert!(s > 0.1, "{s}");
    }

    #[test]
    fn lz_requires_band_resolved_start() {
        let t = run(4, PhaseProfile::none());
        assert!(matches!(
            lz_transfer_series(&t, 0.1),
            Err(Error::NotBandResolved { .. })
        ));
    }

    #[test]
    fn tunneled_light_sits_about_p_sites_out() {
        for p in [4i64, 5, 6, 8] {
            let t = bloch(p, 2 * p as usize);
            let (c, _) = outer_centroid(t.last(), 0, p as f64 / 2.0).unwrap();
            let ratio = c / p as f64;
            assert!((0.5..=1.5).contains(&ratio), "p = {p}: {ratio}");
        }
    }

    #[test]
    fn linear_fit_and_pearson() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15 && (f.intercept - 1.0).abs() < 1e-15);
        assert!((f.r_squared - 1.0).abs() < 1e-15);
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        assert!(pearson(&x, &[2.0; 4]).is_none());
    }
}
