//! Discrete Fourier transform of sampled correlation series, peak
//! refinement and error propagation.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, QsimError, Result};

/// Default relative threshold for peak detection.
pub const DEFAULT_PEAK_THRESHOLD: f64 = 0.1;
/// Refinement is declined when `|S_l - S_{l+1}|` falls below this times `max |S|`.
pub const DEFAULT_DENOM_TOL: f64 = 1e-9;

/// Samples `S(t_j)` at `t_j = (first + k) dt`, `k = 0..M-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub dt: f64,
    pub first: usize,
    pub values: Vec<C64>,
    /// Per-point standard deviation `E_S`, if known.
    pub err: Option<f64>,
}

impl TimeSeries {
    /// Series on `t_j = j dt`, `j = 1..M`.
    pub fn new(dt: f64, values: Vec<C64>) -> Result<Self> {
        TimeSeries::with_first(dt, 1, values)
    }

    pub fn with_first(dt: f64, first: usize, values: Vec<C64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return invalid("time step must be positive");
        }
        if values.len() < 2 {
            return invalid("a series needs at least two samples");
        }
        Ok(TimeSeries {
            dt,
            first,
            values,
            err: None,
        })
    }

    pub fn with_error(mut self, e_s: f64) -> Self {
        self.err = Some(e_s);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        (self.first + k) as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    /// CSV with columns `t,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re,im\n");
        for (k, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", fmt_sci(self.time(k)), fmt_sci(v.re), fmt_sci(v.im)));
        }
        out
    }

    /// Parse `t,re,im` rows; the grid must be uniform with `t_j = j dt`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with('t')) {
                continue;
            }
            let f: Vec<f64> = line
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| QsimError::Parse(format!("line {}: bad number", i + 1)))?;
            if f.len() != 3 {
                return Err(QsimError::Parse(format!("line {}: expected 3 columns", i + 1)));
            }
            rows.push(f);
        }
        if rows.len() < 2 {
            return invalid("a series needs at least two samples");
        }
        let dt = rows[1][0] - rows[0][0];
        if !(dt > 0.0) {
            return invalid("time grid must be increasing");
        }
        for (k, r) in rows.iter().enumerate() {
            let expect = rows[0][0] + k as f64 * dt;
            if (r[0] - expect).abs() > 1e-9 * (1.0 + expect.abs()) {
                return invalid(format!("non-uniform time grid at row {}", k + 1));
            }
        }
        let first_f = rows[0][0] / dt;
        let first = first_f.round();
        if (first_f - first).abs() > 1e-6 || first < 0.0 {
            return invalid("time grid is not of the form t_j = j dt");
        }
        TimeSeries::with_first(dt, first as usize, rows.iter().map(|r| C64::new(r[1], r[2])).collect())
    }
}

/// C-style `%.12e` formatting (`1.000000000000e+00`).
pub fn fmt_sci(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.12e}", x);
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", e.abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub bin: usize,
    /// Refined eigenvalue estimate.
    pub lambda: f64,
    /// Estimated `|gamma_n|^2`.
    pub weight: f64,
    /// Frequency error bound `2 pi / (M dt)`.
    pub err_freq: f64,
    /// Amplitude error `E_S / sqrt(M)` (zero without a series error).
    pub err_amp: f64,
    pub refined: bool,
    /// Another peak lies within two bins; reported at the bin centre.
    pub crowded: bool,
}

/// The four fields of the peak report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub lambda: f64,
    pub weight: f64,
    pub err_freq: f64,
    pub err_amp: f64,
}

impl From<&Peak> for PeakReport {
    fn from(p: &Peak) -> Self {
        PeakReport {
            lambda: p.lambda,
            weight: p.weight,
            err_freq: p.err_freq,
            err_amp: p.err_amp,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub dt: f64,
    pub m: usize,
    /// `S~(eta_l)` for `l = 0..M-1`.
    pub amplitudes: Vec<C64>,
    pub err: Option<f64>,
}

impl Spectrum {
    /// Bin spacing `2 pi / (M dt)`.
    pub fn resolution(&self) -> f64 {
        2.0 * PI / (self.m as f64 * self.dt)
    }

    /// `eta_l = 2 pi l / (M dt)` without wrapping.
    pub fn raw_frequency(&self, l: usize) -> f64 {
        l as f64 * self.resolution()
    }

    /// `eta_l` folded into `(-nu_c/2, nu_c/2]` with `nu_c = 2 pi / dt`.
    pub fn frequency(&self, l: usize) -> f64 {
        let l = l % self.m;
        if 2 * l <= self.m {
            self.raw_frequency(l)
        } else {
            self.raw_frequency(l) - 2.0 * PI / self.dt
        }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.m).map(|l| self.frequency(l)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    fn at(&self, l: isize) -> C64 {
        self.amplitudes[l.rem_euclid(self.m as isize) as usize]
    }

    /// CSV with columns `eta,re,im` in ascending frequency order.
    pub fn to_csv(&self) -> String {
        let mut idx: Vec<usize> = (0..self.m).collect();
        idx.sort_by(|&a, &b| self.frequency(a).total_cmp(&self.frequency(b)));
        let mut out = String::from("eta,re,im\n");
        for l in idx {
            let a = self.amplitudes[l];
            out.push_str(&format!("{},{},{}\n", fmt_sci(self.frequency(l)), fmt_sci(a.re), fmt_sci(a.im)));
        }
        out
    }
}

/// `S~(eta_l) = dt sum_j S(t_j) exp(i eta_l t_j)`, evaluated as a direct sum.
pub fn dft(series: &TimeSeries) -> Result<Spectrum> {
    let m = series.len();
    if m < 2 {
        return invalid("a series needs at least two samples");
    }
    let mut amps = Vec::with_capacity(m);
    for l in 0..m {
        let mut acc = C64::new(0.0, 0.0);
        for (k, s) in series.values.iter().enumerate() {
            // eta_l t_j = 2 pi l j / M exactly
            let j = (series.first + k) as u128;
            let r = ((l as u128 * j) % m as u128) as f64;
            acc += s * C64::from_polar(1.0, 2.0 * PI * r / m as f64);
        }
        amps.push(acc * series.dt);
    }
    Ok(Spectrum {
        dt: series.dt,
        m,
        amplitudes: amps,
        err: series.err,
    })
}

/// Outcome of a single refinement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Refinement {
    pub lambda: f64,
    /// False when the denominator was too small and the bin centre was returned.
    pub refined: bool,
    /// The lower bin of the pair used, so `lambda` lies near `[eta_base, eta_base+1]`.
    pub base: usize,
}

/// Refine the peak at bin `l` with
/// `dlambda = -(2 pi / (M dt)) Re[S_{l+1} / (S_l - S_{l+1})]` applied to the
/// pair bracketing the eigenvalue (the larger neighbour decides the side).
pub fn refine_peak(spec: &Spectrum, l: usize, denom_tol: f64) -> Result<Refinement> {
    if l >= spec.m {
        return Err(QsimError::OutOfRange { index: l, limit: spec.m });
    }
    let li = l as isize;
    let base = if spec.at(li - 1).norm() > spec.at(li + 1).norm() {
        li - 1
    } else {
        li
    };
    let base_u = base.rem_euclid(spec.m as isize) as usize;
    let s0 = spec.at(base);
    let s1 = spec.at(base + 1);
    let denom = s0 - s1;
    if denom.norm() < denom_tol * spec.max_abs() {
        return Ok(Refinement {
            lambda: spec.frequency(l),
            refined: false,
            base: base_u,
        });
    }
    let dl = -spec.resolution() * (s1 / denom).re;
    Ok(Refinement {
        lambda: spec.frequency(base_u) + dl,
        refined: true,
        base: base_u,
    })
}

/// `(E S~, E eta)`: amplitude error `E_S / sqrt(M)` and frequency bound `2 pi / (M dt)`.
pub fn error_bars(series: &TimeSeries) -> Result<(f64, f64)> {
    let e_s = series.err.unwrap_or(0.0);
    if e_s < 0.0 {
        return invalid("E_S must be non-negative");
    }
    let m = series.len() as f64;
    Ok((e_s / m.sqrt(), 2.0 * PI / (m * series.dt)))
}

/// Dirichlet kernel magnitude `|sin(M x dt/2) / sin(x dt/2)|` (equals M at x = 0).
fn dirichlet(m: usize, x: f64, dt: f64) -> f64 {
    let h = x * dt / 2.0;
    if h.sin().abs() < 1e-12 {
        return m as f64;
    }
    ((m as f64 * h).sin() / h.sin()).abs()
}

/// Local maxima of `|S~|` above `threshold * max|S~|`, refined unless crowded.
pub fn find_peaks(spec: &Spectrum, threshold: f64, denom_tol: f64) -> Result<Vec<Peak>> {
    let mx = spec.max_abs();
    let mut bins = Vec::new();
    for l in 0..spec.m {
        let a = spec.amplitudes[l].norm();
        let li = l as isize;
        if a >= threshold * mx && a > spec.at(li - 1).norm() && a >= spec.at(li + 1).norm() && a > 0.0 {
            bins.push(l);
        }
    }
    let circ = |a: usize, b: usize| {
        let d = a.abs_diff(b);
        d.min(spec.m - d)
    };
    let (e_amp, e_freq) = (
        spec.err.unwrap_or(0.0) / (spec.m as f64).sqrt(),
        spec.resolution(),
    );
    let mut peaks = Vec::new();
    for &l in &bins {
        let crowded = bins.iter().any(|&o| o != l && circ(o, l) <= 2);
        let (lambda, refined) = if crowded {
            (spec.frequency(l), false)
        } else {
            let r = refine_peak(spec, l, denom_tol)?;
            (r.lambda, r.refined)
        };
        let x = spec.frequency(l) - lambda;
        let weight = spec.amplitudes[l].norm() / (spec.dt * dirichlet(spec.m, x, spec.dt));
        peaks.push(Peak {
            bin: l,
            lambda,
            weight,
            err_freq: e_freq,
            err_amp: e_amp,
            refined,
            crowded,
        });
    }
    peaks.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(peaks)
}

pub fn peaks_json(peaks: &[Peak]) -> String {
    let reports: Vec<PeakReport> = peaks.iter().map(PeakReport::from).collect();
    serde_json::to_string_pretty(&reports).expect("plain data serialises")
}
