//! Nonlinear least-squares fitting of coincidence histograms and FP scans.
//!
//! Fits minimize `Σ w_i (y_i − model(x_i; p))²` with the bounded simplex from
//! [`crate::simplex`]. Weights are `1/σ_i²` when standard errors are given and
//! 1 otherwise. The covariance estimate comes from the Gauss–Newton
//! approximation `(JᵀWJ)⁻¹` at the optimum, scaled by the residual variance
//! for unweighted fits.

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::simplex::{self, Bounds, SimplexOptions};
use crate::spectroscopy::{lorentzian_part, reabsorbed_unchecked};
use crate::units::rad_per_s_to_mhz;

pub mod synthetic;

/// Observations `y(x)` with optional standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSeries {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub y_err: Option<Vec<f64>>,
}

impl DataSeries {
    pub fn new(x: Vec<f64>, y: Vec<f64>, y_err: Option<Vec<f64>>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(invalid(format!("x has {} points, y has {}", x.len(), y.len())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(invalid("abscissae must be finite"));
        }
        if y.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("observations must be finite and non-negative"));
        }
        if let Some(e) = &y_err {
            if e.len() != x.len() {
                return Err(invalid("y_err length differs from data length"));
            }
            if e.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(invalid("standard errors must be positive"));
            }
        }
        Ok(Self { x, y, y_err })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Copy sorted by (x, y, err), so fits do not depend on input order.
    fn canonical(&self) -> DataSeries {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        let err = |i: usize| self.y_err.as_ref().map_or(0.0, |e| e[i]);
        idx.sort_by(|&a, &b| {
            self.x[a]
                .total_cmp(&self.x[b])
                .then(self.y[a].total_cmp(&self.y[b]))
                .then(err(a).total_cmp(&err(b)))
        });
        DataSeries {
            x: idx.iter().map(|&i| self.x[i]).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            y_err: self.y_err.as_ref().map(|e| idx.iter().map(|&i| e[i]).collect()),
        }
    }

    fn weights(&self) -> Vec<f64> {
        match &self.y_err {
            Some(e) => e.iter().map(|s| 1.0 / (s * s)).collect(),
            None => vec![1.0; self.len()],
        }
    }
}

/// One fit parameter: start value and box.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: String,
    pub initial: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ParamSpec {
    pub fn new(name: &str, initial: f64, lower: f64, upper: f64) -> Self {
        Self {
            name: name.to_string(),
            initial,
            lower,
            upper,
        }
    }

    pub fn free(name: &str, initial: f64) -> Self {
        Self::new(name, initial, f64::NEG_INFINITY, f64::INFINITY)
    }

    fn is_fixed(&self) -> bool {
        self.lower == self.upper
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    /// `sqrt(Σ w r²)` at the optimum.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
    /// Norm of the projected objective gradient in scaled coordinates.
    pub gradient_norm: f64,
    pub covariance: Option<Vec<Vec<f64>>>,
    /// Best weighted sum of squares after every simplex iteration.
    pub history: Vec<f64>,
    /// Derived quantities reported alongside the parameters.
    pub derived: Vec<(String, f64)>,
}

impl FitResult {
    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.index(name)
            .map(|i| self.values[i])
            .or_else(|| self.derived.iter().find(|(n, _)| n == name).map(|(_, v)| *v))
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        let i = self.index(name)?;
        self.covariance.as_ref().map(|c| c[i][i].max(0.0).sqrt())
    }

    /// Map parameter `i` through `p ↦ scale·p + offset`, covariance included.
    fn affine(&mut self, i: usize, scale: f64, offset: f64) {
        self.values[i] = scale * self.values[i] + offset;
        if let Some(c) = &mut self.covariance {
            for row in c.iter_mut() {
                row[i] *= scale;
            }
            for v in c[i].iter_mut() {
                *v *= scale;
            }
        }
    }
}

/// Weighted least squares over a bounded box, derivative free.
///
/// Parameters with `lower == upper` are held fixed. Fails on invalid input;
/// a fit that hits the iteration cap is returned with `converged == false`.
pub fn least_squares<M>(model: M, data: &DataSeries, params: &[ParamSpec]) -> Result<FitResult>
where
    M: Fn(f64, &[f64]) -> f64,
{
    least_squares_with(model, data, params, &SimplexOptions::default())
}

pub fn least_squares_with<M>(
    model: M,
    data: &DataSeries,
    params: &[ParamSpec],
    options: &SimplexOptions,
) -> Result<FitResult>
where
    M: Fn(f64, &[f64]) -> f64,
{
    let n_free = params.iter().filter(|p| !p.is_fixed()).count();
    if data.len() < n_free + 1 {
        return Err(invalid(format!(
            "{} data points cannot determine {n_free} free parameters",
            data.len()
        )));
    }
    for p in params {
        if p.lower.is_nan() || p.upper.is_nan() || p.lower > p.upper {
            return Err(invalid(format!("invalid bounds for parameter {}", p.name)));
        }
        if !(p.initial.is_finite() && p.initial >= p.lower && p.initial <= p.upper) {
            return Err(invalid(format!(
                "initial value {} of {} lies outside [{}, {}]",
                p.initial, p.name, p.lower, p.upper
            )));
        }
    }

    let data = data.canonical();
    let weights = data.weights();
    let sse = |p: &[f64]| -> f64 {
        data.x
            .iter()
            .zip(&data.y)
            .zip(&weights)
            .map(|((x, y), w)| {
                let r = y - model(*x, p);
                w * r * r
            })
            .sum()
    };

    // work in coordinates scaled by each parameter's magnitude
    let scales: Vec<f64> = params
        .iter()
        .map(|p| if p.initial != 0.0 { p.initial.abs() } else { 1.0 })
        .collect();
    let to_params = |u: &[f64]| -> Vec<f64> { u.iter().zip(&scales).map(|(u, s)| u * s).collect() };
    let start: Vec<f64> = params.iter().zip(&scales).map(|(p, s)| p.initial / s).collect();
    let steps: Vec<f64> = params.iter().map(|p| if p.is_fixed() { 0.0 } else { 0.1 }).collect();
    let bounds = Bounds {
        lower: params.iter().zip(&scales).map(|(p, s)| p.lower / s).collect(),
        upper: params.iter().zip(&scales).map(|(p, s)| p.upper / s).collect(),
    };

    let outcome = simplex::minimize(|u| sse(&to_params(u)), &start, &steps, &bounds, options);
    let best = to_params(&outcome.x);
    let value = outcome.value;

    let gradient_norm = projected_gradient_norm(&|u: &[f64]| sse(&to_params(u)), &outcome.x, &steps, &bounds);
    let data_energy: f64 = data.y.iter().zip(&weights).map(|(y, w)| w * y * y).sum();
    let converged =
        outcome.converged && value.is_finite() && gradient_norm <= 1e-6 * (data_energy + value);

    let covariance = covariance_estimate(&model, &data, &weights, params, &best, &scales, value);

    Ok(FitResult {
        names: params.iter().map(|p| p.name.clone()).collect(),
        values: best,
        residual_norm: value.sqrt(),
        converged,
        iterations: outcome.iterations,
        evaluations: outcome.evaluations,
        gradient_norm,
        covariance,
        history: outcome.history,
        derived: Vec::new(),
    })
}

fn projected_gradient_norm(f: &dyn Fn(&[f64]) -> f64, u: &[f64], steps: &[f64], bounds: &Bounds) -> f64 {
    let mut sum = 0.0;
    for i in 0..u.len() {
        if steps[i] == 0.0 {
            continue;
        }
        let h = 1e-6 * u[i].abs().max(1.0);
        let mut up = u.to_vec();
        let mut down = u.to_vec();
        up[i] = (u[i] + h).min(bounds.upper[i]);
        down[i] = (u[i] - h).max(bounds.lower[i]);
        if up[i] == down[i] {
            continue;
        }
        let g = (f(&up) - f(&down)) / (up[i] - down[i]);
        let at_lower = u[i] <= bounds.lower[i] && g > 0.0;
        let at_upper = u[i] >= bounds.upper[i] && g < 0.0;
        if !(at_lower || at_upper) {
            sum += g * g;
        }
    }
    sum.sqrt()
}

fn covariance_estimate<M: Fn(f64, &[f64]) -> f64>(
    model: &M,
    data: &DataSeries,
    weights: &[f64],
    params: &[ParamSpec],
    best: &[f64],
    scales: &[f64],
    sse: f64,
) -> Option<Vec<Vec<f64>>> {
    let free: Vec<usize> = (0..params.len()).filter(|&i| !params[i].is_fixed()).collect();
    let n = data.len();
    let k = free.len();
    if k == 0 || n <= k {
        return None;
    }
    let mut jac = DMatrix::<f64>::zeros(n, k);
    for (col, &j) in free.iter().enumerate() {
        let h = 1e-6 * best[j].abs().max(scales[j]);
        let mut up = best.to_vec();
        let mut down = best.to_vec();
        up[j] += h;
        down[j] -= h;
        for (row, x) in data.x.iter().enumerate() {
            let d = (model(*x, &up) - model(*x, &down)) / (2.0 * h);
            jac[(row, col)] = d * weights[row].sqrt();
        }
    }
    if jac.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let info = jac.transpose() * &jac;
    let inv = info.try_inverse()?;
    let variance = if data.y_err.is_some() { 1.0 } else { sse / (n - k) as f64 };
    let mut cov = vec![vec![0.0; params.len()]; params.len()];
    for (a, &i) in free.iter().enumerate() {
        for (b, &j) in free.iter().enumerate() {
            cov[i][j] = inv[(a, b)] * variance;
        }
    }
    Some(cov)
}

/// Expected counts in a bin `[lo, hi]` for `amplitude · e^{−γ(t−t0)} Θ(t−t0)`.
fn binned_decay(lo: f64, hi: f64, amplitude: f64, gamma: f64, t0: f64) -> f64 {
    if hi <= t0 {
        return 0.0;
    }
    let start = lo.max(t0);
    // amplitude ∫_start^hi e^{−γ(s−t0)} ds, stable for small γ
    let width = hi - start;
    let head = (-gamma * (start - t0)).exp();
    let integral = if gamma * width < 1e-8 {
        width * (1.0 - 0.5 * gamma * width)
    } else {
        -(-gamma * width).exp_m1() / gamma
    };
    amplitude * head * integral
}

/// Fit a herald-triggered exponential decay to a coincidence histogram.
///
/// `hist.x` holds bin centres (seconds) and `hist.y` counts. The model is the
/// bin-integrated `A e^{−Γp(t−t0)} Θ(t−t0)`, with the bin width taken from the
/// median centre spacing. Parameters: `gamma_p` (rad/s, intensity decay rate),
/// `t0` (s) and `amplitude` (counts per bin width at `t0`). `gamma_p_mhz` is
/// reported as a derived value.
pub fn fit_exponential_decay(hist: &DataSeries) -> Result<FitResult> {
    if hist.len() < 4 {
        return Err(invalid("histogram needs at least four bins"));
    }
    let data = hist.canonical();
    let width = median_spacing(&data.x)?;
    let (peak_idx, peak) = data
        .y
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let decays = data.y[peak_idx + 1..].iter().any(|v| *v < peak);
    if !(peak > 0.0) || peak_idx + 1 >= data.len() || !decays {
        return Err(Error::NoDecay);
    }

    // scaled units: time in bins relative to the peak bin, counts relative to peak
    let origin = data.x[peak_idx];
    let scaled = DataSeries {
        x: data.x.iter().map(|x| (x - origin) / width).collect(),
        y: data.y.iter().map(|y| y / peak).collect(),
        y_err: data.y_err.as_ref().map(|e| e.iter().map(|v| v / peak).collect()),
    };

    let edge = scaled
        .y
        .iter()
        .position(|v| *v >= 0.5)
        .map_or(-0.5, |i| scaled.x[i] - 0.5);
    let gamma0 = log_slope(&scaled.x[peak_idx..], &scaled.y[peak_idx..]).unwrap_or(0.1);
    let amp0 = gamma0 / -(-gamma0).exp_m1();
    let x_first = scaled.x[0];
    let x_last = scaled.x[scaled.len() - 1];

    let params = [
        ParamSpec::new("gamma_p", gamma0, 1e-9, f64::INFINITY),
        ParamSpec::new("t0", edge, x_first - 1.0, x_last),
        ParamSpec::new("amplitude", amp0, 0.0, f64::INFINITY),
    ];
    let model = |x: f64, p: &[f64]| binned_decay(x - 0.5, x + 0.5, p[2], p[0], p[1]);
    let mut fit = least_squares(model, &scaled, &params)?;

    fit.affine(0, 1.0 / width, 0.0);
    fit.affine(1, width, origin);
    fit.affine(2, peak, 0.0);
    let gamma_p = fit.values[0];
    fit.derived.push(("gamma_p_mhz".into(), rad_per_s_to_mhz(gamma_p)));
    Ok(fit)
}

/// Expected counts of the decay model for bins of `width` centred at `centers`.
pub fn decay_model_counts(centers: &[f64], width: f64, gamma_p: f64, t0: f64, amplitude_per_bin: f64) -> Vec<f64> {
    // amplitude is counts per bin width, the model integrates a density
    let density = amplitude_per_bin / width;
    centers
        .iter()
        .map(|c| binned_decay(c - 0.5 * width, c + 0.5 * width, density, gamma_p, t0))
        .collect()
}

fn median_spacing(x: &[f64]) -> Result<f64> {
    let mut d: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).collect();
    if d.is_empty() {
        return Err(invalid("bin centres must be distinct"));
    }
    d.sort_by(f64::total_cmp);
    Ok(d[d.len() / 2])
}

/// Least-squares slope of −ln y over the points above 5% of the first value.
fn log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let floor = 0.05 * y.first()?;
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .take_while(|(_, v)| **v > floor)
        .map(|(x, v)| (*x, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = -sxy / sxx;
    (slope > 0.0 && slope.is_finite()).then_some(slope)
}

/// Result of the reabsorption-lineshape fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ReabsorptionFit {
    /// Parameters `od` and `scale`.
    pub result: FitResult,
    /// Lorentzian part without self-absorption, evaluated at the data abscissae.
    pub lorentzian: Vec<f64>,
}

/// Fit optical density and scale of the reabsorbed Lorentzian to scan data.
///
/// `scan.x` are detunings in rad/s; `gamma_p` and `gamma_a` stay fixed.
pub fn fit_reabsorption(scan: &DataSeries, gamma_p: f64, gamma_a: f64) -> Result<ReabsorptionFit> {
    if !(gamma_p > 0.0 && gamma_a > 0.0) {
        return Err(invalid("linewidths must be positive"));
    }
    let peak = scan.y.iter().copied().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(invalid("scan has no positive rate"));
    }
    // detuning in units of Γp, rates relative to the largest one
    let ratio = gamma_a / gamma_p;
    let scaled = DataSeries {
        x: scan.x.iter().map(|x| x / gamma_p).collect(),
        y: scan.y.iter().map(|y| y / peak).collect(),
        y_err: scan.y_err.as_ref().map(|e| e.iter().map(|v| v / peak).collect()),
    };
    let model = |u: f64, p: &[f64]| reabsorbed_unchecked(u, p[0], 1.0, ratio, p[1]);

    // the model is linear in the scale, so seed the optical density on a grid
    let weights = scaled.weights();
    let mut seed = (0.0, 1.0, f64::INFINITY);
    for od in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let shape: Vec<f64> = scaled.x.iter().map(|u| model(*u, &[od, 1.0])).collect();
        let num: f64 = shape.iter().zip(&scaled.y).zip(&weights).map(|((m, y), w)| w * m * y).sum();
        let den: f64 = shape.iter().zip(&weights).map(|(m, w)| w * m * m).sum();
        let a = num / den;
        let sse: f64 = shape
            .iter()
            .zip(&scaled.y)
            .zip(&weights)
            .map(|((m, y), w)| w * (y - a * m).powi(2))
            .sum();
        if sse < seed.2 {
            seed = (od, a, sse);
        }
    }
    let params = [
        ParamSpec::new("od", seed.0, 0.0, 100.0),
        ParamSpec::new("scale", seed.1, 0.0, f64::INFINITY),
    ];
    let mut fit = least_squares(model, &scaled, &params)?;
    fit.affine(1, gamma_p * peak, 0.0);
    let scale = fit.values[1];
    let lorentzian = scan.x.iter().map(|w| lorentzian_part(*w, gamma_p, scale)).collect();
    Ok(ReabsorptionFit { result: fit, lorentzian })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn line_model(x: f64, p: &[f64]) -> f64 {
        p[0] + p[1] * (-p[2] * x).exp()
    }

    fn grid(n: usize, hi: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * hi / (n - 1) as f64).collect()
    }

    #[test]
    fn noiseless_recovery() {
        let x = grid(50, 10.0);
        let truth = [2.0, 3.0, 0.5];
        let y = x.iter().map(|x| line_model(*x, &truth)).collect();
        let data = DataSeries::new(x, y, None).unwrap();
        let params = [
            ParamSpec::free("offset", 1.0),
            ParamSpec::free("amp", 1.0),
            ParamSpec::new("rate", 1.0, 0.0, 10.0),
        ];
        let fit = least_squares(line_model, &data, &params).unwrap();
        assert!(fit.converged, "{fit:?}");
        for (v, t) in fit.values.iter().zip(truth) {
            assert!((v - t).abs() < 1e-6 * t, "{v} vs {t}");
        }
        assert!(fit.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn underdetermined_rejected() {
        let data = DataSeries::new(vec![0.0, 1.0], vec![1.0, 2.0], None).unwrap();
        let params = [ParamSpec::free("a", 1.0), ParamSpec::free("b", 1.0), ParamSpec::free("c", 1.0)];
        assert!(least_squares(line_model, &data, &params).is_err());
    }

    #[test]
    fn bad_bounds_rejected() {
        let data = DataSeries::new(grid(10, 1.0), vec![1.0; 10], None).unwrap();
        let flat = |_: f64, p: &[f64]| p[0];
        assert!(least_squares(flat, &data, &[ParamSpec::new("a", 1.0, 2.0, 0.0)]).is_err());
        assert!(least_squares(flat, &data, &[ParamSpec::new("a", 5.0, 0.0, 2.0)]).is_err());
    }

    #[test]
    fn data_validation() {
        assert!(DataSeries::new(vec![0.0], vec![1.0, 2.0], None).is_err());
        assert!(DataSeries::new(vec![0.0], vec![-1.0], None).is_err());
        assert!(DataSeries::new(vec![0.0], vec![1.0], Some(vec![0.0])).is_err());
    }

    #[test]
    fn reordering_does_not_change_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise = Normal::new(0.0, 0.02).unwrap();
        let x = grid(40, 8.0);
        let y: Vec<f64> = x.iter().map(|x| line_model(*x, &[2.0, 3.0, 0.5]) + noise.sample(&mut rng)).collect();
        let params = [ParamSpec::free("o", 1.0), ParamSpec::free("a", 1.0), ParamSpec::new("r", 1.0, 0.0, 5.0)];
        let a = least_squares(line_model, &DataSeries::new(x.clone(), y.clone(), None).unwrap(), &params).unwrap();
        let (xr, yr): (Vec<f64>, Vec<f64>) = x.iter().rev().copied().zip(y.iter().rev().copied()).unzip();
        let b = least_squares(line_model, &DataSeries::new(xr, yr, None).unwrap(), &params).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn weighted_fit_uses_errors() {
        let x = grid(30, 5.0);
        let y: Vec<f64> = x.iter().map(|x| 1.0 + 2.0 * x).collect();
        let err = vec![0.1; 30];
        let model = |x: f64, p: &[f64]| p[0] + p[1] * x;
        let fit = least_squares(
            model,
            &DataSeries::new(x, y, Some(err)).unwrap(),
            &[ParamSpec::free("a", 0.5), ParamSpec::free("b", 1.0)],
        )
        .unwrap();
        // straight-line standard error of the intercept with σ = 0.1, 30 points on [0,5]
        let se = fit.std_error("a").unwrap();
        let xs = grid(30, 5.0);
        let mean = xs.iter().sum::<f64>() / 30.0;
        let sxx: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
        let expected = 0.1 * (1.0 / 30.0 + mean * mean / sxx).sqrt();
        assert!((se - expected).abs() < 1e-6 * expected);
    }

    #[test]
    fn decay_fit_noiseless() {
        let gamma = 2.0 * std::f64::consts::PI * 20.6e6;
        let width = 0.5e-9;
        let centers: Vec<f64> = (0..160).map(|i| -10e-9 + (i as f64 + 0.5) * width).collect();
        let counts = decay_model_counts(&centers, width, gamma, 0.3e-9, 2000.0);
        let fit = fit_exponential_decay(&DataSeries::new(centers, counts, None).unwrap()).unwrap();
        assert!(fit.converged);
        assert!((fit.get("gamma_p").unwrap() - gamma).abs() < 1e-8 * gamma);
        assert!((fit.get("t0").unwrap() - 0.3e-9).abs() < 1e-8 * width);
        assert!((fit.get("amplitude").unwrap() - 2000.0).abs() < 1e-6);
        assert!((fit.get("gamma_p_mhz").unwrap() - 20.6).abs() < 1e-7);
    }

    #[test]
    fn rising_data_has_no_decay() {
        let x = grid(10, 1.0);
        let y = x.iter().map(|v| 1.0 + v).collect();
        assert!(matches!(
            fit_exponential_decay(&DataSeries::new(x, y, None).unwrap()),
            Err(Error::NoDecay)
        ));
    }

    #[test]
    fn reabsorption_noiseless() {
        let (gp, ga) = (20.6, 6.06);
        let x: Vec<f64> = (0..81).map(|i| -60.0 + 1.5 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|w| reabsorbed_unchecked(*w, 1.3, gp, ga, 40.0)).collect();
        let fit = fit_reabsorption(&DataSeries::new(x.clone(), y, None).unwrap(), gp, ga).unwrap();
        assert!(fit.result.converged);
        assert!((fit.result.get("od").unwrap() - 1.3).abs() < 1e-7);
        assert!((fit.result.get("scale").unwrap() - 40.0).abs() < 1e-6);
        assert!((fit.lorentzian[40] - lorentzian_part(0.0, gp, 40.0)).abs() < 1e-6);
    }
}
