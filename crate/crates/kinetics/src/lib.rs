//! Arrhenius relaxation with a field-dependent barrier, and the Debye response.

use molbit_core::error::{Error, Result};
use molbit_core::model::{FieldVector, SpinModel, SpinSystem};

/// tau = tau0 exp(U / T).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrheniusParams {
    /// Attempt time, seconds.
    pub tau0_s: f64,
    /// Barrier, kelvin.
    pub activation_k: f64,
}

impl ArrheniusParams {
    pub fn new(tau0_s: f64, activation_k: f64) -> Result<Self> {
        let p = ArrheniusParams {
            tau0_s,
            activation_k,
        };
        p.validate()?;
        Ok(p)
    }

    /// tau0 = 1.43e-8 s, U = 26.75 K.
    pub fn fe8() -> Self {
        ArrheniusParams {
            tau0_s: 1.43e-8,
            activation_k: 26.75,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau0_s > 0.0 && self.tau0_s.is_finite()) {
            return Err(Error::invalid(format!(
                "tau0 must be > 0, got {}",
                self.tau0_s
            )));
        }
        if !(self.activation_k >= 0.0 && self.activation_k.is_finite()) {
            return Err(Error::invalid(format!(
                "activation energy must be >= 0, got {}",
                self.activation_k
            )));
        }
        Ok(())
    }
}

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("temperature must be > 0, got {t}")))
    }
}

pub fn relaxation_time(p: &ArrheniusParams, t: f64) -> Result<f64> {
    p.validate()?;
    check_temperature(t)?;
    Ok(p.tau0_s * (p.activation_k / t).exp())
}

/// U = T ln(tau / tau0), kelvin.
pub fn effective_barrier_from_tau(tau: f64, t: f64, tau0: f64) -> Result<f64> {
    check_temperature(t)?;
    if !(tau0 > 0.0) {
        return Err(Error::invalid(format!("tau0 must be > 0, got {tau0}")));
    }
    if !(tau >= tau0) || !tau.is_finite() {
        return Err(Error::invalid(format!(
            "tau = {tau} s is shorter than the attempt time {tau0} s"
        )));
    }
    Ok(t * (tau / tau0).ln())
}

/// Classical anisotropy barrier top, kelvin.
///
/// The spin is treated as a classical vector of length S. The energy surface
/// is minimized over the azimuth of the saddle after maximizing over the
/// polar angle, which is the lowest pass between the two wells.
pub fn classical_barrier_top(sys: &SpinSystem, field: &FieldVector) -> Result<f64> {
    let model = SpinModel::new(sys.clone())?;
    Ok(classical_top(&model, field))
}

fn classical_top(model: &SpinModel, field: &FieldVector) -> f64 {
    let sys = model.system();
    let s = sys.spin;
    let z = model.zeeman_factor();
    let energy = |theta: f64, phi: f64| {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        s * s * (-sys.d_k * ct * ct + sys.e_k * st * st * (2.0 * phi).cos())
            - z * s * (field.x * st * cp + field.y * st * sp + field.z * ct)
    };
    let pi = std::f64::consts::PI;
    let ridge = |phi: f64| {
        let n = 720;
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for k in 0..=n {
            let v = energy(pi * k as f64 / n as f64, phi);
            if v > best {
                best = v;
                arg = k;
            }
        }
        let h = pi / n as f64;
        let (mut lo, mut hi) = ((arg as f64 - 1.0) * h, (arg as f64 + 1.0) * h);
        lo = lo.max(0.0);
        hi = hi.min(pi);
        (-golden(|x| -energy(x, phi), lo, hi).1).max(best)
    };
    let n = 720;
    let mut best = f64::INFINITY;
    let mut arg = 0;
    for k in 0..n {
        let v = ridge(2.0 * pi * k as f64 / n as f64);
        if v < best {
            best = v;
            arg = k;
        }
    }
    let h = 2.0 * pi / n as f64;
    let (lo, hi) = ((arg as f64 - 1.0) * h, (arg as f64 + 1.0) * h);
    golden(ridge, lo, hi).1.min(best)
}

/// Golden-section minimization on [a, b]; returns (argmin, min).
fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Barrier from ascending eigenvalues and the classical fallback top.
fn barrier_from_levels(w: &[f64], threshold: f64, classical_top: impl FnOnce() -> f64) -> f64 {
    let pairs = w.len() / 2;
    let split = |n: usize| w[2 * n + 1] - w[2 * n];
    let energy = |n: usize| w[2 * n] - w[0];
    if pairs == 0 {
        return 0.0;
    }
    if split(0) >= threshold {
        return 0.0;
    }
    for n in 1..pairs {
        let dn = split(n);
        if dn >= threshold {
            let dp = split(n - 1);
            let (ep, en) = (energy(n - 1), energy(n));
            if dp <= 0.0 {
                return en;
            }
            let f = ((threshold / dp).ln() / (dn / dp).ln()).clamp(0.0, 1.0);
            return ep + f * (en - ep);
        }
    }
    (classical_top() - w[0]).max(0.0)
}

/// Effective barrier U_eff (kelvin) set by the first doublet that tunnels.
///
/// Let pair n be the lowest doublet whose splitting reaches `delta_threshold`.
/// The barrier is placed between the energies of pairs n-1 and n, at the
/// fraction given by where the threshold sits between their splittings on a
/// log scale. If the ground pair already tunnels the barrier is zero; if no
/// pair does, the classical barrier top is used.
pub fn effective_barrier_from_spectrum(
    sys: &SpinSystem,
    field: &FieldVector,
    delta_threshold: f64,
) -> Result<f64> {
    let model = SpinModel::new(sys.clone())?;
    effective_barrier(&model, field, delta_threshold)
}

/// As [`effective_barrier_from_spectrum`] with a prebuilt model.
pub fn effective_barrier(
    model: &SpinModel,
    field: &FieldVector,
    delta_threshold: f64,
) -> Result<f64> {
    if !(delta_threshold > 0.0 && delta_threshold.is_finite()) {
        return Err(Error::invalid(format!(
            "splitting threshold must be > 0, got {delta_threshold}"
        )));
    }
    let w = model.eigenvalues(field)?;
    Ok(barrier_from_levels(&w, delta_threshold, || {
        classical_top(model, field)
    }))
}

/// tau(H_y) = tau0 exp(U_eff(0, H_y, 0) / T), seconds.
pub fn tau_vs_transverse_field(
    sys: &SpinSystem,
    t: f64,
    hy: f64,
    delta_threshold: f64,
    tau0: f64,
) -> Result<f64> {
    let u = effective_barrier_from_spectrum(sys, &FieldVector::new(0.0, hy, 0.0), delta_threshold)?;
    relaxation_time(&ArrheniusParams::new(tau0, u)?, t)
}

/// Finds the splitting threshold for which tau(0, H_y, 0; T) equals `target_tau`.
pub fn calibrate_threshold(
    sys: &SpinSystem,
    hy: f64,
    t: f64,
    target_tau: f64,
    tau0: f64,
) -> Result<f64> {
    let model = SpinModel::new(sys.clone())?;
    let u_target = effective_barrier_from_tau(target_tau, t, tau0)?;
    let field = FieldVector::new(0.0, hy, 0.0);
    let w = model.eigenvalues(&field)?;
    let top = classical_top(&model, &field);
    let u = |th: f64| barrier_from_levels(&w, th, || top);
    let (mut lo, mut hi) = (1e-12_f64, 1e3_f64);
    if u(lo) > u_target || u(hi) < u_target {
        return Err(Error::invalid(format!(
            "target barrier {u_target} K is outside the reachable range [{}, {}] K",
            u(lo),
            u(hi)
        )));
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if u(mid) > u_target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi / lo - 1.0 < 1e-14 {
            break;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Least-squares fit of ln(tau) against 1/T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrheniusFit {
    pub params: ArrheniusParams,
    pub r_squared: f64,
}

/// Fits (T, tau) pairs to tau0 exp(U / T).
pub fn fit_arrhenius(points: &[(f64, f64)]) -> Result<ArrheniusFit> {
    if points.len() < 2 {
        return Err(Error::invalid("an Arrhenius fit needs at least two points"));
    }
    for &(t, tau) in points {
        check_temperature(t)?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid(format!("tau must be > 0, got {tau}")));
        }
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| 1.0 / p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("all temperatures are equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(ArrheniusFit {
        params: ArrheniusParams {
            tau0_s: intercept.exp(),
            activation_k: slope,
        },
        r_squared,
    })
}

/// Piecewise-linear U(H_y) through measured (H_y, tau) anchors at one temperature.
///
/// This is the data-driven alternative to the spectral barrier: each anchor
/// is inverted through the Arrhenius law and the barrier is interpolated
/// linearly in H_y, extrapolating with the end slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorBarrier {
    points: Vec<(f64, f64)>,
    tau0: f64,
}

impl AnchorBarrier {
    /// `anchors` are (H_y tesla, tau seconds) measured at temperature `t`.
    pub fn new(anchors: &[(f64, f64)], t: f64, tau0: f64) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::invalid("at least one anchor is required"));
        }
        let mut points = anchors
            .iter()
            .map(|&(h, tau)| Ok((h, effective_barrier_from_tau(tau, t, tau0)?)))
            .collect::<Result<Vec<_>>>()?;
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid("anchor fields must be distinct"));
        }
        Ok(AnchorBarrier { points, tau0 })
    }

    /// U(H_y), kelvin, floored at zero.
    pub fn barrier(&self, hy: f64) -> f64 {
        let p = &self.points;
        if p.len() == 1 {
            return p[0].1;
        }
        let k = match p.iter().position(|q| q.0 > hy) {
            Some(0) => 1,
            Some(k) => k,
            None => p.len() - 1,
        };
        let (a, b) = (p[k - 1], p[k]);
        (a.1 + (hy - a.0) * (b.1 - a.1) / (b.0 - a.0)).max(0.0)
    }

    pub fn tau(&self, hy: f64, t: f64) -> Result<f64> {
        relaxation_time(&ArrheniusParams::new(self.tau0, self.barrier(hy))?, t)
    }
}

/// Complex susceptibility of a single relaxation mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DebyeResponse {
    pub chi_prime: f64,
    pub chi_double_prime: f64,
    pub omega: f64,
    pub tau: f64,
}

/// chi' = chi_S + (chi_T - chi_S)/(1 + w^2 tau^2), chi'' = (chi_T - chi_S) w tau/(1 + w^2 tau^2).
pub fn debye_susceptibility(chi_t: f64, chi_s: f64, tau: f64, omega: f64) -> DebyeResponse {
    let x = omega * tau;
    let dchi = chi_t - chi_s;
    let (chi_prime, chi_double_prime) = if x == 0.0 {
        (chi_t, 0.0)
    } else if x.is_infinite() {
        (chi_s, 0.0)
    } else {
        (chi_s + dchi / (1.0 + x * x), dchi / (x + 1.0 / x))
    };
    DebyeResponse {
        chi_prime,
        chi_double_prime,
        omega,
        tau,
    }
}

/// tau = chi'' / (omega chi').
pub fn tau_from_chi_ratio(chi_prime: f64, chi_double_prime: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::invalid(format!("omega must be > 0, got {omega}")));
    }
    if !(chi_prime > 0.0) {
        return Err(Error::UndefinedRatio(format!(
            "chi' = {chi_prime} must be > 0 to extract tau"
        )));
    }
    Ok(chi_double_prime / (omega * chi_prime))
}

/// T_b = U / ln(1 / (omega tau0)), kelvin.
pub fn blocking_temperature(p: &ArrheniusParams, omega: f64) -> Result<f64> {
    p.validate()?;
    if !(omega > 0.0) {
        return Err(Error::invalid(format!("omega must be > 0, got {omega}")));
    }
    if !(p.activation_k > 0.0) {
        return Err(Error::invalid("blocking needs a positive barrier"));
    }
    let x = omega * p.tau0_s;
    if x >= 1.0 {
        return Err(Error::NoBlocking(x));
    }
    Ok(p.activation_k / (1.0 / x).ln())
}

/// Relaxation time as a function of field and temperature.
pub trait RelaxationLaw: Send + Sync {
    fn tau(&self, field: &FieldVector, t: f64) -> Result<f64>;
}

/// tau from the spectral barrier of the transverse part of the field.
///
/// The longitudinal component only biases the wells; it is dropped here so
/// that a bias-induced doublet gap is not mistaken for a tunnel splitting.
#[derive(Debug, Clone)]
pub struct SpectralRelaxation {
    model: SpinModel,
    pub tau0_s: f64,
    pub delta_threshold_k: f64,
}

impl SpectralRelaxation {
    pub fn new(sys: &SpinSystem, tau0_s: f64, delta_threshold_k: f64) -> Result<Self> {
        ArrheniusParams::new(tau0_s, 0.0)?;
        if !(delta_threshold_k > 0.0) {
            return Err(Error::invalid(format!(
                "splitting threshold must be > 0, got {delta_threshold_k}"
            )));
        }
        Ok(SpectralRelaxation {
            model: SpinModel::new(sys.clone())?,
            tau0_s,
            delta_threshold_k,
        })
    }

    pub fn barrier(&self, field: &FieldVector) -> Result<f64> {
        effective_barrier(&self.model, &field.transverse(), self.delta_threshold_k)
    }
}

impl RelaxationLaw for SpectralRelaxation {
    fn tau(&self, field: &FieldVector, t: f64) -> Result<f64> {
        check_temperature(t)?;
        Ok(self.tau0_s * (self.barrier(field)? / t).exp())
    }
}

/// Field-independent Arrhenius relaxation.
#[derive(Debug, Clone, Copy)]
pub struct ArrheniusRelaxation(pub ArrheniusParams);

impl RelaxationLaw for ArrheniusRelaxation {
    fn tau(&self, _field: &FieldVector, t: f64) -> Result<f64> {
        relaxation_time(&self.0, t)
    }
}

/// Relaxation from measured anchors, using |transverse field| as H_y.
#[derive(Debug, Clone)]
pub struct AnchorRelaxation(pub AnchorBarrier);

impl RelaxationLaw for AnchorRelaxation {
    fn tau(&self, field: &FieldVector, t: f64) -> Result<f64> {
        self.0.tau(field.transverse().norm(), t)
    }
}

/// The same tau everywhere; used to force the frozen and quasi-static limits.
#[derive(Debug, Clone, Copy)]
pub struct FixedRelaxation(pub f64);

impl RelaxationLaw for FixedRelaxation {
    fn tau(&self, _field: &FieldVector, _t: f64) -> Result<f64> {
        if self.0 > 0.0 {
            Ok(self.0)
        } else {
            Err(Error::invalid(format!("tau must be > 0, got {}", self.0)))
        }
    }
}
