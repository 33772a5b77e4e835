//! Registry of 1D scalar field theories with analytic kink data.
//!
//! A [`FieldModel`] bundles the potential `U(phi)`, its derivatives, the
//! static kink `u_c(x)` solving `-u_c'' + U'(u_c) = 0`, and the vacuum data.
//! Two models ship with the crate: the quartic double well (`phi4`) and
//! sine-Gordon. Integral characteristics (kink mass, partial mass, tail
//! asymptotics) are computed by quadrature so that the same code path works
//! for both.

use crate::error::{Error, Result};
use crate::grid::simpson_fn;

/// A 1D scalar field theory with an analytic kink solution.
///
/// All members are plain function pointers; values are immutable after
/// construction and safe to share across threads.
#[derive(Clone, Copy)]
pub struct FieldModel {
    name: &'static str,
    potential: fn(f64) -> f64,
    dpotential: fn(f64) -> f64,
    d2potential: fn(f64) -> f64,
    kink: fn(f64) -> f64,
    dkink: fn(f64) -> f64,
    d2kink: fn(f64) -> f64,
    u_minus: f64,
    u_plus: f64,
    supports_kink_kink: bool,
}

impl std::fmt::Debug for FieldModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldModel")
            .field("name", &self.name)
            .field("u_minus", &self.u_minus)
            .field("u_plus", &self.u_plus)
            .field("supports_kink_kink", &self.supports_kink_kink)
            .finish()
    }
}

impl FieldModel {
    pub fn name(&self) -> &'static str {
        self.name
    }

    /// Potential `U(phi)`.
    pub fn u(&self, phi: f64) -> f64 {
        (self.potential)(phi)
    }

    /// First derivative `U'(phi)`.
    pub fn du(&self, phi: f64) -> f64 {
        (self.dpotential)(phi)
    }

    /// Second derivative `U''(phi)`.
    pub fn d2u(&self, phi: f64) -> f64 {
        (self.d2potential)(phi)
    }

    /// Static kink profile `u_c(x)`.
    pub fn kink(&self, x: f64) -> f64 {
        (self.kink)(x)
    }

    /// Kink slope `u_c'(x)`.
    pub fn dkink(&self, x: f64) -> f64 {
        (self.dkink)(x)
    }

    /// Kink curvature `u_c''(x)`.
    pub fn d2kink(&self, x: f64) -> f64 {
        (self.d2kink)(x)
    }

    /// Vacuum approached as x -> -inf.
    pub fn u_minus(&self) -> f64 {
        self.u_minus
    }

    /// Vacuum approached as x -> +inf.
    pub fn u_plus(&self) -> f64 {
        self.u_plus
    }

    /// Whether antisymmetric kink-kink configurations exist (periodic
    /// potentials only).
    pub fn supports_kink_kink(&self) -> bool {
        self.supports_kink_kink
    }

    /// Mass of linear fluctuations about the `u_plus` vacuum.
    pub fn pion_mass(&self) -> f64 {
        self.d2u(self.u_plus).sqrt()
    }
}

/// Tail data of the kink: `u_c(x) -> u_pm -/+ a exp(-/+ m x)` as x -> +/-inf.
#[derive(Clone, Copy, Debug)]
pub struct KinkAsymptotics {
    pub u_plus: f64,
    pub u_minus: f64,
    /// Tail amplitude `a` (field units).
    pub tail_amplitude: f64,
    /// Pion mass `m = sqrt(U''(u_plus))` (inverse length).
    pub pion_mass: f64,
}

/// The quartic double well `U = (1/2)(phi^2 - 1)^2` with kink `tanh x`.
pub fn make_phi4() -> FieldModel {
    FieldModel {
        name: "phi4",
        potential: |phi| 0.5 * (phi * phi - 1.0) * (phi * phi - 1.0),
        dpotential: |phi| 2.0 * phi * (phi * phi - 1.0),
        d2potential: |phi| 6.0 * phi * phi - 2.0,
        kink: f64::tanh,
        dkink: |x| {
            let s = sech(x);
            s * s
        },
        d2kink: |x| {
            let s = sech(x);
            -2.0 * s * s * x.tanh()
        },
        u_minus: -1.0,
        u_plus: 1.0,
        supports_kink_kink: false,
    }
}

/// Sine-Gordon, `U = 1 - cos phi`, with the kink shifted so that the
/// right vacuum sits at zero: `u_c(x) = 4 atan(e^x) - 2 pi`.
///
/// The shift makes the antisymmetric kink-kink configuration vanish at the
/// midpoint, so the Dirichlet condition there is exact.
pub fn make_sine_gordon() -> FieldModel {
    FieldModel {
        name: "sine-gordon",
        potential: |phi| 1.0 - phi.cos(),
        dpotential: f64::sin,
        d2potential: f64::cos,
        kink: |x| 4.0 * x.exp().atan() - 2.0 * std::f64::consts::PI,
        dkink: |x| 2.0 * sech(x),
        d2kink: |x| -2.0 * sech(x) * x.tanh(),
        u_minus: -2.0 * std::f64::consts::PI,
        u_plus: 0.0,
        supports_kink_kink: true,
    }
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// Quadrature spacing used for the kink-mass style integrals.
const MASS_QUAD_H: f64 = 0.0025;

fn mass_integrand(model: &FieldModel) -> impl Fn(f64) -> f64 + '_ {
    move |x| {
        let d = model.dkink(x);
        d * d
    }
}

/// Kink mass `M = int u_c'^2 dx` over `[-x_cut, x_cut]`.
///
/// The tail beyond `x_cut >= 10/m` is exponentially small; callers wanting
/// the infinite-domain value to 1e-8 should pass `x_cut >= 20/m`.
pub fn kink_mass(model: &FieldModel, x_cut: f64) -> Result<f64> {
    let m = model.pion_mass();
    if x_cut < 10.0 / m {
        return Err(Error::Usage(format!(
            "x_cut = {x_cut} below 10/m = {}",
            10.0 / m
        )));
    }
    let n = odd_nodes(2.0 * x_cut, MASS_QUAD_H);
    let value = simpson_fn(mass_integrand(model), -x_cut, x_cut, n);
    if !value.is_finite() {
        return Err(Error::NumericalFailure {
            op: "kink_mass",
            detail: "non-finite integrand".into(),
        });
    }
    Ok(value)
}

/// Default truncation giving the infinite-domain mass to quadrature accuracy.
pub fn kink_mass_default(model: &FieldModel) -> Result<f64> {
    kink_mass(model, 20.0 / model.pion_mass())
}

/// Partial mass `M(x) = int_{-inf}^x u_c'^2 dx'`.
///
/// Below `-10/m` the analytic tail `(a^2 m / 2) e^{2 m x}` is used; the rest
/// is Simpson quadrature.
pub fn partial_mass(model: &FieldModel, x: f64) -> f64 {
    let asym = asymptotics_unchecked(model);
    partial_mass_with(model, &asym, x)
}

pub(crate) fn partial_mass_with(model: &FieldModel, asym: &KinkAsymptotics, x: f64) -> f64 {
    let m = asym.pion_mass;
    let a = asym.tail_amplitude;
    let x0 = -10.0 / m;
    let tail = |x: f64| 0.5 * a * a * m * (2.0 * m * x).exp();
    if x <= x0 {
        return tail(x);
    }
    let n = odd_nodes(x - x0, MASS_QUAD_H);
    tail(x0) + simpson_fn(mass_integrand(model), x0, x, n)
}

/// Right-tail mass `int_r^inf u_c'^2 dx`, accurate enough to resolve the
/// exponentially small cancellations in the large-distance coefficients.
pub(crate) fn mass_tail(model: &FieldModel, asym: &KinkAsymptotics, r: f64) -> f64 {
    let m = asym.pion_mass;
    let a = asym.tail_amplitude;
    let x_hi = r + 25.0 / m;
    let n = odd_nodes(x_hi - r, MASS_QUAD_H);
    // beyond x_hi the integrand is a^2 m^2 e^{-2 m x} to machine accuracy
    simpson_fn(mass_integrand(model), r, x_hi, n) + 0.5 * a * a * m * (-2.0 * m * x_hi).exp()
}

/// Extracts the pion mass and tail amplitude of the kink.
///
/// The amplitude comes from a two-point exponential fit of
/// `(u_plus - u_c(x)) e^{m x}` at `x = 10/m, 12/m`; a second fit at
/// `12/m, 14/m` must agree to 1e-6 relative or the model is inconsistent.
pub fn asymptotics(model: &FieldModel) -> Result<KinkAsymptotics> {
    let m = model.d2u(model.u_plus).sqrt();
    if !(m > 0.0) {
        return Err(Error::ModelInconsistency(format!(
            "U''(u_plus) = {} not positive",
            model.d2u(model.u_plus)
        )));
    }
    let fit = |x1: f64, x2: f64| -> f64 {
        // (u_plus - u_c) e^{m x} = a + b e^{-m x}; eliminate b
        let f1 = (model.u_plus() - model.kink(x1)) * (m * x1).exp();
        let f2 = (model.u_plus() - model.kink(x2)) * (m * x2).exp();
        let t1 = (-m * x1).exp();
        let t2 = (-m * x2).exp();
        let b = (f1 - f2) / (t1 - t2);
        f1 - b * t1
    };
    let a1 = fit(10.0 / m, 12.0 / m);
    let a2 = fit(12.0 / m, 14.0 / m);
    if (a1 - a2).abs() > 1e-6 * a1.abs() {
        return Err(Error::ModelInconsistency(format!(
            "tail amplitude fits disagree: {a1} vs {a2}"
        )));
    }
    Ok(KinkAsymptotics {
        u_plus: model.u_plus(),
        u_minus: model.u_minus(),
        tail_amplitude: a2,
        pion_mass: m,
    })
}

fn asymptotics_unchecked(model: &FieldModel) -> KinkAsymptotics {
    asymptotics(model).expect("built-in models have consistent tails")
}

/// Smallest odd node count covering `span` at spacing <= `h_target`.
fn odd_nodes(span: f64, h_target: f64) -> usize {
    let panels = (span / h_target).ceil() as usize;
    let panels = panels.max(2);
    let panels = if panels % 2 == 0 { panels } else { panels + 1 };
    panels + 1
}
