//! Perturbative large-distance machinery for the soliton pair.
//!
//! At large separation the pair profile on the half line is a translated
//! kink plus a small distortion, `Phi(x, r) = u_c(x + r) + eta(x + r, r)`.
//! Projecting the quasi-static equation onto the kink zero mode reduces the
//! distortion to a first-order linear ODE,
//!
//! ```text
//! -u_c'(x) eta'(x) + u_c''(x) eta(x) = (M(x) / 2M) dE/dr,
//! ```
//!
//! whose boundary data at `x = r` encode the midpoint symmetry of the pair.
//! Eliminating `eta` from the energy to second order yields
//!
//! ```text
//! E(r) - 2M = A(r) + B(r) [(1/2M) dE/dr]^2,
//! ```
//!
//! with `A`, `B` explicit integrals of kink data. At leading exponential
//! order `A` cancels and `B e^{-2 m r}` tends to `-/+ M^2 / (2 m^3 a^2)`,
//! which gives the closed interaction law `E = 2M -/+ 2 m a^2 e^{-2 m r}`
//! (upper sign: kink-antikink). Away from leading order the relation is an
//! ODE for `E(r)` that refines the law toward smaller `r`.
//!
//! Growing integrands like `M(x)/u_c'(x)^2 ~ e^{2 m x}` are integrated on
//! grids fine relative to `1/m` and switched to their analytic tails where
//! `u_c'` underflows.

use crate::error::{Error, Result};
use crate::grid::{cumulative_simpson, simpson_fn, Grid1D};
use crate::model::{asymptotics, kink_mass_default, FieldModel, KinkAsymptotics};
use crate::relaxation::{EnergyRow, EnergyTable, PairKind, Termination};

/// Distortion profile `eta(x)` for one separation.
#[derive(Clone, Debug)]
pub struct EtaProfile {
    pub r: f64,
    pub kind: PairKind,
    /// Grid over `[x_lo, r]`.
    pub grid: Grid1D,
    pub values: Vec<f64>,
    /// The `dE/dr` the profile was built with.
    pub dedr_used: f64,
}

/// Coefficients of the second-order energy relation at one separation.
#[derive(Clone, Copy, Debug)]
pub struct ABCoefficients {
    pub r: f64,
    pub kind: PairKind,
    pub a: f64,
    pub b: f64,
}

struct Constants {
    asym: KinkAsymptotics,
    mass: f64,
}

fn constants(model: &FieldModel) -> Result<Constants> {
    Ok(Constants {
        asym: asymptotics(model)?,
        mass: kink_mass_default(model)?,
    })
}

/// Leading-order interaction energy `2M -/+ 2 m a^2 e^{-2 m r}`
/// (upper sign: kink-antikink).
pub fn asymptotic_energy(model: &FieldModel, r: f64, kind: PairKind) -> f64 {
    let c = constants(model).expect("built-in models have consistent tail data");
    let interaction = 2.0 * c.asym.pion_mass
        * c.asym.tail_amplitude
        * c.asym.tail_amplitude
        * (-2.0 * c.asym.pion_mass * r).exp();
    match kind {
        PairKind::KinkAntikink => 2.0 * c.mass - interaction,
        PairKind::KinkKink => 2.0 * c.mass + interaction,
    }
}

/// Derivative of [`asymptotic_energy`]; the default slope fed to the
/// distortion profile.
pub fn asymptotic_energy_derivative(model: &FieldModel, r: f64, kind: PairKind) -> f64 {
    let c = constants(model).expect("built-in models have consistent tail data");
    let m = c.asym.pion_mass;
    let a = c.asym.tail_amplitude;
    let magnitude = 4.0 * m * m * a * a * (-2.0 * m * r).exp();
    match kind {
        PairKind::KinkAntikink => magnitude,
        PairKind::KinkKink => -magnitude,
    }
}

/// Boundary data `(eta(r), eta'(r))` of the distortion.
///
/// The kink-antikink pair imposes a vanishing midpoint slope, the kink-kink
/// pair a vanishing midpoint value; combining either with the distortion
/// ODE fixes both boundary numbers.
pub fn eta_boundary(
    model: &FieldModel,
    r: f64,
    kind: PairKind,
    dedr: f64,
) -> Result<(f64, f64)> {
    let c = constants(model)?;
    let m = c.asym.pion_mass;
    if r < 3.0 / m {
        return Err(Error::Usage(format!(
            "distortion expansion needs r >= 3/m = {}, got {r}",
            3.0 / m
        )));
    }
    let du = model.dkink(r);
    let d2u = model.d2kink(r);
    if du.abs() < 1e-300 || d2u.abs() < 1e-300 {
        return Err(Error::SingularBoundary(format!(
            "kink slope {du} / curvature {d2u} vanish at r = {r}"
        )));
    }
    let m_r = c.mass - mass_tail_quad(model, r);
    let drive = m_r / (2.0 * c.mass) * dedr;
    Ok(match kind {
        PairKind::KinkAntikink => {
            let eta_r = (drive - du * du) / d2u;
            (eta_r, -du)
        }
        PairKind::KinkKink => {
            let eta_r = -model.kink(r);
            let deta_r = -(drive + d2u * model.kink(r)) / du;
            (eta_r, deta_r)
        }
    })
}

/// Right-tail mass `int_r^inf u_c'^2`, resolved accurately enough for the
/// exponent-level cancellations in `A(r)`.
fn mass_tail_quad(model: &FieldModel, r: f64) -> f64 {
    let asym = asymptotics(model).expect("built-in models have consistent tail data");
    crate::model::mass_tail(model, &asym, r)
}

/// Distortion profile on a grid ending at `x = r`.
///
/// The inner integral `int_x^r M(x')/u_c'(x')^2 dx'` has an `e^{2 m x'}`
/// integrand; it is accumulated once over the grid, with the analytic limit
/// `M/u_c'^2 -> 1/(2m)` substituted where `u_c'` underflows.
pub fn eta_profile(
    model: &FieldModel,
    r: f64,
    kind: PairKind,
    dedr: f64,
    grid: &Grid1D,
) -> Result<EtaProfile> {
    if (grid.x_max() - r).abs() > 1e-9 {
        return Err(Error::Usage(format!(
            "distortion grid must end at x = r = {r}, got {}",
            grid.x_max()
        )));
    }
    let (eta_r, _) = eta_boundary(model, r, kind, dedr)?;
    let c = constants(model)?;
    let m = c.asym.pion_mass;

    let integrand: Vec<f64> = grid
        .nodes()
        .map(|x| {
            let du = model.dkink(x);
            if du.abs() < 1e-140 {
                1.0 / (2.0 * m)
            } else {
                let m_x = crate::model::partial_mass_with(model, &c.asym, x);
                m_x / (du * du)
            }
        })
        .collect();
    if integrand.iter().any(|g| !g.is_finite()) {
        return Err(Error::NumericalFailure {
            op: "eta_profile",
            detail: "non-finite integrand in the distortion integral".into(),
        });
    }
    let cumulative = cumulative_simpson(&integrand, grid.spacing());
    let total = *cumulative.last().unwrap();
    let du_r = model.dkink(r);
    let values: Vec<f64> = grid
        .nodes()
        .zip(&cumulative)
        .map(|(x, &c_x)| {
            model.dkink(x) * (eta_r / du_r + dedr / (2.0 * c.mass) * (total - c_x))
        })
        .collect();
    Ok(EtaProfile {
        r,
        kind,
        grid: *grid,
        values,
        dedr_used: dedr,
    })
}

/// Convenience grid for the distortion: `[-15/m, r]` at spacing `0.002/m`.
pub fn eta_grid(model: &FieldModel, r: f64) -> Grid1D {
    let m = model.pion_mass();
    Grid1D::from_spacing(-15.0 / m, r, 0.002 / m).expect("static grid parameters")
}

// partial_mass at every node is a cumulative pass in disguise; the grids
// here are small enough that the direct form stays cheap.

/// Coefficients `A(r)`, `B(r)` of the second-order energy relation.
pub fn ab_coefficients(model: &FieldModel, r: f64, kind: PairKind) -> Result<ABCoefficients> {
    let c = constants(model)?;
    let m = c.asym.pion_mass;
    let a_tail = c.asym.tail_amplitude;
    if r < 3.0 / m {
        return Err(Error::Usage(format!(
            "coefficients need r >= 3/m = {}, got {r}",
            3.0 / m
        )));
    }
    let du = model.dkink(r);
    let d2u = model.d2kink(r);
    if du.abs() < 1e-300 || d2u.abs() < 1e-300 {
        return Err(Error::SingularBoundary(format!(
            "kink slope {du} / curvature {d2u} vanish at r = {r}"
        )));
    }

    // int_{-inf}^r M(x)^2 / u_c'(x)^2 dx, analytic (a^2/4) e^{2 m x} tail
    // below the grid
    let x_lo = -20.0 / m;
    let grid = Grid1D::from_spacing(x_lo, r, 0.002 / m)?;
    let du_sq: Vec<f64> = grid
        .nodes()
        .map(|x| {
            let d = model.dkink(x);
            d * d
        })
        .collect();
    let m_lo = crate::model::partial_mass_with(model, &c.asym, x_lo);
    let m_of_x: Vec<f64> = cumulative_simpson(&du_sq, grid.spacing())
        .iter()
        .map(|c_x| m_lo + c_x)
        .collect();
    let integrand: Vec<f64> = grid
        .nodes()
        .zip(&m_of_x)
        .zip(&du_sq)
        .map(|((x, &m_x), &d_sq)| {
            if d_sq < 1e-280 {
                0.25 * a_tail * a_tail * (2.0 * m * x).exp()
            } else {
                m_x * m_x / d_sq
            }
        })
        .collect();
    let b_integral = cumulative_simpson(&integrand, grid.spacing()).last().unwrap()
        + a_tail * a_tail / (8.0 * m) * (2.0 * m * x_lo).exp();

    let m_r = c.mass - mass_tail_quad(model, r);
    let (a_coeff, b_coeff) = match kind {
        PairKind::KinkAntikink => {
            let a = -du.powi(3) / d2u - 2.0 * mass_tail_quad(model, r);
            let b = m_r * m_r / (du * d2u) + b_integral;
            (a, b)
        }
        PairKind::KinkKink => {
            let hi = r + 25.0 / m;
            let n = ((hi - r) / (0.002 / m)).ceil() as usize + 1;
            let tail = simpson_fn(|x| model.kink(x) * model.d2kink(x), r, hi, n);
            let a = model.kink(r) * model.kink(r) * d2u / du + 2.0 * tail;
            (a, b_integral)
        }
    };
    Ok(ABCoefficients {
        r,
        kind,
        a: a_coeff,
        b: b_coeff,
    })
}

/// Integrates the gauge-free relation `dE/dr = -/+ 2M sqrt((E - 2M - A)/B)`
/// downward from `r_hi`, starting on the leading-order law; the sign makes
/// `E -> 2M` as `r -> inf`. Rows carry `dE/dr / 2M` as `gauge_lhs` next to
/// the gauge source for comparison.
///
/// A negative radicand terminates the table with a validity-boundary
/// marker.
pub fn potential_from_ode(
    model: &FieldModel,
    kind: PairKind,
    r_lo: f64,
    r_hi: f64,
) -> Result<EnergyTable> {
    let c = constants(model)?;
    let m = c.asym.pion_mass;
    if !(r_hi > r_lo) {
        return Err(Error::Usage(format!(
            "need r_hi > r_lo, got {r_hi} and {r_lo}"
        )));
    }
    if r_lo < 2.5 / m {
        return Err(Error::Usage(format!(
            "the expansion degrades below r = 2.5/m = {}, got r_lo = {r_lo}",
            2.5 / m
        )));
    }

    // A and B on a half-step lattice so the classic fourth-order stages
    // land on precomputed values
    let dr = 1e-3;
    let n_steps = ((r_hi - r_lo) / dr).round().max(1.0) as usize;
    let coeff: Vec<ABCoefficients> = (0..=2 * n_steps)
        .map(|j| ab_coefficients(model, r_hi - 0.5 * dr * j as f64, kind))
        .collect::<Result<Vec<_>>>()?;

    let two_m = 2.0 * c.mass;
    let sign = match kind {
        PairKind::KinkAntikink => 1.0,
        PairKind::KinkKink => -1.0,
    };
    let slope = |j: usize, e: f64| -> Option<f64> {
        let ab = &coeff[j];
        let radicand = (e - two_m - ab.a) / ab.b;
        if radicand < 0.0 {
            return None;
        }
        Some(sign * two_m * radicand.sqrt())
    };

    let mut rows = Vec::with_capacity(n_steps + 1);
    let mut e = asymptotic_energy(model, r_hi, kind);
    let mut termination = Termination::Completed;
    for k in 0..=n_steps {
        let r = r_hi - dr * k as f64;
        let de_dr = match slope(2 * k, e) {
            Some(v) => v,
            None => {
                termination = Termination::ValidityBoundary { r };
                break;
            }
        };
        rows.push(EnergyRow {
            r,
            e_full: e,
            de_dr,
            gauge_lhs: de_dr / two_m,
            gauge_rhs: crate::relaxation::gauge_source(model, kind, r),
            natural_distance: None,
        });
        if k == n_steps {
            break;
        }
        // RK4 marching toward smaller r
        let h = -dr;
        let k1 = de_dr;
        let maybe = (|| {
            let k2 = slope(2 * k + 1, e + 0.5 * h * k1)?;
            let k3 = slope(2 * k + 1, e + 0.5 * h * k2)?;
            let k4 = slope(2 * k + 2, e + h * k3)?;
            Some(h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        })();
        match maybe {
            Some(delta) => e += delta,
            None => {
                termination = Termination::ValidityBoundary { r: r - dr };
                break;
            }
        }
    }
    Ok(EnergyTable { rows, termination })
}
