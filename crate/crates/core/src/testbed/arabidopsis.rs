//! Hormonal crosstalk in the Arabidopsis root: an 18-state ODE system in
//! 38 free rate parameters, together with the two analytically solvable
//! boundaries for `[ET]`.
//!
//! Inputs are handled in two coordinate systems. *Raw* parameters are the
//! rate constants themselves; *transformed* parameters are their square
//! roots mapped affinely so that each input range becomes `[-1, 1]`. The
//! emulator works in transformed units. Both boundaries sit at raw value 0,
//! which lies below `-1` in transformed units.

use ode_solvers::{Dopri5, OutputType, SVector, System};

use crate::error::{Error, Result};
use crate::geometry::{Boundary, BoundarySet, SolverSpec, validate_set};

/// Number of free rate parameters.
pub const N_PARAMS: usize = 38;
/// Number of state variables.
pub const N_STATES: usize = 18;
/// Time at which `[ET]` is taken as the output of interest.
pub const T_OUTPUT: f64 = 2.0;
pub const RTOL: f64 = 1e-8;
pub const ATOL: f64 = 1e-10;

/// `(name, min, max)` for each free parameter, in input order.
pub const PARAMS: [(&str, f64, f64); N_PARAMS] = [
    ("k1", 0.1, 4.0),
    ("k1a", 0.1, 4.0),
    ("k2", 0.02, 0.8),
    ("k2a", 0.28, 11.2),
    ("k2b", 0.1, 4.0),
    ("k2c", 0.001, 0.04),
    ("k3", 0.2, 8.0),
    ("k3a", 0.045, 1.8),
    ("k3auxin", 1.0, 40.0),
    ("k1_vauxin", 0.1, 4.0),
    ("k4", 0.1, 4.0),
    ("k5", 0.03, 1.2),
    ("k6a", 0.02, 0.8),
    ("k7", 0.1, 4.0),
    ("k8", 0.1, 1.0),
    ("k9", 0.1, 1.0),
    ("k10", 0.00003, 0.0012),
    ("k10a", 0.5, 20.0),
    ("k11", 0.5, 20.0),
    ("k12", 0.01, 0.4),
    ("k12a", 0.01, 0.4),
    ("k13", 0.1, 1.0),
    ("k14", 0.3, 12.0),
    ("k15", 0.0085, 0.34),
    ("k16a", 0.1, 4.0),
    ("k17", 0.01, 0.4),
    ("k18", 0.01, 0.4),
    ("k18a", 0.1, 4.0),
    ("k19", 0.1, 4.0),
    ("k20a", 0.08, 3.2),
    ("k20b", 0.1, 4.0),
    ("k20c", 0.03, 1.2),
    ("k1_v21", 0.1, 4.0),
    ("k22a", 0.1, 1.0),
    ("k1_v23", 0.075, 3.0),
    ("k1_v24", 1.0, 40.0),
    ("k25a", 0.1, 4.0),
    ("k25b", 0.1, 4.0),
];

/// `(name, initial value)` for each state variable, in state order.
pub const STATES: [(&str, f64); N_STATES] = [
    ("Auxin", 0.1),
    ("X", 0.1),
    ("PLSp", 0.1),
    ("Ra", 0.0),
    ("Ra*", 1.0),
    ("CK", 0.1),
    ("ET", 0.1),
    ("PLSm", 0.1),
    ("Re", 0.0),
    ("Re*", 0.3),
    ("CTR1", 0.0),
    ("CTR1*", 0.3),
    ("PIN1m", 0.0),
    ("PIN1pi", 0.0),
    ("PIN1pm", 0.0),
    ("IAA", 0.0),
    ("cytokinin", 0.0),
    ("ACC", 0.0),
];

/// Parameter indices.
pub mod p {
    pub const K1: usize = 0;
    pub const K1A: usize = 1;
    pub const K2: usize = 2;
    pub const K2A: usize = 3;
    pub const K2B: usize = 4;
    pub const K2C: usize = 5;
    pub const K3: usize = 6;
    pub const K3A: usize = 7;
    pub const K3AUXIN: usize = 8;
    pub const K1_VAUXIN: usize = 9;
    pub const K4: usize = 10;
    pub const K5: usize = 11;
    pub const K6A: usize = 12;
    pub const K7: usize = 13;
    pub const K8: usize = 14;
    pub const K9: usize = 15;
    pub const K10: usize = 16;
    pub const K10A: usize = 17;
    pub const K11: usize = 18;
    pub const K12: usize = 19;
    pub const K12A: usize = 20;
    pub const K13: usize = 21;
    pub const K14: usize = 22;
    pub const K15: usize = 23;
    pub const K16A: usize = 24;
    pub const K17: usize = 25;
    pub const K18: usize = 26;
    pub const K18A: usize = 27;
    pub const K19: usize = 28;
    pub const K20A: usize = 29;
    pub const K20B: usize = 30;
    pub const K20C: usize = 31;
    pub const K1_V21: usize = 32;
    pub const K22A: usize = 33;
    pub const K1_V23: usize = 34;
    pub const K1_V24: usize = 35;
    pub const K25A: usize = 36;
    pub const K25B: usize = 37;
}

/// State indices.
pub mod s {
    pub const AUXIN: usize = 0;
    pub const X: usize = 1;
    pub const PLSP: usize = 2;
    pub const RA: usize = 3;
    pub const RA_STAR: usize = 4;
    pub const CK: usize = 5;
    pub const ET: usize = 6;
    pub const PLSM: usize = 7;
    pub const RE: usize = 8;
    pub const RE_STAR: usize = 9;
    pub const CTR1: usize = 10;
    pub const CTR1_STAR: usize = 11;
    pub const PIN1M: usize = 12;
    pub const PIN1PI: usize = 13;
    pub const PIN1PM: usize = 14;
    pub const IAA: usize = 15;
    pub const CYTOKININ: usize = 16;
    pub const ACC: usize = 17;
}

/// Ratio fixing `k16 = K16_RATIO * k16a`.
pub const K16_RATIO: f64 = 0.3;

pub type State = SVector<f64, N_STATES>;

/// The full set of rate constants, including the ones held fixed.
///
/// Invariant: `k16 == K16_RATIO * free[k16a]` and all feeding rates are 0.
#[derive(Clone, Debug, PartialEq)]
pub struct RateParams {
    free: [f64; N_PARAMS],
    k16: f64,
    v_iaa: f64,
    v_ck: f64,
    v_acc: f64,
    km_iaa: f64,
    km_ck: f64,
    km_acc: f64,
}

impl RateParams {
    /// Raw parameters in input order; every value must be finite and `>= 0`.
    pub fn new(raw: &[f64]) -> Result<Self> {
        if raw.len() != N_PARAMS {
            return Err(Error::DimensionMismatch {
                expected: N_PARAMS,
                got: raw.len(),
            });
        }
        for (i, &v) in raw.iter().enumerate() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::OutOfRange {
                    name: PARAMS[i].0.into(),
                    value: v,
                    min: 0.0,
                    max: f64::INFINITY,
                });
            }
        }
        let mut free = [0.0; N_PARAMS];
        free.copy_from_slice(raw);
        Ok(RateParams {
            free,
            k16: K16_RATIO * raw[p::K16A],
            v_iaa: 0.0,
            v_ck: 0.0,
            v_acc: 0.0,
            km_iaa: 1.0,
            km_ck: 1.0,
            km_acc: 1.0,
        })
    }

    pub fn free(&self) -> &[f64] {
        &self.free
    }

    pub fn k16(&self) -> f64 {
        self.k16
    }

    #[inline]
    fn k(&self, i: usize) -> f64 {
        self.free[i]
    }
}

/// Time derivatives of the 18 states.
pub fn arabidopsis_rhs(y: &State, k: &RateParams) -> State {
    use p::*;
    use s::*;
    let auxin = y[AUXIN];
    let x = y[X];
    let plsp = y[PLSP];
    let ra = y[RA];
    let ra_s = y[RA_STAR];
    let ck = y[CK];
    let et = y[ET];
    let plsm = y[PLSM];
    let re = y[RE];
    let re_s = y[RE_STAR];
    let ctr1 = y[CTR1];
    let ctr1_s = y[CTR1_STAR];
    let pin1m = y[PIN1M];
    let pin1pi = y[PIN1PI];
    let pin1pm = y[PIN1PM];
    let iaa = y[IAA];
    let cytokinin = y[CYTOKININ];
    let acc = y[ACC];
    // k6 has no range of its own and shares the value of k1_vauxin
    let k6 = k.k(K1_VAUXIN);

    let mut d = State::zeros();
    d[AUXIN] = k.k(K1A) / (1.0 + x / k.k(K1))
        + k.k(K2)
        + k.k(K2A) * et / (1.0 + ck / k.k(K2B)) * plsp / (k.k(K2C) + plsp)
        + k.v_iaa * iaa / (k.km_iaa + iaa)
        - (k.k(K3) + k.k(K3A) * pin1pm / (k.k(K3AUXIN) + auxin)) * auxin;
    d[X] = k.k16 - k.k(K16A) * ctr1_s - k.k(K17) * x;
    d[PLSP] = k.k(K8) * plsm - k.k(K9) * plsp;
    let ra_flux = -k.k(K4) * auxin * ra + k.k(K5) * ra_s;
    d[RA] = ra_flux;
    d[RA_STAR] = -ra_flux;
    d[CK] = k.k(K18A) / (1.0 + auxin / k.k(K18)) - k.k(K19) * ck
        + k.v_ck * cytokinin / (k.km_ck + cytokinin);
    d[ET] = k.k(K12) + k.k(K12A) * auxin * ck - k.k(K13) * et
        + k.v_acc * acc / (k.km_acc + acc);
    d[PLSM] = k6 * ra_s / (1.0 + et / k.k(K6A)) - k.k(K7) * plsm;
    let re_flux = k.k(K11) * re_s * et - (k.k(K10) + k.k(K10A) * plsp) * re;
    d[RE] = re_flux;
    d[RE_STAR] = -re_flux;
    let ctr1_flux = -k.k(K14) * re_s * ctr1 + k.k(K15) * ctr1_s;
    d[CTR1] = ctr1_flux;
    d[CTR1_STAR] = -ctr1_flux;
    d[PIN1M] = k.k(K20A) / (k.k(K20B) + ck) * x * auxin / (k.k(K20C) + auxin)
        - k.k(K1_V21) * pin1m;
    let recycle = k.k(K25A) * pin1pm / (1.0 + auxin / k.k(K25B));
    d[PIN1PI] = k.k(K22A) * pin1m - k.k(K1_V23) * pin1pi - k.k(K1_V24) * pin1pi + recycle;
    d[PIN1PM] = k.k(K1_V24) * pin1pi - recycle;
    d
}

/// The model with its initial conditions.
#[derive(Clone, Debug)]
pub struct ArabidopsisModel {
    pub initial: State,
}

impl Default for ArabidopsisModel {
    fn default() -> Self {
        ArabidopsisModel {
            initial: State::from_fn(|i, _| STATES[i].1),
        }
    }
}

struct Rhs<'a>(&'a RateParams);

impl System<f64, State> for Rhs<'_> {
    fn system(&self, _t: f64, y: &State, dy: &mut State) {
        *dy = arabidopsis_rhs(y, self.0);
    }
}

impl ArabidopsisModel {
    /// State at `t_end` from raw parameters, with the default tolerances.
    pub fn integrate(&self, raw: &[f64], t_end: f64) -> Result<State> {
        self.integrate_tol(raw, t_end, RTOL, ATOL)
    }

    pub fn integrate_tol(&self, raw: &[f64], t_end: f64, rtol: f64, atol: f64) -> Result<State> {
        let params = RateParams::new(raw)?;
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
        }
        let fail = |reason: String| Error::Integration {
            reason,
            params: raw.to_vec(),
        };
        let mut stepper = Dopri5::new(Rhs(&params), 0.0, t_end, t_end, self.initial, rtol, atol);
        stepper.set_output(OutputType::Sparse);
        stepper.integrate().map_err(|e| fail(e.to_string()))?;
        let y = *stepper
            .y_out()
            .last()
            .ok_or_else(|| fail("integrator produced no output".into()))?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(fail(format!("non-finite state at t = {t_end}")));
        }
        Ok(y)
    }

    /// `[ET]` at `T_OUTPUT` from raw parameters.
    pub fn et_at_output(&self, raw: &[f64]) -> Result<f64> {
        Ok(self.integrate(raw, T_OUTPUT)?[s::ET])
    }
}

/// `(1 - exp(-a t)) / a`, continuous at `a = 0`.
fn relax(a: f64, t: f64) -> f64 {
    let z = a * t;
    if z.abs() < 1e-300 {
        t
    } else {
        -(-z).exp_m1() / a
    }
}

/// `[ET](t)` on the boundary `k12a = 0`, where it decouples:
/// `[ET] = ((ET0 k13 - k12) exp(-k13 t) + k12) / k13`.
pub fn et_boundary_l(k12: f64, k13: f64, et0: f64, t: f64) -> f64 {
    et0 * (-k13 * t).exp() + k12 * relax(k13, t)
}

/// Initial values shared by the closed forms.
pub const AUXIN0: f64 = 0.1;
pub const CK0: f64 = 0.1;
pub const ET0: f64 = 0.1;

/// Below this gap between decay rates the resonant limit is used.
pub const RESONANCE_TOL: f64 = 1e-8;

/// Solution of `y' = c exp(-a t) - k13 y`, `y(0) = 0`.
fn forced(c: f64, a: f64, k13: f64, t: f64) -> f64 {
    let gap = k13 - a;
    if gap.abs() < RESONANCE_TOL {
        c * t * (-k13 * t).exp()
    } else {
        c * ((-a * t).exp() - (-k13 * t).exp()) / gap
    }
}

/// `[ET](t)` on the boundary `k1a = k2a = k3a = k18a = 0`.
///
/// There `[Auxin] = k2/k3 + (Auxin0 - k2/k3) exp(-k3 t)` and
/// `[CK] = CK0 exp(-k19 t)`, so `[ET]` solves a linear equation forced by
/// two exponentials. The result includes the homogeneous term
/// `ET0 exp(-k13 t)` and so equals `ET0` at `t = 0`.
#[allow(clippy::too_many_arguments)]
pub fn et_boundary_k(
    k2: f64,
    k3: f64,
    k12: f64,
    k12a: f64,
    k13: f64,
    k19: f64,
    auxin0: f64,
    ck0: f64,
    et0: f64,
    t: f64,
) -> f64 {
    let steady = k2 / k3;
    let c1 = k12a * ck0 * steady;
    let c2 = k12a * ck0 * (auxin0 - steady);
    et_boundary_l(k12, k13, et0, t) + forced(c1, k19, k13, t) + forced(c2, k3 + k19, k13, t)
}

fn bounds(i: usize) -> (f64, f64) {
    (PARAMS[i].1.sqrt(), PARAMS[i].2.sqrt())
}

/// Transformed coordinate of a raw value `v >= 0` for parameter `i`.
pub fn transform_one(i: usize, v: f64) -> f64 {
    let (lo, hi) = bounds(i);
    2.0 * (v.sqrt() - lo) / (hi - lo) - 1.0
}

/// Raw value for transformed coordinate `z` of parameter `i`.
///
/// Defined for `z` at or above the image of 0; values within a rounding
/// error of it map to exactly 0.
pub fn inverse_one(i: usize, z: f64) -> Result<f64> {
    let (lo, hi) = bounds(i);
    let u = lo + 0.5 * (z + 1.0) * (hi - lo);
    if !u.is_finite() || u < -1e-12 * hi {
        return Err(Error::OutOfRange {
            name: PARAMS[i].0.into(),
            value: z,
            min: boundary_location(i),
            max: f64::INFINITY,
        });
    }
    if u.abs() <= 1e-12 * hi {
        return Ok(0.0);
    }
    Ok(u * u)
}

/// Transformed location of raw value 0 for parameter `i`.
pub fn boundary_location(i: usize) -> f64 {
    transform_one(i, 0.0)
}

fn check_len(v: &[f64]) -> Result<()> {
    if v.len() != N_PARAMS {
        return Err(Error::DimensionMismatch {
            expected: N_PARAMS,
            got: v.len(),
        });
    }
    Ok(())
}

/// Map raw parameters inside their ranges onto `[-1, 1]^38`.
pub fn transform_inputs(raw: &[f64]) -> Result<Vec<f64>> {
    check_len(raw)?;
    raw.iter()
        .enumerate()
        .map(|(i, &v)| {
            let (name, min, max) = PARAMS[i];
            if !(min..=max).contains(&v) {
                return Err(Error::OutOfRange {
                    name: name.into(),
                    value: v,
                    min,
                    max,
                });
            }
            Ok(transform_one(i, v))
        })
        .collect()
}

/// Like [`transform_inputs`] but accepts any raw value `>= 0`.
pub fn transform_extended(raw: &[f64]) -> Result<Vec<f64>> {
    check_len(raw)?;
    raw.iter()
        .enumerate()
        .map(|(i, &v)| {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::OutOfRange {
                    name: PARAMS[i].0.into(),
                    value: v,
                    min: 0.0,
                    max: f64::INFINITY,
                });
            }
            Ok(transform_one(i, v))
        })
        .collect()
}

pub fn inverse_transform(z: &[f64]) -> Result<Vec<f64>> {
    check_len(z)?;
    z.iter().enumerate().map(|(i, &v)| inverse_one(i, v)).collect()
}

/// Simulator output `[ET](2)` as a function of transformed inputs.
pub fn et_transformed(z: &[f64]) -> Result<f64> {
    ArabidopsisModel::default().et_at_output(&inverse_transform(z)?)
}

/// Normal directions of boundary `K`.
pub const K_NORMAL: [usize; 4] = [p::K1A, p::K2A, p::K3A, p::K18A];
/// Normal direction of boundary `L`.
pub const L_NORMAL: [usize; 1] = [p::K12A];

fn raw_at(z: &[f64], i: usize) -> std::result::Result<f64, String> {
    inverse_one(i, z[i]).map_err(|e| e.to_string())
}

/// `K: k1a = k2a = k3a = k18a = 0` in transformed units.
pub fn boundary_k() -> Boundary {
    let alpha = K_NORMAL.iter().map(|&i| boundary_location(i)).collect();
    Boundary::new("K", N_PARAMS, K_NORMAL.to_vec(), alpha, std::sync::Arc::new(SolverK))
        .expect("valid boundary")
        .with_spec(SolverSpec::Builtin("arabidopsis.K".into()))
}

/// `L: k12a = 0` in transformed units.
pub fn boundary_l() -> Boundary {
    let alpha = L_NORMAL.iter().map(|&i| boundary_location(i)).collect();
    Boundary::new("L", N_PARAMS, L_NORMAL.to_vec(), alpha, std::sync::Arc::new(SolverL))
        .expect("valid boundary")
        .with_spec(SolverSpec::Builtin("arabidopsis.L".into()))
}

struct SolverK;

impl crate::geometry::BoundarySolver for SolverK {
    fn evaluate(&self, z: &[f64]) -> std::result::Result<f64, String> {
        Ok(et_boundary_k(
            raw_at(z, p::K2)?,
            raw_at(z, p::K3)?,
            raw_at(z, p::K12)?,
            raw_at(z, p::K12A)?,
            raw_at(z, p::K13)?,
            raw_at(z, p::K19)?,
            AUXIN0,
            CK0,
            ET0,
            T_OUTPUT,
        ))
    }
}

struct SolverL;

impl crate::geometry::BoundarySolver for SolverL {
    fn evaluate(&self, z: &[f64]) -> std::result::Result<f64, String> {
        Ok(et_boundary_l(raw_at(z, p::K12)?, raw_at(z, p::K13)?, ET0, T_OUTPUT))
    }
}

pub fn boundaries_arabidopsis() -> Vec<Boundary> {
    vec![boundary_k(), boundary_l()]
}

/// Validated subset of `K`, `L` by label.
pub fn boundary_set_arabidopsis(labels: &[&str]) -> Result<BoundarySet> {
    let all = boundaries_arabidopsis();
    let picked = labels
        .iter()
        .map(|l| {
            all.iter()
                .find(|b| b.label() == *l)
                .cloned()
                .ok_or_else(|| Error::Config(format!("unknown Arabidopsis boundary `{l}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    validate_set(picked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_raw(rng: &mut ChaCha8Rng) -> Vec<f64> {
        PARAMS.iter().map(|&(_, lo, hi)| rng.random_range(lo..=hi)).collect()
    }

    #[test]
    fn table_sizes() {
        assert_eq!(PARAMS.len(), 38);
        assert!(PARAMS.iter().all(|&(_, lo, hi)| 0.0 < lo && lo < hi));
        assert_eq!(STATES[s::AUXIN].1, 0.1);
        assert_eq!(STATES[s::CK].1, 0.1);
        assert_eq!(STATES[s::ET].1, 0.1);
    }

    #[test]
    fn k16_constraint() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let raw = random_raw(&mut rng);
        let k = RateParams::new(&raw).unwrap();
        assert_eq!(k.k16(), 0.3 * raw[p::K16A]);
    }

    #[test]
    fn feeding_derivatives_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let k = RateParams::new(&random_raw(&mut rng)).unwrap();
        let d = arabidopsis_rhs(&ArabidopsisModel::default().initial, &k);
        assert_eq!(d[s::IAA], 0.0);
        assert_eq!(d[s::CYTOKININ], 0.0);
        assert_eq!(d[s::ACC], 0.0);
    }

    #[test]
    fn et_decouples_when_k12a_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut raw = random_raw(&mut rng);
        raw[p::K12A] = 0.0;
        let k = RateParams::new(&raw).unwrap();
        let mut y = ArabidopsisModel::default().initial;
        y[s::ET] = 0.37;
        let base = arabidopsis_rhs(&y, &k)[s::ET];
        assert_relative_eq!(base, raw[p::K12] - raw[p::K13] * 0.37, max_relative = 1e-15);
        for i in (0..N_STATES).filter(|&i| i != s::ET) {
            let mut y2 = y;
            y2[i] += 0.5;
            assert_eq!(arabidopsis_rhs(&y2, &k)[s::ET], base);
        }
    }

    #[test]
    fn et_jacobian_by_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut raw = random_raw(&mut rng);
        raw[p::K12A] = 0.0;
        let k = RateParams::new(&raw).unwrap();
        let y = ArabidopsisModel::default().initial;
        let h = 1e-6;
        for i in 0..N_STATES {
            let (mut a, mut b) = (y, y);
            a[i] += h;
            b[i] -= h;
            let fd = (arabidopsis_rhs(&a, &k)[s::ET] - arabidopsis_rhs(&b, &k)[s::ET]) / (2.0 * h);
            let exact = if i == s::ET { -raw[p::K13] } else { 0.0 };
            assert!((fd - exact).abs() < 1e-8, "state {i}: {fd} vs {exact}");
        }
    }

    #[test]
    fn integrate_near_zero_returns_initial() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = ArabidopsisModel::default();
        let y = m.integrate(&random_raw(&mut rng), 1e-12).unwrap();
        assert!((y - m.initial).amax() < 1e-10);
        assert!(m.integrate(&random_raw(&mut rng), 0.0).is_err());
    }

    #[test]
    fn boundary_l_values() {
        assert_eq!(et_boundary_l(0.2, 0.5, 0.1, 0.0), 0.1);
        let v = et_boundary_l(0.2, 0.5, 0.1, 2.0);
        assert_relative_eq!(v, ((0.05 - 0.2) * (-1.0f64).exp() + 0.2) / 0.5, max_relative = 1e-14);
        assert!((v - 0.289637).abs() < 1e-6);
        assert_relative_eq!(et_boundary_l(0.2, 0.5, 0.1, 200.0), 0.4, max_relative = 1e-14);
    }

    #[test]
    fn boundary_k_reduces_to_l() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let (k12, k13, t) = (rng.random_range(0.01..0.4), rng.random_range(0.1..1.0), rng.random_range(0.0..5.0));
            let a = et_boundary_k(0.3, 2.0, k12, 0.0, k13, 1.5, AUXIN0, CK0, ET0, t);
            assert_relative_eq!(a, et_boundary_l(k12, k13, ET0, t), max_relative = 1e-14);
        }
        assert_eq!(et_boundary_k(0.3, 2.0, 0.1, 0.3, 0.5, 1.5, AUXIN0, CK0, ET0, 0.0), ET0);
    }

    #[test]
    fn resonant_cases_are_continuous() {
        let base = |k19: f64, k3: f64| et_boundary_k(0.3, k3, 0.1, 0.3, 0.5, k19, AUXIN0, CK0, ET0, 2.0);
        assert_relative_eq!(base(0.5, 2.0), base(0.5 + 1e-6, 2.0), max_relative = 1e-6);
        assert_relative_eq!(base(0.2, 0.3), base(0.2 + 1e-6, 0.3), max_relative = 1e-6);
        assert!(base(0.5, 2.0).is_finite() && base(0.2, 0.3).is_finite());
    }

    #[test]
    fn closed_forms_match_integrator() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = ArabidopsisModel::default();
        for _ in 0..5 {
            let mut raw = random_raw(&mut rng);
            raw[p::K12A] = 0.0;
            let ode = m.et_at_output(&raw).unwrap();
            let cf = et_boundary_l(raw[p::K12], raw[p::K13], ET0, T_OUTPUT);
            assert_relative_eq!(ode, cf, max_relative = 1e-6);

            let mut raw = random_raw(&mut rng);
            for i in K_NORMAL {
                raw[i] = 0.0;
            }
            let ode = m.et_at_output(&raw).unwrap();
            let cf = et_boundary_k(
                raw[p::K2], raw[p::K3], raw[p::K12], raw[p::K12A], raw[p::K13], raw[p::K19],
                AUXIN0, CK0, ET0, T_OUTPUT,
            );
            assert_relative_eq!(ode, cf, max_relative = 1e-6);
        }
    }

    #[test]
    fn transform_endpoints() {
        for i in 0..N_PARAMS {
            let (_, lo, hi) = PARAMS[i];
            assert!((transform_one(i, lo) + 1.0).abs() < 1e-15);
            assert!((transform_one(i, hi) - 1.0).abs() < 1e-15);
            assert!(boundary_location(i) < -1.0);
            assert_eq!(inverse_one(i, boundary_location(i)).unwrap(), 0.0);
            assert!(inverse_one(i, boundary_location(i) - 0.1).is_err());
        }
        let mid = ((0.1f64.sqrt() + 2.0) / 2.0).powi(2);
        assert!(transform_one(p::K1, mid).abs() < 1e-15);
        let mut raw: Vec<f64> = PARAMS.iter().map(|t| t.1).collect();
        raw[0] = 5.0;
        assert!(transform_inputs(&raw).is_err());
        assert!(transform_extended(&raw).is_ok());
    }

    #[test]
    fn boundary_solvers_match_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let z: Vec<f64> = (0..N_PARAMS).map(|_| rng.random_range(-1.0..1.0)).collect();
        let raw = inverse_transform(&z).unwrap();
        let on_l = boundary_l().project_point(&z);
        assert_relative_eq!(
            boundary_l().solve(&on_l).unwrap(),
            et_boundary_l(raw[p::K12], raw[p::K13], ET0, T_OUTPUT),
            max_relative = 1e-14
        );
        let set = boundary_set_arabidopsis(&["K", "L"]).unwrap();
        assert_eq!(set.len(), 2);
    }

    proptest! {
        #[test]
        fn transform_round_trip(u in prop::collection::vec(0.0..1.0f64, N_PARAMS)) {
            let raw: Vec<f64> = u.iter().zip(PARAMS.iter()).map(|(t, &(_, lo, hi))| lo + t * (hi - lo)).collect();
            let z = transform_inputs(&raw).unwrap();
            prop_assert!(z.iter().all(|v| (-1.0 - 1e-12..=1.0 + 1e-12).contains(v)));
            let back = inverse_transform(&z).unwrap();
            for (a, b) in raw.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
