//! Closed-form adjusted moments for specific boundary configurations.
//!
//! These are evaluated directly from the formulas, independently of the
//! recursion in [`crate::engine::BoundaryAdjustedPrior`], and serve as
//! fixtures for it. `Delta f(y) = f(y) - beta` throughout. For two
//! boundaries `K` and `L` with `J_K` contained in `J_L`, the offset of `L`
//! from `K` is `alpha^L - alpha^K` on `J_K`: the value of `a^K` at any point
//! of `L`.

use super::EmulatorPrior;
use crate::error::{Error, Result};
use crate::geometry::{classify_pair, sequential_project, Boundary, PairClass};
use crate::kernel::complement;

fn delta_f(prior: &EmulatorPrior, b: &Boundary, y: &[f64]) -> Result<f64> {
    Ok(b.solve(y)? - prior.beta())
}

fn offset(x: &[f64], b: &Boundary) -> Vec<f64> {
    let y = b.project_point(x);
    x.iter().zip(&y).map(|(a, c)| a - c).collect()
}

fn union(sets: &[&[usize]]) -> Vec<usize> {
    let mut out: Vec<usize> = sets.iter().flat_map(|s| s.iter().copied()).collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn minus(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|j| !b.contains(j)).collect()
}

fn diff(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

fn require_orthogonal(bs: &[&Boundary]) -> Result<()> {
    for (i, a) in bs.iter().enumerate() {
        for b in &bs[i + 1..] {
            if classify_pair(a, b) != PairClass::OrthogonalIntersecting {
                return Err(Error::InvalidArgument(format!(
                    "`{}` and `{}` are not intersecting orthogonal boundaries",
                    a.label(),
                    b.label()
                )));
            }
        }
    }
    Ok(())
}

fn require_chain(bs: &[&Boundary]) -> Result<()> {
    for w in bs.windows(2) {
        let nested = w[0].normal().iter().all(|j| w[1].normal().contains(j));
        if !nested || w[0].p() != w[1].p() {
            return Err(Error::InvalidArgument(format!(
                "`{}` does not nest in `{}`",
                w[1].label(),
                w[0].label()
            )));
        }
    }
    Ok(())
}

/// Adjusted mean after two intersecting orthogonal boundaries:
/// `E f(x) + r_K(a^K) Df(x^K) + r_L(a^L) Df(x^L) - r_{K u L}(a^{LK}) Df(x^{LK})`.
pub fn two_orthogonal_mean(prior: &EmulatorPrior, k: &Boundary, l: &Boundary, x: &[f64]) -> Result<f64> {
    require_orthogonal(&[k, l])?;
    let kern = prior.kernel();
    let xk = k.project_point(x);
    let xl = l.project_point(x);
    let xlk = sequential_project(x, &[k, l])?;
    let jkl = union(&[k.normal(), l.normal()]);
    Ok(prior.beta()
        + kern.corr_on(k.normal(), &offset(x, k)) * delta_f(prior, k, &xk)?
        + kern.corr_on(l.normal(), &offset(x, l)) * delta_f(prior, l, &xl)?
        - kern.corr_on(&jkl, &diff(x, &xlk)) * delta_f(prior, k, &xlk)?)
}

/// Adjusted covariance after two intersecting orthogonal boundaries,
/// `sigma2 r_P(x - x') sum_T (-1)^|T| r_{J\J_T}(x - x') r_{J_T}(a) r_{J_T}(a')`.
pub fn two_orthogonal_cov(prior: &EmulatorPrior, k: &Boundary, l: &Boundary, x: &[f64], x2: &[f64]) -> Result<f64> {
    require_orthogonal(&[k, l])?;
    let kern = prior.kernel();
    let a = diff(x, &sequential_project(x, &[k, l])?);
    let a2 = diff(x2, &sequential_project(x2, &[k, l])?);
    let d = diff(x, x2);
    let jkl = union(&[k.normal(), l.normal()]);
    let rest = complement(prior.p(), &jkl);
    let subsets: [Vec<usize>; 4] = [vec![], k.normal().to_vec(), l.normal().to_vec(), jkl.clone()];
    let signs = [1.0, -1.0, -1.0, 1.0];
    let mut s = 0.0;
    for (jt, sign) in subsets.iter().zip(signs) {
        s += sign
            * kern.corr_on(&minus(&jkl, jt), &d)
            * kern.corr_on(jt, &a)
            * kern.corr_on(jt, &a2);
    }
    Ok(prior.sigma2() * kern.corr_on(&rest, &d) * s)
}

/// Adjusted mean after `h` mutually intersecting orthogonal boundaries,
/// by inclusion-exclusion over nonempty subsets.
pub fn orthogonal_mean(prior: &EmulatorPrior, bs: &[&Boundary], x: &[f64]) -> Result<f64> {
    require_orthogonal(bs)?;
    let kern = prior.kernel();
    let h = bs.len();
    let mut m = prior.beta();
    for mask in 1u32..(1 << h) {
        let t: Vec<&Boundary> = (0..h).filter(|i| mask & (1 << i) != 0).map(|i| bs[i]).collect();
        let jt = union(&t.iter().map(|b| b.normal()).collect::<Vec<_>>());
        let xt = sequential_project(x, &t)?;
        let sign = if t.len() % 2 == 1 { 1.0 } else { -1.0 };
        m += sign * kern.corr_on(&jt, &diff(x, &xt)) * delta_f(prior, t[0], &xt)?;
    }
    Ok(m)
}

/// Adjusted covariance after `h` mutually intersecting orthogonal boundaries.
pub fn orthogonal_cov(prior: &EmulatorPrior, bs: &[&Boundary], x: &[f64], x2: &[f64]) -> Result<f64> {
    require_orthogonal(bs)?;
    let kern = prior.kernel();
    let h = bs.len();
    let jh = union(&bs.iter().map(|b| b.normal()).collect::<Vec<_>>());
    let a = diff(x, &sequential_project(x, bs)?);
    let a2 = diff(x2, &sequential_project(x2, bs)?);
    let d = diff(x, x2);
    let mut s = 0.0;
    for mask in 0u32..(1 << h) {
        let t: Vec<&[usize]> = (0..h).filter(|i| mask & (1 << i) != 0).map(|i| bs[i].normal()).collect();
        let jt = union(&t);
        let sign = if t.len() % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * kern.corr_on(&minus(&jh, &jt), &d) * kern.corr_on(&jt, &a) * kern.corr_on(&jt, &a2);
    }
    Ok(prior.sigma2() * kern.corr_on(&complement(prior.p(), &jh), &d) * s)
}

/// The recursively defined correlation `R^(g)` of a parallel chain, for
/// `g` in `0..=bs.len()`. Depends on `x`, `x'` through `J_g` only, so a
/// boundary `K_i` (with `i >= g`) may stand in for any of its points.
pub fn chain_corr(prior: &EmulatorPrior, bs: &[&Boundary], g: usize, x: &[f64], x2: &[f64]) -> f64 {
    if g == 0 {
        return 1.0;
    }
    let kern = prior.kernel();
    let kg = bs[g - 1];
    let prev: &[usize] = if g >= 2 { bs[g - 2].normal() } else { &[] };
    let new = minus(kg.normal(), prev);
    let y = kg.project_point(x);
    let first = chain_corr(prior, bs, g - 1, x, x2) * kern.corr_on(&new, &diff(x, x2));
    let num = chain_corr(prior, bs, g - 1, x, &y) * chain_corr(prior, bs, g - 1, x2, &y);
    let den = chain_corr(prior, bs, g - 1, &y, &y);
    let tail = kern.corr_on(&new, &offset(x, kg)) * kern.corr_on(&new, &offset(x2, kg));
    first - num / den * tail
}

/// Which factor the inner product of the parallel-chain mean uses for the
/// `l`-th step of a sequence `b`. The two agree for chains of length at
/// most 3; from length 4 only `NextInSequence` matches the recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainMeanVariant {
    /// `R^(b_l - 1)(K_gamma, K_{b_l})`
    Gamma,
    /// `R^(b_l - 1)(K_{b_{l+1}}, K_{b_l})`
    NextInSequence,
}

/// Adjusted mean after a parallel chain `K_1, ..., K_h` with
/// `J_{i-1}` contained in `J_i`, taken in that order.
pub fn parallel_mean(prior: &EmulatorPrior, bs: &[&Boundary], x: &[f64], variant: ChainMeanVariant) -> Result<f64> {
    require_chain(bs)?;
    let kern = prior.kernel();
    let h = bs.len();
    // a representative point of K_i, anchored at x
    let on = |i: usize| bs[i - 1].project_point(x);
    let new_dims = |i: usize| {
        let prev: &[usize] = if i >= 2 { bs[i - 2].normal() } else { &[] };
        minus(bs[i - 1].normal(), prev)
    };
    let k1 = bs[0];
    let mut m = prior.beta() + kern.corr_on(k1.normal(), &offset(x, k1)) * delta_f(prior, k1, &on(1))?;
    for g in 2..=h {
        let kg = on(g);
        let coef = chain_corr(prior, bs, g - 1, x, &kg) / chain_corr(prior, bs, g - 1, &kg, &kg)
            * kern.corr_on(&new_dims(g), &offset(x, bs[g - 1]));
        let mut inner = delta_f(prior, bs[g - 1], &kg)?;
        // increasing sequences b_1 < ... < b_i = g over 1..g
        for mask in 1u32..(1 << (g - 1)) {
            let mut b: Vec<usize> = (1..g).filter(|i| mask & (1 << (i - 1)) != 0).collect();
            b.push(g);
            let i = b.len();
            let mut prod = 1.0;
            for l in 0..i - 1 {
                let bl = b[l];
                let ybl = on(bl);
                let lhs = match variant {
                    ChainMeanVariant::Gamma => kg.clone(),
                    ChainMeanVariant::NextInSequence => on(b[l + 1]),
                };
                prod *= chain_corr(prior, bs, bl - 1, &lhs, &ybl) / chain_corr(prior, bs, bl - 1, &ybl, &ybl);
                let gap = diff(&on(b[l + 1]), &ybl);
                prod *= kern.corr_on(&new_dims(bl), &gap);
            }
            let seq: Vec<&Boundary> = b.iter().map(|&i| bs[i - 1]).collect();
            let xb = sequential_project(x, &seq)?;
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            inner += sign * prod * delta_f(prior, bs[b[0] - 1], &xb)?;
        }
        m += coef * inner;
    }
    Ok(m)
}

/// Adjusted covariance after a parallel chain.
pub fn parallel_cov(prior: &EmulatorPrior, bs: &[&Boundary], x: &[f64], x2: &[f64]) -> Result<f64> {
    require_chain(bs)?;
    let h = bs.len();
    let rest = complement(prior.p(), bs[h - 1].normal());
    Ok(prior.sigma2() * prior.kernel().corr_on(&rest, &diff(x, x2)) * chain_corr(prior, bs, h, x, x2))
}

/// Two parallel boundaries `K`, `L` (`J_K` within `J_L`) and a third `M`
/// orthogonal to both with normal directions disjoint from theirs.
/// Returns the adjusted mean at `x` and covariance between `x` and `x2`.
pub fn parallel_pair_with_orthogonal(
    prior: &EmulatorPrior,
    k: &Boundary,
    l: &Boundary,
    m: &Boundary,
    x: &[f64],
    x2: &[f64],
) -> Result<(f64, f64)> {
    require_chain(&[k, l])?;
    let jkl = l.normal();
    if m.normal().iter().any(|j| jkl.contains(j) || k.normal().contains(j)) {
        return Err(Error::InvalidArgument(format!(
            "`{}` must have normal directions disjoint from the chain",
            m.label()
        )));
    }
    let kern = prior.kernel();
    let new = minus(l.normal(), k.normal());
    let off_l = offset(&l.project_point(x), k);
    let ak = offset(x, k);
    let coef = |x: &[f64]| {
        let ak = offset(x, k);
        kern.updated_corr_on(k.normal(), &ak, &off_l) / kern.updated_corr_on(k.normal(), &off_l, &off_l)
            * kern.corr_on(&new, &offset(x, l))
    };
    let rm = kern.corr_on(m.normal(), &offset(x, m));
    // Df(y) - r_M(a^M) Df(y^M): the M-adjusted residual at a chain point
    let resid = |b: &Boundary, y: &[f64]| -> Result<f64> {
        let ym = m.project_point(y);
        Ok(delta_f(prior, b, y)? - rm * delta_f(prior, m, &ym)?)
    };
    let xk = k.project_point(x);
    let xl = l.project_point(x);
    let xlk = sequential_project(x, &[k, l])?;
    let c = coef(x);
    let mean = prior.beta()
        + rm * delta_f(prior, m, &m.project_point(x))?
        + kern.corr_on(k.normal(), &ak) * resid(k, &xk)?
        + c * resid(l, &xl)?
        - c * kern.corr_on(k.normal(), &off_l) * resid(k, &xlk)?;

    let d = diff(x, x2);
    let r2 = kern.updated_corr_on(k.normal(), &ak, &offset(x2, k)) * kern.corr_on(&new, &d)
        - coef(x) * coef(x2) * kern.updated_corr_on(k.normal(), &off_l, &off_l);
    let jall = union(&[jkl, m.normal()]);
    let cov = prior.sigma2()
        * r2
        * kern.updated_corr_on(m.normal(), &offset(x, m), &offset(x2, m))
        * kern.corr_on(&complement(prior.p(), &jall), &d);
    Ok((mean, cov))
}
