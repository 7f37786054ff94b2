use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::step::{Rational, StepFunction1D};
use crate::error::{Error, Result};

/// Volume of `{t ∈ box : t·v < c}` for `v_j > 0`, box `Π [a_j, a_j + w_j]`:
/// `Σ_S (−1)^{|S|} (c − v·a − Σ_{j∈S} v_j w_j)_+^m / (m! Π v_j)`.
fn halfspace_box_volume(v: &[Rational], a: &[Rational], w: &[Rational], c: &Rational) -> Rational {
    let m = v.len();
    let base = c - v.iter().zip(a).fold(Rational::zero(), |acc, (vj, aj)| acc + vj * aj);
    let mut total = Rational::zero();
    for mask in 0u32..(1 << m) {
        let mut x = base.clone();
        for j in 0..m {
            if mask & (1 << j) != 0 {
                x -= &v[j] * &w[j];
            }
        }
        if x.is_positive() {
            let term = num_traits::pow(x, m);
            if mask.count_ones() % 2 == 0 {
                total += term;
            } else {
                total -= term;
            }
        }
    }
    let denom = v.iter().fold(Rational::one(), |acc, vj| acc * vj)
        * Rational::from_integer(BigInt::from((1..=m as u64).product::<u64>()));
    total / denom
}

/// Exact volume of `{t ∈ Π [lo_j, hi_j] : alpha < t·v < beta}`; all `v_j ≠ 0`.
pub fn slab_box_volume(
    v: &[Rational],
    lo: &[Rational],
    hi: &[Rational],
    alpha: &Rational,
    beta: &Rational,
) -> Rational {
    // flip coordinates with negative coefficients
    let mut vp = Vec::with_capacity(v.len());
    let mut a = Vec::with_capacity(v.len());
    let mut w = Vec::with_capacity(v.len());
    for j in 0..v.len() {
        if v[j].is_negative() {
            vp.push(-v[j].clone());
            a.push(-hi[j].clone());
        } else {
            vp.push(v[j].clone());
            a.push(lo[j].clone());
        }
        w.push(&hi[j] - &lo[j]);
    }
    if beta <= alpha {
        return Rational::zero();
    }
    halfspace_box_volume(&vp, &a, &w, beta) - halfspace_box_volume(&vp, &a, &w, alpha)
}

/// `T_v(F_0, …, F_m) = ∫_{R^m} F_0(t·v) Π_j F_j(t_j) dt`, evaluated exactly
/// by expanding into indicator products and slab-box volumes.
pub fn tv_form(v: &[Rational], f0: &StepFunction1D, fs: &[StepFunction1D]) -> Result<Rational> {
    if v.len() != fs.len() || v.is_empty() {
        return Err(Error::Invalid("T_v needs one coefficient per function F_1..F_m".into()));
    }
    if v.iter().any(|x| x.is_zero()) {
        return Err(Error::Invalid("all coefficients v_j must be nonzero".into()));
    }
    if f0.is_zero() || fs.iter().any(|f| f.is_zero()) {
        return Ok(Rational::zero());
    }
    let m = v.len();
    let pieces: Vec<Vec<(&Rational, &Rational, &Rational)>> = fs.iter().map(|f| f.pieces().collect()).collect();
    let mut total = Rational::zero();
    let mut idx = vec![0usize; m];
    let mut lo = vec![Rational::zero(); m];
    let mut hi = vec![Rational::zero(); m];
    loop {
        let mut weight = Rational::one();
        for j in 0..m {
            let (a, b, c) = pieces[j][idx[j]];
            lo[j] = a.clone();
            hi[j] = b.clone();
            weight *= c;
        }
        for (alpha, beta, c0) in f0.pieces() {
            total += &weight * c0 * slab_box_volume(v, &lo, &hi, alpha, beta);
        }
        // odometer over piece indices
        let mut j = 0;
        loop {
            idx[j] += 1;
            if idx[j] < pieces[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
            if j == m {
                return Ok(total);
            }
        }
    }
}

/// Floating-point cross-check for `m = 2`: clips the rectangle by the two
/// half-planes of the slab and takes the shoelace area.
pub fn slab_rectangle_area(v: [f64; 2], lo: [f64; 2], hi: [f64; 2], alpha: f64, beta: f64) -> f64 {
    let mut poly = vec![[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]];
    let clip = |poly: Vec<[f64; 2]>, s: f64, c: f64| -> Vec<[f64; 2]> {
        // keep s·(v·p − c) <= 0
        let g = |p: &[f64; 2]| s * (v[0] * p[0] + v[1] * p[1] - c);
        let mut out = Vec::new();
        for i in 0..poly.len() {
            let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
            let (gp, gq) = (g(&p), g(&q));
            if gp <= 0.0 {
                out.push(p);
            }
            if (gp < 0.0 && gq > 0.0) || (gp > 0.0 && gq < 0.0) {
                let t = gp / (gp - gq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        out
    };
    poly = clip(poly, 1.0, beta);
    poly = clip(poly, -1.0, alpha);
    if poly.len() < 3 {
        return 0.0;
    }
    let mut a = 0.0;
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a.abs()
}

/// Coefficients `λ_{k,j}` of `L_k = Σ_{j≠k} λ_{k,j} L_j` for the forms
/// `L_0(t) = t·v`, `L_j(t) = t_j`, with slacks `Σ_{j≠k} |λ_{k,j}| r_j − r_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub lengths: Vec<Rational>,
    /// `(m+1) × (m+1)`, zero on the diagonal.
    pub lambda: Vec<Vec<Rational>>,
    pub slacks: Vec<Rational>,
    pub admissible: bool,
    pub strictly_admissible: bool,
}

impl AdmissibilityReport {
    /// Index of the first failing row, if any.
    pub fn first_violation(&self) -> Option<usize> {
        self.slacks.iter().position(|s| s.is_negative())
    }
}

/// Admissibility of the lengths `(r_0, …, r_m)` for the `T_v` layout.
///
/// Any `m` of the `m + 1` forms are independent exactly when every `v_j` is
/// nonzero; the dependent form is then solved for in closed form:
/// `λ_{0,j} = v_j`, `λ_{k,0} = 1/v_k`, `λ_{k,j} = −v_j/v_k`.
pub fn admissibility(v: &[Rational], lengths: &[Rational]) -> Result<AdmissibilityReport> {
    let m = v.len();
    if lengths.len() != m + 1 {
        return Err(Error::Invalid(format!("need {} lengths", m + 1)));
    }
    if v.iter().any(|x| x.is_zero()) {
        return Err(Error::Invalid(
            "a subsystem of the forms is singular (some v_j = 0)".into(),
        ));
    }
    if lengths.iter().any(|r| r.is_negative()) {
        return Err(Error::NegativeInput);
    }
    let mut lambda = vec![vec![Rational::zero(); m + 1]; m + 1];
    lambda[0][1..=m].clone_from_slice(v);
    for k in 1..=m {
        let vk = &v[k - 1];
        lambda[k][0] = Rational::one() / vk;
        for j in 1..=m {
            if j != k {
                lambda[k][j] = -(&v[j - 1] / vk);
            }
        }
    }
    let slacks: Vec<Rational> = (0..=m)
        .map(|k| {
            (0..=m)
                .filter(|j| *j != k)
                .fold(Rational::zero(), |acc, j| acc + lambda[k][j].abs() * &lengths[j])
                - &lengths[k]
        })
        .collect();
    Ok(AdmissibilityReport {
        lengths: lengths.to_vec(),
        admissible: slacks.iter().all(|s| !s.is_negative()),
        strictly_admissible: slacks.iter().all(|s| s.is_positive()),
        lambda,
        slacks,
    })
}

/// Outcome of comparing `T_v` on intervals with centers `c_j` against the
/// centered intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct BurchardVerdict {
    pub admissibility: AdmissibilityReport,
    /// `None` when the lengths are inadmissible and the test was skipped.
    pub value: Option<Rational>,
    pub centered_value: Option<Rational>,
    pub equality: Option<bool>,
    /// `c_0 = Σ v_j c_j`.
    pub center_relation: bool,
}

impl BurchardVerdict {
    /// Whether the equality verdict agrees with the center relation
    /// (`None` when skipped).
    pub fn consistent(&self) -> Option<bool> {
        self.equality.map(|e| e == self.center_relation)
    }
}

/// Equality test for `T_v` on intervals `E_j` of the given centers and
/// lengths. Equality is declared when the two exact values agree to a
/// relative 1e−12.
pub fn burchard_equality_test(v: &[Rational], centers: &[Rational], lengths: &[Rational]) -> Result<BurchardVerdict> {
    let m = v.len();
    if centers.len() != m + 1 {
        return Err(Error::Invalid(format!("need {} centers", m + 1)));
    }
    let adm = admissibility(v, lengths)?;
    let predicted = (1..=m).fold(Rational::zero(), |acc, j| acc + &v[j - 1] * &centers[j]);
    let center_relation = centers[0] == predicted;
    if !adm.admissible {
        log::warn!("inadmissible lengths: Burchard test skipped");
        return Ok(BurchardVerdict {
            admissibility: adm,
            value: None,
            centered_value: None,
            equality: None,
            center_relation,
        });
    }
    let build = |c: &Rational, r: &Rational| StepFunction1D::interval(c, r);
    let zero = Rational::zero();
    let f0 = build(&centers[0], &lengths[0])?;
    let fs = (1..=m)
        .map(|j| build(&centers[j], &lengths[j]))
        .collect::<Result<Vec<_>>>()?;
    let g0 = build(&zero, &lengths[0])?;
    let gs = (1..=m).map(|j| build(&zero, &lengths[j])).collect::<Result<Vec<_>>>()?;
    let a = tv_form(v, &f0, &fs)?;
    let b = tv_form(v, &g0, &gs)?;
    let tol = Rational::new(BigInt::one(), BigInt::from(10u64).pow(12));
    let equality = (&a - &b).abs() <= tol * b.abs();
    Ok(BurchardVerdict {
        admissibility: adm,
        value: Some(a),
        centered_value: Some(b),
        equality: Some(equality),
        center_relation,
    })
}

#[cfg(test)]
mod tests {
    use super::super::step::{ratio, rational};
    use super::*;
    use num_traits::ToPrimitive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit() -> StepFunction1D {
        StepFunction1D::indicator(ratio(-1, 2), ratio(1, 2), ratio(1, 1)).unwrap()
    }

    #[test]
    fn three_boxes() {
        let v = [ratio(1, 1), ratio(1, 1)];
        let val = tv_form(&v, &unit(), &[unit(), unit()]).unwrap();
        assert_eq!(val, ratio(3, 4));
        // brute-force midpoint count on a 2-D grid
        let n = 2000;
        let h = 1.0 / n as f64;
        let mut count = 0usize;
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (-0.5 + (i as f64 + 0.5) * h, -0.5 + (j as f64 + 0.5) * h);
                if (a + b).abs() < 0.5 {
                    count += 1;
                }
            }
        }
        assert!((count as f64 * h * h - 0.75).abs() < 2e-3);
        assert!(tv_form(&v, &StepFunction1D::zero(), &[unit(), unit()])
            .unwrap()
            .is_zero());
        assert!(tv_form(&[ratio(0, 1), ratio(1, 1)], &unit(), &[unit(), unit()]).is_err());
    }

    #[test]
    fn polygon_cross_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let v = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let lo = [rng.gen_range(-2.0..1.0), rng.gen_range(-2.0..1.0)];
            let hi = [lo[0] + rng.gen_range(0.1..2.0), lo[1] + rng.gen_range(0.1..2.0)];
            let alpha: f64 = rng.gen_range(-3.0..2.0);
            let beta = alpha + rng.gen_range(0.05..3.0);
            let r = |x: f64| rational(x).unwrap();
            let exact = slab_box_volume(
                &[r(v[0]), r(v[1])],
                &[r(lo[0]), r(lo[1])],
                &[r(hi[0]), r(hi[1])],
                &r(alpha),
                &r(beta),
            );
            let poly = slab_rectangle_area(v, lo, hi, alpha, beta);
            assert!(
                (exact.to_f64().unwrap() - poly).abs() < 1e-12,
                "{} vs {poly}",
                exact.to_f64().unwrap()
            );
        }
    }

    #[test]
    fn permutation_and_sign_symmetry() {
        let f1 = StepFunction1D::from_f64(&[-1.0, 0.5, 2.0], &[1.0, 3.0]).unwrap();
        let f2 = StepFunction1D::from_f64(&[0.0, 1.0], &[2.0]).unwrap();
        let f0 = StepFunction1D::from_f64(&[-2.0, 0.0, 1.5], &[1.0, 0.5]).unwrap();
        let (a, b) = (ratio(3, 2), ratio(-1, 3));
        let x = tv_form(&[a.clone(), b.clone()], &f0, &[f1.clone(), f2.clone()]).unwrap();
        let y = tv_form(&[b, a], &f0, &[f2, f1]).unwrap();
        assert_eq!(x, y);
        let box_ = StepFunction1D::indicator(ratio(-1, 1), ratio(1, 1), ratio(1, 1)).unwrap();
        let p = tv_form(&[ratio(2, 1), ratio(1, 3)], &f0, &[box_.clone(), box_.clone()]).unwrap();
        let q = tv_form(&[ratio(-2, 1), ratio(1, 3)], &f0, &[box_.clone(), box_]).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn admissibility_tables() {
        let v = [ratio(1, 1), ratio(1, 1)];
        let ones = [ratio(1, 1), ratio(1, 1), ratio(1, 1)];
        let rep = admissibility(&v, &ones).unwrap();
        assert!(rep.strictly_admissible);
        assert!(rep.slacks.iter().all(|s| *s == ratio(1, 1)));
        let rep = admissibility(&v, &[ratio(10, 1), ratio(1, 1), ratio(1, 1)]).unwrap();
        assert!(!rep.admissible);
        assert_eq!(rep.first_violation(), Some(0));
        // strict admissibility survives small perturbations
        let eps = ratio(1, 1_000_000);
        let pert = [&ones[0] + &eps, &ones[1] - &eps, ones[2].clone()];
        assert!(admissibility(&v, &pert).unwrap().strictly_admissible);
    }

    #[test]
    fn burchard_examples() {
        let v = [ratio(1, 1), ratio(1, 1)];
        let len = [ratio(1, 1), ratio(1, 1), ratio(1, 1)];
        let on = burchard_equality_test(&v, &[ratio(3, 10), ratio(1, 10), ratio(1, 5)], &len).unwrap();
        assert_eq!(on.equality, Some(true));
        assert!(on.center_relation);
        let off = burchard_equality_test(&v, &[ratio(5, 10), ratio(1, 10), ratio(1, 5)], &len).unwrap();
        assert_eq!(off.equality, Some(false));
        assert!(off.value.unwrap() < off.centered_value.unwrap());
        let zero = [ratio(0, 1), ratio(0, 1), ratio(0, 1)];
        assert_eq!(burchard_equality_test(&v, &zero, &len).unwrap().equality, Some(true));
        let bad = burchard_equality_test(&v, &zero, &[ratio(10, 1), ratio(1, 1), ratio(1, 1)]).unwrap();
        assert_eq!(bad.equality, None);
    }
}
