use std::io::Write;
use std::str::FromStr;

use anyhow::Result;
use num_bigint::BigInt;
use sharp_radon_core::multilinear::{admissibility, burchard_equality_test, drury_form, Rational};
use sharp_radon_core::tolerances::DRURY_SIGMAS;
use sharp_radon_core::transforms::radon_norm;
use sharp_radon_core::TransformConfig;

use super::{dimension, field};
use crate::config::Settings;
use crate::output::Output;
use crate::{Usage, Verdict};

pub fn drury(s: &Settings, out: &Output) -> Result<Verdict> {
    let dim = dimension(s)?;
    let d = dim.d();
    let f = field(s, "f", Some("family=extremizer a=1 c=1"), dim)?;
    let samples = s.count("samples", 1_000_000)?;
    let seed = s.get("seed", 1u64)?;
    if samples == 0 {
        return Err(Usage("samples must be positive".into()).into());
    }
    let fields = vec![f.clone(); d + 1];
    let t0 = std::time::Instant::now();
    let est = drury_form(&fields, samples, seed)?;
    out.note("seconds_monte_carlo", format!("{:.3}", t0.elapsed().as_secs_f64()));
    let factorial: f64 = (1..d).map(|k| k as f64).product();
    let target = factorial * radon_norm(&f, dim.q(), &TransformConfig::default())?.powi(d as i32 + 1);
    let z = (est.estimate - target) / est.standard_error;

    let mut w = out.file("drury.txt")?;
    writeln!(w, "estimate = {:.9e}", est.estimate)?;
    writeln!(w, "mean = {:.9e}", est.mean)?;
    writeln!(w, "standard_error = {:.3e}", est.standard_error)?;
    writeln!(w, "samples = {}", est.samples)?;
    writeln!(w, "rejected = {}", est.rejected)?;
    writeln!(w, "seed = {}", est.seed)?;
    writeln!(w, "quadrature_target = {target:.9e}")?;
    writeln!(w, "z = {z:.3}")?;
    w.flush()?;
    println!(
        "estimate {:.6e} ± {:.1e}, quadrature {target:.6e}, z = {z:.2}",
        est.estimate, est.standard_error
    );
    Ok(if z.abs() <= DRURY_SIGMAS {
        Verdict::Ok
    } else {
        Verdict::Failed
    })
}

/// Exact rational from `p/q`, an integer, or a decimal such as `-1.25`.
pub(crate) fn parse_rational(text: &str) -> Result<Rational, Usage> {
    let t = text.trim();
    let bad = || Usage(format!("'{t}' is not a decimal or p/q rational"));
    if t.contains('/') {
        let r = Rational::from_str(t).map_err(|_| bad())?;
        return Ok(r);
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let den = BigInt::from(10u32).pow(frac.len() as u32);
    let r = Rational::new(num, den);
    Ok(if neg { -r } else { r })
}

fn rational_list(s: &Settings, key: &str, default: &str) -> Result<Vec<Rational>, Usage> {
    s.get(key, default.to_string())?
        .split(',')
        .map(parse_rational)
        .collect()
}

pub fn burchard(s: &Settings, out: &Output) -> Result<Verdict> {
    let m = s.get("m", 2usize)?;
    if m < 1 {
        return Err(Usage("m must be at least 1".into()).into());
    }
    let ones = vec!["1"; m].join(",");
    let v = rational_list(s, "v", &ones)?;
    let lengths = rational_list(s, "lengths", &vec!["1"; m + 1].join(","))?;
    if v.len() != m || lengths.len() != m + 1 {
        return Err(Usage(format!("need {m} coefficients and {} lengths", m + 1)).into());
    }
    let g = s.get("grid", 20usize)?;
    if g == 0 {
        return Err(Usage("grid must be positive".into()).into());
    }
    let adm = admissibility(&v, &lengths)?;
    if !adm.admissible {
        let row = adm.first_violation().unwrap_or(0);
        println!(
            "lengths are inadmissible (row {row} has slack {}); nothing to test",
            adm.slacks[row]
        );
        let mut w = out.file("burchard.csv")?;
        writeln!(w, "c0,c1,equality,center_relation,consistent")?;
        w.flush()?;
        return Ok(Verdict::Ok);
    }
    // centers (2k − (g−1)) / g for (c_0, c_1); the rest stay at 0
    let center = |k: usize| Rational::new(BigInt::from(2 * k as i64 - (g as i64 - 1)), BigInt::from(g as i64));
    let mut w = out.file("burchard.csv")?;
    writeln!(w, "c0,c1,equality,center_relation,consistent")?;
    let (mut equalities, mut mismatches, mut skipped) = (0, 0, 0);
    for i in 0..g {
        for j in 0..g {
            let mut c = vec![Rational::from_integer(BigInt::from(0)); m + 1];
            c[0] = center(i);
            c[1] = center(j);
            let verdict = burchard_equality_test(&v, &c, &lengths)?;
            let show = |b: Option<bool>| b.map_or("skipped".to_string(), |b| b.to_string());
            match verdict.consistent() {
                None => skipped += 1,
                Some(false) => mismatches += 1,
                Some(true) => {}
            }
            if verdict.equality == Some(true) {
                equalities += 1;
            }
            writeln!(
                w,
                "{},{},{},{},{}",
                c[0],
                c[1],
                show(verdict.equality),
                verdict.center_relation,
                show(verdict.consistent())
            )?;
        }
    }
    w.flush()?;
    println!(
        "{} configurations: {equalities} equalities, {mismatches} mismatches, {skipped} skipped",
        g * g
    );
    Ok(if mismatches == 0 { Verdict::Ok } else { Verdict::Failed })
}
