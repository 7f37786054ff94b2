use std::collections::BTreeMap;
use std::fmt;

use super::{AffineMap, ClosedFormFamily, CompactBump, Field, RandomSmooth};
use crate::dim::Dimension;
use crate::error::{Error, Result};

/// Parsed form of `family=extremizer a=1 c=1`, `family=random_smooth seed=42 k=5`,
/// or a bare family name. `shift=x,y[,z]` translates the field by the given vector.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSpec {
    pub family: String,
    pub params: BTreeMap<String, f64>,
    pub shift: Option<Vec<f64>>,
}

const FAMILIES: [&str; 6] = [
    "extremizer",
    "parabolic_extremizer",
    "gaussian",
    "ball_indicator",
    "random_smooth",
    "bump",
];

pub fn parse_field_spec(text: &str) -> Result<FieldSpec> {
    let mut family = None;
    let mut params = BTreeMap::new();
    let mut shift = None;
    for tok in text.split_whitespace() {
        match tok.split_once('=') {
            None => {
                if family.is_some() {
                    return Err(Error::Parse(format!("unexpected token '{tok}'")));
                }
                family = Some(tok.to_string());
            }
            Some(("family", v)) => family = Some(v.to_string()),
            Some(("shift", v)) => {
                let xs: std::result::Result<Vec<f64>, _> = v.split(',').map(str::parse).collect();
                shift = Some(xs.map_err(|_| Error::Parse(format!("bad shift '{v}'")))?);
            }
            Some((k, v)) => {
                let x: f64 = v
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad value for {k}: '{v}'")))?;
                if !x.is_finite() {
                    return Err(Error::Parse(format!("non-finite value for {k}")));
                }
                params.insert(k.to_string(), x);
            }
        }
    }
    let family = family.ok_or_else(|| Error::Parse("field spec has no family".into()))?;
    if !FAMILIES.contains(&family.as_str()) {
        return Err(Error::Parse(format!("unknown family '{family}'")));
    }
    let allowed: &[&str] = match family.as_str() {
        "extremizer" | "gaussian" => &["a", "c"],
        "parabolic_extremizer" => &["c"],
        "ball_indicator" => &["radius", "c"],
        "random_smooth" => &["seed", "k"],
        _ => &["seed"],
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Parse(format!("parameter '{k}' does not apply to {family}")));
    }
    Ok(FieldSpec { family, params, shift })
}

impl FieldSpec {
    fn get(&self, k: &str, default: f64) -> f64 {
        self.params.get(k).copied().unwrap_or(default)
    }

    fn family_for(&self, dim: Dimension) -> Result<ClosedFormFamily> {
        let as_count = |k: &str, default: f64| -> Result<u64> {
            let v = self.get(k, default);
            if v < 0.0 || v.fract() != 0.0 {
                return Err(Error::Parse(format!("{k} must be a nonnegative integer")));
            }
            Ok(v as u64)
        };
        Ok(match self.family.as_str() {
            "extremizer" => ClosedFormFamily::Extremizer {
                a: self.get("a", 1.0),
                c: self.get("c", 1.0),
            },
            "parabolic_extremizer" => ClosedFormFamily::ParabolicExtremizer { c: self.get("c", 1.0) },
            "gaussian" => ClosedFormFamily::Gaussian {
                a: self.get("a", 1.0),
                c: self.get("c", 1.0),
            },
            "ball_indicator" => ClosedFormFamily::BallIndicator {
                radius: self.get("radius", 1.0),
                c: self.get("c", 1.0),
            },
            "random_smooth" => {
                let k = as_count("k", 5.0)?;
                if k == 0 {
                    return Err(Error::Parse("k must be positive".into()));
                }
                ClosedFormFamily::RandomSmooth(RandomSmooth::new(dim, as_count("seed", 0.0)?, k as usize))
            }
            _ => ClosedFormFamily::Bump(CompactBump::random(dim, as_count("seed", 0.0)?)),
        })
    }

    /// Builds the closed-form field in dimension `dim`.
    pub fn build(&self, dim: Dimension) -> Result<Field> {
        let f = Field::closed(dim, self.family_for(dim)?)?;
        match &self.shift {
            None => Ok(f),
            Some(t) => {
                if t.len() != dim.d() {
                    return Err(Error::Parse(format!("shift needs {} components", dim.d())));
                }
                // f(x - t) = f ∘ (x ↦ x - t)
                let neg: Vec<f64> = t.iter().map(|v| -v).collect();
                f.compose_affine(&AffineMap::translation(dim, &neg)?)
            }
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "family={}", self.family)?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        if let Some(t) = &self.shift {
            let s: Vec<String> = t.iter().map(|v| v.to_string()).collect();
            write!(f, " shift={}", s.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keyed_and_bare_forms() {
        let s = parse_field_spec("family=extremizer a=2 c=3").unwrap();
        let f = s.build(Dimension::TWO).unwrap();
        assert!((f.eval(&[0.5, 0.0]).unwrap() - 1.5).abs() < 1e-15);
        let s = parse_field_spec("gaussian").unwrap();
        assert_eq!(s.family, "gaussian");
        assert!(parse_field_spec("family=random_smooth seed=42 k=5").is_ok());
    }

    #[test]
    fn shift_translates() {
        let s = parse_field_spec("family=ball_indicator radius=1 shift=3,0").unwrap();
        let f = s.build(Dimension::TWO).unwrap();
        assert_eq!(f.eval(&[3.0, 0.5]).unwrap(), 1.0);
        assert_eq!(f.eval(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(parse_field_spec("family=banana").is_err());
        assert!(parse_field_spec("a=1").is_err());
        assert!(parse_field_spec("family=gaussian radius=1").is_err());
        assert!(parse_field_spec("family=random_smooth k=1.5")
            .unwrap()
            .build(Dimension::TWO)
            .is_err());
        assert!(parse_field_spec("family=extremizer a=-1")
            .unwrap()
            .build(Dimension::TWO)
            .is_err());
    }

    #[test]
    fn display_round_trips() {
        let s = parse_field_spec("family=gaussian a=0.5 c=2 shift=1,2").unwrap();
        assert_eq!(parse_field_spec(&s.to_string()).unwrap(), s);
    }
}
