//! Text form of habitat weights.
//!
//! ```text
//! m1 | m2 | const:<c> | series:<c>;<j1>=<a1>,<j2>=<a2>,...
//! ```

use fraclap::WeightF64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("bad weight spec {spec:?} at byte {pos}: {msg}")]
pub struct WeightSpecError {
    pub spec: String,
    pub pos: usize,
    pub msg: String,
}

fn fail(spec: &str, pos: usize, msg: impl Into<String>) -> WeightSpecError {
    WeightSpecError { spec: spec.to_owned(), pos, msg: msg.into() }
}

fn number(spec: &str, start: usize, end: usize) -> Result<f64, WeightSpecError> {
    let text = &spec[start..end];
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ if text.is_empty() => Err(fail(spec, start, "expected a number")),
        _ => Err(fail(spec, start, format!("{text:?} is not a finite number"))),
    }
}

pub fn parse_weight(spec: &str) -> Result<WeightF64, WeightSpecError> {
    match spec {
        "m1" => return Ok(WeightF64::m1()),
        "m2" => return Ok(WeightF64::m2()),
        _ => {}
    }
    if let Some(rest) = spec.strip_prefix("const:") {
        let c = number(spec, spec.len() - rest.len(), spec.len())?;
        return Ok(WeightF64::constant(c));
    }
    let Some(rest) = spec.strip_prefix("series:") else {
        return Err(fail(spec, 0, "expected m1, m2, const:<c> or series:<c>;<j>=<a>,..."));
    };
    let base = spec.len() - rest.len();
    let (offset_end, terms) = match rest.find(';') {
        Some(i) => (base + i, Some(base + i + 1)),
        None => (spec.len(), None),
    };
    let offset = number(spec, base, offset_end)?;
    let mut harmonics = Vec::new();
    if let Some(mut pos) = terms {
        if pos < spec.len() {
            for term in spec[pos..].split(',') {
                let eq = term.find('=').ok_or_else(|| fail(spec, pos, "expected <j>=<a>"))?;
                let j: usize = term[..eq]
                    .parse()
                    .map_err(|_| fail(spec, pos, format!("{:?} is not a harmonic index", &term[..eq])))?;
                if j == 0 {
                    return Err(fail(spec, pos, "harmonic index must be at least 1"));
                }
                let a = number(spec, pos + eq + 1, pos + term.len())?;
                harmonics.push((j, a));
                pos += term.len() + 1;
            }
        }
    }
    WeightF64::new(offset, harmonics).map_err(|e| fail(spec, base, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_and_equivalents() {
        assert_eq!(parse_weight("m1").unwrap(), WeightF64::m1());
        assert_eq!(parse_weight("m2").unwrap(), WeightF64::m2());
        assert_eq!(parse_weight("series:-0.5;1=1").unwrap(), WeightF64::m1());
        assert_eq!(parse_weight("series:-0.5;2=1").unwrap(), WeightF64::m2());
        assert_eq!(parse_weight("const:1").unwrap(), WeightF64::constant(1.0));
        assert_eq!(parse_weight("series:0.25").unwrap(), WeightF64::constant(0.25));
        assert_eq!(parse_weight("series:0.25;").unwrap(), WeightF64::constant(0.25));
    }

    #[test]
    fn multi_term_series() {
        let w = parse_weight("series:0;3=0.5,1=-2e-1").unwrap();
        assert_eq!(w.offset(), 0.0);
        assert_eq!(w.harmonics(), &[(1, -0.2), (3, 0.5)]);
    }

    #[test]
    fn errors_carry_positions() {
        let cases = [
            ("m3", 0),
            ("const:", 6),
            ("const:abc", 6),
            ("series:x;1=1", 7),
            ("series:0;1=1,2", 13),
            ("series:0;q=1", 9),
            ("series:0;0=1", 9),
            ("series:0;1=1,2=", 15),
            ("const:inf", 6),
        ];
        for (spec, pos) in cases {
            let err = parse_weight(spec).unwrap_err();
            assert_eq!(err.pos, pos, "{spec}: {err}");
        }
    }
}
