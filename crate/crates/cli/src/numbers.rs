//! Parsing of numeric command-line values.

use num_complex::Complex64;

pub fn parse_real(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not finite: {s:?}"))
    }
}

/// Parses `1.5`, `-2i`, `0.3-1.2i`, `1e-3+2j`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok(Complex64::new(parse_real(&t)?, 0.0));
    };
    let bytes = body.as_bytes();
    // The real/imaginary split is the last sign not opening the string and
    // not belonging to an exponent.
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (parse_real(&body[..i])?, &body[i..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => parse_real(other)?,
    };
    Ok(Complex64::new(re, im))
}

pub fn parse_complex_list(s: &str) -> Result<Vec<Complex64>, String> {
    s.split(',').map(parse_complex).collect()
}

pub fn parse_real_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(parse_real).collect()
}

/// `RE,IM` as one complex number.
pub fn parse_pair(s: &str) -> Result<Complex64, String> {
    match parse_real_list(s)?.as_slice() {
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err(format!("expected RE,IM, got {s:?}")),
    }
}

pub fn parse_fixed<T: Copy, const N: usize>(
    s: &str,
    what: &str,
    item: impl Fn(&str) -> Result<T, String>,
) -> Result<[T; N], String> {
    let v = s.split(',').map(item).collect::<Result<Vec<T>, String>>()?;
    v.try_into()
        .map_err(|v: Vec<T>| format!("{what}: expected {N} values, got {}", v.len()))
}
