//! Parsing of command-line specs: charts, points and map component lists.

use std::sync::Arc;

use weil_core::expr::Interval;
use weil_core::lift::WeilPoint;
use weil_core::laws::Chart;
use weil_core::scalar::parse_decimal;
use weil_core::{OpenBox, Rational, SmoothMap, WeilAlgebra};

use crate::{CliError, CliResult};

/// Split on commas (and semicolons) outside parentheses.
pub fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' | ';' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

pub fn parse_rational(s: &str) -> CliResult<Rational> {
    let s = s.trim();
    parse_decimal(s)
        .or_else(|| s.strip_prefix('-').and_then(parse_decimal).map(|q| -q))
        .or_else(|| s.parse().ok())
        .ok_or_else(|| CliError::Usage(format!("not a number: `{s}`")))
}

fn parse_bound(s: &str) -> CliResult<Option<Rational>> {
    match s.trim() {
        "inf" | "+inf" | "-inf" => Ok(None),
        t => parse_rational(t).map(Some),
    }
}

fn parse_interval(s: &str) -> CliResult<Interval> {
    let inner = s
        .trim()
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| CliError::Usage(format!("expected an open interval `(a,b)`, got `{s}`")))?;
    let (lo, hi) = inner
        .split_once(',')
        .ok_or_else(|| CliError::Usage(format!("expected `(a,b)`, got `{s}`")))?;
    let (lo, hi) = (parse_bound(lo)?, parse_bound(hi)?);
    if let (Some(a), Some(b)) = (&lo, &hi) {
        if a >= b {
            return Err(CliError::Usage(format!("empty interval `{s}`")));
        }
    }
    Ok(Interval::new(lo, hi))
}

/// `R2`, `R^2`, `(0,1)^2`, `(0,1)x(-1,inf)` or `(0,1)×(0,2)`.
pub fn parse_chart(spec: &str) -> CliResult<Chart> {
    let spec = spec.trim();
    if let Some(n) = spec.strip_prefix('R') {
        let n = n.strip_prefix('^').unwrap_or(n);
        return n
            .parse()
            .map(Chart::real)
            .map_err(|_| CliError::Usage(format!("bad chart `{spec}`")));
    }
    if let Some((base, n)) = spec.rsplit_once(")^") {
        let n: usize = n.parse().map_err(|_| CliError::Usage(format!("bad chart `{spec}`")))?;
        let i = parse_interval(&format!("{base})"))?;
        return Ok(Chart::open_box(OpenBox::new(vec![i; n])));
    }
    let intervals = spec
        .split(['x', '×'])
        .map(parse_interval)
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Chart::open_box(OpenBox::new(intervals)))
}

/// Each comma-separated component is a polynomial in the generators of `w`.
pub fn parse_point(w: &Arc<WeilAlgebra>, spec: &str) -> CliResult<WeilPoint> {
    if spec.trim().is_empty() {
        return Ok(WeilPoint::new(w, Vec::new())?);
    }
    let coords = split_top_level(spec)
        .into_iter()
        .map(|c| w.element(c))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(WeilPoint::new(w, coords)?)
}

/// Comma- or semicolon-separated components in `x0..x{arity-1}`.
pub fn parse_map(spec: &str, arity: usize) -> CliResult<SmoothMap> {
    let parts = split_top_level(spec);
    Ok(SmoothMap::parse(arity, &parts)?)
}

/// A comma-separated list of algebra names; `⊗` names contain no commas.
pub fn parse_names(spec: &str) -> Vec<String> {
    spec.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use weil_core::scalar::ratio;

    #[test]
    fn charts() {
        assert_eq!(parse_chart("R2").unwrap(), Chart::real(2));
        assert_eq!(parse_chart("R^0").unwrap(), Chart::real(0));
        assert_eq!(parse_chart("(0,1)^2").unwrap(), Chart::open_box(OpenBox::unit(2)));
        let c = parse_chart("(0,1)x(-1/2,inf)").unwrap();
        assert_eq!(c.domain().unwrap().intervals[1], Interval::new(Some(ratio(-1, 2)), None));
        assert!(parse_chart("(1,0)").is_err());
        assert!(parse_chart("S1").is_err());
    }

    #[test]
    fn points_and_maps() {
        let tt = weil_core::presets::preset("dual⊗dual").unwrap().unwrap();
        let p = parse_point(&tt, "0.3 + x0, -0.2 + x1").unwrap();
        assert_eq!(p.base(), vec![ratio(3, 10), ratio(-1, 5)]);
        let f = parse_map("sin(x0)*exp(x1); x0 + x1", 2).unwrap();
        assert_eq!(f.coarity(), 2);
        assert_eq!(split_top_level("f(a, b), c"), ["f(a, b)", "c"]);
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_rational("-0.25").unwrap(), ratio(-1, 4));
        assert_eq!(parse_rational("3/4").unwrap(), ratio(3, 4));
        assert!(parse_rational("abc").is_err());
    }
}
