use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact rational used for probabilities and lottery weights.
pub type Rat = BigRational;

/// Builds `numer / denom` as an exact rational.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// `floor(x)` for a nonnegative rational.
pub fn floor_to_u64(x: &Rat) -> u64 {
    x.floor().to_integer().to_u64().expect("nonnegative value fits in u64")
}

/// `ceil(x)` for a nonnegative rational.
pub fn ceil_to_u64(x: &Rat) -> u64 {
    x.ceil().to_integer().to_u64().expect("nonnegative value fits in u64")
}

pub(crate) fn is_integral(x: &Rat) -> bool {
    x.is_integer()
}

pub fn to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"p/q"` or `"p"`.
pub(crate) fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rat::new(p, q))
        }
        None => Some(Rat::from_integer(s.parse().ok()?)),
    }
}

pub(crate) fn format_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Converts float weights into exact rationals over `10^9` that sum to one,
/// distributing the rounding remainder by largest fractional part.
pub(crate) fn normalize_weights(weights: &[f64]) -> Vec<Rat> {
    const DENOM: i64 = 1_000_000_000;
    let total: f64 = weights.iter().map(|w| w.max(0.0)).sum();
    if weights.is_empty() || total <= 0.0 {
        return Vec::new();
    }
    let scaled: Vec<f64> = weights
        .iter()
        .map(|w| w.max(0.0) / total * DENOM as f64)
        .collect();
    let mut units: Vec<i64> = scaled.iter().map(|s| s.floor() as i64).collect();
    let mut remainder = DENOM - units.iter().sum::<i64>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = scaled[a] - scaled[a].floor();
        let fb = scaled[b] - scaled[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    let mut k = 0;
    while remainder > 0 {
        units[order[k % order.len()]] += 1;
        remainder -= 1;
        k += 1;
    }
    units.into_iter().map(|u| rat(u, DENOM)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_roundtrip() {
        let x = parse_rat("5/12").unwrap();
        assert_eq!(x, rat(5, 12));
        assert_eq!(format_rat(&x), "5/12");
        assert_eq!(format_rat(&rat(4, 2)), "2");
        assert_eq!(parse_rat(" 3 ").unwrap(), rat(3, 1));
        assert!(parse_rat("1/0").is_none());
        assert!(parse_rat("a/b").is_none());
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(floor_to_u64(&rat(7, 2)), 3);
        assert_eq!(ceil_to_u64(&rat(7, 2)), 4);
        assert_eq!(ceil_to_u64(&rat(3, 1)), 3);
    }

    #[test]
    fn normalized_weights_sum_to_one() {
        let w = normalize_weights(&[0.3333333, 0.3333333, 0.3333334, 0.0]);
        let total: Rat = w.iter().sum();
        assert_eq!(total, rat(1, 1));
        assert!(w.iter().all(|x| *x >= rat(0, 1)));
    }
}
