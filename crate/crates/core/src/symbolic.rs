//! Recognising values of the form `r + (p/q)·φ^k` for report output.

use crate::PHI;

/// Fixed-point rendering with at most seven decimals and no trailing zeros.
pub fn format_number(v: f64) -> String {
    let s = format!("{v:.7}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    match s {
        "-0" | "" => "0".to_string(),
        _ => s.to_string(),
    }
}

fn rational(v: f64, max_den: i64) -> Option<(i64, i64)> {
    (1..=max_den).find_map(|d| {
        let n = (v * d as f64).round();
        ((v * d as f64 - n).abs() < 1e-9 && n.abs() <= 64.0).then_some((n as i64, d))
    })
}

fn fraction(n: i64, d: i64) -> String {
    if d == 1 {
        n.to_string()
    } else {
        format!("{n}/{d}")
    }
}

/// Symbolic form `r + (p/q)φ^k` with small integers, if `v` has one.
///
/// A single power is preferred; otherwise the highest power with a small
/// coefficient wins, since every power of φ is also `a + bφ`.
pub fn phi_form(v: f64) -> Option<String> {
    let pure = (1..=8).map(|k| (k, true));
    let offset = (1..=8).rev().map(|k| (k, false));
    for (k, pure) in pure.chain(offset) {
        let pk = PHI.powi(k);
        for q in 1..=16i64 {
            for p in (-16..=16i64).filter(|&p| p != 0) {
                let rest = v - p as f64 / q as f64 * pk;
                let Some((rn, rd)) = rational(rest, 8) else { continue };
                if pure && rn != 0 {
                    continue;
                }
                let g = gcd(p.abs(), q);
                let (p, q) = (p / g, q / g);
                let coeff = match p.abs() {
                    1 => String::new(),
                    a => a.to_string(),
                };
                let power = if k == 1 { "φ".to_string() } else { format!("φ^{k}") };
                let term = if q == 1 { format!("{coeff}{power}") } else { format!("{coeff}{power}/{q}") };
                return Some(match (rn, p < 0) {
                    (0, false) => term,
                    (0, true) => format!("-{term}"),
                    (_, false) => format!("{} + {term}", fraction(rn, rd)),
                    (_, true) => format!("{} - {term}", fraction(rn, rd)),
                });
            }
        }
    }
    None
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// `φ^5/4 ≈ 0.0225425` for φ-valued numbers, plain decimals otherwise.
pub fn render(v: f64) -> String {
    if rational(v, 16).is_some() {
        return format_number(v);
    }
    match phi_form(v) {
        Some(sym) => format!("{sym} ≈ {}", format_number(v)),
        None => format_number(v),
    }
}
