//! Real roots of low-degree real polynomials (coefficients in ascending order).

/// Relative tolerance under which a discriminant counts as zero.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealRoot {
    pub value: f64,
    pub multiplicity: usize,
}

pub fn eval(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &a| acc * u + a)
}

pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &a)| i as f64 * a)
        .collect()
}

/// Coefficients with exact trailing zeros removed.
pub fn trimmed(coeffs: &[f64]) -> &[f64] {
    let mut end = coeffs.len();
    while end > 0 && coeffs[end - 1] == 0.0 {
        end -= 1;
    }
    &coeffs[..end]
}

/// Discriminant of `a u^3 + b u^2 + c u + d` and the magnitude of its terms.
pub fn cubic_discriminant(a: f64, b: f64, c: f64, d: f64) -> (f64, f64) {
    let terms = [
        18.0 * a * b * c * d,
        -4.0 * b * b * b * d,
        b * b * c * c,
        -4.0 * a * c * c * c,
        -27.0 * a * a * d * d,
    ];
    (terms.iter().sum(), terms.iter().map(|t| t.abs()).sum())
}

/// Discriminant of `a u^2 + b u + c` and the magnitude of its terms.
pub fn quadratic_discriminant(a: f64, b: f64, c: f64) -> (f64, f64) {
    let terms = [b * b, -4.0 * a * c];
    (terms[0] + terms[1], terms[0].abs() + terms[1].abs())
}

/// -1, 0 or +1 for a discriminant value with tie tolerance.
pub fn tie_sign(value: f64, scale: f64) -> i8 {
    if value.abs() <= TIE_TOLERANCE * scale {
        0
    } else if value > 0.0 {
        1
    } else {
        -1
    }
}

fn polish(coeffs: &[f64], mut u: f64) -> f64 {
    let d = derivative(coeffs);
    let mut best = eval(coeffs, u).abs();
    for _ in 0..4 {
        let du = eval(&d, u);
        if du == 0.0 {
            break;
        }
        let next = u - eval(coeffs, u) / du;
        let r = eval(coeffs, next).abs();
        if r < best {
            best = r;
            u = next;
        } else {
            break;
        }
    }
    u
}

pub fn quadratic_roots(c: f64, b: f64, a: f64) -> Vec<RealRoot> {
    let (disc, scale) = quadratic_discriminant(a, b, c);
    match tie_sign(disc, scale) {
        -1 => Vec::new(),
        0 => vec![RealRoot {
            value: -b / (2.0 * a),
            multiplicity: 2,
        }],
        _ => {
            let s = disc.sqrt();
            let q = -0.5 * (b + b.signum() * s);
            let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
            let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
            vec![
                RealRoot { value: lo, multiplicity: 1 },
                RealRoot { value: hi, multiplicity: 1 },
            ]
        }
    }
}

pub fn cubic_roots(coeffs: &[f64]) -> Vec<RealRoot> {
    let (d, c, b, a) = (coeffs[0], coeffs[1], coeffs[2], coeffs[3]);
    let (disc, scale) = cubic_discriminant(a, b, c, d);
    let (bn, cn, dn) = (b / a, c / a, d / a);
    let shift = bn / 3.0;
    let p = cn - bn * bn / 3.0;
    let q = 2.0 * bn * bn * bn / 27.0 - bn * cn / 3.0 + dn;
    let size = shift.abs().max(p.abs().sqrt()).max(q.abs().cbrt());
    let mut roots = match tie_sign(disc, scale) {
        1 => {
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = ((3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
            let theta = arg.acos() / 3.0;
            (0..3)
                .map(|j| {
                    let v = m * (theta - 2.0 * std::f64::consts::PI * j as f64 / 3.0).cos();
                    RealRoot {
                        value: polish(coeffs, v - shift),
                        multiplicity: 1,
                    }
                })
                .collect()
        }
        -1 => {
            let big_d = q * q / 4.0 + p * p * p / 27.0;
            let big_a = -q.signum() * (q.abs() / 2.0 + big_d.max(0.0).sqrt()).cbrt();
            let v = if big_a == 0.0 { 0.0 } else { big_a - p / (3.0 * big_a) };
            vec![RealRoot {
                value: polish(coeffs, v - shift),
                multiplicity: 1,
            }]
        }
        _ => {
            if p >= -TIE_TOLERANCE * size * size {
                vec![RealRoot {
                    value: -shift,
                    multiplicity: 3,
                }]
            } else {
                let sign = if q >= 0.0 { 1.0 } else { -1.0 };
                let vd = sign * (-p / 3.0).sqrt();
                vec![
                    RealRoot {
                        value: vd - shift,
                        multiplicity: 2,
                    },
                    RealRoot {
                        value: polish(coeffs, -2.0 * vd - shift),
                        multiplicity: 1,
                    },
                ]
            }
        }
    };
    roots.sort_by(|x, y| x.value.total_cmp(&y.value));
    roots
}

fn poly_rem(num: &[f64], den: &[f64]) -> Vec<f64> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    let lead = den[dd];
    while r.len() > dd {
        let top = r.len() - 1;
        let f = r[top] / lead;
        for i in 0..=dd {
            r[top - dd + i] -= f * den[i];
        }
        r.pop();
    }
    r
}

fn sturm_chain(coeffs: &[f64]) -> Vec<Vec<f64>> {
    let scale = coeffs.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let mut chain = vec![coeffs.to_vec(), derivative(coeffs)];
    loop {
        let n = chain.len();
        if chain[n - 1].len() <= 1 {
            break;
        }
        let mut r: Vec<f64> = poly_rem(&chain[n - 2], &chain[n - 1]).iter().map(|v| -v).collect();
        let rs = r.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        if rs <= 1e-12 * scale {
            break;
        }
        while r.len() > 1 && r[r.len() - 1].abs() <= 1e-14 * rs {
            r.pop();
        }
        chain.push(r);
    }
    chain
}

fn sign_changes(chain: &[Vec<f64>], u: f64) -> usize {
    let mut changes = 0;
    let mut last = 0.0f64;
    for p in chain {
        let v = eval(p, u);
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            changes += 1;
        }
        last = v;
    }
    changes
}

/// Sturm isolation followed by bisection on the root count.
pub fn sturm_roots(coeffs: &[f64]) -> Vec<RealRoot> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let bound = 1.0 + coeffs[..n].iter().map(|a| (a / lead).abs()).fold(0.0, f64::max);
    let chain = sturm_chain(coeffs);
    let count = |u: f64| sign_changes(&chain, u);
    let mut out = Vec::new();
    let mut stack = vec![(-bound, bound, count(-bound), count(bound))];
    while let Some((lo, hi, clo, chi)) = stack.pop() {
        let inside = clo.saturating_sub(chi);
        if inside == 0 {
            continue;
        }
        if inside == 1 || hi - lo <= 1e-14 * bound {
            let (mut a, mut b, ca) = (lo, hi, clo);
            while b - a > 1e-15 * bound.max(1.0) {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if count(mid) == ca {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            out.push(0.5 * (a + b));
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let cm = count(mid);
        stack.push((lo, mid, clo, cm));
        stack.push((mid, hi, cm, chi));
    }
    out.sort_by(f64::total_cmp);
    let d1 = derivative(coeffs);
    let d2 = derivative(&d1);
    let scale = coeffs.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    out.into_iter()
        .map(|u| {
            let s = scale * (1.0 + u.abs()).powi(n as i32);
            let multiplicity = if eval(&d1, u).abs() > 1e-8 * s {
                1
            } else if eval(&d2, u).abs() > 1e-8 * s {
                2
            } else {
                3
            };
            let value = if multiplicity == 1 { polish(coeffs, u) } else { u };
            RealRoot { value, multiplicity }
        })
        .collect()
}

/// All real roots, ascending. `None` for the zero polynomial.
pub fn real_roots(coeffs: &[f64]) -> Option<Vec<RealRoot>> {
    let c = trimmed(coeffs);
    match c.len() {
        0 => None,
        1 => Some(Vec::new()),
        2 => Some(vec![RealRoot {
            value: -c[0] / c[1],
            multiplicity: 1,
        }]),
        3 => Some(quadratic_roots(c[0], c[1], c[2])),
        4 => Some(cubic_roots(c)),
        _ => Some(sturm_roots(c)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn from_roots(rs: &[f64], lead: f64) -> Vec<f64> {
        let mut c = vec![lead];
        for &r in rs {
            let mut next = vec![0.0; c.len() + 1];
            for (i, &a) in c.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= r * a;
            }
            c = next;
        }
        c
    }

    #[test]
    fn triple_root_is_recognised() {
        // 0.48 (u - 5/6)^3
        let c = [-5.0 / 18.0, 1.0, -1.2, 0.48];
        let r = real_roots(&c).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 3);
        assert!((r[0].value - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn double_root_is_recognised() {
        let c = from_roots(&[0.5, 0.5, -2.0], 3.0);
        let r = real_roots(&c).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].value + 2.0).abs() < 1e-12 && r[0].multiplicity == 1);
        assert!((r[1].value - 0.5).abs() < 1e-12 && r[1].multiplicity == 2);
    }

    #[test]
    fn clustered_roots_fall_in_the_tie_band() {
        let c = from_roots(&[-2.647944867891799, -2.64076797523887, -2.574462956139125], 0.1);
        let r = real_roots(&c).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].multiplicity, 2);
        assert!((r[0].value + 2.644).abs() < 1e-2);
        assert!((r[1].value + 2.574462956139125).abs() < 1e-9);
    }

    #[test]
    fn low_degree_cases() {
        assert!(real_roots(&[0.0, 0.0]).is_none());
        assert!(real_roots(&[1.0]).unwrap().is_empty());
        assert!(real_roots(&[1.0, 0.0, 1.0]).unwrap().is_empty());
        let r = real_roots(&[-1.0, 1.0, 0.25]).unwrap();
        assert!((r[1].value - 2.0 * (2f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn quartic_by_sturm() {
        let c = from_roots(&[-1.5, 0.2, 0.7, 3.0], -2.0);
        let r = real_roots(&c).unwrap();
        let v: Vec<f64> = r.iter().map(|r| r.value).collect();
        for (a, b) in v.iter().zip([-1.5, 0.2, 0.7, 3.0]) {
            assert!((a - b).abs() < 1e-12, "{v:?}");
        }
        // x^4 + 1 has no real roots; (x^2 - 2)(x^2 + 1) has two
        assert!(real_roots(&[1.0, 0.0, 0.0, 0.0, 1.0]).unwrap().is_empty());
        let r = real_roots(&[-2.0, 0.0, -1.0, 0.0, 1.0]).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[1].value - 2f64.sqrt()).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn cubic_roots_recovered(mut rs in proptest::collection::vec(-3.0f64..3.0, 3), lead in 0.1f64..5.0) {
            rs.sort_by(f64::total_cmp);
            prop_assume!(rs[1] - rs[0] > 1e-3 && rs[2] - rs[1] > 1e-3);
            let c = from_roots(&rs, lead);
            // clustered roots can put the discriminant inside the tie band
            let (disc, scale) = cubic_discriminant(c[3], c[2], c[1], c[0]);
            prop_assume!(tie_sign(disc, scale) == 1);
            let got = real_roots(&c).unwrap();
            prop_assert_eq!(got.len(), 3);
            for (g, e) in got.iter().zip(&rs) {
                prop_assert!((g.value - e).abs() < 1e-9);
            }
        }

        #[test]
        fn residuals_vanish(c in proptest::collection::vec(-2.0f64..2.0, 4)) {
            prop_assume!(c[3].abs() > 1e-2);
            for r in real_roots(&c).unwrap() {
                if r.multiplicity == 1 {
                    let scale: f64 = c.iter().enumerate().map(|(i, a)| (a * r.value.powi(i as i32)).abs()).sum();
                    prop_assert!(eval(&c, r.value).abs() < 1e-12 * scale.max(1.0));
                }
            }
        }
    }
}
