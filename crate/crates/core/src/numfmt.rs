//! Python-compatible textual forms for reals and complex numbers.
//!
//! Both the reference interpreter and the C runtime print reals as the
//! shortest decimal string that round-trips, laid out the way CPython's
//! `repr` does.

/// Shortest round-trip rendering of `x` in CPython `repr` layout.
pub fn real_repr(x: f64) -> String {
    render(x, true)
}

/// Like [`real_repr`] but without forcing a trailing `.0`; used for the
/// components of complex numbers.
pub fn real_repr_bare(x: f64) -> String {
    render(x, false)
}

pub fn complex_repr(re: f64, im: f64) -> String {
    let im_text = {
        let s = real_repr_bare(im);
        if s.starts_with('-') {
            s
        } else {
            format!("+{s}")
        }
    };
    if re == 0.0 && re.is_sign_positive() {
        format!("{}j", real_repr_bare(im))
    } else {
        format!("({}{}j)", real_repr_bare(re), im_text)
    }
}

fn render(x: f64, dot_zero: bool) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let sign = if x.is_sign_negative() { "-" } else { "" };
    let decpt = exp + 1;
    let body = if decpt <= -4 || decpt > 16 {
        let mut m = digits[..1].to_string();
        if digits.len() > 1 {
            m.push('.');
            m.push_str(&digits[1..]);
        }
        let esign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{esign}{:02}", exp.abs())
    } else if decpt <= 0 {
        format!("0.{}{}", "0".repeat((-decpt) as usize), digits)
    } else {
        let decpt = decpt as usize;
        if digits.len() <= decpt {
            let int = format!("{}{}", digits, "0".repeat(decpt - digits.len()));
            if dot_zero {
                format!("{int}.0")
            } else {
                int
            }
        } else {
            format!("{}.{}", &digits[..decpt], &digits[decpt..])
        }
    };
    format!("{sign}{body}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_python_repr_samples() {
        let cases = [
            (0.0, "0.0"),
            (-0.0, "-0.0"),
            (1.0, "1.0"),
            (3.5, "3.5"),
            (0.1, "0.1"),
            (1e-5, "1e-05"),
            (0.0001, "0.0001"),
            (1e16, "1e+16"),
            (1234567890123456.0, "1234567890123456.0"),
            (1.5e16, "1.5e+16"),
            (123.456, "123.456"),
            (1e100, "1e+100"),
            (-2.5e-7, "-2.5e-07"),
            (f64::MAX, "1.7976931348623157e+308"),
            (5e-324, "5e-324"),
            (0.30000000000000004, "0.30000000000000004"),
        ];
        for (x, want) in cases {
            assert_eq!(real_repr(x), want, "{x:?}");
        }
    }

    #[test]
    fn complex_forms() {
        assert_eq!(complex_repr(4.3, 0.0), "(4.3+0j)");
        assert_eq!(complex_repr(0.0, 2.0), "2j");
        assert_eq!(complex_repr(-0.0, 2.0), "(-0+2j)");
        assert_eq!(complex_repr(1.0, -1.5), "(1-1.5j)");
        assert_eq!(complex_repr(1.0, -0.0), "(1-0j)");
    }
}
