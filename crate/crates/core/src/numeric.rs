//! Small numeric helpers shared by the channel and transform code.

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator of floats.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Relative tolerance under which two likelihoods are treated as tied.
///
/// Exact ties in the mathematical channel can come out of floating-point
/// products a few ulps apart; this keeps strict-inequality decisions stable.
pub const TIE_RTOL: f64 = 1e-12;

/// `true` when `a` and `b` are equal up to [`TIE_RTOL`] relative to the larger magnitude.
#[inline]
pub fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_RTOL * a.abs().max(b.abs())
}

/// Checked `base^exp` in `u128`, `None` on overflow.
pub fn checked_pow(base: usize, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base as u128)?;
    }
    Some(acc)
}

/// Formats `v` with `sig` significant digits, `%g` style.
pub fn format_significant(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sig = sig.max(1);
    let exp = v.abs().log10().floor() as i32;
    // Rounding can push the mantissa over a decade boundary, re-derive from the sci form.
    let sci = format!("{:.*e}", sig - 1, v);
    let (mantissa, exp_str) = sci.split_once('e').expect("scientific format");
    let exp10: i32 = exp_str.parse().unwrap_or(exp);
    if exp10 < -5 || exp10 >= sig as i32 {
        let mantissa = trim_zeros(mantissa);
        format!("{mantissa}e{exp10}")
    } else {
        let decimals = (sig as i32 - 1 - exp10).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Mixed-radix digits of `index` (most significant first) into `out`.
#[inline]
pub fn digits_into(mut index: usize, radix: usize, out: &mut [usize]) {
    for d in out.iter_mut().rev() {
        *d = index % radix;
        index /= radix;
    }
}

/// Mixed-radix index of `digits` (most significant first).
#[inline]
pub fn index_of(digits: &[usize], radix: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * radix + d)
}
