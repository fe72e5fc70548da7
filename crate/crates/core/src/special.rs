//! Cancellation-free building blocks for the uniform and logistic
//! log-normalizers, whose textbook forms have removable singularities at 0.

/// Below this magnitude the series expansions are used.
const SERIES_CUTOFF: f64 = 0.1;

/// `ln(sinh(x)/x)`, even, 0 at the origin.
pub(crate) fn ln_sinhc(x: f64) -> f64 {
    let a = x.abs();
    if a < SERIES_CUTOFF {
        let z = a * a;
        z * (1.0 / 6.0 + z * (-1.0 / 180.0 + z * (1.0 / 2835.0 + z * (-1.0 / 37800.0))))
    } else if a > 20.0 {
        a - (2.0 * a).ln() + (-(-2.0 * a).exp()).ln_1p()
    } else {
        (a.sinh() / a).ln()
    }
}

/// `x·coth(x) − 1`, even, ~x²/3 at the origin.
pub(crate) fn x_coth_m1(x: f64) -> f64 {
    let a = x.abs();
    if a < SERIES_CUTOFF {
        let z = a * a;
        z * (1.0 / 3.0
            + z * (-1.0 / 45.0
                + z * (2.0 / 945.0 + z * (-1.0 / 4725.0 + z * (2.0 / 93555.0)))))
    } else {
        a / a.tanh() - 1.0
    }
}

/// `1/x² − 1/sinh²(x)`, the derivative of `coth(x)·x − 1` divided by x; 1/3 at 0.
pub(crate) fn inv_sq_minus_csch_sq(x: f64) -> f64 {
    let a = x.abs();
    if a < SERIES_CUTOFF {
        let z = a * a;
        1.0 / 3.0 + z * (-1.0 / 15.0 + z * (2.0 / 189.0 + z * (-1.0 / 675.0 + z * (2.0 / 10395.0))))
    } else if a > 350.0 {
        1.0 / (a * a)
    } else {
        let s = a.sinh();
        1.0 / (a * a) - 1.0 / (s * s)
    }
}

/// `ln(x/sin(x))` for |x| < π, even, 0 at the origin.
pub(crate) fn ln_x_csc(x: f64) -> f64 {
    let a = x.abs();
    if a < SERIES_CUTOFF {
        let z = a * a;
        z * (1.0 / 6.0 + z * (1.0 / 180.0 + z * (1.0 / 2835.0 + z * (1.0 / 37800.0))))
    } else {
        (a / a.sin()).ln()
    }
}

/// `1 − x·cot(x)` for |x| < π, even, ~x²/3 at the origin.
pub(crate) fn one_m_x_cot(x: f64) -> f64 {
    let a = x.abs();
    if a < SERIES_CUTOFF {
        let z = a * a;
        z * (1.0 / 3.0
            + z * (1.0 / 45.0 + z * (2.0 / 945.0 + z * (1.0 / 4725.0 + z * (2.0 / 93555.0)))))
    } else {
        1.0 - a / a.tan()
    }
}

/// `1/sin²(x) − 1/x²` for |x| < π; 1/3 at the origin.
pub(crate) fn csc_sq_minus_inv_sq(x: f64) -> f64 {
    let a = x.abs();
    if a < SERIES_CUTOFF {
        let z = a * a;
        1.0 / 3.0 + z * (1.0 / 15.0 + z * (2.0 / 189.0 + z * (1.0 / 675.0 + z * (2.0 / 10395.0))))
    } else {
        let s = a.sin();
        1.0 / (s * s) - 1.0 / (a * a)
    }
}

/// `a·ln(a/c)` with the convention `0·ln 0 = 0`.
pub(crate) fn xlogx_over(a: f64, c: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * (a / c).ln()
    }
}
