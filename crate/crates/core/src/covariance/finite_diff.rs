//! Richardson-extrapolated central differences.

use num_traits::Float;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Second-order central difference for the `order`-th derivative with step `h`.
///
/// Even orders use the symmetric binomial stencil on `x + (order/2 - j) h`; odd
/// orders average the two half-shifted stencils. Both expand in even powers of `h`.
pub fn central_difference<F: Fn(f64) -> f64>(f: &F, x: f64, order: usize, h: f64) -> f64 {
    if order == 0 {
        return f(x);
    }
    let mut acc = 0.0;
    if order.is_multiple_of(2) {
        let half = (order / 2) as f64;
        for j in 0..=order {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binomial(order, j) * f(x + (half - j as f64) * h);
        }
        acc / h.powi(order as i32)
    } else {
        // d/dx applied to the even stencil of order-1, by a centered first difference
        let lower = order - 1;
        let half = (lower / 2) as f64;
        for j in 0..=lower {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let w = sign * binomial(lower, j);
            let off = (half - j as f64) * h;
            acc += w * (f(x + off + h) - f(x + off - h));
        }
        acc / (2.0 * h.powi(order as i32))
    }
}

/// Result of a Richardson table: the extrapolated value and the difference between
/// the last two diagonal entries.
#[derive(Debug, Clone, Copy)]
pub struct Extrapolated {
    pub value: f64,
    pub error: f64,
}

/// Richardson extrapolation over `levels` halvings of `h0`, eliminating
/// `h^2, h^4, ...` in turn.
pub fn richardson<F: Fn(f64) -> f64>(f: &F, x: f64, order: usize, h0: f64, levels: usize) -> Extrapolated {
    let levels = levels.clamp(1, 8);
    let mut table = [[0.0f64; 8]; 8];
    let mut h = h0;
    for i in 0..levels {
        table[i][0] = central_difference(f, x, order, h);
        let mut factor = 4.0;
        for j in 1..=i {
            table[i][j] = table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) / (factor - 1.0);
            factor *= 4.0;
        }
        h *= 0.5;
    }
    let n = levels - 1;
    let error = if n == 0 { f64::INFINITY } else { (table[n][n] - table[n][n - 1]).abs() };
    Extrapolated { value: table[n][n], error }
}

/// Default starting step for a derivative of the given order; larger for higher
/// orders so the stencil's rounding error stays below the truncation error.
pub fn default_step(order: usize) -> f64 {
    match order {
        0..=2 => 0.08,
        3..=4 => 0.16,
        5..=6 => 0.3,
        _ => 0.45,
    }
}

/// Richardson-extrapolated derivative with the default step schedule (three
/// halvings, truncation error `O(h^8)`).
pub fn derivative<F: Fn(f64) -> f64>(f: &F, x: f64, order: usize) -> Extrapolated {
    richardson(f, x, order, default_step(order), 4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives_are_exact_to_rounding() {
        let f = |x: f64| x.powi(5) - 3.0 * x.powi(3) + x;
        // f' = 5x^4 - 9x^2 + 1, f''' = 60x^2 - 18
        let d1 = derivative(&f, 0.7, 1).value;
        let d3 = derivative(&f, 0.7, 3).value;
        assert!((d1 - (5.0 * 0.7f64.powi(4) - 9.0 * 0.49 + 1.0)).abs() < 1e-9);
        assert!((d3 - (60.0 * 0.49 - 18.0)).abs() < 1e-7);
    }

    #[test]
    fn exponential_fourth_derivative() {
        let f = |x: f64| libm::exp(x);
        let d4 = derivative(&f, 0.3, 4);
        assert!((d4.value - libm::exp(0.3)).abs() < 1e-8 * libm::exp(0.3), "{:?}", d4);
    }

    #[test]
    fn even_function_eighth_derivative_at_origin() {
        // exp(-x^2): C^(8)(0) = 8!/4! = 1680
        let f = |x: f64| libm::exp(-x * x);
        let d8 = derivative(&f, 0.0, 8);
        assert!((d8.value - 1680.0).abs() < 1e-3 * 1680.0, "{:?}", d8);
    }
}
