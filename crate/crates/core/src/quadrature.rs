//! Composite Newton-Cotes rules on uniform grids.

use std::ops::{Add, Mul};

/// Composite Simpson over `values` sampled with spacing `dt`.
///
/// An odd number of intervals closes with a 3/8 panel so the rule stays
/// fourth order on any length. Fewer than two samples integrate to zero.
pub fn simpson<T>(values: &[T], dt: f64) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
{
    let n = values.len();
    match n {
        0 | 1 => T::default(),
        2 => (values[0] + values[1]) * (0.5 * dt),
        3 => simpson_even(values, dt),
        _ => {
            let intervals = n - 1;
            if intervals.is_multiple_of(2) {
                simpson_even(values, dt)
            } else {
                let head = simpson_even(&values[..n - 3], dt);
                let tail = &values[n - 4..];
                head + (tail[0] + tail[1] * 3.0 + tail[2] * 3.0 + tail[3]) * (3.0 * dt / 8.0)
            }
        }
    }
}

fn simpson_even<T>(values: &[T], dt: f64) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
{
    let n = values.len();
    if n < 3 {
        return simpson(values, dt);
    }
    let mut acc = values[0] + values[n - 1];
    for (i, &v) in values.iter().enumerate().take(n - 1).skip(1) {
        acc = acc + v * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * (dt / 3.0)
}

/// Per-node weights of [`simpson`] for a grid of `n` samples, so that
/// `Σ w_i f_i` reproduces the rule exactly. Used by product 2-D quadrature.
pub fn simpson_weights(n: usize, dt: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    match n {
        0 | 1 => {}
        2 => {
            w[0] = 0.5 * dt;
            w[1] = 0.5 * dt;
        }
        _ => {
            let even_len = if (n - 1).is_multiple_of(2) { n } else { n - 3 };
            if even_len >= 3 {
                for (i, wi) in w.iter_mut().enumerate().take(even_len) {
                    let c = if i == 0 || i == even_len - 1 {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    *wi += c * dt / 3.0;
                }
            }
            if even_len != n {
                let s = n - 4;
                for (j, c) in [1.0, 3.0, 3.0, 1.0].into_iter().enumerate() {
                    w[s + j] += c * 3.0 * dt / 8.0;
                }
            }
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_cubics_for_any_length() {
        for n in 4..12 {
            let dt = 2.0 / (n - 1) as f64;
            let v: Vec<f64> = (0..n).map(|i| (i as f64 * dt).powi(3)).collect();
            assert!((simpson(&v, dt) - 4.0).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn weights_match_rule() {
        for n in 2..15 {
            let dt = 0.1;
            let v: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let w = simpson_weights(n, dt);
            let weighted: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
            assert!((weighted - simpson(&v, dt)).abs() < 1e-14, "n={n}");
        }
    }
}
