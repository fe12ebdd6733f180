/// Normalized Hermite functions `ψ_0(ξ) .. ψ_{max_order}(ξ)`.
///
/// `ψ_k(ξ) = (2^k k! √π)^{-1/2} H_k(ξ) e^{-ξ²/2}`, built with the three-term
/// recurrence
///
/// ```text
/// ψ_{k+1} = √(2/(k+1)) ξ ψ_k - √(k/(k+1)) ψ_{k-1}
/// ```
///
/// which never forms factorials or raw Hermite polynomials.
pub fn hermite_functions(max_order: usize, xi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_order + 1);
    let psi0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    out.push(psi0);
    if max_order == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * xi * psi0);
    for k in 1..max_order {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * xi * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hermite_poly(n: usize, x: f64) -> f64 {
        // Explicit polynomials up to H_4.
        match n {
            0 => 1.0,
            1 => 2.0 * x,
            2 => 4.0 * x * x - 2.0,
            3 => 8.0 * x.powi(3) - 12.0 * x,
            4 => 16.0 * x.powi(4) - 48.0 * x * x + 12.0,
            _ => unreachable!(),
        }
    }

    #[test]
    fn matches_factorial_formula_for_low_orders() {
        let factorial = [1.0, 1.0, 2.0, 6.0, 24.0];
        for &x in &[-2.3, -0.4, 0.0, 0.7, 3.1] {
            let psi = hermite_functions(4, x);
            for n in 0..=4 {
                let norm = (2f64.powi(n as i32) * factorial[n] * std::f64::consts::PI.sqrt()).sqrt();
                let expected = hermite_poly(n, x) * (-0.5 * x * x).exp() / norm;
                assert_relative_eq!(psi[n], expected, epsilon = 1e-14, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn orthonormal_on_a_fine_grid() {
        let h = 0.005;
        let n_pts = 4001;
        let grids: Vec<Vec<f64>> = (0..n_pts)
            .map(|k| hermite_functions(12, -10.0 + h * k as f64))
            .collect();
        for a in 0..=12 {
            for b in 0..=12 {
                let s: f64 = grids.iter().map(|p| p[a] * p[b]).sum::<f64>() * h;
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((s - expected).abs() < 1e-10, "<{a}|{b}> = {s}");
            }
        }
    }
}
