//! Lebesgue norms of modal fields and trajectories.

use super::field::ModalField;

/// `‖field‖_{L^{1,a}} = Σ_k (1+|k|)^a |field(k)| Δk^d` (`a = 0` is plain L¹).
pub fn l1_norm(field: &ModalField, a: f64) -> f64 {
    if a == 0.0 {
        field.l1_norm()
    } else {
        field.l1_weighted(a)
    }
}

/// `sup_τ ‖field(τ)‖_{L¹}` over stored time samples (0 for an empty slice).
pub fn sup_time_norm(trajectory: &[ModalField]) -> f64 {
    trajectory.iter().map(|f| f.l1_norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavepacket::{Envelope, Frame, Grid};
    use num_complex::Complex64;

    #[test]
    fn single_node_and_weights() {
        let grid = Grid::new(1, 64, 4.0).unwrap();
        let mut f = ModalField::zeros(&grid, 2, Frame::Slow);
        f.data[40] = Complex64::new(3.0, 4.0);
        assert!((l1_norm(&f, 0.0) - 5.0 * grid.dk()).abs() < 1e-15);
        let k = grid.k_at(40)[0];
        assert!((l1_norm(&f, 2.0) - 5.0 * grid.dk() * (1.0 + k.abs()).powi(2)).abs() < 1e-13);
    }

    #[test]
    fn weighted_gaussian_matches_closed_form() {
        let grid = Grid::new(1, 8192, 40.0).unwrap();
        let env = Envelope::gaussian(1.3, 0.7);
        let mut f = ModalField::zeros(&grid, 2, Frame::Slow);
        for idx in 0..grid.len() {
            f.data[idx] = Complex64::new(env.hat(&grid.k_at(idx)), 0.0);
        }
        let want = env.hat_l1_weighted2(1).unwrap();
        assert!((l1_norm(&f, 2.0) - want).abs() < 1e-3 * want);
    }

    #[test]
    fn sup_over_samples() {
        let grid = Grid::new(1, 16, 4.0).unwrap();
        let mut a = ModalField::zeros(&grid, 2, Frame::Slow);
        a.data[0] = Complex64::new(1.0, 0.0);
        let b = a.scaled(Complex64::new(0.0, 3.0));
        assert!((sup_time_norm(&[a, b]) - 3.0 * grid.dk()).abs() < 1e-15);
        assert_eq!(sup_time_norm(&[]), 0.0);
    }
}
