//! Interaction phase `φ = ζω_n(ζk) − Σ_j ζ^{(j)}ω_{n_j}(ζ^{(j)}k^{(j)})`.

use crate::dispersion::DispersionModel;
use crate::error::{invalid, Result};
use crate::sign::Sign;

/// Interaction phase of the output band `(n, ζ)` at `k` and the input bands
/// `xi = [(n_j, ζ_j)]` at `ks = [k′, …, k^{(m−1)}]`; the last wavevector is
/// `k^{(m)} = k − Σ_{j<m} k^{(j)}`. Fails with `BandCrossing` when any argument
/// lies on the band-crossing set.
pub fn interaction_phase(
    model: &DispersionModel,
    n: usize,
    zeta: Sign,
    xi: &[(usize, Sign)],
    k: &[f64],
    ks: &[Vec<f64>],
) -> Result<f64> {
    let m = xi.len();
    if m < 2 || ks.len() != m - 1 {
        return invalid(format!(
            "{} bands need {} free wavevectors, got {}",
            m,
            m.saturating_sub(1),
            ks.len()
        ));
    }
    let d = k.len();
    let mut last = k.to_vec();
    for kj in ks {
        if kj.len() != d {
            return invalid("wavevector dimension mismatch");
        }
        for a in 0..d {
            last[a] -= kj[a];
        }
    }
    let mut phi = model.eval_omega(n, zeta, k)?;
    for (j, &(nj, zj)) in xi.iter().enumerate() {
        let kj = if j + 1 < m { &ks[j] } else { &last };
        phi -= model.eval_omega(nj, zj, kj)?;
    }
    Ok(phi)
}
