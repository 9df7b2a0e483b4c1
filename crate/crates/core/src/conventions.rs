//! The single record of sign and normalization choices.
//!
//! Every module reads its constants from here, and reports carry the sha256
//! of [`RECORD`] so a change in any of them is visible downstream.

use sha2::{Digest, Sha256};

/// `dd^c (x² + y²) = c · dx∧dy` on `ℂ¹`.
pub const DDC_PLANAR_QUADRATIC: f64 = -4.0;

/// Flat Kähler form `ω̃ = ¼ dd^c|z|² = −Σ dx_j∧dy_j`.
pub const FLAT_KAHLER_SCALE: f64 = 0.25;

/// `I(ω̃) = s · ω̃`.
pub const I_ON_FLAT_KAHLER: f64 = 1.0;

/// Under `ω′ = e^{−f} ω` the Lee form becomes `θ′ = θ + s·df`.
pub const RESCALE_LEE_SIGN: f64 = -1.0;

/// `ι_A η^c = s · |A|²` with `η^c = ι_{A^c} ω̃`.
pub const CONTRACTION_ETA_C_SIGN: f64 = 1.0;

/// `dd^c φ = c · ω̃` for the Vaisman potential of the classical Hopf structure.
pub const HOPF_VAISMAN_DDC: f64 = 16.0;

/// Pullbacks `Φ_t^*` along flows; `Lie_{λ⁻¹A^c} ω_ψ = s · ω_{ψ′}`.
pub const PSI_LIE_SIGN: f64 = -1.0;

/// Potential certified against `ω_W`: `φ = λ^{-3} |A|²_ψ`.
pub const PSI_POTENTIAL_POWER: i32 = -3;

pub const RECORD: &str = "\
coordinates=(x1,y1,...,xn,yn); I d/dx_j = d/dy_j, I d/dy_j = -d/dx_j
I_on_forms=(I a)(X1..Xk) = (-1)^k a(IX1..IXk)
dc=-I d I
ddc(x^2+y^2)=-4 dx^dy
flat_kahler=1/4 ddc|z|^2 = -sum dx_j^dy_j
I(flat_kahler)=+flat_kahler
metric=g(X,Y)=omega(IX,Y)
rescale=omega'=exp(-f) omega => theta'=theta-df
contraction=i_A i_{A^c} flat_kahler = +|A|^2
hopf_vaisman=ddc(g~(theta#,theta#)) = 16 flat_kahler
flow=pullback; Lie_{A^c/lambda} omega_psi = -omega_{psi'}
average=(1/T) sum_k f(kT/N); omega_W unnormalized
omega_W_window=centered [-pi/lambda, pi/lambda] composite Simpson
psi_potential=lambda^-3 |A|^2_psi
";

/// Hex sha256 of [`RECORD`].
pub fn fingerprint() -> String {
    hex::encode(Sha256::digest(RECORD.as_bytes()))
}

#[cfg(test)]
mod tests {
    #[test]
    fn fingerprint_is_stable() {
        assert_eq!(super::fingerprint(), super::fingerprint());
        assert_eq!(super::fingerprint().len(), 64);
    }
}
