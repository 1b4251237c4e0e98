//! Gaussian-state algebra for N bosonic modes.
//!
//! States are a displacement vector and a covariance matrix over the
//! quadrature ordering `(q_1, p_1, ..., q_N, p_N)` with vacuum variance 1.
//! Gaussian unitaries act as affine symplectic maps: `x -> S x + d`,
//! `V -> S V S^T`, with `S Ω S^T = Ω`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::to_db;

/// Absolute per-entry tolerance for covariance symmetry.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Absolute per-entry tolerance for `S Ω S^T = Ω`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;
/// Lowest eigenvalue of `V + iΩ` still accepted as physical.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Block-diagonal symplectic form built from `ω = [[0, 1], [-1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    displacement: DVector<f64>,
    covariance: DMatrix<f64>,
}

impl GaussianState {
    /// Builds a state, checking dimensions, symmetry and the uncertainty
    /// principle `V + iΩ ⪰ 0`.
    pub fn new(displacement: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let dim = displacement.len();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "displacement length {dim} is not a positive even number"
            )));
        }
        if covariance.nrows() != dim || covariance.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: covariance.nrows().max(covariance.ncols()),
            });
        }
        let state = GaussianState {
            displacement,
            covariance,
        };
        if !state.is_symmetric() {
            return Err(Error::invalid("covariance matrix is not symmetric"));
        }
        if !state.is_physical() {
            return Err(Error::invalid("covariance violates V + iΩ ⪰ 0"));
        }
        Ok(state)
    }

    pub fn n_modes(&self) -> usize {
        self.displacement.len() / 2
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.displacement
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn is_symmetric(&self) -> bool {
        let v = &self.covariance;
        (0..v.nrows()).all(|i| (0..i).all(|j| (v[(i, j)] - v[(j, i)]).abs() <= SYMMETRY_TOL))
    }

    /// Smallest eigenvalue of the Hermitian matrix `V + iΩ`.
    ///
    /// Computed through the real symmetric embedding `[[V, -Ω], [Ω, V]]`,
    /// whose spectrum is that of `V + iΩ` with every eigenvalue doubled.
    pub fn min_uncertainty_eigenvalue(&self) -> f64 {
        let dim = self.covariance.nrows();
        let omega = symplectic_form(self.n_modes());
        let mut embed = DMatrix::zeros(2 * dim, 2 * dim);
        // symmetrise to keep rounding noise out of the eigen-solver
        let sym = (&self.covariance + self.covariance.transpose()) * 0.5;
        embed.view_mut((0, 0), (dim, dim)).copy_from(&sym);
        embed.view_mut((dim, dim), (dim, dim)).copy_from(&sym);
        embed.view_mut((0, dim), (dim, dim)).copy_from(&(-&omega));
        embed.view_mut((dim, 0), (dim, dim)).copy_from(&omega);
        SymmetricEigen::new(embed).eigenvalues.min()
    }

    pub fn is_physical(&self) -> bool {
        self.min_uncertainty_eigenvalue() >= -PHYSICALITY_TOL
    }

    /// Variance of the `q` quadrature of `mode`.
    pub fn q_variance(&self, mode: usize) -> f64 {
        self.covariance[(2 * mode, 2 * mode)]
    }

    /// Variance of the `p` quadrature of `mode`.
    pub fn p_variance(&self, mode: usize) -> f64 {
        self.covariance[(2 * mode + 1, 2 * mode + 1)]
    }
}

/// Affine symplectic map `x -> S x + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    matrix: DMatrix<f64>,
    offset: DVector<f64>,
}

impl SymplecticMap {
    pub fn new(matrix: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        let dim = offset.len();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "offset length {dim} is not a positive even number"
            )));
        }
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        let map = SymplecticMap { matrix, offset };
        if map.symplectic_defect() > SYMPLECTIC_TOL {
            return Err(Error::invalid("matrix is not symplectic"));
        }
        Ok(map)
    }

    pub fn identity(n_modes: usize) -> Self {
        SymplecticMap {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
            offset: DVector::zeros(2 * n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.offset.len() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    /// Largest absolute entry of `S Ω S^T - Ω`.
    pub fn symplectic_defect(&self) -> f64 {
        let omega = symplectic_form(self.n_modes());
        (&self.matrix * &omega * self.matrix.transpose() - omega).amax()
    }

    /// The map that applies `self` first and `next` second.
    pub fn then(&self, next: &SymplecticMap) -> Result<SymplecticMap> {
        check_dims(self.offset.len(), next.offset.len())?;
        Ok(SymplecticMap {
            matrix: &next.matrix * &self.matrix,
            offset: &next.matrix * &self.offset + &next.offset,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointVariances {
    pub v_q_minus: f64,
    pub v_q_plus: f64,
    pub v_p_minus: f64,
    pub v_p_plus: f64,
}

/// Squeezed and anti-squeezed joint variances relative to vacuum, in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingLevels {
    pub squeezing_db: f64,
    pub antisqueezing_db: f64,
}

fn check_mode(mode: usize, n_modes: usize) -> Result<()> {
    if mode >= n_modes {
        return Err(Error::invalid(format!(
            "mode index {mode} out of range for {n_modes} modes"
        )));
    }
    Ok(())
}

fn check_pair(pair: (usize, usize), n_modes: usize) -> Result<()> {
    check_mode(pair.0, n_modes)?;
    check_mode(pair.1, n_modes)?;
    if pair.0 == pair.1 {
        return Err(Error::invalid(format!(
            "mode pair ({}, {}) must be distinct",
            pair.0, pair.1
        )));
    }
    Ok(())
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn vacuum_state(n_modes: usize) -> Result<GaussianState> {
    if n_modes == 0 {
        return Err(Error::invalid("a state needs at least one mode"));
    }
    Ok(GaussianState {
        displacement: DVector::zeros(2 * n_modes),
        covariance: DMatrix::identity(2 * n_modes, 2 * n_modes),
    })
}

/// Writes the 2x2 block `[[a, b], [c, d]]` coupling `row_mode` to `col_mode`.
fn set_block(m: &mut DMatrix<f64>, row_mode: usize, col_mode: usize, block: [[f64; 2]; 2]) {
    for (i, row) in block.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            m[(2 * row_mode + i, 2 * col_mode + j)] = v;
        }
    }
}

/// Two-mode squeezer `[[cosh r I, sinh r Z], [sinh r Z, cosh r I]]` on
/// `mode_pair`, identity elsewhere.
pub fn two_mode_squeeze_map(r: f64, mode_pair: (usize, usize), n_modes: usize) -> Result<SymplecticMap> {
    if !r.is_finite() {
        return Err(Error::invalid("squeezing parameter must be finite"));
    }
    check_pair(mode_pair, n_modes)?;
    let (b, c) = mode_pair;
    let (ch, sh) = (r.cosh(), r.sinh());
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    set_block(&mut s, b, b, [[ch, 0.0], [0.0, ch]]);
    set_block(&mut s, c, c, [[ch, 0.0], [0.0, ch]]);
    set_block(&mut s, b, c, [[sh, 0.0], [0.0, -sh]]);
    set_block(&mut s, c, b, [[sh, 0.0], [0.0, -sh]]);
    Ok(SymplecticMap {
        matrix: s,
        offset: DVector::zeros(2 * n_modes),
    })
}

/// Beamsplitter of transmittance `t` between `mode_pair.0` and `mode_pair.1`:
/// `[[√T I, √(1-T) I], [-√(1-T) I, √T I]]`.
///
/// Loss on a mode is modelled by pairing it with an otherwise unused vacuum
/// mode; the transmitted amplitude is `√T` for both members of the pair.
pub fn beamsplitter_map(t: f64, mode_pair: (usize, usize), n_modes: usize) -> Result<SymplecticMap> {
    check_transmittance(t)?;
    check_pair(mode_pair, n_modes)?;
    let (i, j) = mode_pair;
    let (tr, rf) = (t.sqrt(), (1.0 - t).sqrt());
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    set_block(&mut s, i, i, [[tr, 0.0], [0.0, tr]]);
    set_block(&mut s, j, j, [[tr, 0.0], [0.0, tr]]);
    set_block(&mut s, i, j, [[rf, 0.0], [0.0, rf]]);
    set_block(&mut s, j, i, [[-rf, 0.0], [0.0, -rf]]);
    Ok(SymplecticMap {
        matrix: s,
        offset: DVector::zeros(2 * n_modes),
    })
}

/// Quadrature rotation `[[cos θ, sin θ], [-sin θ, cos θ]]` on `mode`, so the
/// rotated `q` reads `q cos θ + p sin θ`.
pub fn phase_rotation_map(theta: f64, mode: usize, n_modes: usize) -> Result<SymplecticMap> {
    if !theta.is_finite() {
        return Err(Error::invalid("rotation angle must be finite"));
    }
    check_mode(mode, n_modes)?;
    let (s, c) = theta.sin_cos();
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    set_block(&mut m, mode, mode, [[c, s], [-s, c]]);
    Ok(SymplecticMap {
        matrix: m,
        offset: DVector::zeros(2 * n_modes),
    })
}

pub fn apply_map(state: &GaussianState, map: &SymplecticMap) -> Result<GaussianState> {
    check_dims(state.displacement.len(), map.offset.len())?;
    let s = &map.matrix;
    Ok(GaussianState {
        displacement: s * &state.displacement + &map.offset,
        covariance: s * &state.covariance * s.transpose(),
    })
}

/// Variances of `q± = (q_b ± q_c)/√2` and `p± = (p_b ± p_c)/√2`.
pub fn joint_variances(state: &GaussianState, mode_b: usize, mode_c: usize) -> Result<JointVariances> {
    check_pair((mode_b, mode_c), state.n_modes())?;
    let v = &state.covariance;
    let (qb, pb, qc, pc) = (2 * mode_b, 2 * mode_b + 1, 2 * mode_c, 2 * mode_c + 1);
    let q_mean = 0.5 * (v[(qb, qb)] + v[(qc, qc)]);
    let p_mean = 0.5 * (v[(pb, pb)] + v[(pc, pc)]);
    Ok(JointVariances {
        v_q_minus: q_mean - v[(qb, qc)],
        v_q_plus: q_mean + v[(qb, qc)],
        v_p_minus: p_mean - v[(pb, pc)],
        v_p_plus: p_mean + v[(pb, pc)],
    })
}

fn check_transmittance(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("transmittance {t} outside [0, 1]")));
    }
    Ok(())
}

/// Four-mode chain `B(T_b, T_c) · S_2(r)` acting on vacuum, with the squeezed
/// pair in modes 1 and 2 and loss ancillas in modes 0 and 3.
pub fn lossy_two_mode_squeezed_state(r: f64, t_b: f64, t_c: f64) -> Result<GaussianState> {
    let squeeze = two_mode_squeeze_map(r, (1, 2), 4)?;
    let loss = beamsplitter_map(t_b, (0, 1), 4)?.then(&beamsplitter_map(t_c, (2, 3), 4)?)?;
    let squeezed = apply_map(&vacuum_state(4)?, &squeeze)?;
    apply_map(&squeezed, &loss)
}

/// Closed-form `(V(q-), V(q+))` of a two-mode squeezer followed by
/// independent losses on each arm.
pub fn analytic_variances(r: f64, t_b: f64, t_c: f64) -> Result<(f64, f64)> {
    check_transmittance(t_b)?;
    check_transmittance(t_c)?;
    if !r.is_finite() {
        return Err(Error::invalid("squeezing parameter must be finite"));
    }
    let mean_t = 0.5 * (t_b + t_c);
    let base = 1.0 - mean_t + mean_t * (2.0 * r).cosh();
    let cross = (t_b * t_c).sqrt() * (2.0 * r).sinh();
    Ok((base - cross, base + cross))
}

pub fn analytic_squeezing(r: f64, t_b: f64, t_c: f64) -> Result<SqueezingLevels> {
    let (minus, plus) = analytic_variances(r, t_b, t_c)?;
    Ok(SqueezingLevels {
        squeezing_db: to_db(minus),
        antisqueezing_db: to_db(plus),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn vacuum_is_identity() {
        let v = vacuum_state(1).unwrap();
        assert_eq!(v.displacement().as_slice(), &[0.0, 0.0]);
        assert_eq!(v.covariance(), &DMatrix::<f64>::identity(2, 2));
        let v4 = vacuum_state(4).unwrap();
        assert_eq!(v4.covariance(), &DMatrix::<f64>::identity(8, 8));
        assert!(matches!(vacuum_state(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn vacuum_joint_variances_are_one() {
        let jv = joint_variances(&vacuum_state(4).unwrap(), 1, 2).unwrap();
        for v in [jv.v_q_minus, jv.v_q_plus, jv.v_p_minus, jv.v_p_plus] {
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn zero_squeeze_and_unit_beamsplitter_are_identity() {
        let id = DMatrix::<f64>::identity(8, 8);
        assert_eq!(two_mode_squeeze_map(0.0, (1, 2), 4).unwrap().matrix(), &id);
        assert_eq!(beamsplitter_map(1.0, (0, 1), 4).unwrap().matrix(), &id);
        assert_eq!(phase_rotation_map(0.0, 3, 4).unwrap().matrix(), &id);
    }

    #[test]
    fn constructors_reject_bad_arguments() {
        assert!(two_mode_squeeze_map(0.5, (1, 1), 4).is_err());
        assert!(two_mode_squeeze_map(0.5, (1, 4), 4).is_err());
        assert!(beamsplitter_map(1.2, (0, 1), 2).is_err());
        assert!(beamsplitter_map(-0.1, (0, 1), 2).is_err());
        assert!(phase_rotation_map(0.3, 2, 2).is_err());
        let map = SymplecticMap::identity(2);
        assert!(matches!(
            apply_map(&vacuum_state(3).unwrap(), &map),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn lossless_tmsv_reaches_generated_squeezing() {
        let state = lossy_two_mode_squeezed_state(0.986, 1.0, 1.0).unwrap();
        let jv = joint_variances(&state, 1, 2).unwrap();
        assert_abs_diff_eq!(jv.v_q_minus, (-2.0f64 * 0.986).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(jv.v_q_minus, 0.1391, epsilon = 1e-4);
        assert_abs_diff_eq!(to_db(jv.v_q_minus), -8.565, epsilon = 1e-3);
    }

    #[test]
    fn reference_losses_match_reported_levels() {
        let state = lossy_two_mode_squeezed_state(0.986, 0.3097, 0.2576).unwrap();
        let jv = joint_variances(&state, 1, 2).unwrap();
        assert_abs_diff_eq!(jv.v_q_minus, 0.760, epsilon = 5e-4);
        assert_abs_diff_eq!(jv.v_q_plus, 2.747, epsilon = 5e-3);
        assert_abs_diff_eq!(jv.v_q_minus, jv.v_p_plus, epsilon = 1e-10);
        assert_abs_diff_eq!(jv.v_q_plus, jv.v_p_minus, epsilon = 1e-10);
        let lv = analytic_squeezing(0.986, 0.3097, 0.2576).unwrap();
        assert_abs_diff_eq!(lv.squeezing_db, -1.19, epsilon = 0.01);
        assert_abs_diff_eq!(lv.antisqueezing_db, 4.39, epsilon = 0.01);
    }

    #[test]
    fn deployed_losses_match_reported_levels() {
        let lv = analytic_squeezing(0.986, 0.1054, 0.1596).unwrap();
        assert_abs_diff_eq!(lv.squeezing_db, -0.48, epsilon = 0.01);
        assert_abs_diff_eq!(lv.antisqueezing_db, 2.57, epsilon = 0.01);
    }

    #[test]
    fn vacuum_gives_zero_db_for_any_loss() {
        for t in [0.0, 0.3, 1.0] {
            let lv = analytic_squeezing(0.0, t, 1.0 - t).unwrap();
            assert_eq!(lv.squeezing_db, 0.0);
            assert_eq!(lv.antisqueezing_db, 0.0);
        }
        assert!(analytic_squeezing(0.5, 1.1, 0.5).is_err());
    }

    #[test]
    fn balanced_beamsplitter_leaves_vacuum_invariant() {
        let out = apply_map(
            &vacuum_state(2).unwrap(),
            &beamsplitter_map(0.5, (0, 1), 2).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(
            (out.covariance() - DMatrix::<f64>::identity(4, 4)).amax(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn single_arm_loss_matches_hand_formula() {
        let (r, t) = (0.986f64, 0.3097f64);
        let state = lossy_two_mode_squeezed_state(r, t, 1.0).unwrap();
        let expected = t * (2.0 * r).cosh() + (1.0 - t);
        assert_abs_diff_eq!(state.q_variance(1), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(state.q_variance(2), (2.0 * r).cosh(), epsilon = 1e-12);
    }

    #[test]
    fn quarter_turn_swaps_quadratures() {
        let squeezed = apply_map(
            &vacuum_state(2).unwrap(),
            &two_mode_squeeze_map(0.4, (0, 1), 2)
                .unwrap()
                .then(&beamsplitter_map(0.7, (0, 1), 2).unwrap())
                .unwrap(),
        )
        .unwrap();
        let rotated = apply_map(
            &squeezed,
            &phase_rotation_map(std::f64::consts::FRAC_PI_2, 0, 2).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(rotated.q_variance(0), squeezed.p_variance(0), epsilon = 1e-12);
        assert_abs_diff_eq!(rotated.p_variance(0), squeezed.q_variance(0), epsilon = 1e-12);
    }

    #[test]
    fn rotated_cross_covariance_follows_phase_sum() {
        let (r, tb, tc) = (0.986f64, 0.3097f64, 0.2576f64);
        let base = lossy_two_mode_squeezed_state(r, tb, tc).unwrap();
        for &(th1, th2) in &[(0.0, 0.0), (0.3, 1.1), (1.2, 1.94), (-0.7, 2.5)] {
            let rot = phase_rotation_map(th1, 1, 4)
                .unwrap()
                .then(&phase_rotation_map(th2, 2, 4).unwrap())
                .unwrap();
            let out = apply_map(&base, &rot).unwrap();
            let cov = out.covariance()[(2, 4)];
            let expected = (tb * tc).sqrt() * (2.0 * r).sinh() * (th1 + th2).cos();
            assert_abs_diff_eq!(cov, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn identity_map_leaves_state_unchanged() {
        let state = lossy_two_mode_squeezed_state(0.7, 0.4, 0.9).unwrap();
        let out = apply_map(&state, &SymplecticMap::identity(4)).unwrap();
        assert_eq!(out, state);
    }

    #[test]
    fn composed_chain_matches_explicit_matrix_product() {
        let (r, tb, tc) = (0.986, 0.3097, 0.2576);
        let s2 = two_mode_squeeze_map(r, (1, 2), 4).unwrap();
        let bs = beamsplitter_map(tb, (0, 1), 4)
            .unwrap()
            .then(&beamsplitter_map(tc, (2, 3), 4).unwrap())
            .unwrap();
        let m = bs.matrix() * s2.matrix();
        let oracle = &m * DMatrix::<f64>::identity(8, 8) * m.transpose();
        let state = lossy_two_mode_squeezed_state(r, tb, tc).unwrap();
        assert!((state.covariance() - oracle).amax() < 1e-12);
    }

    #[test]
    fn physicality_rejects_sub_vacuum_product() {
        let mut cov = DMatrix::<f64>::identity(2, 2);
        cov[(0, 0)] = 0.5;
        cov[(1, 1)] = 0.5;
        assert!(GaussianState::new(DVector::zeros(2), cov).is_err());
        let mut squeezed = DMatrix::<f64>::identity(2, 2);
        squeezed[(0, 0)] = 0.25;
        squeezed[(1, 1)] = 4.0;
        assert!(GaussianState::new(DVector::zeros(2), squeezed).is_ok());
    }

    #[test]
    fn non_symplectic_matrix_is_rejected() {
        let m = DMatrix::<f64>::identity(2, 2) * 2.0;
        assert!(SymplecticMap::new(m, DVector::zeros(2)).is_err());
    }
}
