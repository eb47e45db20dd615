//! The effective channel in the generalized Fresnel domain.
//!
//! Conjugating the time-domain channel by the block transform,
//! `H_eff = Θ_{M,N} H Θ_{M,N}ᴴ`, gives the input-output relation between the
//! GF-domain symbol vector and the demodulated block. For a path with delay
//! `l` and integer normalized Doppler `k`, the conjugation collapses to a
//! single cyclic shift of `d = l + kM` positions per row, so `H_eff` has one
//! nonzero per path per row. A fractional Doppler `κ` is expanded over the
//! integer-shift basis with coefficients `λ_b`, turning one physical path
//! into `2B+1` *virtual paths* at shifts `l + (k+b)M`. Virtual paths sharing
//! a shift are grouped, which yields a sparse matrix with exactly `L`
//! nonzeros per row and per column ([`SparseGfChannel`]).
//!
//! The dense construction ([`dense_heff`]) is kept as the oracle the sparse
//! path is tested against, and as the MMSE baseline input.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex;

use crate::channel::{dense_h, ChannelRealization};
use crate::scalar::{cis, GocdmFloat};
use crate::transforms::{DftPlan, Direction, GdfntParams, GdfntPlan};
use crate::waveform::{FrameParams, WaveformMode};
use crate::{Error, Result};

/// Dense effective channels are an oracle/baseline tool; cap the block
/// length so a misconfigured sweep cannot allocate gigabytes.
const DENSE_BLOCK_CAP: usize = 1024;

/// One term of the fractional-Doppler basis expansion of a physical path.
#[derive(Debug, Clone, Copy)]
pub struct VirtualPath<T> {
    /// Index of the physical path this term came from.
    pub path_index: usize,
    /// Basis offset `b ∈ [-B, B]` (0 when the path has integer Doppler).
    pub basis_offset: i64,
    /// Expansion coefficient `λ_{i,b}`.
    pub coefficient: Complex<T>,
    /// Cyclic row shift `⟨lᵢ + (kᵢ+b)M⟩_MN` this term induces.
    pub shift: usize,
}

/// Basis-expansion coefficients `λ_b`, `b = -B..B`, of the Doppler vector
/// `e^{j2πκn/MN}` over the integer-shift basis.
///
/// `κ = 0` degenerates to the single coefficient 1 at `b = 0`.
pub fn lambda_coeffs<T: GocdmFloat>(kappa: T, b_max: usize, mn: usize) -> Vec<Complex<T>> {
    if kappa == T::zero() {
        return vec![Complex::new(T::one(), T::zero())];
    }
    let two_pi = T::PI() * T::from_f64c(2.0);
    let mn_t = T::from_usizec(mn);
    let numerator = cis(two_pi * kappa) - Complex::new(T::one(), T::zero());
    (-(b_max as i64)..=b_max as i64)
        .map(|b| {
            let denom = cis(two_pi * (kappa - T::from_f64c(b as f64)) / mn_t)
                - Complex::new(T::one(), T::zero());
            numerator / denom / mn_t
        })
        .collect()
}

/// Enumerates the virtual paths of a realization under truncation depth
/// `b_max` (per path; paths with `κ = 0` contribute exactly one term).
///
/// Both `λ_b` and the basis vector `ϑ_b` are periodic in `b` with period
/// `MN`, so offsets outside the principal range would double-count basis
/// directions; the depth is clamped to `(MN−1)/2` accordingly.
pub fn virtual_paths<T: GocdmFloat>(
    ch: &ChannelRealization<T>,
    m: usize,
    b_max: usize,
) -> Vec<VirtualPath<T>> {
    let mn = ch.block_len() as i64;
    let b_max = b_max.min((ch.block_len() - 1) / 2);
    let mut out = Vec::new();
    for (i, path) in ch.paths().iter().enumerate() {
        let lambdas = lambda_coeffs(path.doppler_frac, b_max, ch.block_len());
        let b_lo = if lambdas.len() == 1 { 0 } else { -(b_max as i64) };
        for (offset, lambda) in lambdas.into_iter().enumerate() {
            let b = b_lo + offset as i64;
            let shift =
                (path.delay as i64 + (path.doppler_int + b) * m as i64).rem_euclid(mn) as usize;
            out.push(VirtualPath {
                path_index: i,
                basis_offset: b,
                coefficient: lambda,
                shift,
            });
        }
    }
    out
}

/// The grouped sparse GF-domain channel: `L` distinct cyclic shifts `d_ℓ`
/// and, for every row `p`, the nonzero value at column `⟨p − d_ℓ⟩_MN`.
#[derive(Debug, Clone)]
pub struct SparseGfChannel<T> {
    mn: usize,
    shifts: Vec<usize>,
    /// `(MN, L)`; entry `(p, ℓ)` is `[H̃_eff]_{p,⟨p−d_ℓ⟩}`.
    coeff: Array2<Complex<T>>,
}

impl<T: GocdmFloat> SparseGfChannel<T> {
    /// Builds from an explicit shift list and coefficient table. Shifts must
    /// be distinct and in `[0, MN)`.
    pub fn from_parts(mn: usize, shifts: Vec<usize>, coeff: Array2<Complex<T>>) -> Result<Self> {
        if coeff.nrows() != mn || coeff.ncols() != shifts.len() {
            return Err(Error::InvalidParameter(format!(
                "coefficient table {}x{} does not match MN={mn}, L={}",
                coeff.nrows(),
                coeff.ncols(),
                shifts.len()
            )));
        }
        let mut seen = vec![false; mn];
        for &d in &shifts {
            if d >= mn || seen[d] {
                return Err(Error::InvalidParameter(format!(
                    "shift {d} out of range or duplicated"
                )));
            }
            seen[d] = true;
        }
        Ok(Self { mn, shifts, coeff })
    }

    /// Extracts the nonzero structure of a dense matrix: every cyclic shift
    /// whose diagonal carries any entry with magnitude above `tol` becomes a
    /// group. Exact for integer-Doppler channels; with fractional Doppler the
    /// result can be as dense as the input.
    pub fn from_dense(h_eff: &Array2<Complex<T>>, tol: T) -> Self {
        let mn = h_eff.nrows();
        let mut shifts = Vec::new();
        for d in 0..mn {
            let live = (0..mn).any(|p| h_eff[(p, (p + mn - d) % mn)].norm() > tol);
            if live {
                shifts.push(d);
            }
        }
        let mut coeff = Array2::from_elem((mn, shifts.len()), Complex::new(T::zero(), T::zero()));
        for (l, &d) in shifts.iter().enumerate() {
            for p in 0..mn {
                coeff[(p, l)] = h_eff[(p, (p + mn - d) % mn)];
            }
        }
        Self { mn, shifts, coeff }
    }

    pub fn block_len(&self) -> usize {
        self.mn
    }

    /// Number of shift groups `L` (nonzeros per row and per column).
    pub fn num_groups(&self) -> usize {
        self.shifts.len()
    }

    /// The distinct shifts `d_ℓ`, ascending.
    pub fn shifts(&self) -> &[usize] {
        &self.shifts
    }

    /// `[H̃_eff]_{p,⟨p−d_ℓ⟩}`.
    #[inline]
    pub fn coeff(&self, p: usize, group: usize) -> Complex<T> {
        self.coeff[(p, group)]
    }

    /// Indices `b_p` of the `L` transmitted symbols observed by row `p`:
    /// `⟨p − d_ℓ⟩_MN`.
    pub fn tx_indices(&self, p: usize) -> Result<Vec<usize>> {
        if p >= self.mn {
            return Err(Error::InvalidParameter(format!(
                "index {p} out of range for MN={}",
                self.mn
            )));
        }
        Ok(self
            .shifts
            .iter()
            .map(|&d| (p + self.mn - d) % self.mn)
            .collect())
    }

    /// Indices `q_p'` of the `L` observations a transmitted symbol reaches:
    /// `⟨p' + d_ℓ⟩_MN`.
    pub fn rx_indices(&self, p_prime: usize) -> Result<Vec<usize>> {
        if p_prime >= self.mn {
            return Err(Error::InvalidParameter(format!(
                "index {p_prime} out of range for MN={}",
                self.mn
            )));
        }
        Ok(self
            .shifts
            .iter()
            .map(|&d| (p_prime + d) % self.mn)
            .collect())
    }

    /// Materializes the implied matrix (tests and small baselines).
    pub fn to_dense(&self) -> Array2<Complex<T>> {
        let mut out = Array2::from_elem((self.mn, self.mn), Complex::new(T::zero(), T::zero()));
        for (l, &d) in self.shifts.iter().enumerate() {
            for p in 0..self.mn {
                let col = (p + self.mn - d) % self.mn;
                out[(p, col)] = out[(p, col)] + self.coeff[(p, l)];
            }
        }
        out
    }

    /// `H̃_eff · x` without materializing the matrix.
    pub fn matvec(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if x.len() != self.mn {
            return Err(Error::LengthMismatch {
                expected: self.mn,
                got: x.len(),
            });
        }
        let mut y = vec![Complex::new(T::zero(), T::zero()); self.mn];
        for (l, &d) in self.shifts.iter().enumerate() {
            for (p, out) in y.iter_mut().enumerate() {
                *out = *out + self.coeff[(p, l)] * x[(p + self.mn - d) % self.mn];
            }
        }
        Ok(y)
    }
}

fn forward_columns<T: GocdmFloat>(
    params: &FrameParams<T>,
    mat: &mut Array2<Complex<T>>,
) -> Result<()> {
    let mn = params.block_len();
    let mut col = vec![Complex::new(T::zero(), T::zero()); mn];
    match params.mode() {
        WaveformMode::Ofdm => {
            let mut plan = DftPlan::new(mn)?;
            for j in 0..mn {
                for (i, c) in col.iter_mut().enumerate() {
                    *c = mat[(i, j)];
                }
                plan.apply(&mut col, Direction::Forward);
                for (i, &c) in col.iter().enumerate() {
                    mat[(i, j)] = c;
                }
            }
        }
        _ => {
            let mut plan = GdfntPlan::new(params.transform())?;
            for j in 0..mn {
                for (i, c) in col.iter_mut().enumerate() {
                    *c = mat[(i, j)];
                }
                plan.apply(&mut col, Direction::Forward)?;
                for (i, &c) in col.iter().enumerate() {
                    mat[(i, j)] = c;
                }
            }
        }
    }
    Ok(())
}

/// Exact dense effective channel of the frame's transform:
/// `Θ H Θᴴ` (the unitary DFT replacing `Θ` in OFDM mode).
///
/// `O((MN)² log N)` time, `O((MN)²)` memory; oracle and MMSE baseline only.
pub fn dense_heff<T: GocdmFloat>(
    params: &FrameParams<T>,
    ch: &ChannelRealization<T>,
) -> Result<Array2<Complex<T>>> {
    let mn = params.block_len();
    if mn != ch.block_len() {
        return Err(Error::LengthMismatch {
            expected: mn,
            got: ch.block_len(),
        });
    }
    if mn > DENSE_BLOCK_CAP {
        return Err(Error::InvalidParameter(format!(
            "dense effective channel limited to MN <= {DENSE_BLOCK_CAP}, got {mn}"
        )));
    }
    // H_eff = Θ H Θᴴ, evaluated as column transforms of H, then column
    // transforms of conj((ΘH)ᵀ), undoing the conjugate transpose at the end.
    let mut work = dense_h(ch);
    forward_columns(params, &mut work)?;
    let mut transposed = work.t().mapv(|z| z.conj());
    forward_columns(params, &mut transposed)?;
    Ok(transposed.t().mapv(|z| z.conj()))
}

/// Builds the grouped sparse GF-domain channel with truncation depth
/// `b_max` for fractional-Doppler paths.
///
/// Cost `O(MN · Σᵢ(2Bᵢ+1))`; the dense matrix is never formed. Exact when
/// every path has integer Doppler. Only GDFnT-family modes have this
/// structure; OFDM frames must go through [`dense_heff`] +
/// [`SparseGfChannel::from_dense`].
pub fn sparse_heff<T: GocdmFloat>(
    params: &FrameParams<T>,
    ch: &ChannelRealization<T>,
    b_max: usize,
) -> Result<SparseGfChannel<T>> {
    if params.mode() == WaveformMode::Ofdm {
        return Err(Error::InvalidParameter(
            "sparse GF construction applies to GDFnT-family modes; build OFDM channels \
             from the dense path"
                .into(),
        ));
    }
    let mn = params.block_len();
    if mn != ch.block_len() {
        return Err(Error::LengthMismatch {
            expected: mn,
            got: ch.block_len(),
        });
    }
    let (m, n) = (params.m(), params.n());

    // group virtual paths by shift, ascending
    let mut groups: BTreeMap<usize, Vec<VirtualPath<T>>> = BTreeMap::new();
    for vp in virtual_paths(ch, m, b_max) {
        groups.entry(vp.shift).or_default().push(vp);
    }
    let shifts: Vec<usize> = groups.keys().copied().collect();
    let mut coeff = Array2::from_elem((mn, shifts.len()), Complex::new(T::zero(), T::zero()));

    let two_n = 2 * n as i64;
    let odd = n % 2 == 1;
    let pi_over_n = T::PI() / T::from_usizec(n);
    let two_pi_over_mn = T::PI() * T::from_f64c(2.0) / T::from_usizec(mn);

    for (l_idx, members) in groups.values().enumerate() {
        let d = members[0].shift;
        for vp in members {
            let path = &ch.paths()[vp.path_index];
            let weight = path.gain * vp.coefficient;
            let k_plus_b = path.doppler_int + vp.basis_offset;
            for p in 0..mn {
                let p_prime = (p + mn - d) % mn;
                let q = (p_prime + path.delay) % mn;
                let row_block = (p / m) as i64;
                let col_block = (q / m) as i64;
                // chirp phase difference between the row and column blocks;
                // the odd-N kernel carries an extra -(n−n') term
                let mut quad = row_block * row_block - col_block * col_block;
                if odd {
                    quad -= row_block - col_block;
                }
                let chirp = pi_over_n * T::from_f64c(quad.rem_euclid(two_n) as f64);
                let dop_num = (k_plus_b * (p % m) as i64).rem_euclid(mn as i64);
                let doppler = two_pi_over_mn * T::from_f64c(dop_num as f64);
                coeff[(p, l_idx)] = coeff[(p, l_idx)] + weight * cis(chirp + doppler);
            }
        }
    }
    SparseGfChannel::from_parts(mn, shifts, coeff)
}

/// Maximum absolute entry of `Π Θᴴ − Θᴴ Π`: the cyclic shift commutes with
/// the inverse transform, so this is numerically zero for every `(M, N)`.
pub fn verify_lemma1<T: GocdmFloat>(m: usize, n: usize) -> Result<T> {
    let params = GdfntParams::new(m, n)?;
    let theta = crate::transforms::gdfnt_matrix::<T>(params)?;
    let mn = params.block_len();
    // Θᴴ[p,q] = conj(Θ[q,p]); (ΠA)[p,q] = A[p−1,q]; (AΠ)[p,q] = A[p,q+1]
    let mut worst = T::zero();
    for p in 0..mn {
        for q in 0..mn {
            let lhs = theta[(q, (p + mn - 1) % mn)].conj();
            let rhs = theta[((q + 1) % mn, p)].conj();
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}
