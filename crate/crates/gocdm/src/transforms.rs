//! Discrete Fresnel transform (DFnT), its `(M, N)` generalization (GDFnT),
//! and fast application paths.
//!
//! The GDFnT matrix is `Θ_{M,N} = Φ_N ⊗ I_M`, where `Φ_N` is the N-point
//! DFnT. Both are unitary, so the inverse transform is the conjugate
//! transpose. Production code never materializes the `MN × MN` matrix: a
//! length-`MN` vector is reshaped column-major into an `M × N` matrix and the
//! N-point DFnT runs over each row. For even `N` the DFnT itself factors into
//! chirp multiplications around a DFT, so the row transform costs
//! `O(N log N)`; odd `N` falls back to the dense `O(N²)` product.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::{cis, GocdmFloat};
use crate::{Error, Result};

/// Block geometry of the generalized transform.
///
/// `M = 1` reduces the GDFnT to the conventional N-point DFnT; `N = 1`
/// reduces it to the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GdfntParams {
    m: usize,
    n: usize,
}

impl GdfntParams {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter(format!(
                "GDFnT dimensions must be positive, got M={m}, N={n}"
            )));
        }
        Ok(Self { m, n })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Block length `MN`.
    pub fn block_len(&self) -> usize {
        self.m * self.n
    }
}

/// Transform direction. `Inverse` applies the conjugate transpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Phase angle of the DFnT kernel entry `(row, col)`, without the common
/// `e^{-jπ/4}` factor. The squared index difference is reduced mod `2N`
/// before scaling so the angle stays small and exact.
fn dfnt_kernel_angle<T: GocdmFloat>(row: usize, col: usize, n: usize) -> T {
    let d = col as i64 - row as i64;
    let two_n = 2 * n as i64;
    if n % 2 == 0 {
        let q = (d * d).rem_euclid(two_n);
        T::PI() * T::from_f64c(q as f64) / T::from_usizec(n)
    } else {
        // (d + 1/2)^2 = d^2 + d + 1/4
        let q = (d * d + d).rem_euclid(two_n);
        T::PI() * (T::from_f64c(q as f64) + T::from_f64c(0.25)) / T::from_usizec(n)
    }
}

/// The N-point DFnT matrix `Φ_N`.
///
/// Entry `(n, n')` is `(1/√N)·e^{-jπ/4}·e^{jπ(n'-n)²/N}` for even `N` and
/// `(1/√N)·e^{-jπ/4}·e^{jπ(n'-n+1/2)²/N}` for odd `N`. The result is unitary
/// and circulant.
pub fn dfnt_matrix<T: GocdmFloat>(n: usize) -> Result<Array2<Complex<T>>> {
    if n == 0 {
        return Err(Error::InvalidParameter("DFnT size must be positive".into()));
    }
    let scale = T::one() / T::from_usizec(n).sqrt();
    let quarter = T::FRAC_PI_4();
    Ok(Array2::from_shape_fn((n, n), |(r, c)| {
        cis(dfnt_kernel_angle::<T>(r, c, n) - quarter) * scale
    }))
}

/// The GDFnT matrix `Θ_{M,N} = Φ_N ⊗ I_M` of dimension `MN`.
pub fn gdfnt_matrix<T: GocdmFloat>(params: GdfntParams) -> Result<Array2<Complex<T>>> {
    let phi = dfnt_matrix::<T>(params.n)?;
    let (m, mn) = (params.m, params.block_len());
    Ok(Array2::from_shape_fn((mn, mn), |(p, q)| {
        if p % m == q % m {
            phi[(p / m, q / m)]
        } else {
            Complex::new(T::zero(), T::zero())
        }
    }))
}

/// Reusable N-point DFnT executor.
///
/// Even `N` runs the chirp-FFT factorization `Φ_N = Θ₂ F_N Θ₁`; odd `N`
/// keeps the dense matrix.
pub struct DfntPlan<T: GocdmFloat> {
    n: usize,
    kind: PlanKind<T>,
}

enum PlanKind<T: GocdmFloat> {
    Identity,
    Fft {
        fft: Arc<dyn Fft<T>>,
        ifft: Arc<dyn Fft<T>>,
        theta1: Vec<Complex<T>>,
        theta2: Vec<Complex<T>>,
        scratch: Vec<Complex<T>>,
    },
    Dense {
        phi: Array2<Complex<T>>,
        scratch: Vec<Complex<T>>,
    },
}

impl<T: GocdmFloat> DfntPlan<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("DFnT size must be positive".into()));
        }
        let kind = if n == 1 {
            PlanKind::Identity
        } else if n % 2 == 0 {
            let mut planner = FftPlanner::new();
            let fft = planner.plan_fft_forward(n);
            let ifft = planner.plan_fft_inverse(n);
            let scratch_len = fft.get_inplace_scratch_len().max(ifft.get_inplace_scratch_len());
            // [θ₁]_m = e^{-jπ/4}·e^{jπm²/N}, [θ₂]_m = e^{jπm²/N}
            let quarter = T::FRAC_PI_4();
            let theta2: Vec<Complex<T>> = (0..n).map(|m| cis(chirp_angle::<T>(m, n))).collect();
            let theta1: Vec<Complex<T>> = (0..n)
                .map(|m| cis(chirp_angle::<T>(m, n) - quarter))
                .collect();
            PlanKind::Fft {
                fft,
                ifft,
                theta1,
                theta2,
                scratch: vec![Complex::new(T::zero(), T::zero()); scratch_len],
            }
        } else {
            PlanKind::Dense {
                phi: dfnt_matrix::<T>(n)?,
                scratch: vec![Complex::new(T::zero(), T::zero()); n],
            }
        };
        Ok(Self { n, kind })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place N-point DFnT (`Forward`: `Φ_N a`) or IDFnT (`Inverse`:
    /// `Φ_Nᴴ a`).
    pub fn apply(&mut self, data: &mut [Complex<T>], direction: Direction) {
        debug_assert_eq!(data.len(), self.n);
        let inv_sqrt_n = T::one() / T::from_usizec(self.n).sqrt();
        match &mut self.kind {
            PlanKind::Identity => {}
            PlanKind::Fft {
                fft,
                ifft,
                theta1,
                theta2,
                scratch,
            } => match direction {
                Direction::Forward => {
                    for (x, t) in data.iter_mut().zip(theta1.iter()) {
                        *x = *x * *t;
                    }
                    fft.process_with_scratch(data, scratch);
                    for (x, t) in data.iter_mut().zip(theta2.iter()) {
                        *x = *x * *t * inv_sqrt_n;
                    }
                }
                Direction::Inverse => {
                    for (x, t) in data.iter_mut().zip(theta2.iter()) {
                        *x = *x * t.conj();
                    }
                    ifft.process_with_scratch(data, scratch);
                    for (x, t) in data.iter_mut().zip(theta1.iter()) {
                        *x = *x * t.conj() * inv_sqrt_n;
                    }
                }
            },
            PlanKind::Dense { phi, scratch } => {
                scratch.copy_from_slice(data);
                for (r, out) in data.iter_mut().enumerate() {
                    let mut acc = Complex::new(T::zero(), T::zero());
                    match direction {
                        Direction::Forward => {
                            for (c, x) in scratch.iter().enumerate() {
                                acc = acc + phi[(r, c)] * x;
                            }
                        }
                        Direction::Inverse => {
                            // row r of Φᴴ is the conjugate of column r of Φ
                            for (c, x) in scratch.iter().enumerate() {
                                acc = acc + phi[(c, r)].conj() * x;
                            }
                        }
                    }
                    *out = acc;
                }
            }
        }
    }
}

/// Angle `πm²/N` with the square reduced mod `2N`.
fn chirp_angle<T: GocdmFloat>(m: usize, n: usize) -> T {
    let q = ((m as i64) * (m as i64)).rem_euclid(2 * n as i64);
    T::PI() * T::from_f64c(q as f64) / T::from_usizec(n)
}

/// N-point DFnT through the chirp-FFT factorization `Φ_N = Θ₂ F_N Θ₁`
/// (`Forward`) or `Φ_Nᴴ = Θ₁ᴴ F_Nᴴ Θ₂ᴴ` (`Inverse`).
///
/// Only even `N` admits this factorization; odd `N` is rejected so callers
/// fall back to the dense product.
pub fn dfnt_via_fft<T: GocdmFloat>(
    n: usize,
    a: &[Complex<T>],
    direction: Direction,
) -> Result<Vec<Complex<T>>> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "chirp-FFT path requires even N, got {n}"
        )));
    }
    if a.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: a.len(),
        });
    }
    let mut plan = DfntPlan::new(n)?;
    let mut out = a.to_vec();
    plan.apply(&mut out, direction);
    Ok(out)
}

/// Reusable GDFnT executor over length-`MN` blocks.
pub struct GdfntPlan<T: GocdmFloat> {
    params: GdfntParams,
    row_plan: DfntPlan<T>,
    row: Vec<Complex<T>>,
}

impl<T: GocdmFloat> GdfntPlan<T> {
    pub fn new(params: GdfntParams) -> Result<Self> {
        Ok(Self {
            params,
            row_plan: DfntPlan::new(params.n)?,
            row: vec![Complex::new(T::zero(), T::zero()); params.n],
        })
    }

    pub fn params(&self) -> GdfntParams {
        self.params
    }

    /// In-place `Θ_{M,N} a` (`Forward`) or `Θ_{M,N}ᴴ a` (`Inverse`).
    ///
    /// Implements the reshape algorithm: the vector, read column-major as an
    /// `M × N` matrix, gets the N-point (I)DFnT applied to each of its `M`
    /// rows. Element `(m, n)` of that matrix is `a[n·M + m]`.
    pub fn apply(&mut self, data: &mut [Complex<T>], direction: Direction) -> Result<()> {
        let (m, n, mn) = (self.params.m, self.params.n, self.params.block_len());
        if data.len() != mn {
            return Err(Error::LengthMismatch {
                expected: mn,
                got: data.len(),
            });
        }
        if n == 1 {
            return Ok(()); // Θ_{M,1} = I_M
        }
        if m == 1 {
            self.row_plan.apply(data, direction);
            return Ok(());
        }
        for row_idx in 0..m {
            for col in 0..n {
                self.row[col] = data[col * m + row_idx];
            }
            self.row_plan.apply(&mut self.row, direction);
            for col in 0..n {
                data[col * m + row_idx] = self.row[col];
            }
        }
        Ok(())
    }
}

/// One-shot `Θ_{M,N} a` / `Θ_{M,N}ᴴ a` without materializing the matrix.
pub fn gdfnt_apply<T: GocdmFloat>(
    params: GdfntParams,
    a: &[Complex<T>],
    direction: Direction,
) -> Result<Vec<Complex<T>>> {
    let mut plan = GdfntPlan::new(params)?;
    let mut out = a.to_vec();
    plan.apply(&mut out, direction)?;
    Ok(out)
}

/// Unitary DFT executor (the OFDM reference transform), normalized by
/// `1/√N` in both directions.
pub struct DftPlan<T: GocdmFloat> {
    n: usize,
    fft: Arc<dyn Fft<T>>,
    ifft: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: GocdmFloat> DftPlan<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("DFT size must be positive".into()));
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let scratch_len = fft.get_inplace_scratch_len().max(ifft.get_inplace_scratch_len());
        Ok(Self {
            n,
            fft,
            ifft,
            scratch: vec![Complex::new(T::zero(), T::zero()); scratch_len],
        })
    }

    pub fn apply(&mut self, data: &mut [Complex<T>], direction: Direction) {
        debug_assert_eq!(data.len(), self.n);
        match direction {
            Direction::Forward => self.fft.process_with_scratch(data, &mut self.scratch),
            Direction::Inverse => self.ifft.process_with_scratch(data, &mut self.scratch),
        }
        let scale = T::one() / T::from_usizec(self.n).sqrt();
        for x in data.iter_mut() {
            *x = *x * scale;
        }
    }
}
