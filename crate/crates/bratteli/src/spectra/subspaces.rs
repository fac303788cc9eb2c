//! Numerical geometry of the transition products: contracted directions,
//! eventual kernels, and summable-residual evidence.
//!
//! The eventual kernel is computed exactly over the rationals. The
//! contracted space at a finite horizon is approximated by the right
//! singular directions of P(horizon, m) whose singular value falls below a
//! relative threshold; the full singular-value profile is attached so the
//! cutoff is auditable. Summability of residuals is finite-depth evidence
//! extrapolated geometrically, and is flagged as such.

use super::{nat_to_rat, SpectraError};
use crate::diagram::{IncidenceMatrix, OrderedDiagram};
use crate::num::interval::{rat_from_f64, rat_to_f64, Rat};
use num_traits::{Signed, Zero};

#[derive(Debug, Clone)]
pub struct SummableEvidence {
    pub vector: Vec<f64>,
    /// Partial sum of sup-norm residuals ||P(n, m) v|| up to the horizon,
    /// computed exactly for the given (approximate) vector.
    pub partial_sum: f64,
    /// Ratio of the last two residuals, when both are positive.
    pub tail_ratio: Option<f64>,
    pub summable: bool,
}

#[derive(Debug, Clone)]
pub struct SubspaceReport {
    pub level: usize,
    pub horizon: usize,
    /// Singular values of P(horizon, m), descending.
    pub singular_values: Vec<f64>,
    /// Right singular directions with sigma <= rel_threshold * sigma_max:
    /// the numerical contracted space.
    pub stable_basis: Vec<Vec<f64>>,
    /// Exact rational basis of the eventual kernel Ker P(horizon, m).
    pub kernel: Vec<Vec<Rat>>,
    /// Summability evidence for each stable-basis vector.
    pub summable: Vec<SummableEvidence>,
    /// Kernel directions embed in the stable span within tolerance.
    pub containment_ok: bool,
    pub rel_threshold: f64,
    pub finite_depth_heuristic: bool,
}

/// Exact rational kernel basis of a nonnegative integer matrix.
pub fn kernel_basis(m: &IncidenceMatrix) -> Vec<Vec<Rat>> {
    let rows = m.rows();
    let cols = m.cols();
    let mut a: Vec<Vec<Rat>> = (0..rows)
        .map(|r| m.row(r).iter().map(nat_to_rat).collect())
        .collect();
    let mut pivot_col_of_row = Vec::new();
    let mut rank = 0usize;
    for col in 0..cols {
        let p = (rank..rows).find(|&r| !a[r][col].is_zero());
        let Some(p) = p else { continue };
        a.swap(rank, p);
        let inv = a[rank][col].recip();
        for c in col..cols {
            a[rank][c] = &a[rank][c] * &inv;
        }
        for r in 0..rows {
            if r != rank && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..cols {
                    let s = &a[rank][c] * &f;
                    a[r][c] = &a[r][c] - &s;
                }
            }
        }
        pivot_col_of_row.push(col);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    let pivot_cols: std::collections::HashSet<usize> = pivot_col_of_row.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![Rat::zero(); cols];
        v[free] = Rat::from(num_bigint::BigInt::from(1));
        for (row, &pc) in pivot_col_of_row.iter().enumerate() {
            v[pc] = -a[row][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Cyclic Jacobi eigendecomposition of a small symmetric matrix.
/// Returns (eigenvalues, eigenvectors as columns), descending.
fn jacobi_symmetric(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off.sqrt() < 1e-300_f64.max(1e-15 * frobenius(&a)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].partial_cmp(&a[i][i]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i][i]).collect();
    let eigenvectors: Vec<Vec<f64>> =
        order.iter().map(|&i| (0..n).map(|k| v[k][i]).collect()).collect();
    (eigenvalues, eigenvectors)
}

fn frobenius(a: &[Vec<f64>]) -> f64 {
    a.iter().flat_map(|r| r.iter()).map(|x| x * x).sum::<f64>().sqrt()
}

fn exact_residual_profile(
    diagram: &OrderedDiagram,
    m: usize,
    horizon: usize,
    v: &[Rat],
) -> Result<Vec<Rat>, SpectraError> {
    let mut out = Vec::with_capacity(horizon - m + 1);
    let mut cur = v.to_vec();
    out.push(sup_norm(&cur));
    for n in (m + 1)..=horizon {
        cur = diagram.matrix(n).mul_rat_vec(&cur);
        out.push(sup_norm(&cur));
    }
    Ok(out)
}

fn sup_norm(v: &[Rat]) -> Rat {
    v.iter().map(|x| x.abs()).fold(Rat::zero(), |a, b| a.max(b))
}

/// Numerical bases for the contracted space, its eventual-kernel part,
/// and summable-residual evidence, with the singular-value profile of
/// P(horizon, m).
pub fn stable_subspaces(
    diagram: &OrderedDiagram,
    m: usize,
    horizon: usize,
    rel_threshold: f64,
) -> Result<SubspaceReport, SpectraError> {
    if m < 1 || m > horizon {
        return Err(SpectraError::BadInput(format!("need 1 <= m <= horizon, got m={m}")));
    }
    diagram.check_level(horizon)?;
    let p = diagram.product(horizon, m)?;
    let rows = p.rows();
    let cols = p.cols();
    // Scale to avoid overflow; entries can be astronomically large.
    let mut scale = 0.0f64;
    let as_f64: Vec<Vec<f64>> = (0..rows)
        .map(|r| {
            p.row(r)
                .iter()
                .map(|e| {
                    let x = rat_to_f64(&nat_to_rat(e));
                    scale = scale.max(x.abs());
                    x
                })
                .collect()
        })
        .collect();
    let scale = if scale > 0.0 { scale } else { 1.0 };
    // Gram matrix G = (P/scale)^T (P/scale).
    let mut gram = vec![vec![0.0; cols]; cols];
    for (i, gi) in gram.iter_mut().enumerate() {
        for j in 0..cols {
            let mut acc = 0.0;
            for row in &as_f64 {
                acc += (row[i] / scale) * (row[j] / scale);
            }
            gi[j] = acc;
        }
    }
    let (eigs, vecs) = jacobi_symmetric(gram);
    let singular_values: Vec<f64> =
        eigs.iter().map(|l| l.max(0.0).sqrt() * scale).collect();
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let cutoff = rel_threshold * sigma_max;
    let stable_basis: Vec<Vec<f64>> = singular_values
        .iter()
        .zip(&vecs)
        .filter(|(s, _)| **s <= cutoff)
        .map(|(_, v)| v.clone())
        .collect();
    let kernel = kernel_basis(&p);

    let mut summable = Vec::new();
    for v in &stable_basis {
        let v_rat: Vec<Rat> = v.iter().map(|x| rat_from_f64(*x)).collect();
        let profile = exact_residual_profile(diagram, m, horizon, &v_rat)?;
        let partial: Rat = profile.iter().fold(Rat::zero(), |a, b| a + b);
        let last = profile.last().unwrap();
        let prev = &profile[profile.len().saturating_sub(2)];
        let tail_ratio = if !prev.is_zero() && !last.is_zero() {
            Some(rat_to_f64(&(last / prev)))
        } else {
            None
        };
        let summable_flag = match tail_ratio {
            Some(r) => r < 0.999,
            None => last.is_zero(),
        };
        summable.push(SummableEvidence {
            vector: v.clone(),
            partial_sum: rat_to_f64(&partial),
            tail_ratio,
            summable: summable_flag,
        });
    }

    // Kernel directions must embed in the stable span.
    let containment_ok = kernel.iter().all(|z| {
        let zf: Vec<f64> = z.iter().map(rat_to_f64).collect();
        let nz = norm2(&zf);
        if nz == 0.0 {
            return true;
        }
        let mut res: Vec<f64> = zf.iter().map(|x| x / nz).collect();
        for b in &stable_basis {
            let ip: f64 = res.iter().zip(b).map(|(a, c)| a * c).sum();
            for (r, c) in res.iter_mut().zip(b) {
                *r -= ip * c;
            }
        }
        norm2(&res) < 1e-6
    });

    Ok(SubspaceReport {
        level: m,
        horizon,
        singular_values,
        stable_basis,
        kernel,
        summable,
        containment_ok,
        rel_threshold,
        finite_depth_heuristic: true,
    })
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{fibonacci_diagram, IncidenceMatrix, Level, OrderWord, OrderedDiagram};

    #[test]
    fn kernel_of_invertible_is_trivial() {
        let d = fibonacci_diagram(10);
        let p = d.product(10, 1).unwrap();
        assert!(kernel_basis(&p).is_empty());
    }

    #[test]
    fn kernel_detects_zero_column() {
        // Zero column: used only here, the positivity assumption is a flag.
        let m = IncidenceMatrix::from_u64(&[&[1, 0], &[2, 0]]);
        let k = kernel_basis(&m);
        assert_eq!(k.len(), 1);
        assert!(k[0][0].is_zero());
        assert!(!k[0][1].is_zero());
    }

    #[test]
    fn golden_stable_direction_found() {
        let d = fibonacci_diagram(24);
        let rep = stable_subspaces(&d, 1, 24, 1e-6).unwrap();
        assert_eq!(rep.singular_values.len(), 2);
        assert_eq!(rep.stable_basis.len(), 1, "one contracted direction");
        assert!(rep.kernel.is_empty());
        assert!(rep.containment_ok);
        // The direction is parallel to (1, -phi).
        let v = &rep.stable_basis[0];
        let slope = v[1] / v[0];
        assert!((slope + 1.618_033_988_75).abs() < 1e-6, "slope {slope}");
        assert!(rep.summable[0].summable);
        let ratio = rep.summable[0].tail_ratio.unwrap();
        assert!((ratio - 0.618_033_9887).abs() < 1e-4);
    }

    #[test]
    fn contracted_dimension_below_rank_for_positive_products() {
        let d = fibonacci_diagram(16);
        let rep = stable_subspaces(&d, 2, 16, 1e-6).unwrap();
        assert!(rep.stable_basis.len() <= 1, "avoids the measure direction");
    }

    #[test]
    fn zero_column_level_gives_nontrivial_kernel_space() {
        let levels = vec![
            Level {
                matrix: IncidenceMatrix::from_u64(&[&[1, 1], &[1, 1]]),
                orders: vec![OrderWord::Explicit(vec![0, 1]), OrderWord::Explicit(vec![0, 1])],
            },
            Level {
                matrix: IncidenceMatrix::from_u64(&[&[2, 0], &[1, 0]]),
                orders: vec![OrderWord::Explicit(vec![0, 0]), OrderWord::Explicit(vec![0])],
            },
        ];
        // The second level kills e_2: rejected by the strict constructor,
        // accepted by the relaxed one for kernel experiments.
        assert!(OrderedDiagram::new(OrderedDiagram::unit_hat(2), levels.clone()).is_err());
        let d = OrderedDiagram::new_relaxed(OrderedDiagram::unit_hat(2), levels).unwrap();
        let rep = stable_subspaces(&d, 2, 3, 1e-6).unwrap();
        assert_eq!(rep.kernel.len(), 1);
        assert!(rep.containment_ok);
        assert!(rep.summable[0].summable || rep.summable.is_empty());
    }
}
