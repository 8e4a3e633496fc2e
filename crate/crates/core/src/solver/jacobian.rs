use std::ops::Range;

use nalgebra::DMatrix;

use super::DaeSystem;
use crate::error::ModelError;

/// Block sparsity of a DAE: unknowns and equations are grouped in blocks
/// (cells) and block `b` only influences the equations of `b` and its
/// neighbors. Blocks of one color must not share a neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStructure {
    pub x_blocks: Vec<Range<usize>>,
    pub y_blocks: Vec<Range<usize>>,
    pub neighbors: Vec<Vec<usize>>,
    pub colors: Vec<usize>,
}

/// Forward-difference Jacobian of `[f; g]` with respect to `[x; y]`.
#[derive(Debug, Clone)]
pub struct JacobianBuilder {
    nx: usize,
    ny: usize,
    structure: Option<BlockStructure>,
}

impl JacobianBuilder {
    pub fn new(nx: usize, ny: usize, structure: Option<BlockStructure>) -> Self {
        JacobianBuilder { nx, ny, structure }
    }

    fn step(z: f64, scale: f64) -> f64 {
        f64::EPSILON.sqrt() * z.abs().max(scale)
    }

    /// Returns the Jacobian and the number of residual evaluations used.
    pub fn build<S: DaeSystem + ?Sized>(
        &self,
        sys: &S,
        x: &[f64],
        y: &[f64],
        zs: &[f64],
    ) -> Result<(DMatrix<f64>, usize), ModelError> {
        let (nx, ny) = (self.nx, self.ny);
        let n = nx + ny;
        let mut f0 = vec![0.0; nx];
        let mut g0 = vec![0.0; ny];
        sys.residual(x, y, &mut f0, &mut g0)?;
        let mut jac = DMatrix::<f64>::zeros(n, n);
        let mut f1 = vec![0.0; nx];
        let mut g1 = vec![0.0; ny];
        let mut evals = 1;
        let mut xp = x.to_vec();
        let mut yp = y.to_vec();

        match &self.structure {
            None => {
                for c in 0..n {
                    let h = if c < nx {
                        xp[c] = x[c] + Self::step(x[c], zs[c]);
                        xp[c] - x[c]
                    } else {
                        yp[c - nx] = y[c - nx] + Self::step(y[c - nx], zs[c]);
                        yp[c - nx] - y[c - nx]
                    };
                    sys.residual(&xp, &yp, &mut f1, &mut g1)?;
                    evals += 1;
                    for r in 0..nx {
                        jac[(r, c)] = (f1[r] - f0[r]) / h;
                    }
                    for r in 0..ny {
                        jac[(nx + r, c)] = (g1[r] - g0[r]) / h;
                    }
                    if c < nx {
                        xp[c] = x[c];
                    } else {
                        yp[c - nx] = y[c - nx];
                    }
                }
            }
            Some(s) => {
                let n_colors = s.colors.iter().max().map_or(0, |m| m + 1);
                let max_xb = s.x_blocks.iter().map(|r| r.len()).max().unwrap_or(0);
                let max_yb = s.y_blocks.iter().map(|r| r.len()).max().unwrap_or(0);
                for color in 0..n_colors {
                    let blocks: Vec<usize> = (0..s.colors.len()).filter(|&b| s.colors[b] == color).collect();
                    for local in 0..max_xb + max_yb {
                        let mut cols = Vec::new();
                        for &b in &blocks {
                            let col = if local < max_xb {
                                let r = &s.x_blocks[b];
                                if local >= r.len() {
                                    continue;
                                }
                                r.start + local
                            } else {
                                let r = &s.y_blocks[b];
                                if local - max_xb >= r.len() {
                                    continue;
                                }
                                nx + r.start + local - max_xb
                            };
                            let h = if col < nx {
                                let h = Self::step(x[col], zs[col]);
                                xp[col] = x[col] + h;
                                xp[col] - x[col]
                            } else {
                                let h = Self::step(y[col - nx], zs[col]);
                                yp[col - nx] = y[col - nx] + h;
                                yp[col - nx] - y[col - nx]
                            };
                            cols.push((b, col, h));
                        }
                        if cols.is_empty() {
                            continue;
                        }
                        sys.residual(&xp, &yp, &mut f1, &mut g1)?;
                        evals += 1;
                        for &(b, col, h) in &cols {
                            for &rb in std::iter::once(&b).chain(&s.neighbors[b]) {
                                for r in s.x_blocks[rb].clone() {
                                    jac[(r, col)] = (f1[r] - f0[r]) / h;
                                }
                                for r in s.y_blocks[rb].clone() {
                                    jac[(nx + r, col)] = (g1[r] - g0[r]) / h;
                                }
                            }
                            if col < nx {
                                xp[col] = x[col];
                            } else {
                                yp[col - nx] = y[col - nx];
                            }
                        }
                    }
                }
            }
        }
        Ok((jac, evals))
    }
}
