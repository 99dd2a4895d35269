use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::{One, Zero};

use super::matrix::RatMatrix;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// `m` rational vectors in dimension `d` together with `eps2`, the largest
/// squared norm among them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorSystem {
    d: usize,
    vectors: Vec<Vec<Rational>>,
    eps2: Rational,
}

impl VectorSystem {
    pub fn new(d: usize, vectors: Vec<Vec<Rational>>) -> Result<Self> {
        if let Some((i, v)) = vectors.iter().enumerate().find(|(_, v)| v.len() != d) {
            return Err(Error::InvalidInput(format!(
                "vector {i} has {} coordinates, expected {d}",
                v.len()
            )));
        }
        let eps2 = vectors
            .iter()
            .map(|v| norm_sq(v))
            .fold(Rational::zero(), |a, b| if b > a { b } else { a });
        Ok(VectorSystem { d, vectors, eps2 })
    }

    /// Exact rational images of the given floats.
    pub fn from_f64(d: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let vectors = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&x| rational::from_f64(x))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(d, vectors)
    }

    pub fn from_ints(d: usize, rows: &[&[i64]]) -> Result<Self> {
        Self::new(
            d,
            rows.iter()
                .map(|r| r.iter().map(|&x| rational::int(x)).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<Rational>] {
        &self.vectors
    }

    pub fn eps2(&self) -> &Rational {
        &self.eps2
    }

    pub fn norm_sq(&self, i: usize) -> Rational {
        norm_sq(&self.vectors[i])
    }

    /// `Σ_{i ∈ mask} v_i v_iᵀ`
    pub fn sum_outer(&self, mask: u64) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.d);
        for (i, v) in self.vectors.iter().enumerate() {
            if mask >> i & 1 == 1 {
                m.add_assign(&RatMatrix::outer(v));
            }
        }
        m
    }

    pub fn frame(&self) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.d);
        for v in &self.vectors {
            m.add_assign(&RatMatrix::outer(v));
        }
        m
    }

    /// Largest absolute entry of `Σ v_i v_iᵀ − I`.
    pub fn isotropy_defect(&self) -> f64 {
        let f = self.frame();
        let mut worst = 0.0f64;
        for i in 0..self.d {
            for j in 0..self.d {
                let target = if i == j {
                    Rational::one()
                } else {
                    Rational::zero()
                };
                worst = worst.max(rational::to_f64(&(f.get(i, j) - target)).abs());
            }
        }
        worst
    }

    pub fn is_isotropic(&self) -> bool {
        self.frame() == RatMatrix::identity(self.d)
    }

    /// `Σ v_i v_iᵀ ⪯ (1 + tol) I`
    pub fn is_sub_isotropic(&self, tol: f64) -> bool {
        self.d == 0 || largest_eigenvalue(&self.frame().to_f64()) <= 1.0 + tol
    }

    /// `‖Σ_{i ∈ mask} v_i v_iᵀ‖` from a symmetric eigensolver.
    pub fn spectral_norm(&self, mask: u64) -> f64 {
        if self.d == 0 {
            return 0.0;
        }
        largest_eigenvalue(&self.sum_outer(mask).to_f64()).max(0.0)
    }

    /// Vectors `w_{i,j}` in dimension `d·r`: `v_i` placed in block `j`.
    /// `w_{i,j}` has index `i·r + j`.
    pub fn lift(&self, r: usize) -> Result<Self> {
        let mut out = Vec::with_capacity(self.len() * r);
        for v in &self.vectors {
            for j in 0..r {
                let mut w = vec![Rational::zero(); self.d * r];
                w[j * self.d..(j + 1) * self.d].clone_from_slice(v);
                out.push(w);
            }
        }
        Self::new(self.d * r, out)
    }

    /// Parses the text format: a header `d m`, then `m` lines of `d`
    /// entries each (rationals `a/b` or decimals). `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hl, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                line: hl,
                msg: "header must be `d m`".into(),
            })?;
        let [d, m] = dims[..] else {
            return Err(Error::Parse {
                line: hl,
                msg: "header must be `d m`".into(),
            });
        };
        let mut vectors = Vec::with_capacity(m);
        for (ln, line) in lines {
            let row = line
                .split_whitespace()
                .map(rational::parse)
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::Parse {
                    line: ln,
                    msg: e.to_string(),
                })?;
            if row.len() != d {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected {d} entries, found {}", row.len()),
                });
            }
            vectors.push(row);
        }
        if vectors.len() != m {
            return Err(Error::Parse {
                line: hl,
                msg: format!("header declares {m} vectors, found {}", vectors.len()),
            });
        }
        Self::new(d, vectors)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.d, self.len());
        for v in &self.vectors {
            let row: Vec<String> = v.iter().map(rational::format).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

fn norm_sq(v: &[Rational]) -> Rational {
    v.iter().map(|x| x * x).sum()
}

pub fn largest_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}
