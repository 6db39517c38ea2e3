use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::jacobi::ReproducingKernel;
use crate::manifold::{zonal_arg_raw, ManifoldSpec, Point};

/// Default ceiling on packed Gram storage.
pub const GRAM_MEMORY_LIMIT: usize = 3_400_000_000;

/// Symmetric matrix stored as its packed upper triangle, row by row.
#[derive(Clone, Debug)]
pub struct Gram {
    m: usize,
    data: Vec<f64>,
}

impl Gram {
    pub fn from_fn(m: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(m * (m + 1) / 2);
        for i in 0..m {
            for j in i..m {
                data.push(f(i, j));
            }
        }
        Self { m, data }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    fn offset(&self, i: usize) -> usize {
        // rows 0..i hold m + (m-1) + ... + (m-i+1) entries
        i * (2 * self.m + 1 - i) / 2
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.data[self.offset(i) + j - i]
    }

    pub fn trace(&self) -> f64 {
        (0..self.m).map(|i| self.get(i, i)).sum()
    }

    /// y = G x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let m = self.m;
        assert_eq!(x.len(), m);
        assert_eq!(y.len(), m);
        y.fill(0.0);
        let mut off = 0;
        for i in 0..m {
            let row = &self.data[off..off + m - i];
            off += m - i;
            let xi = x[i];
            let mut acc = row[0] * xi;
            let (xs, ys) = (&x[i + 1..], &mut y[i + 1..]);
            for ((g, xj), yj) in row[1..].iter().zip(xs).zip(ys.iter_mut()) {
                acc += g * xj;
                *yj += g * xi;
            }
            y[i] += acc;
        }
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.m];
        self.matvec(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.m).map(|i| (0..self.m).map(|j| self.get(i, j)).collect()).collect()
    }
}

/// G_{ωω'} = Σ_{k=1}^{D} c_{εk} P_{εk}(cos(d(ω, ω')/ε)), assembled row by row.
pub fn gram_matrix(spec: &ManifoldSpec, nodes: &[Point], degree: usize) -> Result<Gram> {
    gram_matrix_limited(spec, nodes, degree, GRAM_MEMORY_LIMIT)
}

pub fn gram_matrix_limited(spec: &ManifoldSpec, nodes: &[Point], degree: usize, max_bytes: usize) -> Result<Gram> {
    if degree == 0 {
        return Err(Error::param("Gram matrix needs degree >= 1"));
    }
    let m = nodes.len();
    let len = spec.real_len()?;
    let entries = m * (m + 1) / 2;
    if entries.saturating_mul(8) > max_bytes {
        return Err(Error::BudgetExceeded {
            message: format!("Gram matrix for {m} nodes needs {} bytes, limit {max_bytes}", entries * 8),
            produced: 0,
            estimated: entries * 8,
        });
    }
    let mut flat = Vec::with_capacity(m * len);
    for p in nodes {
        if p.coords().len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: p.coords().len() });
        }
        flat.extend_from_slice(p.coords());
    }
    let rk = ReproducingKernel::new(spec, degree);
    let mut data = vec![0.0; entries];
    let mut rows: Vec<(usize, &mut [f64])> = Vec::with_capacity(m);
    let mut rest = data.as_mut_slice();
    for i in 0..m {
        let (row, tail) = rest.split_at_mut(m - i);
        rows.push((i, row));
        rest = tail;
    }
    let kind = spec.kind;
    rows.into_par_iter().for_each(|(i, row)| {
        let xi = &flat[i * len..(i + 1) * len];
        let us: Vec<f64> = (i..m)
            .map(|j| zonal_arg_raw(kind, xi, &flat[j * len..(j + 1) * len]))
            .collect();
        rk.eval_batch(&us, row);
        row.iter_mut().for_each(|g| *g -= 1.0);
    });
    Ok(Gram { m, data })
}
