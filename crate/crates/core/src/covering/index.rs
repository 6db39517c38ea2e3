//! Uniform-grid neighbour index over a chordal embedding of the space.
//!
//! Points are embedded isometrically up to the monotone map d ↦ chordal(d)
//! (the sphere sits in R^d, projective spaces embed through their Hermitian
//! projectors), then projected onto at most three orthonormal directions. The
//! projection is 1-Lipschitz, so every point within chordal distance c of a
//! query lies in the 27 grid cells of width c around it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustc_hash::FxHashMap;

use crate::manifold::{inner_modulus, Kind, ManifoldSpec};

const GRID_DIM: usize = 3;

pub(crate) struct NeighborIndex {
    kind: Kind,
    field: usize,
    len: usize,
    basis: Option<Vec<[f64; GRID_DIM]>>,
    cell: f64,
    cells: FxHashMap<[i32; GRID_DIM], Vec<u32>>,
    coords: Vec<f64>,
}

/// Chordal distance in the embedding for geodesic distance `d`.
pub(crate) fn chordal(kind: Kind, d: f64) -> f64 {
    let h = (0.5 * d.clamp(0.0, std::f64::consts::PI)).sin();
    if kind.is_projective() {
        std::f64::consts::SQRT_2 * h
    } else {
        2.0 * h
    }
}

impl NeighborIndex {
    /// Index whose cells are sized for queries up to geodesic radius `radius`.
    pub fn new(spec: &ManifoldSpec, radius: f64) -> Self {
        let len = spec.real_len().expect("points exist for this kind");
        let field = spec.kind.field_dim();
        let nc = len / field;
        let emb_dim = if spec.kind.is_projective() {
            nc + field * nc * (nc - 1) / 2
        } else {
            len
        };
        let basis = (emb_dim > GRID_DIM).then(|| random_frame(emb_dim));
        Self {
            kind: spec.kind,
            field,
            len,
            basis,
            cell: chordal(spec.kind, radius).max(1e-12),
            cells: FxHashMap::default(),
            coords: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.len
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.len..(i + 1) * self.len]
    }

    fn embed(&self, x: &[f64]) -> Vec<f64> {
        if !self.kind.is_projective() {
            return x.to_vec();
        }
        let f = self.field;
        let nc = x.len() / f;
        let mut e = Vec::with_capacity(nc + f * nc * (nc - 1) / 2);
        for i in 0..nc {
            e.push(x[i * f..(i + 1) * f].iter().map(|c| c * c).sum());
        }
        let s2 = std::f64::consts::SQRT_2;
        for i in 0..nc {
            for j in i + 1..nc {
                let (a, b) = (&x[i * f..(i + 1) * f], &x[j * f..(j + 1) * f]);
                match f {
                    1 => e.push(s2 * a[0] * b[0]),
                    2 => {
                        // a · conj(b)
                        e.push(s2 * (a[0] * b[0] + a[1] * b[1]));
                        e.push(s2 * (a[1] * b[0] - a[0] * b[1]));
                    }
                    _ => {
                        let q = crate::manifold::Quaternion::from_slice(a)
                            * crate::manifold::Quaternion::from_slice(b).conj();
                        e.extend_from_slice(&[s2 * q.w, s2 * q.x, s2 * q.y, s2 * q.z]);
                    }
                }
            }
        }
        e
    }

    fn key(&self, x: &[f64]) -> [i32; GRID_DIM] {
        let e = self.embed(x);
        let mut key = [0i32; GRID_DIM];
        match &self.basis {
            None => {
                for (k, v) in key.iter_mut().zip(&e) {
                    *k = (v / self.cell).floor() as i32;
                }
            }
            Some(b) => {
                let mut p = [0.0; GRID_DIM];
                for (row, v) in b.iter().zip(&e) {
                    for g in 0..GRID_DIM {
                        p[g] += row[g] * v;
                    }
                }
                for g in 0..GRID_DIM {
                    key[g] = (p[g] / self.cell).floor() as i32;
                }
            }
        }
        key
    }

    pub fn insert(&mut self, x: &[f64]) -> usize {
        let id = self.len();
        let key = self.key(x);
        self.cells.entry(key).or_default().push(id as u32);
        self.coords.extend_from_slice(x);
        id
    }

    /// Calls `visit(id, modulus)` for candidates in the 27 surrounding cells;
    /// the visitor returns false to stop early.
    fn scan(&self, x: &[f64], mut visit: impl FnMut(usize, f64) -> bool) {
        let key = self.key(x);
        // centre cell first: the likeliest place for a close neighbour
        let mut offsets = [[0i32; GRID_DIM]; 27];
        let mut n = 1;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if (dx, dy, dz) != (0, 0, 0) {
                        offsets[n] = [dx, dy, dz];
                        n += 1;
                    }
                }
            }
        }
        for off in offsets {
            let k = [key[0] + off[0], key[1] + off[1], key[2] + off[2]];
            if let Some(ids) = self.cells.get(&k) {
                for &id in ids {
                    let id = id as usize;
                    if !visit(id, inner_modulus(self.kind, x, self.point(id))) {
                        return;
                    }
                }
            }
        }
    }

    fn threshold(&self, radius: f64) -> f64 {
        if self.kind.is_projective() {
            (0.5 * radius).cos()
        } else {
            radius.cos()
        }
    }

    /// True when some indexed point lies at distance < `radius` (≤ cell radius).
    pub fn any_within(&self, x: &[f64], radius: f64) -> bool {
        let th = self.threshold(radius);
        let mut found = false;
        self.scan(x, |_, m| {
            found = m > th;
            !found
        });
        found
    }

    /// Number of indexed points at distance ≤ `radius`.
    pub fn count_within(&self, x: &[f64], radius: f64) -> usize {
        let th = self.threshold(radius);
        let mut count = 0;
        self.scan(x, |_, m| {
            if m >= th {
                count += 1;
            }
            true
        });
        count
    }

    /// Nearest indexed point among the neighbouring cells, as (id, distance).
    pub fn nearest_nearby(&self, x: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        self.scan(x, |id, _| {
            let d = crate::manifold::distance_raw(self.kind, x, self.point(id));
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((id, d));
            }
            true
        });
        best
    }

    /// Exhaustive nearest point.
    pub fn nearest_brute(&self, x: &[f64]) -> Option<(usize, f64)> {
        (0..self.len())
            .map(|id| (id, crate::manifold::distance_raw(self.kind, x, self.point(id))))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

// Fixed-seed orthonormal frame: the index layout must not depend on callers' seeds.
fn random_frame(dim: usize) -> Vec<[f64; GRID_DIM]> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a09_e667_f3bc_c908);
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < GRID_DIM {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        for c in &cols {
            let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-6 {
            cols.push(v.into_iter().map(|a| a / n).collect());
        }
    }
    (0..dim).map(|i| [cols[0][i], cols[1][i], cols[2][i]]).collect()
}
