//! Seeded generators for randomized test suites.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::matcore::{c64, CMatrix, HermitianMatrix, C64};
use crate::model::{Channel, NCGraph};

pub use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im)
    })
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, d: usize) -> DVector<C64> {
    gaussian_matrix(rng, d, 1).column(0).into_owned()
}

/// Haar-like isometry `rows × cols` (`rows ≥ cols`) from the QR factor of a Gaussian matrix.
pub fn isometry<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = gaussian_matrix(rng, rows, cols);
    g.qr().q()
}

/// Random CPTP map with `n_kraus` Kraus operators, obtained by splitting an isometry.
pub fn channel<R: Rng>(rng: &mut R, d_in: usize, d_out: usize, n_kraus: usize) -> Channel {
    let v = isometry(rng, d_out * n_kraus, d_in);
    let kraus = (0..n_kraus).map(|k| v.rows(k * d_out, d_out).into_owned()).collect();
    Channel::from_kraus(kraus, d_in, d_out).expect("isometry blocks form a channel")
}

/// Projector onto a random subspace of dimension `rank`.
pub fn projector<R: Rng>(rng: &mut R, d: usize, rank: usize) -> HermitianMatrix {
    let v = isometry(rng, d, rank);
    HermitianMatrix::new(&v * v.adjoint()).expect("projector is Hermitian")
}

/// Random cq-graph: `n` output projectors on `C^d` with ranks in `1..=max_rank`.
pub fn cq_graph<R: Rng>(rng: &mut R, n: usize, d: usize, max_rank: usize) -> NCGraph {
    let projectors = (0..n)
        .map(|_| {
            let r = rng.random_range(1..=max_rank.min(d));
            projector(rng, d, r)
        })
        .collect();
    NCGraph::from_cq_projectors(projectors).expect("valid projectors")
}

/// Random cq-graph whose projectors all contain a common random unit vector.
pub fn cq_graph_common_support<R: Rng>(rng: &mut R, n: usize, d: usize) -> NCGraph {
    let common = gaussian_vector(rng, d);
    let common = &common / c64(common.norm(), 0.0);
    let projectors = (0..n)
        .map(|_| {
            let extra = rng.random_range(0..d.saturating_sub(1).max(1));
            let mut cols = vec![common.clone()];
            for _ in 0..extra {
                cols.push(gaussian_vector(rng, d));
            }
            let m = CMatrix::from_columns(&cols);
            let q = m.qr().q();
            HermitianMatrix::new(&q * q.adjoint()).expect("projector")
        })
        .collect();
    NCGraph::from_cq_projectors(projectors).expect("valid projectors")
}

/// Random transition matrix `p[x][y]` with a random support containing at least one `y` per `x`.
pub fn classical<R: Rng>(rng: &mut R, nx: usize, ny: usize) -> Vec<Vec<f64>> {
    (0..nx)
        .map(|_| {
            let mut row: Vec<f64> =
                (0..ny).map(|_| if rng.random_bool(0.5) { rng.random_range(0.05..1.0) } else { 0.0 }).collect();
            if row.iter().all(|&q| q == 0.0) {
                let y = rng.random_range(0..ny);
                row[y] = 1.0;
            }
            let s: f64 = row.iter().sum();
            row.iter().map(|q| q / s).collect()
        })
        .collect()
}

/// Random density matrix of rank `rank`.
pub fn state<R: Rng>(rng: &mut R, d: usize, rank: usize) -> HermitianMatrix {
    let g = gaussian_matrix(rng, d, rank);
    let rho = &g * g.adjoint();
    let t = rho.trace().re;
    HermitianMatrix::new(rho / c64(t, 0.0)).expect("density matrix")
}
