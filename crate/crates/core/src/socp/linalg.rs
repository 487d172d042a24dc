//! Dense LDL' factorization for quasi-definite KKT matrices.

/// Square matrix stored row-major.
#[derive(Debug, Clone)]
pub(crate) struct DenseSym {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseSym {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[cfg(test)]
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data.chunks_exact(self.n).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }
}

/// `P = L D L'` of a quasi-definite matrix. Pivots whose sign disagrees
/// with `signs` or whose magnitude falls below `delta` are replaced by
/// `sign * delta`; iterative refinement against the true matrix absorbs the
/// perturbation.
#[derive(Debug, Clone)]
pub(crate) struct Ldl {
    n: usize,
    /// Strictly lower part of `L`, row-major; unit diagonal implied.
    l: Vec<f64>,
    d: Vec<f64>,
}

impl Ldl {
    pub fn factor(mat: &DenseSym, signs: &[f64], delta: f64) -> Self {
        let n = mat.n;
        let mut l = vec![0.0; n * n];
        let mut d = vec![0.0; n];
        // row-oriented Cholesky-Crout; w holds L[j,k] * d[k] for the current row
        let mut w = vec![0.0; n];
        for i in 0..n {
            let li = i * n;
            for j in 0..i {
                let lj = j * n;
                let mut acc = mat.data[li + j];
                let (ri, rj) = (&w[..j], &l[lj..lj + j]);
                acc -= ri.iter().zip(rj).map(|(a, b)| a * b).sum::<f64>();
                w[j] = acc;
                l[li + j] = acc / d[j];
            }
            let mut dii = mat.data[li + i];
            for k in 0..i {
                dii -= w[k] * l[li + k];
            }
            let sign = signs[i];
            if dii * sign < delta {
                dii = sign * delta;
            }
            d[i] = dii;
        }
        Self { n, l, d }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = rhs.to_vec();
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let xi = x[i];
            if xi != 0.0 {
                let row = &self.l[i * n..i * n + i];
                for (k, lik) in row.iter().enumerate() {
                    x[k] -= lik * xi;
                }
            }
        }
        x
    }
}
