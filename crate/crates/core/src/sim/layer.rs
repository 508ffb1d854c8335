use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Projections of one attention head, acting on row vectors: `X W`.
#[derive(Debug, Clone, PartialEq)]
pub struct Head {
    pub w_q: DMatrix<f64>,
    pub w_k: DMatrix<f64>,
    pub w_v: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights {
    pub heads: Vec<Head>,
    /// Maps the concatenated head outputs back to the token width.
    pub w_o: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerOutput {
    pub x: DMatrix<f64>,
    /// Row-stochastic attention matrix of every head.
    pub attention: Vec<DMatrix<f64>>,
}

/// Row-wise softmax with the row maximum subtracted first.
pub fn softmax_rows(scores: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = scores.clone();
    for mut row in out.row_iter_mut() {
        let max = row.max();
        if !max.is_finite() {
            return Err(Error::InvalidArgument("attention scores are not finite".into()));
        }
        row.apply(|x| *x = (*x - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    Ok(out)
}

fn shape_error(what: &str, got: (usize, usize), expected: (usize, usize)) -> Error {
    Error::ShapeMismatch(format!("{what} is {}x{}, expected {}x{}", got.0, got.1, expected.0, expected.1))
}

/// Attention matrices of every head.
pub fn attention(x: &DMatrix<f64>, weights: &LayerWeights) -> Result<Vec<DMatrix<f64>>> {
    let d = x.ncols();
    weights
        .heads
        .iter()
        .map(|h| {
            if h.w_q.nrows() != d || h.w_k.nrows() != d || h.w_q.ncols() != h.w_k.ncols() {
                return Err(shape_error("W^Q", h.w_q.shape(), (d, h.w_k.ncols())));
            }
            let d_k = h.w_q.ncols().max(1) as f64;
            let scores = (x * &h.w_q) * (x * &h.w_k).transpose() / d_k.sqrt();
            softmax_rows(&scores)
        })
        .collect()
}

/// `FFN(X + [h_1 ... h_M] W^O)` with `h_i = softmax(X W^Q_i (X W^K_i)ᵀ / sqrt(d_k)) X W^V_i`.
pub fn transformer_layer<F>(x: &DMatrix<f64>, weights: &LayerWeights, mut ffn: F) -> Result<LayerOutput>
where
    F: FnMut(&DMatrix<f64>) -> Result<DMatrix<f64>>,
{
    let (rows, d) = x.shape();
    let attention = attention(x, weights)?;
    let total_v: usize = weights.heads.iter().map(|h| h.w_v.ncols()).sum();
    if weights.w_o.shape() != (total_v, d) {
        return Err(shape_error("W^O", weights.w_o.shape(), (total_v, d)));
    }
    let mut concat = DMatrix::zeros(rows, total_v);
    let mut col = 0;
    for (head, att) in weights.heads.iter().zip(&attention) {
        if head.w_v.nrows() != d {
            return Err(shape_error("W^V", head.w_v.shape(), (d, head.w_v.ncols())));
        }
        let out = att * (x * &head.w_v);
        concat.columns_mut(col, out.ncols()).copy_from(&out);
        col += out.ncols();
    }
    let residual = x + concat * &weights.w_o;
    let x = ffn(&residual)?;
    Ok(LayerOutput { x, attention })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_x() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -1.0, 0.5, 3.0, 0.0])
    }

    #[test]
    fn zero_weights_leave_tokens_unchanged() {
        let x = sample_x();
        let w = LayerWeights {
            heads: vec![Head { w_q: DMatrix::zeros(2, 2), w_k: DMatrix::zeros(2, 2), w_v: DMatrix::zeros(2, 2) }],
            w_o: DMatrix::zeros(2, 2),
        };
        let out = transformer_layer(&x, &w, |y| Ok(y.clone())).unwrap();
        assert_eq!(out.x, x);
    }

    #[test]
    fn zero_scores_give_uniform_attention() {
        let x = sample_x();
        let eye = DMatrix::identity(2, 2);
        let w = LayerWeights {
            heads: vec![Head { w_q: DMatrix::zeros(2, 2), w_k: DMatrix::zeros(2, 2), w_v: eye.clone() }],
            w_o: eye,
        };
        let out = transformer_layer(&x, &w, |y| Ok(y.clone())).unwrap();
        let mean = DMatrix::from_element(3, 3, 1.0 / 3.0) * &x;
        assert!((out.x - (&x + mean)).amax() < 1e-12);
    }

    #[test]
    fn softmax_is_stable_for_large_scores() {
        let s = DMatrix::from_row_slice(1, 3, &[1000.0, 999.0, -1000.0]);
        let p = softmax_rows(&s).unwrap();
        assert!((p.sum() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|x| x.is_finite()));
        assert!(softmax_rows(&DMatrix::from_element(1, 2, f64::NAN)).is_err());
    }

    #[test]
    fn shape_errors() {
        let x = sample_x();
        let w = LayerWeights {
            heads: vec![Head { w_q: DMatrix::zeros(3, 2), w_k: DMatrix::zeros(2, 2), w_v: DMatrix::zeros(2, 2) }],
            w_o: DMatrix::zeros(2, 2),
        };
        let err = transformer_layer(&x, &w, |y| Ok(y.clone())).unwrap_err();
        assert_eq!(err.code(), "SHAPE_MISMATCH");
    }
}
