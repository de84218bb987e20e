use super::matrix::{CMatrix, ZERO};
use super::QmathError;

/// Kronecker product `a (x) b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (da, db) = (a.dim(), b.dim());
    CMatrix::from_fn(da * db, |r, c| a[(r / db, c / db)] * b[(r % db, c % db)])
}

/// Traces out every subsystem not listed in `keep`.
///
/// `dims` lists the subsystem dimensions in tensor order; `keep` holds
/// subsystem indices and the result keeps them in their original order.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix, QmathError> {
    let total: usize = dims.iter().product();
    if total != m.dim() {
        return Err(QmathError::DimensionMismatch {
            expected: total,
            found: m.dim(),
        });
    }
    let mut keep_mask = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() {
            return Err(QmathError::DimensionMismatch {
                expected: dims.len(),
                found: k,
            });
        }
        keep_mask[k] = true;
    }
    let kept_dims: Vec<usize> = (0..dims.len()).filter(|&i| keep_mask[i]).map(|i| dims[i]).collect();
    let traced_dims: Vec<usize> = (0..dims.len()).filter(|&i| !keep_mask[i]).map(|i| dims[i]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let traced_total: usize = traced_dims.iter().product();

    // Strides of each subsystem in the full index.
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let kept_idx: Vec<usize> = (0..dims.len()).filter(|&i| keep_mask[i]).collect();
    let traced_idx: Vec<usize> = (0..dims.len()).filter(|&i| !keep_mask[i]).collect();
    let offset = |flat: usize, which: &[usize], sub_dims: &[usize]| -> usize {
        let mut rem = flat;
        let mut off = 0;
        for (pos, &sys) in which.iter().enumerate().rev() {
            let d = sub_dims[pos];
            off += (rem % d) * strides[sys];
            rem /= d;
        }
        off
    };
    let kept_offsets: Vec<usize> = (0..out_dim).map(|k| offset(k, &kept_idx, &kept_dims)).collect();
    let traced_offsets: Vec<usize> = (0..traced_total)
        .map(|k| offset(k, &traced_idx, &traced_dims))
        .collect();

    let mut out = CMatrix::zeros(out_dim);
    for (r, &ro) in kept_offsets.iter().enumerate() {
        for (c, &co) in kept_offsets.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &traced_offsets {
                acc += m[(ro + t, co + t)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}
