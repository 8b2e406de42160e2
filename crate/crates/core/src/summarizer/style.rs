use crate::error::{Error, Result};
use crate::numerics::{cosine, Tensor2};

/// Pairwise cosine similarity of flattened sub-matrices, with a zero diagonal.
///
/// A zero matrix has no direction; its row and column are left at 0.
pub fn style_similarity(sub_matrices: &[Tensor2]) -> Result<Tensor2> {
    let n = sub_matrices.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "style similarity needs at least 2 matrices, got {n}"
        )));
    }
    let shape = sub_matrices[0].shape();
    if sub_matrices.iter().any(|s| s.shape() != shape) {
        return Err(Error::Shape("sub-matrices differ in shape".into()));
    }
    for (i, s) in sub_matrices.iter().enumerate() {
        if s.frobenius_norm() == 0.0 {
            log::warn!("sub-matrix {i} is all zeros; its similarities are set to 0");
        }
    }
    let mut out = Tensor2::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let c = cosine(sub_matrices[i].data(), sub_matrices[j].data()).unwrap_or(0.0);
            out.set(i, j, c);
            out.set(j, i, c);
        }
    }
    Ok(out)
}
