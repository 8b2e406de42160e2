//! Dense kernels, initialization, AdaGrad and finite-difference checking.
//!
//! Everything is stored and accumulated in `f64`. Gradients for every
//! trainable component are derived by hand and verified against
//! [`grad_check`].

mod adagrad;
mod gradcheck;
mod rng;
mod tensor;

pub use adagrad::{AdaGrad, DEFAULT_EPSILON};
pub use gradcheck::grad_check;
pub use rng::{fnv1a64, Rng};
pub use tensor::{init_uniform, Tensor2};

/// Dot product of two equal-length slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity, or `None` when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Gradients of `cos(a, b)` with respect to `a` and `b`.
///
/// Both vectors must be non-zero.
pub fn cosine_grad(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let na = norm(a);
    let nb = norm(b);
    let c = dot(a, b) / (na * nb);
    let inv = 1.0 / (na * nb);
    let ga = a
        .iter()
        .zip(b)
        .map(|(x, y)| y * inv - c * x / (na * na))
        .collect();
    let gb = a
        .iter()
        .zip(b)
        .map(|(x, y)| x * inv - c * y / (nb * nb))
        .collect();
    (ga, gb)
}
