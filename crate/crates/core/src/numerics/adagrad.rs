use super::Tensor2;
use crate::error::{Error, Result};

/// Added outside the square root of the accumulator.
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// Diagonal AdaGrad.
///
/// Per scalar parameter: `acc += g^2; theta -= lr * g / (sqrt(acc) + eps)`.
#[derive(Debug, Clone)]
pub struct AdaGrad {
    accumulators: Vec<Tensor2>,
    learning_rate: f64,
    epsilon: f64,
}

impl AdaGrad {
    /// Fresh state with zero accumulators shaped like `params`.
    pub fn new(params: &[&Tensor2], learning_rate: f64, epsilon: f64) -> Result<Self> {
        if learning_rate.is_nan() || learning_rate <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {learning_rate}"
            )));
        }
        if epsilon.is_nan() || epsilon < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be non-negative, got {epsilon}"
            )));
        }
        Ok(Self {
            accumulators: params
                .iter()
                .map(|p| Tensor2::zeros(p.rows(), p.cols()))
                .collect(),
            learning_rate,
            epsilon,
        })
    }

    pub fn accumulators(&self) -> &[Tensor2] {
        &self.accumulators
    }

    pub fn accumulators_mut(&mut self) -> &mut [Tensor2] {
        &mut self.accumulators
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    /// Apply one update in place.
    pub fn step(&mut self, params: &mut [&mut Tensor2], grads: &[Tensor2]) -> Result<()> {
        if params.len() != self.accumulators.len() || grads.len() != self.accumulators.len() {
            return Err(Error::Shape(format!(
                "adagrad: {} params, {} grads, {} accumulators",
                params.len(),
                grads.len(),
                self.accumulators.len()
            )));
        }
        for ((p, g), acc) in params.iter().zip(grads).zip(&self.accumulators) {
            p.check_same_shape(g)?;
            p.check_same_shape(acc)?;
            if !g.is_finite() {
                return Err(Error::NonFinite("gradient".into()));
            }
        }
        for ((p, g), acc) in params.iter_mut().zip(grads).zip(&mut self.accumulators) {
            let pd = p.data_mut();
            let ad = acc.data_mut();
            for ((theta, gi), a) in pd.iter_mut().zip(g.data()).zip(ad.iter_mut()) {
                if *gi == 0.0 {
                    continue;
                }
                *a += gi * gi;
                *theta -= self.learning_rate * gi / (a.sqrt() + self.epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Tensor2 {
        Tensor2::from_vec(1, 1, vec![v]).unwrap()
    }

    #[test]
    fn hand_evaluated_two_steps() {
        let mut theta = scalar(0.0);
        let mut opt = AdaGrad::new(&[&theta], 0.1, 0.0).unwrap();
        opt.step(&mut [&mut theta], &[scalar(1.0)]).unwrap();
        assert_eq!(theta.get(0, 0), -0.1);
        assert_eq!(opt.accumulators()[0].get(0, 0), 1.0);
        let before = theta.get(0, 0);
        opt.step(&mut [&mut theta], &[scalar(1.0)]).unwrap();
        let delta = theta.get(0, 0) - before;
        assert!((delta - (-0.1 / 2f64.sqrt())).abs() < 1e-15);
        assert!((delta + 0.070711).abs() < 1e-6);
    }

    #[test]
    fn zero_gradient_is_identity() {
        let mut theta = Tensor2::from_vec(1, 3, vec![0.3, -0.2, 0.9]).unwrap();
        let mut opt = AdaGrad::new(&[&theta], 0.1, DEFAULT_EPSILON).unwrap();
        opt.accumulators_mut()[0].data_mut()[1] = 4.0;
        let before = theta.clone();
        opt.step(&mut [&mut theta], &[Tensor2::zeros(1, 3)])
            .unwrap();
        assert_eq!(theta, before);
        assert_eq!(opt.accumulators()[0].data(), &[0.0, 4.0, 0.0]);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut theta = Tensor2::zeros(2, 2);
        let mut opt = AdaGrad::new(&[&theta], 0.1, DEFAULT_EPSILON).unwrap();
        assert!(opt
            .step(&mut [&mut theta], &[Tensor2::zeros(2, 3)])
            .is_err());
        assert!(opt.step(&mut [&mut theta], &[]).is_err());
    }
}
