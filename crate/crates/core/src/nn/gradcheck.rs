use super::params::NamedTensors;
use crate::error::{Error, Result};

/// A scalar objective with an analytic gradient of the same layout as its
/// parameters.
pub trait Objective<P> {
    fn loss(&mut self, params: &P) -> Result<f64>;
    fn loss_and_grad(&mut self, params: &P) -> Result<(f64, P)>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Parameter name, flat component index, analytic and numeric values at
    /// the worst component.
    pub worst: Option<(String, usize, f64, f64)>,
    pub checked: usize,
}

/// One parameter component: analytic and central-difference gradients.
#[derive(Clone, Debug, PartialEq)]
pub struct GradComparison {
    pub name: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

impl GradComparison {
    /// `|a − n| / max(1e-8, |a| + |n|)`.
    pub fn rel_error(&self) -> f64 {
        (self.analytic - self.numeric).abs() / f64::max(1e-8, self.analytic.abs() + self.numeric.abs())
    }
}

/// Central differences `(f(θ+ε) − f(θ−ε)) / 2ε` next to the analytic
/// gradient for every parameter component.
pub fn finite_diff_compare<P, O>(objective: &mut O, params: &P, epsilon: f64) -> Result<Vec<GradComparison>>
where
    P: NamedTensors + Clone,
    O: Objective<P>,
{
    if !(epsilon > 0.0) {
        return Err(Error::Invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let (base, analytic) = objective.loss_and_grad(params)?;
    if !base.is_finite() {
        return Err(Error::NonFinite("loss at base point".into()));
    }
    let analytic: Vec<(String, Vec<f64>)> = analytic
        .named()
        .into_iter()
        .map(|(n, t)| (n, t.data().to_vec()))
        .collect();

    let mut probe = params.clone();
    let mut out = Vec::new();
    for (ti, (name, grad)) in analytic.iter().enumerate() {
        for (j, a) in grad.iter().enumerate() {
            let original = probe.named_mut()[ti].1.data()[j];
            probe.named_mut()[ti].1.data_mut()[j] = original + epsilon;
            let plus = objective.loss(&probe)?;
            probe.named_mut()[ti].1.data_mut()[j] = original - epsilon;
            let minus = objective.loss(&probe)?;
            probe.named_mut()[ti].1.data_mut()[j] = original;
            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::NonFinite(format!("loss near {name}[{j}]")));
            }
            out.push(GradComparison {
                name: name.clone(),
                index: j,
                analytic: *a,
                numeric: (plus - minus) / (2.0 * epsilon),
            });
        }
    }
    Ok(out)
}

/// Maximum of [`GradComparison::rel_error`] over every component.
pub fn finite_diff_check<P, O>(objective: &mut O, params: &P, epsilon: f64) -> Result<GradCheckReport>
where
    P: NamedTensors + Clone,
    O: Objective<P>,
{
    let comparisons = finite_diff_compare(objective, params, epsilon)?;
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: None,
        checked: comparisons.len(),
    };
    for c in comparisons {
        let rel = c.rel_error();
        if report.worst.is_none() || rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst = Some((c.name, c.index, c.analytic, c.numeric));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Tensor;

    #[derive(Clone)]
    struct Theta {
        t: Tensor,
    }
    crate::impl_named_tensors!(Theta { t });

    struct SumOfSquares;
    impl Objective<Theta> for SumOfSquares {
        fn loss(&mut self, p: &Theta) -> Result<f64> {
            Ok(p.t.data().iter().map(|x| x * x).sum())
        }
        fn loss_and_grad(&mut self, p: &Theta) -> Result<(f64, Theta)> {
            let g = Tensor::vector(p.t.data().iter().map(|x| 2.0 * x).collect());
            Ok((self.loss(p)?, Theta { t: g }))
        }
    }

    struct Constant;
    impl Objective<Theta> for Constant {
        fn loss(&mut self, _: &Theta) -> Result<f64> {
            Ok(3.5)
        }
        fn loss_and_grad(&mut self, p: &Theta) -> Result<(f64, Theta)> {
            Ok((3.5, Theta { t: Tensor::zeros_like(&p.t) }))
        }
    }

    struct Wrong;
    impl Objective<Theta> for Wrong {
        fn loss(&mut self, p: &Theta) -> Result<f64> {
            SumOfSquares.loss(p)
        }
        fn loss_and_grad(&mut self, p: &Theta) -> Result<(f64, Theta)> {
            Ok((self.loss(p)?, Theta { t: p.t.clone() }))
        }
    }

    struct Exploding;
    impl Objective<Theta> for Exploding {
        fn loss(&mut self, _: &Theta) -> Result<f64> {
            Ok(f64::NAN)
        }
        fn loss_and_grad(&mut self, p: &Theta) -> Result<(f64, Theta)> {
            Ok((f64::NAN, p.clone()))
        }
    }

    #[test]
    fn quadratic_agrees() {
        let p = Theta { t: Tensor::vector(vec![1.0, 2.0]) };
        let r = finite_diff_check(&mut SumOfSquares, &p, 1e-5).unwrap();
        assert_eq!(r.checked, 2);
        assert!(r.max_rel_error < 1e-9, "{r:?}");
    }

    #[test]
    fn constant_loss_has_zero_error() {
        let p = Theta { t: Tensor::vector(vec![1.0, -4.0, 0.0]) };
        let r = finite_diff_check(&mut Constant, &p, 1e-5).unwrap();
        assert_eq!(r.max_rel_error, 0.0);
    }

    #[test]
    fn wrong_gradient_is_detected() {
        let p = Theta { t: Tensor::vector(vec![1.0, 2.0]) };
        let r = finite_diff_check(&mut Wrong, &p, 1e-5).unwrap();
        assert!((r.max_rel_error - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn non_finite_loss_is_an_error() {
        let p = Theta { t: Tensor::vector(vec![1.0]) };
        assert!(matches!(
            finite_diff_check(&mut Exploding, &p, 1e-5),
            Err(Error::NonFinite(_))
        ));
        assert!(finite_diff_check(&mut SumOfSquares, &p, 0.0).is_err());
    }
}
