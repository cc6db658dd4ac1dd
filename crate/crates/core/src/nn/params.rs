use super::tensor::Tensor;

/// A fixed, ordered collection of named tensors.
///
/// Parameter sets and their gradients share one type, so the same visitation
/// order lines parameters up with gradients, optimizer moments and checkpoint
/// entries.
pub trait NamedTensors {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a Tensor)>);

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, &'a mut Tensor)>);

    fn named(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        self.collect("", &mut out);
        out
    }

    fn named_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut out = Vec::new();
        self.collect_mut("", &mut out);
        out
    }

    fn num_scalars(&self) -> usize {
        self.named().iter().map(|(_, t)| t.len()).sum()
    }

    /// Overwrite every tensor with zeros.
    fn zero(&mut self) {
        for (_, t) in self.named_mut() {
            t.fill(0.0);
        }
    }
}

#[doc(hidden)]
pub fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

/// Implements [`NamedTensors`] for a struct whose fields are all tensors or
/// nested [`NamedTensors`] values.
#[macro_export]
#[doc(hidden)]
macro_rules! impl_named_tensors {
    ($ty:ty { $($field:ident),* $(,)? }) => {
        impl $crate::nn::NamedTensors for $ty {
            fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a $crate::nn::Tensor)>) {
                $( $crate::nn::params::Collect::collect_into(&self.$field, &$crate::nn::params::join(prefix, stringify!($field)), out); )*
            }
            fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, &'a mut $crate::nn::Tensor)>) {
                $( $crate::nn::params::Collect::collect_into_mut(&mut self.$field, &$crate::nn::params::join(prefix, stringify!($field)), out); )*
            }
        }
    };
}

#[doc(hidden)]
pub trait Collect {
    fn collect_into<'a>(&'a self, name: &str, out: &mut Vec<(String, &'a Tensor)>);
    fn collect_into_mut<'a>(&'a mut self, name: &str, out: &mut Vec<(String, &'a mut Tensor)>);
}

impl Collect for Tensor {
    fn collect_into<'a>(&'a self, name: &str, out: &mut Vec<(String, &'a Tensor)>) {
        out.push((name.to_string(), self));
    }
    fn collect_into_mut<'a>(&'a mut self, name: &str, out: &mut Vec<(String, &'a mut Tensor)>) {
        out.push((name.to_string(), self));
    }
}

impl<T: NamedTensors> Collect for T {
    fn collect_into<'a>(&'a self, name: &str, out: &mut Vec<(String, &'a Tensor)>) {
        self.collect(name, out);
    }
    fn collect_into_mut<'a>(&'a mut self, name: &str, out: &mut Vec<(String, &'a mut Tensor)>) {
        self.collect_mut(name, out);
    }
}

impl<T: NamedTensors> NamedTensors for Option<T> {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a Tensor)>) {
        if let Some(inner) = self {
            inner.collect(prefix, out);
        }
    }
    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, &'a mut Tensor)>) {
        if let Some(inner) = self {
            inner.collect_mut(prefix, out);
        }
    }
}
