use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, Real};
use crate::spacetime::Grid;

/// A real function sampled on the interior nodes of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    pub values: Vec<T>,
}

impl<T: Real> Field<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![T::zero(); n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn check_on(&self, grid: &Grid<T>) -> Result<()> {
        if self.values.len() != grid.len() {
            return Err(Error::GridMismatch { left: self.values.len(), right: grid.len() });
        }
        Ok(())
    }
}

/// `Σ wᵢ F1ᵢ F2ᵢ` with pairwise summation.
pub fn l2_inner<T: Real>(f1: &Field<T>, f2: &Field<T>, grid: &Grid<T>) -> Result<T> {
    f1.check_on(grid)?;
    f2.check_on(grid)?;
    let w = grid.weights();
    Ok(pairwise_sum(w.len(), |i| w[i] * f1.values[i] * f2.values[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::{grid_build, SpacetimeSpec};

    #[test]
    fn inner_with_zero_and_mismatch() {
        let spec = SpacetimeSpec::<f64>::flat_circle(-1.0, 1.0, 4.0).unwrap();
        let g = grid_build(&spec, 8, 8).unwrap();
        let f = Field::new((0..g.len()).map(|i| i as f64).collect());
        assert_eq!(l2_inner(&f, &Field::zeros(g.len()), &g).unwrap(), 0.0);
        let one = Field::new(vec![1.0; g.len()]);
        assert!((l2_inner(&one, &one, &g).unwrap() - 8.0).abs() < 1e-12);
        assert!(matches!(l2_inner(&f, &Field::zeros(3), &g), Err(Error::GridMismatch { .. })));
    }
}
