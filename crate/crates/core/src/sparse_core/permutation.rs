use super::SparseError;

/// A bijection on `0..n`.
///
/// `forward[k]` is the original index placed at position `k`, so applying the
/// permutation to a vector gives `(P x)[k] = x[forward[k]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        let forward: Vec<usize> = (0..n).collect();
        Self {
            inverse: forward.clone(),
            forward,
        }
    }

    pub fn new(forward: Vec<usize>) -> Result<Self, SparseError> {
        let n = forward.len();
        let mut inverse = vec![usize::MAX; n];
        for (k, &i) in forward.iter().enumerate() {
            if i >= n || inverse[i] != usize::MAX {
                return Err(SparseError::InvalidPermutation);
            }
            inverse[i] = k;
        }
        Ok(Self { forward, inverse })
    }

    pub fn reversal(n: usize) -> Self {
        Self::new((0..n).rev().collect()).expect("reversal is a bijection")
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(k, &i)| k == i)
    }

    /// Composition `self ∘ other`: applying the result equals applying `other` then `self`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.len(), other.len());
        let forward = self.forward.iter().map(|&k| other.forward[k]).collect();
        Permutation::new(forward).expect("composition of bijections")
    }

    pub fn inverted(&self) -> Permutation {
        Permutation {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    /// `y[k] = x[forward[k]]`
    pub fn apply<T: Copy>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.len());
        self.forward.iter().map(|&i| x[i]).collect()
    }

    /// `y[forward[k]] = x[k]`, the inverse of [`Permutation::apply`].
    pub fn apply_inverse<T: Copy + Default>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.len());
        let mut y = vec![T::default(); x.len()];
        for (k, &i) in self.forward.iter().enumerate() {
            y[i] = x[k];
        }
        y
    }
}
