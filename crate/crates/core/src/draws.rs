use crate::error::{invalid, Result};

/// Row-major table of `d`-dimensional draws.
#[derive(Debug, Clone, PartialEq)]
pub struct Draws {
    dim: usize,
    data: Vec<f64>,
}

impl Draws {
    pub fn new(dim: usize) -> Self {
        Draws { dim, data: Vec::new() }
    }

    pub fn with_capacity(dim: usize, rows: usize) -> Self {
        Draws {
            dim,
            data: Vec::with_capacity(dim * rows),
        }
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return invalid(format!(
                "flat draw buffer of length {} does not split into rows of dimension {dim}",
                data.len()
            ));
        }
        Ok(Draws { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.dim, "row dimension mismatch");
        self.data.extend_from_slice(row);
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows().map(|r| r[k]).collect()
    }

    pub fn append(&mut self, other: &Draws) {
        assert_eq!(other.dim, self.dim, "draw dimension mismatch");
        self.data.extend_from_slice(&other.data);
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_and_columns() {
        let mut d = Draws::new(2);
        d.push(&[1.0, 2.0]);
        d.push(&[3.0, 4.0]);
        assert_eq!(d.len(), 2);
        assert_eq!(d.row(1), &[3.0, 4.0]);
        assert_eq!(d.column(0), vec![1.0, 3.0]);
        assert!(Draws::from_flat(2, vec![1.0; 3]).is_err());
    }
}
