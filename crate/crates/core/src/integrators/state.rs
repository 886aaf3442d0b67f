use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

/// Named partition of a state vector into contiguous blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    blocks: Vec<Block>,
    len: usize,
}

impl Layout {
    /// Blocks laid out back to back in the given order.
    pub fn contiguous(blocks: &[(&str, usize)]) -> Result<Arc<Self>> {
        let mut offset = 0;
        let blocks = blocks
            .iter()
            .map(|&(name, len)| {
                let b = Block {
                    name: name.to_string(),
                    offset,
                    len,
                };
                offset += len;
                b
            })
            .collect();
        Self::new(blocks)
    }

    /// Validates that the blocks are non-empty, disjoint and cover `0..len`.
    pub fn new(mut blocks: Vec<Block>) -> Result<Arc<Self>> {
        if blocks.is_empty() {
            return Err(Error::LayoutMismatch("layout without blocks".into()));
        }
        let mut sorted: Vec<&Block> = blocks.iter().collect();
        sorted.sort_by_key(|b| b.offset);
        let mut next = 0;
        for b in sorted {
            if b.len == 0 {
                return Err(Error::LayoutMismatch(format!("block {} is empty", b.name)));
            }
            if b.offset != next {
                return Err(Error::LayoutMismatch(format!(
                    "block {} starts at {} but {} expected (gap or overlap)",
                    b.name, b.offset, next
                )));
            }
            next += b.len;
        }
        blocks.sort_by_key(|b| b.offset);
        Ok(Arc::new(Self { blocks, len: next }))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name == name)
    }
}

/// All unknowns of one problem at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    values: Vec<f64>,
    time: f64,
    layout: Arc<Layout>,
}

impl State {
    pub fn new(values: Vec<f64>, time: f64, layout: Arc<Layout>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::LayoutMismatch(format!(
                "{} values for a layout of length {}",
                values.len(),
                layout.len()
            )));
        }
        if !time.is_finite() {
            return Err(Error::InvalidSettings(format!("state time {time}")));
        }
        Ok(Self {
            values,
            time,
            layout,
        })
    }

    /// Single-block state, handy for scalar problems.
    pub fn scalar_block(name: &str, values: Vec<f64>, time: f64) -> Result<Self> {
        let layout = Layout::contiguous(&[(name, values.len())])?;
        Self::new(values, time, layout)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn block(&self, name: &str) -> Option<&[f64]> {
        self.layout
            .block(name)
            .map(|b| &self.values[b.offset..b.offset + b.len])
    }

    /// Same layout, new values and time.
    pub fn with_values(&self, values: Vec<f64>, time: f64) -> Result<Self> {
        Self::new(values, time, Arc::clone(&self.layout))
    }

    pub(crate) fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    pub fn same_layout(&self, other: &State) -> bool {
        Arc::ptr_eq(&self.layout, &other.layout) || self.layout == other.layout
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contiguous_layout_covers_values() {
        let l = Layout::contiguous(&[("v", 3), ("u", 1), ("w", 1)]).unwrap();
        assert_eq!(l.len(), 5);
        assert_eq!(l.block("u").unwrap().offset, 3);
        let s = State::new(vec![1.0, 2.0, 3.0, 4.0, 5.0], 0.0, l).unwrap();
        assert_eq!(s.block("w").unwrap(), &[5.0]);
    }

    #[test]
    fn overlapping_or_gapped_blocks_rejected() {
        let b = |name: &str, offset, len| Block {
            name: name.into(),
            offset,
            len,
        };
        assert!(Layout::new(vec![b("a", 0, 2), b("b", 1, 2)]).is_err());
        assert!(Layout::new(vec![b("a", 0, 2), b("b", 3, 2)]).is_err());
        assert!(Layout::new(vec![b("a", 0, 0)]).is_err());
        assert!(Layout::new(vec![b("b", 2, 1), b("a", 0, 2)]).is_ok());
    }

    #[test]
    fn state_checks_length_and_time() {
        let l = Layout::contiguous(&[("y", 2)]).unwrap();
        assert!(State::new(vec![1.0], 0.0, l.clone()).is_err());
        assert!(State::new(vec![1.0, 2.0], f64::NAN, l).is_err());
    }
}
