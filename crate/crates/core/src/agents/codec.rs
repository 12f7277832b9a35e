use alloc::vec::Vec;

use crate::{Error, Result};

/// Maps network outputs to signed PRB increments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionCodec {
    deltas: Vec<i32>,
    prb_min: u32,
    prb_max: u32,
}

impl ActionCodec {
    /// `deltas` must be distinct, contain 0 and be symmetric around 0.
    pub fn new(mut deltas: Vec<i32>, prb_min: u32, prb_max: u32) -> Result<Self> {
        deltas.sort_unstable();
        if deltas.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid(
                "agent.actions",
                "increments must be distinct",
            ));
        }
        if !deltas.contains(&0) {
            return Err(Error::invalid("agent.actions", "must contain 0"));
        }
        if deltas.iter().any(|d| deltas.binary_search(&-d).is_err()) {
            return Err(Error::invalid(
                "agent.actions",
                "must be symmetric around 0",
            ));
        }
        if prb_min > prb_max {
            return Err(Error::invalid("env.prb_min", "must not exceed env.prb_max"));
        }
        Ok(ActionCodec {
            deltas,
            prb_min,
            prb_max,
        })
    }

    /// `{0, +-1, +-2, ..., +-2^(j-1)}`: `2j + 1` actions.
    pub fn powers_of_two(j: u32, prb_min: u32, prb_max: u32) -> Result<Self> {
        let mut d = alloc::vec![0];
        for k in 0..j {
            d.push(1 << k);
            d.push(-(1 << k));
        }
        Self::new(d, prb_min, prb_max)
    }

    /// The 11-action default, `j = 5`.
    pub fn standard(prb_min: u32, prb_max: u32) -> Self {
        Self::powers_of_two(5, prb_min, prb_max).expect("static action set is valid")
    }

    /// Resource-block-group steps `{-9, -6, -3, 0, 3, 6, 9}`.
    pub fn rbg(prb_min: u32, prb_max: u32) -> Self {
        Self::new(alloc::vec![-9, -6, -3, 0, 3, 6, 9], prb_min, prb_max)
            .expect("static action set is valid")
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    pub fn deltas(&self) -> &[i32] {
        &self.deltas
    }

    pub fn bounds(&self) -> (u32, u32) {
        (self.prb_min, self.prb_max)
    }

    /// Index of the zero increment.
    pub fn hold_index(&self) -> usize {
        self.deltas.binary_search(&0).unwrap_or(0)
    }

    pub fn apply(&self, current_prbs: u32, index: usize) -> Result<u32> {
        let d = *self.deltas.get(index).ok_or(Error::InvalidAction {
            index,
            len: self.deltas.len(),
        })?;
        let next = i64::from(current_prbs) + i64::from(d);
        Ok(next.clamp(i64::from(self.prb_min), i64::from(self.prb_max)) as u32)
    }
}

/// `clamp(current + deltas[index], prb_min, prb_max)`.
pub fn apply_action(codec: &ActionCodec, current_prbs: u32, index: usize) -> Result<u32> {
    codec.apply(current_prbs, index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn examples() {
        let c = ActionCodec::standard(0, 150);
        assert_eq!(c.len(), 11);
        assert_eq!(c.deltas(), &[-16, -8, -4, -2, -1, 0, 1, 2, 4, 8, 16]);
        assert_eq!(apply_action(&c, 55, c.hold_index()).unwrap(), 55);
        let up16 = c.deltas().iter().position(|&d| d == 16).unwrap();
        assert_eq!(apply_action(&c, 149, up16).unwrap(), 150);
        let down4 = c.deltas().iter().position(|&d| d == -4).unwrap();
        assert_eq!(apply_action(&c, 55, down4).unwrap(), 51);
        assert_eq!(apply_action(&c, 2, 0).unwrap(), 0);
        assert!(matches!(
            apply_action(&c, 5, 11),
            Err(Error::InvalidAction { index: 11, len: 11 })
        ));
    }

    #[test]
    fn rejects_bad_sets() {
        assert!(ActionCodec::new(vec![-1, 1], 0, 10).is_err());
        assert!(ActionCodec::new(vec![-1, 0, 2], 0, 10).is_err());
        assert!(ActionCodec::new(vec![0, 0], 0, 10).is_err());
        assert_eq!(ActionCodec::rbg(0, 150).len(), 7);
    }
}
