//! The 29-attribute candidate pool evaluated on one interval of one channel:
//! seven summary statistics followed by the 22 catch22 features.

use std::cell::OnceCell;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod catch22;
mod spline;
pub mod summary;

pub use catch22::{Acf, CATCH22_NAMES};

pub const N_SUMMARY: usize = 7;
pub const N_ATTRIBUTES: usize = N_SUMMARY + catch22::N_CATCH22;

pub const SUMMARY_NAMES: [&str; N_SUMMARY] = ["mean", "std", "slope", "median", "iqr", "min", "max"];

/// Index into the candidate pool. `0..7` are summary statistics, `7..29` the
/// catch22 features in their canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct AttributeId(u8);

impl AttributeId {
    pub const MEAN: AttributeId = AttributeId(0);
    pub const STD: AttributeId = AttributeId(1);
    pub const SLOPE: AttributeId = AttributeId(2);
    pub const MEDIAN: AttributeId = AttributeId(3);
    pub const IQR: AttributeId = AttributeId(4);
    pub const MIN: AttributeId = AttributeId(5);
    pub const MAX: AttributeId = AttributeId(6);

    pub fn new(index: usize) -> Result<Self> {
        if index < N_ATTRIBUTES {
            Ok(AttributeId(index as u8))
        } else {
            Err(Error::UnknownAttribute(index))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn name(self) -> &'static str {
        let i = self.index();
        if i < N_SUMMARY {
            SUMMARY_NAMES[i]
        } else {
            CATCH22_NAMES[i - N_SUMMARY]
        }
    }

    pub fn is_summary(self) -> bool {
        self.index() < N_SUMMARY
    }

    pub fn all() -> impl Iterator<Item = AttributeId> {
        (0..N_ATTRIBUTES as u8).map(AttributeId)
    }
}

impl TryFrom<usize> for AttributeId {
    type Error = Error;

    fn try_from(value: usize) -> Result<Self> {
        AttributeId::new(value)
    }
}

impl From<AttributeId> for usize {
    fn from(id: AttributeId) -> usize {
        id.index()
    }
}

impl fmt::Display for AttributeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evaluates attributes on one segment, sharing the sorted copy and the
/// autocorrelation between the attributes that need them.
pub struct Segment<'a> {
    y: &'a [f64],
    mean: OnceCell<f64>,
    sorted: OnceCell<Vec<f64>>,
    acf: OnceCell<Acf>,
}

impl<'a> Segment<'a> {
    pub fn new(y: &'a [f64]) -> Self {
        debug_assert!(!y.is_empty());
        Self {
            y,
            mean: OnceCell::new(),
            sorted: OnceCell::new(),
            acf: OnceCell::new(),
        }
    }

    pub fn values(&self) -> &'a [f64] {
        self.y
    }

    pub(crate) fn mean(&self) -> f64 {
        *self.mean.get_or_init(|| summary::mean(self.y))
    }

    pub(crate) fn sorted(&self) -> &[f64] {
        self.sorted.get_or_init(|| {
            let mut s = self.y.to_vec();
            s.sort_by(f64::total_cmp);
            s
        })
    }

    pub(crate) fn acf(&self) -> &Acf {
        self.acf.get_or_init(|| Acf::new(self.y))
    }

    /// Value of `id`; catch22 results that are not finite become 0.
    pub fn value(&self, id: AttributeId) -> f64 {
        match id.index() {
            0 => self.mean(),
            1 => summary::std_with_mean(self.y, self.mean()),
            2 => summary::slope(self.y),
            3 => summary::quantile_sorted(self.sorted(), 0.5),
            4 => {
                let s = self.sorted();
                summary::quantile_sorted(s, 0.75) - summary::quantile_sorted(s, 0.25)
            }
            5 => self.sorted()[0],
            6 => self.sorted()[self.y.len() - 1],
            i => {
                let v = catch22::evaluate(self, i - N_SUMMARY);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            }
        }
    }
}

/// Single-attribute entry point. Rejects empty segments.
pub fn eval_attribute(segment: &[f64], id: AttributeId) -> Result<f64> {
    if segment.is_empty() {
        return Err(Error::invalid("attribute of an empty segment"));
    }
    Ok(Segment::new(segment).value(id))
}

/// Like [`eval_attribute`] with a raw index, as found in serialized models.
pub fn eval_attribute_index(segment: &[f64], index: usize) -> Result<f64> {
    eval_attribute(segment, AttributeId::new(index)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispatch_covers_pool() {
        assert_eq!(N_ATTRIBUTES, 29);
        assert_eq!(AttributeId::all().count(), 29);
        assert!(AttributeId::new(29).is_err());
        assert!(eval_attribute_index(&[1.0, 2.0, 3.0], 29).is_err());
        assert_eq!(AttributeId::new(7).unwrap().name(), "DN_HistogramMode_5");
        assert_eq!(AttributeId::new(28).unwrap().name(), "FC_LocalSimple_mean3_stderr");
    }

    #[test]
    fn summary_dispatch() {
        let y = [1.0, 2.0, 3.0];
        assert_eq!(eval_attribute(&y, AttributeId::MEAN).unwrap(), 2.0);
        assert_eq!(eval_attribute(&y, AttributeId::MAX).unwrap(), 3.0);
        assert!(eval_attribute(&[], AttributeId::MEAN).is_err());
    }

    #[test]
    fn degenerate_catch22_maps_to_zero() {
        let c = [0.7; 8];
        let last = AttributeId::new(28).unwrap();
        assert_eq!(eval_attribute(&c, last).unwrap(), 0.0);
        for id in AttributeId::all() {
            assert!(eval_attribute(&c, id).unwrap().is_finite(), "{id}");
        }
    }

    #[test]
    fn histogram_mode_of_constant() {
        let c = [2.5; 6];
        assert_eq!(eval_attribute(&c, AttributeId::new(7).unwrap()).unwrap(), 2.5);
        assert_eq!(eval_attribute(&c, AttributeId::new(8).unwrap()).unwrap(), 2.5);
    }

    #[test]
    fn serde_roundtrip_rejects_out_of_range() {
        let id: AttributeId = serde_json::from_str("12").unwrap();
        assert_eq!(id.index(), 12);
        assert!(serde_json::from_str::<AttributeId>("40").is_err());
    }
}
