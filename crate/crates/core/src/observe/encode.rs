use crate::gridworld::{FeatureKind, Offset};

/// Encoded value of each coordinate of a missing-object row.
pub const SENTINEL_VALUE: f64 = 2.0;

/// One-hot over the five features per cell; pad cells (`None`) are all zeros.
pub fn one_hot<I>(cells: I, out: &mut Vec<f64>)
where
    I: IntoIterator<Item = Option<FeatureKind>>,
{
    for cell in cells {
        let start = out.len();
        out.resize(start + FeatureKind::COUNT, 0.0);
        if let Some(kind) = cell {
            out[start + kind.index()] = 1.0;
        }
    }
}

/// Offsets scaled by `(1 / height, 1 / width)`; the sentinel row maps to
/// `SENTINEL_VALUE` in both coordinates.
pub fn scaled_offsets(offsets: &[Offset], height: usize, width: usize, out: &mut Vec<f64>) {
    let sentinel = (height as isize, width as isize);
    for &o in offsets {
        if o == sentinel {
            out.extend_from_slice(&[SENTINEL_VALUE, SENTINEL_VALUE]);
        } else {
            out.push(o.0 as f64 / height as f64);
            out.push(o.1 as f64 / width as f64);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pad_is_zero() {
        let mut v = Vec::new();
        one_hot([Some(FeatureKind::Goal), None], &mut v);
        assert_eq!(v, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn offsets_scale() {
        let mut v = Vec::new();
        scaled_offsets(&[(0, 1), (-6, 8), (7, 9)], 7, 9, &mut v);
        assert_eq!(v[0..2], [0.0, 1.0 / 9.0]);
        assert!(v[2..4].iter().all(|x| x.abs() <= 1.0));
        assert_eq!(v[4..6], [SENTINEL_VALUE, SENTINEL_VALUE]);
    }
}
