use super::SimilarityError;
use crate::feature_store::FeatureMap;

/// Cosine similarity `u·v / (‖u‖‖v‖)`, accumulated in `f64`. A zero-norm
/// argument gives 0.
pub fn cosine(u: &[f32], v: &[f32]) -> Result<f64, SimilarityError> {
    if u.len() != v.len() {
        return Err(SimilarityError::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(cosine_unchecked(u, v))
}

pub(crate) fn cosine_unchecked(u: &[f32], v: &[f32]) -> f64 {
    let (mut dot, mut nu, mut nv) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in u.iter().zip(v) {
        let (x, y) = (x as f64, y as f64);
        dot += x * y;
        nu += x * x;
        nv += y * y;
    }
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    dot / (nu.sqrt() * nv.sqrt())
}

/// Mean position-wise cosine between two maps of identical shape.
pub fn s_features(a: &FeatureMap, b: &FeatureMap) -> Result<f64, SimilarityError> {
    let shape = |m: &FeatureMap| (m.height(), m.width(), m.channels());
    if shape(a) != shape(b) {
        return Err(SimilarityError::ShapeMismatch {
            left: shape(a),
            right: shape(b),
        });
    }
    let total: f64 = a
        .descriptors()
        .zip(b.descriptors())
        .map(|(u, v)| cosine_unchecked(u, v))
        .sum();
    Ok(total / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_orthogonal() {
        let u = [0.3f32, -1.2, 4.0];
        assert!((cosine(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed() {
        // 32 / (sqrt(14) * sqrt(77))
        let expected = 32.0 / (14f64.sqrt() * 77f64.sqrt());
        let got = cosine(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.974_631_846_197_076_2).abs() < 1e-12);
    }

    #[test]
    fn zero_vector_and_mismatch() {
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(matches!(
            cosine(&[1.0], &[1.0, 2.0]),
            Err(SimilarityError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn positive_scale_invariance() {
        let u = [0.3f32, -1.2, 4.0, 0.5];
        let v = [1.0f32, 0.25, -2.0, 3.0];
        let scaled: Vec<f32> = u.iter().map(|x| x * 7.5).collect();
        let diff = cosine(&scaled, &v).unwrap() - cosine(&u, &v).unwrap();
        assert!(diff.abs() < 1e-6);
    }

    #[test]
    fn s_features_identity_and_orthogonal() {
        let f =
            FeatureMap::from_fn(3, 3, 4, |r, c| vec![r as f32 + 1.0, c as f32, 0.5, -1.0]).unwrap();
        assert!((s_features(&f, &f).unwrap() - 1.0).abs() < 1e-6);

        let x = FeatureMap::from_fn(2, 2, 2, |_, _| vec![1.0, 0.0]).unwrap();
        let y = FeatureMap::from_fn(2, 2, 2, |_, _| vec![0.0, 3.0]).unwrap();
        assert_eq!(s_features(&x, &y).unwrap(), 0.0);
    }

    #[test]
    fn s_features_shape_mismatch() {
        let x = FeatureMap::zeros(2, 2, 2).unwrap();
        let y = FeatureMap::zeros(3, 3, 2).unwrap();
        assert!(matches!(
            s_features(&x, &y),
            Err(SimilarityError::ShapeMismatch { .. })
        ));
    }
}
