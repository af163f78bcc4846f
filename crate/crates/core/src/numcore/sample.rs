use rand::Rng;

/// Draws an index from a probability vector by inverse CDF on one uniform draw.
pub fn sample_categorical<R: Rng + ?Sized>(probs: &[f32], rng: &mut R) -> usize {
    let u: f32 = rng.gen();
    let mut cum = 0.0f32;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            cum += p;
            last_positive = i;
            if u < cum {
                return i;
            }
        }
    }
    // Rounding can leave the cumulative sum a hair below one.
    last_positive
}
