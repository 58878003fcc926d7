/// Per-state visit counts for the count-based exploration bonus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VisitCounts {
    counts: Vec<u64>,
}

impl VisitCounts {
    pub fn new(n_states: usize) -> Self {
        Self {
            counts: vec![0; n_states],
        }
    }

    pub fn get(&self, state: usize) -> u64 {
        self.counts[state]
    }
}

/// Returns `β / √(N(next_state) + 1)` using the count before this visit, then
/// records the visit.
pub fn curiosity_bonus(counts: &mut VisitCounts, next_state: usize, beta: f64) -> f64 {
    let n = counts.counts[next_state];
    counts.counts[next_state] = n + 1;
    if beta == 0.0 {
        0.0
    } else {
        beta / ((n + 1) as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_scale_is_zero() {
        let mut c = VisitCounts::new(3);
        for _ in 0..5 {
            assert_eq!(curiosity_bonus(&mut c, 1, 0.0), 0.0);
        }
    }

    #[test]
    fn first_visit_pays_beta() {
        let mut c = VisitCounts::new(3);
        assert_eq!(curiosity_bonus(&mut c, 2, 0.1), 0.1);
        assert_eq!(c.get(2), 1);
    }

    #[test]
    fn trajectory_matches_recomputation() {
        let trajectory = [0, 1, 0, 0, 2, 1, 0];
        let mut c = VisitCounts::new(3);
        let got: Vec<f64> = trajectory.iter().map(|&s| curiosity_bonus(&mut c, s, 0.5)).collect();
        // Hand-computed: visits before each step are 0,0,1,2,0,1,3.
        let expected = [
            0.5,
            0.5,
            0.5 / 2f64.sqrt(),
            0.5 / 3f64.sqrt(),
            0.5,
            0.5 / 2f64.sqrt(),
            0.5 / 2.0,
        ];
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).abs() < 1e-15);
        }
    }
}
