//! Literal evaluation of WCM: minimum paired cost over every permutation.
//! Exponential; only meant to cross-check the sorted-matching route.

use super::{MetricKind, MetricValue, ResponseProfile};
use crate::error::{Error, Result};

pub const MAX_ORACLE_N: usize = 8;

pub fn wcm_bruteforce_oracle(profile: &ResponseProfile) -> Result<MetricValue> {
    let n = profile.len();
    if n > MAX_ORACLE_N {
        return Err(Error::TooLargeForOracle {
            n,
            max: MAX_ORACLE_N,
        });
    }
    let original = profile.original();
    let perturbed = profile.perturbed();
    let cost = |perm: &[usize]| -> f64 {
        perm.iter()
            .enumerate()
            .map(|(i, &j)| (perturbed[j] - original[i]).powi(2))
            .sum()
    };

    let identity: Vec<usize> = (0..n).collect();
    let paired = cost(&identity);
    if paired == 0.0 {
        return Ok(MetricValue {
            kind: MetricKind::Wcm,
            value: 0.0,
            degenerate: true,
        });
    }

    // Heap's algorithm, iterative form.
    let mut perm = identity;
    let mut best = paired;
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(cost(&perm));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }

    Ok(MetricValue {
        kind: MetricKind::Wcm,
        value: (1.0 - (best / paired).sqrt()).clamp(0.0, 1.0),
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_examples() {
        let p = ResponseProfile::from_scores(vec![0.0, 1.0, 2.0], vec![2.1, 1.1, 0.1]).unwrap();
        let v = wcm_bruteforce_oracle(&p).unwrap();
        assert!((v.value - (1.0 - (0.03f64 / 8.03).sqrt())).abs() < 1e-12);

        let p = ResponseProfile::from_scores(vec![1.0, 2.0], vec![1.0, 2.0]).unwrap();
        let v = wcm_bruteforce_oracle(&p).unwrap();
        assert!(v.degenerate && v.value == 0.0);

        let p = ResponseProfile::from_scores(vec![1.0], vec![4.0]).unwrap();
        let v = wcm_bruteforce_oracle(&p).unwrap();
        assert!(!v.degenerate && v.value == 0.0);
    }

    #[test]
    fn oracle_refuses_large_profiles() {
        let p = ResponseProfile::from_scores(vec![0.0; 9], vec![1.0; 9]).unwrap();
        assert!(matches!(
            wcm_bruteforce_oracle(&p),
            Err(Error::TooLargeForOracle { n: 9, .. })
        ));
    }
}
