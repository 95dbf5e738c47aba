//! Index-combination enumeration used by the support search.
//!
//! The separator walks every subset of column indices up to a size cap, so
//! the enumerator must be allocation-free in the loop. `Combinations` is the
//! usual lexicographic odometer over `k`-subsets of `0..n`.

/// Binomial coefficient as f64, saturating instead of overflowing; good
/// enough for budget checks.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0_f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
        if !acc.is_finite() {
            return f64::MAX;
        }
    }
    acc
}

/// Number of subsets of `0..n` with size at most `cap`.
pub fn subsets_up_to(n: usize, cap: usize) -> f64 {
    (0..=cap.min(n)).map(|s| binomial(n, s)).sum()
}

/// Lexicographic enumerator of all `k`-subsets of `0..n`.
///
/// `next` advances in place and returns `false` once exhausted; the current
/// subset is exposed as a slice. Size 0 yields exactly one empty subset.
pub struct Combinations {
    n: usize,
    idx: Vec<usize>,
    started: bool,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            idx: (0..k).collect(),
            started: false,
            done: k > n,
        }
    }

    pub fn current(&self) -> &[usize] {
        &self.idx
    }

    pub fn next(&mut self) -> bool {
        if self.done {
            return false;
        }
        if !self.started {
            self.started = true;
            return true;
        }
        let k = self.idx.len();
        if k == 0 {
            self.done = true;
            return false;
        }
        // Find the rightmost index that can still move right.
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return true;
            }
        }
        self.done = true;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut c = Combinations::new(n, k);
        let mut out = Vec::new();
        while c.next() {
            out.push(c.current().to_vec());
        }
        out
    }

    #[test]
    fn enumerates_all_subsets_in_lex_order() {
        let got = collect(4, 2);
        assert_eq!(
            got,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(collect(5, 0), vec![Vec::<usize>::new()]);
        assert_eq!(collect(3, 4), Vec::<Vec<usize>>::new());
        assert_eq!(collect(6, 3).len() as f64, binomial(6, 3));
    }

    #[test]
    fn binomial_matches_pascal() {
        for n in 0..20usize {
            for k in 0..=n {
                let direct = binomial(n, k);
                let pascal = if k == 0 || k == n {
                    1.0
                } else {
                    binomial(n - 1, k - 1) + binomial(n - 1, k)
                };
                assert!((direct - pascal).abs() < 1e-6 * pascal.max(1.0));
            }
        }
        assert_eq!(subsets_up_to(14, 3), 1.0 + 14.0 + 91.0 + 364.0);
    }
}
