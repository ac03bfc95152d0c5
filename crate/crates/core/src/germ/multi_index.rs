use std::cmp::Ordering;
use std::fmt;

/// Exponent (or derivative) tuple `m ∈ ℕ₀ⁿ`.
///
/// Ordering is graded-lexicographic: lower total order first, then larger
/// exponents on earlier variables first (`x1^2 < x1*x2 < x2^2 < x1^3`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The unit index `e_i` (zero-based `i`).
    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|m| = Σ mᵢ`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Componentwise sum, i.e. the exponent of a monomial product.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All indices of dimension `n` with `|m| ≤ max_order`, in graded-lex order.
    pub fn up_to_order(n: usize, max_order: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for k in 0..=max_order {
            out.extend(Self::of_order(n, k));
        }
        out
    }

    /// All indices of dimension `n` with `|m| = k`, in graded-lex order.
    pub fn of_order(n: usize, k: u32) -> Vec<MultiIndex> {
        fn rec(n: usize, pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if pos + 1 == n {
                cur[pos] = left;
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for e in (0..=left).rev() {
                cur[pos] = e;
                rec(n, pos + 1, left - e, cur, out);
            }
            cur[pos] = 0;
        }
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        rec(n, 0, k, &mut vec![0; n], &mut out);
        out
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}
