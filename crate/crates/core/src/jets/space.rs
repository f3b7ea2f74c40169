use std::collections::HashMap;
use std::sync::OnceLock;

/// Highest derivative order carried by a jet.
pub const MAX_ORDER: usize = 3;
/// Largest number of chart variables (2n for n <= 4).
pub const MAX_VARS: usize = 8;

/// Monomial bookkeeping for truncated Taylor polynomials in `nvars` variables.
///
/// Monomials are stored graded by total degree, so the coefficients of an
/// order-k jet are a prefix of those of any higher-order jet.
pub(crate) struct JetSpace {
    pub nvars: usize,
    pub exponents: Vec<Vec<u8>>,
    /// Number of monomials of total degree `<= k`.
    pub len_by_order: [usize; MAX_ORDER + 1],
    /// (lhs, rhs, out) triples with `x^lhs * x^rhs = x^out`, sorted by `out`.
    pub products: Vec<(u16, u16, u16)>,
    pub products_by_order: [usize; MAX_ORDER + 1],
    /// Per variable: (source monomial, target monomial, exponent factor), sorted by source.
    pub derivatives: Vec<Vec<(u16, u16, f64)>>,
    index: HashMap<Vec<u8>, usize>,
}

impl JetSpace {
    fn build(nvars: usize) -> Self {
        let mut exponents: Vec<Vec<u8>> = Vec::new();
        let mut len_by_order = [0usize; MAX_ORDER + 1];
        for degree in 0..=MAX_ORDER {
            let mut current = vec![0u8; nvars];
            push_degree(&mut exponents, &mut current, 0, degree as u8);
            if nvars == 0 {
                // only the constant monomial exists
                exponents.truncate(1);
            }
            len_by_order[degree] = exponents.len();
        }
        let index: HashMap<Vec<u8>, usize> = exponents
            .iter()
            .enumerate()
            .map(|(k, e)| (e.clone(), k))
            .collect();

        let mut products = Vec::new();
        for (k, ek) in exponents.iter().enumerate() {
            for (i, ei) in exponents.iter().enumerate().take(k + 1) {
                if ei.iter().zip(ek).all(|(a, b)| a <= b) {
                    let rest: Vec<u8> = ek.iter().zip(ei).map(|(b, a)| b - a).collect();
                    let j = index[&rest];
                    products.push((i as u16, j as u16, k as u16));
                }
            }
        }
        let mut products_by_order = [0usize; MAX_ORDER + 1];
        for (order, slot) in products_by_order.iter_mut().enumerate() {
            *slot = products
                .iter()
                .take_while(|&&(_, _, k)| (k as usize) < len_by_order[order])
                .count();
        }

        let derivatives = (0..nvars)
            .map(|v| {
                exponents
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e[v] > 0)
                    .map(|(src, e)| {
                        let mut lowered = e.clone();
                        lowered[v] -= 1;
                        (src as u16, index[&lowered] as u16, e[v] as f64)
                    })
                    .collect()
            })
            .collect();

        JetSpace {
            nvars,
            exponents,
            len_by_order,
            products,
            products_by_order,
            derivatives,
            index,
        }
    }

    pub fn len(&self, order: usize) -> usize {
        self.len_by_order[order]
    }

    pub fn monomial(&self, exponents: &[u8]) -> Option<usize> {
        self.index.get(exponents).copied()
    }
}

fn push_degree(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, var: usize, remaining: u8) {
    if var + 1 >= current.len() {
        if let Some(last) = current.last_mut() {
            *last = remaining;
        }
        out.push(current.clone());
        return;
    }
    for take in (0..=remaining).rev() {
        current[var] = take;
        push_degree(out, current, var + 1, remaining - take);
    }
    current[var] = 0;
}

static SPACES: [OnceLock<JetSpace>; MAX_VARS + 1] = [const { OnceLock::new() }; MAX_VARS + 1];

pub(crate) fn space(nvars: usize) -> &'static JetSpace {
    assert!(nvars <= MAX_VARS, "at most {MAX_VARS} jet variables supported");
    SPACES[nvars].get_or_init(|| JetSpace::build(nvars))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn monomial_counts_match_binomials() {
        for nvars in 1..=MAX_VARS {
            let s = space(nvars);
            for order in 0..=MAX_ORDER {
                assert_eq!(s.len(order), binomial(nvars + order, order));
            }
        }
    }

    #[test]
    fn graded_layout() {
        let s = space(3);
        for (k, e) in s.exponents.iter().enumerate() {
            let deg: u8 = e.iter().sum();
            let lo = if deg == 0 { 0 } else { s.len(deg as usize - 1) };
            assert!(k >= lo && k < s.len(deg as usize));
        }
    }

    #[test]
    fn zero_variable_space_is_constant_only() {
        let s = space(0);
        assert_eq!(s.len(MAX_ORDER), 1);
        assert_eq!(s.products, vec![(0, 0, 0)]);
    }
}
