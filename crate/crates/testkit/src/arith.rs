use rand::Rng;

/// A sum of products of natural numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sum {
    pub terms: Vec<Vec<u32>>,
}

impl Sum {
    pub fn value(&self) -> u128 {
        self.terms.iter().map(|t| t.iter().map(|&n| u128::from(n)).product::<u128>()).sum()
    }

    pub fn operand_count(&self) -> usize {
        self.terms.iter().map(Vec::len).sum()
    }
}

impl std::fmt::Display for Sum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let terms: Vec<String> =
            self.terms.iter().map(|t| t.iter().map(u32::to_string).collect::<Vec<_>>().join("*")).collect();
        f.write_str(&terms.join("+"))
    }
}

/// Up to `max_terms` summands of up to four factors below 100.
pub fn random_sum(rng: &mut impl Rng, max_terms: usize) -> Sum {
    let terms = (0..rng.gen_range(1..=max_terms.max(1)))
        .map(|_| (0..rng.gen_range(1..=4)).map(|_| rng.gen_range(0..100)).collect())
        .collect();
    Sum { terms }
}

/// Lexemes of one random token, valid or not in context.
pub fn random_lexeme(rng: &mut impl Rng) -> String {
    match rng.gen_range(0..4) {
        0 => "+".to_string(),
        1 => "*".to_string(),
        _ => rng.gen_range(0..100).to_string(),
    }
}
