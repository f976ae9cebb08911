//! Symbolic per-iteration compute and storage cost model for the four
//! algorithm families, evaluated in exact integer arithmetic.

/// Which algorithm's cost expression to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Bfgs,
    Naq,
    Adaqn,
    Asnaq,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Bfgs => "BFGS",
            Algorithm::Naq => "NAQ",
            Algorithm::Adaqn => "adaQN",
            Algorithm::Asnaq => "aSNAQ",
        }
    }
}

/// Inputs to the cost expressions: full-sample count `n`, batch size `b`,
/// parameter count `d`, buffer capacities, aggregation period, and the
/// line-search evaluation count `zeta` (full-batch methods only).
#[derive(Debug, Clone, Copy)]
pub struct CostModelInput {
    pub algorithm: Algorithm,
    pub n: u64,
    pub b: u64,
    pub d: u64,
    pub m_l: u64,
    pub m_f: u64,
    pub l: u64,
    pub zeta: u64,
}

/// Computed per-iteration compute cost and storage cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostReport {
    pub compute: u64,
    pub storage: u64,
}

/// Evaluates the cost expressions exactly:
///
/// * BFGS:  `nd + d^2 + zeta*nd`, storage `d^2`
/// * NAQ:   `2nd + d^2 + zeta*nd`, storage `d^2`
/// * adaQN: `bd + (4 m_L + m_F + 2) d + (b + 4) d / L`, storage `(2 m_L + m_F) d`
/// * aSNAQ: `2bd + (4 m_L + m_F + 3) d + (b + 4) d / L`, storage `(2 m_L + m_F) d`
pub fn cost_model(input: &CostModelInput) -> CostReport {
    let CostModelInput {
        algorithm,
        n,
        b,
        d,
        m_l,
        m_f,
        l,
        zeta,
    } = *input;
    match algorithm {
        Algorithm::Bfgs => CostReport {
            compute: n * d + d * d + zeta * n * d,
            storage: d * d,
        },
        Algorithm::Naq => CostReport {
            compute: 2 * n * d + d * d + zeta * n * d,
            storage: d * d,
        },
        Algorithm::Adaqn => CostReport {
            compute: b * d + (4 * m_l + m_f + 2) * d + (b + 4) * d / l,
            storage: (2 * m_l + m_f) * d,
        },
        Algorithm::Asnaq => CostReport {
            compute: 2 * b * d + (4 * m_l + m_f + 3) * d + (b + 4) * d / l,
            storage: (2 * m_l + m_f) * d,
        },
    }
}
