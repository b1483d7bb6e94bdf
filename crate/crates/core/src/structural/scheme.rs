use serde::Serialize;

use super::OffsetPair;

/// One stage of the solution scheme.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stage {
    pub k: i64,
    /// `(i, c_i + k)`: solve `f_i^(c_i + k) = 0`.
    pub equations: Vec<(usize, i64)>,
    /// `(j, d_j + k)`: for `x_j^(d_j + k)`.
    pub unknowns: Vec<(usize, i64)>,
    /// `(j, m)`: `x_j` through order `m` is known from earlier stages.
    pub knowns: Vec<(usize, i64)>,
}

impl Stage {
    fn at(pair: &OffsetPair, k: i64) -> Stage {
        let equations = pair
            .c
            .iter()
            .enumerate()
            .filter(|(_, &c)| c + k >= 0)
            .map(|(i, &c)| (i, c + k))
            .collect();
        let unknowns = pair
            .d
            .iter()
            .enumerate()
            .filter(|(_, &d)| d + k >= 0)
            .map(|(j, &d)| (j, d + k))
            .collect();
        let knowns = pair
            .d
            .iter()
            .enumerate()
            .filter(|(_, &d)| d + k >= 1)
            .map(|(j, &d)| (j, d + k - 1))
            .collect();
        Stage {
            k,
            equations,
            unknowns,
            knowns,
        }
    }

    /// Equation indices of this stage.
    pub fn rows(&self) -> Vec<usize> {
        self.equations.iter().map(|&(i, _)| i).collect()
    }

    /// Variable indices of this stage.
    pub fn cols(&self) -> Vec<usize> {
        self.unknowns.iter().map(|&(j, _)| j).collect()
    }
}

/// Stages `k_d .. -1` that involve at least one equation, followed by the
/// generic stage for all `k >= 0` (stored at `k = 0`; orders grow with
/// `k`). Stages with no equation only fix initial values and are omitted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolutionScheme {
    pub k_d: i64,
    pub stages: Vec<Stage>,
    pub generic: Stage,
}

/// Builds the stage list for a valid offset pair, with `k_d = -max_j d_j`.
pub fn solution_scheme(pair: &OffsetPair) -> SolutionScheme {
    let k_d = -pair.d.iter().copied().max().unwrap_or(0);
    let stages = (k_d..0)
        .map(|k| Stage::at(pair, k))
        .filter(|s| !s.equations.is_empty())
        .collect();
    SolutionScheme {
        k_d,
        stages,
        generic: Stage::at(pair, 0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(c: &[i64], d: &[i64]) -> OffsetPair {
        OffsetPair {
            c: c.to_vec(),
            d: d.to_vec(),
            canonical: true,
        }
    }

    #[test]
    fn pendulum_scheme() {
        let s = solution_scheme(&pair(&[0, 0, 2], &[2, 2, 0]));
        assert_eq!(s.k_d, -2);
        assert_eq!(s.stages.len(), 2);
        assert_eq!(s.stages[0].equations, vec![(2, 0)]);
        assert_eq!(s.stages[0].unknowns, vec![(0, 0), (1, 0)]);
        assert_eq!(s.stages[1].equations, vec![(2, 1)]);
        assert_eq!(s.stages[1].unknowns, vec![(0, 1), (1, 1)]);
        assert_eq!(s.stages[1].knowns, vec![(0, 0), (1, 0)]);
        assert_eq!(s.generic.equations, vec![(0, 0), (1, 0), (2, 2)]);
        assert_eq!(s.generic.unknowns, vec![(0, 2), (1, 2), (2, 0)]);
    }

    #[test]
    fn ode_has_only_generic_stage() {
        let s = solution_scheme(&pair(&[0], &[1]));
        assert!(s.stages.is_empty());
        assert_eq!(s.generic.equations, vec![(0, 0)]);
    }

    #[test]
    fn converted_es_example() {
        let s = solution_scheme(&pair(&[0, 1, 0], &[0, 1, 1]));
        assert_eq!(s.stages.len(), 1);
        assert_eq!(s.stages[0].k, -1);
        assert_eq!(s.stages[0].rows(), vec![1]);
        assert_eq!(s.stages[0].cols(), vec![1, 2]);
    }
}
