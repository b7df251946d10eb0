//! Canonical text form: `riemannian:[[4,0],[0,1]]`, `euclidean:2`,
//! `quartic`, `quartic-dual`.

use std::fmt;
use std::str::FromStr;

use super::{NormSpec, Repr, SpdMatrix};
use crate::error::Error;

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Riemannian(m) => {
                f.write_str("riemannian:[")?;
                for (i, row) in m.rows().iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    f.write_str("[")?;
                    for (j, x) in row.iter().enumerate() {
                        if j > 0 {
                            f.write_str(",")?;
                        }
                        // Shortest representation that parses back exactly.
                        write!(f, "{x}")?;
                    }
                    f.write_str("]")?;
                }
                f.write_str("]")
            }
            Repr::Euclidean(m) => write!(f, "euclidean:{}", m.dim()),
            Repr::Quartic => f.write_str("quartic"),
            Repr::QuarticDual => f.write_str("quartic-dual"),
        }
    }
}

impl FromStr for NormSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let input = s.trim();
        let fail = |reason: String| Error::ParseNorm {
            input: input.to_string(),
            reason,
        };
        let (head, tail) = match input.split_once(':') {
            Some((h, t)) => (h.trim(), Some(t.trim())),
            None => (input, None),
        };
        match (head, tail) {
            ("quartic", None) => Ok(NormSpec::quartic()),
            ("quartic-dual", None) => Ok(NormSpec::quartic().dual()),
            ("euclidean", Some(dim)) => {
                let dim: usize = dim
                    .parse()
                    .map_err(|_| fail(format!("`{dim}` is not a dimension")))?;
                NormSpec::euclidean(dim)
            }
            ("riemannian", Some(literal)) => {
                let rows: Vec<Vec<f64>> = serde_json::from_str(literal)
                    .map_err(|e| fail(format!("malformed matrix literal: {e}")))?;
                Ok(NormSpec::riemannian(SpdMatrix::from_rows(&rows)?))
            }
            ("euclidean" | "riemannian", None) => {
                Err(fail(format!("`{head}` needs an argument after `:`")))
            }
            ("quartic" | "quartic-dual", Some(_)) => {
                Err(fail(format!("`{head}` takes no argument")))
            }
            _ => Err(fail(
                "expected `riemannian:[[..]]`, `euclidean:N` or `quartic`".to_string(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_documented_forms() {
        let r: NormSpec = "riemannian:[[4,0],[0,1]]".parse().unwrap();
        assert_eq!(r.to_string(), "riemannian:[[4,0],[0,1]]");
        assert_eq!(
            "euclidean:2".parse::<NormSpec>().unwrap(),
            NormSpec::euclidean(2).unwrap()
        );
        assert_eq!("quartic".parse::<NormSpec>().unwrap(), NormSpec::quartic());
        assert_eq!(
            " riemannian: [[2, 0.5], [0.5, 1]] "
                .parse::<NormSpec>()
                .unwrap()
                .dim(),
            2
        );
    }

    #[test]
    fn reports_errors() {
        assert!(matches!(
            "riemannian:[[4,0],[0,1]".parse::<NormSpec>(),
            Err(Error::ParseNorm { .. })
        ));
        assert!(matches!(
            "riemannian:[[1,2],[2,1]]".parse::<NormSpec>(),
            Err(Error::NotPositiveDefinite { minor: 2, .. })
        ));
        assert!(matches!(
            "euclidean:1".parse::<NormSpec>(),
            Err(Error::DimensionTooSmall(1))
        ));
        assert!(matches!(
            "euclidean:x".parse::<NormSpec>(),
            Err(Error::ParseNorm { .. })
        ));
        assert!(matches!(
            "p-norm:3".parse::<NormSpec>(),
            Err(Error::ParseNorm { .. })
        ));
        assert!(matches!(
            "quartic:2".parse::<NormSpec>(),
            Err(Error::ParseNorm { .. })
        ));
    }

    proptest! {
        #[test]
        fn display_round_trips(seed in any::<u64>(), dim in 2usize..5) {
            let mut rng = crate::sampling::seeded_rng(seed, 1);
            let spec = NormSpec::riemannian(SpdMatrix::random(dim, &mut rng).unwrap());
            let back: NormSpec = spec.to_string().parse().unwrap();
            prop_assert_eq!(back, spec);
        }
    }
}
