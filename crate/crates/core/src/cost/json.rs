//! JSON instance format.
//!
//! ```json
//! {"kind":"poly","n":3,"k":2,"ensemble":"k-spin","seed":1,"index":0,
//!  "terms":[{"vars":[0,1],"coef":0.25,"coef_bits":"3fd0000000000000"}]}
//! {"kind":"csp","n":3,"k":3,"ensemble":"k-cnf","seed":1,"index":0,
//!  "clauses":[{"vars":[0,1,2],"satisfying":[0,1,2,3,4,5,6],
//!              "unsat_value":{"num":7,"den":1}}]}
//! ```
//!
//! `coef_bits` (big-endian hex of the binary64) is authoritative, so
//! Gaussian weights round-trip bit for bit; `coef` is informational.
//! Clause values are implied by the satisfying set; `unsat_value` is written
//! for readability and validated on load.

use serde::{Deserialize, Serialize};

use super::{Clause, CostFunction, CspCost, PolyCost, Provenance};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct TermJson {
    vars: Vec<usize>,
    #[serde(default)]
    coef: Option<f64>,
    #[serde(default)]
    coef_bits: Option<String>,
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct RationalJson {
    num: i64,
    den: i64,
}

#[derive(Serialize, Deserialize)]
struct ClauseJson {
    vars: Vec<usize>,
    satisfying: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    unsat_value: Option<RationalJson>,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    kind: String,
    n: usize,
    k: usize,
    #[serde(default)]
    ensemble: Option<String>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    index: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    terms: Option<Vec<TermJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clauses: Option<Vec<ClauseJson>>,
}

fn encode_f64(v: f64) -> String {
    hex::encode(v.to_bits().to_be_bytes())
}

fn decode_f64(s: &str) -> Result<f64> {
    let bytes =
        hex::decode(s.trim_start_matches("0x")).map_err(|e| Error::Format(format!("bad hex float {s:?}: {e}")))?;
    let arr: [u8; 8] = bytes.try_into().map_err(|_| Error::Format(format!("hex float {s:?} is not 8 bytes")))?;
    Ok(f64::from_bits(u64::from_be_bytes(arr)))
}

/// Serialize an instance.
pub fn to_json(cost: &CostFunction) -> Result<String> {
    let prov = cost.provenance();
    let mut doc = InstanceJson {
        kind: cost.kind().into(),
        n: cost.n(),
        k: cost.k(),
        ensemble: Some(prov.ensemble.clone()),
        seed: prov.seed,
        index: prov.index,
        terms: None,
        clauses: None,
    };
    match cost {
        CostFunction::Poly(p) => {
            doc.terms = Some(
                p.terms()
                    .iter()
                    .map(|t| TermJson {
                        vars: t.vars().to_vec(),
                        coef: Some(t.coef()),
                        coef_bits: Some(encode_f64(t.coef())),
                    })
                    .collect(),
            );
        }
        CostFunction::Csp(c) => {
            doc.clauses = Some(
                c.clauses()
                    .iter()
                    .map(|cl| {
                        let v = cl.unsat_value();
                        ClauseJson {
                            vars: cl.vars().to_vec(),
                            satisfying: cl.satisfying().to_vec(),
                            unsat_value: Some(RationalJson { num: *v.numer(), den: *v.denom() }),
                        }
                    })
                    .collect(),
            );
        }
    }
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Parse an instance written by [`to_json`] (or by hand).
pub fn from_json(text: &str) -> Result<CostFunction> {
    let doc: InstanceJson = serde_json::from_str(text)?;
    let provenance = Provenance {
        ensemble: doc.ensemble.clone().unwrap_or_else(|| "explicit".into()),
        seed: doc.seed,
        index: doc.index,
    };
    let cost: CostFunction = match doc.kind.as_str() {
        "poly" => {
            let terms = doc.terms.ok_or_else(|| Error::Format("poly instance without terms".into()))?;
            let terms = terms
                .into_iter()
                .map(|t| {
                    let coef = match (&t.coef_bits, t.coef) {
                        (Some(bits), _) => decode_f64(bits)?,
                        (None, Some(c)) => c,
                        (None, None) => return Err(Error::Format("term without coefficient".into())),
                    };
                    Ok((t.vars, coef))
                })
                .collect::<Result<Vec<_>>>()?;
            PolyCost::new(doc.n, terms)?.with_provenance(provenance).into()
        }
        "csp" => {
            let clauses = doc.clauses.ok_or_else(|| Error::Format("csp instance without clauses".into()))?;
            let clauses = clauses
                .into_iter()
                .map(|c| {
                    let cl = Clause::new(c.vars, c.satisfying)?;
                    if let Some(v) = c.unsat_value {
                        let want = cl.unsat_value();
                        if num_rational::Ratio::new(v.num, v.den) != want {
                            return Err(Error::Format(format!(
                                "clause unsat_value {}/{} disagrees with its satisfying set ({want})",
                                v.num, v.den
                            )));
                        }
                    }
                    Ok(cl)
                })
                .collect::<Result<Vec<_>>>()?;
            CspCost::new(doc.n, clauses)?.with_provenance(provenance).into()
        }
        other => return Err(Error::Format(format!("unknown instance kind {other:?}"))),
    };
    if cost.k() != doc.k {
        return Err(Error::Format(format!("declared k = {} but instance has locality {}", doc.k, cost.k())));
    }
    Ok(cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{sample_k_spin_indexed, sample_random_kcnf};

    #[test]
    fn gaussian_round_trip_is_bit_exact() {
        let p: CostFunction = sample_k_spin_indexed(7, 3, 99, 4).into();
        let text = to_json(&p).unwrap();
        let back = from_json(&text).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn csp_round_trip() {
        let c: CostFunction = sample_random_kcnf(9, 3, 15, 3).into();
        let back = from_json(&to_json(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn inconsistent_rational_is_rejected() {
        let text =
            r#"{"kind":"csp","n":2,"k":2,"clauses":[{"vars":[0,1],"satisfying":[0],"unsat_value":{"num":1,"den":2}}]}"#;
        assert!(matches!(from_json(text), Err(Error::Format(_))));
    }

    #[test]
    fn hand_written_float_coefficients() {
        let text = r#"{"kind":"poly","n":2,"k":2,"terms":[{"vars":[0,1],"coef":1.5}]}"#;
        let c = from_json(text).unwrap();
        assert_eq!(c.evaluate_index(1), -1.5);
        assert_eq!(c.provenance().ensemble, "explicit");
    }
}
