//! QUBO to MAX-E2-LIN2 reduction.

use super::PolyCost;
use crate::error::{Error, Result};

/// Multiply every degree-1 term by a fresh variable `z_0`.
///
/// The output lives on `n + 1` variables: the new variable takes index 0
/// and original variable `i` becomes `i + 1`. Every output term has degree 2,
/// so the output is invariant under a global flip and its spectrum is the
/// input spectrum with every multiplicity doubled. Term order is preserved.
pub fn qubo_to_e2lin2(cost: &PolyCost) -> Result<PolyCost> {
    if cost.n() + 1 > 63 {
        return Err(Error::Unsupported("reduction needs n + 1 <= 63".into()));
    }
    let terms = cost
        .terms()
        .iter()
        .map(|t| match t.vars() {
            [i] => Ok((vec![0, i + 1], t.coef())),
            [i, j] => Ok((vec![i + 1, j + 1], t.coef())),
            vars => Err(Error::Unsupported(format!("QUBO reduction got a degree-{} term", vars.len()))),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = PolyCost::new(cost.n() + 1, terms)?;
    out.provenance = cost.provenance.clone();
    out.provenance.ensemble = format!("{}+e2lin2-reduction", cost.provenance.ensemble);
    Ok(out)
}
