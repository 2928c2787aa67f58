use std::io::Write;

use super::TrialEnsemble;
use crate::error::Result;

/// Write one CSV row per tuple: space-separated occupations, then `re`, `im`.
///
/// Diagonal ensembles are written as `sqrt(p)` with a zero imaginary part.
pub fn write_dump<W: Write>(state: &TrialEnsemble, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tuple", "re", "im"])?;
    for (i, tup) in state.tuples().iter().enumerate() {
        let a = state.amplitude(i);
        let label = tup
            .as_slice()
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(" ");
        w.write_record([label, a.re.to_string(), a.im.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
