//! Evaluation metrics: readability formulas, SARI / D-SARI, coherence rate,
//! and the results-table layout.

mod readability;
mod report;
mod sari;

pub use readability::{fkgl, fkgl_from_rates, fre, fre_from_rates, ReadabilityStats};
pub use report::{MetricsReport, ReportRow, REPORT_COLUMNS};
pub use sari::{
    d_sari, d_sari_tokens, sari, sari_components, sari_tokens, DocumentPenalties, SariComponents,
    MAX_ORDER,
};

use crate::coherence::{predict_coherence, CoherenceModel};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::textproc::Document;

/// Fraction of documents the coherence model labels coherent.
pub fn coherence_rate<T: Real>(predictions: &[Document], model: &CoherenceModel<T>) -> Result<T> {
    if predictions.is_empty() {
        return Err(Error::NoSamples("no predictions to score for coherence".into()));
    }
    let mut coherent = 0usize;
    for doc in predictions {
        if predict_coherence(model, doc)?.0 == 1 {
            coherent += 1;
        }
    }
    Ok(T::from_count(coherent) / T::from_count(predictions.len()))
}
