//! Evaluation of generated text against MRs and references.

pub mod discourse;
pub mod entropy;
pub mod overlap;
pub mod ser;
pub mod style;
pub mod templates;
pub mod tokenize;

pub use discourse::{detect_discourse, Discourse, MarkerConfig};
pub use entropy::{entropy, NoTrigrams};
pub use overlap::{bleu, nist, OverlapError};
pub use ser::{average_ser, ser, SerBreakdown, SerError};
pub use style::{style_hits, StyleHitReport};
pub use templates::{delexicalize, template_ranks, Template, TemplateReport};
