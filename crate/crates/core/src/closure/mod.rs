mod canonical;
mod family;
mod fingerprint;
mod oracle;

pub use canonical::{canonicalize, verify_presentation, CanonicalPresentation};
pub use family::{def_family, seeds, DefFamily};
pub use fingerprint::{compare_families, decide_equivalence, fingerprint, Equivalence, Fingerprint};
pub use oracle::{oracle_close, oracle_def, oracle_seeds, OracleBasis};
