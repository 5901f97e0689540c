//! Rate-law measurement: fitting decay exponents to norm series, checking
//! them against the predicted tables, and the subcritical long-time limit.

mod fit;
mod ksz;
mod verify;

pub use fit::{fit_log_offset, fit_rate, fit_with_log_power, FittedRate, LogOffsetFit};
pub use ksz::{ksz_limit_check, KszCheck, KszSample};
pub use verify::{
    verify_rate, CellConfig, CellStatus, LogVerdict, TGrid, VerificationReport, VerifyTolerances,
    REPORT_CSV_HEADER,
};
