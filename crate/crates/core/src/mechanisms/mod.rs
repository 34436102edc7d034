//! Random serial dictatorship and probabilistic serial.

mod ps;
mod rsd;

pub use ps::{is_envy_free, probabilistic_serial};
pub use rsd::{
    rsd_exact, rsd_exact_lottery, rsd_exact_lottery_with_limit, rsd_exact_with_limit, rsd_sampled,
    sample_sd_lottery, RsdEstimate, SdLottery, RSD_EXACT_LIMIT, RSD_SHARDS,
};
