pub mod gamma;
pub mod meijer;
pub mod wright;

pub use gamma::{log_gamma, pochhammer};
pub use meijer::{
    convolve_exp_power, invert_argument, meijer_g, meijer_g_eval, meijer_mellin_log_moment, meijer_mellin_moment,
    shift_parameters, wright_to_meijer, MeijerGSpec, MeijerValue, WrightAsMeijer, WrightMode,
};
pub use wright::{wright_bessel, WrightParams};
