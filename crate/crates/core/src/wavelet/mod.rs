//! Kozyrev wavelets on `Q_p` and `Q_p^3`, the Taibleson–Vladimirov operator,
//! ball-indicator expansions, closed-form Fourier transforms and exact Haar
//! integration of locally constant functions.

mod expansion;
mod fourier;
mod index;
mod lcf;
mod tv;

pub use expansion::{axis_tail_norm_sq, expand_ball_indicator, ExpansionTerm, ExpansionTruncation, IndicatorExpansion};
pub use fourier::{wavelet_fourier, WaveletFourier};
pub use index::{indicator_times_wavelet, IndicatorProduct, WaveletIndex, WaveletIndex1D, WaveletIndex3D};
pub use lcf::{Cell, Integral, IntegrationOptions, LocallyConstantFunction, Partition3, DEFAULT_CELL_CAP};
pub use tv::{tv_oracle, Lcf1D};
