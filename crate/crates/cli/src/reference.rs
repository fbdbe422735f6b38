//! Published reference values reproduced by `forkjoin-evt table <id>`.
//!
//! All instances use `σ = 1` and `h = 1` unless the table says otherwise.

// Printed table cells, not approximations of named constants.
#![allow(clippy::approx_constant, clippy::too_many_arguments)]

use crate::rate::RateRule;

/// Independent queues: exact optimum against the Gumbel approximation.
#[derive(Debug, Clone, Copy)]
pub struct IndepRow {
    pub n: usize,
    pub i_star: f64,
    pub beta_star: f64,
    pub f_star: f64,
    pub i_hat: f64,
    pub beta_hat: f64,
    pub f_hat: f64,
    /// `(1 − F*/F(Î, β̂))` times the regime's scale.
    pub gap: f64,
}

const fn ir(
    n: usize,
    i_star: f64,
    beta_star: f64,
    f_star: f64,
    i_hat: f64,
    beta_hat: f64,
    f_hat: f64,
    gap: f64,
) -> IndepRow {
    IndepRow {
        n,
        i_star,
        beta_star,
        f_star,
        i_hat,
        beta_hat,
        f_hat,
        gap,
    }
}

/// `h = 1`, `b = N`, `γ = 1/2`.
pub const BALANCED: [IndepRow; 6] = [
    ir(10, 1.35178, 1.19648, 23.9315, 1.33455, 1.19328, 23.9315, 0.001807),
    ir(50, 2.14273, 1.49338, 149.338, 2.13927, 1.49286, 149.338, 0.000379),
    ir(100, 2.48757, 1.60499, 320.997, 2.48584, 1.60475, 320.997, 0.000192),
    ir(200, 2.83328, 1.70944, 683.775, 2.83242, 1.70932, 683.775, 9.68e-5),
    ir(500, 3.29091, 1.8385, 1838.5, 3.29056, 1.83846, 1838.5, 3.91e-5),
    ir(1000, 3.63731, 1.93044, 3860.87, 3.63713, 1.93042, 3860.87, 1.97e-5),
];

/// `h = 1`, `b = N²`, `γ = 1/(1 + N)`.
pub const QUALITY: [IndepRow; 6] = [
    ir(10, 2.32898, 1.52962, 30.5925, 2.3266, 1.52924, 30.5925, 0.000617),
    ir(50, 3.91708, 1.97978, 197.978, 3.91698, 1.97976, 197.978, 2.52e-5),
    ir(100, 4.60768, 2.14684, 429.368, 4.60766, 2.14684, 429.368, 6.31162e-6),
    ir(200, 5.29957, 2.30221, 920.886, 5.29956, 2.30221, 920.886, 1.21801e-6),
    ir(500, 6.21511, 2.49306, 2493.06, 6.21511, 2.49306, 2493.06, 5.51467e-6),
    ir(1000, 6.90801, 2.62833, 5256.66, 6.90801, 2.62833, 5256.66, 0.000176),
];

/// `h = N`, `b = 1`, `γ = N²/(N² + 1)`.
pub const EFFICIENCY: [IndepRow; 6] = [
    ir(10, 0.497572, 3.12224, 62.4448, 0.386624, 3.08439, 62.4665, 0.000797),
    ir(50, 0.965997, 9.35451, 935.451, 0.927385, 9.34122, 935.453, 8.65678e-6),
    ir(100, 1.21527, 14.4701, 2894.02, 1.19242, 14.4615, 2894.02, 1.30518e-6),
    ir(200, 1.48208, 22.0864, 8834.57, 1.46889, 22.0808, 8834.57, 2.20863e-7),
    ir(500, 1.85348, 38.0553, 38055.3, 1.84728, 38.0521, 38055.3, 2.51171e-8),
    ir(1000, 2.14443, 56.945, 113890.0, 2.14098, 56.9428, 113890.0, 5.30189e-9),
];

/// Dependent queues: simulated optimum against the normal-limit policy.
#[derive(Debug, Clone, Copy)]
pub struct NormalRow {
    pub n: usize,
    pub sigma_a: f64,
    pub i_sim: f64,
    pub beta_sim: f64,
    pub f_sim: f64,
    pub i_hat: f64,
    pub beta_hat: f64,
    pub f_hat: f64,
    /// `(1 − F(I^A, β^A)/F(Î^A, β̂^A))·√log N`.
    pub gap: f64,
}

#[allow(clippy::too_many_arguments)]
const fn nr(
    n: usize,
    sigma_a: f64,
    i_sim: f64,
    beta_sim: f64,
    f_sim: f64,
    i_hat: f64,
    beta_hat: f64,
    f_hat: f64,
    gap: f64,
) -> NormalRow {
    NormalRow {
        n,
        sigma_a,
        i_sim,
        beta_sim,
        f_sim,
        i_hat,
        beta_hat,
        f_hat,
        gap,
    }
}

/// `b = N`.
pub const NORMAL_B1: [NormalRow; 12] = [
    nr(10, 0.1, 1.32672, 1.1583, 23.1894, 1.15129, 0.855514, 24.5143, 0.082011),
    nr(50, 0.1, 2.12222, 1.47611, 147.534, 1.95601, 1.25004, 150.337, 0.036877),
    nr(100, 0.1, 2.45516, 1.58865, 318.588, 2.30259, 1.38516, 322.994, 0.029273),
    nr(10, 0.5, 1.48629, 1.25448, 25.333, 1.15129, 0.976909, 26.9363, 0.090320),
    nr(50, 0.5, 2.33757, 1.59412, 159.934, 1.95601, 1.3744, 164.689, 0.057107),
    nr(100, 0.5, 2.71507, 1.71664, 343.937, 2.30259, 1.51094, 352.91, 0.054563),
    nr(10, 0.75, 1.71443, 1.36908, 27.191, 1.15129, 1.00605, 29.7614, 0.131055),
    nr(50, 0.75, 2.63758, 1.70591, 171.443, 1.95601, 1.41834, 180.556, 0.099827),
    nr(
        100, 0.75, 2.98024, 1.83438, 367.348, 2.30259, 1.55865, 383.319, 0.089412,
    ),
    nr(10, 1.0, 1.98963, 1.47358, 29.8393, 1.15129, 1.0037, 34.6552, 0.210871),
    nr(50, 1.0, 3.00637, 1.84276, 185.25, 1.95601, 1.43941, 201.314, 0.157827),
    nr(100, 1.0, 3.3939, 1.97602, 393.668, 2.30259, 1.58534, 421.505, 0.141724),
];

/// `b = 3N`.
pub const NORMAL_B3: [NormalRow; 12] = [
    nr(10, 0.1, 1.72631, 1.31058, 25.9539, 1.22366, 0.884692, 31.2239, 0.256113),
    nr(50, 0.1, 2.53298, 1.5931, 159.026, 2.05034, 1.27624, 173.141, 0.161243),
    nr(100, 0.1, 2.88327, 1.69656, 341.44, 2.40493, 1.41084, 367.575, 0.152581),
    nr(10, 0.5, 2.06709, 1.43331, 28.3311, 1.51315, 1.0992, 31.2606, 0.142201),
    nr(50, 0.5, 2.98654, 1.74381, 173.875, 2.42767, 1.48993, 183.166, 0.100327),
    nr(100, 0.5, 3.37032, 1.86469, 371.779, 2.81433, 1.62542, 387.809, 0.088703),
    nr(10, 0.75, 2.44895, 1.57036, 31.4004, 1.69408, 1.18023, 35.5139, 0.175760),
    nr(50, 0.75, 3.41775, 1.89842, 190.571, 2.6635, 1.58369, 205.174, 0.140773),
    nr(100, 0.75, 3.8989, 2.01955, 404.306, 3.0702, 1.72277, 429.58, 0.126256),
    nr(10, 1.0, 2.91296, 1.72878, 34.6096, 1.87501, 1.23092, 40.7704, 0.229298),
    nr(50, 1.0, 4.15795, 2.06968, 207.553, 2.89934, 1.65341, 230.281, 0.195211),
    nr(100, 1.0, 4.5669, 2.20696, 439.681, 3.32607, 1.79761, 479.663, 0.178876),
];

/// Dependent queues: mixed Gumbel-plus-normal policy.
#[derive(Debug, Clone, Copy)]
pub struct MixedRow {
    pub n: usize,
    pub sigma_a: f64,
    pub i_mixed: f64,
    pub beta_mixed: f64,
    pub f_mixed: f64,
    /// `(1 − F(I^A, β^A)/F(I^M, β^M))·√log N`.
    pub gap_mixed: f64,
    /// `(1 − F(I^A, β^A)/F(Î^A, β̂^A))·√log N`.
    pub gap_normal: f64,
}

const fn mr(
    n: usize,
    sigma_a: f64,
    i_mixed: f64,
    beta_mixed: f64,
    f_mixed: f64,
    gap_mixed: f64,
    gap_normal: f64,
) -> MixedRow {
    MixedRow {
        n,
        sigma_a,
        i_mixed,
        beta_mixed,
        f_mixed,
        gap_mixed,
        gap_normal,
    }
}

/// `b = N`.
pub const MIXED_B1: [MixedRow; 12] = [
    mr(10, 0.1, 1.33785, 1.1945, 23.2022, 0.000837, 0.082011),
    mr(50, 0.1, 2.14487, 1.49567, 147.567, 0.000442, 0.036877),
    mr(100, 0.1, 2.49244, 1.60808, 318.638, 0.000337, 0.029273),
    mr(10, 0.5, 1.38072, 1.21129, 25.4342, 0.006038, 0.090320),
    mr(50, 0.5, 2.19829, 1.53814, 160.497, 0.006938, 0.057107),
    mr(100, 0.5, 2.54871, 1.65808, 345.247, 0.008143, 0.054563),
    mr(10, 0.75, 1.40013, 1.2128, 27.6956, 0.027647, 0.131055),
    mr(50, 0.75, 2.216, 1.56166, 174.269, 0.032074, 0.099827),
    mr(100, 0.75, 2.5656, 1.68745, 372.643, 0.030493, 0.089412),
    mr(10, 1.0, 1.41255, 1.19665, 31.5428, 0.081950, 0.210871),
    mr(50, 1.0, 2.22627, 1.57136, 192.722, 0.076684, 0.157827),
    mr(100, 1.0, 2.57434, 1.70384, 407.343, 0.072043, 0.141724),
];

/// `b = 3N`.
pub const MIXED_B3: [MixedRow; 12] = [
    mr(10, 0.1, 1.78238, 1.34746, 25.9965, 0.002487, 0.256113),
    mr(50, 0.1, 2.59271, 1.62088, 159.162, 0.001690, 0.161243),
    mr(100, 0.1, 2.94168, 1.72533, 341.49, 0.000314, 0.152581),
    mr(10, 0.5, 1.94345, 1.38309, 28.3671, 0.001926, 0.142201),
    mr(50, 0.5, 2.83775, 1.68955, 174.284, 0.004642, 0.100327),
    mr(100, 0.5, 3.21861, 1.8044, 372.617, 0.004826, 0.088703),
    mr(10, 0.75, 2.09429, 1.41142, 32.0055, 0.028689, 0.175760),
    mr(50, 0.75, 3.04648, 1.74512, 193.854, 0.033496, 0.140773),
    mr(100, 0.75, 3.44819, 1.86761, 410.624, 0.033019, 0.126256),
    mr(10, 1.0, 2.25658, 1.43095, 36.5165, 0.079240, 0.229298),
    mr(50, 1.0, 3.26538, 1.79271, 216.91, 0.085321, 0.195211),
    mr(100, 1.0, 3.68765, 1.92281, 456.859, 0.080689, 0.178876),
];

/// Full factorial design of the dependent experiments.
pub const DESIGN_N: [usize; 3] = [10, 50, 100];
pub const DESIGN_SIGMA_A: [f64; 4] = [0.1, 0.5, 0.75, 1.0];
/// `b = c·N` for these `c`.
pub const DESIGN_B_MULTIPLIER: [f64; 2] = [1.0, 3.0];

/// The eight reference tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableId {
    Balanced = 2,
    Quality = 3,
    Efficiency = 4,
    Design = 5,
    NormalB1 = 6,
    NormalB3 = 7,
    MixedB1 = 8,
    MixedB3 = 9,
}

impl TableId {
    pub const ALL: [TableId; 8] = [
        TableId::Balanced,
        TableId::Quality,
        TableId::Efficiency,
        TableId::Design,
        TableId::NormalB1,
        TableId::NormalB3,
        TableId::MixedB1,
        TableId::MixedB3,
    ];

    pub fn from_number(id: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|t| *t as u8 == id)
    }

    pub fn caption(&self) -> &'static str {
        match self {
            TableId::Balanced => "independent queues, balanced regime: h = 1, b = N",
            TableId::Quality => "independent queues, quality-driven regime: h = 1, b = N^2",
            TableId::Efficiency => "independent queues, efficiency-driven regime: h = N, b = 1",
            TableId::Design => "design of the dependent experiments",
            TableId::NormalB1 => "dependent queues, simulated optimum vs normal limit: h = 1, b = N",
            TableId::NormalB3 => "dependent queues, simulated optimum vs normal limit: h = 1, b = 3N",
            TableId::MixedB1 => "dependent queues, mixed approximation: h = 1, b = N",
            TableId::MixedB3 => "dependent queues, mixed approximation: h = 1, b = 3N",
        }
    }

    /// `(h, b)` rules of the table's instances.
    pub fn rates(&self) -> (RateRule, RateRule) {
        let one = RateRule::Const { c: 1.0 };
        match self {
            TableId::Balanced | TableId::NormalB1 | TableId::MixedB1 | TableId::Design => {
                (one, RateRule::Linear { c: 1.0 })
            }
            TableId::Quality => (one, RateRule::Power { c: 1.0, alpha: 2.0 }),
            TableId::Efficiency => (RateRule::Linear { c: 1.0 }, one),
            TableId::NormalB3 | TableId::MixedB3 => (one, RateRule::Linear { c: 3.0 }),
        }
    }
}
