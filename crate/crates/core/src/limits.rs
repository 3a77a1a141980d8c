/// Resource ceilings shared by the exact and certified engines.
#[derive(Debug, Clone, PartialEq)]
pub struct Limits {
    /// Largest integer the exact orbit engines may build, in bytes.
    pub bigint_cap_bytes: usize,
    /// Ceiling on the truncation index of a local height series.
    pub max_iterations: u32,
    /// Starting p-adic precision in base-p digits; doubled on exhaustion.
    pub padic_start_digits: usize,
    pub padic_max_digits: usize,
    /// Starting mantissa precision of the archimedean interval engine.
    pub arch_start_bits: u64,
    pub arch_max_bits: u64,
    /// Bit length at which cycle detection gives up on an exact orbit.
    pub classify_bit_cap: u64,
    /// Largest number of candidate parameters a search may enumerate.
    pub enumeration_budget: u128,
    /// Largest polynomial degree the generic-fiber iteration may build.
    pub poly_max_degree: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            bigint_cap_bytes: 64 << 20,
            max_iterations: 512,
            padic_start_digits: 32,
            padic_max_digits: 1 << 16,
            arch_start_bits: 64,
            arch_max_bits: 8192,
            classify_bit_cap: 1 << 14,
            enumeration_budget: 2_000_000,
            poly_max_degree: 1 << 14,
        }
    }
}

impl Limits {
    pub const BIGINT_CAP_ENV: &'static str = "HEIGHTLAB_BIGINT_CAP";

    /// Defaults, with `HEIGHTLAB_BIGINT_CAP` (bytes) applied when set.
    pub fn from_env() -> Self {
        let mut l = Limits::default();
        if let Some(cap) = std::env::var(Self::BIGINT_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&c| c > 0)
        {
            l.bigint_cap_bytes = cap;
        }
        l
    }

    pub fn bigint_cap_bits(&self) -> u64 {
        (self.bigint_cap_bytes as u64).saturating_mul(8)
    }
}
