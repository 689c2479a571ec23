use num_integer::Integer;

/// Returns (d', j*) with d' = gcd(d, g) and j*·g ≡ d' (mod d), 0 ≤ j* ≤ (d − d')/d'.
pub fn solve_residue_coefficient(d: i128, g: i128) -> (i128, i128) {
    assert!(d >= 1 && g >= 1, "solve_residue_coefficient needs positive d and g");
    let eg = g.extended_gcd(&d);
    let dp = eg.gcd;
    let period = d / dp;
    (dp, eg.x.mod_floor(&period))
}

pub fn ceil_div(a: i128, b: i128) -> i128 {
    Integer::div_ceil(&a, &b)
}

pub fn floor_div(a: i128, b: i128) -> i128 {
    Integer::div_floor(&a, &b)
}

/// ⌈log2(x)⌉ for x ≥ 1.
pub fn ceil_log2(x: u128) -> u32 {
    assert!(x >= 1);
    128 - (x - 1).leading_zeros()
}

/// log2 as a float, for thresholds stated with real-valued logarithms.
pub fn log2f(x: f64) -> f64 {
    x.log2()
}
