//! The regular-octagon genus-2 (Bolza) surface group.

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use crate::moebius::MoebiusElement;

/// Systole of the Bolza surface, 2 arccosh(1 + sqrt 2).
pub fn bolza_systole() -> f64 {
    2.0 * (1.0 + SQRT_2).acosh()
}

/// Translation by the systole along the diameter at angle k pi/4 of the disk,
/// written in upper-half-plane coordinates (the disk centre becomes i).
fn diameter_translation(k: u32) -> MoebiusElement {
    let half = 0.5 * bolza_systole();
    let (ch, sh) = (half.cosh(), half.sinh());
    let (sin, cos) = (k as f64 * FRAC_PI_4).sin_cos();
    MoebiusElement::new(ch + sh * cos, -sh * sin, -sh * sin, ch - sh * cos).expect("unit determinant")
}

/// The side pairings g0..g3 of the regular octagon centred at i.
/// Opposite sides are identified; g_k translates across side k.
pub fn octagon_side_pairings() -> [MoebiusElement; 4] {
    [0, 1, 2, 3].map(diameter_translation)
}

/// Generators a1, b1, a2, b2 with [a1, b1][a2, b2] = 1.
///
/// With a = g0, b = g1^-1, c = g2, d = g3^-1 the octagon relation reads
/// abcd a^-1 b^-1 c^-1 d^-1 = 1; the commutator form uses
/// a1 = a, b1 = b, a2 = c^-1 d^-1, b2 = abc.
pub fn genus2_octagon_generators() -> Vec<MoebiusElement> {
    let [g0, g1, g2, g3] = octagon_side_pairings();
    let a = g0;
    let b = g1.inverse();
    let c = g2;
    let d = g3.inverse();
    let a2 = c.inverse().compose(&d.inverse());
    let b2 = a.compose(&b).compose(&c);
    vec![a, b, a2, b2]
}
