//! Bundled example functions. The JSON sources ship in `functions/` and
//! double as inputs for the command-line tool.

use crate::expoly::ExpPoly;
use crate::poly::Poly;
use crate::ExpPolyTerm;
use num_complex::Complex64;

pub const SIN_Z: &str = include_str!("../functions/sin_z.json");
pub const SIN_Z2: &str = include_str!("../functions/sin_z2.json");
pub const SIN_Z3: &str = include_str!("../functions/sin_z3.json");
pub const EXAMPLE_H: &str = include_str!("../functions/example_h.json");
pub const COSH_CUBE: &str = include_str!("../functions/cosh_cube.json");
pub const HEMKE: &str = include_str!("../functions/hemke.json");
pub const CUBE_ROOTS: &str = include_str!("../functions/cube_roots.json");

/// Bundled definitions by short name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("sin_z", SIN_Z),
    ("sin_z2", SIN_Z2),
    ("sin_z3", SIN_Z3),
    ("example_h", EXAMPLE_H),
    ("cosh_cube", COSH_CUBE),
    ("hemke", HEMKE),
    ("cube_roots", CUBE_ROOTS),
];

pub fn by_name(name: &str) -> Option<ExpPoly> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| ExpPoly::from_json(src).expect("bundled definition is valid"))
}

/// `sin(z) = (e^{iz} - e^{-iz}) / 2i`
pub fn sin_z() -> ExpPoly {
    by_name("sin_z").unwrap()
}

/// `sin(z^2)`
pub fn sin_z2() -> ExpPoly {
    by_name("sin_z2").unwrap()
}

/// `sin(z^3)`
pub fn sin_z3() -> ExpPoly {
    by_name("sin_z3").unwrap()
}

/// `h(z) = exp(iz) sinh(z^3)`, the example with an infinite-measure basin.
pub fn example_h() -> ExpPoly {
    by_name("example_h").unwrap()
}

/// `e^{z^3} + e^{-z^3}`
pub fn cosh_cube() -> ExpPoly {
    by_name("cosh_cube").unwrap()
}

/// `(1 + z) e^{z^3 + z^2} + 2 e^{-z^3 - z^2}`
pub fn hemke() -> ExpPoly {
    by_name("hemke").unwrap()
}

/// `sum_k exp(w^k z^3)` over the cube roots of unity `w^k`.
pub fn cube_roots() -> ExpPoly {
    by_name("cube_roots").unwrap()
}

/// `e^{z^3}`
pub fn exp_cube() -> ExpPoly {
    ExpPoly::new(
        3,
        vec![ExpPolyTerm::new(Poly::constant(Complex64::new(1.0, 0.0)), Complex64::new(1.0, 0.0), Poly::zero())],
    )
    .unwrap()
}
