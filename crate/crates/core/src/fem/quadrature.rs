//! Gauss rules on the unit interval and a degree-5 rule on triangles.

const fn unit(x: f64, w: f64) -> (f64, f64) {
    (0.5 * (1.0 + x), 0.5 * w)
}

/// Two-point Gauss-Legendre on [0, 1]: (node, weight).
pub const GAUSS2: [(f64, f64); 2] = {
    const X: f64 = 0.577_350_269_189_625_8;
    [unit(-X, 1.0), unit(X, 1.0)]
};

/// Four-point Gauss-Legendre on [0, 1].
pub const GAUSS4: [(f64, f64); 4] = {
    const X1: f64 = 0.339_981_043_584_856_3;
    const X2: f64 = 0.861_136_311_594_052_6;
    const W1: f64 = 0.652_145_154_862_546_1;
    const W2: f64 = 0.347_854_845_137_453_9;
    [unit(-X2, W2), unit(-X1, W1), unit(X1, W1), unit(X2, W2)]
};

/// Eight-point Gauss-Legendre on [0, 1].
pub const GAUSS8: [(f64, f64); 8] = {
    const X: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const W: [f64; 4] = [
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    [
        unit(-X[3], W[3]),
        unit(-X[2], W[2]),
        unit(-X[1], W[1]),
        unit(-X[0], W[0]),
        unit(X[0], W[0]),
        unit(X[1], W[1]),
        unit(X[2], W[2]),
        unit(X[3], W[3]),
    ]
};

/// Seven-point rule exact to degree 5 on the reference triangle, given as
/// (barycentric coordinates, weight relative to the area).
pub const TRI7: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_769_82;
    const B1: f64 = 0.470_142_064_105_115_1;
    const A2: f64 = 0.797_426_985_353_087_3;
    const B2: f64 = 0.101_286_507_323_456_34;
    const W0: f64 = 0.225;
    const W1: f64 = 0.132_394_152_788_506_18;
    const W2: f64 = 0.125_939_180_544_827_15;
    const T: f64 = 1.0 / 3.0;
    [
        ([T, T, T], W0),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

/// Composite eight-point Gauss over `[a, b]` with one panel per unit of
/// length (at least one).
pub fn composite_gauss8(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let len = b - a;
    if len == 0.0 {
        return 0.0;
    }
    let panels = len.abs().ceil().max(1.0) as usize;
    let h = len / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let start = a + p as f64 * h;
        let mut panel = 0.0;
        for &(s, w) in &GAUSS8 {
            panel += w * f(start + s * h);
        }
        total += panel * h;
    }
    total
}
