//! Named parameter sets used by the CLI and the acceptance suite.

use crate::params::ParamSet;

/// The 76 δ values of the `M = 444` set.
pub fn m444_deltas() -> Vec<u64> {
    let mut d: Vec<u64> = vec![1, 1, 1, 1, 1, 2, 2, 3, 3, 4];
    d.extend(4..24);
    d.extend((0..40).map(|i| 24 + 2 * i));
    d.extend([104, 108, 112, 116, 120, 124]);
    d
}

/// `M = 6`, `δ = (0, 1)`: the smallest shape with `C > 1/(1 + log 2)`.
pub fn theorem1() -> ParamSet {
    ParamSet::shape(6, vec![0, 1])
}

/// `M = 444` with [`m444_deltas`]: the best constant among the reference sets.
pub fn claim1() -> ParamSet {
    ParamSet::shape(444, m444_deltas())
}

/// `M = 444`, `r = 2444`, `s = J = 76`, with numerator bricks in `φ`.
pub fn claim2() -> ParamSet {
    ParamSet {
        m: 444,
        deltas: m444_deltas(),
        s: 76,
        r: 2444,
        include_numerator_bricks: true,
    }
}

/// The six reference shapes, in a fixed order, with the published values of `C·(1 + log 2)`.
pub fn reference_sets() -> Vec<(ParamSet, f64)> {
    vec![
        (theorem1(), 1.009388),
        (ParamSet::shape(19, vec![0, 1, 2]), 1.036282),
        (ParamSet::shape(12, vec![0, 0, 1, 2]), 1.049651),
        (ParamSet::shape(16, vec![0, 0, 1, 2, 3]), 1.062948),
        (ParamSet::shape(37, (2..12).collect()), 1.026022),
        (claim1(), 1.108096),
    ]
}
