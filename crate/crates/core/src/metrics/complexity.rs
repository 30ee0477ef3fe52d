//! Published per-phase costs for this scheme and three earlier CL-AS schemes.
//! Reference data only; the other schemes are not implemented here.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::counter::OpCounts;

/// `a*n*H + b*n*S + c*n*P + d*H + e*S + f*P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicCost {
    pub nh: u64,
    pub ns: u64,
    pub np: u64,
    pub h: u64,
    pub s: u64,
    pub p: u64,
}

impl SymbolicCost {
    pub const ZERO: SymbolicCost = SymbolicCost::new(0, 0, 0, 0, 0, 0);

    pub const fn new(nh: u64, ns: u64, np: u64, h: u64, s: u64, p: u64) -> Self {
        SymbolicCost {
            nh,
            ns,
            np,
            h,
            s,
            p,
        }
    }

    pub const fn per_n(h: u64, s: u64, p: u64) -> Self {
        SymbolicCost::new(h, s, p, 0, 0, 0)
    }

    pub fn eval(&self, n: u64) -> OpCounts {
        OpCounts::hsp(
            self.nh * n + self.h,
            self.ns * n + self.s,
            self.np * n + self.p,
        )
    }
}

impl fmt::Display for SymbolicCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (coef, sym, per_n) in [
            (self.nh, "H", true),
            (self.h, "H", false),
            (self.np, "P", true),
            (self.p, "P", false),
            (self.ns, "S", true),
            (self.s, "S", false),
        ] {
            if coef == 0 {
                continue;
            }
            let c = if coef == 1 {
                String::new()
            } else {
                coef.to_string()
            };
            parts.push(format!("{c}{}{sym}", if per_n { "n" } else { "" }));
        }
        if parts.is_empty() {
            return f.write_str("0");
        }
        f.write_str(&parts.join("+"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComplexityRow {
    pub scheme: &'static str,
    pub signing: SymbolicCost,
    pub verification: SymbolicCost,
    pub aggregation: SymbolicCost,
    pub aggregate_verification: SymbolicCost,
}

pub const THH: ComplexityRow = ComplexityRow {
    scheme: "THH",
    signing: SymbolicCost::per_n(4, 3, 0),
    verification: SymbolicCost::per_n(5, 2, 4),
    aggregation: SymbolicCost::ZERO,
    aggregate_verification: SymbolicCost::new(0, 2, 0, 0, 0, 4),
};

pub const MALHI_BATRA: ComplexityRow = ComplexityRow {
    scheme: "Malhi-Batra",
    signing: SymbolicCost::per_n(1, 4, 0),
    verification: SymbolicCost::per_n(2, 3, 3),
    aggregation: SymbolicCost::ZERO,
    aggregate_verification: SymbolicCost::new(0, 3, 0, 0, 0, 3),
};

pub const XGCL: ComplexityRow = ComplexityRow {
    scheme: "XGCL",
    signing: SymbolicCost::per_n(1, 3, 0),
    verification: SymbolicCost::per_n(2, 2, 3),
    aggregation: SymbolicCost::ZERO,
    aggregate_verification: SymbolicCost::new(0, 2, 0, 0, 0, 3),
};

pub const OURS: ComplexityRow = ComplexityRow {
    scheme: "Ours",
    signing: SymbolicCost::per_n(1, 2, 0),
    verification: SymbolicCost::per_n(2, 1, 2),
    aggregation: SymbolicCost::per_n(0, 2, 0),
    aggregate_verification: SymbolicCost::new(0, 0, 0, 0, 0, 2),
};

pub const COMPLEXITY_TABLE: [ComplexityRow; 4] = [THH, MALHI_BATRA, XGCL, OURS];
