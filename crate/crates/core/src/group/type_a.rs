//! Supersingular curve `E: y^2 = x^3 + x` over `F_p`, `p = 3 mod 4`.
//!
//! `#E(F_p) = p + 1 = h * r` with `r = 2^159 + 2^107 + 1` and a 512-bit `p`
//! (the standard "type A" parameter set). The embedding degree is 2 and the
//! distortion map `(x, y) -> (-x, i*y)` sends the order-r subgroup of
//! `E(F_p)` to an independent subgroup of `E(F_p^2)`, which makes the reduced
//! Tate pairing a symmetric, non-degenerate map `G x G -> mu_r in F_p^2`.
//!
//! Arithmetic is plain `BigUint` modular arithmetic: slow, simple and
//! variable time.

use std::sync::LazyLock;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{expand_message_xmd, PairingBackend, PairingMode};
use crate::error::{Error, Result};

const P_HEX: &str = "a7a73868e95fba886edef8ce96e7217e364bb946f5ed839628d1f80010940622a7afdaf9b049744a459e54dab7ba5be92539e8ff9b4f30a3cf6230c28e284d97";
const R_HEX: &str = "8000000000000800000000000000000000000001";
const H_HEX: &str =
    "14f4e70d1d2bf601bf6b0d47137cc83915f505f0e85050f93a6344777e2cd28ff9b4f30a3cf6230c28e284d98";

const FIELD_BYTES: usize = 64;
const GENERATOR_TAG: &[u8] = b"MHCS-TYPEA-GENERATOR";

struct Params {
    p: BigUint,
    r: BigUint,
    h: BigUint,
    sqrt_exp: BigUint,
    inv_exp: BigUint,
}

static PARAMS: LazyLock<Params> = LazyLock::new(|| {
    let p = BigUint::parse_bytes(P_HEX.as_bytes(), 16).unwrap();
    let r = BigUint::parse_bytes(R_HEX.as_bytes(), 16).unwrap();
    let h = BigUint::parse_bytes(H_HEX.as_bytes(), 16).unwrap();
    let sqrt_exp = (&p + 1u32) >> 2;
    let inv_exp = &p - 2u32;
    Params {
        p,
        r,
        h,
        sqrt_exp,
        inv_exp,
    }
});

static GENERATOR: LazyLock<TypeAPoint> =
    LazyLock::new(|| hash_to_subgroup(GENERATOR_TAG, b"generator"));

fn params() -> &'static Params {
    &PARAMS
}

// ---- F_p ----

fn fadd(a: &BigUint, b: &BigUint) -> BigUint {
    let p = &params().p;
    let s = a + b;
    if &s >= p {
        s - p
    } else {
        s
    }
}

fn fsub(a: &BigUint, b: &BigUint) -> BigUint {
    if a >= b {
        a - b
    } else {
        a + &params().p - b
    }
}

fn fmul(a: &BigUint, b: &BigUint) -> BigUint {
    (a * b) % &params().p
}

fn fsqr(a: &BigUint) -> BigUint {
    fmul(a, a)
}

fn fneg(a: &BigUint) -> BigUint {
    if a.is_zero() {
        BigUint::zero()
    } else {
        &params().p - a
    }
}

fn fdbl(a: &BigUint) -> BigUint {
    fadd(a, a)
}

fn finv(a: &BigUint) -> BigUint {
    a.modpow(&params().inv_exp, &params().p)
}

fn curve_rhs(x: &BigUint) -> BigUint {
    fadd(&fmul(&fsqr(x), x), x)
}

/// Square root of a quadratic residue, or `None`.
fn fsqrt(a: &BigUint) -> Option<BigUint> {
    let y = a.modpow(&params().sqrt_exp, &params().p);
    (fsqr(&y) == *a).then_some(y)
}

// ---- F_p^2 = F_p[i] / (i^2 + 1) ----

/// Element of `F_p^2`; pairing values live in its order-r subgroup.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TypeAGt {
    c0: BigUint,
    c1: BigUint,
}

impl TypeAGt {
    fn one() -> Self {
        TypeAGt {
            c0: BigUint::one(),
            c1: BigUint::zero(),
        }
    }

    fn mul(&self, o: &TypeAGt) -> TypeAGt {
        let v0 = fmul(&self.c0, &o.c0);
        let v1 = fmul(&self.c1, &o.c1);
        let cross = fmul(&fadd(&self.c0, &self.c1), &fadd(&o.c0, &o.c1));
        TypeAGt {
            c0: fsub(&v0, &v1),
            c1: fsub(&fsub(&cross, &v0), &v1),
        }
    }

    fn square(&self) -> TypeAGt {
        let c1 = fdbl(&fmul(&self.c0, &self.c1));
        TypeAGt {
            c0: fmul(&fadd(&self.c0, &self.c1), &fsub(&self.c0, &self.c1)),
            c1,
        }
    }

    fn conj(&self) -> TypeAGt {
        TypeAGt {
            c0: self.c0.clone(),
            c1: fneg(&self.c1),
        }
    }

    fn norm(&self) -> BigUint {
        fadd(&fsqr(&self.c0), &fsqr(&self.c1))
    }

    fn pow(&self, e: &BigUint) -> TypeAGt {
        let mut acc = TypeAGt::one();
        for i in (0..e.bits()).rev() {
            acc = acc.square();
            if e.bit(i) {
                acc = acc.mul(self);
            }
        }
        acc
    }

    /// `f^((p^2 - 1) / r)`. The easy part `f^(p-1) = conj(f)^2 / N(f)` uses
    /// Frobenius being conjugation when `p = 3 mod 4`.
    fn final_exponentiation(&self) -> TypeAGt {
        let inv_norm = finv(&self.norm());
        let sq = self.conj().square();
        let unitary = TypeAGt {
            c0: fmul(&sq.c0, &inv_norm),
            c1: fmul(&sq.c1, &inv_norm),
        };
        unitary.pow(&params().h)
    }
}

// ---- curve points ----

/// Affine point of `E(F_p)`; `None` is the point at infinity.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TypeAPoint(Option<(BigUint, BigUint)>);

impl TypeAPoint {
    fn infinity() -> Self {
        TypeAPoint(None)
    }

    #[cfg(test)]
    fn is_on_curve(&self) -> bool {
        match &self.0 {
            None => true,
            Some((x, y)) => fsqr(y) == curve_rhs(x),
        }
    }
}

/// Jacobian coordinates `(X, Y, Z)` for `(X/Z^2, Y/Z^3)`; `Z = 0` is infinity.
#[derive(Clone, Debug)]
struct Jacobian {
    x: BigUint,
    y: BigUint,
    z: BigUint,
}

impl Jacobian {
    fn infinity() -> Self {
        Jacobian {
            x: BigUint::one(),
            y: BigUint::one(),
            z: BigUint::zero(),
        }
    }

    fn from_affine(p: &TypeAPoint) -> Self {
        match &p.0 {
            None => Jacobian::infinity(),
            Some((x, y)) => Jacobian {
                x: x.clone(),
                y: y.clone(),
                z: BigUint::one(),
            },
        }
    }

    fn is_infinity(&self) -> bool {
        self.z.is_zero()
    }

    fn to_affine(&self) -> TypeAPoint {
        if self.is_infinity() {
            return TypeAPoint::infinity();
        }
        let zinv = finv(&self.z);
        let zinv2 = fsqr(&zinv);
        let x = fmul(&self.x, &zinv2);
        let y = fmul(&fmul(&self.y, &zinv2), &zinv);
        TypeAPoint(Some((x, y)))
    }

    fn double(&self) -> Jacobian {
        if self.is_infinity() || self.y.is_zero() {
            return Jacobian::infinity();
        }
        let yy = fsqr(&self.y);
        let s = fmul(&fdbl(&fdbl(&self.x)), &yy);
        let xx = fsqr(&self.x);
        let zz = fsqr(&self.z);
        // M = 3X^2 + a Z^4 with a = 1
        let m = fadd(&fadd(&fdbl(&xx), &xx), &fsqr(&zz));
        let x3 = fsub(&fsqr(&m), &fdbl(&s));
        let yyyy8 = fdbl(&fdbl(&fdbl(&fsqr(&yy))));
        let y3 = fsub(&fmul(&m, &fsub(&s, &x3)), &yyyy8);
        let z3 = fdbl(&fmul(&self.y, &self.z));
        Jacobian {
            x: x3,
            y: y3,
            z: z3,
        }
    }

    fn add_affine(&self, x2: &BigUint, y2: &BigUint) -> Jacobian {
        if self.is_infinity() {
            return Jacobian {
                x: x2.clone(),
                y: y2.clone(),
                z: BigUint::one(),
            };
        }
        let z1z1 = fsqr(&self.z);
        let u2 = fmul(x2, &z1z1);
        let s2 = fmul(&fmul(y2, &self.z), &z1z1);
        let h = fsub(&u2, &self.x);
        let r = fsub(&s2, &self.y);
        if h.is_zero() {
            return if r.is_zero() {
                self.double()
            } else {
                Jacobian::infinity()
            };
        }
        let hh = fsqr(&h);
        let hhh = fmul(&h, &hh);
        let v = fmul(&self.x, &hh);
        let x3 = fsub(&fsub(&fsqr(&r), &hhh), &fdbl(&v));
        let y3 = fsub(&fmul(&r, &fsub(&v, &x3)), &fmul(&self.y, &hhh));
        let z3 = fmul(&self.z, &h);
        Jacobian {
            x: x3,
            y: y3,
            z: z3,
        }
    }
}

fn point_add(a: &TypeAPoint, b: &TypeAPoint) -> TypeAPoint {
    match &b.0 {
        None => a.clone(),
        Some((x2, y2)) => Jacobian::from_affine(a).add_affine(x2, y2).to_affine(),
    }
}

fn point_neg(a: &TypeAPoint) -> TypeAPoint {
    TypeAPoint(a.0.as_ref().map(|(x, y)| (x.clone(), fneg(y))))
}

fn point_mul(p: &TypeAPoint, k: &BigUint) -> TypeAPoint {
    let Some((px, py)) = &p.0 else {
        return TypeAPoint::infinity();
    };
    let mut acc = Jacobian::infinity();
    for i in (0..k.bits()).rev() {
        acc = acc.double();
        if k.bit(i) {
            acc = acc.add_affine(px, py);
        }
    }
    acc.to_affine()
}

fn in_subgroup(p: &TypeAPoint) -> bool {
    point_mul(p, &params().r).0.is_none()
}

/// Try-and-increment onto `E(F_p)`, then clear the cofactor.
fn hash_to_subgroup(dst: &[u8], msg: &[u8]) -> TypeAPoint {
    let p = &params().p;
    for ctr in 0u32.. {
        let mut input = msg.to_vec();
        input.extend_from_slice(&ctr.to_be_bytes());
        let wide = expand_message_xmd(&input, dst, FIELD_BYTES + 17);
        let x = BigUint::from_bytes_be(&wide[..FIELD_BYTES + 16]) % p;
        let Some(mut y) = fsqrt(&curve_rhs(&x)) else {
            continue;
        };
        if wide[FIELD_BYTES + 16] & 1 == 1 {
            y = fneg(&y);
        }
        let q = point_mul(&TypeAPoint(Some((x, y))), &params().h);
        if q.0.is_some() {
            return q;
        }
    }
    unreachable!("half of all x values are on the curve")
}

/// Reduced Tate pairing `e(a, phi(b))` with the distortion map applied to the
/// second argument. Vertical-line denominators lie in `F_p` and vanish under
/// the final exponentiation, so they are omitted.
fn tate(a: &TypeAPoint, b: &TypeAPoint) -> TypeAGt {
    let (Some((xp, yp)), Some((xq, yq))) = (&a.0, &b.0) else {
        return TypeAGt::one();
    };
    let r = &params().r;
    let mut f = TypeAGt::one();
    let mut t = Jacobian::from_affine(a);

    for i in (0..r.bits() - 1).rev() {
        // tangent at T, scaled by 2 Y Z^3, evaluated at (-xq, i*yq)
        let zz = fsqr(&t.z);
        let zzz = fmul(&zz, &t.z);
        let xx = fsqr(&t.x);
        let slope_num = fadd(&fadd(&fdbl(&xx), &xx), &fsqr(&zz));
        let line = TypeAGt {
            c0: fsub(
                &fmul(&slope_num, &fadd(&fmul(&zz, xq), &t.x)),
                &fdbl(&fsqr(&t.y)),
            ),
            c1: fdbl(&fmul(&fmul(&t.y, &zzz), yq)),
        };
        f = f.square().mul(&line);
        t = t.double();

        if r.bit(i) {
            // chord through T and P, scaled by (xp Z^2 - X) Z
            let zz = fsqr(&t.z);
            let zzz = fmul(&zz, &t.z);
            let den = fmul(&fsub(&fmul(xp, &zz), &t.x), &t.z);
            let num = fsub(&fmul(yp, &zzz), &t.y);
            if den.is_zero() {
                // T = -P: the vertical line is in F_p
                debug_assert!(!num.is_zero());
                t = Jacobian::infinity();
                continue;
            }
            let line = TypeAGt {
                c0: fsub(&fmul(&num, &fadd(xq, xp)), &fmul(&den, yp)),
                c1: fmul(&den, yq),
            };
            f = f.mul(&line);
            t = t.add_affine(xp, yp);
        }
    }
    f.final_exponentiation()
}

/// Integer modulo r.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TypeAScalar(BigUint);

fn field_to_bytes(v: &BigUint) -> Vec<u8> {
    let raw = v.to_bytes_be();
    let mut out = vec![0u8; FIELD_BYTES - raw.len()];
    out.extend_from_slice(&raw);
    out
}

/// Symmetric pairing on the type A supersingular curve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TypeA;

impl TypeA {
    fn point_to_bytes(p: &TypeAPoint) -> Vec<u8> {
        let mut out = Vec::with_capacity(1 + FIELD_BYTES);
        match &p.0 {
            None => {
                out.push(0x00);
                out.extend_from_slice(&[0u8; FIELD_BYTES]);
            }
            Some((x, y)) => {
                out.push(if y.bit(0) { 0x03 } else { 0x02 });
                out.extend_from_slice(&field_to_bytes(x));
            }
        }
        out
    }

    fn point_from_bytes(kind: &'static str, bytes: &[u8]) -> Result<TypeAPoint> {
        if bytes.len() != 1 + FIELD_BYTES {
            return Err(Error::invalid(
                kind,
                format!("expected {} bytes, got {}", 1 + FIELD_BYTES, bytes.len()),
            ));
        }
        let x = BigUint::from_bytes_be(&bytes[1..]);
        match bytes[0] {
            0x00 if x.is_zero() => return Ok(TypeAPoint::infinity()),
            0x02 | 0x03 => {}
            _ => return Err(Error::invalid(kind, "bad prefix byte")),
        }
        if x >= params().p {
            return Err(Error::invalid(kind, "x coordinate not reduced"));
        }
        let mut y = fsqrt(&curve_rhs(&x)).ok_or_else(|| Error::invalid(kind, "not on curve"))?;
        if y.bit(0) != (bytes[0] == 0x03) {
            y = fneg(&y);
        }
        let pt = TypeAPoint(Some((x, y)));
        if !in_subgroup(&pt) {
            return Err(Error::invalid(kind, "not in the order-r subgroup"));
        }
        Ok(pt)
    }
}

impl PairingBackend for TypeA {
    type Scalar = TypeAScalar;
    type G1 = TypeAPoint;
    type G2 = TypeAPoint;
    type Gt = TypeAGt;

    const NAME: &'static str = "type-a-512";
    const MODE: PairingMode = PairingMode::Symmetric;
    const SECURITY_BITS: u32 = 80;
    const SCALAR_BYTES: usize = 20;
    const G1_BYTES: usize = 1 + FIELD_BYTES;
    const G2_BYTES: usize = 1 + FIELD_BYTES;

    fn order() -> &'static BigUint {
        &params().r
    }

    fn g1_generator() -> TypeAPoint {
        GENERATOR.clone()
    }

    fn g2_generator() -> TypeAPoint {
        GENERATOR.clone()
    }

    fn g1_identity() -> TypeAPoint {
        TypeAPoint::infinity()
    }

    fn g2_identity() -> TypeAPoint {
        TypeAPoint::infinity()
    }

    fn gt_identity() -> TypeAGt {
        TypeAGt::one()
    }

    fn g1_add(a: &TypeAPoint, b: &TypeAPoint) -> TypeAPoint {
        point_add(a, b)
    }

    fn g1_neg(a: &TypeAPoint) -> TypeAPoint {
        point_neg(a)
    }

    fn g1_mul(p: &TypeAPoint, k: &TypeAScalar) -> TypeAPoint {
        point_mul(p, &k.0)
    }

    fn g2_add(a: &TypeAPoint, b: &TypeAPoint) -> TypeAPoint {
        point_add(a, b)
    }

    fn g2_mul(p: &TypeAPoint, k: &TypeAScalar) -> TypeAPoint {
        point_mul(p, &k.0)
    }

    fn gt_mul(a: &TypeAGt, b: &TypeAGt) -> TypeAGt {
        a.mul(b)
    }

    fn gt_pow(a: &TypeAGt, k: &TypeAScalar) -> TypeAGt {
        a.pow(&k.0)
    }

    fn pairing(a: &TypeAPoint, b: &TypeAPoint) -> TypeAGt {
        tate(a, b)
    }

    fn hash_to_g1(dst: &[u8], msg: &[u8]) -> TypeAPoint {
        hash_to_subgroup(dst, msg)
    }

    fn scalar_from_biguint(v: &BigUint) -> TypeAScalar {
        TypeAScalar(v % &params().r)
    }

    fn scalar_to_biguint(s: &TypeAScalar) -> BigUint {
        s.0.clone()
    }

    fn scalar_add(a: &TypeAScalar, b: &TypeAScalar) -> TypeAScalar {
        TypeAScalar((&a.0 + &b.0) % &params().r)
    }

    fn scalar_mul(a: &TypeAScalar, b: &TypeAScalar) -> TypeAScalar {
        TypeAScalar((&a.0 * &b.0) % &params().r)
    }

    fn scalar_is_zero(s: &TypeAScalar) -> bool {
        s.0.is_zero()
    }

    fn g1_to_bytes(p: &TypeAPoint) -> Vec<u8> {
        Self::point_to_bytes(p)
    }

    fn g1_from_bytes(bytes: &[u8]) -> Result<TypeAPoint> {
        Self::point_from_bytes("G1", bytes)
    }

    fn g2_to_bytes(p: &TypeAPoint) -> Vec<u8> {
        Self::point_to_bytes(p)
    }

    fn g2_from_bytes(bytes: &[u8]) -> Result<TypeAPoint> {
        Self::point_from_bytes("G2", bytes)
    }

    fn gt_to_bytes(g: &TypeAGt) -> Vec<u8> {
        let mut out = field_to_bytes(&g.c0);
        out.extend_from_slice(&field_to_bytes(&g.c1));
        out
    }

    fn gt_from_bytes(bytes: &[u8]) -> Result<TypeAGt> {
        if bytes.len() != 2 * FIELD_BYTES {
            return Err(Error::invalid("GT", "wrong length"));
        }
        let c0 = BigUint::from_bytes_be(&bytes[..FIELD_BYTES]);
        let c1 = BigUint::from_bytes_be(&bytes[FIELD_BYTES..]);
        if c0 >= params().p || c1 >= params().p {
            return Err(Error::invalid("GT", "coordinate not reduced"));
        }
        let g = TypeAGt { c0, c1 };
        if g.pow(&params().r) != TypeAGt::one() {
            return Err(Error::invalid("GT", "not in the order-r subgroup"));
        }
        Ok(g)
    }
}
