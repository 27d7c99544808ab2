//! Checks of the identities satisfied by spectral subspaces and Riesz
//! idempotents. Every function returns a [`Report`]; errors are reserved for
//! inputs that cannot be evaluated at all (boundary-ambiguous regions, size
//! mismatches).

use rand::Rng;

use super::{restrict, JointDecomposition};
use crate::error::{Error, Result};
use crate::idempotents::{sum_annihilating, Idempotent};
use crate::linalg::{self, CMatrix, Subspace, C64};
use crate::measures::Polynomial;
use crate::regions::Region;
use crate::report::Report;

/// Above this basis condition number matrix-level assertions are skipped;
/// subspace-level assertions always apply.
const MATERIALIZE_SKIP_COND: f64 = 1e10;

/// `P(B_1 x ... x B_n)` computed from cluster membership agrees with the meet
/// of the single-operator projections `P_{T_i}(B_i)`, and both have trace
/// `mu(B)`.
pub fn verify_box_formula(dec: &JointDecomposition, boxes: &[Region]) -> Result<Report> {
    if boxes.len() != dec.arity() {
        return Err(Error::DimensionMismatch(format!("{} factors for a {}-tuple", boxes.len(), dec.arity())));
    }
    let mut report = Report::new("box formula");
    let tol = dec.tolerances().subspace;
    let d = dec.dim();
    let mut singles = Vec::with_capacity(boxes.len());
    for (i, b) in boxes.iter().enumerate() {
        singles.push(dec.marginal(i)?.spectral_projection(b)?);
    }
    let meet = Subspace::meet_all(d, singles.iter())?;
    let product = Region::product(boxes.to_vec());
    let direct = dec.spectral_projection(&product)?;
    report.check_le("meet of marginal projections equals joint projection", meet.distance(&direct)?, tol);
    let trace = dec.spectral_trace(&product)?;
    report.check_eq("dim of meet equals cluster multiplicity in box", meet.dim(), trace.rank);
    report.check_eq("dim of joint projection equals multiplicity in box", direct.dim(), trace.rank);
    Ok(report)
}

/// For a partition of `C^n`, the Riesz idempotents of the pieces are idempotent,
/// mutually annihilating and sum to the idempotent of the union.
pub fn verify_sigma_additivity(dec: &JointDecomposition, partition: &[Region]) -> Result<Report> {
    let mut report = Report::new("sigma additivity");
    let tols = dec.tolerances();
    let masks: Vec<Vec<bool>> = partition.iter().map(|r| dec.classify(r)).collect::<Result<_>>()?;
    for (c, cluster) in dec.clusters().iter().enumerate() {
        let hits = masks.iter().filter(|m| m[c]).count();
        report.check_eq(format!("cluster at {} lies in exactly one piece", linalg::fmt_point(&cluster.point)), hits, 1);
    }
    if partition.is_empty() {
        return Ok(report);
    }
    let pieces: Vec<Idempotent> = partition.iter().map(|r| dec.riesz_idempotent(r)).collect::<Result<_>>()?;

    let mut mats = Vec::with_capacity(pieces.len());
    for (k, e) in pieces.iter().enumerate() {
        match e.materialize() {
            Ok(m) if m.cond <= MATERIALIZE_SKIP_COND => {
                let defect = (&m.matrix * &m.matrix - &m.matrix).norm();
                report.check_le(format!("piece {k}: ||E^2 - E|| / cond"), defect / m.cond, tols.idempotent);
                let tr: f64 = m.matrix.trace().re;
                report.check_le(
                    format!("piece {k}: matrix trace equals rank"),
                    (tr - e.trace().rank as f64).abs(),
                    tols.idempotent * m.cond * dec.dim() as f64,
                );
                mats.push(Some(m.matrix));
            }
            _ => mats.push(None),
        }
    }
    for i in 0..pieces.len() {
        for j in (i + 1)..pieces.len() {
            if let (Some(a), Some(b)) = (&mats[i], &mats[j]) {
                let scale = (linalg::spectral_norm(a) * linalg::spectral_norm(b)).max(1.0);
                let norm = (a * b).norm().max((b * a).norm());
                report.check_le(format!("pieces {i},{j} annihilate"), norm / scale, tols.idempotent);
            }
        }
    }

    let union = Region::union(partition.to_vec());
    let whole = dec.riesz_idempotent(&union)?;
    match sum_annihilating(&pieces) {
        Ok(sum) => {
            report.check_le("sum of pieces equals idempotent of the union", sum.distance(&whole)?, tols.subspace);
        }
        Err(e) => {
            report.check_true(format!("sum of pieces exists ({e})"), false);
        }
    }
    let rank_sum: usize = pieces.iter().map(|e| e.trace().rank).sum();
    report.check_eq("trace additivity in rank arithmetic", rank_sum, whole.trace().rank);
    report.check_le("pieces of a partition sum to the identity", whole.distance(&Idempotent::identity(dec.dim()))?, tols.subspace);
    Ok(report)
}

/// `K(A) ∧ K(B) = K(A ∩ B)`, `K(A ∪ B) = K(A) ∨ K(B)` and
/// `K_T(B) = K_{T^*}((B^c)^*)^⊥`, the last via a fresh decomposition of `T^H`.
pub fn verify_lattice_identities(dec: &JointDecomposition, a: &Region, b: &Region) -> Result<Report> {
    if dec.arity() != 1 {
        return Err(Error::DimensionMismatch("lattice identities take a single operator".into()));
    }
    let mut report = Report::new("lattice identities");
    let tol = dec.tolerances().subspace;
    let ka = dec.spectral_projection(a)?;
    let kb = dec.spectral_projection(b)?;
    let k_meet = dec.spectral_projection(&Region::intersection(vec![a.clone(), b.clone()]))?;
    let k_join = dec.spectral_projection(&Region::union(vec![a.clone(), b.clone()]))?;
    report.check_le("K(A) meet K(B) = K(A cap B)", ka.meet(&kb)?.distance(&k_meet)?, tol);
    report.check_le("K(A) join K(B) = K(A cup B)", ka.join(&kb)?.distance(&k_join)?, tol);

    let t = &dec.tuple().mats()[0];
    let adjoint = JointDecomposition::compute_with(
        &super::CommutingTuple::single(t.adjoint())?,
        dec.tolerances(),
    )?;
    for (name, region, k) in [("A", a, &ka), ("B", b, &kb)] {
        let dual = adjoint.spectral_projection(&Region::conjugate(Region::complement(region.clone())))?;
        report.check_le(format!("K_T({name}) = K_T*(({name}^c)^*)^perp"), dual.complement().distance(k)?, tol);
    }
    Ok(report)
}

/// With `P` invariant for `T`: `K_{T|P}(B)`, mapped back through the frame of
/// `P`, equals `K_T(B) ∧ P`.
pub fn verify_restriction_identity(t: &CMatrix, p: &Subspace, b: &Region) -> Result<Report> {
    let mut report = Report::new("restriction identity");
    let dec = JointDecomposition::of_matrix(t)?;
    let tol = dec.tolerances().subspace;
    let rhs = dec.spectral_projection(b)?.meet(p)?;
    let lhs = if p.is_zero() {
        Subspace::zero(p.ambient_dim())
    } else {
        let r = restrict(t, p)?;
        let inner = JointDecomposition::of_matrix(&r)?.spectral_projection(b)?;
        Subspace::span(&(p.frame() * inner.frame()))
    };
    report.check_le("K_{T|P}(B) = K_T(B) meet P", lhs.distance(&rhs)?, tol);
    report.check_eq("dimensions agree", lhs.dim(), rhs.dim());
    Ok(report)
}

/// `P(B)` contains every invariant subspace generated by clusters in `B`, and
/// no cluster space outside `B`.
pub fn verify_maximality<R: Rng + ?Sized>(
    dec: &JointDecomposition,
    b: &Region,
    trials: usize,
    rng: &mut R,
) -> Result<Report> {
    let mut report = Report::new("maximality");
    let tol = dec.tolerances().subspace;
    let d = dec.dim();
    let mask = dec.classify(b)?;
    let pb = dec.spectral_projection(b)?;
    let inside: Vec<&Subspace> = dec.clusters().iter().zip(&mask).filter(|(_, &m)| m).map(|(c, _)| &c.space).collect();

    if inside.len() <= 10 {
        for bits in 0u32..(1 << inside.len()) {
            let q = Subspace::join_all(d, inside.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, s)| *s))?;
            report.check_le(format!("cluster subset {bits:#b} contained in P(B)"), pb.containment_residual(&q)?, tol);
        }
    }
    for trial in 0..trials {
        let mut parts: Vec<Subspace> = Vec::new();
        for s in &inside {
            if rng.random_bool(0.5) {
                parts.push(random_invariant_piece(dec, s, rng)?);
            }
        }
        let q = Subspace::join_all(d, parts.iter())?;
        report.check_le(format!("random invariant subspace {trial} contained in P(B)"), pb.containment_residual(&q)?, tol);
    }
    for (c, m) in dec.clusters().iter().zip(&mask) {
        if !m {
            let escape = pb.containment_residual(&c.space)?;
            report.check_true(
                format!("cluster at {} outside B is not in P(B)", linalg::fmt_point(&c.point)),
                escape > tol,
            );
        }
    }
    Ok(report)
}

/// A random tuple-invariant subspace of a cluster space: for a single
/// operator, a leading Schur block of its restriction; otherwise the whole space.
fn random_invariant_piece<R: Rng + ?Sized>(dec: &JointDecomposition, s: &Subspace, rng: &mut R) -> Result<Subspace> {
    if dec.arity() != 1 || s.dim() <= 1 {
        return Ok(s.clone());
    }
    let r = restrict(&dec.tuple().mats()[0], s)?;
    let schur = linalg::schur(&r)?;
    let k = rng.random_range(1..=s.dim());
    Ok(Subspace::span(&(s.frame() * schur.q.columns(0, k))))
}

/// Partial hyperinvariance: `K(B)` is invariant under random polynomials of
/// degree at most 2 in the tuple.
pub fn verify_polynomial_invariance<R: Rng + ?Sized>(
    dec: &JointDecomposition,
    b: &Region,
    trials: usize,
    rng: &mut R,
) -> Result<Report> {
    let mut report = Report::new("polynomial invariance");
    let tol = dec.tolerances().invariance;
    let k = dec.spectral_projection(b)?;
    let n = dec.arity();
    for trial in 0..trials {
        let mut terms: Vec<(C64, Vec<u32>)> = Vec::new();
        for _ in 0..4 {
            let mut exp = vec![0u32; n];
            for _ in 0..rng.random_range(0..=2) {
                exp[rng.random_range(0..n)] += 1;
            }
            terms.push((C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)), exp));
        }
        let refs: Vec<(C64, &[u32])> = terms.iter().map(|(c, e)| (*c, e.as_slice())).collect();
        let q = Polynomial::from_terms(n, &refs)?.eval_matrices(dec.tuple().mats())?;
        let f = k.frame();
        let qf = &q * f;
        let residual = (&qf - f * (f.adjoint() * &qf)).norm();
        let scale = linalg::frobenius(&q).max(f64::MIN_POSITIVE);
        report.check_le(format!("random polynomial {trial} leaves K(B) invariant"), residual / scale, tol);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, diag, real_matrix};
    use crate::spectral::CommutingTuple;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dec1(t: CMatrix) -> JointDecomposition {
        JointDecomposition::of_matrix(&t).unwrap()
    }

    fn assert_pass(r: &Report) {
        let failures: Vec<_> = r.failures().collect();
        assert!(failures.is_empty(), "{}: {failures:?}", r.name);
    }

    #[test]
    fn sigma_additivity_for_disk_and_complement() {
        let dec = dec1(diag(&[c64(0.0, 0.0), c64(3.0, 0.0)]));
        let disk = Region::open_disk(c64(0.0, 0.0), 1.0);
        let r = verify_sigma_additivity(&dec, &[disk.clone(), Region::complement(disk)]).unwrap();
        assert_pass(&r);
        assert_pass(&verify_sigma_additivity(&dec, &[Region::full(1)]).unwrap());
    }

    #[test]
    fn sigma_additivity_flags_overlap() {
        let dec = dec1(diag(&[c64(0.0, 0.0), c64(3.0, 0.0)]));
        let r = verify_sigma_additivity(&dec, &[Region::full(1), Region::open_disk(c64(0.0, 0.0), 1.0)]).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn lattice_on_diagonal() {
        let dec = dec1(diag(&[c64(1.0, 0.0), c64(2.0, 0.0), c64(3.0, 0.0)]));
        let a = Region::open_disk(c64(1.5, 0.0), 0.75);
        let b = Region::open_disk(c64(2.5, 0.0), 0.75);
        assert_pass(&verify_lattice_identities(&dec, &a, &b).unwrap());
        let meet = dec.spectral_projection(&Region::intersection(vec![a.clone(), b])).unwrap();
        assert!(meet.distance(&Subspace::coordinate(3, &[1])).unwrap() < 1e-12);
        assert_pass(&verify_lattice_identities(&dec, &Region::empty(1), &a).unwrap());
    }

    #[test]
    fn lattice_on_non_normal() {
        let dec = dec1(real_matrix(&[&[0.0, 1.0], &[0.0, 1.0]]));
        let a = Region::open_disk(c64(0.0, 0.0), 0.5);
        let b = Region::open_disk(c64(1.0, 0.0), 0.5);
        assert_pass(&verify_lattice_identities(&dec, &a, &b).unwrap());
        assert!(dec.spectral_projection(&Region::intersection(vec![a, b])).unwrap().is_zero());
    }

    #[test]
    fn restriction_identity_examples() {
        let b = Region::open_disk(c64(1.0, 0.0), 0.5);
        let t = real_matrix(&[&[1.0, 1.0], &[0.0, 2.0]]);
        assert_pass(&verify_restriction_identity(&t, &Subspace::coordinate(2, &[0]), &b).unwrap());
        let s = real_matrix(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let t = &s * diag(&[c64(1.0, 0.0), c64(2.0, 0.0)]) * linalg::inverse(&s).unwrap();
        let ones = Subspace::span(&real_matrix(&[&[1.0], &[1.0]]));
        assert_pass(&verify_restriction_identity(&t, &ones, &Region::open_disk(c64(2.0, 0.0), 0.5)).unwrap());
        assert_pass(&verify_restriction_identity(&t, &ones, &b).unwrap());
    }

    #[test]
    fn maximality_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dec = dec1(diag(&[c64(1.0, 0.0), c64(2.0, 0.0), c64(2.0, 0.0)]));
        let b = Region::open_disk(c64(2.0, 0.0), 0.5);
        assert_pass(&verify_maximality(&dec, &b, 10, &mut rng).unwrap());
        assert_pass(&verify_maximality(&dec, &Region::full(1), 5, &mut rng).unwrap());
    }

    #[test]
    fn box_formula_on_pair() {
        let s = real_matrix(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let si = linalg::inverse(&s).unwrap();
        let t1 = &s * diag(&[c64(1.0, 0.0), c64(2.0, 0.0)]) * &si;
        let t2 = &s * diag(&[c64(3.0, 0.0), c64(4.0, 0.0)]) * &si;
        let dec = JointDecomposition::compute(&CommutingTuple::new(vec![t1, t2]).unwrap()).unwrap();
        let boxes = [Region::square(c64(2.0, 0.0), 0.25), Region::square(c64(4.0, 0.0), 0.25)];
        assert_pass(&verify_box_formula(&dec, &boxes).unwrap());
        assert_pass(&verify_box_formula(&dec, &[Region::full(1), Region::full(1)]).unwrap());
    }

    #[test]
    fn polynomial_invariance_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dec = dec1(real_matrix(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0], &[0.0, 0.0, 3.0]]));
        let r = verify_polynomial_invariance(&dec, &Region::open_disk(c64(1.0, 0.0), 0.5), 10, &mut rng).unwrap();
        assert_pass(&r);
    }
}
