use super::{dyadic_cover_focused, verify_cover, BoxCover, CoverMap, Region};
use crate::error::{Error, Result};
use crate::linalg::{self, Subspace, C64};
use crate::measures::{brown, MapDescriptor};
use crate::regions::coverage;
use crate::report::Report;
use crate::spectral::JointDecomposition;

/// For a pair `(S, T)` and an open `U ⊆ C`: the join over the dyadic cover of
/// `P_S(I(z_n, δ_n)) ∧ P_T(I(w_n, δ_n))` lies below `P_{S+T}(U)` and, once the
/// cover reaches every atom, equals `P_{S,T}(a^{-1}(U))`. The same for the
/// product `ST` and `m^{-1}(U)`.
pub fn verify_preimage_projection(dec: &JointDecomposition, u: &Region, depth: u32) -> Result<Report> {
    if dec.arity() != 2 {
        return Err(Error::DimensionMismatch("preimage projections take a pair (S, T)".into()));
    }
    if u.dim()? != 1 {
        return Err(Error::InvalidRegion("the target U must be a region of C".into()));
    }
    let mut report = Report::new("preimage projection");
    let s = &dec.tuple().mats()[0];
    let t = &dec.tuple().mats()[1];
    let dec_s = dec.marginal(0)?;
    let dec_t = dec.marginal(1)?;
    let points: Vec<(C64, C64)> = dec.clusters().iter().map(|c| (c.point[0], c.point[1])).collect();

    let cases = [
        ("add", CoverMap::Add, MapDescriptor::AddLast, s + t),
        (
            "mul",
            CoverMap::Multiply { norm_bound: linalg::spectral_norm(t) },
            MapDescriptor::MulLast { alpha: C64::new(1.0, 0.0) },
            s * t,
        ),
    ];
    let tol = dec.tolerances().subspace;
    for (name, map, descriptor, combined) in cases {
        let cover = dyadic_cover_focused(u, map, depth, &points)?;
        let mut structural = verify_cover(&cover);
        structural.name = format!("{name} cover");
        report.absorb(structural);

        let joined = cover_join(&dec_s, &dec_t, &cover)?;
        let p_combined = JointDecomposition::compute_with(
            &crate::spectral::CommutingTuple::single(combined)?,
            dec.tolerances(),
        )?
        .spectral_projection(u)?;
        let direct = dec.spectral_projection(&Region::preimage(descriptor, u.clone()))?;

        report.check_le(
            format!("{name}: cover join <= P of combined operator on U"),
            p_combined.containment_residual(&joined)?,
            tol,
        );
        report.check_le(
            format!("{name}: P of combined operator on U = P_(S,T) of preimage"),
            p_combined.distance(&direct)?,
            tol,
        );
        let (covered, preimage) = coverage(&cover, &brown(dec))?;
        report.check_le(format!("{name}: preimage mass missed by cover"), preimage - covered, 1e-12);
        report.check_le(format!("{name}: cover join = P_(S,T) of preimage"), joined.distance(&direct)?, tol);
    }
    Ok(report)
}

fn cover_join(dec_s: &JointDecomposition, dec_t: &JointDecomposition, cover: &BoxCover) -> Result<Subspace> {
    let d = dec_s.dim();
    let mut pieces = Vec::with_capacity(cover.boxes.len());
    for b in &cover.boxes {
        let ps = dec_s.spectral_projection(&Region::square(b.z, b.delta))?;
        if ps.is_zero() {
            continue;
        }
        let pt = dec_t.spectral_projection(&Region::square(b.w, b.delta))?;
        pieces.push(ps.meet(&pt)?);
    }
    Subspace::join_all(d, pieces.iter())
}

/// For open sets `U_k ⊇ B`, `P(B)` lies below every `P(U_k)` and equals their
/// meet once the family separates the clusters.
pub fn verify_general_borel(dec: &JointDecomposition, b: &Region, opens: &[Region]) -> Result<Report> {
    let mut report = Report::new("general Borel");
    let tol = dec.tolerances().subspace;
    let pb = dec.spectral_projection(b)?;
    let mut meet = Subspace::full(dec.dim());
    for (k, u) in opens.iter().enumerate() {
        let pu = dec.spectral_projection(u)?;
        report.check_le(format!("P(B) <= P(U_{k})"), pu.containment_residual(&pb)?, tol);
        meet = meet.meet(&pu)?;
    }
    report.check_le("meet of P(U_k) = P(B)", meet.distance(&pb)?, tol);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, diag};
    use crate::spectral::CommutingTuple;

    fn diagonal_pair() -> JointDecomposition {
        let s = diag(&[c64(0.3, 0.1), c64(-0.4, 0.2), c64(0.6, -0.5)]);
        let t = diag(&[c64(0.2, 0.3), c64(0.7, -0.1), c64(-0.3, 0.4)]);
        JointDecomposition::compute(&CommutingTuple::new(vec![s, t]).unwrap()).unwrap()
    }

    fn assert_pass(r: &Report) {
        let failures: Vec<_> = r.failures().collect();
        assert!(failures.is_empty(), "{}: {failures:?}", r.name);
    }

    #[test]
    fn ball_capturing_one_sum() {
        let dec = diagonal_pair();
        // Sums 0.5+0.4i, 0.3+0.1i, 0.3-0.1i; products differ.
        let u = Region::open_disk(c64(0.5, 0.4), 0.1);
        let r = verify_preimage_projection(&dec, &u, 10).unwrap();
        assert_pass(&r);
    }

    #[test]
    fn everything_and_nothing() {
        let dec = diagonal_pair();
        assert_pass(&verify_preimage_projection(&dec, &Region::open_disk(c64(0.0, 0.0), 50.0), 6).unwrap());
        assert_pass(&verify_preimage_projection(&dec, &Region::open_disk(c64(5.0, 5.0), 0.5), 6).unwrap());
    }

    #[test]
    fn shrinking_balls_isolate_an_atom() {
        let dec = diagonal_pair();
        let p = dec.clusters()[0].point.clone();
        let point = Region::closed_ball(p.clone(), 1e-7);
        let opens: Vec<Region> = (0..8).map(|k| Region::open_ball(p.clone(), (-(k as f64)).exp2())).collect();
        let r = verify_general_borel(&dec, &point, &opens).unwrap();
        assert_pass(&r);
        assert_eq!(dec.spectral_projection(&point).unwrap().dim(), 1);
        assert_pass(&verify_general_borel(&dec, &Region::full(2), &[Region::full(2)]).unwrap());
    }
}
