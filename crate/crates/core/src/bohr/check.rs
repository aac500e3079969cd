use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{BohrCertificate, BohrSystem};
use crate::dynamics::bump;
use crate::error::{Error, Result};
use crate::registry::SystemSpec;
use crate::symbolic::BiInfSeq;
use crate::toral::TorusPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub ok: bool,
    /// Smallest `n` whose partial-sum row, or the orbit stretch feeding it, is wrong.
    pub first_failing_n: Option<usize>,
    pub failures: Vec<String>,
    pub rows_checked: usize,
}

struct Failures {
    list: Vec<String>,
    first_n: Option<usize>,
}

impl Failures {
    fn add(&mut self, n: Option<usize>, msg: String) {
        if let Some(n) = n {
            self.first_n = Some(self.first_n.map_or(n, |f| f.min(n)));
        }
        if self.list.len() < 32 {
            self.list.push(msg);
        }
    }
}

/// Re-verifies a certificate from its stored data: iterates the base point
/// (or checks the stored orbit step by step), re-evaluates `φ`, and re-adds
/// both columns. Never errors; problems become failures.
pub fn check_certificate<S: BohrSystem>(sys: &S, cert: &BohrCertificate<S::Point>) -> CheckReport
where
    S::Point: Serialize + DeserializeOwned,
{
    let mut f = Failures {
        list: Vec::new(),
        first_n: None,
    };
    let rows = run(sys, cert, &mut f);
    CheckReport {
        ok: f.list.is_empty(),
        first_failing_n: f.first_n,
        failures: f.list,
        rows_checked: rows,
    }
}

fn run<S: BohrSystem>(sys: &S, cert: &BohrCertificate<S::Point>, f: &mut Failures) -> usize
where
    S::Point: Serialize + DeserializeOwned,
{
    let (m, r, l, j, k) = (cert.m, cert.r, cert.l, cert.j, cert.k);
    if sys.system_spec() != cert.system {
        f.add(None, "certificate system differs from the checking system".into());
        return 0;
    }
    if m == 0 || m != j + k + l || cert.n_max == 0 {
        f.add(None, format!("inconsistent block data m = {m}, j + k + l = {}", j + k + l));
        return 0;
    }
    let eps = cert.epsilon;
    let (x, y) = (&cert.phi.center_x, &cert.phi.center_y);
    if cert.phi.epsilon != eps || !(eps > 0.0) {
        f.add(None, "φ width differs from ε".into());
    }
    if sys.distance(x, y) < 3.0 * eps {
        f.add(None, "φ centers closer than 3ε".into());
    }
    if cert.shadow_epsilon > eps + cert.tolerances.identity_per_term {
        f.add(None, format!("shadowing radius {:e} exceeds ε", cert.shadow_epsilon));
    }
    let tol = cert.tolerances.identity_per_term.max(sys.identity_tolerance());
    let step_tol = sys.step_tolerance();
    let prefix = r + l;
    let end = prefix + cert.n_max * m;
    // Block index n whose partial sum first includes time i.
    let n_of = |i: usize| if i < prefix { 1 } else { ((i - prefix) / m + 1).min(cert.n_max) };

    // S, by direct iteration.
    let mut s_orbit = vec![cert.s_base.clone()];
    for _ in 1..cert.s_period.max(1) {
        let next = sys.forward(s_orbit.last().expect("nonempty"));
        s_orbit.push(next);
    }
    if cert.s_period == 0 || !sys.same_point(&sys.forward(s_orbit.last().expect("nonempty")), &cert.s_base) {
        f.add(None, "S is not a periodic orbit of the stated period".into());
        return 0;
    }

    // Chains: length m + 1, 2δ steps, x / y in the middle, z at both ends,
    // nothing else within 3ε of x or y.
    let t = s_orbit.len();
    let zi = cert.gamma_window.z_index;
    if zi >= t {
        f.add(None, "z index outside S".into());
        return 0;
    }
    for (name, chain, centre) in [("x", &cert.chain_x, x), ("y", &cert.chain_y, y)] {
        let pts = &chain.points;
        if pts.len() != m + 1 {
            f.add(None, format!("chain_{name} has {} points, expected {}", pts.len(), m + 1));
            return 0;
        }
        if chain.delta > 2.0 * cert.delta * (1.0 + 1e-12) {
            f.add(None, format!("chain_{name} claims δ' = {:e} > 2δ", chain.delta));
        }
        for (i, w) in pts.windows(2).enumerate() {
            let d = sys.distance(&sys.forward(&w[0]), &w[1]);
            if d > 2.0 * cert.delta + step_tol {
                f.add(None, format!("chain_{name} step {i} has defect {d:e} > 2δ"));
            }
        }
        if !sys.same_point(&pts[j + k], centre) {
            f.add(None, format!("chain_{name} does not pass through {name} at index j + k"));
        }
        if !sys.same_point(&pts[0], &s_orbit[zi]) || !sys.same_point(&pts[m], &s_orbit[zi]) {
            f.add(None, format!("chain_{name} does not start and end at z"));
        }
        for (i, p) in pts.iter().enumerate() {
            if i != j + k && (sys.distance(p, x) < 3.0 * eps || sys.distance(p, y) < 3.0 * eps) {
                f.add(None, format!("chain_{name} entry {i} lies within 3ε of x or y"));
            }
        }
    }

    // Sequence and block selectors.
    let a = cert.sequence.generate(end + 1);
    if a.iter().any(|v| v.abs() > cert.sequence.bound) {
        f.add(None, "sequence exceeds its bound".into());
    }
    let blocks: Vec<char> = cert.gamma_window.blocks.chars().collect();
    if blocks.len() != cert.n_max || cert.gamma_window.len != end + 1 {
        f.add(None, "Γ window has the wrong shape".into());
        return 0;
    }
    for h in 1..=cert.n_max {
        let want = if a[r + h * m] > 0.0 { 'x' } else { 'y' };
        if blocks[h - 1] != want {
            f.add(Some(h), format!("block {h} selects {} but a_(r+hm) calls for {want}", blocks[h - 1]));
        }
    }
    let gamma_at = |i: usize| -> &S::Point {
        if i <= prefix {
            let idx = (zi as i64 - (prefix - i) as i64).rem_euclid(t as i64) as usize;
            &s_orbit[idx]
        } else if i == end {
            &s_orbit[zi]
        } else {
            let h = (i - prefix) / m;
            let chain = if blocks[h] == 'x' { &cert.chain_x } else { &cert.chain_y };
            &chain.points[(i - prefix) % m]
        }
    };

    // The orbit of p: stored (checked step by step) or iterated here.
    let stored = cert.shadow_orbit.as_ref();
    if let Some(o) = stored {
        if o.len() != end + 1 {
            f.add(None, format!("stored orbit has {} points, expected {}", o.len(), end + 1));
            return 0;
        }
        if !sys.same_point(&o[0], &cert.shadow_base) {
            f.add(Some(1), "stored orbit does not start at p".into());
        }
    }
    let mut q = cert.shadow_base.clone();
    let phi = |p: &S::Point| -> f64 {
        let bx = bump(sys.distance(p, x), eps).unwrap_or(f64::NAN);
        let by = bump(sys.distance(p, y), eps).unwrap_or(f64::NAN);
        bx - by
    };

    let mut weighted = 0.0;
    let mut checkpoint = 0.0;
    let mut row = 0usize;
    for i in 0..=end {
        let cur: S::Point = match stored {
            Some(o) => {
                if i > 0 {
                    let d = sys.distance(&sys.forward(&o[i - 1]), &o[i]);
                    if d > step_tol {
                        f.add(Some(n_of(i)), format!("stored orbit step {i} has residual {d:e}"));
                    }
                }
                o[i].clone()
            }
            None => {
                if i > 0 {
                    q = sys.forward(&q);
                }
                q.clone()
            }
        };
        let dg = sys.distance(&cur, gamma_at(i));
        if dg > eps + tol {
            f.add(Some(n_of(i)), format!("f^{i}(p) is {dg:e} from Γ_{i}, beyond ε"));
        }
        if i == end {
            break;
        }
        let ph = phi(&cur);
        weighted += a[i] * ph;
        if i > r && (i - r) % m == 0 {
            checkpoint += a[i].abs();
        }
        if i + 1 > prefix && (i + 1 - prefix) % m == 0 {
            let n = (i + 1 - prefix) / m;
            let slack = tol * (i + 1) as f64;
            match cert.partial_sums.get(row) {
                Some(rw) if rw.n == n => {
                    let ok = (rw.weighted - weighted).abs() <= slack
                        && (rw.checkpoint - checkpoint).abs() <= slack
                        && (weighted - checkpoint).abs() <= slack;
                    if !ok {
                        f.add(
                            Some(n),
                            format!(
                                "row n = {n}: stored ({}, {}), recomputed ({weighted}, {checkpoint})",
                                rw.weighted, rw.checkpoint
                            ),
                        );
                    }
                }
                _ => f.add(Some(n), format!("partial-sum row for n = {n} is missing")),
            }
            row += 1;
        }
    }
    if cert.partial_sums.len() != cert.n_max {
        f.add(None, format!("{} partial-sum rows, expected {}", cert.partial_sums.len(), cert.n_max));
    }
    let avg = checkpoint / cert.n_max as f64;
    if (cert.checkpoint_average - avg).abs() > crate::CERT_TOL || (cert.lower_bound - avg / m as f64).abs() > crate::CERT_TOL {
        f.add(None, format!("lower bound {} does not match {}", cert.lower_bound, avg / m as f64));
    }
    if !(cert.lower_bound > 0.0) {
        f.add(None, "lower bound is not positive".into());
    }
    row
}

/// Parses a certificate of either system family and checks it.
pub fn check_certificate_value(v: &Value) -> Result<CheckReport> {
    let spec: SystemSpec = serde_json::from_value(
        v.get("system")
            .cloned()
            .ok_or_else(|| Error::Input("certificate has no system".into()))?,
    )
    .map_err(|e| Error::Input(format!("bad system in certificate: {e}")))?;
    let bad = |e: serde_json::Error| Error::Input(format!("malformed certificate: {e}"));
    Ok(match spec {
        SystemSpec::Sft(sys) => {
            sys.validate()?;
            let cert: BohrCertificate<BiInfSeq> = serde_json::from_value(v.clone()).map_err(bad)?;
            check_certificate(&sys, &cert)
        }
        SystemSpec::Toral(map) => {
            let cert: BohrCertificate<TorusPoint> = serde_json::from_value(v.clone()).map_err(bad)?;
            check_certificate(&map, &cert)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bohr::{certify_bohr, default_input_sft, default_input_toral, SignSequenceSpec};
    use crate::dynamics::MetricSystem;
    use crate::symbolic::SftSystem;
    use crate::toral::ToralMap;

    fn sft_cert(n_max: usize) -> (SftSystem, BohrCertificate<BiInfSeq>) {
        let sys = SftSystem::full_shift(2);
        let seq = SignSequenceSpec::bernoulli(0.5, 7).unwrap();
        let input = default_input_sft(&sys, seq, n_max).unwrap();
        let cert = certify_bohr(&sys, &input).unwrap();
        (sys, cert)
    }

    #[test]
    fn builder_output_checks() {
        let (sys, cert) = sft_cert(300);
        let rep = check_certificate(&sys, &cert);
        assert!(rep.ok, "{rep:?}");
        assert_eq!(rep.rows_checked, 300);
        let v = serde_json::to_value(&cert).unwrap();
        assert!(check_certificate_value(&v).unwrap().ok);
    }

    #[test]
    fn corrupted_row_fails_at_its_n() {
        let (sys, mut cert) = sft_cert(100);
        cert.partial_sums[41].weighted += 1.0;
        let rep = check_certificate(&sys, &cert);
        assert!(!rep.ok);
        assert_eq!(rep.first_failing_n, Some(42));
    }

    #[test]
    fn perturbed_base_point_fails() {
        let (sys, mut cert) = sft_cert(100);
        // Flip coordinate 1: d = 1/2 ≥ 3ε = 3/8.
        let p = cert.shadow_base.clone();
        let flipped: Vec<u8> = vec![p.at(0), 1 - p.at(1)];
        cert.shadow_base = BiInfSeq::splice(&p, &flipped, 0, &p);
        assert!(sys.distance(&cert.shadow_base, &p) >= 3.0 * cert.epsilon);
        let rep = check_certificate(&sys, &cert);
        assert!(!rep.ok);
        assert!(rep.first_failing_n.is_some());
    }

    #[test]
    fn toral_stored_orbit_is_checked() {
        let map = ToralMap::cat();
        let input = default_input_toral(&map, SignSequenceSpec::constant_one(), 50).unwrap();
        let mut cert = certify_bohr(&map, &input).unwrap();
        assert!(check_certificate(&map, &cert).ok);
        let v = serde_json::to_value(&cert).unwrap();
        assert!(check_certificate_value(&v).unwrap().ok);
        let c = cert.shadow_base.coords();
        cert.shadow_base = TorusPoint::from_coords([c[0] + 3.0 * cert.epsilon, c[1]]);
        assert!(!check_certificate(&map, &cert).ok);
    }
}
