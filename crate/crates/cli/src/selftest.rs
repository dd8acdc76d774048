use crate::commands::CliError;
use serde::Serialize;
use spidercert::certifier::{aggregation_identity, certify, verify_certificate_with, CertKind, ParamChoice, VerifyMode};
use spidercert::feaspoint::f_properties;
use spidercert::graph::{SignedGraph, DEFAULT_MAX_SUPPORT};
use spidercert::spider::{build_psi, build_spider, canonical_alpha, verify_psi_with};
use spidercert::Tolerances;

#[derive(Debug, Serialize)]
pub struct Item {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub items: Vec<Item>,
    pub pass: bool,
}

pub fn fixtures() -> Result<Vec<(&'static str, SignedGraph)>, spidercert::Error> {
    let signed_c4 = SignedGraph::new(4, [(0, 1, 1, 1), (1, 2, 1, -1), (2, 3, 1, 1), (3, 0, 1, 1)])?;
    Ok(vec![
        ("K3", SignedGraph::complete(3)?),
        ("P4", SignedGraph::path(4)?),
        ("C5", SignedGraph::cycle(5)?),
        ("signed C4", signed_c4),
    ])
}

pub fn run(tol: &Tolerances) -> Result<Report, CliError> {
    let mut items = Vec::new();
    let graphs = fixtures()?;
    for (name, g) in &graphs {
        for &(k, ell) in &[(2, 1), (3, 1), (2, 2)] {
            for kind in [CertKind::TwoXor, CertKind::MaxCut] {
                let checks = aggregation_identity(g, kind, k, ell, canonical_alpha(k, ell), DEFAULT_MAX_SUPPORT)?;
                let agg = checks.iter().find(|c| c.name == "aggregation").expect("aggregation check");
                items.push(Item {
                    name: format!("aggregation {name} spider({k},{ell}) {kind}"),
                    pass: checks.iter().all(|c| c.pass),
                    detail: format!("max entry residual {:.3e}", agg.residual),
                });
            }
        }
        for &(k, ell) in &[(3, 1), (4, 1)] {
            for kind in [CertKind::TwoXor, CertKind::MaxCut] {
                let cert = certify(g, kind, ParamChoice::Explicit { k, ell })?;
                let rep = verify_certificate_with(&cert, g, VerifyMode::exhaustive(), tol)?;
                let failed: Vec<&str> = rep.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
                items.push(Item {
                    name: format!("certificate {name} spider({k},{ell}) {kind}"),
                    pass: rep.pass,
                    detail: if failed.is_empty() { format!("{} checks", rep.checks.len()) } else { format!("failed: {}", failed.join(", ")) },
                });
            }
        }
    }
    for &(k, ell) in &[(3, 1), (4, 1), (9, 2), (16, 2), (27, 3)] {
        let rep = verify_psi_with(&build_psi(&build_spider(k, ell)?, canonical_alpha(k, ell))?, tol);
        items.push(Item {
            name: format!("spider identities ({k},{ell})"),
            pass: rep.pass,
            detail: format!("c0 = {:.6}, min eigenvalue {:.3e}", rep.inner[0], rep.min_eigenvalue),
        });
    }
    let fp = f_properties(10_001);
    items.push(Item {
        name: "f oddness and linear lower bound".into(),
        pass: fp.pass,
        detail: format!("odd residual {:.1e}, margin {:.3e}", fp.odd_residual, fp.linear_margin),
    });
    let pass = items.iter().all(|i| i.pass);
    Ok(Report { items, pass })
}
