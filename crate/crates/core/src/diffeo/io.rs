//! JSON form of a network:
//! `{"dim": 1, "epsilon": 0.01, "basis": {"kind": "sine", "M": 10}, "layers": [[...], ...]}`.
//! 2D nets use `{"kind": "tangent", "N": 3}`, plus `"lipschitz": "reduced"`
//! when that rule is in use. Weights are written with 17 significant digits.

use std::fmt::Write as _;

use serde::Deserialize;

use super::{Basis, Basis1D, Basis2D, DiffeoNet, LipschitzRule};
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NetDoc {
    dim: usize,
    epsilon: f64,
    basis: BasisDoc,
    layers: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisDoc {
    kind: String,
    #[serde(rename = "M")]
    m: Option<usize>,
    #[serde(rename = "N")]
    n: Option<usize>,
    lipschitz: Option<LipschitzRule>,
}

impl DiffeoNet {
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        let basis = match self.basis() {
            Basis::Sine(b) => format!("{{\"kind\": \"sine\", \"M\": {}}}", b.m),
            Basis::Tangent(b) => match b.rule {
                LipschitzRule::Frobenius => format!("{{\"kind\": \"tangent\", \"N\": {}}}", b.n),
                LipschitzRule::Reduced => {
                    format!("{{\"kind\": \"tangent\", \"N\": {}, \"lipschitz\": \"reduced\"}}", b.n)
                }
            },
        };
        let _ = write!(
            s,
            "{{\n  \"dim\": {},\n  \"epsilon\": {:.16e},\n  \"basis\": {},\n  \"layers\": [",
            self.dim(),
            self.epsilon(),
            basis
        );
        for (l, layer) in self.layers().iter().enumerate() {
            s.push_str(if l == 0 { "\n    [" } else { ",\n    [" });
            for (i, w) in layer.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                let _ = write!(s, "{w:.16e}");
            }
            s.push(']');
        }
        s.push_str(if self.n_layers() == 0 { "]\n}\n" } else { "\n  ]\n}\n" });
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetDoc = serde_json::from_str(text)?;
        let basis = match (doc.basis.kind.as_str(), doc.basis.m, doc.basis.n) {
            ("sine", Some(m), None) => Basis::Sine(Basis1D::new(m)),
            ("tangent", None, Some(n)) => {
                Basis::Tangent(Basis2D::with_rule(n, doc.basis.lipschitz.unwrap_or_default()))
            }
            (kind, _, _) => {
                return Err(Error::Parse(format!(
                    "basis must be {{\"kind\": \"sine\", \"M\": ..}} or {{\"kind\": \"tangent\", \"N\": ..}}, got kind {kind:?}"
                )))
            }
        };
        if doc.basis.lipschitz.is_some() && basis.dim() == 1 {
            return Err(Error::Parse("a lipschitz rule only applies to tangent bases".into()));
        }
        if doc.dim != basis.dim() {
            return Err(Error::Dimension { expected: basis.dim(), found: doc.dim });
        }
        DiffeoNet::from_layers(basis, doc.epsilon, doc.layers)
    }
}
