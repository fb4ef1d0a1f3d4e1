use serde::{Deserialize, Serialize};

use super::{GroupElement, VfPresentation};
use crate::error::{Error, Result};
use crate::whitehead::{
    analyze_graph, build_whitehead_graph, minimize_normalized, normalize_multiword, Multiword, NormalizedMultiword,
};
use crate::words::{conjugator_between, cyclic_normal_form, root_word, Word};

/// The lift of `<h>` to the kernel: `w = h^k` in the kernel basis and its
/// conjugates by every coset representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedMultiword {
    pub element: GroupElement,
    /// Order of the image of `h` in `Q`.
    pub order: u32,
    pub power: Word,
    pub members: Vec<Word>,
    pub normalized: NormalizedMultiword,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
struct LiftJson {
    element: String,
    order: u32,
    power: String,
    members: Vec<String>,
    roots: Vec<String>,
    multiplicity: Vec<usize>,
}

impl LiftedMultiword {
    pub fn to_json(&self, pres: &VfPresentation) -> serde_json::Value {
        let j = LiftJson {
            element: pres.format(&self.element),
            order: self.order,
            power: self.power.to_string(),
            members: self.members.iter().map(Word::to_string).collect(),
            roots: self.normalized.roots().iter().map(|r| r.to_string()).collect(),
            multiplicity: self.normalized.multiplicity().to_vec(),
        };
        serde_json::to_value(j).expect("lift serializes")
    }
}

/// Representatives of `Comm(<h>) / <h>`, the identity first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commensurator {
    pub representatives: Vec<GroupElement>,
}

impl Commensurator {
    /// `[Comm(<h>) : <h>]`.
    pub fn index(&self) -> usize {
        self.representatives.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorReport {
    pub element: String,
    pub factor: bool,
    #[serde(rename = "almostMalnormal")]
    pub almost_malnormal: bool,
    #[serde(rename = "commensuratorIndex")]
    pub commensurator_index: usize,
    #[serde(rename = "liftBasic")]
    pub lift_basic: bool,
    /// The minimal Whitehead graph of the lift has a 2-connected component.
    #[serde(rename = "twoConnected")]
    pub two_connected: bool,
}

impl VfPresentation {
    pub fn lift_multiword(&self, h: &GroupElement) -> Result<LiftedMultiword> {
        let order = self.image_order(h);
        let hk = self.pow(h, i64::from(order));
        let power = self.kernel_word(&hk)?;
        if power.is_empty() {
            return Err(Error::FiniteOrder);
        }
        let members =
            self.coset_reps().iter().map(|g| self.kernel_word(&self.conjugate(g, &hk))).collect::<Result<Vec<_>>>()?;
        let normalized = normalize_multiword(&Multiword::new(self.kernel_basis(), members.clone())?)?;
        Ok(LiftedMultiword { element: h.clone(), order, power, members, normalized })
    }

    /// Whether `z` lies in `<h>`, given `w = h^k` in the kernel.
    fn in_cyclic(&self, z: &GroupElement, h: &GroupElement, k: u32, w: &Word) -> bool {
        (0..i64::from(k)).any(|i| {
            let shifted = self.mul(z, &self.pow(h, -i));
            if self.coset(&shifted) != 0 {
                return false;
            }
            let Ok(u) = self.kernel_word(&shifted) else {
                return false;
            };
            let bound = u.len() as i64 + 1;
            (-bound..=bound).any(|n| w.pow(n) == u)
        })
    }

    /// The commensurator of `<h>`, exactly: `g = f g_p` commensurates `<h>`
    /// iff `f` carries the kernel root of `g_p w g_p^-1` to the root of
    /// `w` or its inverse, which pins `f` down to a coset of that root.
    pub fn commensurator(&self, h: &GroupElement) -> Result<Commensurator> {
        let lift = self.lift_multiword(h)?;
        let w = &lift.power;
        let nf = cyclic_normal_form(w)?;
        let (r, e) = root_word(&nf.core);
        let rho = nf.conjugator.mul(&r).mul(&nf.conjugator.inverse());
        let rho_g = self.expand(&rho);
        let mut candidates = vec![];
        for (p, g) in self.coset_reps().iter().enumerate() {
            let f0 = if p == 0 {
                Some(Word::identity(self.kernel_basis()))
            } else {
                let rho_p = self.kernel_word(&self.conjugate(g, &rho_g))?;
                conjugator_between(&rho_p, &rho).or_else(|| conjugator_between(&rho_p, &rho.inverse()))
            };
            if let Some(f0) = f0 {
                let base = self.mul(&self.expand(&f0), g);
                for j in 0..e as i64 {
                    candidates.push(self.mul(&self.pow(&rho_g, j), &base));
                }
            }
        }
        let mut representatives: Vec<GroupElement> = vec![];
        for c in candidates {
            let known =
                representatives.iter().any(|y| self.in_cyclic(&self.mul(&self.inverse(y), &c), h, lift.order, w));
            if !known {
                representatives.push(c);
            }
        }
        Ok(Commensurator { representatives })
    }

    pub fn factor_report(&self, h: &GroupElement) -> Result<FactorReport> {
        let lift = self.lift_multiword(h)?;
        let comm = self.commensurator(h)?;
        let (min, _) = minimize_normalized(&lift.normalized);
        let graph = analyze_graph(&build_whitehead_graph(&min));
        let lift_basic = graph.all_isolated_edges();
        let almost_malnormal = comm.index() == 1;
        Ok(FactorReport {
            element: self.format(h),
            factor: almost_malnormal && lift_basic,
            almost_malnormal,
            commensurator_index: comm.index(),
            lift_basic,
            two_connected: graph.components.iter().any(|c| c.two_connected),
        })
    }

    /// Whether `<h>` is a virtually cyclic factor: equal to its
    /// commensurator with a basic lift.
    pub fn is_factor(&self, h: &GroupElement) -> Result<bool> {
        Ok(self.factor_report(h)?.factor)
    }
}
