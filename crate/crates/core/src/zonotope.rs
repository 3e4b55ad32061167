//! Zonotopes `center + Σ conv{0, a_i}`: support function, vertices,
//! membership, containment with separating hyperplanes, and norm maxima.

use serde::{Deserialize, Serialize};

use crate::arrangement::{Arrangement, Hyperplane, Sign};
use crate::error::{input, Error, Result};
use crate::linalg::{add, check_dim, dot, is_zero_vec, neg, sub, zeros, RMatrix, RVector};
use crate::lp::{lp_maximize, LpResult, Polyhedron};
use crate::norm::{NormValue, PNorm};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ZonotopeJson", into = "ZonotopeJson")]
pub struct Zonotope {
    generators: Vec<RVector>,
    center: RVector,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZonotopeJson {
    generators: Vec<Vec<Rational>>,
    #[serde(default)]
    center: Option<Vec<Rational>>,
}

impl TryFrom<ZonotopeJson> for Zonotope {
    type Error = Error;

    fn try_from(j: ZonotopeJson) -> Result<Self> {
        let dim = match (&j.center, j.generators.first()) {
            (Some(c), _) => c.len(),
            (None, Some(g)) => g.len(),
            (None, None) => return input("zonotope without generators needs a center"),
        };
        let center = j.center.unwrap_or_else(|| zeros(dim));
        Zonotope::with_center(j.generators, center)
    }
}

impl From<Zonotope> for ZonotopeJson {
    fn from(z: Zonotope) -> Self {
        ZonotopeJson { generators: z.generators, center: Some(z.center) }
    }
}

/// Half-space `{y : direction·y <= offset}` containing a zonotope but not a
/// given point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separator {
    pub direction: RVector,
    pub offset: Rational,
}

impl Separator {
    /// `point` lies strictly beyond the offset and the zonotope strictly
    /// inside it.
    pub fn separates(&self, point: &[Rational], z: &Zonotope) -> bool {
        point.len() == self.direction.len()
            && dot(point, &self.direction) > self.offset
            && z.support(&self.direction).0 < self.offset
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContainmentVerdict {
    pub contained: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<RVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separator: Option<Separator>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormMax {
    pub value: NormValue,
    pub argmax: RVector,
}

impl Zonotope {
    /// Zonotope at the origin. Zero generators are dropped.
    pub fn new(dim: usize, generators: Vec<RVector>) -> Result<Self> {
        Self::with_center(generators, zeros(dim))
    }

    pub fn with_center(generators: Vec<RVector>, center: RVector) -> Result<Self> {
        let mut gens = Vec::with_capacity(generators.len());
        for g in generators {
            check_dim(center.len(), g.len())?;
            if !is_zero_vec(&g) {
                gens.push(g);
            }
        }
        Ok(Zonotope { generators: gens, center })
    }

    /// A single point.
    pub fn point(center: RVector) -> Self {
        Zonotope { generators: vec![], center }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn generators(&self) -> &[RVector] {
        &self.generators
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn center(&self) -> &[Rational] {
        &self.center
    }

    /// Generators as the columns of a `d x n` matrix.
    pub fn generator_matrix(&self) -> RMatrix {
        RMatrix::from_cols(&self.generators, self.dim()).expect("generators share the dimension")
    }

    pub fn translate(&self, t: &[Rational]) -> Zonotope {
        Zonotope { generators: self.generators.clone(), center: add(&self.center, t) }
    }

    /// Image under `x -> s·x`.
    pub fn scale(&self, s: &Rational) -> Zonotope {
        let scale = |v: &RVector| v.iter().map(|x| x * s).collect::<RVector>();
        let generators = if s.is_zero() { vec![] } else { self.generators.iter().map(scale).collect() };
        Zonotope { generators, center: scale(&self.center) }
    }

    /// `max_{y ∈ Z} direction·y` and a maximiser (generators with
    /// `a·direction > 0` switched on).
    pub fn support(&self, direction: &[Rational]) -> (Rational, RVector) {
        let mut value = dot(&self.center, direction);
        let mut argmax = self.center.clone();
        for a in &self.generators {
            let s = dot(a, direction);
            if s.is_positive() {
                value += s;
                for (x, ai) in argmax.iter_mut().zip(a) {
                    *x += ai;
                }
            }
        }
        (value, argmax)
    }

    /// Exact vertex set, sorted lexicographically. Each cell of the central
    /// arrangement `{x : a_i·x = 0}` is the normal cone of one vertex.
    pub fn vertices(&self) -> Vec<RVector> {
        let arr = self.dual_arrangement();
        let mut out: Vec<RVector> = arr
            .cells()
            .iter()
            .map(|cell| {
                let mut v = self.center.clone();
                for (i, a) in self.generators.iter().enumerate() {
                    if arr.original_sign(&cell.signs, i) == Sign::Plus {
                        for (x, ai) in v.iter_mut().zip(a) {
                            *x += ai;
                        }
                    }
                }
                v
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// The central arrangement `{x : a_i·x = 0}`; its cells are the normal
    /// cones of the vertices.
    pub fn dual_arrangement(&self) -> Arrangement {
        let planes = self
            .generators
            .iter()
            .map(|a| Hyperplane::new(a.clone(), Rational::zero()).expect("generators are nonzero"))
            .collect();
        Arrangement::new(self.dim(), planes).expect("generators share the dimension")
    }

    pub fn contains(&self, x: &[Rational]) -> Result<bool> {
        Ok(self.separate(x)?.is_none())
    }

    /// `None` if `x ∈ Z`, otherwise a separating half-space read off the
    /// Farkas certificate of `x = c + Gλ, 0 <= λ <= 1`.
    pub fn separate(&self, x: &[Rational]) -> Result<Option<Separator>> {
        check_dim(self.dim(), x.len())?;
        let d = self.dim();
        let n = self.num_generators();
        let g = self.generator_matrix();
        let rhs = sub(x, &self.center);
        let mut lam = Polyhedron::universe(n);
        for i in 0..d {
            let row = g.row(i).to_vec();
            lam.push(row.clone(), rhs[i].clone())?;
            lam.push(neg(&row), -&rhs[i])?;
        }
        for j in 0..n {
            let mut e = zeros(n);
            e[j] = Rational::one();
            lam.push(e.clone(), Rational::one())?;
            e[j] = -Rational::one();
            lam.push(e, Rational::zero())?;
        }
        match lp_maximize(&zeros(n), &lam)? {
            LpResult::Infeasible { farkas } => {
                // rows 2i / 2i+1 carry +G_i / -G_i
                let direction: RVector = (0..d).map(|i| &farkas[2 * i + 1] - &farkas[2 * i]).collect();
                let beyond = dot(x, &direction);
                let (sup, _) = self.support(&direction);
                let offset = (beyond + sup) / Rational::from_integer(2);
                let sep = Separator { direction, offset };
                debug_assert!(sep.separates(x, self));
                Ok(Some(sep))
            }
            _ => Ok(None),
        }
    }

    /// Decides `inner ⊆ outer` by testing every vertex of `inner`, starting
    /// from the lexicographically largest.
    pub fn containment(inner: &Zonotope, outer: &Zonotope) -> Result<ContainmentVerdict> {
        check_dim(outer.dim(), inner.dim())?;
        for v in inner.vertices().into_iter().rev() {
            if let Some(sep) = outer.separate(&v)? {
                return Ok(ContainmentVerdict { contained: false, witness: Some(v), separator: Some(sep) });
            }
        }
        Ok(ContainmentVerdict { contained: true, witness: None, separator: None })
    }

    /// Maximum of a convex norm over the zonotope, attained at a vertex.
    pub fn lp_norm_max(&self, p: &PNorm) -> NormMax {
        let verts = self.vertices();
        let (value, at) = p.argmax(&verts).expect("a zonotope has at least one vertex");
        NormMax { value, argmax: at.to_vec() }
    }
}
