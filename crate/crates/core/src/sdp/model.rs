//! Modeling layer: matrix variables, Hermitian-valued linear expressions and
//! the conversion of matrix (in)equalities into scalar equality rows.

use std::collections::BTreeMap;

use super::{Block, BlockKind, BlockValue, Coef, Equality, Functional, SdpProblem, SdpSolution, Sense};
use crate::matcore::{partial_trace_general, CMatrix, C64};

/// A scalar variable: an entry of a Hermitian block or a component of a
/// real vector block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Atom {
    Herm { block: usize, i: usize, j: usize },
    Real { block: usize, k: usize },
}

/// Linear combination `Σ c · atom`.
pub type Terms = Vec<(Atom, C64)>;

/// A matrix-valued decision variable.
#[derive(Clone, Debug, PartialEq)]
pub enum MatVar {
    /// Hermitian PSD block.
    Psd { block: usize, dim: usize },
    /// Unconstrained Hermitian matrix stored as real coordinates.
    FreeHermitian { block: usize, dim: usize },
    /// Real vector block, viewed as a diagonal matrix when used in matrix expressions.
    Vector { block: usize, len: usize },
}

fn pair_index(d: usize, p: usize, q: usize) -> usize {
    // rank of (p, q), p < q, in row-major order of the strict upper triangle
    p * d - p * (p + 1) / 2 + (q - p - 1)
}

impl MatVar {
    pub fn dim(&self) -> usize {
        match *self {
            MatVar::Psd { dim, .. } | MatVar::FreeHermitian { dim, .. } => dim,
            MatVar::Vector { len, .. } => len,
        }
    }

    pub fn block(&self) -> usize {
        match *self {
            MatVar::Psd { block, .. } | MatVar::FreeHermitian { block, .. } | MatVar::Vector { block, .. } => block,
        }
    }

    /// Entry `(i, j)` as a combination of atoms.
    pub fn entry(&self, i: usize, j: usize) -> Terms {
        let one = C64::new(1.0, 0.0);
        match *self {
            MatVar::Psd { block, .. } => vec![(Atom::Herm { block, i, j }, one)],
            MatVar::FreeHermitian { block, dim } => {
                if i == j {
                    vec![(Atom::Real { block, k: i }, one)]
                } else {
                    let (p, q, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
                    let base = dim + 2 * pair_index(dim, p, q);
                    vec![(Atom::Real { block, k: base }, one), (Atom::Real { block, k: base + 1 }, C64::new(0.0, sign))]
                }
            }
            MatVar::Vector { block, .. } => {
                if i == j {
                    vec![(Atom::Real { block, k: i }, one)]
                } else {
                    Vec::new()
                }
            }
        }
    }

    /// Component `k` of a vector variable.
    pub fn scalar(&self, k: usize) -> Terms {
        self.entry(k, k)
    }

    /// `tr X` (or the sum of a vector).
    pub fn trace(&self) -> Terms {
        (0..self.dim()).flat_map(|k| self.entry(k, k)).collect()
    }

    /// Nonzero entries `(i, j)` that may carry a value.
    fn support(&self) -> Vec<(usize, usize)> {
        let d = self.dim();
        match self {
            MatVar::Vector { .. } => (0..d).map(|k| (k, k)).collect(),
            _ => (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).collect(),
        }
    }
}

/// Scales every coefficient.
pub fn scale_terms(terms: &Terms, c: C64) -> Terms {
    terms.iter().map(|&(a, v)| (a, v * c)).collect()
}

/// A Hermitian-valued affine expression of dimension `dim`. Only the upper
/// triangle `p ≤ q` is stored.
#[derive(Clone, Debug)]
pub struct HExpr {
    dim: usize,
    terms: Vec<(usize, usize, Atom, C64)>,
    constant: CMatrix,
}

impl HExpr {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, terms: Vec::new(), constant: CMatrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn push(&mut self, p: usize, q: usize, t: &Terms, c: C64) {
        if p > q || c == C64::new(0.0, 0.0) {
            return;
        }
        for &(atom, v) in t {
            self.terms.push((p, q, atom, v * c));
        }
    }

    /// `+ c · V`.
    pub fn add_var(&mut self, c: f64, v: &MatVar) -> &mut Self {
        assert_eq!(v.dim(), self.dim, "add_var dimension");
        let c = C64::new(c, 0.0);
        for (i, j) in v.support() {
            if i <= j {
                self.push(i, j, &v.entry(i, j), c);
            }
        }
        self
    }

    /// `+ c · (V ⊗ 1_m)`.
    pub fn add_kron_identity(&mut self, c: f64, v: &MatVar, m: usize) -> &mut Self {
        assert_eq!(v.dim() * m, self.dim, "add_kron_identity dimension");
        let c = C64::new(c, 0.0);
        for (i, j) in v.support() {
            let e = v.entry(i, j);
            for k in 0..m {
                self.push(i * m + k, j * m + k, &e, c);
            }
        }
        self
    }

    /// `+ c · (1_m ⊗ V)`.
    pub fn add_identity_kron(&mut self, c: f64, m: usize, v: &MatVar) -> &mut Self {
        let d = v.dim();
        assert_eq!(d * m, self.dim, "add_identity_kron dimension");
        let c = C64::new(c, 0.0);
        for (i, j) in v.support() {
            let e = v.entry(i, j);
            for k in 0..m {
                self.push(k * d + i, k * d + j, &e, c);
            }
        }
        self
    }

    /// `+ c · U V U†` for a `dim × v.dim()` matrix `U`.
    pub fn add_congruence(&mut self, c: f64, u: &CMatrix, v: &MatVar) -> &mut Self {
        assert_eq!(u.nrows(), self.dim, "add_congruence rows");
        assert_eq!(u.ncols(), v.dim(), "add_congruence cols");
        let c = C64::new(c, 0.0);
        let eps = 1e-15;
        for (i, j) in v.support() {
            let e = v.entry(i, j);
            for p in 0..self.dim {
                let upi = u[(p, i)];
                if upi.norm() < eps {
                    continue;
                }
                for q in p..self.dim {
                    let w = upi * u[(q, j)].conj();
                    if w.norm() >= eps {
                        self.push(p, q, &e, c * w);
                    }
                }
            }
        }
        self
    }

    /// `+ c · f(V)` for a complex-linear map `f`, expanded on matrix units.
    pub fn add_map(&mut self, c: f64, v: &MatVar, f: impl Fn(&CMatrix) -> CMatrix) -> &mut Self {
        let d = v.dim();
        let c = C64::new(c, 0.0);
        for (i, j) in v.support() {
            let mut unit = CMatrix::zeros(d, d);
            unit[(i, j)] = C64::new(1.0, 0.0);
            let img = f(&unit);
            assert_eq!(img.nrows(), self.dim, "add_map output dimension");
            let e = v.entry(i, j);
            for p in 0..self.dim {
                for q in p..self.dim {
                    let w = img[(p, q)];
                    if w.norm() >= 1e-15 {
                        self.push(p, q, &e, c * w);
                    }
                }
            }
        }
        self
    }

    /// `+ c · tr_{¬keep} V` where `V` lives on factors `dims`.
    pub fn add_partial_trace(&mut self, c: f64, v: &MatVar, dims: &[usize], keep: &[usize]) -> &mut Self {
        let dims = dims.to_vec();
        let keep = keep.to_vec();
        self.add_map(c, v, move |m| partial_trace_general(m, &dims, &keep).expect("partial trace dims"))
    }

    /// `+ (Σ terms) · M` for a constant Hermitian `M`.
    pub fn add_scaled_matrix(&mut self, terms: &Terms, m: &CMatrix) -> &mut Self {
        assert_eq!(m.nrows(), self.dim, "add_scaled_matrix dimension");
        for p in 0..self.dim {
            for q in p..self.dim {
                let w = m[(p, q)];
                if w.norm() >= 1e-15 {
                    self.push(p, q, terms, w);
                }
            }
        }
        self
    }

    /// `+ (Σ terms) · 1`.
    pub fn add_scaled_identity(&mut self, terms: &Terms, c: f64) -> &mut Self {
        for p in 0..self.dim {
            self.push(p, p, terms, C64::new(c, 0.0));
        }
        self
    }

    /// `+ M` for a constant Hermitian `M`.
    pub fn add_constant(&mut self, m: &CMatrix) -> &mut Self {
        self.constant += m;
        self
    }
}

/// Incremental builder of an [`SdpProblem`].
#[derive(Clone, Debug)]
pub struct Model {
    blocks: Vec<Block>,
    sense: Sense,
    objective: Terms,
    equalities: Vec<Equality>,
}

fn functional_from(terms: &Terms) -> Functional {
    let mut acc: BTreeMap<(usize, usize, usize), C64> = BTreeMap::new();
    for &(atom, c) in terms {
        match atom {
            Atom::Herm { block, i, j } => {
                // the row computes Re(c · X[i,j])
                if i == j {
                    *acc.entry((block, i, i)).or_default() += C64::new(c.re, 0.0);
                } else if i < j {
                    *acc.entry((block, i, j)).or_default() += c.conj() * 0.5;
                } else {
                    *acc.entry((block, j, i)).or_default() += c * 0.5;
                }
            }
            Atom::Real { block, k } => {
                *acc.entry((block, k, k)).or_default() += C64::new(c.re, 0.0);
            }
        }
    }
    Functional {
        coefs: acc
            .into_iter()
            .filter(|(_, v)| v.norm() > 0.0)
            .map(|((block, i, j), value)| Coef { block, i, j, value })
            .collect(),
    }
}

impl Model {
    pub fn new(sense: Sense) -> Self {
        Self { blocks: Vec::new(), sense, objective: Vec::new(), equalities: Vec::new() }
    }

    fn add_block(&mut self, label: &str, dim: usize, kind: BlockKind) -> usize {
        assert!(dim > 0, "block '{label}' must be non-empty");
        self.blocks.push(Block { label: label.to_string(), dim, kind });
        self.blocks.len() - 1
    }

    pub fn psd(&mut self, label: &str, dim: usize) -> MatVar {
        let block = self.add_block(label, dim, BlockKind::Hermitian);
        MatVar::Psd { block, dim }
    }

    pub fn nonneg(&mut self, label: &str, len: usize) -> MatVar {
        let block = self.add_block(label, len, BlockKind::Diagonal);
        MatVar::Vector { block, len }
    }

    pub fn free(&mut self, label: &str, len: usize) -> MatVar {
        let block = self.add_block(label, len, BlockKind::Free);
        MatVar::Vector { block, len }
    }

    pub fn free_hermitian(&mut self, label: &str, dim: usize) -> MatVar {
        let block = self.add_block(label, dim * dim, BlockKind::Free);
        MatVar::FreeHermitian { block, dim }
    }

    /// Adds `Re Σ terms` to the objective.
    pub fn add_objective(&mut self, terms: &Terms) {
        self.objective.extend_from_slice(terms);
    }

    /// `Re Σ terms = rhs`.
    pub fn equal_scalar(&mut self, terms: &Terms, rhs: f64) {
        self.equalities.push(Equality { lhs: functional_from(terms), rhs });
    }

    /// `Re Σ terms ≥ rhs`, through a nonnegative slack.
    pub fn ge_scalar(&mut self, label: &str, terms: &Terms, rhs: f64) -> MatVar {
        let slack = self.nonneg(label, 1);
        let mut t = terms.clone();
        t.extend(scale_terms(&slack.scalar(0), C64::new(-1.0, 0.0)));
        self.equal_scalar(&t, rhs);
        slack
    }

    /// `Re Σ terms ≤ rhs`, through a nonnegative slack.
    pub fn le_scalar(&mut self, label: &str, terms: &Terms, rhs: f64) -> MatVar {
        let slack = self.nonneg(label, 1);
        let mut t = terms.clone();
        t.extend(slack.scalar(0));
        self.equal_scalar(&t, rhs);
        slack
    }

    /// Hermitian matrix equality `expr = rhs`, one real row per real degree of freedom.
    pub fn equal(&mut self, expr: &HExpr, rhs: &CMatrix) {
        let d = expr.dim;
        assert_eq!(rhs.nrows(), d, "equality rhs dimension");
        let mut by_entry: BTreeMap<(usize, usize), Terms> = BTreeMap::new();
        for &(p, q, atom, c) in &expr.terms {
            by_entry.entry((p, q)).or_default().push((atom, c));
        }
        let target = rhs - &expr.constant;
        let minus_i = C64::new(0.0, -1.0);
        for p in 0..d {
            for q in p..d {
                let terms = by_entry.remove(&(p, q)).unwrap_or_default();
                let t = target[(p, q)];
                if !terms.is_empty() || t.re.abs() > 0.0 {
                    self.equal_scalar(&terms, t.re);
                }
                if p < q {
                    let im_terms = scale_terms(&terms, minus_i);
                    if !terms.is_empty() || t.im.abs() > 0.0 {
                        self.equal_scalar(&im_terms, t.im);
                    }
                }
            }
        }
    }

    /// `expr ⪰ rhs`, through a PSD slack `Z = expr − rhs`. Returns the slack.
    pub fn psd_ge(&mut self, label: &str, expr: &HExpr, rhs: &CMatrix) -> MatVar {
        let z = self.psd(label, expr.dim);
        let mut e = expr.clone();
        e.add_var(-1.0, &z);
        self.equal(&e, rhs);
        z
    }

    pub fn build(self) -> SdpProblem {
        SdpProblem {
            blocks: self.blocks,
            sense: self.sense,
            objective: functional_from(&self.objective),
            equalities: self.equalities,
        }
    }
}

/// Value of a variable at a solution.
pub fn value_of(sol: &SdpSolution, v: &MatVar) -> CMatrix {
    value_in(&sol.x, v)
}

/// Dual slack of a PSD block at a solution.
pub fn slack_of(sol: &SdpSolution, v: &MatVar) -> CMatrix {
    value_in(&sol.s, v)
}

fn value_in(vals: &[BlockValue], v: &MatVar) -> CMatrix {
    let d = v.dim();
    match (v, &vals[v.block()]) {
        (MatVar::Psd { .. }, BlockValue::Matrix(m)) => m.clone(),
        (MatVar::Vector { .. }, BlockValue::Vector(x)) => {
            let mut m = CMatrix::zeros(d, d);
            for k in 0..d {
                m[(k, k)] = C64::new(x[k], 0.0);
            }
            m
        }
        (MatVar::FreeHermitian { .. }, BlockValue::Vector(x)) => {
            let mut m = CMatrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    let mut z = C64::new(0.0, 0.0);
                    for (atom, c) in v.entry(i, j) {
                        if let Atom::Real { k, .. } = atom {
                            z += c * x[k];
                        }
                    }
                    m[(i, j)] = z;
                }
            }
            m
        }
        _ => panic!("block value kind does not match variable"),
    }
}

/// Real vector value of a vector variable.
pub fn vector_of(sol: &SdpSolution, v: &MatVar) -> Vec<f64> {
    match &sol.x[v.block()] {
        BlockValue::Vector(x) => x.clone(),
        BlockValue::Matrix(_) => panic!("not a vector variable"),
    }
}
