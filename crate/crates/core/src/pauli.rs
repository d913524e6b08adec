//! Pauli strings with exact phases on an open chain.
//!
//! Sites are 1-based throughout the public API.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Mul;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `self * rhs = i^k * out`, returned as `(k, out)`.
    pub fn mul(self, rhs: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, rhs) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
        }
    }

    pub fn commutes_with(self, rhs: Pauli) -> bool {
        self == Pauli::I || rhs == Pauli::I || self == rhs
    }

    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn from_symbol(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Global phase in {+1, +i, -1, -i}, stored as a power of i.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u8) -> Phase {
        Phase(k & 3)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) & 3)
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) & 3)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    phase: Phase,
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n_sites: usize) -> Self {
        Self {
            phase: Phase::ONE,
            letters: vec![Pauli::I; n_sites],
        }
    }

    pub fn from_letters(phase: Phase, letters: Vec<Pauli>) -> Self {
        Self { phase, letters }
    }

    /// Builds a string from `(site, letter)` pairs; repeated sites multiply.
    pub fn from_sites(n_sites: usize, sites: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = Self::identity(n_sites);
        for &(site, p) in sites {
            s.mul_site(site, p)?;
        }
        Ok(s)
    }

    pub fn single(n_sites: usize, site: usize, p: Pauli) -> Result<Self> {
        Self::from_sites(n_sites, &[(site, p)])
    }

    pub fn n_sites(&self) -> usize {
        self.letters.len()
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, site: usize) -> Pauli {
        self.letters[site - 1]
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Sites carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// Smallest and largest non-identity site.
    pub fn span(&self) -> Option<(usize, usize)> {
        let first = self.letters.iter().position(|&p| p != Pauli::I)?;
        let last = self.letters.iter().rposition(|&p| p != Pauli::I)?;
        Some((first + 1, last + 1))
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn count(&self, p: Pauli) -> usize {
        self.letters.iter().filter(|&&q| q == p).count()
    }

    /// Right-multiplies site `site` by `p`, tracking the phase.
    pub fn mul_site(&mut self, site: usize, p: Pauli) -> Result<()> {
        let n = self.letters.len();
        if site == 0 || site > n {
            return Err(Error::IndexOutOfRange {
                index: site,
                min: 1,
                max: n,
            });
        }
        let (k, out) = self.letters[site - 1].mul(p);
        self.letters[site - 1] = out;
        self.phase = self.phase * Phase::from_power(k);
        Ok(())
    }

    pub fn try_mul(&self, rhs: &PauliString) -> Result<PauliString> {
        if self.n_sites() != rhs.n_sites() {
            return Err(Error::ShapeMismatch {
                left: self.n_sites(),
                right: rhs.n_sites(),
            });
        }
        let mut k = self.phase.0 + rhs.phase.0;
        let letters = self
            .letters
            .iter()
            .zip(&rhs.letters)
            .map(|(&a, &b)| {
                let (dk, p) = a.mul(b);
                k = (k + dk) & 3;
                p
            })
            .collect();
        Ok(PauliString {
            phase: Phase::from_power(k),
            letters,
        })
    }

    pub fn commutes(&self, rhs: &PauliString) -> Result<bool> {
        if self.n_sites() != rhs.n_sites() {
            return Err(Error::ShapeMismatch {
                left: self.n_sites(),
                right: rhs.n_sites(),
            });
        }
        let anti = self
            .letters
            .iter()
            .zip(&rhs.letters)
            .filter(|(&a, &b)| !a.commutes_with(b))
            .count();
        Ok(anti % 2 == 0)
    }

    pub fn adjoint(&self) -> PauliString {
        PauliString {
            phase: self.phase.conj(),
            letters: self.letters.clone(),
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    /// Bit masks for the X and Z components (site i is bit i-1).
    pub fn masks(&self) -> Result<(u64, u64)> {
        if self.n_sites() > 64 {
            return Err(Error::Capacity(format!(
                "bit masks need at most 64 sites, got {}",
                self.n_sites()
            )));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (i, p) in self.letters.iter().enumerate() {
            if p.has_x() {
                x |= 1 << i;
            }
            if p.has_z() {
                z |= 1 << i;
            }
        }
        Ok((x, z))
    }

    /// Parses the text form, e.g. `+Z1 X2 X4 Z5` or `-i Y3`.
    pub fn parse(text: &str, n_sites: usize) -> Result<PauliString> {
        let t = text.trim();
        let (phase, rest) = if let Some(r) = t.strip_prefix("+i") {
            (Phase::I, r)
        } else if let Some(r) = t.strip_prefix("-i") {
            (Phase::MINUS_I, r)
        } else if let Some(r) = t.strip_prefix('+') {
            (Phase::ONE, r)
        } else if let Some(r) = t.strip_prefix('-') {
            (Phase::MINUS_ONE, r)
        } else {
            return Err(Error::Parse(format!("missing explicit sign in {t:?}")));
        };
        let mut s = PauliString::identity(n_sites);
        let rest = rest.trim();
        if rest == "I" {
            return Ok(s.with_phase(phase));
        }
        let mut last = 0usize;
        for tok in rest.split_whitespace() {
            let mut chars = tok.chars();
            let letter = chars
                .next()
                .and_then(Pauli::from_symbol)
                .ok_or_else(|| Error::Parse(format!("bad token {tok:?}")))?;
            let site: usize = chars
                .as_str()
                .parse()
                .map_err(|_| Error::Parse(format!("bad site in token {tok:?}")))?;
            if letter == Pauli::I || site <= last {
                return Err(Error::Parse(format!(
                    "tokens must be non-identity with increasing sites, got {tok:?}"
                )));
            }
            last = site;
            s.mul_site(site, letter)?;
        }
        Ok(s.with_phase(phase))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.phase)?;
        let mut first = true;
        for (i, p) in self.letters.iter().enumerate() {
            if *p == Pauli::I {
                continue;
            }
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{}{}", p.symbol(), i + 1)?;
            first = false;
        }
        if first {
            f.write_str("I")?;
        }
        Ok(())
    }
}

impl Mul for &PauliString {
    type Output = PauliString;
    /// Panics on length mismatch; use [`PauliString::try_mul`] otherwise.
    fn mul(self, rhs: &PauliString) -> PauliString {
        self.try_mul(rhs).expect("Pauli strings of different length")
    }
}

/// Chain length and coupling angle of the cluster-phase Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainSpec {
    pub n_sites: usize,
    pub alpha: f64,
}

impl ChainSpec {
    pub fn new(n_sites: usize, alpha: f64) -> Result<Self> {
        check_odd_chain(n_sites)?;
        if !alpha.is_finite() || alpha.abs() >= core::f64::consts::FRAC_PI_4 {
            return Err(Error::PhaseRange(alpha));
        }
        Ok(Self { n_sites, alpha })
    }
}

fn check_odd_chain(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidChain("chain must have at least one site".to_string()));
    }
    if n % 2 == 0 {
        return Err(Error::Parity(format!("chain length {n} must be odd")));
    }
    Ok(())
}

fn check_site(site: usize, n: usize) -> Result<()> {
    if site == 0 || site > n {
        return Err(Error::IndexOutOfRange {
            index: site,
            min: 1,
            max: n,
        });
    }
    Ok(())
}

/// K_i: `X1 Z2` at the left end, `Z_{N-1} X_N` at the right end, `Z X Z` in the bulk.
pub fn cluster_stabilizer(i: usize, n: usize) -> Result<PauliString> {
    check_site(i, n)?;
    let mut s = PauliString::identity(n);
    s.mul_site(i, Pauli::X)?;
    if i > 1 {
        s.mul_site(i - 1, Pauli::Z)?;
    }
    if i < n {
        s.mul_site(i + 1, Pauli::Z)?;
    }
    Ok(s)
}

/// (g0, g1) = (Z1 X2 X4 .. X_{N-1} Z_N, X1 X3 .. X_N).
pub fn symmetry_generators(n: usize) -> Result<(PauliString, PauliString)> {
    check_odd_chain(n)?;
    let mut g0 = PauliString::identity(n);
    g0.mul_site(1, Pauli::Z)?;
    for i in (2..n).step_by(2) {
        g0.mul_site(i, Pauli::X)?;
    }
    g0.mul_site(n, Pauli::Z)?;
    let mut g1 = PauliString::identity(n);
    for i in (1..=n).step_by(2) {
        g1.mul_site(i, Pauli::X)?;
    }
    Ok((g0, g1))
}

/// K_{>=k}: `Z_k X_{k+1} X_{k+3} .. X_{N-1} Z_N` for odd k,
/// `Z_k X_{k+1} X_{k+3} .. X_N` for even k.
pub fn string_order_geq(k: usize, n: usize) -> Result<PauliString> {
    check_odd_chain(n)?;
    if k == 0 || k >= n {
        return Err(Error::IndexOutOfRange {
            index: k,
            min: 1,
            max: n - 1,
        });
    }
    let mut s = PauliString::identity(n);
    s.mul_site(k, Pauli::Z)?;
    for j in (k + 1..=n).step_by(2) {
        s.mul_site(j, Pauli::X)?;
    }
    if k % 2 == 1 {
        s.mul_site(n, Pauli::Z)?;
    }
    Ok(s)
}

/// K_{k,l} = `Z_k X_{k+1} X_{k+3} .. X_{l-1} Z_l`, with l - k even and positive.
pub fn string_order_pair(k: usize, l: usize, n: usize) -> Result<PauliString> {
    check_site(k, n)?;
    check_site(l, n)?;
    if l <= k || (l - k) % 2 != 0 {
        return Err(Error::Parity(format!(
            "pair string needs l > k with l - k even, got k={k}, l={l}"
        )));
    }
    let mut s = PauliString::identity(n);
    s.mul_site(k, Pauli::Z)?;
    for j in (k + 1..l).step_by(2) {
        s.mul_site(j, Pauli::X)?;
    }
    s.mul_site(l, Pauli::Z)?;
    Ok(s)
}

/// Real linear combination of Pauli strings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PauliSum {
    pub n_sites: usize,
    pub terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    pub fn new(n_sites: usize) -> Self {
        Self {
            n_sites,
            terms: Vec::new(),
        }
    }

    pub fn push(&mut self, coef: f64, op: PauliString) -> Result<()> {
        if op.n_sites() != self.n_sites {
            return Err(Error::ShapeMismatch {
                left: self.n_sites,
                right: op.n_sites(),
            });
        }
        if !op.is_hermitian() {
            return Err(Error::NotHermitian(op.phase()));
        }
        self.terms.push((coef, op));
        Ok(())
    }
}

/// H(alpha) = -cos(alpha) sum_i K_i - sin(alpha) sum_{i=2}^{N-1} X_i.
pub fn cluster_hamiltonian(spec: &ChainSpec) -> Result<PauliSum> {
    let n = spec.n_sites;
    let (s, c) = spec.alpha.sin_cos();
    let mut h = PauliSum::new(n);
    for i in 1..=n {
        h.push(-c, cluster_stabilizer(i, n)?)?;
    }
    for i in 2..n {
        h.push(-s, PauliString::single(n, i, Pauli::X)?)?;
    }
    Ok(h)
}
