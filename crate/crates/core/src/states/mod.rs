//! Named states, transcribed exactly, with subsystem metadata.

pub mod random;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matcore::{c64, kron, CMatrix, CVector, DensityMatrix, PureState};

/// A state family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec {
    /// `sum_i |iii> / sqrt(d)`.
    Ghz {
        d: usize,
    },
    W,
    /// `sqrt(p) |GHZ> + sqrt(1 - p) |W>`.
    Psi {
        p: f64,
    },
    /// `q |GHZ><GHZ| + (1 - q) |W><W|`.
    RhoQ {
        q: f64,
    },
    /// Uniform superposition of the six permutations of `|012>`.
    Sym3,
    Flower {
        d: usize,
    },
    BellPairs {
        n: usize,
    },
    Tilde,
    Hdk {
        t: f64,
    },
    Upb,
    Adma {
        a: f64,
        b: f64,
        c: f64,
    },
    Ak {
        y: f64,
    },
    Ph {
        z: f64,
    },
    Heisenberg {
        temperature: f64,
    },
}

pub const DEFAULT_HDK_T: f64 = 0.64;
pub const DEFAULT_ADMA: (f64, f64, f64) = (2.0, 3.0, 5.0);

/// Pure or mixed output of a factory.
#[derive(Debug, Clone)]
pub enum State {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl State {
    pub fn density(&self) -> DensityMatrix {
        match self {
            State::Pure(psi) => psi.projector(),
            State::Mixed(rho) => rho.clone(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        match self {
            State::Pure(psi) => psi.dims(),
            State::Mixed(rho) => rho.dims(),
        }
    }
}

fn out_of_range(msg: String) -> Error {
    Error::OutOfRange(msg)
}

impl StateSpec {
    pub fn is_pure_family(&self) -> bool {
        matches!(
            self,
            StateSpec::Ghz { .. }
                | StateSpec::W
                | StateSpec::Psi { .. }
                | StateSpec::Sym3
                | StateSpec::BellPairs { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        use StateSpec::*;
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(out_of_range(format!("{name} = {v} outside [0, 1]")))
            }
        };
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(out_of_range(format!("{name} = {v} must be positive")))
            }
        };
        match *self {
            Ghz { d } if !(2..=6).contains(&d) => Err(out_of_range(format!("GHZ local dimension {d} outside 2..=6"))),
            Psi { p } => unit("p", p),
            RhoQ { q } => unit("q", q),
            Flower { d } if !(2..=11).contains(&d) => Err(out_of_range(format!("flower dimension {d} outside 2..=11"))),
            BellPairs { n } if !(2..=4).contains(&n) => Err(out_of_range(format!("Bell pair count {n} outside 2..=4"))),
            Hdk { t } if !(t > 0.0 && t < 1.0) => Err(out_of_range(format!("t = {t} outside (0, 1)"))),
            Adma { a, b, c } => {
                positive("a", a)?;
                positive("b", b)?;
                positive("c", c)?;
                if (a * b * c - 1.0).abs() < 1e-12 {
                    Err(out_of_range("abc must differ from 1".into()))
                } else {
                    Ok(())
                }
            }
            Ak { y } => positive("y", y),
            Ph { z } => positive("z", z),
            Heisenberg { temperature } => positive("T", temperature),
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> Result<State> {
        if self.is_pure_family() {
            pure_state(self).map(State::Pure)
        } else {
            mixed_state(self).map(State::Mixed)
        }
    }

    pub fn density(&self) -> Result<DensityMatrix> {
        self.build().map(|s| s.density())
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use StateSpec::*;
        match *self {
            Ghz { d: 2 } => write!(f, "ghz"),
            Ghz { d: 3 } => write!(f, "ghz3"),
            Ghz { d } => write!(f, "ghz:{d}"),
            W => write!(f, "w"),
            Psi { p } => write!(f, "psi:{p}"),
            RhoQ { q } => write!(f, "rho:{q}"),
            Sym3 => write!(f, "sym3"),
            Flower { d } => write!(f, "flower:{d}"),
            BellPairs { n } => write!(f, "bells:{n}"),
            Tilde => write!(f, "tilde"),
            Hdk { t } => write!(f, "hdk:{t}"),
            Upb => write!(f, "upb"),
            Adma { a, b, c } => write!(f, "adma:{a},{b},{c}"),
            Ak { y } => write!(f, "ak:{y}"),
            Ph { z } => write!(f, "ph:{z}"),
            Heisenberg { temperature } => write!(f, "heis:{temperature}"),
        }
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let bad = || Error::Parse(format!("malformed state spec `{s}`"));
        let real = |a: Option<&str>| -> Result<f64> { a.ok_or_else(bad)?.trim().parse::<f64>().map_err(|_| bad()) };
        let int = |a: Option<&str>| -> Result<usize> { a.ok_or_else(bad)?.trim().parse::<usize>().map_err(|_| bad()) };
        let none = |a: Option<&str>, spec: StateSpec| if a.is_none() { Ok(spec) } else { Err(bad()) };
        let spec = match name {
            "ghz" => match arg {
                None => StateSpec::Ghz { d: 2 },
                a => StateSpec::Ghz { d: int(a)? },
            },
            "ghz3" => none(arg, StateSpec::Ghz { d: 3 })?,
            "w" => none(arg, StateSpec::W)?,
            "psi" => StateSpec::Psi { p: real(arg)? },
            "rho" => StateSpec::RhoQ { q: real(arg)? },
            "sym3" => none(arg, StateSpec::Sym3)?,
            "flower" => StateSpec::Flower { d: int(arg)? },
            "bells" => StateSpec::BellPairs { n: int(arg)? },
            "tilde" => none(arg, StateSpec::Tilde)?,
            "hdk" => StateSpec::Hdk { t: arg.map_or(Ok(DEFAULT_HDK_T), |a| real(Some(a)))? },
            "upb" => none(arg, StateSpec::Upb)?,
            "adma" => match arg {
                None => {
                    let (a, b, c) = DEFAULT_ADMA;
                    StateSpec::Adma { a, b, c }
                }
                Some(list) => {
                    let v: Vec<f64> = list
                        .split(',')
                        .map(|x| x.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad())?;
                    match v[..] {
                        [a, b, c] => StateSpec::Adma { a, b, c },
                        _ => return Err(bad()),
                    }
                }
            },
            "ak" => StateSpec::Ak { y: real(arg)? },
            "ph" => StateSpec::Ph { z: real(arg)? },
            "heis" => StateSpec::Heisenberg { temperature: real(arg)? },
            _ => return Err(Error::Parse(format!("unknown state family `{name}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn real_vector(v: &[f64]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&x| c64(x, 0.0)))
}

fn real_matrix(n: usize, scale: f64, entries: &[f64]) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| c64(entries[i * n + j] * scale, 0.0))
}

/// `sum_i |i...i> / sqrt(d)` on three qudits.
pub fn ghz(d: usize) -> Result<PureState> {
    StateSpec::Ghz { d }.validate()?;
    let mut amp = CVector::zeros(d * d * d);
    for i in 0..d {
        amp[i * d * d + i * d + i] = c64(1.0, 0.0);
    }
    PureState::normalized(vec![d, d, d], amp)
}

pub fn w_state() -> PureState {
    let s = 1.0 / 3f64.sqrt();
    PureState::new(vec![2, 2, 2], real_vector(&[0., s, s, 0., s, 0., 0., 0.])).expect("W is normalized")
}

pub fn psi(p: f64) -> Result<PureState> {
    StateSpec::Psi { p }.validate()?;
    let g = ghz(2)?;
    let w = w_state();
    let amp = g.amplitudes() * c64(p.sqrt(), 0.0) + w.amplitudes() * c64((1.0 - p).sqrt(), 0.0);
    PureState::new(vec![2, 2, 2], amp)
}

pub fn sym3() -> PureState {
    let mut amp = CVector::zeros(27);
    for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1), (0, 2, 1), (2, 1, 0), (1, 0, 2)] {
        amp[a * 9 + b * 3 + c] = c64(1.0 / 6f64.sqrt(), 0.0);
    }
    PureState::new(vec![3, 3, 3], amp).expect("sym3 is normalized")
}

/// `sum_i |ii> / sqrt(d)`.
pub fn max_entangled(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(out_of_range(format!("local dimension {d} < 2")));
    }
    let mut amp = CVector::zeros(d * d);
    for i in 0..d {
        amp[i * d + i] = c64(1.0, 0.0);
    }
    PureState::normalized(vec![d, d], amp)
}

/// n Bell pairs `a_i b_i` with A = a_1..a_n, B = b_1..b_{n-1}, C = b_n.
///
/// A basis index of A is the bit string a_1..a_n (a_1 most significant); the
/// pairs force b = a, so B takes the top n-1 bits and C the last one.
pub fn bell_pairs(n: usize) -> Result<PureState> {
    StateSpec::BellPairs { n }.validate()?;
    let (da, db) = (1usize << n, 1usize << (n - 1));
    let mut amp = CVector::zeros(da * db * 2);
    let a = c64((da as f64).sqrt().recip(), 0.0);
    for bits in 0..da {
        let (b, c) = (bits >> 1, bits & 1);
        amp[bits * db * 2 + b * 2 + c] = a;
    }
    PureState::new(vec![da, db, 2], amp)
}

pub fn pure_state(spec: &StateSpec) -> Result<PureState> {
    spec.validate()?;
    match *spec {
        StateSpec::Ghz { d } => ghz(d),
        StateSpec::W => Ok(w_state()),
        StateSpec::Psi { p } => psi(p),
        StateSpec::Sym3 => Ok(sym3()),
        StateSpec::BellPairs { n } => bell_pairs(n),
        _ => Err(out_of_range(format!("`{spec}` is not a pure-state family"))),
    }
}

/// Validates a transcribed matrix, naming the state if it fails.
fn checked(name: &str, dims: Vec<usize>, data: CMatrix) -> Result<DensityMatrix> {
    DensityMatrix::new(dims, data).map_err(|e| Error::Transcription { name: name.to_string(), source: Box::new(e) })
}

pub fn rho_q(q: f64) -> Result<DensityMatrix> {
    StateSpec::RhoQ { q }.validate()?;
    ghz(2)?.projector().mix(q, &w_state().projector())
}

/// `(P+ (x) |0><0| + P- (x) |1><1|) / d^2` with `P+- = (1 +- SWAP) / 2`.
pub fn flower(d: usize) -> Result<DensityMatrix> {
    StateSpec::Flower { d }.validate()?;
    let n = d * d;
    let swap = CMatrix::from_fn(n, n, |r, c| {
        let (i, j) = (r / d, r % d);
        if c == j * d + i {
            c64(1.0, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    });
    let id = CMatrix::identity(n, n);
    let sym = (&id + &swap).unscale(2.0);
    let anti = (&id - &swap).unscale(2.0);
    let p0 = real_matrix(2, 1.0, &[1., 0., 0., 0.]);
    let p1 = real_matrix(2, 1.0, &[0., 0., 0., 1.]);
    let data = (kron(&sym, &p0) + kron(&anti, &p1)).unscale(n as f64);
    checked("flower", vec![d, d, 2], data)
}

#[rustfmt::skip]
const TILDE: [f64; 64] = [
    0., 0., 0., 0., 0., 0., 0., 0.,
    0., 2., 0., 0., 0., 0., 0., 0.,
    0., 0., 1., 0., 0., 1., 0., 0.,
    0., 0., 0., 1., 1., 0., 0., 0.,
    0., 0., 0., 1., 1., 0., 0., 0.,
    0., 0., 1., 0., 0., 1., 0., 0.,
    0., 0., 0., 0., 0., 0., 2., 0.,
    0., 0., 0., 0., 0., 0., 0., 0.,
];

pub fn tilde() -> DensityMatrix {
    checked("tilde", vec![2, 2, 2], real_matrix(8, 1.0 / 8.0, &TILDE)).expect("tilde transcription")
}

/// The 4x2 bound entangled state on qubits A, B and qubit C.
///
/// The printed 8x8 matrix holds the two-dimensional party in the middle tensor
/// slot; it is relabelled here so that C is the last subsystem.
pub fn hdk(t: f64) -> Result<DensityMatrix> {
    StateSpec::Hdk { t }.validate()?;
    let tp = (1.0 - t * t).sqrt();
    let h = 2.0 * (1.0 + 7.0 * t);
    let s = 2.0 * t;
    #[rustfmt::skip]
    let printed = [
        s,  0., 0.,     0., 0., 0., s,  0.,
        0., s,  0.,     0., 0., 0., 0., s,
        0., 0., t + 1., 0., 0., 0., 0., tp,
        0., 0., 0.,     s,  s,  0., 0., 0.,
        0., 0., 0.,     s,  s,  0., 0., 0.,
        0., 0., 0.,     0., 0., s,  0., 0.,
        s,  0., 0.,     0., 0., 0., s,  0.,
        0., s,  tp,     0., 0., 0., 0., t + 1.,
    ];
    let printed = real_matrix(8, 1.0 / h, &printed);
    // (a, b, c) in ABC order reads printed index (a, c, b)
    let relabel = |i: usize| (i & 4) | ((i & 1) << 1) | ((i >> 1) & 1);
    let data = CMatrix::from_fn(8, 8, |r, c| printed[(relabel(r), relabel(c))]);
    checked("hdk", vec![2, 2, 2], data)
}

#[rustfmt::skip]
const UPB: [f64; 64] = [
     7.,  1.,  1., -1.,  1., -1., -1.,  1.,
     1.,  3., -1.,  1., -1., -3.,  1., -1.,
     1., -1.,  3., -3., -1.,  1.,  1., -1.,
    -1.,  1., -3.,  3.,  1., -1., -1.,  1.,
     1., -1., -1.,  1.,  3.,  1., -3., -1.,
    -1., -3.,  1., -1.,  1.,  3., -1.,  1.,
    -1.,  1.,  1., -1., -3., -1.,  3.,  1.,
     1., -1., -1.,  1., -1.,  1.,  1.,  7.,
];

pub fn upb() -> DensityMatrix {
    checked("upb", vec![2, 2, 2], real_matrix(8, 1.0 / 32.0, &UPB)).expect("upb transcription")
}

pub fn adma(a: f64, b: f64, c: f64) -> Result<DensityMatrix> {
    StateSpec::Adma { a, b, c }.validate()?;
    let norm = 2.0 + 1.0 / a + a + 1.0 / b + b + 1.0 / c + c;
    let diag = [1.0, a, b, c, 1.0 / c, 1.0 / b, 1.0 / a, 1.0];
    let mut m = CMatrix::from_fn(8, 8, |i, j| if i == j { c64(diag[i], 0.0) } else { c64(0.0, 0.0) });
    m[(0, 7)] = c64(1.0, 0.0);
    m[(7, 0)] = c64(1.0, 0.0);
    checked("adma", vec![2, 2, 2], m.unscale(norm))
}

pub fn ak(y: f64) -> Result<DensityMatrix> {
    StateSpec::Ak { y }.validate()?;
    let x = y + 4.0;
    let mut m = CMatrix::zeros(8, 8);
    for (i, &v) in [x, y, y, y, y, y, y, x].iter().enumerate() {
        m[(i, i)] = c64(v, 0.0);
    }
    for (i, j, v) in [(0, 7, 2.0), (1, 6, 2.0), (2, 5, -2.0), (3, 4, 2.0)] {
        m[(i, j)] = c64(v, 0.0);
        m[(j, i)] = c64(v, 0.0);
    }
    checked("ak", vec![2, 2, 2], m.unscale(8.0 * (1.0 + y)))
}

pub fn ph(z: f64) -> Result<DensityMatrix> {
    StateSpec::Ph { z }.validate()?;
    let norm = 3.0 + 3.0 / z + 2.0 * z;
    let mut m = CMatrix::zeros(8, 8);
    m[(0, 0)] = c64(2.0 * z, 0.0);
    for i in [1, 2, 4] {
        for j in [1, 2, 4] {
            m[(i, j)] = c64(1.0, 0.0);
        }
    }
    for i in [3, 5, 6] {
        m[(i, i)] = c64(1.0 / z, 0.0);
    }
    checked("ph", vec![2, 2, 2], m.unscale(norm))
}

fn pauli() -> [CMatrix; 3] {
    let o = c64(0.0, 0.0);
    let l = c64(1.0, 0.0);
    let i = c64(0.0, 1.0);
    [
        CMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        CMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    ]
}

/// `sum_i (X_i X_{i+1} + Y_i Y_{i+1} + Z_i Z_{i+1})` on a ring of three qubits.
pub fn heisenberg_hamiltonian() -> CMatrix {
    let id = CMatrix::identity(2, 2);
    let site = |op: &CMatrix, k: usize| {
        let f: Vec<&CMatrix> = (0..3).map(|j| if j == k { op } else { &id }).collect();
        kron(&kron(f[0], f[1]), f[2])
    };
    let mut h = CMatrix::zeros(8, 8);
    for s in pauli().iter() {
        for k in 0..3 {
            h += site(s, k) * site(s, (k + 1) % 3);
        }
    }
    h
}

/// Gibbs state `exp(-H/T) / Z` of the three-qubit Heisenberg ring.
pub fn heisenberg_thermal(temperature: f64) -> Result<DensityMatrix> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(out_of_range(format!("temperature {temperature} must be positive")));
    }
    let eig = crate::matcore::herm_eig(&heisenberg_hamiltonian())?;
    let ground = eig.values[0];
    let weights: Vec<f64> = eig.values.iter().map(|&e| (-(e - ground) / temperature).exp()).collect();
    let z: f64 = weights.iter().sum();
    let v = &eig.vectors;
    let diag = CMatrix::from_fn(8, 8, |i, j| if i == j { c64(weights[i] / z, 0.0) } else { c64(0.0, 0.0) });
    checked("heis", vec![2, 2, 2], v * diag * v.adjoint())
}

pub fn mixed_state(spec: &StateSpec) -> Result<DensityMatrix> {
    spec.validate()?;
    match *spec {
        StateSpec::RhoQ { q } => rho_q(q),
        StateSpec::Flower { d } => flower(d),
        StateSpec::Tilde => Ok(tilde()),
        StateSpec::Hdk { t } => hdk(t),
        StateSpec::Upb => Ok(upb()),
        StateSpec::Adma { a, b, c } => adma(a, b, c),
        StateSpec::Ak { y } => ak(y),
        StateSpec::Ph { z } => ph(z),
        StateSpec::Heisenberg { temperature } => heisenberg_thermal(temperature),
        _ => Err(out_of_range(format!("`{spec}` is not a mixed-state family"))),
    }
}
