//! Constellations and the bit mappers for spatial modulation (SM) and spatial
//! multiplexing (SMX).
//!
//! Bit words are handled MSB-first: the first bit of a word is its most
//! significant bit. Constellation points are stored by label, so a symbol
//! index *is* its bit label. For SM the leading `log2(Nt)` bits select the
//! active antenna in natural binary (antenna 0 is the all-zero prefix) and the
//! remaining bits select the symbol. For SMX consecutive `log2(M)` bit groups
//! go to antennas 0, 1, ... in order.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModemError {
    #[error("{what} must be a power of two, got {value}")]
    NonPowerOfTwo { what: &'static str, value: usize },
    #[error("unsupported constellation order {0}")]
    UnsupportedOrder(usize),
    #[error("expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{what} {value} out of range 0..{bound}")]
    OutOfRange {
        what: &'static str,
        value: usize,
        bound: usize,
    },
    #[error("transmit vectors have different shapes")]
    ShapeMismatch,
    #[error("bits must be 0 or 1")]
    InvalidBit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Sm,
    Smx,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Sm => "sm",
            Scheme::Smx => "smx",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sm" => Ok(Scheme::Sm),
            "smx" => Ok(Scheme::Smx),
            other => Err(format!("unknown scheme `{other}` (expected sm or smx)")),
        }
    }
}

fn log2_exact(what: &'static str, value: usize) -> Result<u32, ModemError> {
    if value == 0 || !value.is_power_of_two() {
        return Err(ModemError::NonPowerOfTwo { what, value });
    }
    Ok(value.trailing_zeros())
}

/// Bits carried per channel use. SM needs a power-of-two antenna count, SMX
/// does not.
pub fn spectral_efficiency(scheme: Scheme, nt: usize, mod_order: usize) -> Result<u32, ModemError> {
    let s = log2_exact("M", mod_order)?;
    let m = match scheme {
        Scheme::Sm => log2_exact("Nt", nt)? + s,
        Scheme::Smx => nt as u32 * s,
    };
    if m == 0 {
        return Err(ModemError::NonPowerOfTwo {
            what: "M",
            value: mod_order,
        });
    }
    Ok(m)
}

pub const SUPPORTED_ORDERS: [usize; 8] = [2, 4, 8, 16, 32, 64, 128, 256];

/// Unit-average-energy QAM signal set with labels equal to point indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    bits: u32,
    scale: f64,
    /// Integer grid coordinates before normalization.
    grid: Vec<(i32, i32)>,
}

fn gray_to_binary(mut g: u32) -> u32 {
    let mut b = 0;
    while g != 0 {
        b ^= g;
        g >>= 1;
    }
    b
}

/// Odd-integer amplitude of a Gray-labelled PAM axis with `2^bits` levels.
/// Label 0 sits on the largest positive amplitude.
fn pam_level(label: u32, bits: u32) -> i32 {
    let levels = 1i32 << bits;
    (levels - 1) - 2 * gray_to_binary(label) as i32
}

/// Rectangular Gray grid with `i_bits` bits on the in-phase axis (leading)
/// and `q_bits` on the quadrature axis.
fn rect_grid(i_bits: u32, q_bits: u32) -> Vec<(i32, i32)> {
    (0..1u32 << (i_bits + q_bits))
        .map(|label| {
            let i = pam_level(label >> q_bits, i_bits);
            let q = if q_bits == 0 {
                0
            } else {
                pam_level(label & ((1 << q_bits) - 1), q_bits)
            };
            (i, q)
        })
        .collect()
}

/// Cross constellation of `2^(2k+1)` points built from the rectangular
/// `2^(k+1) x 2^k` Gray grid: the outer in-phase columns `|I| > 3s`
/// (`s = 2^(k-1)`) are folded onto new quadrature rows via
/// `(I, Q) -> (sgn I * (2s - |Q|), sgn Q * (|I| - s))`. Labels of the kept
/// points stay Gray; folded points are quasi-Gray.
fn cross_grid(bits: u32) -> Vec<(i32, i32)> {
    let k = (bits - 1) / 2;
    let s = 1i32 << (k - 1);
    rect_grid(k + 1, k)
        .into_iter()
        .map(|(i, q)| {
            if i.abs() > 3 * s {
                (i.signum() * (2 * s - q.abs()), q.signum() * (i.abs() - s))
            } else {
                (i, q)
            }
        })
        .collect()
}

impl Constellation {
    /// BPSK, QPSK and square QAM are Gray labelled; 8-QAM is the 4x2
    /// rectangular Gray grid; 32- and 128-QAM are cross constellations.
    pub fn new(order: usize) -> Result<Self, ModemError> {
        if !SUPPORTED_ORDERS.contains(&order) {
            return Err(ModemError::UnsupportedOrder(order));
        }
        let bits = order.trailing_zeros();
        let grid = match bits {
            1 => rect_grid(1, 0),
            3 => rect_grid(2, 1),
            b if b % 2 == 0 => rect_grid(b / 2, b / 2),
            b => cross_grid(b),
        };
        let energy: f64 = grid
            .iter()
            .map(|&(i, q)| f64::from(i * i + q * q))
            .sum::<f64>()
            / order as f64;
        let scale = 1.0 / energy.sqrt();
        let points = grid
            .iter()
            .map(|&(i, q)| Complex64::new(f64::from(i) * scale, f64::from(q) * scale))
            .collect();
        Ok(Self {
            points,
            bits,
            scale,
            grid,
        })
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order() as f64
    }

    /// Groups the points by their imaginary part, optionally scaled by
    /// `gain`. Levels ascend; members within a level are sorted by real part.
    pub fn imag_groups(&self, gain: f64) -> ImagGroups {
        let mut qs: Vec<i32> = self.grid.iter().map(|&(_, q)| q).collect();
        qs.sort_unstable();
        qs.dedup();
        let groups = qs
            .iter()
            .map(|&q| {
                let mut members: Vec<(f64, usize)> = self
                    .grid
                    .iter()
                    .enumerate()
                    .filter(|(_, &(_, gq))| gq == q)
                    .map(|(label, &(i, _))| (f64::from(i) * self.scale * gain, label))
                    .collect();
                members.sort_by(|a, b| a.0.total_cmp(&b.0));
                ImagLevel {
                    imag: f64::from(q) * self.scale * gain,
                    members,
                }
            })
            .collect();
        ImagGroups { levels: groups }
    }
}

/// One distinct imaginary level and the `(real part, label)` pairs on it.
#[derive(Debug, Clone)]
pub struct ImagLevel {
    pub imag: f64,
    pub members: Vec<(f64, usize)>,
}

#[derive(Debug, Clone)]
pub struct ImagGroups {
    pub levels: Vec<ImagLevel>,
}

pub fn build_constellation(order: usize) -> Result<Constellation, ModemError> {
    Constellation::new(order)
}

/// A transmit vector in index form. Antennas are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TxVector {
    Sm { nt: usize, antenna: usize, symbol: usize },
    Smx { symbols: Vec<usize> },
}

impl TxVector {
    pub fn scheme(&self) -> Scheme {
        match self {
            TxVector::Sm { .. } => Scheme::Sm,
            TxVector::Smx { .. } => Scheme::Smx,
        }
    }

    pub fn nt(&self) -> usize {
        match self {
            TxVector::Sm { nt, .. } => *nt,
            TxVector::Smx { symbols } => symbols.len(),
        }
    }

    /// Dense complex vector of length `Nt`. SMX entries are scaled by
    /// `1/sqrt(Nt)` so the vector has unit average energy.
    pub fn dense(&self, constellation: &Constellation) -> Vec<Complex64> {
        match self {
            TxVector::Sm {
                nt,
                antenna,
                symbol,
            } => {
                let mut x = vec![Complex64::new(0.0, 0.0); *nt];
                x[*antenna] = constellation.point(*symbol);
                x
            }
            TxVector::Smx { symbols } => {
                let g = smx_gain(symbols.len());
                symbols.iter().map(|&s| constellation.point(s) * g).collect()
            }
        }
    }
}

pub fn smx_gain(nt: usize) -> f64 {
    1.0 / (nt as f64).sqrt()
}

fn bits_to_word(bits: &[u8]) -> Result<u64, ModemError> {
    bits.iter().try_fold(0u64, |acc, &b| match b {
        0 | 1 => Ok((acc << 1) | u64::from(b)),
        _ => Err(ModemError::InvalidBit),
    })
}

fn word_to_bits(word: u64, len: u32) -> Vec<u8> {
    (0..len).rev().map(|i| ((word >> i) & 1) as u8).collect()
}

/// Maps an SM bit string onto (antenna, symbol).
pub fn sm_map(bits: &[u8], nt: usize, constellation: &Constellation) -> Result<TxVector, ModemError> {
    let m = spectral_efficiency(Scheme::Sm, nt, constellation.order())? as usize;
    if bits.len() != m {
        return Err(ModemError::LengthMismatch {
            expected: m,
            got: bits.len(),
        });
    }
    let word = bits_to_word(bits)?;
    let sb = constellation.bits_per_symbol();
    Ok(TxVector::Sm {
        nt,
        antenna: (word >> sb) as usize,
        symbol: (word & ((1 << sb) - 1)) as usize,
    })
}

pub fn sm_demap(
    antenna: usize,
    symbol: usize,
    nt: usize,
    constellation: &Constellation,
) -> Result<Vec<u8>, ModemError> {
    let m = spectral_efficiency(Scheme::Sm, nt, constellation.order())?;
    if antenna >= nt {
        return Err(ModemError::OutOfRange {
            what: "antenna",
            value: antenna,
            bound: nt,
        });
    }
    if symbol >= constellation.order() {
        return Err(ModemError::OutOfRange {
            what: "symbol",
            value: symbol,
            bound: constellation.order(),
        });
    }
    let word = ((antenna as u64) << constellation.bits_per_symbol()) | symbol as u64;
    Ok(word_to_bits(word, m))
}

pub fn smx_map(bits: &[u8], nt: usize, constellation: &Constellation) -> Result<TxVector, ModemError> {
    let m = spectral_efficiency(Scheme::Smx, nt, constellation.order())? as usize;
    if bits.len() != m {
        return Err(ModemError::LengthMismatch {
            expected: m,
            got: bits.len(),
        });
    }
    let sb = constellation.bits_per_symbol() as usize;
    let symbols = bits
        .chunks(sb)
        .map(|chunk| bits_to_word(chunk).map(|w| w as usize))
        .collect::<Result<_, _>>()?;
    Ok(TxVector::Smx { symbols })
}

pub fn smx_demap(x: &TxVector, constellation: &Constellation) -> Result<Vec<u8>, ModemError> {
    match x {
        TxVector::Smx { symbols } => {
            let sb = constellation.bits_per_symbol();
            let mut out = Vec::with_capacity(symbols.len() * sb as usize);
            for &s in symbols {
                if s >= constellation.order() {
                    return Err(ModemError::OutOfRange {
                        what: "symbol",
                        value: s,
                        bound: constellation.order(),
                    });
                }
                out.extend(word_to_bits(s as u64, sb));
            }
            Ok(out)
        }
        TxVector::Sm { .. } => Err(ModemError::ShapeMismatch),
    }
}

/// Hamming distance between the bit labels of two transmit vectors.
///
/// Symbol indices are labels, so this needs no constellation.
pub fn bit_errors(x1: &TxVector, x2: &TxVector) -> Result<u32, ModemError> {
    match (x1, x2) {
        (
            TxVector::Sm {
                nt: n1,
                antenna: a1,
                symbol: s1,
            },
            TxVector::Sm {
                nt: n2,
                antenna: a2,
                symbol: s2,
            },
        ) if n1 == n2 => Ok((a1 ^ a2).count_ones() + (s1 ^ s2).count_ones()),
        (TxVector::Smx { symbols: v1 }, TxVector::Smx { symbols: v2 }) if v1.len() == v2.len() => {
            Ok(v1.iter().zip(v2).map(|(a, b)| (a ^ b).count_ones()).sum())
        }
        _ => Err(ModemError::ShapeMismatch),
    }
}

/// A complete transmitter configuration: scheme, antenna count and signal set.
#[derive(Debug, Clone)]
pub struct Modem {
    scheme: Scheme,
    nt: usize,
    constellation: Constellation,
    bits: u32,
}

impl Modem {
    pub fn new(scheme: Scheme, nt: usize, mod_order: usize) -> Result<Self, ModemError> {
        let bits = spectral_efficiency(scheme, nt, mod_order)?;
        if bits > 32 {
            return Err(ModemError::LengthMismatch {
                expected: 32,
                got: bits as usize,
            });
        }
        Ok(Self {
            scheme,
            nt,
            constellation: Constellation::new(mod_order)?,
            bits,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    /// Spectral efficiency `m`.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Maps an `m`-bit word (MSB first); `word < 2^m`.
    pub fn map_word(&self, word: u64) -> TxVector {
        debug_assert!(word < 1u64 << self.bits);
        let sb = self.constellation.bits_per_symbol();
        let mask = (1u64 << sb) - 1;
        match self.scheme {
            Scheme::Sm => TxVector::Sm {
                nt: self.nt,
                antenna: (word >> sb) as usize,
                symbol: (word & mask) as usize,
            },
            Scheme::Smx => TxVector::Smx {
                symbols: (0..self.nt)
                    .map(|a| ((word >> (sb as usize * (self.nt - 1 - a))) & mask) as usize)
                    .collect(),
            },
        }
    }

    pub fn demap_word(&self, x: &TxVector) -> u64 {
        let sb = self.constellation.bits_per_symbol();
        match x {
            TxVector::Sm { antenna, symbol, .. } => ((*antenna as u64) << sb) | *symbol as u64,
            TxVector::Smx { symbols } => symbols.iter().fold(0, |acc, &s| (acc << sb) | s as u64),
        }
    }

    pub fn dense(&self, x: &TxVector) -> Vec<Complex64> {
        x.dense(&self.constellation)
    }

    /// Every transmit vector in word order.
    pub fn codebook(&self) -> Vec<TxVector> {
        (0..1u64 << self.bits).map(|w| self.map_word(w)).collect()
    }
}
