//! Problem instances: n exact fixed-point numbers, optionally with planting
//! metadata.
//!
//! The text format is line based:
//!
//! ```text
//! n F [base_c [mult]]     header; base_c present iff planted
//! +-++...                 planted sign vector   (planted only)
//! <target numerator>      realized <sigma*, X>  (planted only)
//! <x_1 numerator>
//! ...
//! <x_n numerator>
//! ```
//!
//! Numerators are decimal integers on the `2^-F` grid, so serialization is
//! bit-exact by construction.

use std::io::{BufRead, Write};

use crate::energy::{BoundMultiplier, Energy, Threshold};
use crate::fixed::{check_frac_bits, FixedReal, DEFAULT_FRAC_BITS};
use crate::partition::Partition;
use crate::wide::I256;
use crate::CoreError;

#[derive(Debug, Clone, PartialEq)]
pub struct Planting {
    pub sigma_star: Partition,
    pub base_c: f64,
    pub bound: BoundMultiplier,
    /// The realized value of `<sigma*, X>` on the grid, exactly.
    pub target: FixedReal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n: usize,
    frac_bits: u32,
    x: Vec<FixedReal>,
    planting: Option<Planting>,
}

impl Instance {
    pub fn new(
        x: Vec<FixedReal>,
        frac_bits: u32,
        planting: Option<Planting>,
    ) -> Result<Self, CoreError> {
        check_frac_bits(frac_bits)?;
        if x.is_empty() {
            return Err(CoreError::EmptyInstance);
        }
        if let Some(p) = &planting {
            if p.sigma_star.n() != x.len() {
                return Err(CoreError::DimensionMismatch(p.sigma_star.n(), x.len()));
            }
        }
        let inst = Instance {
            n: x.len(),
            frac_bits,
            x,
            planting,
        };
        // Planted metadata must satisfy its own invariants: the stored
        // target equals <sigma*, X> and sits inside the conditioning bound.
        if inst.planting.is_some() && !inst.verify_planting()? {
            return Err(CoreError::PlantingInconsistent);
        }
        Ok(inst)
    }

    /// Round reals onto the grid; deterministic (round half to even).
    pub fn quantize(values: &[f64], frac_bits: u32) -> Result<Self, CoreError> {
        let x = values
            .iter()
            .map(|&v| FixedReal::quantize(v, frac_bits))
            .collect::<Result<Vec<_>, _>>()?;
        Instance::new(x, frac_bits, None)
    }

    pub fn dequantize(&self) -> Vec<f64> {
        self.x.iter().map(|v| v.to_f64(self.frac_bits)).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn values(&self) -> &[FixedReal] {
        &self.x
    }

    pub fn value(&self, i: usize) -> FixedReal {
        self.x[i]
    }

    pub fn planting(&self) -> Option<&Planting> {
        self.planting.as_ref()
    }

    pub(crate) fn set_planting(&mut self, p: Planting) {
        self.planting = Some(p);
    }

    /// Exact signed inner product `<sigma, X>` as a grid numerator.
    pub fn inner_product(&self, sigma: &Partition) -> Result<I256, CoreError> {
        if sigma.n() != self.n {
            return Err(CoreError::DimensionMismatch(sigma.n(), self.n));
        }
        let mut acc = I256::ZERO;
        for (i, v) in self.x.iter().enumerate() {
            if sigma.sign(i) == 1 {
                acc += v.numerator();
            } else {
                acc -= v.numerator();
            }
        }
        Ok(acc)
    }

    /// `H(sigma, X) = |<sigma, X>| / sqrt(n)`, exact in the numerator.
    pub fn hamiltonian(&self, sigma: &Partition) -> Result<Energy, CoreError> {
        let ip = self.inner_product(sigma)?;
        Ok(Energy::from_inner_product(ip, self.n as u32, self.frac_bits))
    }

    /// Twice each coordinate, the per-flip update steps for scans.
    pub fn doubled_numerators(&self) -> Vec<I256> {
        self.x
            .iter()
            .map(|v| v.numerator() + v.numerator())
            .collect()
    }

    /// Exact check of the planting invariants: the stored target equals
    /// `<sigma*, X>` and satisfies the conditioning bound.
    pub fn verify_planting(&self) -> Result<bool, CoreError> {
        let p = self
            .planting
            .as_ref()
            .ok_or(CoreError::NotPlanted)?;
        let ip = self.inner_product(&p.sigma_star)?;
        if ip != p.target.numerator() {
            return Ok(false);
        }
        let bound =
            Threshold::planting_bound(self.n as u32, self.frac_bits, p.base_c, p.bound)?;
        Ok(self.hamiltonian(&p.sigma_star)?.le(&bound))
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        match &self.planting {
            None => writeln!(w, "{} {}", self.n, self.frac_bits)?,
            Some(p) => {
                let mult = match p.bound {
                    BoundMultiplier::One => "1",
                    BoundMultiplier::Sqrt2 => "sqrt2",
                };
                writeln!(w, "{} {} {} {}", self.n, self.frac_bits, p.base_c, mult)?;
                writeln!(w, "{}", p.sigma_star)?;
                writeln!(w, "{}", p.target)?;
            }
        }
        for v in &self.x {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("instance text is ASCII")
    }

    pub fn read_from<R: BufRead>(r: &mut R) -> Result<Self, CoreError> {
        let mut lines = r.lines();
        let mut next = || -> Result<String, CoreError> {
            lines
                .next()
                .ok_or(CoreError::Truncated)?
                .map_err(|e| CoreError::Io(e.to_string()))
        };
        let header = next()?;
        let tok: Vec<&str> = header.split_whitespace().collect();
        if tok.len() != 2 && tok.len() != 3 && tok.len() != 4 {
            return Err(CoreError::BadHeader(header));
        }
        let n: usize = tok[0].parse().map_err(|_| CoreError::BadHeader(header.clone()))?;
        let frac_bits: u32 =
            tok[1].parse().map_err(|_| CoreError::BadHeader(header.clone()))?;
        let planting = if tok.len() >= 3 {
            let base_c: f64 =
                tok[2].parse().map_err(|_| CoreError::BadHeader(header.clone()))?;
            let bound = match tok.get(3).copied().unwrap_or("1") {
                "1" => BoundMultiplier::One,
                "sqrt2" => BoundMultiplier::Sqrt2,
                other => return Err(CoreError::BadHeader(other.to_string())),
            };
            let sigma_star: Partition = next()?.trim().parse()?;
            let target = FixedReal::from_numerator(
                next()?
                    .trim()
                    .parse()
                    .map_err(|_| CoreError::BadNumerator)?,
            );
            Some(Planting {
                sigma_star,
                base_c,
                bound,
                target,
            })
        } else {
            None
        };
        let mut x = Vec::with_capacity(n);
        for _ in 0..n {
            let line = next()?;
            x.push(FixedReal::from_numerator(
                line.trim().parse().map_err(|_| CoreError::BadNumerator)?,
            ));
        }
        Instance::new(x, frac_bits, planting)
    }

    pub fn parse_text(s: &str) -> Result<Self, CoreError> {
        Instance::read_from(&mut s.as_bytes())
    }
}

/// Quantize with the default grid.
pub fn quantize_default(values: &[f64]) -> Result<Instance, CoreError> {
    Instance::quantize(values, DEFAULT_FRAC_BITS)
}
