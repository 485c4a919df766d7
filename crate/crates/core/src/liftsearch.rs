//! Search for rational periodic points of `phi` from cycle data modulo many
//! primes.
//!
//! For a rational point of primitive period `n` and a prime of good
//! reduction, the period of the reduced point divides `n`. The search keeps,
//! at each prime, the points whose period divides `n`, glues residue choices
//! across primes by CRT and rational reconstruction, and verifies every
//! reconstructed point exactly over the integers.

use std::collections::{BTreeMap, HashSet};
use std::thread;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ff::{odd_primes, Rationals};
use crate::fiber::{describe_point, phi};
use crate::orbit::{cycle_decomposition, CycleTable, ResiduePoint};
use crate::surface::{SurfaceCoefficients, SurfacePoint};

/// A point over the integers; normalized points are primitive in each factor
/// with a positive leading coordinate.
pub type ZPoint = SurfacePoint<BigInt>;

pub fn zpoint(x: [i64; 3], y: [i64; 3]) -> ZPoint {
    SurfacePoint::new(x.map(BigInt::from), y.map(BigInt::from))
}

fn to_rational(pt: &ZPoint) -> SurfacePoint<BigRational> {
    SurfacePoint::new(Rationals::lift(&pt.x), Rationals::lift(&pt.y))
}

fn to_integer(pt: &SurfacePoint<BigRational>) -> Option<ZPoint> {
    Some(SurfacePoint::new(
        Rationals::primitive(&pt.x)?,
        Rationals::primitive(&pt.y)?,
    ))
}

/// Primitive representative; `None` if either triple is zero.
pub fn primitive_point(pt: &ZPoint) -> Option<ZPoint> {
    to_integer(&to_rational(pt))
}

/// Reduction modulo `p`, normalized so the first nonzero coordinate is 1.
pub fn reduce_point(pt: &ZPoint, p: u64) -> Option<ResiduePoint> {
    let reduce = |v: &[BigInt; 3]| -> Option<[u64; 3]> {
        let pb = BigInt::from(p);
        let r = v.clone().map(|c| c.mod_floor(&pb).to_u64().unwrap());
        let pivot = r.iter().position(|&c| c != 0)?;
        let inv = mod_inverse(r[pivot], p);
        Some(r.map(|c| ((c as u128 * inv as u128) % p as u128) as u64))
    };
    Some([reduce(&pt.x)?, reduce(&pt.y)?])
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    let e = BigInt::from(a).extended_gcd(&BigInt::from(p));
    e.x.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

pub fn point_to_json(pt: &ZPoint) -> Value {
    let coord = |c: &BigInt| match c.to_i64() {
        Some(v) => json!(v),
        None => json!(c.to_string()),
    };
    json!({
        "x": pt.x.iter().map(coord).collect::<Vec<_>>(),
        "y": pt.y.iter().map(coord).collect::<Vec<_>>(),
    })
}

/// Parse `{"x": [3 integers], "y": [3 integers]}`. Large coordinates may be
/// given as decimal strings.
pub fn parse_point(text: &str) -> Result<ZPoint> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let triple = |key: &str| -> Result<[BigInt; 3]> {
        let arr = v
            .get(key)
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse(format!("missing array \"{key}\"")))?;
        if arr.len() != 3 {
            return Err(Error::Arity {
                what: "point",
                expected: 3,
                found: arr.len(),
            });
        }
        let mut out: [BigInt; 3] = Default::default();
        for (slot, c) in out.iter_mut().zip(arr) {
            *slot = match c {
                Value::Number(n) => n.as_i64().map(BigInt::from),
                Value::String(s) => s.parse().ok(),
                _ => None,
            }
            .ok_or_else(|| Error::Parse(format!("non-integer coordinate {c}")))?;
        }
        Ok(out)
    };
    let pt = SurfacePoint::new(triple("x")?, triple("y")?);
    if pt.x.iter().all(Zero::is_zero) || pt.y.iter().all(Zero::is_zero) {
        return Err(Error::Parse("a coordinate triple is zero".into()));
    }
    Ok(pt)
}

// ---------------------------------------------------------------------------
// Exact verification over Q

/// Primitive period of `pt`, confirmed by iterating `phi` exactly; the
/// period must divide `n`.
pub fn verify_periodic(coeffs: &SurfaceCoefficients, pt: &ZPoint, n: usize) -> Result<usize> {
    match primitive_period(coeffs, pt, n)? {
        Some(k) if n.is_multiple_of(k) => Ok(k),
        _ => Err(Error::NotPeriodic(n)),
    }
}

/// Least `k <= max_steps` with `phi^k(pt) = pt`, if any.
pub fn primitive_period(
    coeffs: &SurfaceCoefficients,
    pt: &ZPoint,
    max_steps: usize,
) -> Result<Option<usize>> {
    orbit_period(coeffs, pt, max_steps, None)
}

/// As [`primitive_period`], but gives up once a coordinate exceeds
/// `max_bits`; heights of non-periodic points grow exponentially.
pub fn orbit_period(
    coeffs: &SurfaceCoefficients,
    pt: &ZPoint,
    max_steps: usize,
    max_bits: Option<u64>,
) -> Result<Option<usize>> {
    let surface = coeffs.over(&Rationals);
    let start =
        primitive_point(pt).ok_or_else(|| Error::NotOnSurface("zero coordinate triple".into()))?;
    let start = to_rational(&start);
    if !surface.contains(&start) {
        return Err(Error::NotOnSurface(describe_point(&Rationals, &start)));
    }
    let mut cur = start.clone();
    for k in 1..=max_steps {
        cur = phi(&surface, &cur)?;
        if cur == start {
            return Ok(Some(k));
        }
        if let Some(limit) = max_bits {
            let bits = cur
                .x
                .iter()
                .chain(&cur.y)
                .map(|c| c.numer().bits())
                .max()
                .unwrap_or(0);
            if bits > limit {
                return Ok(None);
            }
        }
    }
    Ok(None)
}

fn on_surface(coeffs: &SurfaceCoefficients, pt: &ZPoint) -> bool {
    coeffs.over(&Rationals).contains(&to_rational(pt))
}

// ---------------------------------------------------------------------------
// CRT and rational reconstruction

/// Combine residues `(r_k mod p_k)` into the centered representative modulo
/// `M = prod p_k`, returned with `M`.
pub fn crt(residues: &[(u64, u64)]) -> (BigInt, BigInt) {
    let mut value = BigInt::zero();
    let mut modulus = BigInt::one();
    for &(r, p) in residues {
        let pb = BigInt::from(p);
        // value + modulus * t = r (mod p)
        let diff = (BigInt::from(r) - &value).mod_floor(&pb);
        let inv = modulus.extended_gcd(&pb).x.mod_floor(&pb);
        let t = (diff * inv).mod_floor(&pb);
        value += &modulus * t;
        modulus *= pb;
    }
    let half = &modulus >> 1;
    if value > half {
        value -= &modulus;
    }
    (value, modulus)
}

/// The unique `a/b` with `|a|, b <= sqrt(M/2)` and `a = b c (mod M)`, if it
/// exists, via the half-extended Euclidean algorithm.
pub fn rational_reconstruct(c: &BigInt, modulus: &BigInt) -> Option<BigRational> {
    let bound = (modulus >> 1u32).sqrt();
    let (mut r0, mut r1) = (modulus.clone(), c.mod_floor(modulus));
    let (mut s0, mut s1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let s2 = &s0 - &q * &s1;
        r0 = std::mem::replace(&mut r1, r2);
        s0 = std::mem::replace(&mut s1, s2);
    }
    if s1.is_zero() || s1.abs() > bound || !r1.gcd(&s1).is_one() {
        return None;
    }
    Some(BigRational::new(r1, s1))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CrtError {
    /// Residues normalized at different pivot positions.
    PivotMismatch,
    /// Some coordinate has no small rational preimage.
    ReconstructionFailed,
}

fn pivot_pattern(pt: &ResiduePoint) -> (usize, usize) {
    let pivot = |v: &[u64; 3]| v.iter().position(|&c| c != 0).unwrap_or(3);
    (pivot(&pt[0]), pivot(&pt[1]))
}

/// Lift residue points at distinct primes to one integer point.
pub fn crt_reconstruct(residues: &[(u64, ResiduePoint)]) -> std::result::Result<ZPoint, CrtError> {
    let pattern = pivot_pattern(&residues[0].1);
    if residues.iter().any(|(_, r)| pivot_pattern(r) != pattern) {
        return Err(CrtError::PivotMismatch);
    }
    let mut coords: [[BigRational; 3]; 2] = Default::default();
    for side in 0..2 {
        for i in 0..3 {
            let pairs: Vec<(u64, u64)> = residues.iter().map(|(p, r)| (r[side][i], *p)).collect();
            let (c, m) = crt(&pairs);
            coords[side][i] = rational_reconstruct(&c, &m).ok_or(CrtError::ReconstructionFailed)?;
        }
    }
    let [x, y] = coords;
    to_integer(&SurfacePoint::new(x, y)).ok_or(CrtError::ReconstructionFailed)
}

// ---------------------------------------------------------------------------
// Search

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CandidateMode {
    /// Only primes whose qualifying points form a single cycle.
    Strict,
    /// Every point of period dividing `n` at every prime.
    Exhaustive,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub period: usize,
    pub primes: Vec<u64>,
    pub mode: CandidateMode,
    /// Maximum number of residue combinations tried per surface.
    pub budget: usize,
    /// Random coefficients are drawn from `[-coeff_range, coeff_range]`.
    pub coeff_range: i64,
    pub threads: usize,
}

impl SearchConfig {
    pub fn new(period: usize) -> Self {
        SearchConfig {
            period,
            primes: odd_primes().take(30).collect(),
            mode: CandidateMode::Strict,
            budget: 10_000,
            coeff_range: 1,
            threads: 1,
        }
    }

    pub fn with_prime_count(mut self, count: usize) -> Self {
        self.primes = odd_primes().take(count).collect();
        self
    }
}

/// Qualifying points at one prime, in the order combinations try them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeCandidates {
    pub prime: u64,
    pub points: Vec<(ResiduePoint, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selection {
    Candidates(Vec<PrimeCandidates>),
    /// This prime has no point whose period divides `n`, so no rational
    /// point of period `n` exists.
    NoPoint {
        prime: u64,
    },
}

/// Cycles (as index lists) of the points whose period divides `n`.
fn qualifying_cycles(table: &CycleTable, n: usize) -> Vec<Vec<usize>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for i in 0..table.len() {
        let id = table.cycle_id[i];
        if n.is_multiple_of(table.cycle_length[i]) && seen.insert(id) {
            out.push(table.cycle(id));
        }
    }
    out
}

pub fn select_candidates(tables: &[CycleTable], n: usize, mode: CandidateMode) -> Selection {
    let mut out = Vec::new();
    for table in tables.iter().filter(|t| !t.degenerate) {
        let cycles = qualifying_cycles(table, n);
        if cycles.is_empty() {
            return Selection::NoPoint { prime: table.prime };
        }
        let annotate = |idx: &[usize]| -> Vec<(ResiduePoint, usize)> {
            idx.iter()
                .map(|&i| (table.points[i], table.cycle_length[i]))
                .collect()
        };
        let chosen = match mode {
            CandidateMode::Exhaustive => cycles.iter().flat_map(|c| annotate(c)).collect(),
            CandidateMode::Strict => {
                let exact: Vec<&Vec<usize>> = cycles.iter().filter(|c| c.len() == n).collect();
                if exact.len() == 1 {
                    annotate(exact[0])
                } else if cycles.len() == 1 {
                    annotate(&cycles[0])
                } else {
                    continue;
                }
            }
        };
        out.push(PrimeCandidates {
            prime: table.prime,
            points: chosen,
        });
    }
    Selection::Candidates(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifiedPoint {
    pub point: ZPoint,
    pub period: usize,
    /// `point, phi(point), ...`, one entry per orbit point.
    pub orbit: Vec<ZPoint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Found,
    NoPeriodicPoint { prime: u64 },
    NeedsMorePrimes,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeSummary {
    pub prime: u64,
    pub degenerate: bool,
    pub points: usize,
    /// Points whose period divides the target.
    pub qualifying: usize,
}

#[derive(Clone, Debug)]
pub struct SearchReport {
    pub surface: SurfaceCoefficients,
    pub period: usize,
    pub primes: Vec<PrimeSummary>,
    pub combinations_tried: usize,
    pub verified: Vec<VerifiedPoint>,
    pub verdict: Verdict,
}

impl SearchReport {
    pub fn to_json(&self) -> Value {
        let verdict = match &self.verdict {
            Verdict::Found => json!("found"),
            Verdict::NoPeriodicPoint { prime } => json!({"no_periodic_point": {"prime": prime}}),
            Verdict::NeedsMorePrimes => json!("needs_more_primes"),
        };
        json!({
            "surface": serde_json::to_value(&self.surface).unwrap(),
            "period": self.period,
            "primes": self.primes.iter().map(|s| json!({
                "p": s.prime, "degenerate": s.degenerate, "points": s.points, "qualifying": s.qualifying
            })).collect::<Vec<_>>(),
            "combinations_tried": self.combinations_tried,
            "verified": self.verified.iter().map(|v| json!({
                "point": point_to_json(&v.point),
                "period": v.period,
                "orbit": v.orbit.iter().map(point_to_json).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "verdict": verdict,
        })
    }
}

fn cycle_tables(
    coeffs: &SurfaceCoefficients,
    primes: &[u64],
    threads: usize,
) -> Result<Vec<CycleTable>> {
    let threads = threads.max(1);
    if threads == 1 || primes.len() < 2 {
        return primes
            .iter()
            .map(|&p| cycle_decomposition(coeffs, p))
            .collect();
    }
    let chunk = primes.len().div_ceil(threads);
    let results: Vec<Result<Vec<CycleTable>>> = thread::scope(|scope| {
        let handles: Vec<_> = primes
            .chunks(chunk)
            .map(|ps| {
                scope.spawn(move || ps.iter().map(|&p| cycle_decomposition(coeffs, p)).collect())
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(primes.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// State shared by the combination search over one candidate selection.
struct Combiner<'a> {
    coeffs: &'a SurfaceCoefficients,
    n: usize,
    budget: usize,
    tried: usize,
    found: BTreeMap<String, VerifiedPoint>,
    /// Every point of every verified orbit, to skip rediscoveries.
    known: HashSet<ZPoint>,
}

impl Combiner<'_> {
    fn record(&mut self, pt: ZPoint, period: usize) -> Result<()> {
        if self.known.contains(&pt) {
            return Ok(());
        }
        let surface = self.coeffs.over(&Rationals);
        let mut cur = to_rational(&pt);
        let mut orbit = Vec::with_capacity(period);
        for _ in 0..period {
            let z = to_integer(&cur).expect("orbit points are nonzero");
            self.known.insert(z.clone());
            orbit.push(z);
            cur = phi(&surface, &cur)?;
        }
        let key = describe_point(&Rationals, &to_rational(&pt));
        self.found.insert(
            key,
            VerifiedPoint {
                point: pt,
                period,
                orbit,
            },
        );
        Ok(())
    }

    /// Breadth-first over primes so that short prefixes (few primes) are all
    /// tried before longer ones; a prefix whose reconstruction verifies is
    /// not extended.
    fn run(&mut self, selection: &[PrimeCandidates]) -> Result<()> {
        if selection.is_empty() {
            return Ok(());
        }
        let mut ordered: Vec<&PrimeCandidates> = selection.iter().collect();
        ordered.sort_by_key(|c| (c.points.len(), c.prime));

        // phi-orbits are invariant, so one representative per cycle suffices
        // at the first prime; cycles are stored contiguously
        let first = ordered[0];
        let mut frontier: Vec<Vec<(u64, ResiduePoint)>> = Vec::new();
        let mut i = 0;
        while i < first.points.len() {
            frontier.push(vec![(first.prime, first.points[i].0)]);
            i += first.points[i].1.max(1);
        }
        let mut kept = Vec::new();
        for prefix in frontier {
            if !self.try_prefix(&prefix)? {
                kept.push(prefix);
            }
        }
        let mut frontier = kept;

        for next in &ordered[1..] {
            let mut grown = Vec::new();
            for prefix in &frontier {
                let pattern = pivot_pattern(&prefix[0].1);
                let compatible: Vec<&ResiduePoint> = next
                    .points
                    .iter()
                    .map(|(pt, _)| pt)
                    .filter(|pt| pivot_pattern(pt) == pattern)
                    .collect();
                if compatible.is_empty() {
                    grown.push(prefix.clone());
                    continue;
                }
                for pt in compatible {
                    let mut ext = prefix.clone();
                    ext.push((next.prime, *pt));
                    if self.tried >= self.budget {
                        return Ok(());
                    }
                    if !self.try_prefix(&ext)? {
                        grown.push(ext);
                    }
                }
            }
            frontier = grown;
            if frontier.is_empty() {
                break;
            }
        }
        Ok(())
    }

    /// Reconstruct and verify; true when the prefix yielded a verified point.
    fn try_prefix(&mut self, prefix: &[(u64, ResiduePoint)]) -> Result<bool> {
        self.tried += 1;
        let Ok(candidate) = crt_reconstruct(prefix) else {
            return Ok(false);
        };
        if !on_surface(self.coeffs, &candidate) {
            return Ok(false);
        }
        match verify_periodic(self.coeffs, &candidate, self.n) {
            Ok(period) => {
                self.record(candidate, period)?;
                Ok(true)
            }
            Err(Error::NotPeriodic(_)) | Err(Error::DegenerateFiber { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }
}

/// Run the full search on one surface.
pub fn search(coeffs: &SurfaceCoefficients, config: &SearchConfig) -> Result<SearchReport> {
    let n = config.period;
    if n == 0 {
        return Err(Error::InvalidSurface(
            "target period must be at least 1".into(),
        ));
    }
    let tables = cycle_tables(coeffs, &config.primes, config.threads)?;
    let mut summaries = Vec::new();
    let mut used = Vec::new();
    for t in &tables {
        let qualifying = if t.degenerate {
            0
        } else {
            t.cycle_length
                .iter()
                .filter(|&&l| n.is_multiple_of(l))
                .count()
        };
        summaries.push(PrimeSummary {
            prime: t.prime,
            degenerate: t.degenerate,
            points: t.len(),
            qualifying,
        });
        used.push(t.clone());
        if !t.degenerate && qualifying == 0 {
            break;
        }
    }
    let report = |verified, verdict, tried| SearchReport {
        surface: coeffs.clone(),
        period: n,
        primes: summaries.clone(),
        combinations_tried: tried,
        verified,
        verdict,
    };

    let strict = match select_candidates(&used, n, CandidateMode::Strict) {
        Selection::NoPoint { prime } => {
            return Ok(report(Vec::new(), Verdict::NoPeriodicPoint { prime }, 0))
        }
        Selection::Candidates(c) => c,
    };
    let mut combiner = Combiner {
        coeffs,
        n,
        budget: config.budget,
        tried: 0,
        found: BTreeMap::new(),
        known: HashSet::new(),
    };
    combiner.run(&strict)?;
    if config.mode == CandidateMode::Exhaustive {
        if let Selection::Candidates(all) = select_candidates(&used, n, CandidateMode::Exhaustive) {
            combiner.budget = combiner.tried + config.budget;
            combiner.run(&all)?;
        }
    }
    let verified: Vec<VerifiedPoint> = combiner.found.into_values().collect();
    let verdict = if verified.is_empty() {
        Verdict::NeedsMorePrimes
    } else {
        Verdict::Found
    };
    Ok(report(verified, verdict, combiner.tried))
}

/// Coefficients drawn uniformly from `[-range, range]`; resampled in the
/// (rare) event that `L` or `Q` comes out identically zero.
pub fn random_surface<R: Rng + ?Sized>(range: i64, rng: &mut R) -> SurfaceCoefficients {
    let range = range.max(1);
    loop {
        let l: Vec<i64> = (0..9).map(|_| rng.gen_range(-range..=range)).collect();
        let q: Vec<i64> = (0..36).map(|_| rng.gen_range(-range..=range)).collect();
        if let Ok(s) = SurfaceCoefficients::new(&l, &q) {
            return s;
        }
    }
}
