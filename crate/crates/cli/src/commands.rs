use std::path::Path;

use anyhow::{bail, Result};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wehler_k3::ff::is_prime;
use wehler_k3::liftsearch::{
    orbit_period, point_to_json, primitive_point, random_surface, search as run_search,
    verify_periodic, CandidateMode, SearchConfig, SearchReport, Verdict,
};
use wehler_k3::orbit::{count_points, cycle_decomposition, find_degenerate_fiber, CycleTable};
use wehler_k3::zeta::{real_roots_within, zeta_report, ZetaData, HALF_BETTI};
use wehler_k3::{Error, Side, SurfaceCoefficients};

use crate::files;
use crate::{Context, Format, SearchArgs, ZetaArgs};

fn big_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

fn require_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p).into());
    }
    Ok(())
}

fn require_odd_prime(p: u64) -> Result<()> {
    require_prime(p)?;
    if p == 2 {
        bail!("p must be odd");
    }
    Ok(())
}

fn fmt_triple(v: &[u64; 3]) -> String {
    format!("[{},{},{}]", v[0], v[1], v[2])
}

fn fmt_zpoint(pt: &wehler_k3::liftsearch::ZPoint) -> String {
    let t = |v: &[BigInt; 3]| format!("[{},{},{}]", v[0], v[1], v[2]);
    format!("[{},{}]", t(&pt.x), t(&pt.y))
}

pub fn check(ctx: &Context, surface: &Path, primes: &[u64]) -> Result<u8> {
    let s = files::read_surface(surface)?;
    for &p in primes {
        require_prime(p)?;
    }
    let mut rows = Vec::new();
    for &p in primes {
        let (vanishes, x, y) = match s.reduce_mod_p(p) {
            Err(_) => (true, None, None),
            Ok(_) => (
                false,
                find_degenerate_fiber(&s, p, Side::X)?,
                find_degenerate_fiber(&s, p, Side::Y)?,
            ),
        };
        match ctx.format {
            Format::Human => {
                let side = |f: Option<[u64; 3]>| match f {
                    None => "ok".to_string(),
                    Some(a) => format!("degenerate over {}", fmt_triple(&a)),
                };
                if vanishes {
                    println!("p = {p}: reduction vanishes");
                } else {
                    println!("p = {p}: x {}, y {}", side(x), side(y));
                }
            }
            Format::Machine => rows.push(json!({
                "p": p,
                "vanishes": vanishes,
                "x": x,
                "y": y,
                "good": !vanishes && x.is_none() && y.is_none(),
            })),
        }
    }
    if ctx.format == Format::Machine {
        println!("{}", json!({"surface": s.digest(), "primes": rows}));
    }
    Ok(0)
}

fn compute_counts(
    ctx: &Context,
    s: &SurfaceCoefficients,
    p: u64,
    mmax: u32,
    stream: bool,
) -> Result<Vec<u64>> {
    let mut counts = Vec::new();
    for m in 1..=mmax {
        let n = count_points(s, p, m, ctx.threads)?;
        if stream && ctx.format == Format::Human {
            println!("{m} {n}");
        }
        counts.push(n);
    }
    Ok(counts)
}

fn save_counts(
    ctx: &Context,
    s: &SurfaceCoefficients,
    p: u64,
    counts: &[u64],
    out: Option<&Path>,
) -> Result<()> {
    let path = match (out, &ctx.cache_dir) {
        (Some(path), _) => path.to_path_buf(),
        (None, Some(cache)) => files::counts_path(cache, s, p),
        (None, None) => return Ok(()),
    };
    files::write_file(&path, &files::format_counts(counts))?;
    eprintln!("counts written to {}", path.display());
    Ok(())
}

pub fn count(ctx: &Context, surface: &Path, p: u64, mmax: u32, out: Option<&Path>) -> Result<u8> {
    require_odd_prime(p)?;
    if mmax == 0 {
        bail!("--mmax must be at least 1");
    }
    let s = files::read_surface(surface)?;
    let counts = compute_counts(ctx, &s, p, mmax, true)?;
    if ctx.format == Format::Machine {
        println!(
            "{}",
            json!({"surface": s.digest(), "p": p, "counts": counts})
        );
    }
    save_counts(ctx, &s, p, &counts, out)?;
    Ok(0)
}

fn degenerate_error(s: &SurfaceCoefficients, p: u64) -> Result<Error> {
    if s.reduce_mod_p(p).is_err() {
        return Ok(Error::DegenerateFiber {
            side: Side::X,
            point: format!("every point (reduction mod {p} vanishes)"),
        });
    }
    for side in [Side::X, Side::Y] {
        if let Some(a) = find_degenerate_fiber(s, p, side)? {
            return Ok(Error::DegenerateFiber {
                side,
                point: format!("{} mod {p}", fmt_triple(&a)),
            });
        }
    }
    Ok(Error::Inconsistent(format!(
        "cycle table mod {p} marked degenerate"
    )))
}

fn cycle_table(ctx: &Context, s: &SurfaceCoefficients, p: u64) -> Result<CycleTable> {
    if let Some(cache) = &ctx.cache_dir {
        if let Some(table) = files::load_cycles(cache, s, p) {
            eprintln!("using cached cycle table");
            return Ok(table);
        }
    }
    let table = cycle_decomposition(s, p)?;
    if let Some(cache) = &ctx.cache_dir {
        files::store_cycles(cache, s, &table)?;
    }
    Ok(table)
}

pub fn cycles(ctx: &Context, surface: &Path, p: u64) -> Result<u8> {
    require_prime(p)?;
    let s = files::read_surface(surface)?;
    let table = cycle_table(ctx, &s, p)?;
    if table.degenerate {
        return Err(degenerate_error(&s, p)?.into());
    }
    let spectrum = table.spectrum();
    match ctx.format {
        Format::Human => {
            println!("p = {p}: {} points", table.len());
            println!("cycle length x number of cycles:");
            for (len, n) in &spectrum {
                println!("  {len} x {n}");
            }
        }
        Format::Machine => {
            let spec: Vec<[usize; 2]> = spectrum.iter().map(|(&l, &n)| [l, n]).collect();
            println!(
                "{}",
                json!({"surface": s.digest(), "p": p, "points": table.len(), "spectrum": spec})
            );
        }
    }
    Ok(0)
}

fn describe_verdict(report: &SearchReport) -> String {
    match &report.verdict {
        Verdict::Found => report
            .verified
            .iter()
            .map(|v| format!("{} period {}", fmt_zpoint(&v.point), v.period))
            .collect::<Vec<_>>()
            .join("; "),
        Verdict::NoPeriodicPoint { prime } => {
            format!(
                "no point of period {}: none of period dividing it mod {prime}",
                report.period
            )
        }
        Verdict::NeedsMorePrimes => "undecided (more primes needed)".to_string(),
    }
}

pub fn search(ctx: &Context, args: &SearchArgs) -> Result<u8> {
    if args.period == 0 {
        bail!("--period must be at least 1");
    }
    if args.primes == 0 {
        bail!("--primes must be at least 1");
    }
    let mut config = SearchConfig::new(args.period).with_prime_count(args.primes);
    config.mode = if args.exhaustive {
        CandidateMode::Exhaustive
    } else {
        CandidateMode::Strict
    };
    config.budget = args.budget;
    config.coeff_range = args.coeff_range;
    config.threads = ctx.threads;

    let surfaces: Vec<SurfaceCoefficients> = match &args.surface {
        Some(path) => vec![files::read_surface(path)?],
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            (0..args.surfaces.unwrap_or(1))
                .map(|_| random_surface(config.coeff_range, &mut rng))
                .collect()
        }
    };
    let mut found = 0;
    for (i, s) in surfaces.iter().enumerate() {
        let report = run_search(s, &config)?;
        if report.verdict == Verdict::Found {
            found += 1;
        }
        match ctx.format {
            Format::Human => println!("#{i} {}: {}", &s.digest()[..12], describe_verdict(&report)),
            Format::Machine => {
                let mut v = report.to_json();
                v["index"] = json!(i);
                println!("{v}");
            }
        }
    }
    if ctx.format == Format::Human && surfaces.len() > 1 {
        println!(
            "{found} of {} surfaces have verified points",
            surfaces.len()
        );
    }
    Ok(0)
}

pub fn zeta(ctx: &Context, args: &ZetaArgs) -> Result<u8> {
    require_prime(args.p)?;
    let counts: Vec<BigInt> = match (&args.source.counts, &args.source.surface) {
        (Some(path), _) => files::read_counts(path)?,
        (None, Some(path)) => {
            require_odd_prime(args.p)?;
            if (args.mmax as usize) < HALF_BETTI {
                bail!(
                    "the zeta function needs {HALF_BETTI} counts; --mmax {} is too small",
                    args.mmax
                );
            }
            let s = files::read_surface(path)?;
            let counts = compute_counts(ctx, &s, args.p, args.mmax, false)?;
            save_counts(ctx, &s, args.p, &counts, None)?;
            counts.into_iter().map(BigInt::from).collect()
        }
        (None, None) => unreachable!("clap enforces one source"),
    };
    let data = ZetaData::from_counts(&counts, args.p)?;
    let rh = real_roots_within(&data.r, 2 * args.p);
    match ctx.format {
        Format::Human => {
            print!("{}", zeta_report(&data));
            println!(
                "real roots of R(u) in [-{0}, {0}]: {1}",
                2 * args.p,
                if rh { "yes" } else { "no" }
            );
        }
        Format::Machine => {
            let list = |v: &[BigInt]| v.iter().map(big_json).collect::<Vec<_>>();
            println!(
                "{}",
                json!({
                    "p": data.p,
                    "counts": list(&data.counts),
                    "power_sums": list(&data.power_sums),
                    "symmetric": list(&data.symmetric),
                    "p2": list(&data.p2),
                    "multiplicities": data.multiplicities,
                    "picard_bound": data.picard_bound,
                    "picard_exact": data.picard_exact(),
                    "real_roots_within_bound": rh,
                })
            );
        }
    }
    Ok(0)
}

/// Steps and coordinate size explored when looking for the true period of a
/// point that fails the stated one.
const PERIOD_SEARCH_STEPS: usize = 200;
const PERIOD_SEARCH_BITS: u64 = 4096;

pub fn verify(ctx: &Context, surface: &Path, point: &Path, n: usize) -> Result<u8> {
    if n == 0 {
        bail!("--period must be at least 1");
    }
    let s = files::read_surface(surface)?;
    let pt = files::read_point(point)?;
    let normalized = primitive_point(&pt).expect("parse_point rejects zero triples");
    let (ok, period) = match verify_periodic(&s, &pt, n) {
        Ok(k) => (true, Some(k)),
        Err(Error::NotPeriodic(_)) => (
            false,
            orbit_period(
                &s,
                &pt,
                PERIOD_SEARCH_STEPS.max(n),
                Some(PERIOD_SEARCH_BITS),
            )?,
        ),
        Err(e) => return Err(e.into()),
    };
    match ctx.format {
        Format::Human => {
            let p = fmt_zpoint(&normalized);
            match (ok, period) {
                (true, Some(k)) if k == n => println!("{p}: verified, primitive period {k}"),
                (true, Some(k)) => println!("{p}: verified, primitive period {k} (divides {n})"),
                (_, Some(k)) => println!("{p}: not of period {n}; primitive period is {k}"),
                (_, None) => {
                    println!("{p}: not of period {n}; no period found within the search limit")
                }
            }
        }
        Format::Machine => println!(
            "{}",
            json!({
                "point": point_to_json(&normalized),
                "period": n,
                "verified": ok,
                "primitive_period": period,
            })
        ),
    }
    Ok(if ok { 0 } else { 2 })
}
