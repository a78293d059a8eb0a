use std::str::FromStr;

use inthist::{Error, Region, Result, Strategy};

/// `r0,c0,r1,c1`, inclusive.
pub fn parse_region(s: &str) -> Result<Region> {
    let parts: Vec<usize> = parse_list(s, "region")?;
    match parts[..] {
        [r0, c0, r1, c1] => Region::new(r0, c0, r1, c1),
        _ => Err(Error::Parameter(format!(
            "region {s:?} must have four comma-separated values r0,c0,r1,c1"
        ))),
    }
}

/// `WxH`, or `N` for an `N x N` image.
pub fn parse_size(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parameter(format!("bad size {s:?}, expected WxH or N"));
    match s.split_once(['x', 'X']) {
        Some((w, h)) => Ok((w.trim().parse().map_err(|_| bad())?, h.trim().parse().map_err(|_| bad())?)),
        None => {
            let n = s.trim().parse().map_err(|_| bad())?;
            Ok((n, n))
        }
    }
}

pub fn parse_list<T: FromStr>(s: &str, flag: &str) -> Result<Vec<T>> {
    let items = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| Error::Parameter(format!("bad value {t:?} for --{flag}")))
        })
        .collect::<Result<Vec<T>>>()?;
    if items.is_empty() {
        return Err(Error::Parameter(format!("--{flag} needs at least one value")));
    }
    Ok(items)
}

/// Strategy from its name plus the optional `--tile` flag.
pub fn resolve_strategy(name: &str, tile: Option<usize>) -> Result<Strategy> {
    match (name.parse::<Strategy>()?, tile) {
        (Strategy::WavefrontTiled { .. }, Some(t)) if !name.contains(':') => Strategy::wavefront(t),
        (Strategy::WavefrontTiled { tile }, None) => Strategy::wavefront(tile),
        (s @ Strategy::WavefrontTiled { .. }, Some(_)) => Ok(s),
        (s, None) => Ok(s),
        (s, Some(_)) => Err(Error::Parameter(format!("--tile only applies to wavefront, not {s}"))),
    }
}
