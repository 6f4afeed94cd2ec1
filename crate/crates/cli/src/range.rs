//! Sweep syntax: comma-separated items, each a number or `start:stop:logK`
//! / `start:stop:linK` (K points, both ends included).

fn parse_real(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not finite: {s:?}"))
    }
}

fn parse_item(item: &str, out: &mut Vec<f64>) -> Result<(), String> {
    let parts: Vec<&str> = item.split(':').collect();
    match parts.as_slice() {
        [one] => out.push(parse_real(one)?),
        [start, stop, spec] => {
            let (start, stop) = (parse_real(start)?, parse_real(stop)?);
            let (log, count) = if let Some(k) = spec.strip_prefix("log") {
                (true, k)
            } else if let Some(k) = spec.strip_prefix("lin") {
                (false, k)
            } else {
                return Err(format!("expected logK or linK, got {spec:?}"));
            };
            let k: usize = count.parse().map_err(|_| format!("bad point count {count:?}"))?;
            if k == 0 {
                return Err("a range needs at least one point".into());
            }
            if log && !(start > 0.0 && stop > 0.0) {
                return Err(format!("log range needs positive ends: {item:?}"));
            }
            for i in 0..k {
                let t = if k == 1 { 0.0 } else { i as f64 / (k - 1) as f64 };
                let v = if log {
                    (start.ln() + t * (stop.ln() - start.ln())).exp()
                } else {
                    start + t * (stop - start)
                };
                out.push(if i + 1 == k { stop } else { v });
            }
        }
        _ => return Err(format!("cannot parse {item:?}")),
    }
    Ok(())
}

pub fn parse_reals(text: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        parse_item(item.trim(), &mut out)?;
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

/// Positive integers; range points are rounded and repeats dropped.
pub fn parse_counts(text: &str) -> Result<Vec<u64>, String> {
    let mut out: Vec<u64> = Vec::new();
    for v in parse_reals(text)? {
        let r = v.round();
        if !(1.0..=1e15).contains(&r) {
            return Err(format!("{v} is not a usable count"));
        }
        if out.last() != Some(&(r as u64)) {
            out.push(r as u64);
        }
    }
    Ok(out)
}
