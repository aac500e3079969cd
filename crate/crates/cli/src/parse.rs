use anyhow::{anyhow, bail, Result};

/// Reads `0.125`, `1e-3`, `1/32` or `2^-4`.
pub fn real(s: &str) -> Result<f64> {
    let s = s.trim();
    let v = if let Some((a, b)) = s.split_once('/') {
        let (a, b): (f64, f64) = (a.trim().parse()?, b.trim().parse()?);
        if b == 0.0 {
            bail!("division by zero in '{s}'");
        }
        a / b
    } else if let Some((a, b)) = s.split_once('^') {
        let (a, b): (f64, f64) = (a.trim().parse()?, b.trim().parse()?);
        a.powf(b)
    } else {
        s.parse::<f64>().map_err(|_| anyhow!("'{s}' is not a number"))?
    };
    if !v.is_finite() {
        bail!("'{s}' is not finite");
    }
    Ok(v)
}

pub fn real_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(real).collect()
}
