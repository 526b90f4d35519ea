//! Large-sample checks of the samplers against moments computed here by
//! numerical integration rather than taken from the library.

use shelter_core::config::StayAttributes;
use shelter_core::des::RngStream;
use shelter_core::dist::{
    sample_bernoulli, sample_exponential, sample_triangular, sample_uniform_int, ExponentialParams,
    TriangularParams,
};

pub type Check = (String, Result<(), String>);

fn within(label: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!(
            "{label}: {got:.6} vs {want:.6} (tolerance {tol:.6})"
        ))
    }
}

fn tri_pdf(p: &TriangularParams, x: f64) -> f64 {
    let (a, c, b) = (p.min, p.mode, p.max);
    if x < a || x > b {
        0.0
    } else if x < c {
        2.0 * (x - a) / ((b - a) * (c - a))
    } else if x > c {
        2.0 * (b - x) / ((b - a) * (b - c))
    } else {
        2.0 / (b - a)
    }
}

/// Composite Simpson on [a, b], split at the mode so the kink is a node.
fn integrate(p: &TriangularParams, f: impl Fn(f64) -> f64) -> f64 {
    let simpson = |lo: f64, hi: f64| {
        let n = 2000;
        let h = (hi - lo) / n as f64;
        let g = |x: f64| f(x) * tri_pdf(p, x);
        let mut s = g(lo) + g(hi);
        for i in 1..n {
            s += g(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    simpson(p.min, p.mode) + simpson(p.mode, p.max)
}

fn check_triangular(name: &str, p: &TriangularParams, draws: usize) -> Result<(), String> {
    let mean = integrate(p, |x| x);
    let var = integrate(p, |x| (x - mean).powi(2));
    let m4 = integrate(p, |x| (x - mean).powi(4));
    let mut rng = RngStream::new(7, 0, name);
    let xs: Vec<f64> = (0..draws)
        .map(|_| sample_triangular(p, rng.unit()))
        .collect();
    if let Some(x) = xs.iter().find(|&&x| x < p.min || x > p.max) {
        return Err(format!("{name}: draw {x} outside [{}, {}]", p.min, p.max));
    }
    let n = draws as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    within(&format!("{name} mean"), m, mean, 3.0 * (var / n).sqrt())?;
    within(
        &format!("{name} mean"),
        m,
        (p.min + p.mode + p.max) / 3.0,
        0.1,
    )?;
    within(
        &format!("{name} variance"),
        v,
        var,
        3.0 * ((m4 - var * var) / n).sqrt(),
    )?;
    // The library's closed forms must agree with the integrals.
    within(
        &format!("{name} closed-form mean"),
        p.mean(),
        mean,
        1e-9 * mean.abs().max(1.0),
    )?;
    within(
        &format!("{name} closed-form variance"),
        p.variance(),
        var,
        1e-6 * var,
    )
}

fn check_exponential(draws: usize) -> Result<(), String> {
    let p = ExponentialParams::new(365.25 / 1399.0).map_err(|e| e.to_string())?;
    let mut rng = RngStream::new(7, 0, "exponential");
    let xs: Vec<f64> = (0..draws)
        .map(|_| sample_exponential(&p, rng.unit_open_low()))
        .collect();
    if xs.iter().any(|&x| x < 0.0) {
        return Err("negative inter-arrival time".into());
    }
    let m = xs.iter().sum::<f64>() / draws as f64;
    within("exponential mean", m, 0.261, 0.001)
}

fn check_bernoulli(draws: usize) -> Result<(), String> {
    let mut rng = RngStream::new(7, 0, "bernoulli");
    let hits = (0..draws)
        .filter(|_| sample_bernoulli(0.4, rng.unit()))
        .count();
    within(
        "bernoulli(0.4) frequency",
        hits as f64 / draws as f64,
        0.4,
        0.002,
    )
}

fn check_uniform_int(draws: usize) -> Result<(), String> {
    let mut rng = RngStream::new(7, 0, "uniform_int");
    let mut counts = [0usize; 3];
    for _ in 0..draws {
        match sample_uniform_int(2, 4, rng.unit()) {
            k @ 2..=4 => counts[(k - 2) as usize] += 1,
            k => return Err(format!("uniform {{2,3,4}} produced {k}")),
        }
    }
    for (i, c) in counts.iter().enumerate() {
        within(
            &format!("uniform frequency of {}", i + 2),
            *c as f64 / draws as f64,
            1.0 / 3.0,
            0.002,
        )?;
    }
    Ok(())
}

fn check_spot_values() -> Result<(), String> {
    let p = TriangularParams::new(30.0, 75.0, 90.0).map_err(|e| e.to_string())?;
    // Left branch: 30 + sqrt(0.5 * 60 * 45).
    within(
        "triangular(30,75,90) at u=0.5",
        sample_triangular(&p, 0.5),
        30.0 + 1350f64.sqrt(),
        1e-12,
    )?;
    // Right branch: 90 - sqrt(0.1 * 60 * 15).
    within(
        "triangular(30,75,90) at u=0.9",
        sample_triangular(&p, 0.9),
        90.0 - 90f64.sqrt(),
        1e-12,
    )?;
    within(
        "triangular at the mode quantile",
        sample_triangular(&p, 0.75),
        75.0,
        1e-12,
    )?;
    within("triangular at u=0", sample_triangular(&p, 0.0), 30.0, 0.0)?;
    let sym = TriangularParams::new(3.0, 5.0, 7.0).map_err(|e| e.to_string())?;
    within(
        "symmetric triangular at u=0.5",
        sample_triangular(&sym, 0.5),
        5.0,
        1e-12,
    )?;
    let e = ExponentialParams::new(2.0).map_err(|e| e.to_string())?;
    within(
        "exponential(2) at u=0.5",
        sample_exponential(&e, 0.5),
        2.0 * std::f64::consts::LN_2,
        1e-12,
    )?;
    within(
        "exponential(2) at u=1",
        sample_exponential(&e, 1.0),
        0.0,
        0.0,
    )?;
    if !(sample_bernoulli(0.4, 0.3999) && !sample_bernoulli(0.4, 0.4)) {
        return Err("bernoulli(0.4) threshold misplaced".into());
    }
    let ks: Vec<u32> = [0.0, 0.3333, 0.3334, 0.6666, 0.6667, 0.9999]
        .iter()
        .map(|&u| sample_uniform_int(2, 4, u))
        .collect();
    if ks != [2, 2, 3, 3, 4, 4] {
        return Err(format!("uniform {{2,3,4}} quantiles {ks:?}"));
    }
    Ok(())
}

/// Every sampler check at `draws` samples each.
pub fn check_all(draws: usize) -> Vec<Check> {
    let stay = StayAttributes::default();
    let mut out: Vec<Check> = [
        ("los_bsy_16_20", &stay.los_bsy_16_20),
        ("los_bsy_21_24", &stay.los_bsy_21_24),
        ("los_nbsy", &stay.los_nbsy),
        ("bed_patience", &stay.bed_patience),
        ("service_patience", &stay.service_patience),
    ]
    .into_iter()
    .map(|(name, p)| {
        (
            format!("triangular {name}"),
            check_triangular(name, p, draws),
        )
    })
    .collect();
    out.push(("exponential inter-arrival".into(), check_exponential(draws)));
    out.push(("bernoulli".into(), check_bernoulli(draws)));
    out.push(("uniform integer".into(), check_uniform_int(draws)));
    out.push(("spot values".into(), check_spot_values()));
    out
}
