//! Dormand–Prince 5(4) with the standard fourth-order continuous extension.

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

pub struct Settings {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

/// Integrates `y' = f(y)` on `[0, t_end]` and calls `sample(t, y)` at every
/// multiple of `dt` (plus `t_end`) using dense output.
pub fn dopri5<F, S>(
    mut f: F,
    y0: &[f64],
    t_end: f64,
    dt: f64,
    cfg: &Settings,
    mut sample: S,
) -> Result<StepStats>
where
    F: FnMut(&[f64], &mut [f64]),
    S: FnMut(f64, &[f64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut ys = vec![0.0; n];
    let mut y1 = vec![0.0; n];
    let mut cont = vec![vec![0.0; n]; 5];
    let mut stats = StepStats::default();
    let mut t = 0.0;

    f(&y, &mut k[0]);
    stats.evaluations += 1;
    let mut h = initial_step(&mut f, &y, &k[0], cfg, t_end);
    stats.evaluations += 1;

    sample(0.0, &y);
    // grid index of the next sample; the final sample is t_end itself
    let mut idx = 1usize;
    let grid = |i: usize| {
        let ts = i as f64 * dt;
        if ts < t_end * (1.0 - 1e-12) {
            ts
        } else {
            t_end
        }
    };
    let mut next_ts = Some(grid(1));

    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;

    while t < t_end {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(Error::IntegrationFailure {
                t,
                reason: format!("step budget of {} exhausted", cfg.max_steps),
            });
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::IntegrationFailure {
                t,
                reason: format!("step size underflow (h = {h:e}); problem may be stiff"),
            });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        stage(&y, h, &[(A21, 0)], &k, &mut ys);
        f(&ys, &mut k[1]);
        stage(&y, h, &[(A31, 0), (A32, 1)], &k, &mut ys);
        f(&ys, &mut k[2]);
        stage(&y, h, &[(A41, 0), (A42, 1), (A43, 2)], &k, &mut ys);
        f(&ys, &mut k[3]);
        stage(&y, h, &[(A51, 0), (A52, 1), (A53, 2), (A54, 3)], &k, &mut ys);
        f(&ys, &mut k[4]);
        stage(&y, h, &[(A61, 0), (A62, 1), (A63, 2), (A64, 3), (A65, 4)], &k, &mut ys);
        f(&ys, &mut k[5]);
        stage(&y, h, &[(A71, 0), (A73, 2), (A74, 3), (A75, 4), (A76, 5)], &k, &mut y1);
        f(&y1, &mut k[6]);
        stats.evaluations += 6;

        let mut err = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i]
                    + E7 * k[6][i]);
            let sc = cfg.atol + cfg.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            stats.rejected += 1;
            h *= 0.1;
            last_rejected = true;
            continue;
        }

        // PI step control (Hairer's beta = 0.04)
        let fac11 = err.powf(0.2 - 0.04 * 0.75);
        let mut fac = fac11 / fac_old.powf(0.04) / 0.9;
        fac = fac.clamp(1.0 / 10.0, 5.0);
        let h_new = h / fac;

        if err <= 1.0 {
            fac_old = err.max(1e-4);
            stats.accepted += 1;
            for i in 0..n {
                let dy = y1[i] - y[i];
                let bspl = h * k[0][i] - dy;
                cont[0][i] = y[i];
                cont[1][i] = dy;
                cont[2][i] = bspl;
                cont[3][i] = dy - h * k[6][i] - bspl;
                cont[4][i] = h
                    * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i]
                        + D6 * k[5][i]
                        + D7 * k[6][i]);
            }
            let t_new = if last { t_end } else { t + h };
            while let Some(ts) = next_ts {
                if ts > t_new {
                    break;
                }
                let theta = ((ts - t) / h).clamp(0.0, 1.0);
                let th1 = 1.0 - theta;
                for i in 0..n {
                    ys[i] = cont[0][i]
                        + theta
                            * (cont[1][i]
                                + th1 * (cont[2][i] + theta * (cont[3][i] + th1 * cont[4][i])));
                }
                sample(ts, &ys);
                idx += 1;
                next_ts = (ts < t_end).then(|| grid(idx));
            }
            if y1.iter().any(|v| !v.is_finite()) {
                return Err(Error::IntegrationFailure {
                    t: t_new,
                    reason: "state became non-finite".into(),
                });
            }
            y.copy_from_slice(&y1);
            k.swap(0, 6);
            t = t_new;
            let mut hn = h_new.min(cfg.max_step);
            if last_rejected {
                hn = hn.min(h);
            }
            last_rejected = false;
            h = hn;
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h /= (fac11 / 0.9).min(10.0);
        }
    }
    Ok(stats)
}

#[inline]
fn stage(y: &[f64], h: f64, coeffs: &[(f64, usize)], k: &[Vec<f64>], out: &mut [f64]) {
    for i in 0..y.len() {
        let mut acc = 0.0;
        for &(a, j) in coeffs {
            acc += a * k[j][i];
        }
        out[i] = y[i] + h * acc;
    }
}

fn initial_step<F: FnMut(&[f64], &mut [f64])>(
    f: &mut F,
    y: &[f64],
    f0: &[f64],
    cfg: &Settings,
    t_end: f64,
) -> f64 {
    let n = y.len() as f64;
    let sc: Vec<f64> = y.iter().map(|v| cfg.atol + cfg.rtol * v.abs()).collect();
    let d0 = (y.iter().zip(&sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().zip(&sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(cfg.max_step).min(t_end);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(v, d)| v + h0 * d).collect();
    let mut f1 = vec![0.0; y.len()];
    f(&y1, &mut f1);
    let d2 = (f1
        .iter()
        .zip(f0)
        .zip(&sc)
        .map(|((a, b), s)| ((a - b) / s).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(cfg.max_step).min(t_end)
}
