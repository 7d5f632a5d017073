use super::{fit_or_flag, ExtractConfig, Extracted, SegmentBounds, SegmentLabel, PRESSING_FEATURES};
use crate::curvefit::ModelKind;
use crate::dataio::{Channel, Procedure, Recording};
use crate::dsp::median;
use crate::error::{Error, Result};

/// Contact and phase boundaries of a pressing trial.
#[derive(Debug, Clone, PartialEq)]
pub struct PressingSegments {
    /// Last baseline sample before force starts rising; depth is re-zeroed here.
    pub contact: usize,
    pub baseline_n: f64,
    pub press: SegmentBounds,
    pub lift: SegmentBounds,
    /// Force decreased noticeably during the press phase.
    pub non_monotone: bool,
}

pub(crate) fn require_procedure(r: &Recording, procedure: Procedure) -> Result<()> {
    if r.procedure != procedure {
        return Err(Error::invalid(format!(
            "trial {} is {}, expected {}",
            r.trial_id, r.procedure, procedure
        )));
    }
    Ok(())
}

/// First contact is the first run of `debounce` samples above the threshold,
/// walked back to where the force left its baseline. The press phase runs
/// from contact to the first plateau sample, the lift phase from the last
/// plateau sample until the force is back within the threshold of baseline.
pub fn segment_pressing(r: &Recording, cfg: &ExtractConfig) -> Result<PressingSegments> {
    require_procedure(r, Procedure::Pressing)?;
    let f = r.channel(Channel::NormalForce)?;
    let n = f.len();
    let need = ((cfg.contact_debounce_s * r.sample_rate_hz).ceil() as usize).max(1);
    let thr = cfg.contact_threshold_n;
    let crossing =
        first_sustained(f, thr, need).ok_or_else(|| Error::Segmentation("no contact detected".into()))?;
    let baseline = if crossing == 0 {
        0.0
    } else {
        median(&mut f[..crossing].to_vec())
    };
    let mut j = crossing;
    while j > 0 && f[j - 1] > baseline && f[j - 1] < f[j] {
        j -= 1;
    }
    let contact = j.saturating_sub(1);

    let fmax = f[contact..].iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let plateau = cfg.plateau_fraction * fmax;
    let press_end = (contact..n).find(|&i| f[i] >= plateau).expect("max is reached");
    let lift_start = (contact..n).rev().find(|&i| f[i] >= plateau).expect("max is reached");
    let lift_end = (lift_start + 1..n)
        .find(|&i| f[i] <= baseline + thr)
        .map_or(n, |i| i + 1);

    if press_end < contact + 3 || lift_end < lift_start + 4 {
        return Err(Error::Segmentation(format!(
            "cannot identify press and lift phases in {}",
            r.trial_id
        )));
    }
    let mut running = f64::NEG_INFINITY;
    let mut non_monotone = false;
    for &v in &f[contact..=press_end] {
        running = running.max(v);
        if running - v > 0.1 * fmax {
            non_monotone = true;
        }
    }
    Ok(PressingSegments {
        contact,
        baseline_n: baseline,
        press: SegmentBounds::new(contact, press_end + 1, SegmentLabel::PressPhase)?,
        lift: SegmentBounds::new(lift_start, lift_end, SegmentLabel::LiftPhase)?,
        non_monotone,
    })
}

/// Start of the first run of `need` consecutive samples above `thr`.
pub(crate) fn first_sustained(x: &[f64], thr: f64, need: usize) -> Option<usize> {
    let mut run = 0;
    for (i, &v) in x.iter().enumerate() {
        run = if v > thr { run + 1 } else { 0 };
        if run == need {
            return Some(i + 1 - need);
        }
    }
    None
}

/// Piecewise-linear interpolation of `y(x)` after sorting by `x`.
fn interp(points: &mut [(f64, f64)], at: f64) -> f64 {
    if points[0].0 >= at {
        return points[0].1;
    }
    let last = points[points.len() - 1];
    if last.0 <= at {
        return last.1;
    }
    let k = points.partition_point(|p| p.0 < at);
    let (x0, y0) = points[k - 1];
    let (x1, y1) = points[k];
    if x1 == x0 {
        y1
    } else {
        y0 + (y1 - y0) * (at - x0) / (x1 - x0)
    }
}

fn sorted(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    let mut p: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    p
}

/// Mean of `lift − press` depth over a uniform grid spanning the force range
/// both phases cover.
pub(crate) fn hysteresis(press: (&[f64], &[f64]), lift: (&[f64], &[f64]), points: usize) -> Option<f64> {
    let mut p = sorted(press.0, press.1);
    let mut l = sorted(lift.0, lift.1);
    let lo = p[0].0.max(l[0].0);
    let hi = p[p.len() - 1].0.min(l[l.len() - 1].0);
    if hi <= lo {
        return None;
    }
    let sum: f64 = (0..points)
        .map(|k| {
            let g = lo + (hi - lo) * k as f64 / (points - 1) as f64;
            interp(&mut l, g) - interp(&mut p, g)
        })
        .sum();
    Some(sum / points as f64)
}

/// `aP1, bP1` from the press phase with `c` pinned to 0, `aP2, bP2, cP2`
/// from the lift phase, and the hysteresis `deltaP`.
pub fn extract_pressing(r: &Recording, cfg: &ExtractConfig) -> Result<Extracted> {
    let seg = segment_pressing(r, cfg)?;
    let force = r.channel(Channel::NormalForce)?;
    let raw_depth = r.channel(Channel::Indentation)?;
    let zero = raw_depth[seg.contact];
    let depth: Vec<f64> = raw_depth.iter().map(|d| d - zero).collect();
    let mut out = Extracted::default();
    out.segments = vec![seg.press, seg.lift];
    if seg.non_monotone {
        out.flag(&PRESSING_FEATURES, "press_non_monotone");
    }

    let (pf, pd) = (&force[seg.press.range()], &depth[seg.press.range()]);
    let (lf, ld) = (&force[seg.lift.range()], &depth[seg.lift.range()]);
    let span = |d: &[f64]| {
        let (lo, hi) = d.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        hi - lo
    };
    let press_names = ["aP1", "bP1"];
    let lift_names = ["aP2", "bP2", "cP2"];
    if span(pd) < cfg.low_signal_mm {
        out.flag(&press_names, "low_signal");
        out.push("aP1", 0.0);
        out.push("bP1", 0.0);
    } else {
        let fit = fit_or_flag(&mut out, "press", &press_names, ModelKind::Exponential, pf, pd, &[None, None, Some(0.0)], &cfg.fit);
        let p = fit.map_or([0.0; 3], |f| [f.params[0], f.params[1], f.params[2]]);
        out.push("aP1", p[0]);
        out.push("bP1", p[1]);
    }
    if span(ld) < cfg.low_signal_mm {
        out.flag(&lift_names, "low_signal");
        let level = ld.iter().sum::<f64>() / ld.len() as f64;
        out.push("aP2", 0.0);
        out.push("bP2", 0.0);
        out.push("cP2", level);
    } else {
        let fit = fit_or_flag(&mut out, "lift", &lift_names, ModelKind::Exponential, lf, ld, &[], &cfg.fit);
        let p = fit.map_or(vec![0.0; 3], |f| f.params);
        out.push("aP2", p[0]);
        out.push("bP2", p[1]);
        out.push("cP2", p[2]);
    }
    let delta = hysteresis((pf, pd), (lf, ld), cfg.hysteresis_grid_points).unwrap_or_else(|| {
        out.flag(&["deltaP"], "no_common_force_range");
        0.0
    });
    out.push("deltaP", delta);
    Ok(out)
}
