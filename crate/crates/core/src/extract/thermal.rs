use super::pressing::require_procedure;
use super::{
    fit_or_flag, ExtractConfig, Extracted, FluxWindowOrigin, SegmentBounds, SegmentLabel,
    HEATFLUX_FEATURES,
};
use crate::curvefit::ModelKind;
use crate::dataio::{Channel, Procedure, Recording};
use crate::dsp::{moving_average, moving_mad};
use crate::error::{Error, Result};

fn argmin(x: &[f64]) -> usize {
    (1..x.len()).fold(0, |b, i| if x[i] < x[b] { i } else { b })
}

fn argmax(x: &[f64]) -> usize {
    (1..x.len()).fold(0, |b, i| if x[i] > x[b] { i } else { b })
}

/// Smoothing window clipped to the record length (kept odd).
fn window_for(n: usize, fs: f64, cfg: &ExtractConfig) -> (usize, bool) {
    let w = cfg.smooth_window(fs);
    if w <= n {
        (w, false)
    } else {
        let w = if n % 2 == 0 { n - 1 } else { n };
        (w.max(1), true)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxSegments {
    /// Last sample before the sustained decrease.
    pub onset: usize,
    pub minimum: usize,
    pub drop: SegmentBounds,
    pub stabilize: Option<SegmentBounds>,
    pub short_stabilize: bool,
    pub short_record: bool,
}

/// Onset, minimum and the two fit segments of a heat-flux trace.
///
/// The centered moving average starts falling half a window before the raw
/// signal does, so the first sample of the negative-derivative run is moved
/// forward by half a window.
pub fn flux_segments(r: &Recording, cfg: &ExtractConfig) -> Result<FluxSegments> {
    require_procedure(r, Procedure::StaticContact)?;
    let flux = r.channel(Channel::HeatFlux)?;
    let fs = r.sample_rate_hz;
    let n = flux.len();
    if n < 3 {
        return Err(Error::Segmentation("heat flux record too short".into()));
    }
    let (w, short_record) = window_for(n, fs, cfg);
    let h = w / 2;
    let s = moving_average(flux, w)?;
    let need = ((cfg.onset_run_s * fs).ceil() as usize).max(1);
    let d: Vec<f64> = s.windows(2).map(|p| p[1] - p[0]).collect();
    let mut run = 0;
    let mut start = None;
    for (i, &v) in d.iter().enumerate() {
        run = if v < 0.0 { run + 1 } else { 0 };
        if run == need {
            start = Some(i + 1 - need);
            break;
        }
    }
    let start = start.ok_or_else(|| Error::Segmentation("no onset detected".into()))?;
    let onset = (start + h).min(n - 1);

    let smooth_min = onset + argmin(&s[onset..]);
    let lo = smooth_min.saturating_sub(h).max(onset);
    let hi = (smooth_min + h + 1).min(n);
    let minimum = lo + argmin(&flux[lo..hi]);
    if minimum <= onset {
        return Err(Error::Segmentation("heat flux never falls below its onset value".into()));
    }
    let drop = SegmentBounds::new(onset, minimum + 1, SegmentLabel::FluxDrop)?;

    let origin = match cfg.flux_window_origin {
        FluxWindowOrigin::Onset => onset,
        FluxWindowOrigin::TrialStart => 0,
    };
    let end = (origin + (cfg.flux_window_s * fs).round() as usize + 1).min(n);
    let stabilize = SegmentBounds::new(minimum, end, SegmentLabel::FluxStabilize).ok();
    let span_s = end.saturating_sub(minimum + 1) as f64 / fs;
    Ok(FluxSegments {
        onset,
        minimum,
        drop,
        stabilize,
        short_stabilize: span_s < cfg.min_stabilize_s,
        short_record: short_record,
    })
}

/// Logistic fit from onset to minimum → `aH1, bH1, cH1`; power-law fit from
/// the minimum to the end of the window → `aH2, bH2, cH2`. Fits use the raw
/// samples inside the segments found on the smoothed trace.
pub fn extract_heatflux(r: &Recording, cfg: &ExtractConfig) -> Result<Extracted> {
    let seg = flux_segments(r, cfg)?;
    let flux = r.channel(Channel::HeatFlux)?;
    let t = &r.timestamps;
    let dt = r.sample_period();
    let mut out = Extracted::default();
    if seg.short_record {
        out.flag(&HEATFLUX_FEATURES, "record_shorter_than_smoothing_window");
    }
    out.segments.push(seg.drop);

    let t0 = t[seg.onset];
    let x: Vec<f64> = t[seg.drop.range()].iter().map(|v| v - t0).collect();
    let names1 = ["aH1", "bH1", "cH1"];
    let p1 = fit_or_flag(&mut out, "flux_drop", &names1, ModelKind::Logistic, &x, &flux[seg.drop.range()], &[], &cfg.fit)
        .map_or(vec![0.0; 3], |f| f.params);
    for (k, name) in names1.iter().enumerate() {
        out.push(name, p1[k]);
    }

    let names2 = ["aH2", "bH2", "cH2"];
    if seg.short_stabilize {
        out.flag(&names2, "stabilize_segment_short");
    }
    let p2 = match seg.stabilize.filter(|s| s.len() >= 4) {
        Some(s2) => {
            out.segments.push(s2);
            let tm = t[seg.minimum];
            let x: Vec<f64> = t[s2.range()].iter().map(|v| v - tm + dt).collect();
            fit_or_flag(&mut out, "flux_stabilize", &names2, ModelKind::PowerLaw, &x, &flux[s2.range()], &[], &cfg.fit)
                .map_or(vec![0.0; 3], |f| f.params)
        }
        None => {
            out.flag(&names2, "too_few_points");
            vec![0.0; 3]
        }
    };
    for (k, name) in names2.iter().enumerate() {
        out.push(name, p2[k]);
    }
    Ok(out)
}

/// Sharp-drop interval of a temperature trace: from the last smoothed local
/// maximum before the steepest descent to the first local minimum after it.
/// The end is the raw minimum between the steepest point and half a window
/// past the smoothed minimum, since smoothing rounds off a sharp turn.
fn temp_interval(raw: &[f64], s: &[f64], h: usize) -> Option<(usize, usize)> {
    let d: Vec<f64> = s.windows(2).map(|p| p[1] - p[0]).collect();
    let steep = argmin(&d);
    if !(d[steep] < 0.0) {
        return None;
    }
    let mut a = steep;
    while a > 0 && s[a - 1] > s[a] {
        a -= 1;
    }
    let start = (a + h).min(steep);
    let mut b = steep + 1;
    while b + 1 < s.len() && s[b + 1] < s[b] {
        b += 1;
    }
    let lo = steep.max(start + 1);
    let hi = (b + h + 1).min(raw.len());
    if lo >= hi {
        return None;
    }
    let end = lo + argmin(&raw[lo..hi]);
    (end > start).then_some((start, end))
}

/// 4PL fit over the sharp drop → `aT, bT, cT, dT`; representative values
/// from the raw trace → `aT0, bT0, cT0, dT0`; peak of the moving MAD.
pub fn extract_temperature(r: &Recording, cfg: &ExtractConfig) -> Result<Extracted> {
    require_procedure(r, Procedure::StaticContact)?;
    let temp = r.channel(Channel::SkinTemp)?;
    let n = temp.len();
    if n < 3 {
        return Err(Error::Segmentation("temperature record too short".into()));
    }
    let fs = r.sample_rate_hz;
    let t = &r.timestamps;
    let dt = r.sample_period();
    let (w, short_record) = window_for(n, fs, cfg);
    let s = moving_average(temp, w)?;
    let mut out = Extracted::default();
    let fit_names = ["aT", "bT", "cT", "dT"];
    if short_record {
        out.flag(&fit_names, "record_shorter_than_smoothing_window");
    }

    let interval = temp_interval(temp, &s, w / 2);
    let (params, rep) = match interval {
        Some((start, end)) if end + 1 - start >= 5 => {
            let seg = SegmentBounds::new(start, end + 1, SegmentLabel::TempDrop)?;
            out.segments.push(seg);
            let ts = t[start];
            let x: Vec<f64> = t[seg.range()].iter().map(|v| v - ts + dt).collect();
            let p = fit_or_flag(&mut out, "temp_drop", &fit_names, ModelKind::FourPl, &x, &temp[seg.range()], &[], &cfg.fit)
                .map_or(vec![0.0; 4], |f| f.params);
            let a0 = temp[..=start].iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let imin = start + argmin(&temp[seg.range()]);
            let c0 = temp[imin..].iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            (p, [a0, temp[imin], c0])
        }
        _ => {
            out.flag(&fit_names, "temperature_drop_undetected");
            let a0 = temp[0];
            let imin = argmin(temp);
            let c0 = temp[imin..].iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            (vec![temp[0], 0.0, 0.0, temp[n - 1]], [a0, temp[imin], c0])
        }
    };
    for (k, name) in fit_names.iter().enumerate() {
        out.push(name, params[k]);
    }
    out.push("aT0", rep[0]);
    out.push("bT0", rep[1]);
    out.push("cT0", rep[2]);
    out.push("dT0", temp[n - 1]);
    let k = cfg.mad_window.min(n);
    let mad = moving_mad(temp, k)?;
    out.push("madPeak", mad[argmax(&mad)]);
    Ok(out)
}

#[cfg(test)]
/// Index of the moving-MAD peak, for locating contact.
pub(crate) fn mad_peak_index(x: &[f64], k: usize) -> Result<usize> {
    Ok(argmax(&moving_mad(x, k.min(x.len()))?))
}
