//! Filtering, spectra and MFCCs on a synthetic vibration signal.

use std::f64::consts::PI;

use tactile_core::dsp::{bandpass, mfcc, power_spectrum, spectral_descriptors, time_descriptors, MfccConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fs = 5000.0;
    let x: Vec<f64> = (0..20_000)
        .map(|i| {
            let t = i as f64 / fs;
            (2.0 * PI * 240.0 * t).sin() + 0.2 * (2.0 * PI * 480.0 * t).sin() + 0.5 * (2.0 * PI * 3.0 * t).sin()
        })
        .collect();

    // Drop the slow drift before looking at the texture band.
    let y = bandpass(&x, fs, 20.0, 1000.0)?;
    let td = time_descriptors(&y);
    println!("rms {:.4}  crest {:.3}  thd {:.4}", td.get("s3").unwrap(), td.get("s9").unwrap(), td.get("s11").unwrap());

    let spec = power_spectrum(&y, fs)?;
    for (k, v) in spectral_descriptors(&spec).values {
        println!("{k:>4} {v:.5}");
    }

    let c = mfcc(&y, fs, &MfccConfig::default())?;
    println!("mfcc {:.3?}", c);
    Ok(())
}
