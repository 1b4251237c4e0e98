//! Butterworth band-pass built from cascaded biquads.

use std::f64::consts::PI;

/// Normalised biquad coefficients (`a0 = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Coefs {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Coefs {
    fn lowpass(f0: f64, fs: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * f0 / fs;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        Coefs {
            b0: (1.0 - cos) / 2.0 / a0,
            b1: (1.0 - cos) / a0,
            b2: (1.0 - cos) / 2.0 / a0,
            a1: -2.0 * cos / a0,
            a2: (1.0 - alpha) / a0,
        }
    }

    fn highpass(f0: f64, fs: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * f0 / fs;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        Coefs {
            b0: (1.0 + cos) / 2.0 / a0,
            b1: -(1.0 + cos) / a0,
            b2: (1.0 + cos) / 2.0 / a0,
            a1: -2.0 * cos / a0,
            a2: (1.0 - alpha) / a0,
        }
    }

    /// `|H(e^{jω})|` at normalised angular frequency `w`.
    fn magnitude(&self, w: f64) -> f64 {
        // H = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2), z = e^{jw}
        let (s1, c1) = w.sin_cos();
        let (s2, c2) = (2.0 * w).sin_cos();
        let num_re = self.b0 + self.b1 * c1 + self.b2 * c2;
        let num_im = -(self.b1 * s1 + self.b2 * s2);
        let den_re = 1.0 + self.a1 * c1 + self.a2 * c2;
        let den_im = -(self.a1 * s1 + self.a2 * s2);
        (num_re.hypot(num_im)) / (den_re.hypot(den_im))
    }
}

/// Q factors of the two second-order sections of a 4th-order Butterworth.
const BUTTERWORTH4_Q: [f64; 2] = [0.541_196_100_146_197, 1.306_562_964_876_376_5];

/// 4th-order Butterworth high-pass at `low_hz` cascaded with a 4th-order
/// Butterworth low-pass at `high_hz`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPass {
    sections: Vec<Coefs>,
    sample_rate: f64,
}

impl BandPass {
    pub fn butterworth4(low_hz: f64, high_hz: f64, sample_rate: f64) -> Self {
        let mut sections = Vec::with_capacity(4);
        for q in BUTTERWORTH4_Q {
            sections.push(Coefs::highpass(low_hz, sample_rate, q));
        }
        for q in BUTTERWORTH4_Q {
            sections.push(Coefs::lowpass(high_hz, sample_rate, q));
        }
        BandPass {
            sections,
            sample_rate,
        }
    }

    /// Filters `data` in place from a zero initial state.
    pub fn apply(&self, data: &mut [f64]) {
        for c in &self.sections {
            // transposed direct form II
            let (mut z1, mut z2) = (0.0, 0.0);
            for x in data.iter_mut() {
                let y = c.b0 * *x + z1;
                z1 = c.b1 * *x - c.a1 * y + z2;
                z2 = c.b2 * *x - c.a2 * y;
                *x = y;
            }
        }
    }

    /// Amplitude response at `freq_hz`.
    pub fn magnitude_at(&self, freq_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / self.sample_rate;
        self.sections.iter().map(|c| c.magnitude(w)).product()
    }

    /// `sqrt(Σ h[k]^2)`: the rms output for unit-variance white input.
    pub fn noise_gain(&self, settle_samples: usize) -> f64 {
        let mut h = vec![0.0; settle_samples.max(1)];
        h[0] = 1.0;
        self.apply(&mut h);
        h.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}
