//! Small deterministic RNG (splitmix64) for seed-fixed probe operators and
//! fuzzed test inputs. Byte-stable across platforms and releases, which the
//! report determinism contract relies on.

use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct Rng64 {
    state: u64,
}

impl Rng64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn next_usize(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Uniform on the unit circle.
    pub fn next_phase(&mut self) -> Complex64 {
        let theta = 2.0 * PI * self.next_f64();
        Complex64::new(theta.cos(), theta.sin())
    }

    /// Uniform in the closed unit disk.
    pub fn next_complex_disk(&mut self) -> Complex64 {
        let r = self.next_f64().sqrt();
        r * self.next_phase()
    }

    /// Complex with both parts uniform in `[-1, 1]`.
    pub fn next_complex_box(&mut self) -> Complex64 {
        Complex64::new(self.next_range(-1.0, 1.0), self.next_range(-1.0, 1.0))
    }
}
