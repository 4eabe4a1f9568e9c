//! Radix-2 discrete Fourier transform with unitary scaling.
//!
//! Both directions scale by `1/sqrt(len)`, so `inverse(forward(v)) == v` and
//! the transform preserves the l2 norm. The PAPR solvers never call into this
//! module; every transform executed on a thread is tallied so callers can
//! verify that with [`count_transforms`].

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `X_k = len^{-1/2} * sum_n x_n exp(-j 2 pi k n / len)`
    Forward,
    /// `x_n = len^{-1/2} * sum_k X_k exp(+j 2 pi k n / len)`
    Inverse,
}

thread_local! {
    static TRANSFORMS: Cell<u64> = const { Cell::new(0) };
    static PLANS: RefCell<HashMap<usize, Rc<Radix2Plan>>> = RefCell::new(HashMap::new());
}

/// Number of transforms executed on the calling thread so far.
pub fn transform_count() -> u64 {
    TRANSFORMS.with(Cell::get)
}

/// Runs `f` and returns its result along with the number of transforms it
/// executed on this thread.
pub fn count_transforms<R>(f: impl FnOnce() -> R) -> (R, u64) {
    let before = transform_count();
    let out = f();
    (out, transform_count() - before)
}

/// Precomputed twiddles and bit-reversal permutation for one length.
#[derive(Debug, Clone)]
pub struct Radix2Plan {
    len: usize,
    twiddles: Vec<Complex64>,
    bit_reverse: Vec<usize>,
    scale: f64,
}

impl Radix2Plan {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::UnsupportedLength(len));
        }
        let twiddles = (0..len / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64))
            .collect();
        let bits = len.trailing_zeros();
        let bit_reverse = (0..len)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        Ok(Self {
            len,
            twiddles,
            bit_reverse,
            scale: 1.0 / (len as f64).sqrt(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place transform of `buf`, which must have the plan's length.
    pub fn process(&self, buf: &mut [Complex64], direction: Direction) -> Result<()> {
        crate::error::check_len("dft", self.len, buf.len())?;
        TRANSFORMS.with(|c| c.set(c.get() + 1));

        for (i, &j) in self.bit_reverse.iter().enumerate() {
            if i < j {
                buf.swap(i, j);
            }
        }

        let n = self.len;
        let mut half = 1;
        while half < n {
            let size = half * 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for j in 0..half {
                    let w = self.twiddles[j * stride];
                    let w = match direction {
                        Direction::Forward => w,
                        Direction::Inverse => w.conj(),
                    };
                    let a = buf[start + j];
                    let b = buf[start + j + half] * w;
                    buf[start + j] = a + b;
                    buf[start + j + half] = a - b;
                }
            }
            half = size;
        }

        for v in buf.iter_mut() {
            *v *= self.scale;
        }
        Ok(())
    }
}

fn cached_plan(len: usize) -> Result<Rc<Radix2Plan>> {
    PLANS.with(|plans| {
        if let Some(plan) = plans.borrow().get(&len) {
            return Ok(Rc::clone(plan));
        }
        let plan = Rc::new(Radix2Plan::new(len)?);
        plans.borrow_mut().insert(len, Rc::clone(&plan));
        Ok(plan)
    })
}

/// Transforms `buf` in place.
pub fn dft_in_place(buf: &mut [Complex64], direction: Direction) -> Result<()> {
    cached_plan(buf.len())?.process(buf, direction)
}

/// Returns the transform of `v`.
pub fn dft(v: &[Complex64], direction: Direction) -> Result<Vec<Complex64>> {
    let mut out = v.to_vec();
    dft_in_place(&mut out, direction)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(len: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    // Direct O(n^2) summation, unitary scale.
    fn naive_dft(v: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = v.len();
        (0..n)
            .map(|k| {
                v.iter()
                    .enumerate()
                    .fold(Complex64::new(0.0, 0.0), |acc, (i, x)| {
                        let phase = sign * 2.0 * PI * ((k * i) % n) as f64 / n as f64;
                        acc + x * Complex64::from_polar(1.0, phase)
                    })
                    / (n as f64).sqrt()
            })
            .collect()
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let v = [1.0, 0.0, 0.0, 0.0].map(|re| Complex64::new(re, 0.0));
        let out = dft(&v, Direction::Forward).unwrap();
        for x in out {
            assert!((x - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn matches_direct_summation() {
        let v = random_vec(16, 7);
        for (dir, sign) in [(Direction::Forward, -1.0), (Direction::Inverse, 1.0)] {
            let fast = dft(&v, dir).unwrap();
            let slow = naive_dft(&v, sign);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-13, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn roundtrip_is_identity() {
        for (len, seed) in [(8, 1), (64, 2), (1024, 3), (2048, 4)] {
            let v = random_vec(len, seed);
            let back = dft(&dft(&v, Direction::Forward).unwrap(), Direction::Inverse).unwrap();
            let err = v
                .iter()
                .zip(&back)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "len {len}: {err}");
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert_eq!(
            dft(&[Complex64::new(1.0, 0.0); 12], Direction::Forward),
            Err(Error::UnsupportedLength(12))
        );
        assert_eq!(
            dft(&[], Direction::Forward),
            Err(Error::UnsupportedLength(0))
        );
    }

    #[test]
    fn length_one_is_identity() {
        let v = [Complex64::new(0.3, -0.2)];
        assert_eq!(dft(&v, Direction::Inverse).unwrap(), v.to_vec());
    }

    #[test]
    fn counts_transforms_on_this_thread() {
        let v = random_vec(32, 9);
        let (_, calls) = count_transforms(|| {
            let f = dft(&v, Direction::Forward).unwrap();
            dft(&f, Direction::Inverse).unwrap()
        });
        assert_eq!(calls, 2);
    }
}
